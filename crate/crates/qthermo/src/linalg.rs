//! Dense complex matrix helpers shared across the crate.
//!
//! Everything here operates on small matrices (d <= 16, superoperators up to
//! d^2 x d^2 = 256) so plain dense algorithms are used throughout. The
//! operator-to-vector convention is column stacking: `vec(X)` stacks the
//! columns of `X`, so that `vec(A X B) = (B^T ⊗ A) vec(X)`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Scale, Side};
pub use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = Mat<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    Mat::from_fn(d, d, |i, j| if i == j { cr(1.0) } else { cr(0.0) })
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

pub fn scale(m: &CMat, z: C64) -> CMat {
    m * Scale(z)
}

/// (m + m†)/2
pub fn hermitize(m: &CMat) -> CMat {
    let d = dagger(m);
    (m + &d) * Scale(cr(0.5))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn trace(m: &CMat) -> C64 {
    let mut t = cr(0.0);
    for i in 0..m.nrows().min(m.ncols()) {
        t += m[(i, i)];
    }
    t
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Maximum absolute column sum.
pub fn one_norm(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        let mut s = 0.0;
        for i in 0..m.nrows() {
            s += m[(i, j)].norm();
        }
        best = best.max(s);
    }
    best
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Largest absolute deviation from Hermiticity.
pub fn hermiticity_deviation(m: &CMat) -> f64 {
    let mut dev = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Column-stacking vectorization: column j of `x` lands in rows j*d..(j+1)*d.
pub fn vec_col(x: &CMat) -> CMat {
    let d = x.nrows();
    Mat::from_fn(d * x.ncols(), 1, |k, _| x[(k % d, k / d)])
}

pub fn unvec_col(v: &CMat, d: usize) -> CMat {
    Mat::from_fn(d, d, |i, j| v[(j * d + i, 0)])
}

/// Kronecker product, consistent with the column-stacking convention.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Hermitian eigendecomposition, eigenvalues ascending.
///
/// Returns `(eigenvalues, U)` with the i-th column of `U` the eigenvector of
/// the i-th eigenvalue. The input is symmetrized internally; callers are
/// expected to pass matrices that are Hermitian to working precision.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let d = m.nrows();
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinAlg(format!("self-adjoint eigendecomposition: {e:?}")))?;
    let u = evd.U();
    let s = evd.S();
    let mut order: Vec<usize> = (0..d).collect();
    let vals: Vec<f64> = (0..d).map(|i| s[i].re).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let sorted_u = Mat::from_fn(d, d, |i, j| u[(i, order[j])]);
    Ok((sorted_vals, sorted_u))
}

/// General complex eigendecomposition: `(eigenvalues, right eigenvectors)`.
pub fn eig_general(m: &CMat) -> Result<(Vec<C64>, CMat)> {
    let evd = m
        .eigen()
        .map_err(|e| Error::LinAlg(format!("general eigendecomposition: {e:?}")))?;
    let d = m.nrows();
    let u = evd.U();
    let s = evd.S();
    let vals: Vec<C64> = (0..d).map(|i| s[i]).collect();
    let vecs = Mat::from_fn(d, d, |i, j| u[(i, j)]);
    Ok((vals, vecs))
}

pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    let svd = m
        .svd()
        .map_err(|e| Error::LinAlg(format!("singular value decomposition: {e:?}")))?;
    let s = svd.S();
    Ok((0..m.nrows().min(m.ncols())).map(|i| s[i].re).collect())
}

/// 2-norm condition number.
pub fn condition_number(m: &CMat) -> Result<f64> {
    let sv = singular_values(m)?;
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let lu = a.partial_piv_lu();
    Ok(lu.solve(b))
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant. Accurate to machine precision at the sizes used here.
pub fn expm(a: &CMat) -> CMat {
    const THETA13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let d = a.nrows();
    let norm = one_norm(a);
    let s: i32 = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a1 = a * Scale(cr(0.5f64.powi(s)));
    let id = identity(d);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * Scale(cr(B[13])) + &a4 * Scale(cr(B[11])) + &a2 * Scale(cr(B[9]));
    let u = &a1
        * (&a6 * &u_inner
            + &a6 * Scale(cr(B[7]))
            + &a4 * Scale(cr(B[5]))
            + &a2 * Scale(cr(B[3]))
            + &id * Scale(cr(B[1])));
    let v_inner = &a6 * Scale(cr(B[12])) + &a4 * Scale(cr(B[10])) + &a2 * Scale(cr(B[8]));
    let v = &a6 * &v_inner
        + &a6 * Scale(cr(B[6]))
        + &a4 * Scale(cr(B[4]))
        + &a2 * Scale(cr(B[2]))
        + &id * Scale(cr(B[0]));
    let num = &v + &u;
    let den = &v - &u;
    let lu = den.partial_piv_lu();
    let mut r = lu.solve(&num);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Complex Ginibre matrix: i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * cr(std::f64::consts::FRAC_1_SQRT_2)
    })
}

/// Random traceless Hermitian matrix with unit Frobenius norm.
pub fn random_traceless_hermitian<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    let mut h = hermitize(&g);
    let tr = trace(&h) / cr(d as f64);
    for i in 0..d {
        h[(i, i)] -= tr;
    }
    let n = frobenius_norm(&h);
    h * Scale(cr(1.0 / n))
}

/// Haar-random unitary via modified Gram-Schmidt on a Ginibre matrix.
///
/// MGS produces an R factor with real positive diagonal, which is exactly the
/// phase convention needed for the Haar measure.
pub fn haar_unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    loop {
        let g = ginibre(rng, d, d);
        if let Some(q) = gram_schmidt(&g) {
            return q;
        }
    }
}

fn gram_schmidt(g: &CMat) -> Option<CMat> {
    let d = g.nrows();
    let mut q = g.to_owned();
    for j in 0..d {
        for k in 0..j {
            let mut dot = cr(0.0);
            for i in 0..d {
                dot += q[(i, k)].conj() * q[(i, j)];
            }
            for i in 0..d {
                let sub = dot * q[(i, k)];
                q[(i, j)] -= sub;
            }
        }
        let mut norm = 0.0;
        for i in 0..d {
            norm += q[(i, j)].norm_sqr();
        }
        let norm = norm.sqrt();
        if norm < 1e-12 {
            return None;
        }
        for i in 0..d {
            q[(i, j)] *= cr(1.0 / norm);
        }
    }
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn approx_mat(a: &CMat, b: &CMat, tol: f64) {
        assert_eq!(a.nrows(), b.nrows());
        assert_eq!(a.ncols(), b.ncols());
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                assert!(
                    (a[(i, j)] - b[(i, j)]).norm() < tol,
                    "entry ({i},{j}): {:?} vs {:?}",
                    a[(i, j)],
                    b[(i, j)]
                );
            }
        }
    }

    #[test]
    fn vec_identity_for_sandwich_products() {
        // vec(A X B) = (B^T ⊗ A) vec(X) on random matrices
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = ginibre(&mut rng, 3, 3);
            let b = ginibre(&mut rng, 3, 3);
            let x = ginibre(&mut rng, 3, 3);
            let lhs = vec_col(&(&a * &x * &b));
            let rhs = &kron(&b.transpose().to_owned(), &a) * &vec_col(&x);
            approx_mat(&lhs, &rhs, 1e-12);
        }
    }

    #[test]
    fn unvec_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let x = ginibre(&mut rng, 4, 4);
        let v = vec_col(&x);
        approx_mat(&unvec_col(&v, 4), &x, 1e-300);
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = zeros(3, 3);
        approx_mat(&expm(&z), &identity(3), 1e-15);
    }

    #[test]
    fn expm_matches_diagonal_exponential() {
        let m = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                c(-(i as f64) - 0.5, 0.3 * i as f64)
            } else {
                cr(0.0)
            }
        });
        let e = expm(&m);
        for i in 0..3 {
            let expect = m[(i, i)].exp();
            assert!((e[(i, i)] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn expm_matches_eigendecomposition_for_hermitian() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let g = ginibre(&mut rng, 4, 4);
        let h = hermitize(&g) * Scale(cr(2.0));
        let e = expm(&h);
        let (vals, u) = eigh(&h).unwrap();
        let diag = Mat::from_fn(4, 4, |i, j| if i == j { cr(vals[i].exp()) } else { cr(0.0) });
        let expect = &u * &diag * dagger(&u);
        approx_mat(&e, &expect, 1e-11);
    }

    #[test]
    fn expm_additivity_on_commuting_pair() {
        // exp(A) exp(A) = exp(2A)
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let a = ginibre(&mut rng, 3, 3) * Scale(cr(0.7));
        let e1 = expm(&a);
        let prod = &e1 * &e1;
        let e2 = expm(&(&a * Scale(cr(2.0))));
        approx_mat(&prod, &e2, 1e-12);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for d in [2usize, 3, 4] {
            let u = haar_unitary(&mut rng, d);
            let prod = dagger(&u) * &u;
            approx_mat(&prod, &identity(d), 1e-12);
        }
    }

    #[test]
    fn eigh_reconstructs_matrix() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let h = hermitize(&ginibre(&mut rng, 4, 4));
        let (vals, u) = eigh(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let diag = Mat::from_fn(4, 4, |i, j| if i == j { cr(vals[i]) } else { cr(0.0) });
        approx_mat(&(&u * &diag * dagger(&u)), &h, 1e-12);
    }

    #[test]
    fn eig_general_satisfies_eigen_equation() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let m = ginibre(&mut rng, 4, 4);
        let (vals, vecs) = eig_general(&m).unwrap();
        for j in 0..4 {
            for i in 0..4 {
                let mut mv = cr(0.0);
                for k in 0..4 {
                    mv += m[(i, k)] * vecs[(k, j)];
                }
                assert!((mv - vals[j] * vecs[(i, j)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn one_norm_and_frobenius() {
        let m = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 0 { c(3.0, 4.0) } else { cr(0.0) });
        assert_abs_diff_eq!(one_norm(&m), 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(frobenius_norm(&m), 5.0, epsilon = 1e-15);
    }
}
