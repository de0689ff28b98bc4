//! Spectral decomposition of time-local generators: eigenvalues,
//! eigenmatrices, the instantaneous fixed point, and the randomized
//! Kossakowski positivity scan.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::generator::{apply_adjoint, apply_generator, build_superop, GeneratorSpec, SuperopMatrix};
use crate::linalg::{
    condition_number, cr, dagger, eig_general, frobenius_norm, ginibre, haar_unitary, hermitize,
    identity, max_abs_entry, scale, trace, unvec_col, CMat,
};
use crate::state::{state_to_bloch, BlochVector, DensityMatrix, HermitianObservable};

/// Relative tolerance classifying an eigenvalue as zero.
pub const NULL_SPACE_RTOL: f64 = 1e-9;
/// Condition-number bound above which the eigenbasis counts as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e12;
/// IFP eigenvalues below this are a genuine negativity, not rounding.
pub const IFP_STATE_TOL: f64 = 1e-9;

/// The trace-normalized zero-eigenvalue eigenmatrix, when it is a state.
#[derive(Clone, Debug)]
pub enum Ifp {
    State(DensityMatrix),
    /// Trace-one Hermitian fixed point with a genuinely negative eigenvalue.
    NotAState {
        matrix: HermitianObservable,
        min_eig: f64,
    },
}

impl Ifp {
    pub fn as_state(&self) -> Result<&DensityMatrix> {
        match self {
            Ifp::State(rho) => Ok(rho),
            Ifp::NotAState { min_eig, .. } => Err(Error::IfpNotAState { min_eig: *min_eig }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Generator eigenvalues; `null_index` marks the fixed-point one.
    pub eigenvalues: Vec<C64>,
    /// Unit-Frobenius eigenmatrices, aligned with `eigenvalues`.
    pub eigenmatrices: Vec<CMat>,
    pub null_index: usize,
    pub ifp: Ifp,
    /// Bloch vector of the IFP for qubit generators.
    pub ifp_bloch: Option<BlochVector>,
}

impl SpectralDecomposition {
    /// Largest real part among the non-null eigenvalues.
    pub fn max_nonzero_real_part(&self) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.null_index)
            .map(|(_, l)| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Diagonalize the generator matrix and extract the instantaneous fixed point.
pub fn spectral_decompose(m: &SuperopMatrix) -> Result<SpectralDecomposition> {
    let d = m.dim;
    let (vals, vecs) = eig_general(&m.mat)?;
    let scale_mag = vals.iter().map(|l| l.norm()).fold(0.0f64, f64::max);
    if scale_mag == 0.0 {
        return Err(Error::NonUniqueIfp { null_dim: d * d });
    }
    let null_tol = NULL_SPACE_RTOL * scale_mag;
    let null: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i].norm() < null_tol)
        .collect();
    if null.len() != 1 {
        return Err(Error::NonUniqueIfp {
            null_dim: null.len(),
        });
    }
    let cond = condition_number(&vecs)?;
    if cond > DEFECTIVE_CONDITION {
        return Err(Error::DefectiveGenerator { condition: cond });
    }
    let null_index = null[0];

    let mut eigenmatrices = Vec::with_capacity(vals.len());
    for j in 0..vals.len() {
        let col = CMat::from_fn(d * d, 1, |i, _| vecs[(i, j)]);
        let em = unvec_col(&col, d);
        let n = frobenius_norm(&em);
        eigenmatrices.push(scale(&em, cr(1.0 / n)));
    }

    let raw = &eigenmatrices[null_index];
    let tr = trace(raw);
    if tr.norm() < 1e-12 {
        return Err(Error::NonUniqueIfp { null_dim: 1 });
    }
    let normalized = hermitize(&scale(raw, cr(1.0) / tr));
    let herm = HermitianObservable::new(normalized.clone())?;
    let (evals, _) = crate::linalg::eigh(&normalized)?;
    let min_eig = evals[0];
    let ifp = if min_eig < -IFP_STATE_TOL {
        Ifp::NotAState {
            matrix: herm,
            min_eig,
        }
    } else {
        Ifp::State(DensityMatrix::new_with_psd_tol(normalized, IFP_STATE_TOL)?)
    };
    let ifp_bloch = match (&ifp, d) {
        (Ifp::State(rho), 2) => Some(state_to_bloch(rho)?),
        _ => None,
    };
    Ok(SpectralDecomposition {
        eigenvalues: vals,
        eigenmatrices,
        null_index,
        ifp,
        ifp_bloch,
    })
}

/// Verify the defining properties of a generator matrix against its GKSL
/// evaluation: matrix/action agreement, trace destruction, Hermiticity
/// preservation, the adjoint pairing, and `L†[1] = 0`.
pub fn adjoint_check_matrix(m: &SuperopMatrix, gen: &GeneratorSpec) -> Result<bool> {
    let d = gen.dim();
    let t = m.t;
    let mut rng = ChaCha12Rng::seed_from_u64(0x51c7_a11d);
    for _ in 0..16 {
        let x = ginibre(&mut rng, d, d);
        let norm = frobenius_norm(&x).max(1.0);
        let direct = apply_generator(gen, t, &x)?;
        // action agreement
        if frobenius_norm(&(m.apply(&x) - &direct)) > 1e-10 * norm {
            return Ok(false);
        }
        // trace destroying
        if trace(&direct).norm() > 1e-10 * norm {
            return Ok(false);
        }
        // Hermiticity preserving
        let lxd = apply_generator(gen, t, &dagger(&x))?;
        if frobenius_norm(&(lxd - dagger(&direct))) > 1e-10 * norm {
            return Ok(false);
        }
    }
    // Tr{A L[rho]} = Tr{L†[A] rho} on random pairs
    for _ in 0..16 {
        let rho = DensityMatrix::random(&mut rng, d);
        let a = hermitize(&ginibre(&mut rng, d, d));
        let lhs = trace(&(&a * &apply_generator(gen, t, rho.mat())?));
        let rhs = trace(&(&apply_adjoint(gen, t, &a)? * rho.mat()));
        if (lhs - rhs).norm() > 1e-10 * frobenius_norm(&a).max(1.0) {
            return Ok(false);
        }
    }
    // identity is a zero mode of the adjoint
    let l_id = apply_adjoint(gen, t, &identity(d))?;
    Ok(max_abs_entry(&l_id) <= 1e-10)
}

/// Build the generator matrix at `t` and run [`adjoint_check_matrix`].
pub fn adjoint_check(gen: &GeneratorSpec, t: f64) -> Result<bool> {
    let m = build_superop(gen, t)?;
    adjoint_check_matrix(&m, gen)
}

/// Outcome of the randomized positivity scan.
#[derive(Clone, Debug)]
pub struct PDivVerdict {
    pub pdiv: bool,
    /// min over scanned bases and ordered pairs i != j of <j|L_t(|i><i|)|j>.
    pub worst_value: f64,
    /// Basis achieving the minimum, reported when the scan found a violation.
    pub witness_basis: Option<CMat>,
    /// (i, j) ordered pair achieving the minimum.
    pub witness_pair: (usize, usize),
}

/// min over ordered pairs i != j of <j|L_t(|i><i|)|j> in the given basis
/// (columns of `basis` are the kets).
pub fn kossakowski_worst_in_basis(
    gen: &GeneratorSpec,
    t: f64,
    basis: &CMat,
) -> Result<(f64, (usize, usize))> {
    let d = gen.dim();
    let mut worst = f64::INFINITY;
    let mut pair = (0, 1);
    for i in 0..d {
        let proj = CMat::from_fn(d, d, |a, b| basis[(a, i)] * basis[(b, i)].conj());
        let li = apply_generator(gen, t, &proj)?;
        for j in 0..d {
            if j == i {
                continue;
            }
            let mut val = cr(0.0);
            for a in 0..d {
                for b in 0..d {
                    val += basis[(a, j)].conj() * li[(a, b)] * basis[(b, j)];
                }
            }
            if val.re < worst {
                worst = val.re;
                pair = (i, j);
            }
        }
    }
    Ok((worst, pair))
}

/// The minimizing (value, ordered pair, basis) over the computational basis
/// plus `n_bases` Haar-random ones.
pub fn kossakowski_argmin(
    gen: &GeneratorSpec,
    t: f64,
    n_bases: usize,
    seed: u64,
) -> Result<(f64, (usize, usize), CMat)> {
    let d = gen.dim();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut worst_basis = identity(d);
    let mut worst_pair = (0, 1);
    let mut bases = vec![identity(d)];
    for _ in 0..n_bases {
        bases.push(haar_unitary(&mut rng, d));
    }
    for basis in bases {
        let (val, pair) = kossakowski_worst_in_basis(gen, t, &basis)?;
        if val < worst {
            worst = val;
            worst_pair = pair;
            worst_basis = basis;
        }
    }
    Ok((worst, worst_pair, worst_basis))
}

/// Scan the computational basis plus `n_bases` Haar-random bases for negative
/// generator matrix elements. Sound for violation detection; probabilistic
/// for confirming P-divisibility.
pub fn kossakowski_scan(
    gen: &GeneratorSpec,
    t: f64,
    n_bases: usize,
    seed: u64,
) -> Result<PDivVerdict> {
    let (worst, worst_pair, worst_basis) = kossakowski_argmin(gen, t, n_bases, seed)?;
    let pdiv = worst >= -1e-10;
    Ok(PDivVerdict {
        pdiv,
        worst_value: worst,
        witness_basis: (!pdiv).then_some(worst_basis),
        witness_pair: worst_pair,
    })
}
