//! Quantum states, Hermitian observables, the Bloch parametrization, and the
//! information-theoretic distances built on them.
//!
//! All entropies are in nats. Eigenvalues below [`EIG_FLOOR`] are treated as
//! zero: a state with occupied directions below the floor is rank-deficient,
//! and [`relative_entropy`] reports a genuine divergence instead of returning
//! a large float.

use faer::Scale;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, dagger, eigh, hermiticity_deviation, hermitize, identity, trace,
    CMat, C64,
};

/// Eigenvalue floor below which a direction counts as unoccupied.
pub const EIG_FLOOR: f64 = 1e-14;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;

pub fn sigma_x() -> CMat {
    CMat::from_fn(2, 2, |i, j| if i != j { cr(1.0) } else { cr(0.0) })
}

pub fn sigma_y() -> CMat {
    CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => cr(0.0),
    })
}

pub fn sigma_z() -> CMat {
    CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => cr(1.0),
        (1, 1) => cr(-1.0),
        _ => cr(0.0),
    })
}

/// Raising operator |0><1|.
pub fn sigma_plus() -> CMat {
    CMat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { cr(1.0) } else { cr(0.0) })
}

/// Lowering operator |1><0|.
pub fn sigma_minus() -> CMat {
    CMat::from_fn(2, 2, |i, j| if (i, j) == (1, 0) { cr(1.0) } else { cr(0.0) })
}

/// A validated density matrix: Hermitian, unit trace, positive semi-definite.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dim: usize,
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        Self::new_with_psd_tol(mat, PSD_TOL)
    }

    /// Same validation with a caller-chosen PSD tolerance (trajectory states
    /// accumulate integration error and use a looser bound).
    pub fn new_with_psd_tol(mat: CMat, psd_tol: f64) -> Result<Self> {
        let d = mat.nrows();
        if mat.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mat.ncols(),
            });
        }
        let dev = hermiticity_deviation(&mat);
        if dev > HERMITICITY_TOL {
            return Err(Error::NonHermitianInput { deviation: dev });
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace: tr.re });
        }
        let mat = hermitize(&mat);
        let (vals, _) = eigh(&mat)?;
        let min_eig = vals[0];
        if min_eig < -psd_tol {
            return Err(Error::NotPositiveSemidefinite { min_eig });
        }
        Ok(Self { dim: d, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            dim: d,
            mat: identity(d) * Scale(cr(1.0 / d as f64)),
        }
    }

    /// Pure state |k><k| in the computational basis.
    pub fn basis_state(d: usize, k: usize) -> Self {
        Self {
            dim: d,
            mat: CMat::from_fn(d, d, |i, j| if i == k && j == k { cr(1.0) } else { cr(0.0) }),
        }
    }

    pub fn from_ket(ket: &[C64]) -> Result<Self> {
        let d = ket.len();
        let norm_sq: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace: norm_sq });
        }
        Ok(Self {
            dim: d,
            mat: CMat::from_fn(d, d, |i, j| ket[i] * ket[j].conj()),
        })
    }

    /// Ginibre-ensemble random state: G G† / Tr(G G†). Full rank almost surely.
    pub fn random<R: Rng>(rng: &mut R, d: usize) -> Self {
        let g = linalg::ginibre(rng, d, d);
        let gg = &g * dagger(&g);
        let tr = trace(&gg).re;
        Self {
            dim: d,
            mat: gg * Scale(cr(1.0 / tr)),
        }
    }

    /// Eigenvalues ascending with the matching eigenvector columns.
    pub fn eigensystem(&self) -> Result<(Vec<f64>, CMat)> {
        eigh(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigensystem()?.0[0])
    }
}

/// A validated Hermitian matrix (observables, perturbations, eigenmatrices).
#[derive(Clone, Debug)]
pub struct HermitianObservable {
    dim: usize,
    mat: CMat,
}

impl HermitianObservable {
    pub fn new(mat: CMat) -> Result<Self> {
        let d = mat.nrows();
        if mat.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mat.ncols(),
            });
        }
        let dev = hermiticity_deviation(&mat);
        if dev > HERMITICITY_TOL {
            return Err(Error::NonHermitianInput { deviation: dev });
        }
        Ok(Self {
            dim: d,
            mat: hermitize(&mat),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }
}

/// Bloch vector of a qubit state; |v| <= 1 for physical states.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlochVector {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl BlochVector {
    pub fn new(vx: f64, vy: f64, vz: f64) -> Self {
        Self { vx, vy, vz }
    }

    pub fn norm(&self) -> f64 {
        (self.vx * self.vx + self.vy * self.vy + self.vz * self.vz).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.vx, self.vy, self.vz]
    }
}

/// Principal matrix logarithm with an eigenvalue clamp at `floor`.
///
/// Returns U diag(log max(p_i, floor)) U† from the eigendecomposition of rho.
pub fn matrix_log(rho: &DensityMatrix, floor: f64) -> Result<HermitianObservable> {
    if floor <= 0.0 {
        return Err(Error::OutOfDomain {
            value: floor,
            domain: "floor > 0",
        });
    }
    let (vals, u) = rho.eigensystem()?;
    let d = rho.dim();
    let diag = CMat::from_fn(d, d, |i, j| {
        if i == j {
            cr(vals[i].max(floor).ln())
        } else {
            cr(0.0)
        }
    });
    let log = &u * &diag * dagger(&u);
    HermitianObservable::new(hermitize(&log))
}

/// Quantum relative entropy D(rho1 || rho2) = Tr rho1 (log rho1 - log rho2),
/// in nats. Reports [`Error::SupportViolation`] when `rho2` is rank-deficient
/// in a direction `rho1` occupies.
pub fn relative_entropy(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            got: rho2.dim(),
        });
    }
    let d = rho1.dim();
    let (p, _) = rho1.eigensystem()?;
    // Tr rho1 log rho1 over the occupied spectrum
    let mut s1 = 0.0;
    for &pi in &p {
        if pi > EIG_FLOOR {
            s1 += pi * pi.ln();
        }
    }
    // Tr rho1 log rho2 in the eigenbasis of rho2, with support check
    let (q, w) = rho2.eigensystem()?;
    let mut s2 = 0.0;
    for j in 0..d {
        let mut overlap = 0.0;
        for a in 0..d {
            for b in 0..d {
                overlap += (w[(a, j)].conj() * rho1.mat()[(a, b)] * w[(b, j)]).re;
            }
        }
        if q[j] > EIG_FLOOR {
            s2 += overlap * q[j].ln();
        } else if overlap > 1e-12 {
            return Err(Error::SupportViolation);
        }
    }
    Ok(s1 - s2)
}

/// Trace distance (1/2) sum |eigenvalues(rho1 - rho2)|, in [0, 1].
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            got: rho2.dim(),
        });
    }
    let diff = rho1.mat() - rho2.mat();
    let (vals, _) = eigh(&diff)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Trace norm of the biased-discrimination matrix p1 rho1 - (1-p1) rho2.
///
/// With p1 = 1/2 this equals the trace distance.
pub fn helstrom_norm(rho1: &DensityMatrix, rho2: &DensityMatrix, p1: f64) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            got: rho2.dim(),
        });
    }
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::OutOfDomain {
            value: p1,
            domain: "p1 in [0, 1]",
        });
    }
    let p2 = 1.0 - p1;
    let delta = rho1.mat() * Scale(cr(p1)) - rho2.mat() * Scale(cr(p2));
    let (vals, _) = eigh(&delta)?;
    Ok(vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// rho = (1 + v . sigma)/2.
pub fn bloch_to_state(v: &BlochVector) -> Result<DensityMatrix> {
    let n = v.norm();
    if n > 1.0 + 1e-12 {
        return Err(Error::BlochOutOfBall { norm: n });
    }
    let mat = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => cr(0.5 * (1.0 + v.vz)),
        (1, 1) => cr(0.5 * (1.0 - v.vz)),
        (0, 1) => C64::new(0.5 * v.vx, -0.5 * v.vy),
        _ => C64::new(0.5 * v.vx, 0.5 * v.vy),
    });
    // boundary states may sit a hair below zero after rounding
    DensityMatrix::new_with_psd_tol(mat, 1e-9)
}

pub fn state_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::WrongDimension { dim: rho.dim() });
    }
    let m = rho.mat();
    Ok(BlochVector {
        vx: 2.0 * m[(1, 0)].re,
        vy: 2.0 * m[(1, 0)].im,
        vz: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

/// Exponential-coordinates vector r = arctanh(|v|) v / |v|, with r(0) = 0.
///
/// The state (1 + v.sigma)/2 equals exp(r.sigma)/Z, which is what makes the
/// qubit entropy-production formula a plain dot product.
pub fn r_vector(v: &BlochVector) -> Result<[f64; 3]> {
    let n = v.norm();
    if n >= 1.0 - 1e-12 {
        return Err(Error::BoundaryState { norm: n });
    }
    if n == 0.0 {
        return Ok([0.0, 0.0, 0.0]);
    }
    let f = n.atanh() / n;
    Ok([f * v.vx, f * v.vy, f * v.vz])
}

/// von Neumann entropy, in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (p, _) = rho.eigensystem()?;
    Ok(-p
        .iter()
        .filter(|&&pi| pi > EIG_FLOOR)
        .map(|&pi| pi * pi.ln())
        .sum::<f64>())
}
