//! Time-local generators in GKSL form and their matrix representation.
//!
//! A [`GeneratorSpec`] holds a (possibly time-dependent) Hamiltonian part and
//! a list of jump channels with time-dependent rates. Its action on an
//! operator X is
//!
//! ```text
//! L_t[X] = -i [H(t), X] + sum_k gamma_k(t) (L_k X L_k† - (1/2){L_k† L_k, X})
//! ```
//!
//! [`build_superop`] produces the d²×d² matrix of that action in the
//! column-stacking convention; the matrix is what the spectral module
//! diagonalizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, c, commutator, cr, dagger, kron, scale, unvec_col, vec_col, zeros, CMat,
};
use crate::schedule::Schedule;

/// Serialize complex matrices as nested `[re, im]` arrays.
pub mod cmat_serde {
    use super::*;
    use serde::de::Error as DeError;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        serde::Serialize::serialize(&rows, ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<CMat, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = serde::Deserialize::deserialize(de)?;
        let nr = rows.len();
        if nr == 0 {
            return Err(D::Error::custom("empty matrix"));
        }
        let nc = rows[0].len();
        if rows.iter().any(|r| r.len() != nc) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(CMat::from_fn(nr, nc, |i, j| c(rows[i][j][0], rows[i][j][1])))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianSpec {
    None,
    /// H(t) = prefactor(t) * matrix, with `matrix` Hermitian.
    Scaled {
        #[serde(with = "cmat_serde")]
        matrix: CMat,
        prefactor: Schedule,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Channel {
    #[serde(with = "cmat_serde")]
    pub jump_op: CMat,
    pub rate: Schedule,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawGeneratorSpec")]
pub struct GeneratorSpec {
    dim: usize,
    hamiltonian: HamiltonianSpec,
    channels: Vec<Channel>,
}

#[derive(Deserialize)]
struct RawGeneratorSpec {
    dim: usize,
    hamiltonian: HamiltonianSpec,
    channels: Vec<Channel>,
}

impl TryFrom<RawGeneratorSpec> for GeneratorSpec {
    type Error = Error;
    fn try_from(raw: RawGeneratorSpec) -> Result<Self> {
        GeneratorSpec::new(raw.dim, raw.hamiltonian, raw.channels)
    }
}

impl GeneratorSpec {
    pub fn new(dim: usize, hamiltonian: HamiltonianSpec, channels: Vec<Channel>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("generator dimension must be positive".into()));
        }
        if let HamiltonianSpec::Scaled { matrix, .. } = &hamiltonian {
            if matrix.nrows() != dim || matrix.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: matrix.nrows(),
                });
            }
            let dev = crate::linalg::hermiticity_deviation(matrix);
            if dev > 1e-12 {
                return Err(Error::NonHermitianInput { deviation: dev });
            }
        }
        for ch in &channels {
            if ch.jump_op.nrows() != dim || ch.jump_op.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: ch.jump_op.nrows(),
                });
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            channels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn hamiltonian(&self) -> &HamiltonianSpec {
        &self.hamiltonian
    }

    pub fn hamiltonian_at(&self, t: f64) -> CMat {
        match &self.hamiltonian {
            HamiltonianSpec::None => zeros(self.dim, self.dim),
            HamiltonianSpec::Scaled { matrix, prefactor } => scale(matrix, cr(prefactor.value(t))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_dim(gen: &GeneratorSpec, x: &CMat) -> Result<()> {
    if x.nrows() != gen.dim() || x.ncols() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: x.nrows(),
        });
    }
    Ok(())
}

/// Evaluate `L_t[X]` directly from the GKSL form.
pub fn apply_generator(gen: &GeneratorSpec, t: f64, x: &CMat) -> Result<CMat> {
    check_dim(gen, x)?;
    let h = gen.hamiltonian_at(t);
    let mut out = scale(&commutator(&h, x), c(0.0, -1.0));
    for ch in gen.channels() {
        let g = ch.rate.value(t);
        if g == 0.0 {
            continue;
        }
        let l = &ch.jump_op;
        let ld = dagger(l);
        let ldl = &ld * l;
        let jump = l * x * &ld;
        let damp = anticommutator(&ldl, x);
        out += (jump - scale(&damp, cr(0.5))) * faer::Scale(cr(g));
    }
    Ok(out)
}

/// Evaluate the adjoint action `L_t†[A]` (Heisenberg picture):
/// `i[H, A] + sum_k gamma_k (L_k† A L_k - (1/2){L_k† L_k, A})`.
pub fn apply_adjoint(gen: &GeneratorSpec, t: f64, a: &CMat) -> Result<CMat> {
    check_dim(gen, a)?;
    let h = gen.hamiltonian_at(t);
    let mut out = scale(&commutator(&h, a), c(0.0, 1.0));
    for ch in gen.channels() {
        let g = ch.rate.value(t);
        if g == 0.0 {
            continue;
        }
        let l = &ch.jump_op;
        let ld = dagger(l);
        let ldl = &ld * l;
        let jump = &ld * a * l;
        let damp = anticommutator(&ldl, a);
        out += (jump - scale(&damp, cr(0.5))) * faer::Scale(cr(g));
    }
    Ok(out)
}

/// Matrix of the generator action at time `t` in the column-stacking basis.
#[derive(Clone, Debug)]
pub struct SuperopMatrix {
    pub dim: usize,
    pub t: f64,
    pub mat: CMat,
}

impl SuperopMatrix {
    /// Apply to an operator: unvec(M vec(X)).
    pub fn apply(&self, x: &CMat) -> CMat {
        unvec_col(&(&self.mat * vec_col(x)), self.dim)
    }
}

/// Build the d²×d² matrix M with `M vec(X) = vec(L_t[X])`.
///
/// Uses vec(A X B) = (B^T ⊗ A) vec(X):
///   -i[H, X]        -> -i (I ⊗ H - H^T ⊗ I)
///   L X L†          -> conj(L) ⊗ L
///   -(1/2){L†L, X}  -> -(1/2)(I ⊗ L†L + (L†L)^T ⊗ I)
pub fn build_superop(gen: &GeneratorSpec, t: f64) -> Result<SuperopMatrix> {
    let d = gen.dim();
    let id = crate::linalg::identity(d);
    let h = gen.hamiltonian_at(t);
    let ht = h.transpose().to_owned();
    let mut m = scale(
        &(kron(&id, &h) - kron(&ht, &id)),
        c(0.0, -1.0),
    );
    for ch in gen.channels() {
        let g = ch.rate.value(t);
        if g == 0.0 {
            continue;
        }
        let l = &ch.jump_op;
        let lconj = CMat::from_fn(d, d, |i, j| l[(i, j)].conj());
        let ldl = dagger(l) * l;
        let ldl_t = ldl.transpose().to_owned();
        let term = kron(&lconj, l) - scale(&(kron(&id, &ldl) + kron(&ldl_t, &id)), cr(0.5));
        m += term * faer::Scale(cr(g));
    }
    if !m.is_all_finite() {
        return Err(Error::LinAlg(format!("superoperator has non-finite entries at t = {t}")));
    }
    Ok(SuperopMatrix { dim: d, t, mat: m })
}
