//! Fixed-step time evolution for arbitrary generators and trajectory
//! assembly.
//!
//! Fixed-step RK4 is used instead of an adaptive scheme: at the dimensions
//! involved the cost is negligible, and the output grid is reproducible
//! bit-for-bit across runs.

use std::io::Write;

use crate::entropy::{clausius_split, epr_general, EprSample};
use crate::error::{Error, Result};
use crate::generator::{apply_generator, build_superop, GeneratorSpec};
use crate::linalg::{cr, expm, hermitize, scale, trace, unvec_col, vec_col, CMat};
use crate::phase_covariant::region_classify;
use crate::spectral::{spectral_decompose, Ifp};
use crate::state::{state_to_bloch, DensityMatrix};

/// Uniform-grid trajectory of states; fixed points and entropy-production
/// samples are filled in by [`Trajectory::compute_epr`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub tgrid: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub ifps: Vec<DensityMatrix>,
    pub epr: Vec<EprSample>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        if self.tgrid.len() < 2 {
            0.0
        } else {
            self.tgrid[1] - self.tgrid[0]
        }
    }

    /// Fill `ifps` and `epr` from the generator's spectral decomposition at
    /// every grid instant.
    pub fn compute_epr(&mut self, gen: &GeneratorSpec) -> Result<()> {
        let mut ifps = Vec::with_capacity(self.tgrid.len());
        let mut epr = Vec::with_capacity(self.tgrid.len());
        for (k, &t) in self.tgrid.iter().enumerate() {
            let sd = spectral_decompose(&build_superop(gen, t)?)?;
            let ifp = match sd.ifp {
                Ifp::State(rho) => rho,
                Ifp::NotAState { min_eig, .. } => return Err(Error::IfpNotAState { min_eig }),
            };
            let split = clausius_split(gen, t, &self.states[k], &ifp)?;
            let sigma = epr_general(gen, t, &self.states[k], &ifp)?;
            let region = match sd.ifp_bloch {
                Some(star) if star.vz < 0.0 && star.vx.abs() < 1e-9 && star.vy.abs() < 1e-9 => {
                    Some(region_classify(&state_to_bloch(&self.states[k])?, &star))
                }
                _ => None,
            };
            epr.push(EprSample {
                t,
                sigma,
                ds: split.ds,
                flow: split.flow,
                region,
            });
            ifps.push(ifp);
        }
        self.ifps = ifps;
        self.epr = epr;
        Ok(())
    }

    /// CSV with header `t, re00, im00, ... (row-major), vstar_z, sigma`.
    /// Requires [`Trajectory::compute_epr`] to have run (for qubits the
    /// `vstar_z` column is the fixed-point z component, otherwise NaN).
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        if self.epr.len() != self.tgrid.len() {
            return Err(Error::Config(
                "trajectory CSV needs entropy samples; call compute_epr first".into(),
            ));
        }
        let d = self.states[0].dim();
        let mut header = vec!["t".to_string()];
        for i in 0..d {
            for j in 0..d {
                header.push(format!("re{i}{j}"));
                header.push(format!("im{i}{j}"));
            }
        }
        header.push("vstar_z".into());
        header.push("sigma".into());
        writeln!(w, "{}", header.join(","))?;
        for (k, &t) in self.tgrid.iter().enumerate() {
            let mut row = vec![fmt_float(t)];
            let m = self.states[k].mat();
            for i in 0..d {
                for j in 0..d {
                    row.push(fmt_float(m[(i, j)].re));
                    row.push(fmt_float(m[(i, j)].im));
                }
            }
            let vstar_z = if d == 2 {
                state_to_bloch(&self.ifps[k]).map(|v| v.vz).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            row.push(fmt_float(vstar_z));
            row.push(fmt_float(self.epr[k].sigma));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:.12e}")
}

/// Classical fixed-step RK4 integration of the master equation.
///
/// Hermiticity is restored and the trace renormalized after every step; a
/// step whose raw trace drift exceeds 1e-8 is rejected as a sign that `dt`
/// is too large for the given rates.
pub fn integrate(
    gen: &GeneratorSpec,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if dt <= 0.0 || t_end <= 0.0 {
        return Err(Error::Config("integrate needs dt > 0 and t_end > 0".into()));
    }
    let n = (t_end / dt).round() as usize;
    if n == 0 || ((n as f64) * dt - t_end).abs() > 1e-9 {
        return Err(Error::Config("dt must divide t_end".into()));
    }
    if rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            expected: gen.dim(),
            got: rho0.dim(),
        });
    }
    let mut tgrid = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    tgrid.push(0.0);
    states.push(rho0.clone());
    let mut current = rho0.mat().clone();
    for k in 0..n {
        let t = k as f64 * dt;
        let k1 = apply_generator(gen, t, &current)?;
        let k2 = apply_generator(gen, t + dt / 2.0, &(&current + scale(&k1, cr(dt / 2.0))))?;
        let k3 = apply_generator(gen, t + dt / 2.0, &(&current + scale(&k2, cr(dt / 2.0))))?;
        let k4 = apply_generator(gen, t + dt, &(&current + scale(&k3, cr(dt))))?;
        let incr = (k1 + scale(&k2, cr(2.0)) + scale(&k3, cr(2.0)) + k4) * faer::Scale(cr(dt / 6.0));
        let mut next = &current + incr;
        let tr = trace(&next);
        let drift = (tr.re - 1.0).abs().max(tr.im.abs());
        if drift > 1e-8 {
            return Err(Error::StepRejected { t: t + dt, drift });
        }
        next = hermitize(&next) * faer::Scale(cr(1.0 / tr.re));
        states.push(DensityMatrix::new_with_psd_tol(next.clone(), 1e-8)?);
        tgrid.push((k + 1) as f64 * dt);
        current = next;
    }
    Ok(Trajectory {
        tgrid,
        states,
        ifps: Vec::new(),
        epr: Vec::new(),
    })
}

/// Action of the frozen-generator semigroup exp(tau L_t) on `rho`.
///
/// The result is only a state when the frozen semigroup is positive, so a
/// plain matrix is returned.
pub fn instantaneous_map_step(
    gen: &GeneratorSpec,
    t: f64,
    rho: &DensityMatrix,
    tau: f64,
) -> Result<CMat> {
    let m = build_superop(gen, t)?;
    let e = expm(&scale(&m.mat, cr(tau)));
    Ok(unvec_col(&(&e * vec_col(rho.mat())), gen.dim()))
}
