//! Phase-covariant qubit dynamics: absorption, emission and pure dephasing
//! with time-dependent rates, plus a drive frequency around z.
//!
//! This family admits closed-form Bloch-vector propagation, an explicit fixed
//! point, and exact positivity / complete-positivity conditions, which makes
//! it the workhorse model for everything the entropy-production module needs
//! ground truth for. `counterexample_rates` returns the rate choice whose map
//! is CP and eventually non-P-divisible while every generator eigenvalue
//! keeps a negative real part.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{Channel, GeneratorSpec, HamiltonianSpec};
use crate::linalg::scale;
use crate::schedule::{integrate_adaptive_split, PolySegment, Schedule};
use crate::state::{sigma_minus, sigma_plus, sigma_z, BlochVector};

const QUAD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseCovariantRates {
    pub gamma_plus: Schedule,
    pub gamma_minus: Schedule,
    pub gamma_z: Schedule,
    pub omega_r: Schedule,
}

impl PhaseCovariantRates {
    pub fn constant(gamma_plus: f64, gamma_minus: f64, gamma_z: f64, omega_r: f64) -> Self {
        Self {
            gamma_plus: Schedule::constant(gamma_plus),
            gamma_minus: Schedule::constant(gamma_minus),
            gamma_z: Schedule::constant(gamma_z),
            omega_r: Schedule::constant(omega_r),
        }
    }

    /// All schedule breakpoints, for splitting quadratures.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.gamma_plus.breakpoints();
        b.extend(self.gamma_minus.breakpoints());
        b.extend(self.gamma_z.breakpoints());
        b.extend(self.omega_r.breakpoints());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

/// Rates of the non-P-divisible construction: constant absorption 0.2 and
/// emission 0.8, no drive, and a dephasing rate that starts at zero, falls
/// linearly on (1, 2], and then stays at -0.22.
pub fn counterexample_rates() -> PhaseCovariantRates {
    PhaseCovariantRates {
        gamma_plus: Schedule::constant(0.2),
        gamma_minus: Schedule::constant(0.8),
        gamma_z: Schedule::new(vec![
            PolySegment {
                t_start: 0.0,
                t_end: Some(1.0),
                poly_coeffs: vec![0.0],
            },
            PolySegment {
                t_start: 1.0,
                t_end: Some(2.0),
                poly_coeffs: vec![0.22, -0.22],
            },
            PolySegment {
                t_start: 2.0,
                t_end: None,
                poly_coeffs: vec![-0.22],
            },
        ])
        .expect("static schedule"),
        omega_r: Schedule::constant(0.0),
    }
}

/// GeneratorSpec with jump operators sigma_z, sigma_+, sigma_- and
/// Hamiltonian omega_r(t) sigma_z / 2.
pub fn make_generator(rates: &PhaseCovariantRates) -> GeneratorSpec {
    GeneratorSpec::new(
        2,
        HamiltonianSpec::Scaled {
            matrix: scale(&sigma_z(), crate::linalg::cr(0.5)),
            prefactor: rates.omega_r.clone(),
        },
        vec![
            Channel {
                jump_op: sigma_z(),
                rate: rates.gamma_z.clone(),
            },
            Channel {
                jump_op: sigma_plus(),
                rate: rates.gamma_plus.clone(),
            },
            Channel {
                jump_op: sigma_minus(),
                rate: rates.gamma_minus.clone(),
            },
        ],
    )
    .expect("phase-covariant generator is well-formed")
}

/// The four decay functions solving the Bloch equations of motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFunctions {
    /// Transverse contraction exp[-(G_+ + G_-)/2 - 2 G_z].
    pub lambda: f64,
    /// Longitudinal contraction exp[-G_+ - G_-].
    pub lambda_z: f64,
    /// Longitudinal drift lambda_z * int_0^t (g_+ - g_-) exp(G_+ + G_-).
    pub t_z: f64,
    /// Accumulated rotation angle int_0^t omega_r.
    pub omega: f64,
}

/// Evaluate the decay functions at `t`. Rate integrals are exact
/// (piecewise-polynomial antiderivatives); the drift integral uses adaptive
/// Simpson split at the schedule breakpoints, abs tol 1e-10.
pub fn decay_functions(rates: &PhaseCovariantRates, t: f64) -> Result<DecayFunctions> {
    if t < 0.0 {
        return Err(Error::OutOfDomain {
            value: t,
            domain: "t >= 0",
        });
    }
    let g_plus = rates.gamma_plus.integral(t);
    let g_minus = rates.gamma_minus.integral(t);
    let g_z = rates.gamma_z.integral(t);
    let lambda = (-(g_plus + g_minus) / 2.0 - 2.0 * g_z).exp();
    let lambda_z = (-g_plus - g_minus).exp();
    let integrand = |s: f64| {
        (rates.gamma_plus.value(s) - rates.gamma_minus.value(s))
            * (rates.gamma_plus.integral(s) + rates.gamma_minus.integral(s)).exp()
    };
    let drift = integrate_adaptive_split(&integrand, 0.0, t, &rates.breakpoints(), QUAD_TOL)?;
    Ok(DecayFunctions {
        lambda,
        lambda_z,
        t_z: lambda_z * drift,
        omega: rates.omega_r.integral(t),
    })
}

/// Decay functions sampled on a uniform grid, computed incrementally
/// (per-step Simpson for the drift integral). Much cheaper than calling
/// [`decay_functions`] per grid point on fine grids.
#[derive(Clone, Debug)]
pub struct DecayGrid {
    pub tgrid: Vec<f64>,
    pub values: Vec<DecayFunctions>,
}

impl DecayGrid {
    pub fn compute(rates: &PhaseCovariantRates, t_end: f64, dt: f64) -> Result<Self> {
        if dt <= 0.0 || t_end < 0.0 {
            return Err(Error::Config("DecayGrid needs dt > 0, t_end >= 0".into()));
        }
        let n = (t_end / dt).round() as usize;
        if ((n as f64) * dt - t_end).abs() > 1e-9 {
            return Err(Error::Config("dt must divide t_end".into()));
        }
        let integrand = |s: f64| {
            (rates.gamma_plus.value(s) - rates.gamma_minus.value(s))
                * (rates.gamma_plus.integral(s) + rates.gamma_minus.integral(s)).exp()
        };
        // 5-point Gauss-Legendre per step keeps the accumulated drift error
        // at machine precision even on coarse grids
        const GL_NODES: [f64; 5] = [
            -0.906179845938664,
            -0.5384693101056831,
            0.0,
            0.5384693101056831,
            0.906179845938664,
        ];
        const GL_WEIGHTS: [f64; 5] = [
            0.23692688505618908,
            0.47862867049936647,
            0.5688888888888889,
            0.47862867049936647,
            0.23692688505618908,
        ];
        let mut tgrid = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        let mut drift = 0.0;
        for k in 0..=n {
            let t = k as f64 * dt;
            if k > 0 {
                let a = (k - 1) as f64 * dt;
                let mid = a + dt / 2.0;
                let half = dt / 2.0;
                for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                    drift += half * w * integrand(mid + half * x);
                }
            }
            let g_plus = rates.gamma_plus.integral(t);
            let g_minus = rates.gamma_minus.integral(t);
            let g_z = rates.gamma_z.integral(t);
            let lambda_z = (-g_plus - g_minus).exp();
            tgrid.push(t);
            values.push(DecayFunctions {
                lambda: (-(g_plus + g_minus) / 2.0 - 2.0 * g_z).exp(),
                lambda_z,
                t_z: lambda_z * drift,
                omega: rates.omega_r.integral(t),
            });
        }
        Ok(Self { tgrid, values })
    }
}

fn propagate_with(decay: &DecayFunctions, v0: &BlochVector) -> BlochVector {
    let (sin, cos) = decay.omega.sin_cos();
    BlochVector {
        vx: decay.lambda * (v0.vx * cos - v0.vy * sin),
        vy: decay.lambda * (v0.vx * sin + v0.vy * cos),
        vz: v0.vz * decay.lambda_z + decay.t_z,
    }
}

/// Closed-form Bloch-vector evolution from `v0` to time `t`.
///
/// The transverse components rotate by the accumulated angle and contract by
/// `lambda`; the longitudinal one contracts by `lambda_z` and drifts by `t_z`.
pub fn propagate_bloch(rates: &PhaseCovariantRates, v0: &BlochVector, t: f64) -> Result<BlochVector> {
    let n = v0.norm();
    if n > 1.0 + 1e-12 {
        return Err(Error::BlochOutOfBall { norm: n });
    }
    Ok(propagate_with(&decay_functions(rates, t)?, v0))
}

/// Same propagation against a precomputed [`DecayGrid`] sample.
pub fn propagate_bloch_on_grid(grid: &DecayGrid, v0: &BlochVector, k: usize) -> BlochVector {
    propagate_with(&grid.values[k], v0)
}

/// Right-hand side of the Bloch equations of motion at (t, v).
pub fn bloch_velocity(rates: &PhaseCovariantRates, t: f64, v: &BlochVector) -> [f64; 3] {
    let gp = rates.gamma_plus.value(t);
    let gm = rates.gamma_minus.value(t);
    let gz = rates.gamma_z.value(t);
    let w = rates.omega_r.value(t);
    let transverse = 0.5 * (gp + gm) + 2.0 * gz;
    [
        -w * v.vy - transverse * v.vx,
        w * v.vx - transverse * v.vy,
        -(gp + gm) * v.vz + gp - gm,
    ]
}

/// Instantaneous fixed point (0, 0, (g_+ - g_-)/(g_+ + g_-)).
pub fn ifp_bloch(rates: &PhaseCovariantRates, t: f64) -> Result<BlochVector> {
    let gp = rates.gamma_plus.value(t);
    let gm = rates.gamma_minus.value(t);
    let sum = gp + gm;
    if sum.abs() < 1e-14 {
        return Err(Error::DegenerateFixedPoint { t });
    }
    let vz = (gp - gm) / sum;
    if vz.abs() > 1.0 + 1e-12 {
        return Err(Error::IfpNotAState { min_eig: (1.0 - vz.abs()) / 2.0 });
    }
    Ok(BlochVector::new(0.0, 0.0, vz))
}

/// Pointwise P-divisibility conditions.
#[derive(Clone, Copy, Debug)]
pub struct PdivConditions {
    /// gamma_+- both nonnegative.
    pub cond1: bool,
    /// sqrt(gamma_+ gamma_-) + 2 gamma_z nonnegative.
    pub cond2: bool,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// sqrt(gamma_+ gamma_-) + 2 gamma_z.
    pub combo: f64,
}

impl PdivConditions {
    pub fn pdiv(&self) -> bool {
        self.cond1 && self.cond2
    }
}

pub fn pdiv_conditions(rates: &PhaseCovariantRates, t: f64) -> Result<PdivConditions> {
    let gp = rates.gamma_plus.value(t);
    let gm = rates.gamma_minus.value(t);
    let gz = rates.gamma_z.value(t);
    let product = gp * gm;
    if product < -1e-15 {
        return Err(Error::ComplexRoot { product });
    }
    let combo = product.max(0.0).sqrt() + 2.0 * gz;
    Ok(PdivConditions {
        cond1: gp >= 0.0 && gm >= 0.0,
        cond2: combo >= 0.0,
        gamma_plus: gp,
        gamma_minus: gm,
        combo,
    })
}

/// Bisect for the instant where sqrt(gamma_+ gamma_-) + 2 gamma_z changes
/// sign inside [t_lo, t_hi]; resolves the onset to `tol`.
pub fn pdiv_onset(rates: &PhaseCovariantRates, t_lo: f64, t_hi: f64, tol: f64) -> Result<f64> {
    let f = |t: f64| -> Result<f64> { Ok(pdiv_conditions(rates, t)?.combo) };
    let mut lo = t_lo;
    let mut hi = t_hi;
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() {
        return Err(Error::OutOfDomain {
            value: t_lo,
            domain: "bracket with a sign change of the P-divisibility combo",
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Complete-positivity indicator functions of the accumulated map; the map
/// on [0, t] is CP iff both stay <= 0 pointwise.
#[derive(Clone, Copy, Debug)]
pub struct CpConditions {
    /// |lambda_z| + |t_z| - 1.
    pub f1: f64,
    /// 4 lambda^2 + t_z^2 - (1 + lambda_z)^2.
    pub f2: f64,
}

pub fn cp_conditions(rates: &PhaseCovariantRates, t: f64) -> Result<CpConditions> {
    let d = decay_functions(rates, t)?;
    Ok(cp_from_decay(&d))
}

pub fn cp_from_decay(d: &DecayFunctions) -> CpConditions {
    CpConditions {
        f1: d.lambda_z.abs() + d.t_z.abs() - 1.0,
        f2: 4.0 * d.lambda * d.lambda + d.t_z * d.t_z - (1.0 + d.lambda_z) * (1.0 + d.lambda_z),
    }
}

/// Peak of the reachable-radius parabola and its peak value: the square of
/// the largest Bloch radius any initial state can attain at time `t`.
#[derive(Clone, Copy, Debug)]
pub struct RadiusBound {
    /// Initial v_z maximizing the reachable radius.
    pub peak_vz0: f64,
    /// Maximum of |v(t)|^2 over all initial states.
    pub radius_sq_max: f64,
}

/// See [`RadiusBound`]. At t = 0 the expressions are 0/0 and the analytic
/// limits are returned instead.
pub fn radius_bound(rates: &PhaseCovariantRates, t: f64) -> Result<RadiusBound> {
    if t < 0.0 {
        return Err(Error::OutOfDomain {
            value: t,
            domain: "t >= 0",
        });
    }
    if t == 0.0 {
        let gp = rates.gamma_plus.value(0.0);
        let gm = rates.gamma_minus.value(0.0);
        let gz = rates.gamma_z.value(0.0);
        let den = gp + gm - 4.0 * gz;
        if den.abs() < 1e-13 {
            return Err(Error::DegenerateDenominator { value: den });
        }
        return Ok(RadiusBound {
            peak_vz0: (gp - gm) / den,
            radius_sq_max: 1.0,
        });
    }
    let d = decay_functions(rates, t)?;
    let den = d.lambda * d.lambda - d.lambda_z * d.lambda_z;
    if den.abs() < 1e-13 {
        return Err(Error::DegenerateDenominator { value: den });
    }
    let peak = d.lambda_z * d.t_z / den;
    Ok(RadiusBound {
        peak_vz0: peak,
        radius_sq_max: d.lambda_z * d.lambda_z * d.t_z * d.t_z / den
            + d.t_z * d.t_z
            + d.lambda * d.lambda,
    })
}

/// Bloch-ball regions used by the positivity argument, for fixed points on
/// the negative z-axis. Boundaries go to the earlier letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
    D,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::A => write!(f, "A"),
            Region::B => write!(f, "B"),
            Region::C => write!(f, "C"),
            Region::D => write!(f, "D"),
        }
    }
}

pub fn region_classify(v: &BlochVector, v_star: &BlochVector) -> Region {
    let vzs = v_star.vz;
    if v.vz >= 0.0 {
        Region::A
    } else if v.vz <= vzs {
        Region::B
    } else if v.norm() <= vzs.abs() {
        Region::C
    } else {
        Region::D
    }
}

/// Time windows for the certified region-D lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundInterval {
    /// t in (1, 1.5]
    Early,
    /// t > 1.5
    Late,
}

/// Certified lower bound on the entropy production rate for region-D states
/// of the counterexample dynamics; valid for v_z in [-0.6, 0].
pub fn region_d_lower_bound(v_z: f64, interval: BoundInterval) -> Result<f64> {
    if !(-0.6..=0.0).contains(&v_z) {
        return Err(Error::OutOfDomain {
            value: v_z,
            domain: "v_z in [-0.6, 0]",
        });
    }
    let prefactor = v_z + 0.6;
    Ok(match interval {
        BoundInterval::Early => prefactor * (1.05 * v_z + 0.88),
        BoundInterval::Late => prefactor * (1.21 * v_z + 0.73),
    })
}
