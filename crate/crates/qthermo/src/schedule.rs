//! Piecewise-polynomial time schedules for rates and drive frequencies.
//!
//! A [`Schedule`] is a list of contiguous segments starting at t = 0, each
//! carrying polynomial coefficients in absolute time (`value = sum_k c_k t^k`).
//! The final segment must be unbounded so a schedule is total on `[0, inf)`.
//! Integrals of the schedule itself are exact (polynomial antiderivative);
//! integrals of nonlinear functions of schedules go through the adaptive
//! Simpson rule in [`integrate_adaptive`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySegment {
    pub t_start: f64,
    /// `None` marks the final, unbounded segment.
    pub t_end: Option<f64>,
    /// Coefficients in absolute time, constant term first.
    pub poly_coeffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct Schedule {
    segments: Vec<PolySegment>,
}

#[derive(Deserialize)]
struct RawSchedule {
    segments: Vec<PolySegment>,
}

impl TryFrom<RawSchedule> for Schedule {
    type Error = Error;
    fn try_from(raw: RawSchedule) -> Result<Self> {
        Schedule::new(raw.segments)
    }
}

fn poly_eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Antiderivative of the polynomial, evaluated at t (zero constant term).
fn poly_antiderivative(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &c) in coeffs.iter().enumerate().rev() {
        acc = acc * t + c / (k as f64 + 1.0);
    }
    acc * t
}

impl Schedule {
    pub fn new(segments: Vec<PolySegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Schedule("schedule has no segments".into()));
        }
        if segments[0].t_start > 1e-12 {
            return Err(Error::Schedule(format!(
                "first segment starts at {} instead of 0",
                segments[0].t_start
            )));
        }
        for pair in segments.windows(2) {
            match pair[0].t_end {
                None => {
                    return Err(Error::Schedule(
                        "only the final segment may be unbounded".into(),
                    ))
                }
                Some(e) => {
                    if (e - pair[1].t_start).abs() > 1e-12 {
                        return Err(Error::Schedule(format!(
                            "segments are not contiguous at t = {e}"
                        )));
                    }
                    if e <= pair[0].t_start {
                        return Err(Error::Schedule(format!(
                            "segment ending at {e} has nonpositive length"
                        )));
                    }
                }
            }
        }
        if segments.last().unwrap().t_end.is_some() {
            return Err(Error::Schedule("final segment must be unbounded".into()));
        }
        Ok(Self { segments })
    }

    pub fn constant(v: f64) -> Self {
        Self {
            segments: vec![PolySegment {
                t_start: 0.0,
                t_end: None,
                poly_coeffs: vec![v],
            }],
        }
    }

    pub fn segments(&self) -> &[PolySegment] {
        &self.segments
    }

    /// Interior segment boundaries, useful for splitting quadratures.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments
            .iter()
            .filter_map(|s| s.t_end)
            .collect()
    }

    pub fn value(&self, t: f64) -> f64 {
        // segments are half-open [t_start, t_end); the last one is closed below
        let seg = self
            .segments
            .iter()
            .rev()
            .find(|s| t >= s.t_start)
            .unwrap_or(&self.segments[0]);
        poly_eval(&seg.poly_coeffs, t)
    }

    /// Exact integral over [0, t].
    pub fn integral(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for seg in &self.segments {
            if t <= seg.t_start {
                break;
            }
            let hi = match seg.t_end {
                Some(e) => e.min(t),
                None => t,
            };
            total += poly_antiderivative(&seg.poly_coeffs, hi)
                - poly_antiderivative(&seg.poly_coeffs, seg.t_start);
        }
        total
    }
}

/// Adaptive Simpson quadrature with absolute tolerance.
///
/// The integrand is assumed piecewise-smooth; split at known kinks via
/// [`integrate_adaptive_split`] for best behavior.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 48)
        .ok_or(Error::QuadratureFailure { a, b, tol })
}

/// Adaptive Simpson with interior split points (schedule breakpoints).
pub fn integrate_adaptive_split<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    splits: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut knots: Vec<f64> = vec![a];
    for &s in splits {
        if s > a && s < b {
            knots.push(s);
        }
    }
    knots.push(b);
    knots.sort_by(f64::total_cmp);
    let n = (knots.len() - 1) as f64;
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += integrate_adaptive(f, w[0], w[1], tol / n)?;
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        return Some(left + right + err / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Some(l + r)
}
