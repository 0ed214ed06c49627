//! `L = d²/dt²` restricted to odd periodic functions, its inverse `S`, and the
//! nonlinear operator `N(u) = k - g(u)`.
//!
//! On the sine basis `L` is diagonal with eigenvalues `-(2 pi n / T)^2`, none of
//! them zero, so `S` is the exact per-mode inverse. The certified operator norm
//! `||S|| <= T^2 / 2` is a published bound and is the constant every certificate
//! uses; the true gain on this space is `(T / 2 pi)^2`, attained on mode 1.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::funcspace::{odd_symmetry_defect, OddPeriodicFunction};
use crate::grid::TrigTable;
use crate::problems::Problem;

/// Oversampling factor applied before projecting `g(u)` back onto `N` modes.
pub const ALIAS_OVERSAMPLING: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("g(u(t)) is not finite at grid node t = {t}")]
    NonFinite { t: f64 },
    #[error("sampled g(u) is not odd: defect {defect:e} exceeds {tolerance:e}")]
    NotOdd { defect: f64, tolerance: f64 },
}

/// The certified bound on `||S||` together with the exact per-mode gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNormBound {
    pub period: f64,
    /// `T^2 / 2`.
    pub certified_bound: f64,
}

impl OperatorNormBound {
    /// `(T / (2 pi n))^2`, the magnitude of `S` on mode `n`.
    pub fn per_mode_gain(&self, n: usize) -> f64 {
        let r = self.period / (2.0 * PI * n as f64);
        r * r
    }
}

pub fn norm_bound(period: f64) -> Result<OperatorNormBound, OperatorError> {
    if !(period.is_finite() && period > 0.0) {
        return Err(OperatorError::InvalidPeriod(period));
    }
    Ok(OperatorNormBound {
        period,
        certified_bound: period * period / 2.0,
    })
}

/// `L u = u''`.
pub fn apply_l(u: &OddPeriodicFunction) -> OddPeriodicFunction {
    u.second_derivative()
}

/// The unique odd periodic `u` with `u'' = f`: `b_n(u) = -b_n(f) (T / 2 pi n)^2`.
pub fn apply_s(f: &OddPeriodicFunction) -> OddPeriodicFunction {
    let period = f.period();
    let mut u = f.clone();
    for (i, b) in u.coeffs_mut().iter_mut().enumerate() {
        let r = period / (2.0 * PI * (i + 1) as f64);
        *b *= -(r * r);
    }
    u
}

/// `N(u) = k - g(u)` truncated to the mode count of `u`.
///
/// `g(u)` is sampled on `4N` points (twice the natural `2N` grid), analyzed to
/// `2N` modes and truncated. The sampled values must be odd to within
/// `1e-10 (1 + max|u|)`, otherwise `g` is not odd.
pub fn apply_n(p: &Problem, u: &OddPeriodicFunction) -> Result<OddPeriodicFunction, OperatorError> {
    let modes = u.modes();
    let points = 2 * ALIAS_OVERSAMPLING * modes;
    let table = TrigTable::new(points);
    let u_vals = table.synth_sine(u.coeffs());
    let mut g_vals = Vec::with_capacity(points);
    for (j, &x) in u_vals.iter().enumerate() {
        let v = p.g(x);
        if !v.is_finite() {
            return Err(OperatorError::NonFinite {
                t: j as f64 * u.period() / points as f64,
            });
        }
        g_vals.push(v);
    }
    let u_max = u_vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tolerance = 1e-10 * (1.0 + u_max);
    let defect = odd_symmetry_defect(&g_vals);
    if defect > tolerance {
        return Err(OperatorError::NotOdd { defect, tolerance });
    }
    let g_coeffs = table.analyze_sine(&g_vals);
    let k = p.forcing();
    let coeffs = (1..=modes).map(|n| k.coeff(n) - g_coeffs[n - 1]).collect();
    Ok(OddPeriodicFunction::new(u.period(), coeffs).expect("finite coefficients"))
}
