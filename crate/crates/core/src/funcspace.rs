//! Odd and even `T`-periodic functions as truncated trigonometric series.
//!
//! An [`OddPeriodicFunction`] is `u(t) = sum_{n=1..N} b_n sin(2 pi n t / T)`.
//! Oddness, periodicity, zero mean and the zeros at `t = 0` and `t = T/2` are
//! consequences of the basis and never need checking. Derivatives alternate
//! parity: the first derivative is an [`EvenPeriodicFunction`] (cosine series
//! without constant term), the second is odd again.
//!
//! Sampling always happens on uniform grids `t_j = j T / M`. The sup norm is
//! the maximum over such a grid and is therefore a lower bound on the true
//! supremum; the refinement factor is configurable.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::TrigTable;

/// Default refinement factor for [`OddPeriodicFunction::sup_norm`]: `8 N` grid points.
pub const SUP_NORM_REFINEMENT: usize = 8;

/// Default relative tolerance on the odd-symmetry defect accepted by
/// [`OddPeriodicFunction::from_samples`].
pub const DEFAULT_SYMMETRY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FuncSpaceError {
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("sample count must be even and at least 4, got {0}")]
    BadSampleCount(usize),
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("samples are not odd: symmetry defect {defect:e} exceeds {tolerance:e}")]
    NotOdd { defect: f64, tolerance: f64 },
    #[error("a series needs at least one mode")]
    NoModes,
}

fn check_period(period: f64) -> Result<(), FuncSpaceError> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(FuncSpaceError::InvalidPeriod(period))
    }
}

/// Reduces `t` into `[-T/2, T/2]`. Symmetric in `t`, so `reduce(-t) == -reduce(t)`.
fn reduce(t: f64, period: f64) -> f64 {
    t - period * libm::round(t / period)
}

/// `max_j |s_j + s_{(M - j) mod M}|`: the grid form of `|u(t) + u(-t)|`.
pub fn odd_symmetry_defect(samples: &[f64]) -> f64 {
    let m_total = samples.len();
    (0..m_total)
        .map(|j| (samples[j] + samples[(m_total - j) % m_total]).abs())
        .fold(0.0, f64::max)
}

/// Trapezoidal mean `(1/T) int_0^T u dt` of samples on a uniform grid over
/// one full period. For periodic data the trapezoid rule is the plain average.
pub fn mean_of_samples(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// An element of the space of odd `T`-periodic functions, truncated to `N` sine modes.
#[derive(Debug, Clone, PartialEq)]
pub struct OddPeriodicFunction {
    period: f64,
    coeffs: Vec<f64>,
}

impl OddPeriodicFunction {
    /// Builds `sum_n coeffs[n-1] sin(2 pi n t / T)`.
    pub fn new(period: f64, coeffs: Vec<f64>) -> Result<Self, FuncSpaceError> {
        check_period(period)?;
        if coeffs.is_empty() {
            return Err(FuncSpaceError::NoModes);
        }
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(FuncSpaceError::NonFinite { index });
        }
        Ok(OddPeriodicFunction { period, coeffs })
    }

    pub fn zero(period: f64, modes: usize) -> Result<Self, FuncSpaceError> {
        Self::new(period, vec![0.0; modes])
    }

    /// A single mode `amplitude * sin(2 pi n t / T)` padded to `modes`.
    pub fn single_mode(
        period: f64,
        modes: usize,
        n: usize,
        amplitude: f64,
    ) -> Result<Self, FuncSpaceError> {
        let mut coeffs = vec![0.0; modes.max(n)];
        if n > 0 {
            coeffs[n - 1] = amplitude;
        }
        Self::new(period, coeffs)
    }

    /// Sine interpolant of samples taken at `t_j = j T / (2N)`, `j = 0..2N`.
    ///
    /// Returns `N` coefficients. The Nyquist mode `b_N` vanishes on this grid
    /// and is always zero in the result. Rejects data whose odd-symmetry defect
    /// exceeds `1e-8 * max|sample|`.
    pub fn from_samples(samples: &[f64], period: f64) -> Result<Self, FuncSpaceError> {
        Self::from_samples_with_tolerance(samples, period, DEFAULT_SYMMETRY_TOLERANCE)
    }

    /// As [`from_samples`](Self::from_samples) with a custom relative symmetry tolerance.
    pub fn from_samples_with_tolerance(
        samples: &[f64],
        period: f64,
        rel_tol: f64,
    ) -> Result<Self, FuncSpaceError> {
        check_period(period)?;
        if samples.len() < 4 || !samples.len().is_multiple_of(2) {
            return Err(FuncSpaceError::BadSampleCount(samples.len()));
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(FuncSpaceError::NonFinite { index });
        }
        let scale = samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        let tolerance = rel_tol * scale;
        let defect = odd_symmetry_defect(samples);
        if defect > tolerance {
            return Err(FuncSpaceError::NotOdd { defect, tolerance });
        }
        Ok(Self::analyze_unchecked(samples, period))
    }

    /// Sine analysis without the symmetry check; the caller guarantees finite, even-length input.
    pub(crate) fn analyze_unchecked(samples: &[f64], period: f64) -> Self {
        let coeffs = TrigTable::new(samples.len()).analyze_sine(samples);
        OddPeriodicFunction { period, coeffs }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    /// `coeffs()[n-1]` is the coefficient of `sin(2 pi n t / T)`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.coeffs.get(n - 1).copied().unwrap_or(0.0)
        }
    }

    /// Same function with `modes` coefficients (zero padded or truncated).
    pub fn resized(&self, modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(modes.max(1), 0.0);
        OddPeriodicFunction {
            period: self.period,
            coeffs,
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let theta = 2.0 * PI * reduce(t, self.period) / self.period;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| b * libm::sin((i + 1) as f64 * theta))
            .sum()
    }

    /// Values on the uniform grid `t_j = j T / points`, `j = 0..points`.
    pub fn sample(&self, points: usize) -> Vec<f64> {
        TrigTable::new(points).synth_sine(&self.coeffs)
    }

    /// Grid sup norm on `8 N` points.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_refined(SUP_NORM_REFINEMENT)
    }

    /// Max of `|u|` over `refinement * N` equispaced points of one period.
    /// A lower bound on the true sup norm.
    pub fn sup_norm_refined(&self, refinement: usize) -> f64 {
        let points = (refinement.max(1) * self.modes()).max(4);
        self.sample(points).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal mean over the `2N` sample grid.
    pub fn mean(&self) -> f64 {
        mean_of_samples(&self.sample(2 * self.modes().max(2)))
    }

    fn wavenumber(&self, n: usize) -> f64 {
        2.0 * PI * n as f64 / self.period
    }

    /// `u'`, a cosine series.
    pub fn derivative(&self) -> EvenPeriodicFunction {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| b * self.wavenumber(i + 1))
            .collect();
        EvenPeriodicFunction {
            period: self.period,
            coeffs,
        }
    }

    /// `u''`, odd again: coefficients `-(2 pi n / T)^2 b_n`.
    pub fn second_derivative(&self) -> OddPeriodicFunction {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let w = self.wavenumber(i + 1);
                -w * w * b
            })
            .collect();
        OddPeriodicFunction {
            period: self.period,
            coeffs,
        }
    }

    pub fn differentiate(&self, order: DerivativeOrder) -> PeriodicFunction {
        match order {
            DerivativeOrder::First => PeriodicFunction::Even(self.derivative()),
            DerivativeOrder::Second => PeriodicFunction::Odd(self.second_derivative()),
        }
    }

    /// Coefficient-wise `self + scale * other`; the result has the larger mode count.
    pub fn add_scaled(&self, other: &OddPeriodicFunction, scale: f64) -> OddPeriodicFunction {
        let modes = self.modes().max(other.modes());
        let coeffs = (1..=modes)
            .map(|n| self.coeff(n) + scale * other.coeff(n))
            .collect();
        OddPeriodicFunction {
            period: self.period,
            coeffs,
        }
    }

    pub fn sub(&self, other: &OddPeriodicFunction) -> OddPeriodicFunction {
        self.add_scaled(other, -1.0)
    }

    pub fn scale(&self, factor: f64) -> OddPeriodicFunction {
        OddPeriodicFunction {
            period: self.period,
            coeffs: self.coeffs.iter().map(|b| b * factor).collect(),
        }
    }

    /// `||self - other||_inf` on the refined grid of the larger mode count.
    pub fn distance(&self, other: &OddPeriodicFunction) -> f64 {
        self.sub(other).sup_norm()
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }
}

/// `sum_{n=1..N} a_n cos(2 pi n t / T)`: an even, zero-mean periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenPeriodicFunction {
    period: f64,
    coeffs: Vec<f64>,
}

impl EvenPeriodicFunction {
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let theta = 2.0 * PI * reduce(t, self.period) / self.period;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * libm::cos((i + 1) as f64 * theta))
            .sum()
    }

    pub fn sample(&self, points: usize) -> Vec<f64> {
        TrigTable::new(points).synth_cosine(&self.coeffs)
    }

    pub fn sup_norm(&self) -> f64 {
        let points = (SUP_NORM_REFINEMENT * self.coeffs.len()).max(4);
        self.sample(points).iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// A derivative tagged with its parity.
#[derive(Debug, Clone, PartialEq)]
pub enum PeriodicFunction {
    Even(EvenPeriodicFunction),
    Odd(OddPeriodicFunction),
}

impl PeriodicFunction {
    pub fn evaluate(&self, t: f64) -> f64 {
        match self {
            PeriodicFunction::Even(f) => f.evaluate(t),
            PeriodicFunction::Odd(f) => f.evaluate(t),
        }
    }

    pub fn is_even(&self) -> bool {
        matches!(self, PeriodicFunction::Even(_))
    }
}
