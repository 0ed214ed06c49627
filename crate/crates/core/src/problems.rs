//! Problem definitions: the triple `(g, k, T)` plus the data the existence and
//! uniqueness arguments need (a bound on `||g'||_inf`, sublinearity majorants).
//!
//! Hypotheses are validated on a symmetric probe grid over `[-R, R]` with
//! `R = 10 (1 + a-priori bound)` when a usable majorant exists and `R = 10`
//! otherwise. The hypotheses are global statements; the probe only covers the
//! window where solutions can live.
//!
//! Sublinearity is taken in the two-sided form `|g(x)| <= M + eps |x|`, which
//! for odd `g` is equivalent to the one-sided form on the positive axis.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::funcspace::{FuncSpaceError, OddPeriodicFunction};

/// Number of positive probe abscissae; each is checked together with its mirror.
const PROBE_HALF_POINTS: usize = 500;
const ODDNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("parameter `{name}` must be finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("forcing mode must be at least 1 (mode 0 is a constant, not odd)")]
    ForcingModeZero,
    #[error("forcing amplitude for mode {mode} is not finite")]
    ForcingNonFinite { mode: usize },
    #[error("forcing is not an odd periodic function: {0}")]
    ForcingNotOdd(FuncSpaceError),
    #[error("forcing period {forcing} does not match problem period {period}")]
    ForcingPeriodMismatch { forcing: f64, period: f64 },
    #[error("g is not odd: defect {defect:e} at x = {x}")]
    NonlinearityNotOdd { x: f64, defect: f64 },
    #[error("g or g' is not finite at x = {x}")]
    NonlinearityNonFinite { x: f64 },
    #[error("declared bound {bound} on |g'| is exceeded: |g'({x})| = {observed}")]
    DerivativeBoundViolated { bound: f64, x: f64, observed: f64 },
    #[error("majorant (eps = {eps}, M = {m}) fails at x = {x}: |g(x)| = {observed}")]
    MajorantViolated {
        eps: f64,
        m: f64,
        x: f64,
        observed: f64,
    },
    #[error("invalid majorant (eps = {eps}, M = {m}): both must be finite and non-negative")]
    InvalidMajorant { eps: f64, m: f64 },
}

impl ProblemError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ProblemError::InvalidPeriod(_) => "E_PERIOD",
            ProblemError::InvalidParameter { .. } => "E_PARAM",
            ProblemError::ForcingModeZero => "E_FORCING_MODE",
            ProblemError::ForcingNonFinite { .. } => "E_FORCING_VALUE",
            ProblemError::ForcingNotOdd(_) => "E_FORCING_NOT_ODD",
            ProblemError::ForcingPeriodMismatch { .. } => "E_FORCING_PERIOD",
            ProblemError::NonlinearityNotOdd { .. } => "E_G_NOT_ODD",
            ProblemError::NonlinearityNonFinite { .. } => "E_G_NONFINITE",
            ProblemError::DerivativeBoundViolated { .. } => "E_DERIVATIVE_BOUND",
            ProblemError::MajorantViolated { .. } => "E_MAJORANT",
            ProblemError::InvalidMajorant { .. } => "E_MAJORANT_VALUE",
        }
    }
}

/// A sublinearity pair: `|g(x)| <= m + eps |x|` for all `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Majorant {
    pub eps: f64,
    pub m: f64,
}

impl Majorant {
    pub fn new(eps: f64, m: f64) -> Self {
        Majorant { eps, m }
    }
}

/// One forcing term `amplitude * sin(2 pi mode t / T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingTerm {
    pub mode: usize,
    pub amplitude: f64,
}

impl ForcingTerm {
    pub fn new(mode: usize, amplitude: f64) -> Self {
        ForcingTerm { mode, amplitude }
    }
}

/// Built-in nonlinearity families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `g = 0`.
    Zero,
    /// `g(x) = c x`.
    Linear { c: f64 },
    /// `g(x) = a sin x`, the forced pendulum.
    Pendulum { a: f64 },
    /// `g(x) = s tanh x`.
    Tanh { s: f64 },
    /// `g(x) = c3 x^3`. Not sublinear; no derivative bound or majorant.
    Cubic { c3: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Zero => "zero",
            Family::Linear { .. } => "linear",
            Family::Pendulum { .. } => "pendulum",
            Family::Tanh { .. } => "tanh_g",
            Family::Cubic { .. } => "cubic",
        }
    }

    fn parameter(&self) -> Option<(&'static str, f64)> {
        match *self {
            Family::Zero => None,
            Family::Linear { c } => Some(("c", c)),
            Family::Pendulum { a } => Some(("a", a)),
            Family::Tanh { s } => Some(("s", s)),
            Family::Cubic { c3 } => Some(("c3", c3)),
        }
    }

    fn value(&self, x: f64) -> f64 {
        match *self {
            Family::Zero => 0.0,
            Family::Linear { c } => c * x,
            Family::Pendulum { a } => a * libm::sin(x),
            Family::Tanh { s } => s * libm::tanh(x),
            Family::Cubic { c3 } => c3 * x * x * x,
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match *self {
            Family::Zero => 0.0,
            Family::Linear { c } => c,
            Family::Pendulum { a } => a * libm::cos(x),
            Family::Tanh { s } => {
                let th = libm::tanh(x);
                s * (1.0 - th * th)
            }
            Family::Cubic { c3 } => 3.0 * c3 * x * x,
        }
    }

    fn derivative_bound(&self) -> Option<f64> {
        match *self {
            Family::Zero => Some(0.0),
            Family::Linear { c } => Some(c.abs()),
            Family::Pendulum { a } => Some(a.abs()),
            Family::Tanh { s } => Some(s.abs()),
            Family::Cubic { .. } => None,
        }
    }

    fn majorants(&self) -> Vec<Majorant> {
        match *self {
            Family::Zero => alloc::vec![Majorant::new(0.0, 0.0)],
            Family::Linear { c } => alloc::vec![Majorant::new(c.abs(), 0.0)],
            Family::Pendulum { a } => alloc::vec![Majorant::new(0.0, a.abs())],
            Family::Tanh { s } => alloc::vec![Majorant::new(0.0, s.abs())],
            Family::Cubic { .. } => Vec::new(),
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A caller-supplied `(g, g')` pair, validated like the built-in families.
#[derive(Clone)]
pub struct CustomNonlinearity {
    pub name: String,
    value: ScalarFn,
    derivative: ScalarFn,
}

impl CustomNonlinearity {
    pub fn new<G, D>(name: &str, value: G, derivative: D) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CustomNonlinearity {
            name: name.to_string(),
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }
}

impl fmt::Debug for CustomNonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomNonlinearity")
            .field("name", &self.name)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Nonlinearity {
    Builtin(Family),
    Custom(CustomNonlinearity),
}

impl Nonlinearity {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::Builtin(f) => f.value(x),
            Nonlinearity::Custom(c) => (c.value)(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::Builtin(f) => f.derivative(x),
            Nonlinearity::Custom(c) => (c.derivative)(x),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Nonlinearity::Builtin(f) => f.name(),
            Nonlinearity::Custom(c) => &c.name,
        }
    }
}

/// A validated instance of `u'' + g(u) = k(t)` on period `T`.
#[derive(Debug, Clone)]
pub struct Problem {
    period: f64,
    nonlinearity: Nonlinearity,
    forcing: OddPeriodicFunction,
    label: String,
    derivative_bound: Option<f64>,
    majorants: Vec<Majorant>,
    probe_radius: f64,
}

/// `builtin(family, T, forcing)` with a default label.
pub fn builtin(
    family: Family,
    period: f64,
    forcing: &[ForcingTerm],
) -> Result<Problem, ProblemError> {
    let mut b = Problem::builder(Nonlinearity::Builtin(family), period);
    for term in forcing {
        b = b.forcing_term(term.mode, term.amplitude);
    }
    b.build()
}

impl Problem {
    pub fn builder(nonlinearity: Nonlinearity, period: f64) -> ProblemBuilder {
        ProblemBuilder {
            nonlinearity,
            period,
            terms: Vec::new(),
            forcing: None,
            label: None,
            derivative_bound: None,
            majorants: Vec::new(),
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn g(&self, x: f64) -> f64 {
        self.nonlinearity.value(x)
    }

    pub fn g_prime(&self, x: f64) -> f64 {
        self.nonlinearity.derivative(x)
    }

    /// The forcing `k` as a sine series; its mode count is the highest forced mode.
    pub fn forcing(&self) -> &OddPeriodicFunction {
        &self.forcing
    }

    pub fn k(&self, t: f64) -> f64 {
        self.forcing.evaluate(t)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Declared global bound on `|g'|`, if any.
    pub fn derivative_bound(&self) -> Option<f64> {
        self.derivative_bound
    }

    pub fn majorants(&self) -> &[Majorant] {
        &self.majorants
    }

    pub fn probe_radius(&self) -> f64 {
        self.probe_radius
    }

    /// Re-runs every hypothesis check. Succeeds for every constructed `Problem`.
    pub fn validate(&self) -> Result<(), ProblemError> {
        check_period(self.period)?;
        if self.forcing.period() != self.period {
            return Err(ProblemError::ForcingPeriodMismatch {
                forcing: self.forcing.period(),
                period: self.period,
            });
        }
        for mj in &self.majorants {
            check_majorant_values(mj)?;
        }
        validate_nonlinearity(
            &self.nonlinearity,
            self.derivative_bound,
            &self.majorants,
            self.probe_radius,
        )
    }

    /// Same problem on a different period; the forcing keeps its mode amplitudes.
    pub fn with_period(&self, period: f64) -> Result<Problem, ProblemError> {
        check_period(period)?;
        let forcing = OddPeriodicFunction::new(period, self.forcing.coeffs().to_vec())
            .map_err(ProblemError::ForcingNotOdd)?;
        let mut b = Problem::builder(self.nonlinearity.clone(), period)
            .forcing_function(forcing)
            .label(&self.label);
        b.derivative_bound = self.derivative_bound;
        b.majorants = self.majorants.clone();
        b.build_with_declared()
    }
}

pub struct ProblemBuilder {
    nonlinearity: Nonlinearity,
    period: f64,
    terms: Vec<ForcingTerm>,
    forcing: Option<OddPeriodicFunction>,
    label: Option<String>,
    derivative_bound: Option<f64>,
    majorants: Vec<Majorant>,
}

impl ProblemBuilder {
    pub fn forcing_term(mut self, mode: usize, amplitude: f64) -> Self {
        self.terms.push(ForcingTerm::new(mode, amplitude));
        self
    }

    /// Sets the forcing directly; combined with any `forcing_term`s.
    pub fn forcing_function(mut self, k: OddPeriodicFunction) -> Self {
        self.forcing = Some(k);
        self
    }

    pub fn label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    /// Overrides the family's bound on `|g'|`. Checked against sampled `|g'|`.
    pub fn derivative_bound(mut self, bound: f64) -> Self {
        self.derivative_bound = Some(bound);
        self
    }

    /// Adds a sublinearity pair on top of the family's own.
    pub fn majorant(mut self, eps: f64, m: f64) -> Self {
        self.majorants.push(Majorant::new(eps, m));
        self
    }

    pub fn build(mut self) -> Result<Problem, ProblemError> {
        if let Nonlinearity::Builtin(family) = &self.nonlinearity {
            if self.derivative_bound.is_none() {
                self.derivative_bound = family.derivative_bound();
            }
            let mut own = family.majorants();
            own.append(&mut self.majorants);
            self.majorants = own;
        }
        self.build_with_declared()
    }

    fn build_with_declared(self) -> Result<Problem, ProblemError> {
        let period = self.period;
        check_period(period)?;
        if let Nonlinearity::Builtin(family) = &self.nonlinearity {
            if let Some((name, value)) = family.parameter() {
                if !value.is_finite() {
                    return Err(ProblemError::InvalidParameter { name, value });
                }
            }
        }
        if let Some(bound) = self.derivative_bound {
            if !bound.is_finite() || bound < 0.0 {
                return Err(ProblemError::InvalidParameter {
                    name: "derivative_bound",
                    value: bound,
                });
            }
        }
        for mj in &self.majorants {
            check_majorant_values(mj)?;
        }

        let mut modes = self.terms.iter().map(|t| t.mode).max().unwrap_or(1).max(1);
        if let Some(k) = &self.forcing {
            if k.period() != period {
                return Err(ProblemError::ForcingPeriodMismatch {
                    forcing: k.period(),
                    period,
                });
            }
            modes = modes.max(k.modes());
        }
        let mut forcing = match &self.forcing {
            Some(k) => k.resized(modes),
            None => {
                OddPeriodicFunction::zero(period, modes).map_err(ProblemError::ForcingNotOdd)?
            }
        };
        for term in &self.terms {
            if term.mode == 0 {
                return Err(ProblemError::ForcingModeZero);
            }
            if !term.amplitude.is_finite() {
                return Err(ProblemError::ForcingNonFinite { mode: term.mode });
            }
            forcing.coeffs_mut()[term.mode - 1] += term.amplitude;
        }

        let k_norm = forcing.sup_norm();
        let apriori = self
            .majorants
            .iter()
            .filter_map(|mj| apriori_from_pair(period, k_norm, mj))
            .fold(None, |acc: Option<f64>, b| {
                Some(acc.map_or(b, |a| a.min(b)))
            });
        let probe_radius = 10.0 * (1.0 + apriori.unwrap_or(0.0));

        let label = self
            .label
            .unwrap_or_else(|| self.nonlinearity.name().to_string());
        let problem = Problem {
            period,
            nonlinearity: self.nonlinearity,
            forcing,
            label,
            derivative_bound: self.derivative_bound,
            majorants: self.majorants,
            probe_radius,
        };
        problem.validate()?;
        Ok(problem)
    }
}

/// `(T^2/2)(||k|| + M) / (1 - eps T^2/2)` when `eps < 2/T^2`.
pub(crate) fn apriori_from_pair(period: f64, k_norm: f64, mj: &Majorant) -> Option<f64> {
    let gain = period * period / 2.0;
    let slack = 1.0 - mj.eps * gain;
    if slack > 0.0 {
        Some(gain * (k_norm + mj.m) / slack)
    } else {
        None
    }
}

fn check_period(period: f64) -> Result<(), ProblemError> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(ProblemError::InvalidPeriod(period))
    }
}

fn check_majorant_values(mj: &Majorant) -> Result<(), ProblemError> {
    if mj.eps.is_finite() && mj.m.is_finite() && mj.eps >= 0.0 && mj.m >= 0.0 {
        Ok(())
    } else {
        Err(ProblemError::InvalidMajorant {
            eps: mj.eps,
            m: mj.m,
        })
    }
}

fn validate_nonlinearity(
    g: &Nonlinearity,
    derivative_bound: Option<f64>,
    majorants: &[Majorant],
    radius: f64,
) -> Result<(), ProblemError> {
    let g0 = g.value(0.0);
    if !g0.is_finite() {
        return Err(ProblemError::NonlinearityNonFinite { x: 0.0 });
    }
    let mut values = Vec::with_capacity(2 * PROBE_HALF_POINTS);
    for i in 1..=PROBE_HALF_POINTS {
        let x = radius * i as f64 / PROBE_HALF_POINTS as f64;
        let (gp, gm) = (g.value(x), g.value(-x));
        let (dp, dm) = (g.derivative(x), g.derivative(-x));
        for (xx, v, d) in [(x, gp, dp), (-x, gm, dm)] {
            if !v.is_finite() || !d.is_finite() {
                return Err(ProblemError::NonlinearityNonFinite { x: xx });
            }
        }
        values.push((x, gp, gm, dp, dm));
    }
    let max_abs = values.iter().fold(g0.abs(), |m, &(_, gp, gm, _, _)| {
        m.max(gp.abs()).max(gm.abs())
    });
    let tol = ODDNESS_TOL * (1.0 + max_abs);
    if g0.abs() > tol {
        return Err(ProblemError::NonlinearityNotOdd {
            x: 0.0,
            defect: g0.abs(),
        });
    }
    for &(x, gp, gm, dp, dm) in &values {
        let defect = (gp + gm).abs();
        if defect > tol {
            return Err(ProblemError::NonlinearityNotOdd { x, defect });
        }
        if let Some(bound) = derivative_bound {
            let allowed = bound * (1.0 + 1e-12) + 1e-15;
            for (xx, d) in [(x, dp), (-x, dm)] {
                if d.abs() > allowed {
                    return Err(ProblemError::DerivativeBoundViolated {
                        bound,
                        x: xx,
                        observed: d.abs(),
                    });
                }
            }
        }
        for mj in majorants {
            let allowed = (mj.m + mj.eps * x) * (1.0 + 1e-12) + 1e-15;
            for (xx, v) in [(x, gp), (-x, gm)] {
                if v.abs() > allowed {
                    return Err(ProblemError::MajorantViolated {
                        eps: mj.eps,
                        m: mj.m,
                        x: xx,
                        observed: v.abs(),
                    });
                }
            }
        }
    }
    if let Some(bound) = derivative_bound {
        let d0 = g.derivative(0.0).abs();
        if d0 > bound * (1.0 + 1e-12) + 1e-15 {
            return Err(ProblemError::DerivativeBoundViolated {
                bound,
                x: 0.0,
                observed: d0,
            });
        }
    }
    Ok(())
}
