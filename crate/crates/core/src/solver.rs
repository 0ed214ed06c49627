//! Fixed points of `K(u) = S(k - g(u))`.
//!
//! Two drivers:
//!
//! * [`solve_picard`] iterates `u <- K(u)`. When `(T^2/2) ||g'||_inf < 1` the
//!   map is a contraction with that factor and convergence from any start is
//!   guaranteed ([`Regime::CertifiedContraction`]). Otherwise the same
//!   iteration runs without a guarantee.
//! * [`solve_continuation`] follows `u = lambda K(u)` from `lambda = 0`
//!   (where `u = 0`) to `lambda = 1` with warm starts. It is a numerical
//!   companion to the existence argument for sublinear `g`, which bounds every
//!   such `u` a priori; it does not prove anything and can fail.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::funcspace::OddPeriodicFunction;
use crate::operators::{apply_n, apply_s, norm_bound, OperatorError};
use crate::oracle::residual;
use crate::problems::{apriori_from_pair, Problem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("no bound on |g'| is available for `{0}`")]
    NoDerivativeBound(alloc::string::String),
    #[error("no usable sublinearity majorant: every declared eps is >= 2/T^2 = {threshold}")]
    NoUsableMajorant { threshold: f64 },
    #[error("contraction certificate does not hold (lambda = {lambda})")]
    NotCertified { lambda: f64 },
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
    #[error("operator failure: {0}")]
    Operator(#[from] OperatorError),
    #[error("iterate became non-finite after {iterations} iterations")]
    NonFinite { iterations: usize },
    #[error("no convergence after {} iterations (last step {:e}{})",
        .report.iterations,
        .report.step_norms.last().copied().unwrap_or(f64::NAN),
        if *.diverging { ", diverging" } else { "" })]
    NotConverged {
        report: Box<SolveReport>,
        diverging: bool,
    },
    #[error("continuation step fell below {min_step} at lambda = {lambda}")]
    StepUnderflow {
        lambda: f64,
        min_step: f64,
        report: Box<SolveReport>,
    },
    #[error("continuation iterate at lambda = {lambda} has norm {norm} above the a-priori bound {bound}")]
    AprioriViolated { lambda: f64, norm: f64, bound: f64 },
}

impl SolveError {
    /// Best available iterate for failures that have one.
    pub fn partial_report(&self) -> Option<&SolveReport> {
        match self {
            SolveError::NotConverged { report, .. } | SolveError::StepUnderflow { report, .. } => {
                Some(report)
            }
            _ => None,
        }
    }
}

/// The contraction data for `K`: `lambda = ||g'||_inf * T^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCertificate {
    pub lipschitz_g: f64,
    pub norm_bound: f64,
    pub lambda: f64,
    pub holds: bool,
}

impl ContractionCertificate {
    /// `2 / T^2`, the largest admissible `||g'||_inf`.
    pub fn threshold(&self) -> f64 {
        1.0 / self.norm_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    CertifiedContraction,
    UncertifiedPicard,
    Continuation,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::CertifiedContraction => "certified_contraction",
            Regime::UncertifiedPicard => "uncertified_picard",
            Regime::Continuation => "continuation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: OddPeriodicFunction,
    /// Iterations that changed the iterate by at least `tol`; the final
    /// confirming application of the map is in `step_norms` but not counted.
    pub iterations: usize,
    /// `||u_{j+1} - u_j||_inf` for every map application.
    pub step_norms: Vec<f64>,
    /// ODE defect `max |u'' + g(u) - k|`.
    pub residual: f64,
    /// `||u - K(u)||_inf`.
    pub fixed_point_residual: f64,
    pub regime: Regime,
    pub certificate: Option<ContractionCertificate>,
    /// Accepted continuation parameters, starting at 0.
    pub lambda_path: Vec<f64>,
    /// `||u_lambda||_inf` for each accepted continuation parameter.
    pub path_norms: Vec<f64>,
    pub apriori_bound: Option<f64>,
    /// Relaxation factor in use at the end (continuation only; 1 otherwise).
    pub damping: f64,
}

pub fn certify(p: &Problem) -> Result<ContractionCertificate, SolveError> {
    let lipschitz_g = p
        .derivative_bound()
        .ok_or_else(|| SolveError::NoDerivativeBound(p.nonlinearity().name().into()))?;
    let norm_bound = norm_bound(p.period())?.certified_bound;
    let lambda = lipschitz_g * norm_bound;
    Ok(ContractionCertificate {
        lipschitz_g,
        norm_bound,
        lambda,
        holds: lambda < 1.0,
    })
}

/// Smallest `(T^2/2)(||k|| + M) / (1 - eps T^2/2)` over declared pairs with `eps < 2/T^2`.
pub fn apriori_bound(p: &Problem) -> Result<f64, SolveError> {
    let k_norm = p.forcing().sup_norm();
    p.majorants()
        .iter()
        .filter_map(|mj| apriori_from_pair(p.period(), k_norm, mj))
        .reduce(f64::min)
        .ok_or(SolveError::NoUsableMajorant {
            threshold: 2.0 / (p.period() * p.period()),
        })
}

/// `K(u) = S(N(u))`.
pub fn fixed_point_map(
    p: &Problem,
    u: &OddPeriodicFunction,
) -> Result<OddPeriodicFunction, SolveError> {
    Ok(apply_s(&apply_n(p, u)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions {
    pub modes: usize,
    /// Stop when the step sup norm drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Defaults to zero.
    pub initial_guess: Option<OddPeriodicFunction>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            modes: crate::DEFAULT_MODES,
            tol: 1e-12,
            max_iter: 10_000,
            initial_guess: None,
        }
    }
}

fn check_common(modes: usize, tol: f64) -> Result<(), SolveError> {
    if modes < 2 {
        return Err(SolveError::InvalidOption("modes must be at least 2"));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SolveError::InvalidOption("tol must be positive"));
    }
    Ok(())
}

fn starting_point(
    p: &Problem,
    guess: Option<&OddPeriodicFunction>,
    modes: usize,
) -> OddPeriodicFunction {
    match guess {
        Some(g) => OddPeriodicFunction::new(p.period(), g.resized(modes).coeffs().to_vec())
            .expect("guess coefficients are finite"),
        None => OddPeriodicFunction::zero(p.period(), modes).expect("valid period"),
    }
}

/// Plain Picard iteration `u_{j+1} = K(u_j)`.
pub fn solve_picard(p: &Problem, opts: &PicardOptions) -> Result<SolveReport, SolveError> {
    check_common(opts.modes, opts.tol)?;
    let certificate = certify(p).ok();
    let regime = match certificate {
        Some(c) if c.holds => Regime::CertifiedContraction,
        _ => Regime::UncertifiedPicard,
    };
    let mut u = starting_point(p, opts.initial_guess.as_ref(), opts.modes);
    let mut step_norms = Vec::new();
    let mut converged = false;
    for j in 0..opts.max_iter {
        let next = match fixed_point_map(p, &u) {
            Ok(v) => v,
            Err(SolveError::Operator(OperatorError::NonFinite { .. })) => {
                return Err(SolveError::NonFinite { iterations: j });
            }
            Err(e) => return Err(e),
        };
        let step = next.distance(&u);
        if !step.is_finite() {
            return Err(SolveError::NonFinite { iterations: j + 1 });
        }
        step_norms.push(step);
        u = next;
        if step < opts.tol {
            converged = true;
            break;
        }
    }
    let iterations = if converged {
        step_norms.len() - 1
    } else {
        step_norms.len()
    };
    let report = finish(
        p,
        u,
        iterations,
        step_norms,
        regime,
        certificate,
        Vec::new(),
        Vec::new(),
        1.0,
    )?;
    if converged {
        Ok(report)
    } else {
        let diverging = is_diverging(&report.step_norms);
        Err(SolveError::NotConverged {
            report: Box::new(report),
            diverging,
        })
    }
}

/// Growth over the last stretch of step norms.
fn is_diverging(steps: &[f64]) -> bool {
    if steps.len() < 4 {
        return false;
    }
    let tail = &steps[steps.len() - 4..];
    tail.windows(2).all(|w| w[1] > w[0])
}

#[allow(clippy::too_many_arguments)]
fn finish(
    p: &Problem,
    solution: OddPeriodicFunction,
    iterations: usize,
    step_norms: Vec<f64>,
    regime: Regime,
    certificate: Option<ContractionCertificate>,
    lambda_path: Vec<f64>,
    path_norms: Vec<f64>,
    damping: f64,
) -> Result<SolveReport, SolveError> {
    let fixed_point_residual = match fixed_point_map(p, &solution) {
        Ok(k) => k.distance(&solution),
        Err(_) => f64::INFINITY,
    };
    Ok(SolveReport {
        residual: residual(p, &solution),
        fixed_point_residual,
        solution,
        iterations,
        step_norms,
        regime,
        certificate,
        lambda_path,
        path_norms,
        apriori_bound: apriori_bound(p).ok(),
        damping,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationOptions {
    pub modes: usize,
    /// Initial (and maximal) increment of the homotopy parameter.
    pub lambda_step: f64,
    /// Increments below this abort the continuation.
    pub min_step: f64,
    /// Inner convergence: `||lambda K(u) - u||_inf < tol`.
    pub tol: f64,
    pub max_iter_per_step: usize,
    /// Initial relaxation factor in `(0, 1]`; halved to 0.5 when oscillation is detected.
    pub damping: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            modes: crate::DEFAULT_MODES,
            lambda_step: 0.1,
            min_step: 1e-4,
            tol: 1e-12,
            max_iter_per_step: 2_000,
            damping: 1.0,
        }
    }
}

enum InnerFailure {
    Stalled,
    Fatal(SolveError),
}

struct InnerSolve {
    solution: OddPeriodicFunction,
    step_norms: Vec<f64>,
    damping: f64,
}

/// Damped Picard on `u = lambda K(u)` from a warm start.
fn relax(
    p: &Problem,
    lambda: f64,
    start: &OddPeriodicFunction,
    damping: f64,
    opts: &ContinuationOptions,
) -> Result<InnerSolve, InnerFailure> {
    let mut theta = damping;
    let mut u = start.clone();
    let mut step_norms = Vec::new();
    let mut prev_update: Option<OddPeriodicFunction> = None;
    let mut sign_flips = 0usize;
    for _ in 0..opts.max_iter_per_step {
        let image = match fixed_point_map(p, &u) {
            Ok(k) => k.scale(lambda),
            Err(SolveError::Operator(OperatorError::NonFinite { .. })) => {
                return Err(InnerFailure::Stalled)
            }
            Err(e) => return Err(InnerFailure::Fatal(e)),
        };
        let update = image.sub(&u);
        let defect = update.sup_norm();
        if !defect.is_finite() {
            return Err(InnerFailure::Stalled);
        }
        step_norms.push(defect);
        if defect < opts.tol {
            return Ok(InnerSolve {
                solution: u,
                step_norms,
                damping: theta,
            });
        }
        // Successive updates pointing in opposite directions mean the plain
        // iteration overshoots.
        if let Some(prev) = &prev_update {
            let dot: f64 = prev
                .coeffs()
                .iter()
                .zip(update.coeffs())
                .map(|(a, b)| a * b)
                .sum();
            sign_flips = if dot < 0.0 { sign_flips + 1 } else { 0 };
            if sign_flips >= 2 && theta > 0.5 {
                theta = 0.5;
                sign_flips = 0;
            }
        }
        if step_norms.len() > 8 && defect > 1e6 * step_norms[0].max(opts.tol) {
            return Err(InnerFailure::Stalled);
        }
        u = u.add_scaled(&update, theta);
        prev_update = Some(update);
    }
    Err(InnerFailure::Stalled)
}

/// Homotopy `u = lambda K(u)`, `lambda: 0 -> 1`.
pub fn solve_continuation(
    p: &Problem,
    opts: &ContinuationOptions,
) -> Result<SolveReport, SolveError> {
    check_common(opts.modes, opts.tol)?;
    if !(opts.lambda_step > 0.0 && opts.lambda_step <= 1.0) {
        return Err(SolveError::InvalidOption("lambda_step must lie in (0, 1]"));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(SolveError::InvalidOption("damping must lie in (0, 1]"));
    }
    let bound = apriori_bound(p).ok();
    let certificate = certify(p).ok();
    let mut u = OddPeriodicFunction::zero(p.period(), opts.modes).expect("valid period");
    let mut lambda = 0.0;
    let mut step = opts.lambda_step;
    let mut damping = opts.damping;
    let mut lambda_path = vec![0.0];
    let mut path_norms = vec![0.0];
    let mut step_norms = Vec::new();
    let mut iterations = 0usize;

    while lambda < 1.0 {
        let target = if lambda + step >= 1.0 - 1e-12 {
            1.0
        } else {
            lambda + step
        };
        match relax(p, target, &u, damping, opts) {
            Ok(inner) => {
                let norm = inner.solution.sup_norm();
                if let Some(b) = bound {
                    if norm > b * (1.0 + 1e-9) {
                        return Err(SolveError::AprioriViolated {
                            lambda: target,
                            norm,
                            bound: b,
                        });
                    }
                }
                iterations += inner.step_norms.len() - 1;
                step_norms.extend(inner.step_norms);
                damping = inner.damping;
                u = inner.solution;
                lambda = target;
                lambda_path.push(lambda);
                path_norms.push(norm);
                step = (2.0 * step).min(opts.lambda_step);
            }
            Err(InnerFailure::Fatal(e)) => return Err(e),
            Err(InnerFailure::Stalled) => {
                step *= 0.5;
                if step < opts.min_step {
                    let report = finish(
                        p,
                        u,
                        iterations,
                        step_norms,
                        Regime::Continuation,
                        certificate,
                        lambda_path,
                        path_norms,
                        damping,
                    )?;
                    return Err(SolveError::StepUnderflow {
                        lambda,
                        min_step: opts.min_step,
                        report: Box::new(report),
                    });
                }
            }
        }
    }
    finish(
        p,
        u,
        iterations,
        step_norms,
        Regime::Continuation,
        certificate,
        lambda_path,
        path_norms,
        damping,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessProbe {
    pub unique: bool,
    pub max_distance: f64,
    pub solutions: Vec<OddPeriodicFunction>,
    pub seed: u64,
}

/// Picard from `trials` random starts (coefficients uniform in `[-10, 10]` on
/// modes 1..=8); unique iff all limits agree within `100 tol`.
pub fn uniqueness_probe(
    p: &Problem,
    trials: usize,
    seed: u64,
    opts: &PicardOptions,
) -> Result<UniquenessProbe, SolveError> {
    let cert = certify(p)?;
    if !cert.holds {
        return Err(SolveError::NotCertified {
            lambda: cert.lambda,
        });
    }
    if trials < 2 {
        return Err(SolveError::InvalidOption("trials must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solutions = Vec::with_capacity(trials);
    for _ in 0..trials {
        let coeffs: Vec<f64> = (0..8.min(opts.modes))
            .map(|_| rng.gen_range(-10.0..=10.0))
            .collect();
        let guess = OddPeriodicFunction::new(p.period(), coeffs).expect("finite");
        let trial_opts = PicardOptions {
            initial_guess: Some(guess),
            ..opts.clone()
        };
        solutions.push(solve_picard(p, &trial_opts)?.solution);
    }
    let mut max_distance: f64 = 0.0;
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            max_distance = max_distance.max(solutions[i].distance(&solutions[j]));
        }
    }
    Ok(UniquenessProbe {
        unique: max_distance <= 100.0 * opts.tol,
        max_distance,
        solutions,
        seed,
    })
}
