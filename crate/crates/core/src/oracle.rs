//! Verification by means independent of the spectral fixed-point machinery.
//!
//! An odd `T`-periodic solution satisfies `u(0) = 0` (oddness: `u(0) = -u(0)`)
//! and `u(T/2) = 0` (oddness and periodicity: `u(T/2) = -u(-T/2) = -u(T/2)`).
//! Conversely, for odd `g` and odd `k`, a solution of the initial value problem
//! with `u(0) = 0` that also has `u(T/2) = 0` extends by odd reflection to an
//! odd `T`-periodic solution. So the periodic problem reduces to the two-point
//! boundary value problem on `[0, T/2]`, solved here by shooting on the slope
//! `v0 = u'(0)` with classical RK4.
//!
//! Nothing in this module calls `apply_s` or the fixed-point solvers.

use alloc::vec;
use alloc::vec::Vec;

use crate::funcspace::OddPeriodicFunction;
use crate::grid::TrigTable;
use crate::problems::Problem;

/// Minimum number of RK4 steps per half period (`h <= T / 2048`).
pub const MIN_HALF_PERIOD_STEPS: usize = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("at least 16 steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("integration time must be finite, got {0}")]
    InvalidTime(f64),
    #[error("state became non-finite at t = {time}")]
    BlowUp { time: f64 },
    #[error("oracle inconclusive: no sign change on [{lo}, {hi}] and secant stagnated (best |u(T/2)| = {best_defect:e})")]
    Inconclusive { lo: f64, hi: f64, best_defect: f64 },
}

/// RK4 output: nodes `t_i = i h` with `u(t_i)` and `u'(t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last_u(&self) -> f64 {
        *self.u.last().expect("non-empty trajectory")
    }

    /// Cubic Hermite interpolation of `u` using the stored slopes.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.t.len();
        let t0 = self.t[0];
        let h = (self.t[n - 1] - t0) / (n - 1) as f64;
        let x = ((t - t0) / h).clamp(0.0, (n - 1) as f64);
        let i = (libm::floor(x) as usize).min(n - 2);
        let s = x - i as f64;
        let (u0, u1, d0, d1) = (self.u[i], self.u[i + 1], self.v[i] * h, self.v[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * u0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * u1
            + (s3 - s2) * d1
    }
}

/// Classical RK4 for `u' = v`, `v' = k(t) - g(u)` from `t = 0`.
pub fn integrate_ivp(
    p: &Problem,
    u0: f64,
    v0: f64,
    t_end: f64,
    steps: usize,
) -> Result<Trajectory, OracleError> {
    if steps < 16 {
        return Err(OracleError::TooFewSteps(steps));
    }
    if !t_end.is_finite() {
        return Err(OracleError::InvalidTime(t_end));
    }
    let h = t_end / steps as f64;
    let accel = |t: f64, u: f64| p.k(t) - p.g(u);
    let mut traj = Trajectory {
        t: Vec::with_capacity(steps + 1),
        u: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps + 1),
    };
    let (mut u, mut v) = (u0, v0);
    traj.t.push(0.0);
    traj.u.push(u);
    traj.v.push(v);
    for i in 0..steps {
        let t = i as f64 * h;
        let k1u = v;
        let k1v = accel(t, u);
        let k2u = v + 0.5 * h * k1v;
        let k2v = accel(t + 0.5 * h, u + 0.5 * h * k1u);
        let k3u = v + 0.5 * h * k2v;
        let k3v = accel(t + 0.5 * h, u + 0.5 * h * k2u);
        let k4u = v + h * k3v;
        let k4v = accel(t + h, u + h * k3u);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let t_next = (i + 1) as f64 * h;
        if !u.is_finite() || !v.is_finite() {
            return Err(OracleError::BlowUp { time: t_next });
        }
        traj.t.push(t_next);
        traj.u.push(u);
        traj.v.push(v);
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Target for `|u(T/2)|`.
    pub tol: f64,
    /// Mode count of the reconstructed function.
    pub modes: usize,
    /// RK4 steps on `[0, T/2]`; `None` picks the smallest multiple of `modes`
    /// that is at least [`MIN_HALF_PERIOD_STEPS`], so reconstruction samples
    /// fall on RK4 nodes.
    pub steps: Option<usize>,
    pub max_bisections: usize,
    pub max_secant: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            tol: 1e-11,
            modes: crate::DEFAULT_MODES,
            steps: None,
            max_bisections: 200,
            max_secant: 100,
        }
    }
}

impl ShootingOptions {
    fn half_period_steps(&self) -> usize {
        self.steps.unwrap_or_else(|| {
            let modes = self.modes.max(1);
            modes * MIN_HALF_PERIOD_STEPS.div_ceil(modes)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    /// Initial slope `u'(0)`.
    pub v0: f64,
    /// `u(T/2)` at the accepted slope.
    pub boundary_defect: f64,
    /// Trajectory over `[0, T/2]`.
    pub trajectory: Trajectory,
    /// Odd reflection of the trajectory, resampled into a sine series.
    pub reconstructed: OddPeriodicFunction,
    /// Number of IVP integrations spent.
    pub evaluations: usize,
}

/// Finds `v0` with `|u(T/2; v0)| <= tol`: bisection when the bracket has a sign
/// change, secant iteration from the bracket ends otherwise.
pub fn shoot(
    p: &Problem,
    bracket: (f64, f64),
    opts: &ShootingOptions,
) -> Result<ShootingResult, OracleError> {
    let half = p.period() / 2.0;
    let steps = opts.half_period_steps();
    let mut evaluations = 0usize;
    let mut run = |v0: f64| -> Result<Trajectory, OracleError> {
        evaluations += 1;
        integrate_ivp(p, 0.0, v0, half, steps)
    };

    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let traj_lo = run(lo)?;
    let traj_hi = run(hi)?;
    let (f_lo, f_hi) = (traj_lo.last_u(), traj_hi.last_u());

    let (v0, traj) = if f_lo.abs() <= opts.tol {
        (lo, traj_lo)
    } else if f_hi.abs() <= opts.tol {
        (hi, traj_hi)
    } else if f_lo.signum() != f_hi.signum() {
        let mut f_lo = f_lo;
        let mut best = if f_lo.abs() < f_hi.abs() {
            (lo, traj_lo)
        } else {
            (hi, traj_hi)
        };
        for _ in 0..opts.max_bisections {
            let mid = 0.5 * (lo + hi);
            let traj = run(mid)?;
            let f_mid = traj.last_u();
            let done = f_mid.abs() <= opts.tol || mid == lo || mid == hi;
            if f_mid.abs() < best.1.last_u().abs() {
                best = (mid, traj);
            }
            if done {
                break;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        best
    } else {
        secant(&mut run, (lo, f_lo, traj_lo), (hi, f_hi, traj_hi), opts)?
    };

    let boundary_defect = traj.last_u();
    if boundary_defect.abs() > opts.tol {
        return Err(OracleError::Inconclusive {
            lo: bracket.0,
            hi: bracket.1,
            best_defect: boundary_defect.abs(),
        });
    }
    let reconstructed = reconstruct(&traj, p.period(), opts.modes);
    Ok(ShootingResult {
        v0,
        boundary_defect,
        trajectory: traj,
        reconstructed,
        evaluations,
    })
}

fn secant<F>(
    run: &mut F,
    a: (f64, f64, Trajectory),
    b: (f64, f64, Trajectory),
    opts: &ShootingOptions,
) -> Result<(f64, Trajectory), OracleError>
where
    F: FnMut(f64) -> Result<Trajectory, OracleError>,
{
    let (lo, hi) = (a.0, b.0);
    let (mut x0, mut f0) = (a.0, a.1);
    let (mut x1, mut f1, mut traj1) = (b.0, b.1, b.2);
    if f0.abs() < f1.abs() {
        core::mem::swap(&mut x0, &mut x1);
        core::mem::swap(&mut f0, &mut f1);
        traj1 = a.2;
    }
    for _ in 0..opts.max_secant {
        let denom = f1 - f0;
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / denom;
        if !x2.is_finite() || x2 == x1 {
            break;
        }
        let traj = run(x2)?;
        let f2 = traj.last_u();
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        traj1 = traj;
        if f1.abs() <= opts.tol {
            return Ok((x1, traj1));
        }
    }
    if f1.abs() <= opts.tol {
        Ok((x1, traj1))
    } else {
        Err(OracleError::Inconclusive {
            lo,
            hi,
            best_defect: f1.abs(),
        })
    }
}

/// Reflects the half-period trajectory to a full period and sine-analyzes it.
fn reconstruct(traj: &Trajectory, period: f64, modes: usize) -> OddPeriodicFunction {
    let modes = modes.max(2);
    let points = 2 * modes;
    let mut samples = vec![0.0; points];
    let steps = traj.len() - 1;
    for j in 1..modes {
        let value = if steps.is_multiple_of(modes) {
            traj.u[j * (steps / modes)]
        } else {
            traj.interpolate(j as f64 * period / points as f64)
        };
        samples[j] = value;
        samples[points - j] = -value;
    }
    OddPeriodicFunction::analyze_unchecked(&samples, period)
}

/// Pointwise defect `u''(t) + g(u(t)) - k(t)` on the grid `t_j = j T / points`.
pub fn pointwise_residual(p: &Problem, u: &OddPeriodicFunction, points: usize) -> Vec<f64> {
    let table = TrigTable::new(points);
    let u_vals = table.synth_sine(u.coeffs());
    let upp_vals = table.synth_sine(u.second_derivative().coeffs());
    let k_vals = table.synth_sine(p.forcing().coeffs());
    u_vals
        .iter()
        .zip(&upp_vals)
        .zip(&k_vals)
        .map(|((&x, &upp), &k)| upp + p.g(x) - k)
        .collect()
}

/// `max |u'' + g(u) - k|` over `4N` grid points, `u''` taken spectrally.
pub fn residual(p: &Problem, u: &OddPeriodicFunction) -> f64 {
    let points = 4 * u.modes().max(1);
    pointwise_residual(p, u, points).iter().fold(0.0, |m, r| {
        if r.is_nan() {
            f64::NAN
        } else {
            m.max(r.abs())
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub passed: bool,
    /// Sup-norm distance between the candidate and the shooting solution.
    pub distance: f64,
    pub candidate_residual: f64,
    pub oracle_residual: f64,
    /// Spectral `u'(0)` of the candidate, used to seed the shooting bracket.
    pub candidate_slope: f64,
    pub oracle_slope: f64,
    pub oracle: OddPeriodicFunction,
}

/// Shoots from the candidate's own slope and compares.
pub fn cross_validate(
    p: &Problem,
    u: &OddPeriodicFunction,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<CrossValidation, OracleError> {
    let slope = u.derivative().evaluate(0.0);
    let delta = 1e-3 * (1.0 + slope.abs());
    let mut shooting = *opts;
    shooting.modes = u.modes();
    let shot = shoot(p, (slope - delta, slope + delta), &shooting)?;
    let distance = u.distance(&shot.reconstructed);
    let candidate_residual = residual(p, u);
    let oracle_residual = residual(p, &shot.reconstructed);
    let passed = distance <= tol && candidate_residual <= tol && oracle_residual <= tol;
    Ok(CrossValidation {
        passed,
        distance,
        candidate_residual,
        oracle_residual,
        candidate_slope: slope,
        oracle_slope: shot.v0,
        oracle: shot.reconstructed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin, Family, ForcingTerm};
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn free_motion_is_exact() {
        let p = builtin(Family::Zero, TAU, &[]).unwrap();
        let tr = integrate_ivp(&p, 0.0, 1.0, PI, 4096).unwrap();
        assert_abs_diff_eq!(tr.last_u(), PI, epsilon = 1e-10);
        assert_eq!(tr.len(), 4097);
    }

    #[test]
    fn harmonic_oscillator_matches_sine() {
        let p = builtin(Family::Linear { c: 1.0 }, TAU, &[]).unwrap();
        let tr = integrate_ivp(&p, 0.0, 1.0, PI / 2.0, 1024).unwrap();
        assert_abs_diff_eq!(tr.last_u(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn forced_free_particle_matches_closed_form() {
        let p = builtin(Family::Zero, TAU, &[ForcingTerm::new(1, 1.0)]).unwrap();
        let tr = integrate_ivp(&p, 0.0, -1.0, PI, 2048).unwrap();
        assert_abs_diff_eq!(tr.last_u(), 0.0, epsilon = 1e-10);
        for (t, u) in tr.t.iter().zip(&tr.u) {
            assert_abs_diff_eq!(*u, -libm::sin(*t), epsilon = 1e-10);
        }
    }

    #[test]
    fn rk4_rejects_bad_input_and_reports_blowup() {
        let p = builtin(Family::Zero, TAU, &[]).unwrap();
        assert_eq!(
            integrate_ivp(&p, 0.0, 1.0, 1.0, 8),
            Err(OracleError::TooFewSteps(8))
        );
        let c = builtin(Family::Cubic { c3: -1.0 }, TAU, &[]).unwrap();
        match integrate_ivp(&c, 0.0, 10.0, 10.0, 1000) {
            Err(OracleError::BlowUp { time }) => assert!(time > 0.0 && time <= 10.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn shoot_zero_g() {
        let p = builtin(Family::Zero, TAU, &[ForcingTerm::new(1, 1.0)]).unwrap();
        let r = shoot(&p, (-2.0, 0.0), &ShootingOptions::default()).unwrap();
        assert_abs_diff_eq!(r.v0, -1.0, epsilon = 1e-10);
        assert!(r.boundary_defect.abs() <= 1e-11);
        assert_abs_diff_eq!(r.reconstructed.coeff(1), -1.0, epsilon = 1e-10);
        assert!(
            r.reconstructed
                .sub(&OddPeriodicFunction::single_mode(TAU, 2, 1, -1.0).unwrap())
                .sup_norm()
                < 1e-10
        );
        assert_eq!(r.trajectory.u[0], 0.0);
    }

    #[test]
    fn shoot_linear_matches_analytic_slope() {
        let p = builtin(Family::Linear { c: 0.01 }, TAU, &[ForcingTerm::new(1, 1.0)]).unwrap();
        let r = shoot(&p, (-2.0, 0.0), &ShootingOptions::default()).unwrap();
        let b = 1.0 / (0.01 - 1.0);
        assert_abs_diff_eq!(r.v0, b, epsilon = 1e-9);
        assert_abs_diff_eq!(b, -1.010101, epsilon = 1e-6);
    }

    #[test]
    fn shoot_unforced_finds_zero() {
        let p = builtin(Family::Pendulum { a: 0.04 }, TAU, &[]).unwrap();
        let r = shoot(&p, (-1.0, 1.0), &ShootingOptions::default()).unwrap();
        assert_eq!(r.v0, 0.0);
        assert!(r.reconstructed.coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn shoot_uses_secant_without_sign_change() {
        let p = builtin(Family::Zero, TAU, &[ForcingTerm::new(1, 1.0)]).unwrap();
        let r = shoot(&p, (0.5, 1.0), &ShootingOptions::default()).unwrap();
        assert_abs_diff_eq!(r.v0, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn shoot_inconclusive_when_secant_stagnates() {
        // u'' = 0 with k = 0: F(v0) = v0 T/2 is linear, but the bracket [1, 1] gives no slope.
        let p = builtin(Family::Zero, TAU, &[]).unwrap();
        let err = shoot(&p, (1.0, 1.0), &ShootingOptions::default()).unwrap_err();
        assert!(matches!(err, OracleError::Inconclusive { .. }));
    }

    #[test]
    fn hermite_interpolation_is_fourth_order_accurate() {
        let p = builtin(Family::Linear { c: 1.0 }, TAU, &[]).unwrap();
        let tr = integrate_ivp(&p, 0.0, 1.0, PI, 512).unwrap();
        for i in 0..100 {
            let t = 0.0314 * i as f64;
            assert_abs_diff_eq!(tr.interpolate(t), libm::sin(t), epsilon = 1e-9);
        }
    }

    #[test]
    fn residual_examples() {
        let p = builtin(Family::Zero, TAU, &[ForcingTerm::new(1, 1.0)]).unwrap();
        let exact = OddPeriodicFunction::single_mode(TAU, 8, 1, -1.0).unwrap();
        assert!(residual(&p, &exact) <= 1e-12);
        let wrong = OddPeriodicFunction::single_mode(TAU, 8, 1, 1.0).unwrap();
        assert_abs_diff_eq!(residual(&p, &wrong), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cross_validate_exact_and_corrupted() {
        let p = builtin(Family::Zero, TAU, &[ForcingTerm::new(1, 1.0)]).unwrap();
        let exact = OddPeriodicFunction::single_mode(TAU, 32, 1, -1.0).unwrap();
        let cv = cross_validate(&p, &exact, 1e-6, &ShootingOptions::default()).unwrap();
        assert!(cv.passed);
        assert!(cv.distance <= 1e-10);

        let bumped = exact.add_scaled(
            &OddPeriodicFunction::single_mode(TAU, 32, 2, 1.0).unwrap(),
            0.1,
        );
        let cv = cross_validate(&p, &bumped, 1e-6, &ShootingOptions::default()).unwrap();
        assert!(!cv.passed);
        assert_abs_diff_eq!(cv.distance, 0.1, epsilon = 1e-6);
    }
}
