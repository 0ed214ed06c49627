//! Acceptance suite. Runs every criterion, prints one line each and exits
//! non-zero if any fails.
//!
//! `cargo test -p oddsol --test acceptance`

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use oddsol::commands::{sweep_table, sweep_values, Method, SolveFlags};
use oddsol::config::ProblemConfig;
use oddsol::io::solution_csv;
use oddsol_core::funcspace::odd_symmetry_defect;
use oddsol_core::problems::CustomNonlinearity;
use oddsol_core::{
    apply_l, apply_s, apriori_bound, builtin, certify, cross_validate, integrate_ivp, norm_bound,
    shoot, solve_continuation, solve_picard, uniqueness_probe, ContinuationOptions, Family,
    ForcingTerm, Nonlinearity, OddPeriodicFunction, PicardOptions, Problem, Regime,
    ShootingOptions, SolveError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = 2.0 * PI;
const SEED: u64 = 20_240_611;

type Verdict = (bool, String);
type Criterion = (&'static str, fn() -> Verdict);

fn random_polynomial(rng: &mut ChaCha8Rng) -> OddPeriodicFunction {
    let period = rng.gen_range(0.5..=20.0);
    let modes = rng.gen_range(1..=64);
    let coeffs: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    OddPeriodicFunction::new(period, coeffs).unwrap()
}

fn pendulum() -> Problem {
    builtin(
        Family::Pendulum { a: 0.04 },
        TAU,
        &[ForcingTerm::new(1, 0.05)],
    )
    .unwrap()
}

fn inverse_pair() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_sl: f64 = 0.0;
    let mut worst_ls: f64 = 0.0;
    let mut worst_gain: f64 = 0.0;
    for _ in 0..1000 {
        let u = random_polynomial(&mut rng);
        let scale = u.sup_norm();
        worst_sl = worst_sl.max(apply_s(&apply_l(&u)).distance(&u) / scale);
        worst_ls = worst_ls.max(apply_l(&apply_s(&u)).distance(&u) / scale);

        let t = u.period();
        let bound = norm_bound(t).unwrap();
        for n in 1..=u.modes() {
            let expected = -(t / (2.0 * PI * n as f64)).powi(2);
            let image = apply_s(&OddPeriodicFunction::single_mode(t, n, n, 1.0).unwrap());
            worst_gain = worst_gain
                .max(((image.coeff(n) - expected) / expected).abs())
                .max(((bound.per_mode_gain(n) + expected) / expected).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_sl <= 1e-12 && worst_ls <= 1e-12 && worst_gain <= 1e-12 && elapsed < 5.0;
    (
        ok,
        format!("SL {worst_sl:.2e}, LS {worst_ls:.2e}, gain {worst_gain:.2e}, {elapsed:.2}s"),
    )
}

fn norm_bound_holds() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let f = random_polynomial(&mut rng);
        let bound = norm_bound(f.period()).unwrap().certified_bound;
        worst = worst.max(apply_s(&f).sup_norm_refined(16) / (bound * f.sup_norm_refined(16)));
    }
    (
        worst <= 1.0,
        format!("max ||Sf|| / (T^2/2 ||f||) = {worst:.4}"),
    )
}

fn mean_and_parity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst_mean: f64 = 0.0;
    let mut worst_parity: f64 = 0.0;
    for _ in 0..1000 {
        let u = random_polynomial(&mut rng);
        let t = u.period();
        worst_mean = worst_mean.max(u.mean().abs() / u.sup_norm());

        let d1 = u.derivative();
        let d2 = u.second_derivative();
        let s1 = d1.sup_norm().max(f64::MIN_POSITIVE);
        let s2 = d2.sup_norm().max(f64::MIN_POSITIVE);
        for _ in 0..16 {
            let x = rng.gen_range(-t..=t);
            worst_parity = worst_parity
                .max((d1.evaluate(x) - d1.evaluate(-x)).abs() / s1)
                .max((d2.evaluate(x) + d2.evaluate(-x)).abs() / s2);
        }
        worst_parity = worst_parity.max(odd_symmetry_defect(&d2.sample(4 * u.modes())) / s2);
    }
    (
        worst_mean <= 1e-14 && worst_parity <= 1e-12,
        format!("mean/sup {worst_mean:.2e}, parity defect {worst_parity:.2e}"),
    )
}

fn pendulum_contraction() -> Verdict {
    let start = Instant::now();
    let p = pendulum();
    let cert = certify(&p).unwrap();
    let r = solve_picard(&p, &PicardOptions::default()).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for w in r.step_norms.windows(2).skip(1) {
        worst_ratio = worst_ratio.max(w[1] / w[0]);
    }
    let probe = uniqueness_probe(&p, 5, SEED, &PicardOptions::default()).unwrap();
    let shot = shoot(&p, (-1.0, 1.0), &ShootingOptions::default()).unwrap();
    let distance = r.solution.distance(&shot.reconstructed);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = cert.holds
        && r.regime == Regime::CertifiedContraction
        && worst_ratio <= cert.lambda * (1.0 + 1e-8)
        && probe.max_distance <= 1e-10
        && distance <= 1e-6
        && r.residual <= 1e-8
        && elapsed < 2.0;
    (
        ok,
        format!(
            "lambda {:.5}, worst step ratio {worst_ratio:.3e}, {} iterations, restarts {:.1e}, \
             shooting {distance:.1e}, residual {:.1e}, {elapsed:.2}s",
            cert.lambda, r.iterations, probe.max_distance, r.residual
        ),
    )
}

fn linear_closed_form() -> Verdict {
    let c = 0.01;
    let p = builtin(Family::Linear { c }, TAU, &[ForcingTerm::new(1, 1.0)]).unwrap();
    let r = solve_picard(&p, &PicardOptions::default()).unwrap();
    let modes = r.solution.modes();
    let exact = OddPeriodicFunction::single_mode(TAU, modes, 1, 1.0 / (c - 1.0)).unwrap();
    let d = r.solution.distance(&exact);
    (d <= 1e-8, format!("distance {d:.2e}"))
}

fn tanh_continuation() -> Verdict {
    let p = builtin(Family::Tanh { s: 1.0 }, TAU, &[ForcingTerm::new(1, 0.5)]).unwrap();
    let expected_bound = 2.0 * PI * PI * 1.5;
    let bound = apriori_bound(&p).unwrap();
    let r = solve_continuation(&p, &ContinuationOptions::default()).unwrap();
    let reached = r.lambda_path.last().copied().unwrap_or(0.0);
    let max_norm = r.path_norms.iter().copied().fold(0.0, f64::max);
    let cv = cross_validate(&p, &r.solution, 1e-6, &ShootingOptions::default()).unwrap();
    let ok = !certify(&p).unwrap().holds
        && reached == 1.0
        && r.residual <= 1e-8
        && cv.passed
        && (bound - expected_bound).abs() <= 1e-9 * expected_bound
        && max_norm <= expected_bound;
    (
        ok,
        format!(
            "lambda {reached}, {} steps, residual {:.1e}, oracle {:.1e}, max norm {max_norm:.4} <= {bound:.4}",
            r.lambda_path.len() - 1,
            r.residual,
            cv.distance
        ),
    )
}

fn period_sweep() -> Verdict {
    let config = ProblemConfig::parse(
        r#"{"family":"pendulum","params":{"a":0.04},"period":6.283185307179586,"forcing":[{"mode":1,"amplitude":0.05}]}"#,
    )
    .unwrap();
    let flags = SolveFlags {
        method: Method::Auto,
        tol: 1e-12,
        max_iter: 10_000,
        modes: 256,
        lambda_step: 0.1,
    };
    let values = sweep_values(1.0, 12.0, 23).unwrap();
    let rows = sweep_table(&config, "period", &values, &flags).unwrap();
    let flips: Vec<(f64, f64)> = rows
        .windows(2)
        .filter(|w| w[0].holds != w[1].holds)
        .map(|w| (w[0].param, w[1].param))
        .collect();
    let threshold = 50f64.sqrt();
    let converged = rows.iter().filter(|r| r.converged).count();
    let ok = flips.len() == 1 && rows[0].holds && flips[0].0 < threshold && threshold < flips[0].1;
    (
        ok,
        format!(
            "flip in {flips:?}, threshold {threshold:.4}, {converged}/{} converged",
            rows.len()
        ),
    )
}

fn rk4_order() -> Verdict {
    let p = builtin(Family::Linear { c: 1.0 }, TAU, &[]).unwrap();
    let t_end = 10.0;
    let err =
        |steps| (integrate_ivp(&p, 0.0, 1.0, t_end, steps).unwrap().last_u() - t_end.sin()).abs();
    let ratio = err(100) / err(200);
    (
        (12.0..=20.0).contains(&ratio),
        format!("error ratio {ratio:.3}"),
    )
}

fn rejects_bad_input() -> Verdict {
    let even = CustomNonlinearity::new(
        "sin_plus_square",
        |x: f64| 0.04 * x.sin() + 1e-3 * x * x,
        |x: f64| 0.04 * x.cos() + 2e-3 * x,
    );
    let not_odd = Problem::builder(Nonlinearity::Custom(even), TAU)
        .forcing_term(1, 0.05)
        .derivative_bound(1.0)
        .build()
        .map(|_| ())
        .map_err(|e| e.code());

    let dir = std::env::temp_dir().join(format!("oddsol-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = pendulum();
    let u = solve_picard(&p, &PicardOptions::default())
        .unwrap()
        .solution;
    let corrupted = u.add_scaled(
        &OddPeriodicFunction::single_mode(TAU, u.modes(), 2, 1.0).unwrap(),
        0.1,
    );
    let config = dir.join("pendulum.json");
    let solution = dir.join("corrupted.csv");
    std::fs::write(
        &config,
        r#"{"family":"pendulum","params":{"a":0.04},"period":6.283185307179586,"forcing":[{"mode":1,"amplitude":0.05}]}"#,
    )
    .unwrap();
    std::fs::write(&solution, solution_csv(&p, &corrupted)).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_oddsol"))
        .arg("verify")
        .arg(&config)
        .arg(&solution)
        .output()
        .unwrap()
        .status
        .code();
    let _ = std::fs::remove_dir_all(&dir);

    let cubic = builtin(Family::Cubic { c3: 1.0 }, TAU, &[ForcingTerm::new(1, 1.0)]).unwrap();
    let cubic_bound = apriori_bound(&cubic);

    let ok = not_odd == Err("E_G_NOT_ODD")
        && status == Some(5)
        && matches!(cubic_bound, Err(SolveError::NoUsableMajorant { .. }));
    (
        ok,
        format!("even perturbation {not_odd:?}, corrupted verify exit {status:?}, cubic bound {cubic_bound:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "S and L are inverse on random odd polynomials",
            inverse_pair,
        ),
        ("||S f|| <= T^2/2 ||f||", norm_bound_holds),
        ("zero mean and derivative parity", mean_and_parity),
        (
            "pendulum: certified contraction, unique, matches shooting",
            pendulum_contraction,
        ),
        ("linear family matches closed form", linear_closed_form),
        (
            "tanh continuation bounded and cross-validated",
            tanh_continuation,
        ),
        ("period sweep flips certificate at sqrt(50)", period_sweep),
        ("RK4 is fourth order", rk4_order),
        ("invalid inputs are rejected", rejects_bad_input),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(v) => v,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {} {name} ({detail})",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
