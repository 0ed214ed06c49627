//! Odd periodic solutions of `u'' + g(u) = k(t)`.
//!
//! The solver works entirely inside the space of continuous, odd, `T`-periodic
//! functions. There every function has zero mean, the second derivative is
//! injective, and the fixed-point map `u = S(k - g(u))` is well posed with
//! `S` the inverse of `d²/dt²`. Functions are stored as truncated sine series,
//! so membership in the space is structural.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! parsing and the command-line front end live in the `oddsol` crate.

#![no_std]

extern crate alloc;

pub mod funcspace;
pub mod operators;
pub mod oracle;
pub mod problems;
pub mod solver;

mod grid;

pub use funcspace::{EvenPeriodicFunction, FuncSpaceError, OddPeriodicFunction, PeriodicFunction};
pub use operators::{apply_l, apply_n, apply_s, norm_bound, OperatorError, OperatorNormBound};
pub use oracle::{
    cross_validate, integrate_ivp, residual, shoot, CrossValidation, OracleError, ShootingOptions,
    ShootingResult, Trajectory,
};
pub use problems::{builtin, Family, ForcingTerm, Majorant, Nonlinearity, Problem, ProblemError};
pub use solver::{
    apriori_bound, certify, solve_continuation, solve_picard, uniqueness_probe,
    ContinuationOptions, ContractionCertificate, PicardOptions, Regime, SolveError, SolveReport,
    UniquenessProbe,
};

/// Default truncation order of the sine series.
pub const DEFAULT_MODES: usize = 256;
