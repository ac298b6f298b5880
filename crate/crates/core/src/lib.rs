//! Front propagation in coupled one-dimensional KPP layers with drift.
//!
//! The crate simulates the layered system on a moving window, measures the
//! bulk burning rate along the run, and checks the measurements against the
//! rigorous lower bounds and functional inequalities known for the model.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod inequality;
pub mod model;
pub mod report;
pub mod solver;
pub mod spreading;
pub mod tridiag;

pub use bounds::{
    bound_multi_layer, bound_two_layer, bound_universal, check_bounds, kernel_g, kernel_h, BoundConstants,
    BoundKind, BoundReport,
};
pub use diagnostics::{
    burning_rate_reaction, burning_rate_timederiv, check_envelope, front_position, time_average, BurnTrace,
    TraceRecorder,
};
pub use error::{Error, Result};
pub use experiment::{
    fit_slope, fit_slopes, run_experiment, run_single, ExperimentConfig, RunOutput, SlopeFit, SweepRow,
};
pub use inequality::{
    extremal_profile, fineq_product, fineq_selftest, l1_coupling_bound, random_admissible_pair,
    random_admissible_profile, Profile, SelftestReport,
};
pub use model::{
    balance_drifts, decay_speed_bound, make_front_initial_data, validate_system, DecayEnvelope, FrontState,
    LayerSystem, Violation, Window,
};
pub use solver::{recenter, run, step, Solver, SolverConfig, StepReport};
