//! Greedy stagewise boosting with early stopping.
//!
//! The crate fits additive models over one-dimensional signed stumps by
//! greedy minimization of a convex margin loss with restricted step sizes,
//! evaluates the accompanying numerical and statistical convergence bounds,
//! and runs the synthetic triangle-wave experiments with exact risk
//! integration.

// `!(v >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod boost;
pub mod bounds;
pub mod config;
pub mod error;
pub mod experiment;
mod line;
pub mod loss;
pub mod margin;
pub mod rademacher;
pub mod rng;
pub mod stopping;
pub mod synth;

pub use basis::{candidate_thresholds, stump_eval, Sign, SignedStump};
pub use boost::{
    energy_ledger, ensemble_predict, exact_line_search, fit, greedy_step, run_boost, BoostConfig,
    Booster, Ensemble, Fit, RunTrace, Step, StepSchedule, Term, TraceRow,
};
pub use error::{Error, Result};
pub use loss::{
    auxiliary_psi, curvature_bound, lipschitz_bound, loss_derivative, loss_value, LossSpec,
};
pub use synth::{
    bayes_error, sample, target_probability, true_class_error, true_excess_convex, Dataset,
    TargetModel, BAYES_ERROR,
};
