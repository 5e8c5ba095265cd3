//! Adaptive primal-dual stochastic gradient methods for convex programs with
//! expectation constraints and for convex-concave minimax problems, together
//! with baseline methods, benchmark problems and reference solvers.
//!
//! The crate is `no_std` with `alloc`. Time is supplied by the caller through
//! [`run::Clock`].

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod averager;
pub mod baselines;
pub mod boxset;
pub mod clip;
pub mod error;
pub mod linalg;
pub mod logistic;
pub mod oracle;
pub mod problem;
pub mod problems;
pub mod reference;
pub mod rng;
pub mod run;
pub mod schedule;
pub mod solver;

pub use averager::ErgodicAverager;
pub use boxset::{project_box_weighted, BoxSet};
pub use clip::clip_gradient;
pub use error::{Error, Result};
pub use oracle::{
    estimate_constraint_value, sample_lagrangian_subgradient, sample_minimax_subgradient, BatchSizes, GradSample,
};
pub use problem::{evaluate, evaluate_full, DeterministicProgram, Evaluation, MinimaxProblem, StochasticProgram};
pub use run::{log_spaced_checkpoints, Clock, NoClock, RunFailure, RunOutcome, RunRecord, RunResult, RunSettings};
pub use schedule::{DualRule, ScheduleKind, StepSchedule, StepSizes};
pub use solver::{apriad_run, apriad_step, aprid_run, aprid_step, SolverParams};
