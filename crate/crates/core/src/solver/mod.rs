//! The adaptive primal-dual solvers.

mod apriad;
mod aprid;

pub use apriad::{apriad_run, apriad_step, Apriad, MinimaxState};
pub use aprid::{aprid_run, aprid_step, Aprid, DualState, PrimalState};

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::schedule::{DualRule, StepSchedule};

/// Tunables shared by both adaptive solvers.
#[derive(Debug, Clone)]
pub struct SolverParams {
    pub beta1: f64,
    pub beta2: f64,
    /// Clipping radius for the second-moment input.
    pub theta: f64,
    pub schedule: StepSchedule,
    /// Starting point; defaults to the projection of the origin onto `X`.
    pub x1: Option<Vec<f64>>,
    /// Starting multipliers; defaults to zero (or the projection of the
    /// origin onto `Z` for minimax problems).
    pub z1: Option<Vec<f64>>,
}

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.99;
pub const DEFAULT_THETA: f64 = 10.0;

impl SolverParams {
    /// `beta1 = 0.9`, `beta2 = 0.99`, `theta = 10`.
    pub fn new(schedule: StepSchedule) -> Self {
        Self {
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            theta: DEFAULT_THETA,
            schedule,
            x1: None,
            z1: None,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |b: f64| b > 0.0 && b < 1.0;
        if !in_unit(self.beta1) || !in_unit(self.beta2) {
            return Err(Error::InvalidParameter(format!(
                "beta1, beta2 must lie in (0,1), got ({}, {})",
                self.beta1, self.beta2
            )));
        }
        if !(self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {}", self.theta)));
        }
        if self.schedule.rule() == DualRule::Recursion && self.schedule.beta1() != self.beta1 {
            return Err(Error::InvalidParameter(
                "schedule beta1 differs from the solver beta1".into(),
            ));
        }
        Ok(())
    }
}
