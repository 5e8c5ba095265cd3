//! Primal/dual step-size schedules.
//!
//! A [`StepSchedule`] is a finite state machine over `k = 1..=K` producing the
//! pair `(alpha_k, rho_k)`. The primal sequence comes from the schedule kind;
//! the dual sequence either follows `alpha_k` proportionally or is driven by
//! the momentum-aware recursion
//!
//! ```text
//! eta_k = (eta_{k-1} - alpha_{k-1}) / beta1
//! rho_k = rho_{k-1} / (beta1 + alpha_{k-1} / eta_k)
//! ```
//!
//! whose seed `eta_1` is `alpha_1 / (1 - beta1)` for constant steps and the
//! finite sum `sum_{i=1}^K alpha_i beta1^{i-1}` otherwise.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// `alpha_k = alpha / sqrt(K)`.
    Constant,
    /// `alpha_k = alpha / (sqrt(k+1) * ln(k+1))`.
    VaryingSqrtLog,
    /// `alpha_k = alpha / sqrt(k+1)`.
    VaryingSqrt,
    /// A caller-supplied positive, non-increasing sequence of length `K`.
    Explicit(Vec<f64>),
}

/// How the dual step `rho_k` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualRule {
    /// The eta/rho recursion used by the adaptive primal-dual method.
    Recursion,
    /// `rho_k = rho_1 * alpha_k / alpha_1`.
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub alpha: f64,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct StepSchedule {
    kind: ScheduleKind,
    alpha: f64,
    rho1: f64,
    horizon: usize,
    beta1: f64,
    rule: DualRule,
    // cursor
    next_index: usize,
    alpha_prev: f64,
    eta_current: f64,
    rho_current: f64,
    // tails[k-1] = sum_{i=k}^K alpha_i beta1^{i-k}; empty for constant steps
    tails: Vec<f64>,
}

impl StepSchedule {
    /// Builds a schedule.
    ///
    /// `alpha` and `rho` are scales: `rho_1 = rho * alpha_1 / alpha`, so a
    /// constant schedule gives `(alpha, rho) / sqrt(K)`. For
    /// [`ScheduleKind::Explicit`] `alpha` is ignored and `rho_1 = rho`.
    pub fn new(
        kind: ScheduleKind,
        alpha: f64,
        rho: f64,
        horizon: usize,
        beta1: f64,
        rule: DualRule,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("schedule horizon must be >= 1".into()));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        if rule == DualRule::Recursion && !(beta1 > 0.0 && beta1 < 1.0) {
            return Err(Error::InvalidParameter(format!("beta1 must lie in (0,1), got {beta1}")));
        }
        match &kind {
            ScheduleKind::Explicit(seq) => {
                if seq.len() != horizon {
                    return Err(Error::InvalidParameter(format!(
                        "explicit schedule has {} entries for horizon {horizon}",
                        seq.len()
                    )));
                }
                if seq.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return Err(Error::InvalidParameter("explicit steps must be positive".into()));
                }
                if seq.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidParameter(
                        "explicit steps must be non-increasing".into(),
                    ));
                }
            }
            _ => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must be positive, got {alpha}"
                    )));
                }
            }
        }

        let mut s = Self {
            kind,
            alpha,
            rho1: 0.0,
            horizon,
            beta1,
            rule,
            next_index: 1,
            alpha_prev: 0.0,
            eta_current: 0.0,
            rho_current: 0.0,
            tails: Vec::new(),
        };
        let a1 = s.alpha_at(1);
        s.rho1 = match s.kind {
            ScheduleKind::Explicit(_) => rho,
            _ => rho * a1 / alpha,
        };
        if rule == DualRule::Recursion {
            if s.kind == ScheduleKind::Constant {
                s.eta_current = a1 / (1.0 - beta1);
            } else {
                let mut tails = alloc::vec![0.0; horizon];
                let mut acc = 0.0;
                for k in (1..=horizon).rev() {
                    acc = s.alpha_at(k) + beta1 * acc;
                    tails[k - 1] = acc;
                }
                s.eta_current = tails[0];
                s.tails = tails;
            }
        }
        Ok(s)
    }

    /// Constant steps `(alpha, rho) / sqrt(K)` with the dual recursion.
    pub fn constant(alpha: f64, rho: f64, horizon: usize, beta1: f64) -> Result<Self> {
        Self::new(ScheduleKind::Constant, alpha, rho, horizon, beta1, DualRule::Recursion)
    }

    /// Primal step at 1-based index `k` (no horizon check).
    pub fn alpha_at(&self, k: usize) -> f64 {
        let kf = k as f64;
        match &self.kind {
            ScheduleKind::Constant => self.alpha / libm::sqrt(self.horizon as f64),
            ScheduleKind::VaryingSqrtLog => {
                self.alpha / (libm::sqrt(kf + 1.0) * libm::log(kf + 1.0))
            }
            ScheduleKind::VaryingSqrt => self.alpha / libm::sqrt(kf + 1.0),
            ScheduleKind::Explicit(seq) => seq[k - 1],
        }
    }

    /// Produces `(alpha_k, rho_k)` for the next index and advances the cursor.
    pub fn next_step(&mut self) -> Result<StepSizes> {
        let k = self.next_index;
        if k > self.horizon {
            return Err(Error::HorizonExceeded {
                step: k,
                horizon: self.horizon,
            });
        }
        let alpha_k = self.alpha_at(k);
        let rho_k = if k == 1 {
            self.rho1
        } else {
            match self.rule {
                DualRule::Proportional => self.rho1 * alpha_k / self.alpha_at(1),
                DualRule::Recursion => {
                    if self.kind == ScheduleKind::Constant {
                        // eta and rho are fixed points of the recursion here
                        self.rho1
                    } else {
                        let eta_k = self.tails[k - 1];
                        if !(eta_k > 0.0) {
                            return Err(Error::NonPositiveEta { step: k, eta: eta_k });
                        }
                        self.eta_current = eta_k;
                        self.rho_current / (self.beta1 + self.alpha_prev / eta_k)
                    }
                }
            }
        };
        self.alpha_prev = alpha_k;
        self.rho_current = rho_k;
        self.next_index += 1;
        Ok(StepSizes {
            alpha: alpha_k,
            rho: rho_k,
        })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn rule(&self) -> DualRule {
        self.rule
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    /// Index of the step most recently produced (0 before the first call).
    pub fn step_index(&self) -> usize {
        self.next_index - 1
    }

    /// Current `eta_k` (recursion rule only; 0 otherwise).
    pub fn eta(&self) -> f64 {
        self.eta_current
    }

    /// The whole primal sequence `alpha_1..alpha_K`.
    pub fn alphas(&self) -> Vec<f64> {
        (1..=self.horizon).map(|k| self.alpha_at(k)).collect()
    }

    /// Restarts the cursor at `k = 1`.
    pub fn reset(&mut self) {
        self.next_index = 1;
        self.alpha_prev = 0.0;
        self.rho_current = 0.0;
        if self.rule == DualRule::Recursion {
            self.eta_current = if self.kind == ScheduleKind::Constant {
                self.alpha_at(1) / (1.0 - self.beta1)
            } else {
                self.tails[0]
            };
        }
    }
}
