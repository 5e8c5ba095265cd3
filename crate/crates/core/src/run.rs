//! Run bookkeeping shared by every solver: checkpoint schedules, metric
//! records, wall-clock accounting and failure reporting.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::problem::{evaluate, DeterministicProgram, StochasticProgram};

/// Monotone time source in seconds. The core crate has no clock of its own;
/// callers with `std` supply one.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Metrics at one checkpoint, computed on the running ergodic averages.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub iter: usize,
    pub wall_seconds: f64,
    /// Objective at the averaged iterate (`L(x_bar, z_bar)` for minimax runs).
    pub objective: f64,
    /// `|f0(x_bar) - f0(x_opt)|`, NaN without a reference. Minimax runs store
    /// the primal-dual gap here.
    pub obj_err: f64,
    pub viol_avg: f64,
    pub viol_max: f64,
    pub gap: Option<f64>,
    /// CSA1 only: no iterate has passed the tolerance test yet.
    pub csa1_absent: bool,
    /// The averaged iterate lies on the boundary of the feasible box.
    pub box_active: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunResult {
    pub records: Vec<RunRecord>,
    pub config_digest: String,
    pub seed: u64,
}

impl RunResult {
    pub fn last(&self) -> Option<&RunRecord> {
        self.records.last()
    }

    /// Re-derives `obj_err` from the stored objectives for a new reference.
    pub fn rebase_objective(&mut self, reference: f64) {
        for r in &mut self.records {
            if r.gap.is_none() && !r.csa1_absent {
                r.obj_err = libm::fabs(r.objective - reference);
            }
        }
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub error: Error,
    pub partial: RunResult,
}

impl core::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} (after {} checkpoints)", self.error, self.partial.records.len())
    }
}

pub type RunOutcome = core::result::Result<RunResult, RunFailure>;

/// Default number of checkpoints per run.
pub const DEFAULT_CHECKPOINTS: usize = 50;

/// Default divergence guard on `||z||`.
pub const DEFAULT_DUAL_CAP: f64 = 1e8;

/// `count` roughly log-spaced distinct iterations in `[1, horizon]`, always
/// including both ends.
pub fn log_spaced_checkpoints(horizon: usize, count: usize) -> Vec<usize> {
    if horizon == 0 || count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return alloc::vec![horizon];
    }
    let lk = libm::log(horizon as f64);
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (libm::round(libm::exp(lk * t)) as usize).clamp(1, horizon)
        })
        .collect();
    out.push(horizon);
    out.sort_unstable();
    out.dedup();
    out
}

/// Everything a run needs besides the problem and its parameters.
pub struct RunSettings<'a> {
    /// Iterations (1-based) at which metrics are recorded.
    pub checkpoints: Vec<usize>,
    /// `f0(x_opt)` for objective errors.
    pub reference_objective: Option<f64>,
    /// Program used for metrics; defaults to the problem's own evaluation
    /// program for `eval_seed`.
    pub evaluator: Option<&'a dyn DeterministicProgram>,
    pub eval_seed: u64,
    /// Count checkpoint evaluation cost in the reported wall time.
    pub include_eval_time: bool,
    pub clock: &'a dyn Clock,
    /// Abort when `||z||` exceeds this.
    pub dual_cap: f64,
}

impl<'a> RunSettings<'a> {
    pub fn new(checkpoints: Vec<usize>) -> Self {
        Self {
            checkpoints,
            reference_objective: None,
            evaluator: None,
            eval_seed: 0,
            include_eval_time: false,
            clock: &NoClock,
            dual_cap: DEFAULT_DUAL_CAP,
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.checkpoints.iter().any(|&c| c == 0 || c > horizon) {
            return Err(Error::InvalidParameter(alloc::format!(
                "checkpoints must lie in [1, {horizon}]"
            )));
        }
        if self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("checkpoints must be strictly increasing".into()));
        }
        if !(self.dual_cap > 0.0) {
            return Err(Error::InvalidParameter("dual cap must be positive".into()));
        }
        Ok(())
    }
}

/// Tracks time and writes checkpoint records.
pub(crate) struct Recorder<'a> {
    settings: &'a RunSettings<'a>,
    program: Option<Box<dyn DeterministicProgram + 'a>>,
    next: usize,
    start: f64,
    eval_time: f64,
    pub(crate) result: RunResult,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new<P: StochasticProgram + ?Sized>(settings: &'a RunSettings<'a>, problem: &'a P, seed: u64) -> Self {
        let program: Box<dyn DeterministicProgram + 'a> = match settings.evaluator {
            Some(e) => Box::new(e),
            None => problem.evaluation_program(settings.eval_seed),
        };
        Self::with_program(settings, Some(program), seed)
    }

    pub(crate) fn without_program(settings: &'a RunSettings<'a>, seed: u64) -> Self {
        Self::with_program(settings, None, seed)
    }

    pub(crate) fn with_program(settings: &'a RunSettings<'a>, program: Option<Box<dyn DeterministicProgram + 'a>>, seed: u64) -> Self {
        let start = settings.clock.now();
        Self {
            settings,
            program,
            next: 0,
            start,
            eval_time: 0.0,
            result: RunResult {
                records: Vec::new(),
                config_digest: String::new(),
                seed,
            },
        }
    }

    pub(crate) fn is_checkpoint(&self, k: usize) -> bool {
        self.settings.checkpoints.get(self.next) == Some(&k)
    }

    fn elapsed(&self) -> f64 {
        let raw = self.settings.clock.now() - self.start;
        if self.settings.include_eval_time {
            raw
        } else {
            raw - self.eval_time
        }
    }

    /// Evaluates `x_bar` (or marks the record absent) at iteration `k`.
    pub(crate) fn record(&mut self, k: usize, x_bar: Option<&[f64]>) {
        let wall = self.elapsed();
        let t0 = self.settings.clock.now();
        let record = match (x_bar, self.program.as_deref()) {
            (Some(x), Some(program)) => {
                let ev = evaluate(program, x);
                RunRecord {
                    iter: k,
                    wall_seconds: wall,
                    objective: ev.f0,
                    obj_err: self
                        .settings
                        .reference_objective
                        .map_or(f64::NAN, |r| libm::fabs(ev.f0 - r)),
                    viol_avg: ev.viol_avg,
                    viol_max: ev.viol_max,
                    gap: None,
                    csa1_absent: false,
                    box_active: program.feasible_set().touches_boundary(x),
                }
            }
            _ => RunRecord {
                iter: k,
                wall_seconds: wall,
                objective: f64::NAN,
                obj_err: f64::NAN,
                viol_avg: f64::NAN,
                viol_max: f64::NAN,
                gap: None,
                csa1_absent: true,
                box_active: false,
            },
        };
        self.eval_time += self.settings.clock.now() - t0;
        self.result.records.push(record);
        self.next += 1;
    }

    /// Records a minimax checkpoint from precomputed value and gap.
    pub(crate) fn record_minimax(&mut self, k: usize, value_and_gap: impl FnOnce() -> Result<(f64, f64, bool)>) -> Result<()> {
        let wall = self.elapsed();
        let t0 = self.settings.clock.now();
        let (value, gap, box_active) = value_and_gap()?;
        self.eval_time += self.settings.clock.now() - t0;
        self.result.records.push(RunRecord {
            iter: k,
            wall_seconds: wall,
            objective: value,
            obj_err: gap,
            viol_avg: 0.0,
            viol_max: 0.0,
            gap: Some(gap),
            csa1_absent: false,
            box_active,
        });
        self.next += 1;
        Ok(())
    }

    /// Removes `seconds` of foreign evaluation work from this run's clock.
    pub(crate) fn exclude_time(&mut self, seconds: f64) {
        self.eval_time += seconds;
    }

    pub(crate) fn fail(self, error: Error) -> RunFailure {
        RunFailure {
            error,
            partial: self.result,
        }
    }

    pub(crate) fn finish(self) -> RunResult {
        self.result
    }
}

/// Maps a non-finite-state error at iteration `k` to a divergence report.
pub(crate) fn as_divergence(k: usize, e: Error) -> Error {
    match e {
        Error::NonFinite { context } => Error::Divergence {
            iteration: k,
            reason: alloc::format!("non-finite {context}"),
        },
        other => other,
    }
}

/// Guards against non-finite iterates and runaway multipliers.
pub(crate) fn check_divergence(k: usize, x: &[f64], z: &[f64], dual_cap: f64) -> Result<()> {
    if x.iter().chain(z).any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            iteration: k,
            reason: "non-finite iterate".into(),
        });
    }
    let zn = crate::linalg::norm2(z);
    if zn > dual_cap {
        return Err(Error::Divergence {
            iteration: k,
            reason: alloc::format!("||z|| = {zn:e} exceeds cap {dual_cap:e}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spacing_covers_ends() {
        let c = log_spaced_checkpoints(10_000, 50);
        assert_eq!(c.first(), Some(&1));
        assert_eq!(c.last(), Some(&10_000));
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c.len() <= 50 && c.len() > 30);
        assert_eq!(log_spaced_checkpoints(3, 50), alloc::vec![1, 2, 3]);
    }

    #[test]
    fn settings_reject_out_of_range_checkpoints() {
        assert!(RunSettings::new(alloc::vec![0, 5]).validate(10).is_err());
        assert!(RunSettings::new(alloc::vec![5, 11]).validate(10).is_err());
        assert!(RunSettings::new(alloc::vec![5, 5]).validate(10).is_err());
        assert!(RunSettings::new(alloc::vec![1, 10]).validate(10).is_ok());
    }
}
