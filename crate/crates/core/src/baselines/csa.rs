//! Cooperative stochastic approximation.
//!
//! Each iteration estimates `g(x) = sum_i [f_i(x)]_+`. When the estimate is
//! within the tolerance the iterate moves along a stochastic objective
//! subgradient, otherwise along a stochastic subgradient of `g`. Two outputs
//! are kept: CSA1 averages only the iterates that passed the test, CSA2
//! averages all of them; both use `gamma_k` weights.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::averager::ErgodicAverager;
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::axpy;
use crate::oracle::{estimate_constraint_value, BatchSizes};
use crate::problem::{DeterministicProgram, StochasticProgram};
use crate::rng::{seeded, SeededRng, Stream};
use crate::run::{as_divergence, check_divergence, Recorder, RunOutcome, RunSettings};
use crate::schedule::StepSchedule;

use super::initial_point;

/// Default tolerance on the constraint estimate.
pub const DEFAULT_CSA_TOLERANCE: f64 = 0.04;

#[derive(Debug, Clone)]
pub struct CsaParams {
    /// Supplies `gamma_k` as its primal sequence.
    pub schedule: StepSchedule,
    pub eta_tol: f64,
    /// First iteration included in the averages.
    pub s: usize,
    pub x1: Option<Vec<f64>>,
}

impl CsaParams {
    pub fn new(schedule: StepSchedule) -> Self {
        Self {
            schedule,
            eta_tol: DEFAULT_CSA_TOLERANCE,
            s: 1,
            x1: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_tol > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "CSA tolerance must be positive, got {}",
                self.eta_tol
            )));
        }
        if self.s == 0 || self.s > self.schedule.horizon() {
            return Err(Error::InvalidParameter("CSA start index must lie in [1, K]".into()));
        }
        Ok(())
    }
}

pub struct Csa<'p, P: StochasticProgram + ?Sized> {
    problem: &'p P,
    params: CsaParams,
    batches: BatchSizes,
    schedule: StepSchedule,
    rng: SeededRng,
    pub x: Vec<f64>,
    avg_all: ErgodicAverager,
    avg_passed: ErgodicAverager,
    estimates: Vec<f64>,
}

impl<'p, P: StochasticProgram + ?Sized> Csa<'p, P> {
    pub fn new(problem: &'p P, params: &CsaParams, batches: BatchSizes, seed: u64) -> Result<Self> {
        params.validate()?;
        let x = initial_point(&params.x1, problem.feasible_set())?;
        let mut schedule = params.schedule.clone();
        schedule.reset();
        let n = x.len();
        Ok(Self {
            problem,
            params: params.clone(),
            batches,
            schedule,
            rng: seeded(seed, Stream::Train),
            x,
            avg_all: ErgodicAverager::new(n, 0.0),
            avg_passed: ErgodicAverager::new(n, 0.0),
            estimates: Vec::new(),
        })
    }

    /// One iteration; returns whether it was an objective step.
    pub fn step(&mut self) -> Result<bool> {
        let gamma = self.schedule.next_step()?.alpha;
        let k = self.schedule.step_index();
        let rng = &mut self.rng as &mut dyn RngCore;
        let g_hat = estimate_constraint_value(self.problem, &self.x, self.batches.jg, rng)?;
        self.estimates.push(g_hat);
        let passed = g_hat <= self.params.eta_tol;
        if k >= self.params.s {
            self.avg_all.push(&self.x, gamma);
            if passed {
                self.avg_passed.push(&self.x, gamma);
            }
        }
        let n = self.x.len();
        let mut dir = vec![0.0; n];
        if passed {
            self.problem.objective_batch(&self.x, self.batches.j0, rng, 1.0, &mut dir)?;
        } else {
            let single = self.problem.num_constraints() == 1;
            let scale = self.problem.constraint_batch(&self.x, self.batches.j1, rng, true, &mut |_, value, grad| {
                // a single constraint has g = f_1 on the region where this
                // step is taken
                if single || value > 0.0 {
                    axpy(1.0, grad, &mut dir);
                }
            })?;
            dir.iter_mut().for_each(|d| *d *= scale);
        }
        axpy(-gamma, &dir, &mut self.x);
        self.problem.feasible_set().clamp_in_place(&mut self.x);
        ensure_finite(&self.x, "primal iterate")?;
        Ok(passed)
    }

    /// Average over the iterates that passed the tolerance test.
    pub fn x_bar_passed(&self) -> Option<Vec<f64>> {
        self.avg_passed.finalize()
    }

    /// Average over all iterates from index `s` on.
    pub fn x_bar_all(&self) -> Option<Vec<f64>> {
        self.avg_all.finalize()
    }

    /// `G_hat_k` for every iteration so far.
    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }
}

/// Both CSA outputs of one run plus the per-iteration constraint estimates,
/// from which the passed set `{k : G_hat_k <= eta}` can be re-derived.
#[derive(Debug, Clone)]
pub struct CsaRuns {
    pub csa1: RunOutcome,
    pub csa2: RunOutcome,
    pub estimates: Vec<f64>,
}

pub fn csa_run<P: StochasticProgram + ?Sized>(
    problem: &P,
    params: &CsaParams,
    batches: BatchSizes,
    seed: u64,
    settings: &RunSettings<'_>,
) -> CsaRuns {
    let program: Box<dyn DeterministicProgram + '_> = match settings.evaluator {
        Some(e) => Box::new(e),
        None => problem.evaluation_program(settings.eval_seed),
    };
    let mut rec1 = Recorder::with_program(settings, Some(Box::new(&*program)), seed);
    let mut rec2 = Recorder::with_program(settings, Some(Box::new(&*program)), seed);
    let horizon = params.schedule.horizon();
    let fail_both = |rec1: Recorder<'_>, rec2: Recorder<'_>, e: Error, estimates: Vec<f64>| CsaRuns {
        csa1: Err(rec1.fail(e.clone())),
        csa2: Err(rec2.fail(e)),
        estimates,
    };
    if let Err(e) = settings.validate(horizon) {
        return fail_both(rec1, rec2, e, Vec::new());
    }
    let mut solver = match Csa::new(problem, params, batches, seed) {
        Ok(s) => s,
        Err(e) => return fail_both(rec1, rec2, e, Vec::new()),
    };
    for k in 1..=horizon {
        if let Err(e) = solver
            .step()
            .and_then(|_| check_divergence(k, &solver.x, &[], settings.dual_cap))
        {
            let estimates = solver.estimates.clone();
            return fail_both(rec1, rec2, as_divergence(k, e), estimates);
        }
        if rec1.is_checkpoint(k) {
            let t0 = settings.clock.now();
            rec1.record(k, solver.x_bar_passed().as_deref());
            let t1 = settings.clock.now();
            rec2.record(k, solver.x_bar_all().as_deref());
            let t2 = settings.clock.now();
            rec1.exclude_time(t2 - t1);
            rec2.exclude_time(t1 - t0);
        }
    }
    CsaRuns {
        csa1: Ok(rec1.finish()),
        csa2: Ok(rec2.finish()),
        estimates: solver.estimates,
    }
}
