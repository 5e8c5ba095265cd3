//! Saddle-point stochastic approximation: projected stochastic descent in
//! `x` and ascent in `z` over the box `[0, z_cap]^M`, with
//! `alpha`-weighted averaging.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::averager::ErgodicAverager;
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::axpy;
use crate::oracle::{sample_lagrangian_subgradient, BatchSizes};
use crate::problem::StochasticProgram;
use crate::rng::{seeded, SeededRng, Stream};
use crate::run::{as_divergence, check_divergence, Recorder, RunOutcome, RunSettings};
use crate::schedule::{StepSchedule, StepSizes};

use super::initial_point;

/// Default upper bound of the dual box.
pub const DEFAULT_Z_CAP: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct MsaParams {
    /// Supplies `(alpha_k, rho_k)`.
    pub schedule: StepSchedule,
    pub z_cap: f64,
    pub x1: Option<Vec<f64>>,
}

impl MsaParams {
    pub fn new(schedule: StepSchedule) -> Self {
        Self {
            schedule,
            z_cap: DEFAULT_Z_CAP,
            x1: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_cap > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "z_cap must be positive, got {}",
                self.z_cap
            )));
        }
        Ok(())
    }
}

pub struct Msa<'p, P: StochasticProgram + ?Sized> {
    problem: &'p P,
    z_cap: f64,
    batches: BatchSizes,
    schedule: StepSchedule,
    rng: SeededRng,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    avg_x: ErgodicAverager,
}

impl<'p, P: StochasticProgram + ?Sized> Msa<'p, P> {
    pub fn new(problem: &'p P, params: &MsaParams, batches: BatchSizes, seed: u64) -> Result<Self> {
        params.validate()?;
        let x = initial_point(&params.x1, problem.feasible_set())?;
        let mut schedule = params.schedule.clone();
        schedule.reset();
        Ok(Self {
            problem,
            z_cap: params.z_cap,
            batches,
            schedule,
            rng: seeded(seed, Stream::Train),
            avg_x: ErgodicAverager::new(x.len(), 0.0),
            x,
            z: vec![0.0; problem.num_constraints()],
        })
    }

    pub fn step(&mut self) -> Result<StepSizes> {
        let sizes = self.schedule.next_step()?;
        self.avg_x.push(&self.x, sizes.alpha);
        let sample = sample_lagrangian_subgradient(
            self.problem,
            &self.x,
            &self.z,
            self.batches,
            &mut self.rng as &mut dyn RngCore,
        )?;
        axpy(-sizes.alpha, &sample.u, &mut self.x);
        self.problem.feasible_set().clamp_in_place(&mut self.x);
        let cap = self.z_cap;
        let mut update = |i: usize| {
            self.z[i] = (self.z[i] + sizes.rho * sample.w[i]).clamp(0.0, cap);
        };
        match &sample.w_support {
            Some(support) => support.iter().for_each(|&i| update(i)),
            None => (0..sample.w.len()).for_each(update),
        }
        ensure_finite(&self.x, "primal iterate")?;
        ensure_finite(&self.z, "dual iterate")?;
        Ok(sizes)
    }

    pub fn x_bar(&self) -> Option<Vec<f64>> {
        self.avg_x.finalize()
    }
}

pub fn msa_run<P: StochasticProgram + ?Sized>(
    problem: &P,
    params: &MsaParams,
    batches: BatchSizes,
    seed: u64,
    settings: &RunSettings<'_>,
) -> RunOutcome {
    let horizon = params.schedule.horizon();
    let mut rec = Recorder::new(settings, problem, seed);
    if let Err(e) = settings.validate(horizon) {
        return Err(rec.fail(e));
    }
    let mut solver = match Msa::new(problem, params, batches, seed) {
        Ok(s) => s,
        Err(e) => return Err(rec.fail(e)),
    };
    for k in 1..=horizon {
        if let Err(e) = solver
            .step()
            .and_then(|_| check_divergence(k, &solver.x, &solver.z, settings.dual_cap))
        {
            return Err(rec.fail(as_divergence(k, e)));
        }
        if rec.is_checkpoint(k) {
            rec.record(k, solver.x_bar().as_deref());
        }
    }
    Ok(rec.finish())
}
