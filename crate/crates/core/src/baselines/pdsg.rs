//! Primal-dual stochastic gradient on the augmented Lagrangian with an
//! adaptive diagonal metric.
//!
//! For a penalty `beta` the augmented term of constraint `i` is
//! `([z_i + beta f_i(x)]_+^2 - z_i^2) / (2 beta)`, so a sampled constraint
//! contributes `[z_i + beta f_i]_+ grad f_i` to `u` and
//! `max(f_i, -z_i / beta)` to `w`. The primal step uses
//!
//! ```text
//! gamma_t = max(1, ||u^t||)
//! v       = eta * sqrt(sum_{t<=k} (u^t / gamma_t)^2)
//! D       = diag(v) + I / alpha_k
//! x       = proj_X(x - D^{-1} u)
//! z       = z + rho_k w
//! ```
//!
//! Only problems with exactly evaluable constraints are supported.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::averager::ErgodicAverager;
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::{axpy, norm2};
use crate::oracle::BatchSizes;
use crate::problem::StochasticProgram;
use crate::rng::{seeded, SeededRng, Stream};
use crate::run::{as_divergence, check_divergence, Recorder, RunOutcome, RunSettings};
use crate::schedule::{StepSchedule, StepSizes};

use super::initial_point;

/// Default scale of the adaptive metric.
pub const DEFAULT_PDSG_ETA: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct PdsgAdpParams {
    /// Supplies `(alpha_k, rho_k)`.
    pub schedule: StepSchedule,
    pub eta_scale: f64,
    /// Augmented Lagrangian penalty `beta`.
    pub penalty: f64,
    pub x1: Option<Vec<f64>>,
}

impl PdsgAdpParams {
    pub fn new(schedule: StepSchedule) -> Self {
        Self {
            schedule,
            eta_scale: DEFAULT_PDSG_ETA,
            penalty: 1.0,
            x1: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_scale >= 0.0 && self.eta_scale.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "eta must be >= 0, got {}",
                self.eta_scale
            )));
        }
        if !(self.penalty > 0.0) {
            return Err(Error::InvalidParameter("penalty must be positive".into()));
        }
        Ok(())
    }
}

pub struct PdsgAdp<'p, P: StochasticProgram + ?Sized> {
    problem: &'p P,
    params: PdsgAdpParams,
    batches: BatchSizes,
    schedule: StepSchedule,
    rng: SeededRng,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    sum_sq: Vec<f64>,
    v: Vec<f64>,
    avg_x: ErgodicAverager,
}

impl<'p, P: StochasticProgram + ?Sized> PdsgAdp<'p, P> {
    pub fn new(problem: &'p P, params: &PdsgAdpParams, batches: BatchSizes, seed: u64) -> Result<Self> {
        params.validate()?;
        if !problem.deterministic_constraints() {
            return Err(Error::Unsupported(
                "augmented Lagrangian sampling needs exactly evaluable constraints",
            ));
        }
        let x = initial_point(&params.x1, problem.feasible_set())?;
        let n = x.len();
        let mut schedule = params.schedule.clone();
        schedule.reset();
        Ok(Self {
            problem,
            params: params.clone(),
            batches,
            schedule,
            rng: seeded(seed, Stream::Train),
            x,
            z: vec![0.0; problem.num_constraints()],
            sum_sq: vec![0.0; n],
            v: vec![0.0; n],
            avg_x: ErgodicAverager::new(n, 0.0),
        })
    }

    pub fn step(&mut self) -> Result<StepSizes> {
        let sizes = self.schedule.next_step()?;
        self.avg_x.push(&self.x, sizes.alpha);
        let n = self.x.len();
        let m = self.z.len();
        let beta = self.params.penalty;
        let rng = &mut self.rng as &mut dyn RngCore;

        let mut u = vec![0.0; n];
        self.problem.objective_batch(&self.x, self.batches.j0, rng, 1.0, &mut u)?;
        let mut cons = vec![0.0; n];
        let mut w = vec![0.0; m];
        let mut support = Vec::new();
        let z = &self.z;
        let scale = self.problem.constraint_batch(&self.x, self.batches.j1, rng, true, &mut |i, value, grad| {
            let coef = (z[i] + beta * value).max(0.0);
            if coef != 0.0 {
                axpy(coef, grad, &mut cons);
            }
            w[i] = value.max(-z[i] / beta);
            support.push(i);
        })?;
        axpy(scale, &cons, &mut u);

        let gamma = norm2(&u).max(1.0);
        for ((s, vi), ui) in self.sum_sq.iter_mut().zip(self.v.iter_mut()).zip(&u) {
            let g = ui / gamma;
            *s += g * g;
            *vi = self.params.eta_scale * libm::sqrt(*s);
        }
        let inv_alpha = 1.0 / sizes.alpha;
        for ((xi, ui), vi) in self.x.iter_mut().zip(&u).zip(&self.v) {
            *xi -= ui / (vi + inv_alpha);
        }
        self.problem.feasible_set().clamp_in_place(&mut self.x);
        for &i in &support {
            self.z[i] += sizes.rho * scale * w[i];
        }
        ensure_finite(&self.x, "primal iterate")?;
        ensure_finite(&self.z, "dual iterate")?;
        Ok(sizes)
    }

    /// The adaptive diagonal `v`.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn x_bar(&self) -> Option<Vec<f64>> {
        self.avg_x.finalize()
    }
}

pub fn pdsg_adp_run<P: StochasticProgram + ?Sized>(
    problem: &P,
    params: &PdsgAdpParams,
    batches: BatchSizes,
    seed: u64,
    settings: &RunSettings<'_>,
) -> RunOutcome {
    let horizon = params.schedule.horizon();
    let mut rec = Recorder::new(settings, problem, seed);
    if let Err(e) = settings.validate(horizon) {
        return Err(rec.fail(e));
    }
    let mut solver = match PdsgAdp::new(problem, params, batches, seed) {
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
