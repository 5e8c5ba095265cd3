//! Adaptive primal-dual stochastic gradient method for
//! `min f0(x) s.t. f(x) <= 0, x in X`.
//!
//! Per iteration, with `(u, w)` an unbiased Lagrangian subgradient draw:
//!
//! ```text
//! m     = beta1 m + (1 - beta1) u
//! u_hat = u / max(1, ||u|| / theta)
//! v     = beta2 v + (1 - beta2) u_hat^2
//! v_hat = max(v_hat, v)
//! x     = proj_{X, v_hat^{1/2}}(x - alpha_k m / v_hat^{1/2})
//! z     = [z + rho_k w]_+
//! ```
//!
//! The primal step is AMSGrad-like with clipping inside the second moment
//! only; the dual step is plain projected ascent whose step `rho_k` follows
//! the schedule's dual recursion.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::averager::ErgodicAverager;
use crate::boxset::BoxSet;
use crate::clip::clip_gradient;
use crate::error::{ensure_dim, ensure_finite, Error, Result};
use crate::linalg::norm2;
use crate::oracle::{sample_lagrangian_subgradient, BatchSizes, GradSample};
use crate::problem::StochasticProgram;
use crate::rng::{seeded, SeededRng, Stream};
use crate::run::{as_divergence, check_divergence, Recorder, RunOutcome, RunSettings};
use crate::schedule::{StepSchedule, StepSizes};

use super::SolverParams;

/// Primal iterate and moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalState {
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub v_hat: Vec<f64>,
}

impl PrimalState {
    pub fn new(x: Vec<f64>) -> Self {
        let n = x.len();
        Self {
            x,
            m: vec![0.0; n],
            v: vec![0.0; n],
            v_hat: vec![0.0; n],
        }
    }
}

/// Nonnegative multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub z: Vec<f64>,
}

/// Adaptive moment update shared with the minimax variant: returns the new
/// iterate `proj(x -/+ step * m / v_hat^{1/2})` for one block, updating the
/// moments in place. `sign` is -1 for descent and +1 for ascent.
#[allow(clippy::too_many_arguments)]
pub(crate) fn adaptive_block_update(
    x: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    v_hat: &mut [f64],
    g: &[f64],
    step: f64,
    sign: f64,
    beta1: f64,
    beta2: f64,
    theta: f64,
    set: &BoxSet,
) -> Result<()> {
    for (mi, gi) in m.iter_mut().zip(g) {
        *mi = beta1 * *mi + (1.0 - beta1) * gi;
    }
    let g_hat = clip_gradient(g, theta)?;
    for ((vi, vh), gh) in v.iter_mut().zip(v_hat.iter_mut()).zip(&g_hat) {
        *vi = beta2 * *vi + (1.0 - beta2) * gh * gh;
        if *vi > *vh {
            *vh = *vi;
        }
    }
    for ((xi, mi), vh) in x.iter_mut().zip(m.iter()).zip(v_hat.iter()) {
        // 0/0 = 0: an untouched coordinate does not move
        if *vh > 0.0 {
            *xi += sign * step * mi / libm::sqrt(*vh);
        }
    }
    // the weighted projection onto a box is the coordinate clamp for any
    // nonnegative diagonal weight
    set.clamp_in_place(x);
    Ok(())
}

/// One APriD update of `(pstate, dstate)` from the draw `sample`.
pub fn aprid_step(
    pstate: &mut PrimalState,
    dstate: &mut DualState,
    sample: &GradSample,
    alpha_k: f64,
    rho_k: f64,
    params: &SolverParams,
    set: &BoxSet,
) -> Result<()> {
    let n = pstate.x.len();
    ensure_dim("aprid_step u", n, sample.u.len())?;
    ensure_dim("aprid_step w", dstate.z.len(), sample.w.len())?;
    adaptive_block_update(
        &mut pstate.x,
        &mut pstate.m,
        &mut pstate.v,
        &mut pstate.v_hat,
        &sample.u,
        alpha_k,
        -1.0,
        params.beta1,
        params.beta2,
        params.theta,
        set,
    )?;
    match &sample.w_support {
        Some(support) => {
            for &i in support {
                dstate.z[i] = (dstate.z[i] + rho_k * sample.w[i]).max(0.0);
            }
        }
        None => {
            for (zi, wi) in dstate.z.iter_mut().zip(&sample.w) {
                *zi = (*zi + rho_k * wi).max(0.0);
            }
        }
    }
    ensure_finite(&pstate.x, "primal iterate")?;
    ensure_finite(&dstate.z, "dual iterate")?;
    Ok(())
}

/// Stateful APriD driver over a stochastic program.
pub struct Aprid<'p, P: StochasticProgram + ?Sized> {
    problem: &'p P,
    params: SolverParams,
    batches: BatchSizes,
    schedule: StepSchedule,
    rng: SeededRng,
    pub primal: PrimalState,
    pub dual: DualState,
    avg_x: ErgodicAverager,
    avg_z: ErgodicAverager,
    iteration: usize,
    max_grad_norm: f64,
}

impl<'p, P: StochasticProgram + ?Sized> Aprid<'p, P> {
    pub fn new(problem: &'p P, params: SolverParams, batches: BatchSizes, seed: u64) -> Result<Self> {
        params.validate()?;
        let n = problem.dim();
        let m = problem.num_constraints();
        let set = problem.feasible_set();
        let x1 = match &params.x1 {
            Some(x) => {
                ensure_dim("initial x", n, x.len())?;
                if !set.contains(x) {
                    return Err(Error::InvalidParameter("initial x lies outside X".into()));
                }
                x.clone()
            }
            None => set.project(&vec![0.0; n]),
        };
        let z1 = match &params.z1 {
            Some(z) => {
                ensure_dim("initial z", m, z.len())?;
                if z.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::InvalidParameter("initial z must be >= 0".into()));
                }
                z.clone()
            }
            None => vec![0.0; m],
        };
        let mut schedule = params.schedule.clone();
        schedule.reset();
        let beta1 = params.beta1;
        Ok(Self {
            problem,
            batches,
            schedule,
            rng: seeded(seed, Stream::Train),
            primal: PrimalState::new(x1),
            dual: DualState { z: z1 },
            avg_x: ErgodicAverager::new(n, beta1),
            avg_z: ErgodicAverager::new(m, beta1),
            iteration: 0,
            max_grad_norm: 0.0,
            params,
        })
    }

    /// Runs iteration `k = iteration() + 1`: folds `(x^k, z^k)` into the
    /// averages, draws `(u^k, w^k)` and updates the state.
    pub fn step(&mut self) -> Result<StepSizes> {
        let sizes = self.schedule.next_step()?;
        self.avg_x.push(&self.primal.x, sizes.alpha);
        self.avg_z.push(&self.dual.z, sizes.alpha);
        let sample = sample_lagrangian_subgradient(
            self.problem,
            &self.primal.x,
            &self.dual.z,
            self.batches,
            &mut self.rng as &mut dyn RngCore,
        )?;
        self.max_grad_norm = self.max_grad_norm.max(norm2(&sample.u));
        aprid_step(
            &mut self.primal,
            &mut self.dual,
            &sample,
            sizes.alpha,
            sizes.rho,
            &self.params,
            self.problem.feasible_set(),
        )?;
        self.iteration += 1;
        Ok(sizes)
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Ergodic average of `x^1..x^t` for `t = iteration()`.
    pub fn x_bar(&self) -> Option<Vec<f64>> {
        self.avg_x.finalize()
    }

    pub fn z_bar(&self) -> Option<Vec<f64>> {
        self.avg_z.finalize()
    }

    /// Largest `||u^k||` drawn so far.
    pub fn max_grad_norm(&self) -> f64 {
        self.max_grad_norm
    }

    pub fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }
}

/// Runs APriD for the schedule's horizon and records metrics at the
/// ergodic averages on every checkpoint.
pub fn aprid_run<P: StochasticProgram + ?Sized>(
    problem: &P,
    params: &SolverParams,
    batches: BatchSizes,
    seed: u64,
    settings: &RunSettings<'_>,
) -> RunOutcome {
    let horizon = params.schedule.horizon();
    let mut rec = Recorder::new(settings, problem, seed);
    if let Err(e) = settings.validate(horizon) {
        return Err(rec.fail(e));
    }
    let mut solver = match Aprid::new(problem, params.clone(), batches, seed) {
        Ok(s) => s,
        Err(e) => return Err(rec.fail(e)),
    };
    for k in 1..=horizon {
        if let Err(e) = solver
            .step()
            .and_then(|_| check_divergence(k, &solver.primal.x, &solver.dual.z, settings.dual_cap))
        {
            return Err(rec.fail(as_divergence(k, e)));
        }
        if rec.is_checkpoint(k) {
            rec.record(k, solver.x_bar().as_deref());
        }
    }
    Ok(rec.finish())
}
