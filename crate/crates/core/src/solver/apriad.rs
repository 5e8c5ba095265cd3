//! Adaptive primal-dual method for convex-concave minimax problems
//! `min_{x in X} max_{z in Z} L(x, z)`.
//!
//! Both blocks carry momentum and an AMSGrad-style second moment. The two
//! gradient blocks are clipped separately; `x` descends with step `alpha_k`
//! and `z` ascends with step `rho_k`.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use crate::averager::ErgodicAverager;
use crate::boxset::BoxSet;
use crate::error::{ensure_dim, ensure_finite, Error, Result};
use crate::oracle::{sample_minimax_subgradient, GradSample};
use crate::problem::MinimaxProblem;
use crate::rng::{seeded, SeededRng, Stream};
use crate::run::{as_divergence, Recorder, RunOutcome, RunSettings};
use crate::schedule::{DualRule, ScheduleKind, StepSchedule, StepSizes};

use super::aprid::adaptive_block_update;
use super::SolverParams;

/// Iterates and per-block moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub m_x: Vec<f64>,
    pub m_z: Vec<f64>,
    pub v_x: Vec<f64>,
    pub v_z: Vec<f64>,
    pub v_hat_x: Vec<f64>,
    pub v_hat_z: Vec<f64>,
}

impl MinimaxState {
    pub fn new(x: Vec<f64>, z: Vec<f64>) -> Self {
        let (n, m) = (x.len(), z.len());
        Self {
            x,
            z,
            m_x: vec![0.0; n],
            m_z: vec![0.0; m],
            v_x: vec![0.0; n],
            v_z: vec![0.0; m],
            v_hat_x: vec![0.0; n],
            v_hat_z: vec![0.0; m],
        }
    }
}

/// One APriAD update from the draw `sample = (u, w)`.
pub fn apriad_step(
    state: &mut MinimaxState,
    sample: &GradSample,
    alpha_k: f64,
    rho_k: f64,
    params: &SolverParams,
    set_x: &BoxSet,
    set_z: &BoxSet,
) -> Result<()> {
    ensure_dim("apriad_step u", state.x.len(), sample.u.len())?;
    ensure_dim("apriad_step w", state.z.len(), sample.w.len())?;
    adaptive_block_update(
        &mut state.x,
        &mut state.m_x,
        &mut state.v_x,
        &mut state.v_hat_x,
        &sample.u,
        alpha_k,
        -1.0,
        params.beta1,
        params.beta2,
        params.theta,
        set_x,
    )?;
    adaptive_block_update(
        &mut state.z,
        &mut state.m_z,
        &mut state.v_z,
        &mut state.v_hat_z,
        &sample.w,
        rho_k,
        1.0,
        params.beta1,
        params.beta2,
        params.theta,
        set_z,
    )?;
    ensure_finite(&state.x, "primal iterate")?;
    ensure_finite(&state.z, "dual iterate")?;
    Ok(())
}

/// Stateful APriAD driver.
pub struct Apriad<'p, P: MinimaxProblem + ?Sized> {
    problem: &'p P,
    params: SolverParams,
    schedule: StepSchedule,
    rng: SeededRng,
    pub state: MinimaxState,
    avg_x: ErgodicAverager,
    avg_z: ErgodicAverager,
    iteration: usize,
}

impl<'p, P: MinimaxProblem + ?Sized> Apriad<'p, P> {
    pub fn new(problem: &'p P, params: SolverParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let (n, m) = (problem.dim_x(), problem.dim_z());
        let start = |given: &Option<Vec<f64>>, dim: usize, set: &BoxSet, what: &str| -> Result<Vec<f64>> {
            match given {
                Some(v) => {
                    ensure_dim("initial point", dim, v.len())?;
                    if !set.contains(v) {
                        return Err(Error::InvalidParameter(alloc::format!("initial {what} lies outside its box")));
                    }
                    Ok(v.clone())
                }
                None => Ok(set.project(&vec![0.0; dim])),
            }
        };
        let x1 = start(&params.x1, n, problem.set_x(), "x")?;
        let z1 = start(&params.z1, m, problem.set_z(), "z")?;
        let mut schedule = params.schedule.clone();
        schedule.reset();
        if schedule.rule() == DualRule::Recursion && *schedule.kind() != ScheduleKind::Constant {
            log::warn!("minimax schedule: alpha_k / rho_k is not constant under the dual recursion");
        }
        let beta1 = params.beta1;
        Ok(Self {
            problem,
            schedule,
            rng: seeded(seed, Stream::Train),
            state: MinimaxState::new(x1, z1),
            avg_x: ErgodicAverager::new(n, beta1),
            avg_z: ErgodicAverager::new(m, beta1),
            iteration: 0,
            params,
        })
    }

    pub fn step(&mut self) -> Result<StepSizes> {
        let sizes = self.schedule.next_step()?;
        self.avg_x.push(&self.state.x, sizes.alpha);
        self.avg_z.push(&self.state.z, sizes.alpha);
        let sample = sample_minimax_subgradient(
            self.problem,
            &self.state.x,
            &self.state.z,
            &mut self.rng as &mut dyn RngCore,
        )?;
        apriad_step(
            &mut self.state,
            &sample,
            sizes.alpha,
            sizes.rho,
            &self.params,
            self.problem.set_x(),
            self.problem.set_z(),
        )?;
        self.iteration += 1;
        Ok(sizes)
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn x_bar(&self) -> Option<Vec<f64>> {
        self.avg_x.finalize()
    }

    pub fn z_bar(&self) -> Option<Vec<f64>> {
        self.avg_z.finalize()
    }
}

/// Runs APriAD for the schedule's horizon, recording `L` and the exact gap
/// at the ergodic averages.
pub fn apriad_run<P: MinimaxProblem + ?Sized>(
    problem: &P,
    params: &SolverParams,
    seed: u64,
    settings: &RunSettings<'_>,
) -> RunOutcome {
    let horizon = params.schedule.horizon();
    let mut rec = Recorder::without_program(settings, seed);
    if let Err(e) = settings.validate(horizon) {
        return Err(rec.fail(e));
    }
    let mut solver = match Apriad::new(problem, params.clone(), seed) {
        Ok(s) => s,
        Err(e) => return Err(rec.fail(e)),
    };
    for k in 1..=horizon {
        if let Err(e) = solver.step() {
            return Err(rec.fail(as_divergence(k, e)));
        }
        if rec.is_checkpoint(k) {
            let xb = solver.x_bar().unwrap_or_default();
            let zb = solver.z_bar().unwrap_or_default();
            let res = rec.record_minimax(k, || {
                let gap = problem.primal_dual_gap(&xb, &zb)?;
                let active = problem.set_x().touches_boundary(&xb) || problem.set_z().touches_boundary(&zb);
                Ok((problem.value(&xb, &zb), gap, active))
            });
            if let Err(e) = res {
                return Err(rec.fail(e));
            }
        }
    }
    Ok(rec.finish())
}
