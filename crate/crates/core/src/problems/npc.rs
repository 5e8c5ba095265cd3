//! Neyman-Pearson classification with a linear classifier and logistic
//! surrogate, in finite-sum (scenario) form:
//!
//! ```text
//! min  f0(x) = (1/n+) sum log(1 + exp(-x^T a+_i))
//! s.t. f1(x) = (1/n-) sum log(1 + exp( x^T a-_i)) - c_hat <= 0,   x in X
//! ```

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::RngCore;

use super::dataset::Dataset;
use super::sample_indices;
use crate::boxset::BoxSet;
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{axpy, dot};
use crate::logistic::{sigmoid, softplus};
use crate::problem::{ConstraintSink, DeterministicProgram, StochasticProgram};

#[derive(Debug, Clone)]
pub struct NpcProblem {
    d: usize,
    pos: Vec<f64>,
    neg: Vec<f64>,
    n_pos: usize,
    n_neg: usize,
    c_hat: f64,
    set: BoxSet,
}

/// Default half-width of the box `X = [-w, w]^d`.
pub const NPC_DEFAULT_BOX: f64 = 100.0;

impl NpcProblem {
    /// Builds the problem with the constraint offset `c_hat` given directly.
    pub fn with_offset(data: &Dataset, c_hat: f64, box_halfwidth: f64) -> Result<Self> {
        let d = data.n_features();
        let (n_pos, n_neg) = (data.pos_count(), data.neg_count());
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::InvalidParameter(format!(
                "both classes must be present (n+ = {n_pos}, n- = {n_neg})"
            )));
        }
        if !c_hat.is_finite() {
            return Err(Error::InvalidParameter("c_hat must be finite".into()));
        }
        if c_hat <= 0.0 {
            log::warn!("c_hat = {c_hat} <= 0: the false-positive constraint may be infeasible");
        }
        Ok(Self {
            d,
            pos: data.class_rows(1),
            neg: data.class_rows(-1),
            n_pos,
            n_neg,
            c_hat,
            set: BoxSet::symmetric(d, box_halfwidth)?,
        })
    }

    /// `c_hat = c_target - kappa / sqrt(n-)`.
    pub fn new(data: &Dataset, c_target: f64, kappa: f64, box_halfwidth: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        let n_neg = data.neg_count();
        if n_neg == 0 {
            return Err(Error::InvalidParameter("no negative samples".into()));
        }
        let c_hat = c_target - kappa / libm::sqrt(n_neg as f64);
        Self::with_offset(data, c_hat, box_halfwidth)
    }

    pub fn c_hat(&self) -> f64 {
        self.c_hat
    }

    pub fn class_counts(&self) -> (usize, usize) {
        (self.n_pos, self.n_neg)
    }

    fn pos_row(&self, i: usize) -> &[f64] {
        &self.pos[i * self.d..(i + 1) * self.d]
    }

    fn neg_row(&self, i: usize) -> &[f64] {
        &self.neg[i * self.d..(i + 1) * self.d]
    }

    /// Per-sample objective loss and gradient `-sigma(-x^T a) a`.
    pub fn positive_sample(&self, i: usize, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let a = self.pos_row(i);
        let t = dot(x, a);
        if let Some(g) = grad {
            let s = -sigmoid(-t);
            g.iter_mut().zip(a).for_each(|(gi, ai)| *gi = s * ai);
        }
        softplus(-t)
    }

    /// Per-sample constraint loss (without offset) and gradient `sigma(x^T a) a`.
    pub fn negative_sample(&self, i: usize, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let a = self.neg_row(i);
        let t = dot(x, a);
        if let Some(g) = grad {
            let s = sigmoid(t);
            g.iter_mut().zip(a).for_each(|(gi, ai)| *gi = s * ai);
        }
        softplus(t)
    }
}

impl StochasticProgram for NpcProblem {
    fn dim(&self) -> usize {
        self.d
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn feasible_set(&self) -> &BoxSet {
        &self.set
    }

    fn deterministic_constraints(&self) -> bool {
        false
    }

    fn objective_batch(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
        weight: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        ensure_dim("npc objective", self.d, x.len())?;
        let idx = sample_indices(rng, self.n_pos, batch)?;
        let w = weight / idx.len() as f64;
        for i in idx {
            let a = self.pos_row(i);
            let s = -sigmoid(-dot(x, a));
            axpy(w * s, a, grad);
        }
        Ok(())
    }

    fn constraint_batch(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
        want_grad: bool,
        sink: &mut ConstraintSink<'_>,
    ) -> Result<f64> {
        ensure_dim("npc constraint", self.d, x.len())?;
        let idx = sample_indices(rng, self.n_neg, batch)?;
        let inv = 1.0 / idx.len() as f64;
        let mut value = 0.0;
        let mut grad = if want_grad { vec![0.0; self.d] } else { Vec::new() };
        for i in idx {
            let a = self.neg_row(i);
            let t = dot(x, a);
            value += softplus(t);
            if want_grad {
                axpy(inv * sigmoid(t), a, &mut grad);
            }
        }
        sink(0, value * inv - self.c_hat, &grad);
        Ok(1.0)
    }

    fn evaluation_program(&self, _eval_seed: u64) -> Box<dyn DeterministicProgram + '_> {
        Box::new(self)
    }
}

impl DeterministicProgram for NpcProblem {
    fn dim(&self) -> usize {
        self.d
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn feasible_set(&self) -> &BoxSet {
        &self.set
    }

    fn objective(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let inv = 1.0 / self.n_pos as f64;
        let mut value = 0.0;
        match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..self.n_pos {
                    let a = self.pos_row(i);
                    let t = dot(x, a);
                    value += softplus(-t);
                    axpy(-inv * sigmoid(-t), a, g);
                }
            }
            None => {
                for i in 0..self.n_pos {
                    value += softplus(-dot(x, self.pos_row(i)));
                }
            }
        }
        value * inv
    }

    fn constraint(&self, _i: usize, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let inv = 1.0 / self.n_neg as f64;
        let mut value = 0.0;
        match grad {
            Some(g) => {
                g.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..self.n_neg {
                    let a = self.neg_row(i);
                    let t = dot(x, a);
                    value += softplus(t);
                    axpy(inv * sigmoid(t), a, g);
                }
            }
            None => {
                for i in 0..self.n_neg {
                    value += softplus(dot(x, self.neg_row(i)));
                }
            }
        }
        value * inv - self.c_hat
    }
}
