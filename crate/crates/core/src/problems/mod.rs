//! Benchmark problem families and the dataset pipeline.

mod bilinear;
mod dataset;
mod npc;
mod qcqp;

pub use bilinear::BilinearSaddle;
pub use dataset::{preprocess, standardize_columns, synthetic_classification, Dataset};
pub use npc::{NpcProblem, NPC_DEFAULT_BOX};
pub use qcqp::{
    Normalization, QcqpExpectation, QcqpFiniteSum, QcqpSampler, QuadraticConstraint, QuadraticProgram,
    DEFAULT_EVAL_SAMPLES, DEFAULT_MEMORY_BUDGET, QCQP_BOX,
};

use alloc::vec::Vec;

use rand::RngCore;

use crate::error::{Error, Result};

/// `amount` distinct indices from `0..len`; all of them when `amount >= len`.
pub(crate) fn sample_indices(rng: &mut dyn RngCore, len: usize, amount: usize) -> Result<Vec<usize>> {
    if amount == 0 {
        return Err(Error::InvalidParameter("zero batch size".into()));
    }
    if len == 0 {
        return Err(Error::InvalidParameter("cannot sample from an empty set".into()));
    }
    if amount >= len {
        return Ok((0..len).collect());
    }
    Ok(rand::seq::index::sample(rng, len, amount).into_vec())
}
