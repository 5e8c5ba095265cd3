//! Non-adaptive comparison methods for expectation-constrained programs.

mod csa;
mod msa;
mod pdsg;

pub use csa::{csa_run, Csa, CsaParams, CsaRuns, DEFAULT_CSA_TOLERANCE};
pub use msa::{msa_run, Msa, MsaParams, DEFAULT_Z_CAP};
pub use pdsg::{pdsg_adp_run, PdsgAdp, PdsgAdpParams, DEFAULT_PDSG_ETA};

use alloc::vec;
use alloc::vec::Vec;

use crate::boxset::BoxSet;
use crate::error::{ensure_dim, Error, Result};

/// Starting point: `x1` if given (checked against `set`), else the
/// projection of the origin.
pub(crate) fn initial_point(x1: &Option<Vec<f64>>, set: &BoxSet) -> Result<Vec<f64>> {
    match x1 {
        Some(x) => {
            ensure_dim("initial x", set.dim(), x.len())?;
            if !set.contains(x) {
                return Err(Error::InvalidParameter("initial x lies outside X".into()));
            }
            Ok(x.clone())
        }
        None => Ok(set.project(&vec![0.0; set.dim()])),
    }
}
