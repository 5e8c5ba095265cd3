//! Norm-based gradient clipping.

use alloc::vec::Vec;

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::norm2;

/// Returns `u / max{1, ||u|| / theta}`.
///
/// Vectors already inside the `theta`-ball come back unchanged (bit for bit).
pub fn clip_gradient(u: &[f64], theta: f64) -> Result<Vec<f64>> {
    let mut out = u.to_vec();
    clip_in_place(&mut out, theta)?;
    Ok(out)
}

/// In-place variant of [`clip_gradient`]; returns the scale factor applied.
pub fn clip_in_place(u: &mut [f64], theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "clipping threshold must be positive, got {theta}"
        )));
    }
    ensure_finite(u, "gradient passed to clip")?;
    let norm = norm2(u);
    if norm <= theta {
        return Ok(1.0);
    }
    let s = theta / norm;
    u.iter_mut().for_each(|v| *v *= s);
    Ok(s)
}
