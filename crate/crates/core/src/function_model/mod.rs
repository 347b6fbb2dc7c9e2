//! Test functions in the unit disc: log-space evaluation, branch-tracked
//! logarithms, logarithmic-derivative towers and closed-form oracles.

mod oracle;
mod point;
pub mod series;
mod spec;
mod tract;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use oracle::{catalog_oracle, x_of_r, OracleValues};
pub use point::{cexpm1, clog1p, ComplexPoint, DiscPoint};
pub use spec::FunctionSpec;
pub use tract::{v_eval, TractSpec, MEMBERSHIP_PROBES};

use crate::error::Result;

/// Straight segment from `anchor` along which `log f` is continued.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPath {
    pub anchor: DiscPoint,
    pub delta: Complex64,
    pub steps: usize,
}

impl LogPath {
    pub fn new(anchor: Complex64, target: Complex64, steps: usize) -> Self {
        Self {
            anchor: DiscPoint::new(anchor),
            delta: target - anchor,
            steps,
        }
    }

    /// Path from an accurately represented anchor by a (possibly tiny) offset.
    pub fn from_offset(anchor: DiscPoint, delta: Complex64, steps: usize) -> Self {
        Self { anchor, delta, steps }
    }

    pub fn target(&self) -> DiscPoint {
        self.anchor.shifted(self.delta)
    }
}

/// `log f(target)`, continued from the anchor's branch along the segment.
pub fn eval_log(spec: &FunctionSpec, path: &LogPath) -> Result<Complex64> {
    let base = spec.anchor_log(&path.anchor)?;
    Ok(base + spec.log_ratio(&path.anchor, path.delta, path.steps)?)
}

/// `[L_1, ..., L_m]` with `L_q = f^{(q)}/f` at `z`.
pub fn logderiv_tower(spec: &FunctionSpec, z: &DiscPoint, m: usize) -> Result<Vec<Complex64>> {
    spec.logderiv_tower(z, m)
}
