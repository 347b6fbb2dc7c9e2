//! Growth indicators of the tract function: `B(r)`, `a(r)`, the admissible
//! radius `eps(r)`, the order of growth, positive-order windows and the
//! classical maximum term / central index.

mod circle;
pub mod export;
mod order;
mod profile;
mod slope;

use serde::{Deserialize, Serialize};

pub use circle::{max_on_circle, CircleMax, CircleSearch};
pub use order::{order_estimate, order_slope, positive_order_window, scan_windows, PositiveOrderWindow, WindowScan};
pub use profile::{sample_growth, validate_base_config, GrowthProfile};
pub use slope::{a_estimate, epsilon, epsilon_w, AEstimate, MIN_STEP_X};

use crate::error::{Error, Result};
use crate::function_model::series;
use num_complex::Complex64;

/// Base configuration: `r0`, `beta`, `delta`, the optional order floor
/// `rho0` and the highest derivative order `max_order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthParams {
    pub r0: f64,
    pub beta: f64,
    pub delta: f64,
    pub rho0: Option<f64>,
    pub max_order: usize,
}

fn default_max_order() -> usize {
    3
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            r0: 0.2,
            beta: 0.25,
            delta: 0.5,
            rho0: None,
            max_order: default_max_order(),
        }
    }
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.r0 > 0.0 && self.r0 < 1.0) {
            return bad(format!("r0 must lie in (0, 1), got {}", self.r0));
        }
        if !(self.beta > 0.0 && self.beta <= 0.5) {
            return bad(format!("beta must lie in (0, 1/2], got {}", self.beta));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if let Some(rho0) = self.rho0 {
            if !(rho0 > 0.0 && rho0.is_finite()) {
                return bad(format!("rho0 must be positive, got {rho0}"));
            }
        }
        if self.max_order == 0 {
            return bad("max_order must be at least 1".into());
        }
        Ok(())
    }
}

/// Grid uniform in `x = log 1/(1-r)`, starting at the validated `r0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    pub span: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 512,
            span: 12.0,
        }
    }
}

impl GridSpec {
    pub fn step(&self) -> f64 {
        self.span / (self.points - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.span > 0.0 && self.span.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "grid needs at least 2 points and a positive span, got {} / {}",
                self.points, self.span
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub r: f64,
    pub x: f64,
    pub b: f64,
    pub theta_r: f64,
    pub a: f64,
    /// `NaN` when `a < 2` (outside the validated range).
    pub eps: f64,
    pub suspect: bool,
}

impl GrowthSample {
    /// `1 - r`, exact in `x`.
    pub fn one_minus_r(&self) -> f64 {
        (-self.x).exp()
    }

    pub fn z_r(&self) -> crate::function_model::DiscPoint {
        crate::function_model::DiscPoint::on_circle(self.x, self.theta_r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxTerm {
    pub ln_mu: f64,
    pub index: usize,
}

impl MaxTerm {
    pub fn mu(&self) -> f64 {
        self.ln_mu.exp()
    }
}

/// Maximum term `mu(r) = max |a_n| r^n` and central index `N(r)`, the largest
/// index attaining it.
pub fn max_term_and_central_index(coefficients: &[Complex64], r: f64) -> Result<MaxTerm> {
    if coefficients.is_empty() || !(r > 0.0) {
        return Err(Error::Precondition("need coefficients and r > 0".into()));
    }
    let (ln_mu, index) = series::max_term(coefficients, r);
    Ok(MaxTerm { ln_mu, index })
}
