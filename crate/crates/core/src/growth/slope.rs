use crate::error::{Error, Result};
use crate::function_model::{FunctionSpec, TractSpec};
use crate::numeric::richardson_central;

use super::circle::{max_on_circle, CircleSearch};
use super::GrowthParams;

/// Below this step (in x-units) differences of `B` are dominated by rounding.
pub const MIN_STEP_X: f64 = 1e-7;

/// The admissible radius `eps(r)`; natural logarithms.
pub fn epsilon(r: f64, a: f64, beta: f64, delta: f64) -> Result<f64> {
    epsilon_w(1.0 - r, a, beta, delta)
}

/// [`epsilon`] with `1 - r` supplied directly.
pub fn epsilon_w(one_minus_r: f64, a: f64, beta: f64, delta: f64) -> Result<f64> {
    if !(a >= 2.0) {
        return Err(Error::DomainError {
            what: "a(r) must be at least 2",
            value: a,
        });
    }
    let la = a.ln().powf(1.0 + delta);
    let first = one_minus_r / (2.0 * a.powf(beta) * la);
    let second = 1.0 / (a.powf(1.0 - beta) * la);
    Ok(first.min(second))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AEstimate {
    pub a: f64,
    /// Step used, in x-units.
    pub step: f64,
    /// One-sided slopes disagreed by more than 20% (and more than 1).
    pub suspect: bool,
}

/// `a(r) = dB/dlog r` at `r = 1 - e^{-x}`.
///
/// Differences are taken in `x` with one Richardson level and converted via
/// `dx/dlog r = r/(1-r)`. The step is the smaller of a quarter grid step and
/// `eps(r)/(1-r)`, floored at [`MIN_STEP_X`]. When the two one-sided slopes
/// disagree the larger one is reported and the sample is flagged.
pub fn a_estimate(
    f: &FunctionSpec,
    tract: &TractSpec,
    params: &GrowthParams,
    search: &CircleSearch,
    x: f64,
    grid_step: f64,
) -> AEstimate {
    let b = |t: f64| max_on_circle(f, tract, t, search).b;
    let b0 = b(x);
    let mut h = (0.25 * grid_step).max(MIN_STEP_X);
    let mut est = slope_at(&b, b0, x, h);
    if let Ok(eps) = epsilon_w((-x).exp(), est.a, params.beta, params.delta) {
        let scaled = (eps / (-x).exp()).max(MIN_STEP_X);
        if scaled < h {
            h = scaled;
            est = slope_at(&b, b0, x, h);
        }
    }
    est
}

fn slope_at(b: &impl Fn(f64) -> f64, b0: f64, x: f64, h: f64) -> AEstimate {
    let to_a = -(-x).exp_m1() * x.exp();
    let central = richardson_central(b, x, h) * to_a;
    let (hi, lo) = (x + h, x - h);
    let right = (b(hi) - b0) / (hi - x) * to_a;
    let left = (b0 - b(lo)) / (x - lo) * to_a;
    let gap = (right - left).abs();
    let suspect = gap > 0.2 * right.abs().max(left.abs()) && gap > 1.0;
    let a = if suspect { right.max(left) } else { central };
    AEstimate {
        a: a.max(0.0),
        step: h,
        suspect,
    }
}
