//! Closed-form growth indicators for catalog entries whose maxima sit on the
//! positive real axis.

use serde::{Deserialize, Serialize};

use super::spec::FunctionSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValues {
    pub b: f64,
    pub a: f64,
    pub theta_r: f64,
    pub order: f64,
}

/// Exact `B(r)`, `a(r)`, `theta_r` and order for `PowerLaw`, `ExpPole` and
/// products of them, with threshold `R`.
///
/// `x = log 1/(1-r)` is taken as the radius coordinate so that `1 - r` is
/// available without cancellation.
pub fn catalog_oracle(spec: &FunctionSpec, threshold: f64, x: f64) -> Result<OracleValues> {
    let order = spec.catalog_order().ok_or(Error::NoOracle)?;
    let (log_f, a) = log_f_and_a(spec, x)?;
    Ok(OracleValues {
        b: (log_f - threshold.ln()).max(0.0),
        a,
        theta_r: 0.0,
        order,
    })
}

/// `log f(r)` and `r d/dr log f(r)` on the positive axis.
fn log_f_and_a(spec: &FunctionSpec, x: f64) -> Result<(f64, f64)> {
    let one_minus_r = (-x).exp();
    let r = -(-x).exp_m1();
    match spec {
        FunctionSpec::PowerLaw { gamma } => Ok((gamma * x, gamma * r / one_minus_r)),
        FunctionSpec::ExpPole { c, k } => {
            let b = c * (k * x).exp();
            Ok((b, c * k * r * ((k + 1.0) * x).exp()))
        }
        FunctionSpec::Product { factors } => factors.iter().try_fold((0.0, 0.0), |acc, f| {
            let (b, a) = log_f_and_a(f, x)?;
            Ok((acc.0 + b, acc.1 + a))
        }),
        _ => Err(Error::NoOracle),
    }
}

pub fn x_of_r(r: f64) -> f64 {
    -(-r).ln_1p()
}
