use serde::{Deserialize, Serialize};

use super::{GrowthParams, GrowthProfile};
use crate::error::{Error, Result};
use crate::numeric::{interp_linear, lsq_slope, running_max, upper_envelope};

/// Minimum number of samples in any slope window.
const MIN_WINDOW: usize = 16;

/// Tail slope of `ys` against `xs` (both ascending in `x`).
///
/// The least concave majorant of the last half is fitted by least squares on
/// trailing windows that end at the final sample and start inside the last
/// quarter of the grid; the largest slope is returned.
pub fn order_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len();
    let half = n / 2;
    if n - half < MIN_WINDOW {
        return Err(Error::InsufficientData {
            needed: 2 * MIN_WINDOW,
            have: n,
        });
    }
    let env = upper_envelope(&xs[half..], &ys[half..]);
    let tx = &xs[half..];
    let m = env.len();
    let longest = (n / 4).clamp(MIN_WINDOW, m);
    let mut best = f64::NEG_INFINITY;
    for len in MIN_WINDOW..=longest {
        let s = lsq_slope(&tx[m - len..], &env[m - len..]);
        best = best.max(s);
    }
    Ok(best)
}

/// Order of growth `limsup log B / log 1/(1-r)`, estimated as the tail slope
/// of `log B` against `x`, clamped below at 0.
pub fn order_estimate(profile: &GrowthProfile) -> Result<f64> {
    let pts: Vec<(f64, f64)> = profile
        .samples
        .iter()
        .filter(|s| s.b >= 2.0)
        .map(|s| (s.x, s.b.ln()))
        .collect();
    if pts.len() < MIN_WINDOW {
        return Err(Error::InsufficientData {
            needed: MIN_WINDOW,
            have: pts.len(),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let ys = running_max(&ys);
    let rho = if xs.len() < 2 * MIN_WINDOW {
        lsq_slope(&xs, &ys)
    } else {
        order_slope(&xs, &ys)?
    };
    Ok(rho.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositiveOrderWindow {
    pub r_n: f64,
    pub r_n_prime: f64,
    pub x_n: f64,
    pub x_n_prime: f64,
    /// `(1 - r_n)^{1+rho0} a(r_n)^{1-2 beta}`.
    pub diagnostic: f64,
    /// Tail slope of `log a` against `x`.
    pub a_slope: f64,
}

/// The window `[r_n, r_n']` with `1 - r_n' = (1 - r_n)^{1+rho0}`.
///
/// Rejected unless the order estimate exceeds `rho0`, the tail slope of
/// `log a` exceeds `(1+rho0)/(1-2 beta)` and the diagnostic reaches
/// `threshold`.
pub fn positive_order_window(
    params: &GrowthParams,
    profile: &GrowthProfile,
    r_n: f64,
    threshold: f64,
) -> Result<PositiveOrderWindow> {
    WindowContext::new(params, profile)?.window(r_n, threshold)
}

/// Every grid radius tried as `r_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScan {
    pub accepted: Vec<PositiveOrderWindow>,
    pub rejected: usize,
    /// Largest diagnostic seen, accepted or not.
    pub best_diagnostic: f64,
    pub a_slope: f64,
}

pub fn scan_windows(params: &GrowthParams, profile: &GrowthProfile, threshold: f64) -> Result<WindowScan> {
    let ctx = WindowContext::new(params, profile)?;
    let mut scan = WindowScan {
        accepted: Vec::new(),
        rejected: 0,
        best_diagnostic: 0.0,
        a_slope: ctx.a_slope,
    };
    for s in &profile.samples {
        match ctx.window(s.r, threshold) {
            Ok(w) => {
                scan.best_diagnostic = scan.best_diagnostic.max(w.diagnostic);
                scan.accepted.push(w);
            }
            Err(Error::WindowRejected { diagnostic, .. }) => {
                scan.best_diagnostic = scan.best_diagnostic.max(diagnostic);
                scan.rejected += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(scan)
}

struct WindowContext {
    rho0: f64,
    beta: f64,
    xs: Vec<f64>,
    a: Vec<f64>,
    a_slope: f64,
}

impl WindowContext {
    fn new(params: &GrowthParams, profile: &GrowthProfile) -> Result<Self> {
        let rho0 = params
            .rho0
            .ok_or_else(|| Error::Precondition("rho0 is not set".into()))?;
        let order = match profile.order_estimate {
            Some(o) => o,
            None => order_estimate(profile)?,
        };
        if order <= rho0 {
            return Err(Error::Precondition(format!(
                "order estimate {order} does not exceed rho0 = {rho0}"
            )));
        }
        let xs = profile.xs();
        let log_a: Vec<f64> = profile
            .samples
            .iter()
            .map(|s| s.a.max(f64::MIN_POSITIVE).ln())
            .collect();
        let a_slope = order_slope(&xs, &log_a)?;
        Ok(Self {
            rho0,
            beta: params.beta,
            xs,
            a: profile.a_values(),
            a_slope,
        })
    }

    fn window(&self, r_n: f64, threshold: f64) -> Result<PositiveOrderWindow> {
        let (rho0, a_slope) = (self.rho0, self.a_slope);
        if !(r_n > 0.0 && r_n < 1.0) {
            return Err(Error::DomainError {
                what: "r_n must lie in (0, 1)",
                value: r_n,
            });
        }
        let x_n = -(-r_n).ln_1p();
        let a = interp_linear(&self.xs, &self.a, x_n);
        let exponent = 1.0 - 2.0 * self.beta;
        let diagnostic = if a > 0.0 && exponent > 0.0 {
            (-(1.0 + rho0) * x_n + exponent * a.ln()).exp()
        } else {
            0.0
        };
        let required = (1.0 + rho0) / exponent;
        if !(exponent > 0.0 && a_slope > required) {
            return Err(Error::WindowRejected {
                diagnostic,
                reason: format!("tail slope of log a is {a_slope:.6}, needs more than {required:.6}"),
            });
        }
        if !(diagnostic >= threshold) {
            return Err(Error::WindowRejected {
                diagnostic,
                reason: format!("diagnostic below threshold {threshold}"),
            });
        }
        let x_n_prime = (1.0 + rho0) * x_n;
        Ok(PositiveOrderWindow {
            r_n,
            r_n_prime: -(-x_n_prime).exp_m1(),
            x_n,
            x_n_prime,
            diagnostic,
            a_slope,
        })
    }
}

impl PositiveOrderWindow {
    pub fn contains_x(&self, x: f64) -> bool {
        self.x_n <= x && x <= self.x_n_prime
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthSample;

    fn synthetic(b: impl Fn(f64) -> f64, a: impl Fn(f64) -> f64, x0: f64, span: f64, n: usize) -> GrowthProfile {
        let step = span / (n - 1) as f64;
        let samples = (0..n)
            .map(|k| {
                let x = x0 + k as f64 * step;
                GrowthSample {
                    r: -(-x).exp_m1(),
                    x,
                    b: b(x),
                    theta_r: 0.0,
                    a: a(x),
                    eps: 1e-3,
                    suspect: false,
                }
            })
            .collect();
        GrowthProfile::from_samples(GrowthParams::default(), 1.0, samples)
    }

    fn r(x: f64) -> f64 {
        -(-x).exp_m1()
    }

    #[test]
    fn closed_form_orders() {
        let pl = synthetic(|x| 2.0 * x, |x| 2.0 * r(x) * x.exp(), 1.0, 12.0, 512);
        let rho = order_estimate(&pl).unwrap();
        assert!(rho < 0.1, "{rho}");
        let e1 = synthetic(f64::exp, |x| r(x) * (2.0 * x).exp(), 0.7, 12.0, 512);
        assert!((order_estimate(&e1).unwrap() - 1.0).abs() < 1e-9);
        let e2 = synthetic(|x| (2.0 * x).exp(), |x| 2.0 * r(x) * (3.0 * x).exp(), 0.4, 12.0, 512);
        assert!((order_estimate(&e2).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_samples() {
        let p = synthetic(|x| x, |x| x, 3.0, 1.0, 10);
        assert!(matches!(order_estimate(&p), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn window_end_point() {
        // Strongly growing a so that the window is accepted.
        let p = synthetic(|x| (4.0 * x).exp(), |x| 4.0 * r(x) * (5.0 * x).exp(), 0.5, 12.0, 512);
        let params = GrowthParams {
            rho0: Some(0.5),
            ..Default::default()
        };
        let w = positive_order_window(&params, &p, 0.99, 10.0).unwrap();
        assert!((w.r_n_prime - 0.999).abs() < 1e-12);
        assert!((w.x_n_prime - 1.5 * w.x_n).abs() < 1e-12);
    }

    #[test]
    fn diagnostic_for_exp_pole_k2_is_rejected() {
        let p = synthetic(|x| (2.0 * x).exp(), |x| 2.0 * r(x) * (3.0 * x).exp(), 0.4, 12.0, 512);
        let params = GrowthParams {
            rho0: Some(0.5),
            ..Default::default()
        };
        match positive_order_window(&params, &p, 0.99, 10.0) {
            Err(Error::WindowRejected { diagnostic, .. }) => {
                let a: f64 = 2.0 * 0.99 / 1e-6;
                let expected = 0.01f64.powf(1.5) * a.sqrt();
                assert!(
                    (diagnostic - expected).abs() < 1e-3 * expected,
                    "{diagnostic} vs {expected}"
                );
                assert!((diagnostic - 1.407).abs() < 1e-3);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn rho0_above_order_is_precondition_failure() {
        let p = synthetic(|x| 2.0 * x, |x| 2.0 * r(x) * x.exp(), 1.0, 12.0, 512);
        let params = GrowthParams {
            rho0: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(
            positive_order_window(&params, &p, 0.99, 10.0),
            Err(Error::Precondition(_))
        ));
    }
}
