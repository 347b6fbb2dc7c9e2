use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circle::{max_on_circle, CircleSearch};
use super::order::order_estimate;
use super::slope::{a_estimate, epsilon_w};
use super::{GridSpec, GrowthParams, GrowthSample};
use crate::error::{Error, Result};
use crate::function_model::{x_of_r, FunctionSpec, TractSpec};

/// Sampled growth indicators on a grid uniform in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub params: GrowthParams,
    pub threshold: f64,
    pub grid: GridSpec,
    pub step: f64,
    pub samples: Vec<GrowthSample>,
    pub order_estimate: Option<f64>,
}

/// One grid sample at `x`: `B`, `theta_r`, `a` and `eps`.
pub fn sample_growth(
    f: &FunctionSpec,
    tract: &TractSpec,
    params: &GrowthParams,
    search: &CircleSearch,
    x: f64,
    step: f64,
) -> GrowthSample {
    let m = max_on_circle(f, tract, x, search);
    let est = a_estimate(f, tract, params, search, x, step);
    let eps = epsilon_w((-x).exp(), est.a, params.beta, params.delta).unwrap_or(f64::NAN);
    GrowthSample {
        r: -(-x).exp_m1(),
        x,
        b: m.b,
        theta_r: m.theta_r,
        a: est.a,
        eps,
        suspect: est.suspect,
    }
}

/// Index of the smallest grid radius from which `B >= 2` and `a >= 2` hold at
/// every later sample.
pub fn validate_base_config(samples: &[GrowthSample]) -> Result<usize> {
    let ok = |s: &GrowthSample| s.b >= 2.0 && s.a >= 2.0;
    let start = samples.iter().rposition(|s| !ok(s)).map_or(0, |i| i + 1);
    if start >= samples.len() {
        return Err(Error::NeverAttained);
    }
    Ok(start)
}

impl GrowthProfile {
    /// Samples the grid starting at `params.r0`, validates the base
    /// configuration and re-anchors the grid at the validated `r0`, keeping
    /// the configured span and spacing.
    pub fn build(
        f: &FunctionSpec,
        tract: &TractSpec,
        params: &GrowthParams,
        grid: &GridSpec,
        search: &CircleSearch,
    ) -> Result<Self> {
        f.validate()?;
        tract.validate(f)?;
        params.validate()?;
        grid.validate()?;
        let step = grid.step();
        let x_start = x_of_r(params.r0);
        let compute = |range: std::ops::Range<usize>| -> Vec<GrowthSample> {
            range
                .into_par_iter()
                .map(|k| sample_growth(f, tract, params, search, x_start + k as f64 * step, step))
                .collect()
        };
        let mut samples = compute(0..grid.points);
        let start = validate_base_config(&samples)?;
        if start > 0 {
            samples.extend(compute(grid.points..grid.points + start));
            samples.drain(..start);
            if validate_base_config(&samples)? != 0 {
                return Err(Error::NeverAttained);
            }
        }
        let mut profile = GrowthProfile {
            params: GrowthParams {
                r0: samples[0].r,
                ..*params
            },
            threshold: tract.threshold,
            grid: *grid,
            step,
            samples,
            order_estimate: None,
        };
        profile.order_estimate = order_estimate(&profile).ok();
        Ok(profile)
    }

    /// Builds a profile from already computed samples (no validation of `r0`).
    pub fn from_samples(params: GrowthParams, threshold: f64, samples: Vec<GrowthSample>) -> Self {
        let step = if samples.len() > 1 {
            samples[1].x - samples[0].x
        } else {
            0.0
        };
        let grid = GridSpec {
            points: samples.len(),
            span: samples.last().map_or(0.0, |s| s.x) - samples.first().map_or(0.0, |s| s.x),
        };
        let mut profile = GrowthProfile {
            params,
            threshold,
            grid,
            step,
            samples,
            order_estimate: None,
        };
        profile.order_estimate = order_estimate(&profile).ok();
        profile
    }

    pub fn validated_r0(&self) -> f64 {
        self.samples[0].r
    }

    pub fn xs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn a_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.a).collect()
    }

    /// Index of the first sample of the tail (upper half of the grid).
    pub fn tail_start(&self) -> usize {
        self.samples.len() / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tract() -> TractSpec {
        TractSpec::new(1.0, Complex64::new(0.5, 0.0))
    }

    fn small_grid() -> GridSpec {
        GridSpec { points: 64, span: 6.0 }
    }

    #[test]
    fn validated_r0_for_power_law() {
        let p = GrowthProfile::build(
            &FunctionSpec::power_law(2.0),
            &tract(),
            &GrowthParams {
                r0: 0.3,
                ..Default::default()
            },
            &small_grid(),
            &CircleSearch::default(),
        )
        .unwrap();
        // B >= 2 iff x >= 1; a >= 2 iff r >= 1/2.  The first grid point past x = 1.
        let r0 = p.validated_r0();
        let x0 = p.samples[0].x;
        assert!(x0 >= 1.0 - 1e-9 && x0 < 1.0 + p.step, "{x0}");
        assert!(r0 >= 1.0 - (-1f64).exp() - 1e-9);
        assert_eq!(p.samples.len(), 64);
        assert!(((p.samples[63].x - x0) - 6.0).abs() < 1e-9);
        assert!(p.samples.iter().all(|s| s.eps.is_finite() && s.eps > 0.0));
    }

    #[test]
    fn validated_r0_for_exp_pole() {
        let p = GrowthProfile::build(
            &FunctionSpec::exp_pole(1.0, 1.0),
            &tract(),
            &GrowthParams {
                r0: 0.2,
                ..Default::default()
            },
            &small_grid(),
            &CircleSearch::default(),
        )
        .unwrap();
        let r0 = p.validated_r0();
        assert!((0.5 - 1e-9..0.56).contains(&r0), "{r0}");
    }

    #[test]
    fn bounded_polynomial_never_attains() {
        let f = FunctionSpec::PowerSeries {
            coefficients: vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        };
        let t = TractSpec::new(1.0, Complex64::new(0.5, 0.0));
        let err = GrowthProfile::build(
            &f,
            &t,
            &GrowthParams::default(),
            &small_grid(),
            &CircleSearch::default(),
        );
        assert_eq!(err.unwrap_err(), Error::NeverAttained);
    }
}
