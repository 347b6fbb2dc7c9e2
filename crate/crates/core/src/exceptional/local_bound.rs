use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConditionId, ExceptionalSet, FailureSetReport};
use crate::error::{Error, Result};
use crate::function_model::{FunctionSpec, TractSpec};
use crate::growth::{max_on_circle, sample_growth, CircleSearch, GrowthProfile, GrowthSample};
use crate::numeric::percentile;

/// Radii sampled in `[r - eps, r + eps]`.
pub const PHI_SAMPLES: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiSample {
    pub r: f64,
    pub x: f64,
    /// `max_s B(s) - B(r) - a(r) log(s/r)`, clamped below at 0.
    pub phi_hat: f64,
    /// `a(r)^{1-beta} eps(r)`.
    pub scale: f64,
    pub ratio: f64,
    pub pass: bool,
}

fn phi_at(f: &FunctionSpec, tract: &TractSpec, search: &CircleSearch, s: &GrowthSample, beta: f64) -> PhiSample {
    let w = s.one_minus_r();
    let mut phi = 0.0f64;
    for j in 0..PHI_SAMPLES {
        let u = s.eps * (2.0 * j as f64 / (PHI_SAMPLES - 1) as f64 - 1.0);
        if u == 0.0 {
            continue;
        }
        let xs = s.x - (-u / w).ln_1p();
        let bs = max_on_circle(f, tract, xs, search).b;
        phi = phi.max(bs - s.b - s.a * (u / s.r).ln_1p());
    }
    let scale = s.a.powf(1.0 - beta) * s.eps;
    PhiSample {
        r: s.r,
        x: s.x,
        phi_hat: phi,
        scale,
        ratio: phi / scale,
        pass: true,
    }
}

fn locate(profile: &GrowthProfile, r: f64) -> Option<&GrowthSample> {
    let x = -(-r).ln_1p();
    profile
        .samples
        .iter()
        .find(|s| (s.x - x).abs() <= 1e-12 * x.abs().max(1.0))
}

/// Local bound `B(s) <= B(r) + a(r) log(s/r) + phi(r)` on
/// `[r - eps(r), r + eps(r)]`. Grid radii reuse the profile sample; other
/// radii are sampled afresh. With `c_fit`, the sample passes when
/// `phi_hat <= 2 c_fit a^{1-beta} eps`.
#[allow(clippy::too_many_arguments)]
pub fn b_local_bound_check(
    profile: &GrowthProfile,
    f: &FunctionSpec,
    tract: &TractSpec,
    search: &CircleSearch,
    eset: &ExceptionalSet,
    r: f64,
    c_fit: Option<f64>,
) -> Result<PhiSample> {
    if eset.contains_r(r) {
        return Err(Error::ExceptionalRadius { r });
    }
    let sample = match locate(profile, r) {
        Some(s) => *s,
        None => sample_growth(f, tract, &profile.params, search, -(-r).ln_1p(), profile.step),
    };
    if !(sample.eps > 0.0) {
        return Err(Error::DomainError {
            what: "a(r) must be at least 2",
            value: sample.a,
        });
    }
    let mut out = phi_at(f, tract, search, &sample, profile.params.beta);
    if let Some(c) = c_fit {
        out.pass = out.ratio <= 2.0 * c;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSweep {
    /// 95th percentile of `phi_hat / (a^{1-beta} eps)` over the swept radii.
    pub c_fit: f64,
    pub samples: Vec<PhiSample>,
    pub l14: FailureSetReport,
}

impl PhiSweep {
    pub fn get(&self, x: f64) -> Option<&PhiSample> {
        self.samples.iter().find(|p| p.x == x)
    }
}

/// `phi_hat` at every non-exceptional grid radius, the fitted constant, and
/// the `L14` failure set of radii exceeding `2 c_fit`.
pub fn b_local_bound_sweep(
    profile: &GrowthProfile,
    f: &FunctionSpec,
    tract: &TractSpec,
    search: &CircleSearch,
    eset: &ExceptionalSet,
) -> PhiSweep {
    let beta = profile.params.beta;
    let mut samples: Vec<PhiSample> = profile
        .samples
        .par_iter()
        .filter(|s| !eset.contains_x(s.x) && s.eps > 0.0)
        .map(|s| phi_at(f, tract, search, s, beta))
        .collect();
    let ratios: Vec<f64> = samples.iter().map(|p| p.ratio).collect();
    let c_fit = percentile(&ratios, 95.0).unwrap_or(0.0);
    for p in &mut samples {
        p.pass = p.ratio <= 2.0 * c_fit;
    }
    let xs = profile.xs();
    let failing: Vec<bool> = xs
        .iter()
        .map(|&x| samples.iter().any(|p| p.x == x && !p.pass))
        .collect();
    let l14 = FailureSetReport::from_flags(ConditionId::L14, &xs, &failing);
    PhiSweep { c_fit, samples, l14 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exceptional::e_set_failure;
    use crate::function_model::x_of_r;
    use crate::growth::{GridSpec, GrowthParams};
    use num_complex::Complex64;

    #[test]
    fn power_law_at_nine_tenths() {
        let f = FunctionSpec::power_law(2.0);
        let t = TractSpec::new(1.0, Complex64::new(0.5, 0.0));
        let params = GrowthParams {
            r0: 0.5,
            ..Default::default()
        };
        let grid = GridSpec { points: 128, span: 6.0 };
        let search = CircleSearch::default();
        let p = GrowthProfile::build(&f, &t, &params, &grid, &search).unwrap();
        let e = e_set_failure(&p);
        assert!(!e.contains_r(0.9));
        let out = b_local_bound_check(&p, &f, &t, &search, &e, 0.9, None).unwrap();
        assert!(out.phi_hat <= 0.01, "{out:?}");
        assert!(out.phi_hat >= 0.0);
        // Independent: the closed-form excess at s = r + eps.
        let s0 = sample_growth(&f, &t, &params, &search, x_of_r(0.9), p.step);
        let s = 0.9 + s0.eps;
        let excess = -2.0 * (1.0 - s).ln() + 2.0 * 0.1f64.ln() - s0.a * (s / 0.9).ln();
        assert!(out.phi_hat >= excess - 1e-9);
    }

    #[test]
    fn exceptional_radius_is_refused() {
        let f = FunctionSpec::power_law(2.0);
        let t = TractSpec::new(1.0, Complex64::new(0.5, 0.0));
        let p = GrowthProfile::build(
            &f,
            &t,
            &GrowthParams {
                r0: 0.5,
                ..Default::default()
            },
            &GridSpec { points: 64, span: 4.0 },
            &CircleSearch::default(),
        )
        .unwrap();
        let mut e = e_set_failure(&p);
        e.e = FailureSetReport::from_intervals(ConditionId::E, vec![(p.samples[0].x, p.samples[10].x)], 0.0);
        let r = p.samples[5].r;
        assert_eq!(
            b_local_bound_check(&p, &f, &t, &CircleSearch::default(), &e, r, None),
            Err(Error::ExceptionalRadius { r })
        );
    }
}
