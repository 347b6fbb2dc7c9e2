use serde::{Deserialize, Serialize};

use super::{ConditionId, FailureSetReport};
use crate::growth::GrowthProfile;
use crate::numeric::{interp_linear, running_max};

/// Length of the clean run that ends the initial segment `[r0, r0']`.
const CLEAN_RUN: usize = 8;

/// Per-sample failure flags (`true` = the condition fails).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleFlags {
    pub r: f64,
    pub x: f64,
    pub l5: bool,
    pub l6: bool,
    pub l7: bool,
    pub in_e: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub l5: FailureSetReport,
    pub l6: FailureSetReport,
    pub l7: FailureSetReport,
    pub union: FailureSetReport,
    pub e: FailureSetReport,
    pub r0_prime: f64,
    /// `eps(r)` is narrower than a grid cell at more than half of the samples,
    /// so `a(r +- eps)` relies on sub-cell interpolation.
    pub grid_too_coarse: bool,
    pub samples: Vec<SampleFlags>,
}

impl ExceptionalSet {
    pub fn contains_x(&self, x: f64) -> bool {
        self.e.contains_x(x)
    }

    pub fn contains_r(&self, r: f64) -> bool {
        self.contains_x(-(-r).ln_1p())
    }
}

/// Measures where
///
/// * `a(r + eps) < a(r) + a(r)^{1-beta}`,
/// * `a(r - eps) > a(r) - a(r)^{1-beta}`,
/// * `(1 - r) a(r) < B(r)^{1+beta}`
///
/// fail on a validated profile. `a(r +- eps)` comes from the monotone
/// (running-maximum) piecewise-linear interpolant of the `a`-grid in `x`,
/// extended linearly past the ends.
pub fn e_set_failure(profile: &GrowthProfile) -> ExceptionalSet {
    let beta = profile.params.beta;
    let xs = profile.xs();
    let a_mono = running_max(&profile.a_values());
    let n = xs.len();
    let mut l5 = vec![false; n];
    let mut l6 = vec![false; n];
    let mut l7 = vec![false; n];
    let mut narrow = 0usize;
    for (i, s) in profile.samples.iter().enumerate() {
        let w = s.one_minus_r();
        let jump = s.a.powf(1.0 - beta);
        if s.eps.is_finite() && s.eps > 0.0 {
            let x_plus = s.x - (-s.eps / w).ln_1p();
            let x_minus = s.x - (s.eps / w).ln_1p();
            l5[i] = !(interp_linear(&xs, &a_mono, x_plus) < s.a + jump);
            l6[i] = !(interp_linear(&xs, &a_mono, x_minus) > s.a - jump);
        } else {
            l5[i] = true;
            l6[i] = true;
        }
        l7[i] = !(w * s.a < s.b.powf(1.0 + beta));
        let cell = if i + 1 < n {
            profile.samples[i + 1].r - s.r
        } else if i > 0 {
            s.r - profile.samples[i - 1].r
        } else {
            f64::INFINITY
        };
        if s.eps < cell {
            narrow += 1;
        }
    }

    let union_flags: Vec<bool> = (0..n).map(|i| l5[i] || l6[i] || l7[i]).collect();
    let first_clean = (0..n).find(|&i| i + CLEAN_RUN <= n && union_flags[i..i + CLEAN_RUN].iter().all(|f| !f));
    let (r0_prime_idx, initial) = match first_clean {
        Some(0) => (0, None),
        Some(i) => (i, Some((xs[0], xs[i]))),
        None => (n - 1, Some((xs[0], xs[n - 1]))),
    };

    let l5r = FailureSetReport::from_flags(ConditionId::L5, &xs, &l5);
    let l6r = FailureSetReport::from_flags(ConditionId::L6, &xs, &l6);
    let l7r = FailureSetReport::from_flags(ConditionId::L7, &xs, &l7);
    let union = FailureSetReport::from_flags(ConditionId::Union, &xs, &union_flags);

    let mut intervals: Vec<(f64, f64)> = union.cells.iter().map(|c| (c.x_lo, c.x_hi)).collect();
    intervals.extend(initial);
    let probe = FailureSetReport::from_intervals(ConditionId::E, intervals.clone(), 0.0);
    let in_e: Vec<bool> = xs.iter().map(|&x| probe.contains_x(x)).collect();
    let fraction = if n == 0 {
        0.0
    } else {
        in_e.iter().filter(|&&b| b).count() as f64 / n as f64
    };
    let e = FailureSetReport::from_intervals(ConditionId::E, intervals, fraction);

    let samples = profile
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| SampleFlags {
            r: s.r,
            x: s.x,
            l5: l5[i],
            l6: l6[i],
            l7: l7[i],
            in_e: in_e[i],
        })
        .collect();

    ExceptionalSet {
        l5: l5r,
        l6: l6r,
        l7: l7r,
        union,
        e,
        r0_prime: profile.samples.get(r0_prime_idx).map_or(f64::NAN, |s| s.r),
        grid_too_coarse: 2 * narrow > n,
        samples,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct E2Integral {
    /// Trapezoid value of `int a(r)/B(r)^{1+beta} dr/r` over the grid.
    pub numeric: f64,
    /// `(B(r0)^{-beta} - B(r_max)^{-beta})/beta`.
    pub antiderivative: f64,
}

impl E2Integral {
    pub fn relative_gap(&self) -> f64 {
        if self.antiderivative == 0.0 {
            self.numeric.abs()
        } else {
            ((self.numeric - self.antiderivative) / self.antiderivative).abs()
        }
    }
}

/// The integral `int a(r)/B(r)^{1+beta} dr/r`, by the trapezoid rule in `x`
/// (`dr/r = (1-r)/r dx`), alongside its closed-form value.
pub fn e2_integral_check(profile: &GrowthProfile) -> E2Integral {
    let beta = profile.params.beta;
    let s = &profile.samples;
    if s.len() < 2 {
        return E2Integral {
            numeric: 0.0,
            antiderivative: 0.0,
        };
    }
    let integrand: Vec<f64> = s
        .iter()
        .map(|p| p.a * p.one_minus_r() / p.r / p.b.powf(1.0 + beta))
        .collect();
    let numeric = s
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(p, f)| 0.5 * (f[0] + f[1]) * (p[1].x - p[0].x))
        .sum();
    let (b0, b1) = (s[0].b, s[s.len() - 1].b);
    E2Integral {
        numeric,
        antiderivative: (b0.powf(-beta) - b1.powf(-beta)) / beta,
    }
}
