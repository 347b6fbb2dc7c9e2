use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::probes::disc_probes;
use super::sweep::tail_samples;
use super::{CheckId, VerificationReport, VerifierKnobs};
use crate::error::{Error, Result};
use crate::exceptional::ExceptionalSet;
use crate::function_model::FunctionSpec;
use crate::growth::{order_estimate, GrowthProfile, GrowthSample};
use crate::numeric::{non_increasing, quartile_maxima};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroOrderReport {
    pub order: f64,
    /// Fitted constant of the derivative bound, per `q = 1..=M`.
    pub c_fit: Vec<f64>,
    /// Quartile maxima of `log a / log(1/(1-r)) - 1` over the tail.
    pub excess_quartiles: [Option<f64>; 4],
    /// Quartile maxima of `a eps` over the tail.
    pub aeps_quartiles: [Option<f64>; 4],
    pub excess_trend_ok: bool,
    pub aeps_trend_ok: bool,
    /// Smallest `|L_2 z_r^2 / a^2 - 1|` over the tail.
    pub negative_control_min: Option<f64>,
    pub records: Vec<VerificationReport>,
    pub pass: bool,
}

struct RadiusValues {
    excess: f64,
    aeps: f64,
    /// `(ratio, radius, worst probe)` per `q`.
    bound: Vec<(f64, f64, Complex64)>,
    control: f64,
    probes: usize,
}

fn radius_values(f: &FunctionSpec, s: &GrowthSample, beta: f64, knobs: &VerifierKnobs) -> Result<RadiusValues> {
    let m = knobs.max_q;
    let sigma = s.eps / knobs.sigma_divisor;
    let z_r = s.z_r();
    let layout = knobs.higher_layout();
    let mut bound = Vec::with_capacity(m);
    for q in 1..=m {
        let radius = (2.0 - q as f64 / m as f64) * sigma;
        // log of a (1/(1-r))^{(q-1)(1+beta+margin)}
        let ln_scale = s.a.ln() + (q - 1) as f64 * (1.0 + beta + knobs.zero_order_margin) * s.x;
        let mut best = (0.0, radius, Complex64::new(0.0, 0.0));
        for d in disc_probes(radius, layout) {
            let l = f.logderiv_tower(&z_r.shifted(d), q)?[q - 1];
            let ratio = (l.norm().ln() - ln_scale).exp();
            let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
            if ratio > best.0 {
                best = (ratio, radius, d);
            }
        }
        bound.push(best);
    }
    let tower = f.logderiv_tower(&z_r, 2)?;
    let s2 = z_r.z / s.a;
    let control = (tower[1] * s2 * s2 - 1.0).norm();
    Ok(RadiusValues {
        excess: s.a.ln() / s.x - 1.0,
        aeps: s.a * s.eps,
        bound,
        control,
        probes: layout.count(),
    })
}

/// Index boundaries of the four tail quartiles.
fn quartile_of(i: usize, n: usize) -> usize {
    (0..4).rev().find(|&k| i >= k * n / 4).unwrap_or(0)
}

/// Per-quartile maxima, with the previous quartile's maximum as the bound
/// each sample must respect (the first quartile bounds itself).
fn previous_quartile_bound(values: &[f64], i: usize) -> f64 {
    let qm = quartile_maxima(values);
    let k = quartile_of(i, values.len());
    qm[k.saturating_sub(1)].or(qm[k]).unwrap_or(f64::INFINITY)
}

/// Zero-order upper bounds over the non-exceptional tail:
///
/// * `log a / log(1/(1-r)) - 1` is bounded by a slack that shrinks from one
///   tail quartile to the next;
/// * `a eps` decreases across tail quartiles;
/// * `|L_q| <= C_fit a (1/(1-r))^{(q-1)(1+beta+margin)}` on
///   `D(z_r, (2 - q/M) sigma)`, with `C_fit` fitted on the first tail quartile.
///
/// With a positive `negative_control_floor`, `|L_2 z_r^2 / a^2 - 1|` must
/// stay above it: the second derivative is not asymptotic to `(a/z)^2`.
pub fn zero_order_checks(
    f: &FunctionSpec,
    profile: &GrowthProfile,
    eset: &ExceptionalSet,
    knobs: &VerifierKnobs,
) -> Result<ZeroOrderReport> {
    let order = match profile.order_estimate {
        Some(o) => o,
        None => order_estimate(profile)?,
    };
    if order >= knobs.zero_order_max {
        return Err(Error::NotZeroOrder { order });
    }
    let beta = profile.params.beta;
    let tail = tail_samples(profile, eset);
    let values: Vec<RadiusValues> = tail
        .par_iter()
        .map(|s| radius_values(f, s, beta, knobs))
        .collect::<Result<_>>()?;
    let n = tail.len();
    let q1_end = n / 4;

    let excess: Vec<f64> = values.iter().map(|v| v.excess).collect();
    let aeps: Vec<f64> = values.iter().map(|v| v.aeps).collect();
    let excess_quartiles = quartile_maxima(&excess);
    let aeps_quartiles = quartile_maxima(&aeps);
    let present: Vec<f64> = aeps_quartiles.iter().flatten().copied().collect();
    let aeps_trend_ok = present.windows(2).all(|w| w[1] < w[0]);
    let excess_trend_ok = non_increasing(&excess_quartiles);

    let c_fit: Vec<f64> = (0..knobs.max_q)
        .map(|q| {
            values[..q1_end.max(1).min(n)]
                .iter()
                .map(|v| v.bound[q].0)
                .fold(0.0, f64::max)
        })
        .collect();

    let mut records = Vec::new();
    for (i, (s, v)) in tail.iter().zip(&values).enumerate() {
        let sigma = s.eps / knobs.sigma_divisor;

        let mut rep = VerificationReport::new(CheckId::ZeroOrderGrowth, s.r, 0.0, v.probes);
        rep.max_rel_err = v.excess.max(0.0);
        rep.tolerance = previous_quartile_bound(&excess, i).max(0.0);
        rep.pass = rep.max_rel_err <= rep.tolerance;
        records.push(rep);

        let mut rep = VerificationReport::new(CheckId::ZeroOrderAeps, s.r, 0.0, v.probes);
        rep.max_rel_err = v.aeps;
        rep.tolerance = previous_quartile_bound(&aeps, i);
        rep.pass = v.aeps <= rep.tolerance;
        rep.a_eps = Some(v.aeps);
        records.push(rep);

        for (q, &(ratio, radius, at)) in v.bound.iter().enumerate() {
            let mut rep = VerificationReport::new(CheckId::ZeroOrderBound, s.r, radius, v.probes);
            rep.q = Some(q + 1);
            rep.max_rel_err = ratio;
            rep.tolerance = c_fit[q];
            rep.pass = i < q1_end || ratio <= c_fit[q];
            rep.worst_probe = Some(at);
            records.push(rep);
        }

        if knobs.negative_control_floor > 0.0 {
            let mut rep = VerificationReport::new(CheckId::NegativeControl, s.r, sigma, 1);
            rep.q = Some(2);
            rep.max_rel_err = v.control;
            rep.tolerance = knobs.negative_control_floor;
            rep.pass = v.control >= knobs.negative_control_floor;
            records.push(rep);
        }
    }
    let negative_control_min = values.iter().map(|v| v.control).reduce(f64::min);
    let pass = n > 0 && excess_trend_ok && aeps_trend_ok && records.iter().all(|r| r.pass);
    Ok(ZeroOrderReport {
        order,
        c_fit,
        excess_quartiles,
        aeps_quartiles,
        excess_trend_ok,
        aeps_trend_ok,
        negative_control_min,
        records,
        pass,
    })
}
