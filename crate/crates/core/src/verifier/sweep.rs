use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local::{higher_logderiv_check, logderiv_check, logderiv_tolerance, monomial_check, tract_disc_check};
use super::{CheckId, VerificationReport, VerifierKnobs};
use crate::error::{Error, Result};
use crate::exceptional::{ExceptionalSet, PhiSweep};
use crate::function_model::{FunctionSpec, TractSpec};
use crate::growth::{order_estimate, scan_windows, GrowthProfile, GrowthSample, WindowScan};
use crate::numeric::{non_increasing, quartile_maxima};

/// Samples of the upper half of the grid outside `E` with a defined `eps`.
pub fn tail_samples(profile: &GrowthProfile, eset: &ExceptionalSet) -> Vec<GrowthSample> {
    profile.samples[profile.tail_start()..]
        .iter()
        .filter(|s| !eset.contains_x(s.x) && s.eps > 0.0)
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum PipelineStatus {
    Ran,
    Skipped(String),
}

fn rate(records: &[VerificationReport], check: CheckId) -> f64 {
    let (n, ok) = records
        .iter()
        .filter(|r| r.check == check)
        .fold((0usize, 0usize), |(n, ok), r| (n + 1, ok + r.pass as usize));
    if n == 0 {
        0.0
    } else {
        ok as f64 / n as f64
    }
}

fn errors(records: &[VerificationReport], check: CheckId) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.check == check)
        .map(|r| r.max_rel_err)
        .collect()
}

fn clamp_below(maxima: [Option<f64>; 4], floor: f64) -> [Option<f64>; 4] {
    maxima.map(|m| m.map(|v| v.max(floor)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm1Sweep {
    pub radii: usize,
    pub tract_pass_rate: f64,
    pub monomial_pass_rate: f64,
    pub logderiv_pass_rate: f64,
    pub monomial_quartiles: [Option<f64>; 4],
    pub logderiv_quartiles: [Option<f64>; 4],
    pub trend_ok: bool,
    pub pass: bool,
    pub records: Vec<VerificationReport>,
}

/// Disc-in-tract, monomial and log-derivative checks at every
/// non-exceptional tail radius. Passes when each check passes at the
/// configured fraction of radii and both error series are non-increasing
/// across tail quartiles, up to `trend_resolution`.
pub fn thm1_sweep(
    f: &FunctionSpec,
    tract: &TractSpec,
    profile: &GrowthProfile,
    eset: &ExceptionalSet,
    phi: Option<&PhiSweep>,
    knobs: &VerifierKnobs,
) -> Result<Thm1Sweep> {
    let (beta, delta) = (profile.params.beta, profile.params.delta);
    let tail = tail_samples(profile, eset);
    let per_radius: Vec<[VerificationReport; 3]> = tail
        .par_iter()
        .map(|s| {
            let sigma = s.eps / knobs.sigma_divisor;
            let phi_hat = phi
                .filter(|_| knobs.phi_tolerance)
                .and_then(|p| p.get(s.x))
                .map_or(0.0, |p| p.phi_hat);
            let tol = knobs.base_tol.max(2.0 * phi_hat);
            Ok([
                tract_disc_check(f, tract, s, sigma, knobs.disc_layout()),
                monomial_check(f, s, sigma, tol, knobs.disc_layout(), knobs.path_steps)?,
                logderiv_check(
                    f,
                    s,
                    knobs.logderiv_t * sigma,
                    logderiv_tolerance(s.a, beta, delta, knobs),
                    knobs.disc_layout(),
                )?,
            ])
        })
        .collect::<Result<_>>()?;
    let records: Vec<VerificationReport> = per_radius.into_iter().flatten().collect();

    let monomial_quartiles = quartile_maxima(&errors(&records, CheckId::Monomial));
    let logderiv_quartiles = quartile_maxima(&errors(&records, CheckId::Logderiv));
    let floor = knobs.trend_resolution;
    let trend_ok = non_increasing(&clamp_below(monomial_quartiles, floor))
        && non_increasing(&clamp_below(logderiv_quartiles, floor));
    let tract_pass_rate = rate(&records, CheckId::TractDisc);
    let monomial_pass_rate = rate(&records, CheckId::Monomial);
    let logderiv_pass_rate = rate(&records, CheckId::Logderiv);
    let need = knobs.sweep_pass_rate;
    let pass = !tail.is_empty()
        && trend_ok
        && tract_pass_rate >= need
        && monomial_pass_rate >= need
        && logderiv_pass_rate >= need;
    Ok(Thm1Sweep {
        radii: tail.len(),
        tract_pass_rate,
        monomial_pass_rate,
        logderiv_pass_rate,
        monomial_quartiles,
        logderiv_quartiles,
        trend_ok,
        pass,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm2Sweep {
    pub status: PipelineStatus,
    pub order: Option<f64>,
    pub scan: Option<WindowScan>,
    pub radii: usize,
    pub pass: bool,
    pub records: Vec<VerificationReport>,
}

impl Thm2Sweep {
    fn skipped(reason: String, order: Option<f64>, scan: Option<WindowScan>) -> Self {
        Self {
            status: PipelineStatus::Skipped(reason),
            order,
            scan,
            radii: 0,
            pass: true,
            records: Vec::new(),
        }
    }
}

/// Higher log-derivative checks at every non-exceptional grid radius inside
/// an accepted positive-order window, with `a(r) eps(r)` recorded alongside.
///
/// Skipped (and not failing) when `rho0` is unset, the order does not
/// exceed `rho0`, or no window is accepted. Otherwise every record must pass.
pub fn thm2_sweep(
    f: &FunctionSpec,
    profile: &GrowthProfile,
    eset: &ExceptionalSet,
    knobs: &VerifierKnobs,
) -> Result<Thm2Sweep> {
    let params = &profile.params;
    let order = match profile.order_estimate {
        Some(o) => o,
        None => order_estimate(profile)?,
    };
    if order < knobs.zero_order_max {
        return Ok(Thm2Sweep::skipped(
            format!("order 0, estimate {order:.3}"),
            Some(order),
            None,
        ));
    }
    let Some(rho0) = params.rho0 else {
        return Ok(Thm2Sweep::skipped("rho0 not set".into(), Some(order), None));
    };
    if order <= rho0 {
        return Ok(Thm2Sweep::skipped(
            format!("order {order:.2} does not exceed rho0 = {rho0}"),
            Some(order),
            None,
        ));
    }
    let scan = match scan_windows(params, profile, knobs.window_threshold) {
        Ok(s) => s,
        Err(Error::Precondition(reason)) => return Ok(Thm2Sweep::skipped(reason, Some(order), None)),
        Err(e) => return Err(e),
    };
    if scan.accepted.is_empty() {
        let reason = format!(
            "no accepted window (best diagnostic {:.4}, threshold {})",
            scan.best_diagnostic, knobs.window_threshold
        );
        return Ok(Thm2Sweep::skipped(reason, Some(order), Some(scan)));
    }
    let chosen: Vec<(GrowthSample, usize)> = profile
        .samples
        .iter()
        .filter(|s| !eset.contains_x(s.x) && s.eps > 0.0)
        .filter_map(|s| scan.accepted.iter().position(|w| w.contains_x(s.x)).map(|i| (*s, i)))
        .collect();
    if chosen.is_empty() {
        return Ok(Thm2Sweep::skipped(
            "no admissible radius inside the accepted windows".into(),
            Some(order),
            Some(scan),
        ));
    }
    let per_radius: Vec<Vec<VerificationReport>> = chosen
        .par_iter()
        .map(|(s, i)| {
            let mut reps = higher_logderiv_check(f, &scan.accepted[*i], s, eset, params.beta, params.delta, knobs)?;
            let a_eps = s.a * s.eps;
            let mut rep = VerificationReport::new(CheckId::AepsDivergence, s.r, 0.0, reps[0].probes);
            rep.max_rel_err = a_eps;
            rep.tolerance = knobs.aeps_min;
            rep.pass = a_eps >= knobs.aeps_min;
            rep.a_eps = Some(a_eps);
            reps.push(rep);
            Ok(reps)
        })
        .collect::<Result<_>>()?;
    let records: Vec<VerificationReport> = per_radius.into_iter().flatten().collect();
    let pass = records.iter().all(|r| r.pass);
    Ok(Thm2Sweep {
        status: PipelineStatus::Ran,
        order: Some(order),
        scan: Some(scan),
        radii: chosen.len(),
        pass,
        records,
    })
}
