use num_complex::Complex64;

use super::probes::{disc_probes, ProbeLayout};
use super::{CheckId, VerificationReport, VerifierKnobs};
use crate::error::{Error, Result};
use crate::exceptional::ExceptionalSet;
use crate::function_model::{clog1p, DiscPoint, FunctionSpec, TractSpec};
use crate::growth::{GrowthSample, PositiveOrderWindow};

/// Largest value and its probe; `NaN` counts as infinitely bad.
fn worst(values: impl IntoIterator<Item = (f64, Complex64)>) -> (f64, Complex64) {
    values.into_iter().fold((0.0, Complex64::new(0.0, 0.0)), |acc, (v, d)| {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > acc.0 {
            (v, d)
        } else {
            acc
        }
    })
}

/// Whether `D(z_r, 4 sigma)` lies in the tract: `|f| > R` at every probe and
/// no pole inside. Failures are recorded in the report, never returned.
pub fn tract_disc_check(
    f: &FunctionSpec,
    tract: &TractSpec,
    sample: &GrowthSample,
    sigma: f64,
    layout: ProbeLayout,
) -> VerificationReport {
    let radius = 4.0 * sigma;
    let z_r = sample.z_r();
    let lr = tract.ln_threshold();
    let offsets = disc_probes(radius, layout);
    let mut failed = 0usize;
    let mut margin = f64::INFINITY;
    let mut worst_probe = Complex64::new(0.0, 0.0);
    for &d in &offsets {
        let p = z_r.shifted(d);
        let m = if p.in_disc() {
            f.ln_abs(&p) - lr
        } else {
            f64::NEG_INFINITY
        };
        if !(m > 0.0) {
            failed += 1;
        }
        if !(m >= margin) {
            margin = m;
            worst_probe = d;
        }
    }
    // (1 - p) - (1 - z_r) keeps the separation accurate near the boundary.
    let pole_inside = f
        .poles()
        .iter()
        .any(|p| (z_r.w - (Complex64::new(1.0, 0.0) - p)).norm() <= radius);
    let mut rep = VerificationReport::new(CheckId::TractDisc, sample.r, radius, offsets.len());
    rep.max_rel_err = failed as f64 / offsets.len() as f64;
    rep.pass = failed == 0 && !pole_inside;
    rep.worst_probe = Some(worst_probe);
    rep.secondary = Some(margin);
    rep
}

/// `g(z) = log f(z) - log f(z_r) - a_r log(z / z_r)` at `z = z_r + d`, both
/// logarithms continued from `z_r` where they vanish.
pub fn g_eval(f: &FunctionSpec, z_r: &DiscPoint, a_r: f64, d: Complex64, steps: usize) -> Result<Complex64> {
    if d == Complex64::new(0.0, 0.0) {
        return Ok(d);
    }
    Ok(f.log_ratio(z_r, d, steps)? - a_r * clog1p(d / z_r.z))
}

/// `sup |g|` over `D(z_r, radius)`; passes when it is at most `tol`. The
/// secondary value is the matching relative error `|e^g - 1|`.
pub fn monomial_check(
    f: &FunctionSpec,
    sample: &GrowthSample,
    radius: f64,
    tol: f64,
    layout: ProbeLayout,
    steps: usize,
) -> Result<VerificationReport> {
    let z_r = sample.z_r();
    let offsets = disc_probes(radius, layout);
    let mut gs = Vec::with_capacity(offsets.len());
    for &d in &offsets {
        gs.push((g_eval(f, &z_r, sample.a, d, steps)?, d));
    }
    let (sup, at) = worst(gs.iter().map(|(g, d)| (g.norm(), *d)));
    let (rel, _) = worst(gs.iter().map(|(g, d)| ((g.exp() - 1.0).norm(), *d)));
    let mut rep = VerificationReport::new(CheckId::Monomial, sample.r, radius, offsets.len());
    rep.max_rel_err = sup;
    rep.tolerance = tol;
    rep.pass = sup <= tol;
    rep.worst_probe = Some(at);
    rep.secondary = Some(rel);
    Ok(rep)
}

/// `max(base_tol, 5 C_g / (a^beta (log a)^{1+delta}))`.
pub fn logderiv_tolerance(a: f64, beta: f64, delta: f64, knobs: &VerifierKnobs) -> f64 {
    let la = a.ln();
    let scale = if la > 0.0 {
        5.0 * knobs.c_g / (a.powf(beta) * la.powf(1.0 + delta))
    } else {
        f64::INFINITY
    };
    knobs.base_tol.max(scale)
}

/// `max |L_q(z) z^q / a^q - 1|` for `q = 1..=m` over the probes.
fn tower_errors(
    f: &FunctionSpec,
    sample: &GrowthSample,
    offsets: &[Complex64],
    m: usize,
) -> Result<Vec<(f64, Complex64)>> {
    let z_r = sample.z_r();
    let mut out = vec![(0.0, Complex64::new(0.0, 0.0)); m];
    for &d in offsets {
        let p = z_r.shifted(d);
        let tower = f.logderiv_tower(&p, m)?;
        let s = p.z / sample.a;
        let mut pow = Complex64::new(1.0, 0.0);
        for (q, l) in tower.iter().enumerate() {
            pow *= s;
            let e = (l * pow - 1.0).norm();
            let e = if e.is_nan() { f64::INFINITY } else { e };
            if e > out[q].0 {
                out[q] = (e, d);
            }
        }
    }
    Ok(out)
}

/// `max |L_1(z) z / a_r - 1|` over `D(z_r, radius)`; passes when at most `tol`.
pub fn logderiv_check(
    f: &FunctionSpec,
    sample: &GrowthSample,
    radius: f64,
    tol: f64,
    layout: ProbeLayout,
) -> Result<VerificationReport> {
    let offsets = disc_probes(radius, layout);
    let (err, at) = tower_errors(f, sample, &offsets, 1)?[0];
    let mut rep = VerificationReport::new(CheckId::Logderiv, sample.r, radius, offsets.len());
    rep.max_rel_err = err;
    rep.tolerance = tol;
    rep.pass = err <= tol;
    rep.worst_probe = Some(at);
    Ok(rep)
}

/// `max |L_q(z) z^q / a_r^q - 1|` on `D(z_r, eps/2048)` for each `q <= M`,
/// passing when at most `q tol_1`. Each record carries `a(r) eps(r)`.
pub fn higher_logderiv_check(
    f: &FunctionSpec,
    window: &PositiveOrderWindow,
    sample: &GrowthSample,
    eset: &ExceptionalSet,
    beta: f64,
    delta: f64,
    knobs: &VerifierKnobs,
) -> Result<Vec<VerificationReport>> {
    if !window.contains_x(sample.x) {
        return Err(Error::WindowRejected {
            diagnostic: window.diagnostic,
            reason: format!("r = {} lies outside [{}, {}]", sample.r, window.r_n, window.r_n_prime),
        });
    }
    if eset.contains_x(sample.x) {
        return Err(Error::ExceptionalRadius { r: sample.r });
    }
    if !(sample.eps > 0.0) {
        return Err(Error::DomainError {
            what: "a(r) must be at least 2",
            value: sample.a,
        });
    }
    let radius = sample.eps / knobs.sigma_divisor;
    let layout = knobs.higher_layout();
    let offsets = disc_probes(radius, layout);
    let tol1 = logderiv_tolerance(sample.a, beta, delta, knobs);
    let a_eps = sample.a * sample.eps;
    let errs = tower_errors(f, sample, &offsets, knobs.max_q)?;
    Ok(errs
        .into_iter()
        .enumerate()
        .map(|(i, (err, at))| {
            let q = i + 1;
            let mut rep = VerificationReport::new(CheckId::HigherLogderiv, sample.r, radius, offsets.len());
            rep.q = Some(q);
            rep.max_rel_err = err;
            rep.tolerance = q as f64 * tol1;
            rep.pass = err <= rep.tolerance;
            rep.worst_probe = Some(at);
            rep.a_eps = Some(a_eps);
            rep
        })
        .collect())
}
