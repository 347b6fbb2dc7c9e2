use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::probes::{disc_probes, ProbeLayout};
use super::{CheckId, VerificationReport};
use crate::error::{Error, Result};
use crate::function_model::series;
use crate::numeric::golden_section_max;

const SCAN: usize = 4096;

/// Point of maximum modulus on `|z| = r`; ties go to the smallest angle.
fn max_modulus_point(coefficients: &[Complex64], r: f64) -> Complex64 {
    let value = |t: f64| series::eval(coefficients, Complex64::from_polar(r, t)).ln_abs();
    let step = TAU / SCAN as f64;
    let (mut best_j, mut best) = (0, f64::NEG_INFINITY);
    for j in 0..SCAN {
        let v = value(j as f64 * step);
        if v > best {
            (best_j, best) = (j, v);
        }
    }
    let t0 = best_j as f64 * step;
    let (t, v) = golden_section_max(value, t0 - step, t0 + step, 1e-12);
    let theta = if v > best { t } else { t0 };
    Complex64::from_polar(r, theta)
}

/// Entire-function asymptotics at the maximum-modulus point:
/// `f(z) ~ (z/z_r)^N f(z_r)` and `f^{(q)}(z)/f(z) ~ (N/z)^q` for
/// `z = z_r e^t`, `|t| < N^{-gamma_exp}`, `N` the central index.
///
/// `max_rel_err` is the largest error over both relations and `q <= max_q`;
/// `secondary` is the first relation alone.
pub fn classical_asym_check(
    coefficients: &[Complex64],
    r: f64,
    gamma_exp: f64,
    max_q: usize,
    tol: f64,
    layout: ProbeLayout,
) -> Result<VerificationReport> {
    if !(gamma_exp > 0.5) {
        return Err(Error::DomainError {
            what: "gamma_exp must exceed 1/2",
            value: gamma_exp,
        });
    }
    if !(r > 0.0) || coefficients.is_empty() {
        return Err(Error::Precondition("need coefficients and r > 0".into()));
    }
    let (_, n) = series::max_term(coefficients, r);
    let degree = coefficients.len() - 1;
    if 2 * n > degree {
        return Err(Error::TruncationDominates { index: n, degree });
    }
    if n == 0 {
        return Err(Error::Precondition(format!("central index is 0 at r = {r}")));
    }
    let nf = n as f64;
    let z_r = max_modulus_point(coefficients, r);
    let f_r = series::eval(coefficients, z_r);
    let radius = nf.powf(-gamma_exp);
    let offsets = disc_probes(radius, layout);

    let mut asym = 0.0f64;
    let mut worst = (0.0f64, Complex64::new(0.0, 0.0));
    for &t in &offsets {
        let z = z_r * t.exp();
        let fz = series::eval(coefficients, z);
        let e0 = (fz.ratio(&f_r) * (-nf * t).exp() - 1.0).norm();
        asym = asym.max(e0);
        let mut e = e0;
        for q in 1..=max_q {
            let ratio = series::eval_derivative(coefficients, z, q).ratio(&fz);
            e = e.max((ratio * (z / nf).powi(q as i32) - 1.0).norm());
        }
        let e = if e.is_nan() { f64::INFINITY } else { e };
        if e > worst.0 {
            worst = (e, t);
        }
    }
    let mut rep = VerificationReport::new(CheckId::ClassicalAsym, r, radius, offsets.len());
    rep.q = Some(max_q);
    rep.max_rel_err = worst.0;
    rep.tolerance = tol;
    rep.pass = worst.0 <= tol;
    rep.worst_probe = Some(worst.1);
    rep.secondary = Some(asym);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSweep {
    pub records: Vec<VerificationReport>,
    pub central_index: Vec<usize>,
    pub pass_rate: f64,
    pub pass: bool,
}

/// `classical_asym_check` at each radius; isolated failures are tolerated
/// as long as the pass rate reaches `min_rate`.
pub fn classical_sweep(
    coefficients: &[Complex64],
    radii: &[f64],
    gamma_exp: f64,
    max_q: usize,
    tol: f64,
    min_rate: f64,
    layout: ProbeLayout,
) -> Result<ClassicalSweep> {
    let records: Vec<VerificationReport> = radii
        .par_iter()
        .map(|&r| classical_asym_check(coefficients, r, gamma_exp, max_q, tol, layout))
        .collect::<Result<_>>()?;
    let central_index = radii.iter().map(|&r| series::max_term(coefficients, r).1).collect();
    let passed = records.iter().filter(|r| r.pass).count();
    let pass_rate = if records.is_empty() {
        1.0
    } else {
        passed as f64 / records.len() as f64
    };
    Ok(ClassicalSweep {
        records,
        central_index,
        pass_rate,
        pass: pass_rate >= min_rate,
    })
}
