use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_model::{DiscPoint, FunctionSpec};
use crate::numeric::complex_derivative;

/// Radius of the disc the probes are drawn from.
const PROBE_RADIUS: f64 = 0.9;
/// Probes closer than this to a singularity are redrawn.
const MIN_SEPARATION: f64 = 0.05;
/// Differentiation step relative to the distance to the nearest singularity.
const REL_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub probes: Vec<Complex64>,
    /// Largest `|L_{q+1} - L_q L_1 - L_q'| / |L_{q+1}|` over the probes, for `q = 1..=max_q`.
    pub max_rel_err: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// `L_{q+1} = L_q L_1 + L_q'` with the tower evaluated analytically and
/// `L_q'` by Richardson-extrapolated central differences, at `count`
/// seeded random points of `|z| < 0.9`.
pub fn recurrence_check(
    f: &FunctionSpec,
    max_q: usize,
    count: usize,
    seed: u64,
    tolerance: f64,
) -> Result<RecurrenceReport> {
    if max_q == 0 || count == 0 {
        return Err(Error::Precondition("need max_q >= 1 and at least one probe".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::with_capacity(count);
    let mut attempts = 0;
    while probes.len() < count {
        attempts += 1;
        if attempts > 1000 * count {
            return Err(Error::Precondition("no probe keeps clear of the singularities".into()));
        }
        let rho = PROBE_RADIUS * rng.gen::<f64>().sqrt();
        let z = Complex64::from_polar(rho, TAU * rng.gen::<f64>());
        if f.singularity_distance(&DiscPoint::new(z)) >= MIN_SEPARATION {
            probes.push(z);
        }
    }

    let mut max_rel_err = vec![0.0f64; max_q];
    for &z in &probes {
        let p = DiscPoint::new(z);
        let tower = f.logderiv_tower(&p, max_q + 1)?;
        let h = REL_STEP * f.singularity_distance(&p);
        for q in 1..=max_q {
            let lq = |u: Complex64| {
                f.logderiv_tower(&DiscPoint::new(u), q)
                    .map_or(Complex64::new(f64::NAN, f64::NAN), |t| t[q - 1])
            };
            let d = complex_derivative(lq, z, h);
            let predicted = tower[q - 1] * tower[0] + d;
            let err = (tower[q] - predicted).norm() / tower[q].norm();
            let err = if err.is_nan() { f64::INFINITY } else { err };
            max_rel_err[q - 1] = max_rel_err[q - 1].max(err);
        }
    }
    let pass = max_rel_err.iter().all(|&e| e <= tolerance);
    Ok(RecurrenceReport {
        probes,
        max_rel_err,
        tolerance,
        pass,
    })
}
