use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::function_model::{DiscPoint, FunctionSpec, TractSpec};
use crate::numeric::golden_section_max;

/// Knobs of the maximum-modulus search on a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleSearch {
    pub samples: usize,
    pub theta_tol: f64,
    pub refine_candidates: usize,
}

impl Default for CircleSearch {
    fn default() -> Self {
        Self {
            samples: 4096,
            theta_tol: 1e-12,
            refine_candidates: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleMax {
    pub b: f64,
    pub theta_r: f64,
}

/// Membership tests attempted before a circle is declared to miss the tract.
const MAX_MEMBERSHIP_ATTEMPTS: usize = 64;

/// Relative tolerance under which two circle values count as a tie.
const TIE_REL: f64 = 1e-13;

/// `B(r) = max_theta v(r e^{i theta})` on the circle with `r = 1 - e^{-x}`.
///
/// A dense scan locates the best tract samples, and golden-section search
/// refines each promising local maximum. Ties go to the smallest
/// non-negative angle.
pub fn max_on_circle(f: &FunctionSpec, tract: &TractSpec, x: f64, search: &CircleSearch) -> CircleMax {
    let n = search.samples.max(8);
    let lr = tract.ln_threshold();
    let step = TAU / n as f64;
    let theta = |j: usize| j as f64 * step;
    let value = |t: f64| f.ln_abs(&DiscPoint::on_circle(x, t)) - lr;
    let vals: Vec<f64> = (0..n).map(|j| value(theta(j))).collect();

    let mut order: Vec<usize> = (0..n).filter(|&j| vals[j] > 0.0).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));

    let is_local_max = |j: usize| {
        let prev = vals[(j + n - 1) % n];
        let next = vals[(j + 1) % n];
        vals[j] >= prev && vals[j] >= next
    };
    let member = |t: f64| tract.contains(f, &DiscPoint::on_circle(x, t));

    let mut seeds: Vec<usize> = Vec::new();
    for &j in order.iter().take(MAX_MEMBERSHIP_ATTEMPTS) {
        if seeds.len() >= search.refine_candidates {
            break;
        }
        if (seeds.is_empty() || is_local_max(j)) && member(theta(j)) {
            seeds.push(j);
        }
    }
    let Some(&first) = seeds.first() else {
        return CircleMax { b: 0.0, theta_r: 0.0 };
    };

    let mut best = (theta(first), vals[first]);
    let mut consider = |t: f64, v: f64| {
        let t = t.rem_euclid(TAU);
        let tie = TIE_REL * best.1.abs().max(1.0);
        if v > best.1 + tie || ((v - best.1).abs() <= tie && t < best.0) {
            best = (t, v);
        }
    };
    for &j in &seeds {
        consider(theta(j), vals[j]);
        let (t, v) = golden_section_max(value, theta(j) - step, theta(j) + step, search.theta_tol);
        if v > vals[j] && member(t) {
            consider(t, v);
        }
    }
    CircleMax {
        b: best.1.max(0.0),
        theta_r: best.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_model::x_of_r;
    use num_complex::Complex64;

    fn tract() -> TractSpec {
        TractSpec::new(1.0, Complex64::new(0.5, 0.0))
    }

    #[test]
    fn power_law_peak_on_axis() {
        let f = FunctionSpec::power_law(2.0);
        let m = max_on_circle(&f, &tract(), x_of_r(0.9), &CircleSearch::default());
        assert!((m.b - 100f64.ln()).abs() < 1e-8 * m.b);
        assert_eq!(m.theta_r, 0.0);
    }

    #[test]
    fn exp_pole_half_radius() {
        let f = FunctionSpec::exp_pole(1.0, 1.0);
        let m = max_on_circle(&f, &tract(), x_of_r(0.5), &CircleSearch::default());
        assert!((m.b - 2.0).abs() < 1e-12);
        assert_eq!(m.theta_r, 0.0);
    }

    #[test]
    fn off_grid_peak_is_refined() {
        // Rotate the singularity to angle 0.123: f(z) = (e^{0.123 i} - z)^{-3}.
        let center = Complex64::from_polar(1.0, 0.123);
        let f = FunctionSpec::Pole { center, order: 3 };
        let t = TractSpec::new(1.0, center * 0.5);
        let x = 7.0;
        let m = max_on_circle(&f, &t, x, &CircleSearch::default());
        let r = -(-x).exp_m1();
        let exact = -3.0 * (1.0 - r).ln();
        assert!((m.b - exact).abs() < 1e-8 * exact, "{} vs {exact}", m.b);
        assert!((m.theta_r - 0.123).abs() < 1e-6);
    }

    #[test]
    fn circle_outside_tract_gives_zero() {
        let f = FunctionSpec::power_law(2.0);
        let m = max_on_circle(&f, &tract(), x_of_r(0.2), &CircleSearch::default());
        // |1 - z| >= 0.8 on |z| = 0.2, so |f| > 1 still near z = 0.2 ...
        assert!(m.b > 0.0);
        let g = FunctionSpec::power_law(0.5);
        let t = TractSpec::new(2.0, Complex64::new(0.9, 0.0));
        let m = max_on_circle(&g, &t, x_of_r(0.2), &CircleSearch::default());
        assert_eq!(m.b, 0.0);
        assert_eq!(m.theta_r, 0.0);
    }
}
