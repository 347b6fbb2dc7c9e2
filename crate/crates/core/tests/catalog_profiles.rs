//! Properties of sampled profiles, exceptional sets and local checks on the
//! closed-form catalog functions.

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use wvlab_core::exceptional::{b_local_bound_sweep, e2_integral_check, e_set_failure, ExceptionalSet};
use wvlab_core::function_model::{series, FunctionSpec, TractSpec};
use wvlab_core::growth::{
    max_term_and_central_index, CircleSearch, GridSpec, GrowthParams, GrowthProfile, GrowthSample,
};
use wvlab_core::numeric::quartile_maxima;
use wvlab_core::verifier::{g_eval, tail_samples};

struct Case {
    f: FunctionSpec,
    profile: GrowthProfile,
    eset: ExceptionalSet,
}

fn tract() -> TractSpec {
    TractSpec::new(1.0, Complex64::new(0.5, 0.0))
}

fn build(f: FunctionSpec, points: usize, span: f64) -> Case {
    let params = GrowthParams {
        r0: 0.3,
        ..Default::default()
    };
    let profile = GrowthProfile::build(
        &f,
        &tract(),
        &params,
        &GridSpec { points, span },
        &CircleSearch::default(),
    )
    .unwrap();
    let eset = e_set_failure(&profile);
    Case { f, profile, eset }
}

fn catalog() -> &'static [Case] {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(|| {
        vec![
            build(FunctionSpec::power_law(2.0), 256, 12.0),
            build(FunctionSpec::exp_pole(1.0, 1.0), 256, 12.0),
            build(FunctionSpec::exp_pole(1.0, 2.0), 256, 12.0),
        ]
    })
}

#[test]
fn b_is_convex_in_log_r() {
    for c in catalog() {
        let s = &c.profile.samples;
        for i in 1..s.len() - 1 {
            let lr = |j: usize| s[j].r.ln();
            let left = (s[i].b - s[i - 1].b) / (lr(i) - lr(i - 1));
            let right = (s[i + 1].b - s[i].b) / (lr(i + 1) - lr(i));
            // Second difference, scaled back to B units.
            let second = (right - left) * (lr(i + 1) - lr(i - 1)) / 2.0;
            assert!(second >= -1e-6 * s[i].b, "{:?} at r = {}: {second}", c.f, s[i].r);
        }
    }
}

#[test]
fn a_is_non_decreasing() {
    for c in catalog() {
        for w in c.profile.samples.windows(2) {
            if !(w[0].suspect || w[1].suspect) {
                assert!(w[1].a >= w[0].a * (1.0 - 1e-9), "{:?} at r = {}", c.f, w[1].r);
            }
        }
    }
}

#[test]
fn epsilon_decreases_over_last_quartile() {
    for c in catalog() {
        let s = &c.profile.samples;
        let q = &s[3 * s.len() / 4..];
        assert!(q.windows(2).all(|w| w[1].eps < w[0].eps), "{:?}", c.f);
    }
}

#[test]
fn b_is_dominated_by_a() {
    // C fitted on the first quartile of the grid, required everywhere.
    for c in catalog() {
        let s = &c.profile.samples;
        let fit = |p: &GrowthSample| p.b / (p.a + 1.0);
        let cst = s[..s.len() / 4].iter().map(fit).fold(0.0, f64::max);
        assert!(s.iter().all(|p| p.b <= cst * p.a + cst), "{:?}", c.f);
    }
}

#[test]
fn central_index_and_maximum_term() {
    let coeffs = match FunctionSpec::exp_series(60) {
        FunctionSpec::PowerSeries { coefficients } => coefficients,
        _ => unreachable!(),
    };
    let mut last = 0;
    for k in 1..=100 {
        let r = 0.25 * k as f64;
        let m = max_term_and_central_index(&coeffs, r).unwrap();
        assert!(m.index >= last);
        last = m.index;
        // mu(r) <= M(r) = e^r for the polynomial (all coefficients positive).
        let max_mod = series::eval(&coeffs, Complex64::new(r, 0.0)).ln_abs();
        assert!(m.ln_mu <= max_mod + 1e-12);
    }
}

#[test]
fn failure_set_measure_stays_bounded_when_span_doubles() {
    for f in [FunctionSpec::power_law(2.0), FunctionSpec::exp_pole(1.0, 1.0)] {
        let short = build(f.clone(), 128, 6.0);
        let long = build(f.clone(), 256, 12.0);
        let (m6, m12) = (short.eset.union.log_measure, long.eset.union.log_measure);
        assert!(m12 <= m6 + 1.0, "{f:?}: {m6} -> {m12}");
        for set in [
            &long.eset.union,
            &long.eset.e,
            &long.eset.l5,
            &long.eset.l6,
            &long.eset.l7,
        ] {
            assert!((set.log_measure - set.linear_measure).abs() <= 1e-9);
        }
    }
}

#[test]
fn regularity_holds_on_most_of_the_tail() {
    for c in catalog() {
        let flags = &c.eset.samples[c.profile.tail_start()..];
        let ok = flags.iter().filter(|s| !(s.l5 || s.l6)).count();
        assert!(ok as f64 > 0.9 * flags.len() as f64, "{:?}: {ok}/{}", c.f, flags.len());
    }
}

#[test]
fn e2_integral_matches_antiderivative() {
    for c in catalog() {
        let v = e2_integral_check(&c.profile);
        assert!(v.relative_gap() <= 0.02, "{:?}: {v:?}", c.f);
    }
}

#[test]
fn phi_hat_shrinks_along_the_tail() {
    let c = build(FunctionSpec::exp_pole(1.0, 1.0), 96, 12.0);
    let sweep = b_local_bound_sweep(&c.profile, &c.f, &tract(), &CircleSearch::default(), &c.eset);
    let tail_x = c.profile.samples[c.profile.tail_start()].x;
    let phi: Vec<f64> = sweep
        .samples
        .iter()
        .filter(|p| p.x >= tail_x)
        .map(|p| p.phi_hat)
        .collect();
    let q = quartile_maxima(&phi);
    assert!(q[3].unwrap() <= q[2].unwrap(), "{q:?}");
}

#[test]
fn g_vanishes_at_every_maximum_point() {
    for c in catalog() {
        for s in tail_samples(&c.profile, &c.eset) {
            let g = g_eval(&c.f, &s.z_r(), s.a, Complex64::new(0.0, 0.0), 16).unwrap();
            assert!(g.norm() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn negative_control_floor_for_power_laws(gamma in 0.5..6.0f64, x in 2.0..14.0f64) {
        // z_r = r, a = gamma r / (1 - r); probes of the default sigma disc.
        let f = FunctionSpec::power_law(gamma);
        let w = (-x).exp();
        let r = -(-x).exp_m1();
        let a = gamma * r / w;
        let p = wvlab_core::function_model::DiscPoint::on_circle(x, 0.0);
        let tower = f.logderiv_tower(&p, 2).unwrap();
        let s = p.z / a;
        let control = (tower[1] * s * s - 1.0).norm();
        prop_assert!(control >= 1.0 / (2.0 * gamma), "{control}");
    }
}
