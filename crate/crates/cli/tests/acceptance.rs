//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use num_bigint::BigUint;
use num_complex::Complex64;
use wvlab_cli::RunConfig;
use wvlab_core::exceptional::{e_set_failure, ExceptionalSet};
use wvlab_core::function_model::{catalog_oracle, FunctionSpec, TractSpec};
use wvlab_core::growth::{max_term_and_central_index, CircleSearch, GridSpec, GrowthParams, GrowthProfile};
use wvlab_core::numeric::{non_increasing, quartile_maxima};
use wvlab_core::verifier::{
    classical_asym_check, recurrence_check, tail_samples, thm1_sweep, thm2_sweep, zero_order_checks, CheckId,
    PipelineStatus, ProbeLayout, VerifierKnobs,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn tract() -> TractSpec {
    TractSpec::new(1.0, Complex64::new(0.5, 0.0))
}

fn params(rho0: Option<f64>) -> GrowthParams {
    GrowthParams {
        r0: 0.3,
        beta: 0.25,
        delta: 0.5,
        rho0,
        ..Default::default()
    }
}

fn profile(f: &FunctionSpec, rho0: Option<f64>, points: usize, span: f64) -> GrowthProfile {
    GrowthProfile::build(
        f,
        &tract(),
        &params(rho0),
        &GridSpec { points, span },
        &CircleSearch::default(),
    )
    .unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Grid B within 1e-6 and grid a within 2% of the closed form at every
/// validated radius; a 512-point profile in at most 60 s.
fn oracle_equivalence() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for f in [FunctionSpec::power_law(2.0), FunctionSpec::exp_pole(1.0, 1.0)] {
        let start = Instant::now();
        let p = profile(&f, None, 512, 12.0);
        let secs = start.elapsed().as_secs_f64();
        let (mut eb, mut ea) = (0.0f64, 0.0f64);
        for s in &p.samples {
            let o = catalog_oracle(&f, 1.0, s.x).unwrap();
            eb = eb.max(((s.b - o.b) / o.b).abs());
            ea = ea.max(((s.a - o.a) / o.a).abs());
        }
        ok &= eb <= 1e-6 && ea <= 0.02 && secs <= 60.0;
        details.push(format!("{f:?}: B err {eb:.2e}, a err {ea:.2e}, {secs:.1} s"));
    }
    check(ok, details.join("; "))
}

fn order_estimation() -> Outcome {
    let cases = [
        (FunctionSpec::power_law(2.0), 0.0, 0.1),
        (FunctionSpec::exp_pole(1.0, 1.0), 1.0, 0.1),
        (FunctionSpec::exp_pole(1.0, 2.0), 2.0, 0.15),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (f, want, tol) in cases {
        let got = profile(&f, None, 512, 12.0).order_estimate.unwrap();
        ok &= (got - want).abs() <= tol;
        details.push(format!("{f:?}: {got:.4} (want {want} +- {tol})"));
    }
    check(ok, details.join("; "))
}

/// The union failure set grows by less than 1.0 in log measure when the
/// span doubles (same spacing), and log / linear measures agree to 1e-9.
fn exceptional_sanity() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for f in [FunctionSpec::power_law(2.0), FunctionSpec::exp_pole(1.0, 1.0)] {
        let short = e_set_failure(&profile(&f, None, 256, 6.0));
        let long = e_set_failure(&profile(&f, None, 511, 12.0));
        let growth = long.union.log_measure - short.union.log_measure;
        let identity = [&short, &long]
            .iter()
            .flat_map(|e: &&ExceptionalSet| [&e.l5, &e.l6, &e.l7, &e.union, &e.e])
            .map(|s| (s.log_measure - s.linear_measure).abs())
            .fold(0.0, f64::max);
        ok &= growth < 1.0 && identity <= 1e-9;
        details.push(format!(
            "{f:?}: union {:.4} -> {:.4} (growth {growth:.4}), identity gap {identity:.1e}",
            short.union.log_measure, long.union.log_measure
        ));
    }
    check(ok, details.join("; "))
}

/// ExpPole k=1: monomial and log-derivative errors at most 0.05 on
/// D(z_r, eps/2048) at >= 90% of the non-exceptional tail radii, and both
/// error series non-increasing across tail quartiles (raw maxima).
fn theorem1() -> Outcome {
    let f = FunctionSpec::exp_pole(1.0, 1.0);
    let p = profile(&f, None, 512, 12.0);
    let e = e_set_failure(&p);
    let knobs = VerifierKnobs::default();
    let sweep = thm1_sweep(&f, &tract(), &p, &e, None, &knobs).unwrap();
    let errs = |c: CheckId| -> Vec<f64> {
        sweep
            .records
            .iter()
            .filter(|r| r.check == c)
            .map(|r| r.max_rel_err)
            .collect()
    };
    let (mono, logd) = (errs(CheckId::Monomial), errs(CheckId::Logderiv));
    let radius_ok = sweep
        .records
        .iter()
        .filter(|r| r.check == CheckId::Logderiv)
        .all(|r| r.disc_radius == knobs.logderiv_t * sweep_eps(&p, &e, r.r) / 2048.0);
    let good = mono
        .iter()
        .zip(&logd)
        .filter(|(m, l)| **m <= 0.05 && **l <= 0.05)
        .count();
    let rate = good as f64 / mono.len().max(1) as f64;
    let (qm, ql) = (quartile_maxima(&mono), quartile_maxima(&logd));
    let trend = non_increasing(&qm) && non_increasing(&ql);
    check(
        !mono.is_empty() && rate >= 0.9 && trend && radius_ok,
        format!(
            "{} radii, joint pass rate {rate:.3}, monomial quartiles [{}], logderiv quartiles [{}]",
            mono.len(),
            fmt_quartiles(&qm),
            fmt_quartiles(&ql)
        ),
    )
}

fn fmt_quartiles(q: &[Option<f64>; 4]) -> String {
    q.iter()
        .map(|v| v.map_or("-".into(), |v| format!("{v:.2e}")))
        .collect::<Vec<_>>()
        .join(", ")
}

fn sweep_eps(p: &GrowthProfile, e: &ExceptionalSet, r: f64) -> f64 {
    tail_samples(p, e).iter().find(|s| s.r == r).map_or(f64::NAN, |s| s.eps)
}

/// Higher log-derivatives within q * 0.05 for q = 1, 2, 3 and
/// a(r) eps(r) >= 10 at every radius of an accepted window.
fn theorem2_on(rho0: f64, window_threshold: f64) -> Outcome {
    let f = FunctionSpec::exp_pole(1.0, 2.0);
    let p = profile(&f, Some(rho0), 512, 12.0);
    let e = e_set_failure(&p);
    let knobs = VerifierKnobs {
        window_threshold,
        ..Default::default()
    };
    let sweep = thm2_sweep(&f, &p, &e, &knobs).unwrap();
    if let PipelineStatus::Skipped(reason) = &sweep.status {
        return Err(format!("no radius verified: {reason}"));
    }
    let higher: Vec<_> = sweep
        .records
        .iter()
        .filter(|r| r.check == CheckId::HigherLogderiv)
        .collect();
    let worst = |q: usize| {
        higher
            .iter()
            .filter(|r| r.q == Some(q))
            .map(|r| r.max_rel_err)
            .fold(0.0, f64::max)
    };
    let (w1, w2, w3) = (worst(1), worst(2), worst(3));
    let min_aeps = sweep
        .records
        .iter()
        .filter_map(|r| r.a_eps)
        .fold(f64::INFINITY, f64::min);
    check(
        sweep.radii > 0 && w1 <= 0.05 && w2 <= 0.10 && w3 <= 0.15 && min_aeps >= 10.0,
        format!(
            "{} radii in {} windows; worst errors q=1 {w1:.2e}, q=2 {w2:.2e}, q=3 {w3:.2e}; min a*eps {min_aeps:.3e}",
            sweep.radii,
            sweep.scan.as_ref().map_or(0, |s| s.accepted.len())
        ),
    )
}

fn theorem2() -> Outcome {
    theorem2_on(0.5, 10.0)
}

fn theorem2_supplementary() -> Outcome {
    theorem2_on(0.1, 100.0)
}

/// PowerLaw(2): |L_2 z_r^2 / a^2 - 1| >= 0.25 at every non-exceptional
/// grid radius, and the zero-order derivative bound with the fitted
/// constant at every tail radius.
fn zero_order_control() -> Outcome {
    let f = FunctionSpec::power_law(2.0);
    let p = profile(&f, None, 512, 12.0);
    let e = e_set_failure(&p);
    let mut min_control = f64::INFINITY;
    let mut count = 0;
    for s in p.samples.iter().filter(|s| !e.contains_x(s.x)) {
        let z = s.z_r();
        let l2 = f.logderiv_tower(&z, 2).unwrap()[1];
        min_control = min_control.min((l2 * z.z * z.z / (s.a * s.a) - 1.0).norm());
        count += 1;
    }
    let z = zero_order_checks(&f, &p, &e, &VerifierKnobs::default()).unwrap();
    let bound: Vec<_> = z
        .records
        .iter()
        .filter(|r| r.check == CheckId::ZeroOrderBound)
        .collect();
    let bound_ok = !bound.is_empty() && bound.iter().all(|r| r.pass);
    check(
        count > 0 && min_control >= 0.25 && bound_ok,
        format!(
            "negative control min {min_control:.4} over {count} radii; bound holds at {}/{} records (c_fit {:.3?})",
            bound.iter().filter(|r| r.pass).count(),
            bound.len(),
            z.c_fit
        ),
    )
}

fn recurrence() -> Outcome {
    let functions = [
        FunctionSpec::power_law(2.0),
        FunctionSpec::exp_pole(1.0, 1.0),
        FunctionSpec::exp_pole(1.0, 2.0),
        FunctionSpec::exp_series(40),
        FunctionSpec::Product {
            factors: vec![
                FunctionSpec::power_law(1.5),
                FunctionSpec::Pole {
                    center: Complex64::new(1.5, 0.5),
                    order: 2,
                },
            ],
        },
    ];
    let mut ok = true;
    let mut worst = 0.0f64;
    for f in &functions {
        let rep = recurrence_check(f, 4, 32, 7, 1e-5).unwrap();
        ok &= rep.pass && rep.probes.len() == 32;
        worst = worst.max(rep.max_rel_err.iter().copied().fold(0.0, f64::max));
    }
    check(
        ok,
        format!(
            "{} functions, q <= 4, worst relative error {worst:.2e}",
            functions.len()
        ),
    )
}

/// Largest index attaining max r^n / n! for integer r, in exact arithmetic.
fn brute_force_central_index(r: u64, degree: u64) -> u64 {
    // r^n / n! = r^n (degree! / n!) / degree!; compare the integer numerators.
    let mut best = (BigUint::from(0u32), 0);
    for n in 0..=degree {
        let mut t = BigUint::from(r).pow(n as u32);
        for k in n + 1..=degree {
            t *= k;
        }
        if t >= best.0 {
            best = (t, n);
        }
    }
    best.1
}

fn classical() -> Outcome {
    let degree = 60;
    let coeffs = match FunctionSpec::exp_series(degree) {
        FunctionSpec::PowerSeries { coefficients } => coefficients,
        _ => unreachable!(),
    };
    let mut ok = true;
    let mut errs = Vec::new();
    let mut details = Vec::new();
    for r in [10u64, 15, 20] {
        let n = max_term_and_central_index(&coeffs, r as f64).unwrap().index;
        let brute = brute_force_central_index(r, degree as u64);
        let rep = classical_asym_check(&coeffs, r as f64, 1.5, 2, 0.05, ProbeLayout::new(2, 32)).unwrap();
        ok &= n as u64 == brute;
        errs.push(rep.max_rel_err);
        details.push(format!("r={r}: N={n} (brute {brute}), err {:.4}", rep.max_rel_err));
    }
    ok &= errs[2] <= 0.05 && errs.windows(2).all(|w| w[1] < w[0]);
    check(ok, details.join("; "))
}

fn run_dir(cfg: &RunConfig, dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut cfg = cfg.clone();
    cfg.output_dir = dir.to_path_buf();
    wvlab_cli::run(&cfg, None).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let text = r#"
checks = ["growth", "exceptional", "thm1", "thm2", "zero_order", "classical", "recurrence"]
seed = 3

[function]
kind = "exp_pole"
c = 1.0
k = 2.0

[tract]
threshold = 1.0
seed = [0.5, 0.0]

[params]
r0 = 0.3
rho0 = 0.1

[grid]
points = 256
span = 12.0

[knobs]
window_threshold = 100.0
"#;
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_toml(text, tmp.path()).unwrap();
    let a = run_dir(&cfg, &tmp.path().join("a"));
    let b = run_dir(&cfg, &tmp.path().join("b"));
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    check(
        a == b && a.len() == 8,
        format!("{} artifacts compared: {}", a.len(), names.join(", ")),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 order estimation", order_estimation),
        ("3 exceptional-set sanity", exceptional_sanity),
        ("4 thm1 verification", theorem1),
        ("5 thm2 verification", theorem2),
        (
            "5s thm2, supplementary (rho0 = 0.1, window threshold 100)",
            theorem2_supplementary,
        ),
        ("6 zero-order negative control", zero_order_control),
        ("7 recurrence consistency", recurrence),
        ("8 classical check", classical),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
