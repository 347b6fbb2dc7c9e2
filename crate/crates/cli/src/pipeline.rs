//! Orchestration of the requested pipelines and the artifacts they leave in
//! the output directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use wvlab_core::exceptional::{
    self, b_local_bound_sweep, e2_integral_check, e_set_failure, E2Integral, ExceptionalSet, PhiSweep,
};
use wvlab_core::function_model::{catalog_oracle, x_of_r, FunctionSpec};
use wvlab_core::growth::{
    self, sample_growth, scan_windows, GridSpec, GrowthParams, GrowthProfile, PositiveOrderWindow,
};
use wvlab_core::verifier::{
    self, classical_sweep, higher_logderiv_check, logderiv_check, logderiv_tolerance, monomial_check, recurrence_check,
    sort_reports, thm1_sweep, thm2_sweep, tract_disc_check, zero_order_checks, PipelineStatus, VerificationReport,
};
use wvlab_core::Error;

use crate::artifacts;
use crate::config::{CheckSet, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Skipped => "skipped",
        })
    }
}

/// Scalar diagnostics of one pipeline; non-finite values are dropped so the
/// summary stays valid JSON.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Metrics(pub BTreeMap<String, f64>);

impl Metrics {
    fn put(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.0.insert(key.into(), value);
        }
    }

    fn flag(&mut self, key: impl Into<String>, value: bool) {
        self.put(key, if value { 1.0 } else { 0.0 });
    }

    fn quartiles(&mut self, prefix: &str, q: &[Option<f64>; 4]) {
        for (i, v) in q.iter().enumerate() {
            if let Some(v) = v {
                self.put(format!("{prefix}_q{}", i + 1), *v);
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub name: CheckSet,
    pub requested: bool,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Verification records emitted by the pipeline.
    pub records: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_rate: Option<f64>,
    #[serde(default)]
    pub metrics: Metrics,
}

impl PipelineSummary {
    fn ran(name: CheckSet, pass: bool, records: &[VerificationReport], metrics: Metrics) -> Self {
        let pass_rate = if records.is_empty() {
            None
        } else {
            Some(records.iter().filter(|r| r.pass).count() as f64 / records.len() as f64)
        };
        Self {
            name,
            requested: true,
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
            reason: None,
            records: records.len(),
            pass_rate,
            metrics,
        }
    }

    fn skipped(name: CheckSet, requested: bool, reason: String, metrics: Metrics) -> Self {
        Self {
            name,
            requested,
            outcome: Outcome::Skipped,
            reason: Some(reason),
            records: 0,
            pass_rate: None,
            metrics,
        }
    }

    fn with_reason(mut self, reason: Option<String>) -> Self {
        self.reason = reason;
        self
    }

    pub fn line(&self) -> String {
        match &self.reason {
            Some(reason) => format!("{}: {} ({reason})", self.name, self.outcome),
            None => format!("{}: {}", self.name, self.outcome),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub function: FunctionSpec,
    pub params: GrowthParams,
    pub grid: GridSpec,
    pub seed: u64,
    pub validated_r0: f64,
    #[serde(default)]
    pub order_estimate: Option<f64>,
    pub checks: Vec<CheckSet>,
    pub pipelines: Vec<PipelineSummary>,
    /// Every requested pipeline passed or was skipped.
    pub pass: bool,
}

impl Summary {
    pub fn pipeline(&self, name: CheckSet) -> Option<&PipelineSummary> {
        self.pipelines.iter().find(|p| p.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("validated r0: {}\n", self.validated_r0);
        match self.order_estimate {
            Some(o) => out.push_str(&format!("order estimate: {o:.4}\n")),
            None => out.push_str("order estimate: unavailable\n"),
        }
        for p in &self.pipelines {
            out.push_str(&p.line());
            out.push('\n');
        }
        out.push_str(&format!("overall: {}\n", if self.pass { "pass" } else { "fail" }));
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub profile: GrowthProfile,
    /// `None` when no checks were requested.
    pub summary: Option<Summary>,
    pub records: Vec<VerificationReport>,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.summary.as_ref().is_none_or(|s| s.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

/// Content of `exceptional.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalArtifact {
    pub set: ExceptionalSet,
    pub e2_integral: E2Integral,
    #[serde(default)]
    pub local_bound: Option<PhiSweep>,
}

/// Runs `job` on a pool of `workers` threads (the global pool when `None`).
/// Results do not depend on the worker count.
pub fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => job(),
        Some(0) => Err(CliError::Config("workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?
            .install(job),
    }
}

/// Creates the parent directory and writes the file through a buffer.
pub fn write_artifact(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> wvlab_core::Result<()>) -> Result<()> {
    let fail = |message: String| CliError::Output {
        path: path.to_path_buf(),
        message,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| fail(e.to_string()))?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(|e| fail(e.to_string()))?);
    write(&mut w).map_err(|e| fail(e.to_string()))?;
    w.flush().map_err(|e| fail(e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_artifact(path, |w| {
        w.write_all(text.as_bytes()).map_err(|e| Error::Export(e.to_string()))
    })
}

pub fn build_profile(cfg: &RunConfig) -> Result<GrowthProfile> {
    GrowthProfile::build(&cfg.function, &cfg.tract, &cfg.params, &cfg.grid, &cfg.circle)
        .map_err(CliError::stage("growth"))
}

pub fn write_profile(profile: &GrowthProfile, dir: &Path) -> Result<()> {
    write_artifact(&dir.join(artifacts::PROFILE_CSV), |w| {
        growth::export::write_csv(profile, w)
    })?;
    write_artifact(&dir.join(artifacts::PROFILE_JSON), |w| {
        growth::export::write_json(profile, w)
    })
}

/// The exceptional set and, when configured, the local bound sweep.
pub fn exceptional_stage(cfg: &RunConfig, profile: &GrowthProfile) -> ExceptionalArtifact {
    let set = e_set_failure(profile);
    let local_bound = cfg
        .exceptional
        .local_bound
        .then(|| b_local_bound_sweep(profile, &cfg.function, &cfg.tract, &cfg.circle, &set));
    ExceptionalArtifact {
        e2_integral: e2_integral_check(profile),
        set,
        local_bound,
    }
}

pub fn write_exceptional(art: &ExceptionalArtifact, dir: &Path) -> Result<()> {
    write_artifact(&dir.join(artifacts::EXCEPTIONAL_JSON), |w| {
        exceptional::export::write_json(art, w)
    })?;
    write_artifact(&dir.join(artifacts::EXCEPTIONAL_CSV), |w| {
        exceptional::export::write_csv(&art.set, w)
    })
}

/// Profile sanity plus, for catalog functions, agreement of `B` and `a`
/// with the closed-form oracle at every grid radius.
pub fn growth_pipeline(cfg: &RunConfig, profile: &GrowthProfile) -> Result<PipelineSummary> {
    let mut m = Metrics::default();
    m.put("validated_r0", profile.validated_r0());
    let suspect = profile.samples.iter().filter(|s| s.suspect).count();
    m.put("suspect_fraction", suspect as f64 / profile.samples.len() as f64);
    let mut failures = Vec::new();
    match profile.order_estimate {
        Some(o) => m.put("order_estimate", o),
        None => failures.push("order estimate unavailable".to_string()),
    }
    let mut errs = Some((0.0f64, 0.0f64));
    for s in &profile.samples {
        match catalog_oracle(&cfg.function, profile.threshold, s.x) {
            Ok(o) => {
                if let Some((eb, ea)) = errs.as_mut() {
                    *eb = eb.max(((s.b - o.b) / o.b).abs());
                    *ea = ea.max(((s.a - o.a) / o.a).abs());
                }
            }
            Err(Error::NoOracle) => {
                errs = None;
                break;
            }
            Err(e) => return Err(CliError::stage("growth")(e)),
        }
    }
    if let Some((eb, ea)) = errs {
        m.put("oracle_b_max_rel_err", eb);
        m.put("oracle_a_max_rel_err", ea);
        if !(eb <= cfg.growth.oracle_b_tol) {
            failures.push(format!("B off the oracle by {eb:.3e}"));
        }
        if !(ea <= cfg.growth.oracle_a_tol) {
            failures.push(format!("a off the oracle by {ea:.3e}"));
        }
    }
    let reason = (!failures.is_empty()).then(|| failures.join("; "));
    Ok(PipelineSummary::ran(CheckSet::Growth, failures.is_empty(), &[], m).with_reason(reason))
}

/// The regularity conditions on `a` hold at the configured fraction of the
/// tail and the `a / B^{1+beta}` integral matches its closed form.
pub fn exceptional_pipeline(cfg: &RunConfig, profile: &GrowthProfile, art: &ExceptionalArtifact) -> PipelineSummary {
    let set = &art.set;
    let tail = &set.samples[profile.tail_start().min(set.samples.len())..];
    let regular = tail.iter().filter(|s| !(s.l5 || s.l6)).count();
    let regular_fraction = if tail.is_empty() {
        0.0
    } else {
        regular as f64 / tail.len() as f64
    };
    let gap = art.e2_integral.relative_gap();
    let mut m = Metrics::default();
    m.put("union_log_measure", set.union.log_measure);
    m.put("e_log_measure", set.e.log_measure);
    m.put("r0_prime", set.r0_prime);
    m.put("tail_regular_fraction", regular_fraction);
    m.put("e2_relative_gap", gap);
    m.flag("grid_too_coarse", set.grid_too_coarse);
    if let Some(phi) = &art.local_bound {
        m.put("phi_c_fit", phi.c_fit);
        m.put("l14_log_measure", phi.l14.log_measure);
    }
    let mut failures = Vec::new();
    if regular_fraction < cfg.exceptional.regular_fraction {
        failures.push(format!(
            "regularity holds at {:.1}% of the tail",
            100.0 * regular_fraction
        ));
    }
    if !(gap <= cfg.exceptional.e2_tolerance) {
        failures.push(format!("integral gap {gap:.3e}"));
    }
    let reason = (!failures.is_empty()).then(|| failures.join("; "));
    PipelineSummary::ran(CheckSet::Exceptional, failures.is_empty(), &[], m).with_reason(reason)
}

fn order_of(profile: &GrowthProfile) -> Option<f64> {
    profile.order_estimate
}

/// Summary line for a theorem pipeline that was not requested, with the
/// reason it would not apply when that is already known.
fn not_requested(name: CheckSet, cfg: &RunConfig, profile: &GrowthProfile) -> PipelineSummary {
    let zero = cfg.knobs.zero_order_max;
    let reason = match (name, order_of(profile)) {
        (CheckSet::Thm2, Some(o)) if o < zero => format!("order 0, estimate {o:.3}"),
        (CheckSet::ZeroOrder, Some(o)) if o >= zero => format!("positive order, estimate {o:.3}"),
        _ => "not requested".to_string(),
    };
    PipelineSummary::skipped(name, false, reason, Metrics::default())
}

/// Runs every requested pipeline and writes the artifacts:
/// `profile.csv/json` always; with a non-empty check set also
/// `exceptional.json/csv`, `verification.jsonl`,
/// `verification_summary.csv` and `summary.json/txt`.
pub fn run(cfg: &RunConfig, workers: Option<usize>) -> Result<RunOutcome> {
    with_pool(workers, || run_checks(cfg))
}

fn run_checks(cfg: &RunConfig) -> Result<RunOutcome> {
    let dir = &cfg.output_dir;
    let profile = build_profile(cfg)?;
    write_profile(&profile, dir)?;
    if cfg.checks.is_empty() {
        return Ok(RunOutcome {
            profile,
            summary: None,
            records: Vec::new(),
        });
    }
    let requested = |c: CheckSet| cfg.checks.contains(&c);
    let mut pipelines = Vec::new();
    let mut records = Vec::new();

    if requested(CheckSet::Growth) {
        pipelines.push(growth_pipeline(cfg, &profile)?);
    }
    let art = exceptional_stage(cfg, &profile);
    write_exceptional(&art, dir)?;
    if requested(CheckSet::Exceptional) {
        pipelines.push(exceptional_pipeline(cfg, &profile, &art));
    }

    if requested(CheckSet::Thm1) {
        let s = thm1_sweep(
            &cfg.function,
            &cfg.tract,
            &profile,
            &art.set,
            art.local_bound.as_ref(),
            &cfg.knobs,
        )
        .map_err(CliError::stage("thm1"))?;
        let mut m = Metrics::default();
        m.put("radii", s.radii as f64);
        m.put("tract_pass_rate", s.tract_pass_rate);
        m.put("monomial_pass_rate", s.monomial_pass_rate);
        m.put("logderiv_pass_rate", s.logderiv_pass_rate);
        m.quartiles("monomial", &s.monomial_quartiles);
        m.quartiles("logderiv", &s.logderiv_quartiles);
        m.flag("trend_ok", s.trend_ok);
        pipelines.push(PipelineSummary::ran(CheckSet::Thm1, s.pass, &s.records, m));
        records.extend(s.records);
    }

    if requested(CheckSet::Thm2) {
        let s = thm2_sweep(&cfg.function, &profile, &art.set, &cfg.knobs).map_err(CliError::stage("thm2"))?;
        let mut m = Metrics::default();
        if let Some(o) = s.order {
            m.put("order_estimate", o);
        }
        if let Some(scan) = &s.scan {
            m.put("windows_accepted", scan.accepted.len() as f64);
            m.put("best_window_diagnostic", scan.best_diagnostic);
            m.put("a_slope", scan.a_slope);
        }
        match s.status {
            PipelineStatus::Skipped(reason) => {
                pipelines.push(PipelineSummary::skipped(CheckSet::Thm2, true, reason, m));
            }
            PipelineStatus::Ran => {
                m.put("radii", s.radii as f64);
                let min_aeps = s.records.iter().filter_map(|r| r.a_eps).fold(f64::INFINITY, f64::min);
                m.put("min_a_eps", min_aeps);
                pipelines.push(PipelineSummary::ran(CheckSet::Thm2, s.pass, &s.records, m));
                records.extend(s.records);
            }
        }
    } else {
        pipelines.push(not_requested(CheckSet::Thm2, cfg, &profile));
    }

    if requested(CheckSet::ZeroOrder) {
        match zero_order_checks(&cfg.function, &profile, &art.set, &cfg.knobs) {
            Ok(z) => {
                let mut m = Metrics::default();
                m.put("order_estimate", z.order);
                for (q, c) in z.c_fit.iter().enumerate() {
                    m.put(format!("c_fit_q{}", q + 1), *c);
                }
                m.quartiles("excess", &z.excess_quartiles);
                m.quartiles("a_eps", &z.aeps_quartiles);
                m.flag("excess_trend_ok", z.excess_trend_ok);
                m.flag("aeps_trend_ok", z.aeps_trend_ok);
                if let Some(c) = z.negative_control_min {
                    m.put("negative_control_min", c);
                }
                pipelines.push(PipelineSummary::ran(CheckSet::ZeroOrder, z.pass, &z.records, m));
                records.extend(z.records);
            }
            Err(Error::NotZeroOrder { order }) => pipelines.push(PipelineSummary::skipped(
                CheckSet::ZeroOrder,
                true,
                format!("positive order, estimate {order:.3}"),
                Metrics::default(),
            )),
            Err(e) => return Err(CliError::stage("zero_order")(e)),
        }
    } else {
        pipelines.push(not_requested(CheckSet::ZeroOrder, cfg, &profile));
    }

    if requested(CheckSet::Classical) {
        let c = &cfg.classical;
        let s = classical_sweep(
            &cfg.classical_coefficients(),
            &c.radii,
            c.gamma_exp,
            c.max_q,
            c.tolerance,
            c.pass_rate,
            cfg.knobs.classical_layout(),
        )
        .map_err(CliError::stage("classical"))?;
        let mut m = Metrics::default();
        for (r, n) in c.radii.iter().zip(&s.central_index) {
            m.put(format!("central_index_at_{r}"), *n as f64);
        }
        pipelines.push(PipelineSummary::ran(CheckSet::Classical, s.pass, &s.records, m));
        records.extend(s.records);
    }

    if requested(CheckSet::Recurrence) {
        let c = &cfg.recurrence;
        let rep = recurrence_check(&cfg.function, c.max_q, c.probes, cfg.seed, c.tolerance)
            .map_err(CliError::stage("recurrence"))?;
        let mut m = Metrics::default();
        for (q, e) in rep.max_rel_err.iter().enumerate() {
            m.put(format!("max_rel_err_q{}", q + 1), *e);
        }
        pipelines.push(PipelineSummary::ran(CheckSet::Recurrence, rep.pass, &[], m));
    }

    sort_reports(&mut records);
    let pass = pipelines.iter().all(|p| p.outcome != Outcome::Fail);
    let summary = Summary {
        function: cfg.function.clone(),
        params: profile.params,
        grid: cfg.grid,
        seed: cfg.seed,
        validated_r0: profile.validated_r0(),
        order_estimate: profile.order_estimate,
        checks: cfg.checks.clone(),
        pipelines,
        pass,
    };
    write_artifact(&dir.join(artifacts::VERIFICATION_JSONL), |w| {
        verifier::export::write_jsonl(&records, w)
    })?;
    write_artifact(&dir.join(artifacts::VERIFICATION_SUMMARY_CSV), |w| {
        verifier::export::write_summary_csv(&records, w)
    })?;
    write_artifact(&dir.join(artifacts::SUMMARY_JSON), |w| {
        exceptional::export::write_json(&summary, w)
    })?;
    write_text(&dir.join(artifacts::SUMMARY_TXT), &summary.to_text())?;
    Ok(RunOutcome {
        profile,
        summary: Some(summary),
        records,
    })
}

/// Checks at one radius, which need not lie on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusVerification {
    pub check: CheckSet,
    pub r: f64,
    pub x: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub a: f64,
    pub eps: f64,
    pub in_exceptional_set: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<PositiveOrderWindow>,
    pub records: Vec<VerificationReport>,
    pub pass: bool,
}

/// `thm1` (disc in tract, monomial, log-derivative) or `thm2` (higher
/// log-derivatives and `a eps`) at the single radius `r`.
pub fn verify_radius(cfg: &RunConfig, check: CheckSet, r: f64) -> Result<RadiusVerification> {
    if !(r > 0.0 && r < 1.0) {
        return Err(CliError::Config(format!("--r must lie in (0, 1), got {r}")));
    }
    let profile = build_profile(cfg)?;
    let set = e_set_failure(&profile);
    let x = x_of_r(r);
    let s = sample_growth(&cfg.function, &cfg.tract, &profile.params, &cfg.circle, x, profile.step);
    let knobs = &cfg.knobs;
    let (beta, delta) = (profile.params.beta, profile.params.delta);
    let mut window = None;
    let records = match check {
        CheckSet::Thm1 => {
            if !(s.eps > 0.0) {
                return Err(CliError::stage("thm1")(Error::DomainError {
                    what: "a(r) must be at least 2",
                    value: s.a,
                }));
            }
            let sigma = s.eps / knobs.sigma_divisor;
            let stage = CliError::stage("thm1");
            vec![
                tract_disc_check(&cfg.function, &cfg.tract, &s, sigma, knobs.disc_layout()),
                monomial_check(
                    &cfg.function,
                    &s,
                    sigma,
                    knobs.base_tol,
                    knobs.disc_layout(),
                    knobs.path_steps,
                )
                .map_err(stage)?,
                logderiv_check(
                    &cfg.function,
                    &s,
                    knobs.logderiv_t * sigma,
                    logderiv_tolerance(s.a, beta, delta, knobs),
                    knobs.disc_layout(),
                )
                .map_err(stage)?,
            ]
        }
        CheckSet::Thm2 => {
            let stage = CliError::stage("thm2");
            let scan = scan_windows(&profile.params, &profile, knobs.window_threshold).map_err(stage)?;
            let Some(w) = scan.accepted.iter().find(|w| w.contains_x(x)).copied() else {
                return Err(stage(Error::WindowRejected {
                    diagnostic: scan.best_diagnostic,
                    reason: format!("no accepted window contains r = {r}"),
                }));
            };
            window = Some(w);
            let mut reps = higher_logderiv_check(&cfg.function, &w, &s, &set, beta, delta, knobs).map_err(stage)?;
            let a_eps = s.a * s.eps;
            let mut rep = reps[0].clone();
            rep.check = verifier::CheckId::AepsDivergence;
            rep.q = None;
            rep.disc_radius = 0.0;
            rep.max_rel_err = a_eps;
            rep.tolerance = knobs.aeps_min;
            rep.pass = a_eps >= knobs.aeps_min;
            rep.worst_probe = None;
            rep.secondary = None;
            reps.push(rep);
            reps
        }
        other => {
            return Err(CliError::Config(format!(
                "single-radius verification supports thm1 and thm2, not {other}"
            )))
        }
    };
    let pass = records.iter().all(|r| r.pass);
    Ok(RadiusVerification {
        check,
        r,
        x,
        b: s.b,
        a: s.a,
        eps: s.eps,
        in_exceptional_set: set.contains_x(x),
        window,
        records,
        pass,
    })
}
