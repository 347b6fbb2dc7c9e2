//! Run configuration: a TOML file with every tolerance, threshold and probe
//! count spelled out (defaults apply to omitted keys).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use wvlab_core::function_model::{FunctionSpec, TractSpec};
use wvlab_core::growth::{CircleSearch, GridSpec, GrowthParams};
use wvlab_core::verifier::VerifierKnobs;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckSet {
    Growth,
    Exceptional,
    Thm1,
    Thm2,
    ZeroOrder,
    Classical,
    Recurrence,
}

impl CheckSet {
    pub const ALL: [CheckSet; 7] = [
        CheckSet::Growth,
        CheckSet::Exceptional,
        CheckSet::Thm1,
        CheckSet::Thm2,
        CheckSet::ZeroOrder,
        CheckSet::Classical,
        CheckSet::Recurrence,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckSet::Growth => "growth",
            CheckSet::Exceptional => "exceptional",
            CheckSet::Thm1 => "thm1",
            CheckSet::Thm2 => "thm2",
            CheckSet::ZeroOrder => "zero_order",
            CheckSet::Classical => "classical",
            CheckSet::Recurrence => "recurrence",
        }
    }
}

impl fmt::Display for CheckSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckSet {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        CheckSet::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| {
                let known: Vec<&str> = CheckSet::ALL.iter().map(|c| c.as_str()).collect();
                CliError::Config(format!("unknown check id '{s}' (known: {})", known.join(", ")))
            })
    }
}

/// Parses `a,b,c`; an empty string is the empty set.
pub fn parse_checks(list: &str) -> Result<Vec<CheckSet>> {
    let mut out: Vec<CheckSet> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Where the test function comes from.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FunctionSource {
    /// Coefficients from a CSV file with columns `n,re,im`.
    PowerSeriesCsv { path: PathBuf },
    /// Truncated Taylor series of a named entire function.
    Preset { name: String, degree: usize },
    #[serde(untagged)]
    Spec(FunctionSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalConfig {
    /// Degree of the truncated `e^z` used when the main function is not a power series.
    pub degree: usize,
    pub radii: Vec<f64>,
    pub gamma_exp: f64,
    pub max_q: usize,
    pub tolerance: f64,
    pub pass_rate: f64,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            degree: 60,
            radii: vec![10.0, 15.0, 20.0],
            gamma_exp: 1.5,
            max_q: 2,
            tolerance: 0.1,
            pass_rate: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecurrenceConfig {
    pub probes: usize,
    pub max_q: usize,
    pub tolerance: f64,
}

impl Default for RecurrenceConfig {
    fn default() -> Self {
        Self {
            probes: 32,
            max_q: 4,
            tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthCheckConfig {
    /// Largest relative error of `B` against a closed-form oracle.
    pub oracle_b_tol: f64,
    /// Largest relative error of `a` against a closed-form oracle.
    pub oracle_a_tol: f64,
}

impl Default for GrowthCheckConfig {
    fn default() -> Self {
        Self {
            oracle_b_tol: 1e-6,
            oracle_a_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExceptionalConfig {
    /// Run the local bound sweep for `B` (about 33 circle searches per radius).
    pub local_bound: bool,
    /// Fraction of tail radii at which the `a`-regularity conditions must hold.
    pub regular_fraction: f64,
    /// Largest accepted relative gap of the `a / B^{1+beta}` integral.
    pub e2_tolerance: f64,
}

impl Default for ExceptionalConfig {
    fn default() -> Self {
        Self {
            local_bound: false,
            regular_fraction: 0.9,
            e2_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    function: FunctionSource,
    #[serde(default)]
    tract: Option<TractSpec>,
    #[serde(default)]
    params: GrowthParams,
    #[serde(default)]
    grid: GridSpec,
    #[serde(default)]
    circle: CircleSearch,
    #[serde(default)]
    knobs: VerifierKnobs,
    #[serde(default)]
    growth: GrowthCheckConfig,
    #[serde(default)]
    classical: ClassicalConfig,
    #[serde(default)]
    recurrence: RecurrenceConfig,
    #[serde(default)]
    exceptional: ExceptionalConfig,
    #[serde(default)]
    checks: Vec<String>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub function: FunctionSpec,
    pub tract: TractSpec,
    pub params: GrowthParams,
    pub grid: GridSpec,
    pub circle: CircleSearch,
    pub knobs: VerifierKnobs,
    pub growth: GrowthCheckConfig,
    pub classical: ClassicalConfig,
    pub recurrence: RecurrenceConfig,
    pub exceptional: ExceptionalConfig,
    pub checks: Vec<CheckSet>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

fn read_coefficients(path: &Path) -> Result<Vec<Complex64>> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut rows: Vec<(usize, Complex64)> = Vec::new();
    for rec in rdr.deserialize::<(usize, f64, f64)>() {
        let (n, re, im) = rec.map_err(|e| bad(e.to_string()))?;
        rows.push((n, Complex64::new(re, im)));
    }
    let degree = rows
        .iter()
        .map(|r| r.0)
        .max()
        .ok_or_else(|| bad("no coefficients".into()))?;
    let mut out = vec![Complex64::new(0.0, 0.0); degree + 1];
    for (n, a) in rows {
        out[n] = a;
    }
    Ok(out)
}

fn resolve_function(src: FunctionSource, base: &Path) -> Result<FunctionSpec> {
    match src {
        FunctionSource::Spec(f) => Ok(f),
        FunctionSource::PowerSeriesCsv { path } => Ok(FunctionSpec::PowerSeries {
            coefficients: read_coefficients(&base.join(path))?,
        }),
        FunctionSource::Preset { name, degree } if name == "exp" => Ok(FunctionSpec::exp_series(degree)),
        FunctionSource::Preset { name, .. } => Err(CliError::Config(format!("unknown preset '{name}'"))),
    }
}

/// Default tract: `R = 1`, seeded on the positive axis where `|f|` is largest
/// among a few candidates.
fn default_tract(f: &FunctionSpec) -> TractSpec {
    let seed = [0.5, 0.7, 0.9, 0.95, 0.99]
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .max_by(|a, b| {
            let v = |z: &Complex64| f.ln_abs(&wvlab_core::function_model::DiscPoint::new(*z));
            v(a).total_cmp(&v(b))
        })
        .unwrap_or(Complex64::new(0.5, 0.0));
    TractSpec::new(1.0, seed)
}

impl RunConfig {
    /// Parses TOML; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let function = resolve_function(raw.function, base)?;
        let tract = raw.tract.unwrap_or_else(|| default_tract(&function));
        let checks = parse_checks(&raw.checks.join(","))?;
        let cfg = RunConfig {
            function,
            tract,
            params: raw.params,
            grid: raw.grid,
            circle: raw.circle,
            knobs: raw.knobs,
            growth: raw.growth,
            classical: raw.classical,
            recurrence: raw.recurrence,
            exceptional: raw.exceptional,
            checks,
            output_dir: base.join(raw.output_dir.unwrap_or_else(|| PathBuf::from("out"))),
            seed: raw.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: wvlab_core::Error| CliError::Config(e.to_string());
        self.function.validate().map_err(cfg)?;
        self.tract.validate(&self.function).map_err(cfg)?;
        self.params.validate().map_err(cfg)?;
        self.grid.validate().map_err(cfg)?;
        self.knobs.validate().map_err(cfg)?;
        if self.circle.samples < 8 || !(self.circle.theta_tol > 0.0) {
            return Err(CliError::Config(
                "circle search needs >= 8 samples and a positive tolerance".into(),
            ));
        }
        let c = &self.classical;
        if !(c.gamma_exp > 0.5) || c.max_q == 0 || c.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(CliError::Config(
                "classical: gamma_exp must exceed 1/2, max_q >= 1 and radii positive".into(),
            ));
        }
        let g = &self.growth;
        if !(g.oracle_b_tol > 0.0 && g.oracle_a_tol > 0.0) {
            return Err(CliError::Config("growth: oracle tolerances must be positive".into()));
        }
        let e = &self.exceptional;
        if !((0.0..=1.0).contains(&e.regular_fraction) && e.e2_tolerance > 0.0) {
            return Err(CliError::Config(
                "exceptional: regular_fraction must lie in [0, 1] and e2_tolerance be positive".into(),
            ));
        }
        if self.recurrence.probes == 0 || self.recurrence.max_q == 0 {
            return Err(CliError::Config("recurrence: probes and max_q must be positive".into()));
        }
        Ok(())
    }

    /// Coefficients for the classical checks: the main function when it is a
    /// power series, otherwise truncated `e^z`.
    pub fn classical_coefficients(&self) -> Vec<Complex64> {
        match &self.function {
            FunctionSpec::PowerSeries { coefficients } => coefficients.clone(),
            _ => match FunctionSpec::exp_series(self.classical.degree) {
                FunctionSpec::PowerSeries { coefficients } => coefficients,
                _ => unreachable!("exp_series is a power series"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::from_toml("[function]\nkind = \"power_law\"\ngamma = 2.0\n", Path::new("/tmp/x")).unwrap();
        assert_eq!(cfg.function, FunctionSpec::power_law(2.0));
        assert_eq!(cfg.grid.points, 512);
        assert_eq!(cfg.knobs.window_threshold, 10.0);
        assert!(cfg.checks.is_empty());
        assert_eq!(cfg.output_dir, PathBuf::from("/tmp/x/out"));
        assert_eq!(cfg.tract.threshold, 1.0);
    }

    #[test]
    fn full_config() {
        let text = r#"
checks = ["thm1", "growth", "thm1"]
seed = 7
output_dir = "results"

[function]
kind = "exp_pole"
c = 1.0
k = 2.0

[tract]
threshold = 1.0
seed = [0.5, 0.0]

[params]
r0 = 0.3
beta = 0.25
delta = 0.5
rho0 = 0.5

[grid]
points = 64
span = 6.0

[knobs]
window_threshold = 100.0
"#;
        let cfg = RunConfig::from_toml(text, Path::new("base")).unwrap();
        assert_eq!(cfg.checks, vec![CheckSet::Growth, CheckSet::Thm1]);
        assert_eq!(cfg.params.rho0, Some(0.5));
        assert_eq!(cfg.knobs.window_threshold, 100.0);
        assert_eq!(cfg.knobs.base_tol, 0.05);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.output_dir, PathBuf::from("base/results"));
    }

    #[test]
    fn preset_and_unknown_keys() {
        let cfg = RunConfig::from_toml(
            "[function]\nkind = \"preset\"\nname = \"exp\"\ndegree = 30\n[tract]\nthreshold = 1.0\nseed = [0.5, 0.0]\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(cfg.function, FunctionSpec::exp_series(30));
        let err = RunConfig::from_toml(
            "[function]\nkind = \"power_law\"\ngamma = 2.0\n[grid]\npoints = 3\nbogus = 1\n",
            Path::new("."),
        );
        assert!(matches!(err, Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_check_id_is_a_config_error() {
        assert!(matches!(parse_checks("thm1,thm9"), Err(CliError::Config(_))));
        assert_eq!(parse_checks("").unwrap(), vec![]);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let err = RunConfig::from_toml(
            "[function]\nkind = \"power_law\"\ngamma = 2.0\n[params]\nbeta = 0.9\n",
            Path::new("."),
        );
        assert!(matches!(err, Err(CliError::Config(_))));
    }
}
