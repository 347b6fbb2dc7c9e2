//! Command-line front end. Every global flag can also be set through an
//! environment variable with the `WVLAB_` prefix.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use wvlab_core::verifier::classical_sweep;

use crate::config::{parse_checks, CheckSet, RunConfig};
use crate::error::{CliError, Result};
use crate::pipeline::{self, write_artifact, write_text};
use crate::{artifacts, report};

#[derive(Debug, Parser)]
#[command(
    name = "wvlab",
    version,
    about = "Numerical Wiman-Valiron checks for functions in the unit disc"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (TOML)
    #[arg(long, global = true, env = "WVLAB_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory, or output file for single-artifact commands
    #[arg(long, global = true, env = "WVLAB_OUT")]
    pub out: Option<PathBuf>,
    /// Comma-separated check ids, replacing the configured list
    #[arg(long, global = true, env = "WVLAB_CHECK")]
    pub check: Option<String>,
    /// Single radius for `verify`
    #[arg(long, global = true, env = "WVLAB_R")]
    pub r: Option<f64>,
    /// Number of grid points, replacing the configured value
    #[arg(long, global = true, env = "WVLAB_GRID_POINTS")]
    pub grid_points: Option<usize>,
    /// Worker threads (default: one per core)
    #[arg(long, global = true, env = "WVLAB_WORKERS")]
    pub workers: Option<usize>,
    /// Seed of the randomized probes
    #[arg(long, global = true, env = "WVLAB_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured pipeline and write all artifacts
    Run,
    /// Sample B, a and eps on the grid
    Growth,
    /// Measure the exceptional set
    Exceptional,
    /// Run the verifier checks, or the checks at a single radius with --r
    Verify,
    /// Classical asymptotics of a truncated power series
    Classical,
    /// Aggregate a finished run directory
    Report {
        /// Run directory (defaults to --out, then ./out)
        #[arg(long, env = "WVLAB_DIR")]
        dir: Option<PathBuf>,
    },
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wvlab: {e}");
            e.exit_code()
        }
    }
}

fn load_config(g: &GlobalArgs) -> Result<RunConfig> {
    let path = g
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(list) = &g.check {
        cfg.checks = parse_checks(list)?;
    }
    if let Some(n) = g.grid_points {
        cfg.grid.points = n;
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &g.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `--out` names a file when it has an extension.
fn out_file(g: &GlobalArgs) -> Option<&Path> {
    g.out.as_deref().filter(|p| p.extension().is_some())
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn emit_json<T: serde::Serialize>(value: &T, file: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output {
        path: file.map(Path::to_path_buf).unwrap_or_default(),
        message: e.to_string(),
    })? + "\n";
    match file {
        Some(path) => write_text(path, &text),
        None => {
            print(&text);
            Ok(())
        }
    }
}

fn code(pass: bool) -> i32 {
    if pass {
        0
    } else {
        1
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    match &cli.command {
        Command::Report { dir } => {
            let dir = dir
                .clone()
                .or_else(|| g.out.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let rep = report::report(&dir)?;
            print(&rep.to_text());
            Ok(code(rep.pass))
        }
        Command::Run => {
            let cfg = load_config(g)?;
            run_and_print(&cfg, g.workers)
        }
        Command::Growth => {
            let cfg = load_config(g)?;
            let profile = pipeline::with_pool(g.workers, || pipeline::build_profile(&cfg))?;
            match out_file(g) {
                Some(path) if path.extension().is_some_and(|e| e == "json") => {
                    write_artifact(path, |w| wvlab_core::growth::export::write_json(&profile, w))?
                }
                Some(path) => write_artifact(path, |w| wvlab_core::growth::export::write_csv(&profile, w))?,
                None => pipeline::write_profile(&profile, &cfg.output_dir)?,
            }
            print(&format!(
                "{} radii from r0 = {}; order estimate {}\n",
                profile.samples.len(),
                profile.validated_r0(),
                profile
                    .order_estimate
                    .map_or("unavailable".into(), |o| format!("{o:.4}"))
            ));
            Ok(0)
        }
        Command::Exceptional => {
            let cfg = load_config(g)?;
            let (profile, art) = pipeline::with_pool(g.workers, || {
                let profile = pipeline::build_profile(&cfg)?;
                let art = pipeline::exceptional_stage(&cfg, &profile);
                Ok((profile, art))
            })?;
            match out_file(g) {
                Some(path) => emit_json(&art, Some(path))?,
                None => pipeline::write_exceptional(&art, &cfg.output_dir)?,
            }
            let summary = pipeline::exceptional_pipeline(&cfg, &profile, &art);
            print(&format!("{}\n", summary.line()));
            Ok(code(summary.outcome != pipeline::Outcome::Fail))
        }
        Command::Verify => {
            let mut cfg = load_config(g)?;
            if g.check.is_none() {
                cfg.checks = vec![CheckSet::Thm1];
            }
            match g.r {
                Some(r) => {
                    let [check] = cfg.checks[..] else {
                        return Err(CliError::Config("--r needs exactly one check (thm1 or thm2)".into()));
                    };
                    let rec = pipeline::with_pool(g.workers, || pipeline::verify_radius(&cfg, check, r))?;
                    emit_json(&rec, out_file(g))?;
                    Ok(code(rec.pass))
                }
                None => run_and_print(&cfg, g.workers),
            }
        }
        Command::Classical => {
            let cfg = load_config(g)?;
            let c = &cfg.classical;
            let sweep = pipeline::with_pool(g.workers, || {
                classical_sweep(
                    &cfg.classical_coefficients(),
                    &c.radii,
                    c.gamma_exp,
                    c.max_q,
                    c.tolerance,
                    c.pass_rate,
                    cfg.knobs.classical_layout(),
                )
                .map_err(CliError::stage("classical"))
            })?;
            match out_file(g) {
                Some(path) => emit_json(&sweep, Some(path))?,
                None => emit_json(&sweep, Some(&cfg.output_dir.join(artifacts::CLASSICAL_JSON)))?,
            }
            print(&format!(
                "classical: {} (pass rate {:.3})\n",
                if sweep.pass { "pass" } else { "fail" },
                sweep.pass_rate
            ));
            Ok(code(sweep.pass))
        }
    }
}

fn run_and_print(cfg: &RunConfig, workers: Option<usize>) -> Result<i32> {
    let outcome = pipeline::run(cfg, workers)?;
    match &outcome.summary {
        Some(s) => print(&s.to_text()),
        None => print(&format!(
            "no checks requested; profile written to {}\n",
            cfg.output_dir.join(artifacts::PROFILE_CSV).display()
        )),
    }
    Ok(outcome.exit_code())
}
