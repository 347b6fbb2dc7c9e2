//! Local checks around the maximum point `z_r`: the disc stays in the tract,
//! `f` behaves like the monomial `f(z_r) (z/z_r)^{a(r)}`, and the
//! logarithmic-derivative tower behaves like `(a(r)/z)^q`. Also the
//! zero-order upper bounds and the classical checks for entire functions.

mod classical;
pub mod export;
mod local;
mod probes;
mod recurrence;
mod sweep;
mod zero_order;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use classical::{classical_asym_check, classical_sweep, ClassicalSweep};
pub use local::{g_eval, higher_logderiv_check, logderiv_check, logderiv_tolerance, monomial_check, tract_disc_check};
pub use probes::{disc_probes, ProbeLayout};
pub use recurrence::{recurrence_check, RecurrenceReport};
pub use sweep::{tail_samples, thm1_sweep, thm2_sweep, PipelineStatus, Thm1Sweep, Thm2Sweep};
pub use zero_order::{zero_order_checks, ZeroOrderReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    TractDisc,
    Monomial,
    Logderiv,
    HigherLogderiv,
    AepsDivergence,
    ZeroOrderGrowth,
    ZeroOrderAeps,
    ZeroOrderBound,
    NegativeControl,
    ClassicalAsym,
}

impl CheckId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::TractDisc => "tract_disc",
            CheckId::Monomial => "monomial",
            CheckId::Logderiv => "logderiv",
            CheckId::HigherLogderiv => "higher_logderiv",
            CheckId::AepsDivergence => "aeps_divergence",
            CheckId::ZeroOrderGrowth => "zero_order_growth",
            CheckId::ZeroOrderAeps => "zero_order_aeps",
            CheckId::ZeroOrderBound => "zero_order_bound",
            CheckId::NegativeControl => "negative_control",
            CheckId::ClassicalAsym => "classical_asym",
        }
    }
}

/// One record per `(check, r, q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: CheckId,
    pub r: f64,
    pub q: Option<usize>,
    pub disc_radius: f64,
    pub probes: usize,
    /// Relative error, or bound ratio for the upper-bound checks.
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Offset from `z_r` of the worst probe.
    pub worst_probe: Option<Complex64>,
    pub a_eps: Option<f64>,
    /// Check-specific companion value, e.g. `|e^g - 1|` for the monomial check.
    pub secondary: Option<f64>,
}

impl VerificationReport {
    fn new(check: CheckId, r: f64, disc_radius: f64, probes: usize) -> Self {
        Self {
            check,
            r,
            q: None,
            disc_radius,
            probes,
            max_rel_err: 0.0,
            tolerance: 0.0,
            pass: false,
            worst_probe: None,
            a_eps: None,
            secondary: None,
        }
    }

    /// Deterministic merge order.
    pub fn sort_key(&self) -> (CheckId, u64, usize) {
        (self.check, self.r.to_bits(), self.q.unwrap_or(0))
    }
}

pub fn sort_reports(reports: &mut [VerificationReport]) {
    reports.sort_by_key(|r| r.sort_key());
}

/// Tolerances, probe counts and thresholds of the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifierKnobs {
    /// Floor of every relative-error tolerance.
    pub base_tol: f64,
    /// Constant in the log-derivative tolerance schedule.
    pub c_g: f64,
    /// `sigma = eps / sigma_divisor`.
    pub sigma_divisor: f64,
    /// Radius factor of the log-derivative disc.
    pub logderiv_t: f64,
    pub rays: usize,
    /// Rings for the monomial, log-derivative and tract discs.
    pub disc_rings: usize,
    /// Rings for the higher-derivative and zero-order discs.
    pub higher_rings: usize,
    /// Rings for the classical checks.
    pub classical_rings: usize,
    /// Steps of the continuation path for `log f`.
    pub path_steps: usize,
    /// Highest derivative order `M`.
    pub max_q: usize,
    /// Minimum window diagnostic for a positive-order window.
    pub window_threshold: f64,
    /// `a(r) eps(r)` must exceed this at accepted radii.
    pub aeps_min: f64,
    /// Order estimates below this count as zero order.
    pub zero_order_max: f64,
    /// Margin added to `1 + beta` in the zero-order exponent.
    pub zero_order_margin: f64,
    /// Floor of the negative control `|L_2 z^2 / a^2 - 1|`.
    pub negative_control_floor: f64,
    /// Use `2 phi_hat` in the monomial tolerance when available.
    pub phi_tolerance: bool,
    /// Fraction of radii that must pass in a sweep.
    pub sweep_pass_rate: f64,
    /// Relative errors below this are treated as equal when judging trends;
    /// it is roughly the accuracy of the finite-difference `a(r)`.
    pub trend_resolution: f64,
}

impl Default for VerifierKnobs {
    fn default() -> Self {
        Self {
            base_tol: 0.05,
            c_g: 1.0,
            sigma_divisor: 2048.0,
            logderiv_t: 1.0,
            rays: 32,
            disc_rings: 8,
            higher_rings: 4,
            classical_rings: 2,
            path_steps: 16,
            max_q: 3,
            window_threshold: 10.0,
            aeps_min: 10.0,
            zero_order_max: 0.1,
            zero_order_margin: 0.1,
            negative_control_floor: 0.25,
            phi_tolerance: false,
            sweep_pass_rate: 0.9,
            trend_resolution: 1e-8,
        }
    }
}

impl VerifierKnobs {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::InvalidSpec(m.into()));
        if !(self.base_tol > 0.0 && self.c_g > 0.0 && self.sigma_divisor > 0.0) {
            return bad("base_tol, c_g and sigma_divisor must be positive");
        }
        if !(self.logderiv_t > 0.0 && self.logderiv_t < 2.0) {
            return bad("logderiv_t must lie in (0, 2)");
        }
        if self.rays == 0 || self.disc_rings == 0 || self.higher_rings == 0 || self.classical_rings == 0 {
            return bad("probe rings and rays must be positive");
        }
        if self.max_q == 0 {
            return bad("max_q must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.sweep_pass_rate) {
            return bad("sweep_pass_rate must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn disc_layout(&self) -> ProbeLayout {
        ProbeLayout::new(self.disc_rings, self.rays)
    }

    pub fn higher_layout(&self) -> ProbeLayout {
        ProbeLayout::new(self.higher_rings, self.rays)
    }

    pub fn classical_layout(&self) -> ProbeLayout {
        ProbeLayout::new(self.classical_rings, self.rays)
    }
}
