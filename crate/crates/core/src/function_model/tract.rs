use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::point::DiscPoint;
use super::spec::FunctionSpec;
use crate::error::{Error, Result};

/// Probes placed on the segment from the seed when deciding tract membership.
pub const MEMBERSHIP_PROBES: usize = 256;

/// One direct tract: the component of `{|f| > R}` containing `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractSpec {
    pub threshold: f64,
    pub seed: Complex64,
    #[serde(default = "default_probes")]
    pub membership_probes: usize,
}

fn default_probes() -> usize {
    MEMBERSHIP_PROBES
}

impl TractSpec {
    pub fn new(threshold: f64, seed: Complex64) -> Self {
        Self {
            threshold,
            seed,
            membership_probes: MEMBERSHIP_PROBES,
        }
    }

    pub fn ln_threshold(&self) -> f64 {
        self.threshold.ln()
    }

    pub fn validate(&self, f: &FunctionSpec) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "tract threshold must be positive, got {}",
                self.threshold
            )));
        }
        let seed = DiscPoint::new(self.seed);
        seed.require_in_disc()?;
        if f.ln_abs(&seed) <= self.ln_threshold() {
            return Err(Error::InvalidSpec(format!(
                "|f(seed)| does not exceed R = {} at seed {}",
                self.threshold, self.seed
            )));
        }
        if self.membership_probes == 0 {
            return Err(Error::InvalidSpec("membership_probes must be positive".into()));
        }
        Ok(())
    }

    /// Sampled connectivity test: `|f| > R` at `p` and at every probe on the
    /// straight segment from the seed to `p`.
    pub fn contains(&self, f: &FunctionSpec, p: &DiscPoint) -> bool {
        let lr = self.ln_threshold();
        if !p.in_disc() || !(f.ln_abs(p) > lr) {
            return false;
        }
        let seed = DiscPoint::new(self.seed);
        let delta = p.z - seed.z;
        let n = self.membership_probes;
        (0..n).all(|j| {
            let t = j as f64 / n as f64;
            f.ln_abs(&seed.shifted(delta * t)) > lr
        })
    }

    /// A pole of `f` lying on the sampled seed-to-`p` segment, if any.
    fn pole_on_segment(&self, f: &FunctionSpec, p: &DiscPoint) -> Option<Complex64> {
        let delta = p.z - self.seed;
        let spacing = delta.norm() / self.membership_probes as f64;
        f.poles().into_iter().find(|&pole| {
            let t = if delta.norm() == 0.0 {
                0.0
            } else {
                ((pole - self.seed) * delta.conj()).re / delta.norm_sqr()
            };
            let closest = self.seed + delta * t.clamp(0.0, 1.0);
            (pole - closest).norm() <= spacing.max(1e-12)
        })
    }
}

/// The subharmonic tract function `v = log|f/R|` on the tract, `0` elsewhere.
pub fn v_eval(f: &FunctionSpec, tract: &TractSpec, p: &DiscPoint) -> Result<f64> {
    if !tract.contains(f, p) {
        return Ok(0.0);
    }
    if let Some(pole) = tract.pole_on_segment(f, p) {
        return Err(Error::TractViolation { pole });
    }
    let v = f.ln_abs(p) - tract.ln_threshold();
    Ok(v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_law_values() {
        let f = FunctionSpec::power_law(2.0);
        let t = TractSpec::new(1.0, c(0.5, 0.0));
        assert_eq!(v_eval(&f, &t, &DiscPoint::new(c(0.0, 0.0))).unwrap(), 0.0);
        let v = v_eval(&f, &t, &DiscPoint::new(c(0.9, 0.0))).unwrap();
        assert!((v - 100f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exp_pole_whole_disc_is_tract() {
        let f = FunctionSpec::exp_pole(1.0, 1.0);
        let t = TractSpec::new(1.0, c(0.5, 0.0));
        let v = v_eval(&f, &t, &DiscPoint::new(c(-0.5, 0.0))).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn disconnected_component_maps_to_zero() {
        // |1 - z^2|^{-1} > 1 on two lobes around +1 and -1; seed in the right lobe.
        let f = FunctionSpec::Product {
            factors: vec![
                FunctionSpec::power_law(1.0),
                FunctionSpec::Pole {
                    center: c(-1.0, 0.0),
                    order: 1,
                },
            ],
        };
        let t = TractSpec::new(1.0, c(0.9, 0.0));
        assert!(v_eval(&f, &t, &DiscPoint::new(c(0.8, 0.0))).unwrap() > 0.0);
        let left = DiscPoint::new(c(-0.9, 0.0));
        assert!(f.ln_abs(&left) > 0.0);
        assert_eq!(v_eval(&f, &t, &left).unwrap(), 0.0);
    }

    #[test]
    fn pole_inside_claimed_tract_is_a_violation() {
        let f = FunctionSpec::Product {
            factors: vec![
                FunctionSpec::power_law(2.0),
                FunctionSpec::Pole {
                    center: c(0.7, 0.0),
                    order: 1,
                },
            ],
        };
        let t = TractSpec::new(1.0, c(0.6, 0.0));
        let r = v_eval(&f, &t, &DiscPoint::new(c(0.8, 0.0)));
        assert!(matches!(r, Err(Error::TractViolation { .. })));
    }

    #[test]
    fn seed_must_exceed_threshold() {
        let f = FunctionSpec::power_law(2.0);
        assert!(TractSpec::new(1.0, c(-0.5, 0.0)).validate(&f).is_err());
        assert!(TractSpec::new(1.0, c(0.5, 0.0)).validate(&f).is_ok());
        assert!(TractSpec::new(0.0, c(0.5, 0.0)).validate(&f).is_err());
    }
}
