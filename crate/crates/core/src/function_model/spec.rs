use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::point::{cexpm1, clog1p, DiscPoint};
use super::series;
use crate::error::{Error, Result};

/// Smallest continuation step, as a fraction of the segment, before a path
/// is declared to run through a zero.
const MIN_STEP_FRACTION: f64 = 1e-14;

/// Declarative test function in the unit disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// Finite polynomial `sum a_n z^n`; every claim is about the polynomial itself.
    PowerSeries {
        coefficients: Vec<Complex64>,
    },
    /// `(1 - z)^{-gamma}`.
    PowerLaw {
        gamma: f64,
    },
    /// `exp(c / (1 - z)^k)`.
    ExpPole {
        c: f64,
        k: f64,
    },
    /// `(center - z)^{-order}`; a genuine pole when `|center| < 1`.
    Pole {
        center: Complex64,
        order: u32,
    },
    Product {
        factors: Vec<FunctionSpec>,
    },
}

impl FunctionSpec {
    pub fn power_law(gamma: f64) -> Self {
        FunctionSpec::PowerLaw { gamma }
    }

    pub fn exp_pole(c: f64, k: f64) -> Self {
        FunctionSpec::ExpPole { c, k }
    }

    /// Taylor polynomial of `e^z` of the given degree.
    pub fn exp_series(degree: usize) -> Self {
        let mut coefficients = Vec::with_capacity(degree + 1);
        let mut term = 1.0;
        for n in 0..=degree {
            if n > 0 {
                term /= n as f64;
            }
            coefficients.push(Complex64::new(term, 0.0));
        }
        FunctionSpec::PowerSeries { coefficients }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self {
            FunctionSpec::PowerSeries { coefficients } => {
                if coefficients.is_empty() {
                    return bad("power series needs at least one coefficient".into());
                }
                if coefficients.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                    return bad("power series coefficients must be finite".into());
                }
                if coefficients.iter().all(|a| a.norm() == 0.0) {
                    return bad("power series is identically zero".into());
                }
                Ok(())
            }
            FunctionSpec::PowerLaw { gamma } => {
                if !(gamma.is_finite() && *gamma > 0.0) {
                    return bad(format!("gamma must be positive, got {gamma}"));
                }
                Ok(())
            }
            FunctionSpec::ExpPole { c, k } => {
                if !(c.is_finite() && *c > 0.0) {
                    return bad(format!("c must be positive, got {c}"));
                }
                if !(k.is_finite() && *k > 0.0) {
                    return bad(format!("k must be positive, got {k}"));
                }
                Ok(())
            }
            FunctionSpec::Pole { center, order } => {
                if *order == 0 {
                    return bad("pole order must be at least 1".into());
                }
                if !(center.re.is_finite() && center.im.is_finite()) {
                    return bad("pole center must be finite".into());
                }
                if (center - 1.0).norm() == 0.0 {
                    return bad("pole center coincides with z = 1".into());
                }
                Ok(())
            }
            FunctionSpec::Product { factors } => {
                if factors.is_empty() {
                    return bad("product needs at least one factor".into());
                }
                factors.iter().try_for_each(FunctionSpec::validate)
            }
        }
    }

    /// Poles of `f` inside the open unit disc.
    pub fn poles(&self) -> Vec<Complex64> {
        match self {
            FunctionSpec::Pole { center, .. } if center.norm() < 1.0 => vec![*center],
            FunctionSpec::Product { factors } => factors.iter().flat_map(|f| f.poles()).collect(),
            _ => Vec::new(),
        }
    }

    /// Closed-form growth order, when the function is a catalog entry.
    pub fn catalog_order(&self) -> Option<f64> {
        match self {
            FunctionSpec::PowerLaw { .. } => Some(0.0),
            FunctionSpec::ExpPole { k, .. } => Some(*k),
            FunctionSpec::Product { factors } => factors
                .iter()
                .map(|f| f.catalog_order())
                .try_fold(0.0f64, |acc, o| o.map(|o| acc.max(o))),
            _ => None,
        }
    }

    /// Distance from `p` to the nearest known singularity, used to scale
    /// numerical differentiation steps.
    pub fn singularity_distance(&self, p: &DiscPoint) -> f64 {
        match self {
            FunctionSpec::PowerSeries { .. } => 1.0,
            FunctionSpec::PowerLaw { .. } | FunctionSpec::ExpPole { .. } => p.w.norm(),
            FunctionSpec::Pole { center, .. } => pole_offset(*center, p).norm(),
            FunctionSpec::Product { factors } => factors
                .iter()
                .map(|f| f.singularity_distance(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `log f(p)` on the branch used to anchor continuations.
    ///
    /// Closed-form entries use their analytic logarithm in the disc (which
    /// vanishes at 0 for `PowerLaw`); power series use the principal value.
    pub fn anchor_log(&self, p: &DiscPoint) -> Result<Complex64> {
        match self {
            FunctionSpec::PowerSeries { coefficients } => {
                let v = series::eval(coefficients, p.z);
                if v.is_zero() {
                    return Err(Error::PoleOrZeroAt { at: p.z });
                }
                Ok(v.ln())
            }
            FunctionSpec::PowerLaw { gamma } => {
                nonzero_w(p)?;
                Ok(-*gamma * p.w.ln())
            }
            FunctionSpec::ExpPole { c, k } => {
                nonzero_w(p)?;
                Ok(*c * (-*k * p.w.ln()).exp())
            }
            FunctionSpec::Pole { center, order } => {
                let u = pole_offset(*center, p);
                if u.norm() == 0.0 {
                    return Err(Error::PoleOrZeroAt { at: p.z });
                }
                Ok(-(*order as f64) * u.ln())
            }
            FunctionSpec::Product { factors } => factors.iter().map(|f| f.anchor_log(p)).sum(),
        }
    }

    /// `log |f(p)|`; `+inf` at poles and `-inf` at zeros.
    pub fn ln_abs(&self, p: &DiscPoint) -> f64 {
        match self {
            FunctionSpec::PowerSeries { coefficients } => series::eval(coefficients, p.z).ln_abs(),
            FunctionSpec::PowerLaw { gamma } => -*gamma * p.w.norm().ln(),
            FunctionSpec::ExpPole { c, k } => {
                let m = p.w.norm();
                *c * m.powf(-*k) * (*k * p.w.arg()).cos()
            }
            FunctionSpec::Pole { center, order } => -(*order as f64) * pole_offset(*center, p).norm().ln(),
            FunctionSpec::Product { factors } => factors.iter().map(|f| f.ln_abs(p)).sum(),
        }
    }

    /// `log f(anchor + delta) - log f(anchor)`, continued along the straight
    /// segment from `anchor`.
    pub fn log_ratio(&self, anchor: &DiscPoint, delta: Complex64, steps: usize) -> Result<Complex64> {
        anchor.require_in_disc()?;
        anchor.shifted(delta).require_in_disc()?;
        self.log_ratio_inner(anchor, delta, steps.max(1))
    }

    fn log_ratio_inner(&self, anchor: &DiscPoint, delta: Complex64, steps: usize) -> Result<Complex64> {
        // Closed forms: along a straight segment the argument of a linear
        // factor sweeps less than pi, so the principal log1p is the continuation.
        match self {
            FunctionSpec::PowerSeries { coefficients } => series_log_ratio(coefficients, anchor.z, delta, steps),
            FunctionSpec::PowerLaw { gamma } => {
                nonzero_w(anchor)?;
                Ok(-*gamma * clog1p(-delta / anchor.w))
            }
            FunctionSpec::ExpPole { c, k } => {
                nonzero_w(anchor)?;
                let base = *c * (-*k * anchor.w.ln()).exp();
                Ok(base * cexpm1(-*k * clog1p(-delta / anchor.w)))
            }
            FunctionSpec::Pole { center, order } => {
                let u = pole_offset(*center, anchor);
                if segment_hits_origin(u, delta) {
                    return Err(Error::ZeroOrPoleOnPath { at: *center });
                }
                Ok(-(*order as f64) * clog1p(-delta / u))
            }
            FunctionSpec::Product { factors } => factors.iter().map(|f| f.log_ratio_inner(anchor, delta, steps)).sum(),
        }
    }

    /// Derivatives `h', h'', ..., h^{(m)}` of `h = log f` at `p`.
    pub fn log_derivatives(&self, p: &DiscPoint, m: usize) -> Result<Vec<Complex64>> {
        match self {
            FunctionSpec::PowerSeries { coefficients } => {
                let ratios = series_ratios(coefficients, p.z, m)?;
                Ok(bell_inverse(&ratios))
            }
            FunctionSpec::PowerLaw { gamma } => {
                nonzero_w(p)?;
                Ok(rational_log_derivatives(*gamma, p.w, m))
            }
            FunctionSpec::ExpPole { c, k } => {
                nonzero_w(p)?;
                let lw = p.w.ln();
                let mut out = Vec::with_capacity(m);
                let mut rising = *c;
                for j in 1..=m {
                    rising *= *k + (j - 1) as f64;
                    out.push(rising * (-(*k + j as f64) * lw).exp());
                }
                Ok(out)
            }
            FunctionSpec::Pole { center, order } => {
                let u = pole_offset(*center, p);
                if u.norm() == 0.0 {
                    return Err(Error::PoleOrZeroAt { at: p.z });
                }
                Ok(rational_log_derivatives(*order as f64, u, m))
            }
            FunctionSpec::Product { factors } => {
                let mut acc = vec![Complex64::new(0.0, 0.0); m];
                for f in factors {
                    for (a, d) in acc.iter_mut().zip(f.log_derivatives(p, m)?) {
                        *a += d;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// `[L_1(p), ..., L_m(p)]` with `L_q = f^{(q)} / f`.
    pub fn logderiv_tower(&self, p: &DiscPoint, m: usize) -> Result<Vec<Complex64>> {
        if m == 0 {
            return Err(Error::Precondition("tower order must be at least 1".into()));
        }
        match self {
            FunctionSpec::PowerSeries { coefficients } => series_ratios(coefficients, p.z, m),
            _ => Ok(bell(&self.log_derivatives(p, m)?)),
        }
    }

    /// Straightforward evaluation of `f(z)` without log-space tricks.
    /// Overflows for large values; meant as an independent cross-check.
    pub fn direct_value(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            FunctionSpec::PowerSeries { coefficients } => coefficients
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a),
            FunctionSpec::PowerLaw { gamma } => (one - z).powf(-*gamma),
            FunctionSpec::ExpPole { c, k } => ((one - z).powf(-*k) * *c).exp(),
            FunctionSpec::Pole { center, order } => (center - z).powi(-(*order as i32)),
            FunctionSpec::Product { factors } => factors.iter().map(|f| f.direct_value(z)).product(),
        }
    }
}

fn nonzero_w(p: &DiscPoint) -> Result<()> {
    if p.w.norm() == 0.0 {
        Err(Error::PoleOrZeroAt { at: p.z })
    } else {
        Ok(())
    }
}

/// `center - z`, built from the accurate `1 - z`.
fn pole_offset(center: Complex64, p: &DiscPoint) -> Complex64 {
    (center - 1.0) + p.w
}

/// Whether `u - t * delta` vanishes (to rounding) for some `t` in `[0, 1]`.
fn segment_hits_origin(u: Complex64, delta: Complex64) -> bool {
    let scale = u.norm().max(delta.norm());
    if delta.norm() == 0.0 {
        return u.norm() <= 1e-12 * scale;
    }
    let t = ((u * delta.conj()).re / delta.norm_sqr()).clamp(0.0, 1.0);
    (u - delta * t).norm() <= 1e-12 * scale
}

/// Derivatives of `-s log(u)` w.r.t. `z` where `du/dz = -1`: `s (j-1)! / u^j`.
fn rational_log_derivatives(s: f64, u: Complex64, m: usize) -> Vec<Complex64> {
    let inv = u.inv();
    let mut out = Vec::with_capacity(m);
    let mut pow = inv;
    let mut fact = 1.0;
    for j in 1..=m {
        if j > 1 {
            fact *= (j - 1) as f64;
            pow *= inv;
        }
        out.push(pow * (s * fact));
    }
    out
}

fn series_ratios(coefficients: &[Complex64], z: Complex64, m: usize) -> Result<Vec<Complex64>> {
    let f = series::eval(coefficients, z);
    if f.is_zero() {
        return Err(Error::PoleOrZeroAt { at: z });
    }
    Ok((1..=m)
        .map(|q| {
            let d = series::eval_derivative(coefficients, z, q);
            if d.mantissa.norm() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                d.ratio(&f)
            }
        })
        .collect())
}

fn binomials(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// Complete Bell recurrence: `L_{n+1} = sum_k C(n,k) h^{(k+1)} L_{n-k}`, `L_0 = 1`.
pub(crate) fn bell(h: &[Complex64]) -> Vec<Complex64> {
    let m = h.len();
    let mut l = Vec::with_capacity(m + 1);
    l.push(Complex64::new(1.0, 0.0));
    for n in 0..m {
        let c = binomials(n);
        let next = (0..=n).map(|k| h[k] * l[n - k] * c[k]).sum();
        l.push(next);
    }
    l.remove(0);
    l
}

/// Inverse of [`bell`]: recovers `h^{(1..m)}` from `L_{1..m}`.
pub(crate) fn bell_inverse(l: &[Complex64]) -> Vec<Complex64> {
    let m = l.len();
    let lq = |q: usize| if q == 0 { Complex64::new(1.0, 0.0) } else { l[q - 1] };
    let mut h: Vec<Complex64> = Vec::with_capacity(m);
    for n in 0..m {
        let c = binomials(n);
        let known: Complex64 = (0..n).map(|k| h[k] * lq(n - k) * c[k]).sum();
        h.push(lq(n + 1) - known);
    }
    h
}

fn wrap_phase(d: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut d = d % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}

/// Branch tracking for power series: the segment is walked with adaptive
/// halving until every phase increment is below pi/4.
fn series_log_ratio(
    coefficients: &[Complex64],
    anchor: Complex64,
    delta: Complex64,
    steps: usize,
) -> Result<Complex64> {
    let start = series::eval(coefficients, anchor);
    if start.is_zero() {
        return Err(Error::ZeroOrPoleOnPath { at: anchor });
    }
    let base = 1.0 / steps as f64;
    let mut t = 0.0;
    let mut prev = start;
    let mut phase = 0.0;
    while t < 1.0 {
        let mut dt = base.min(1.0 - t);
        loop {
            let at = anchor + delta * (t + dt);
            let next = series::eval(coefficients, at);
            if next.is_zero() {
                return Err(Error::ZeroOrPoleOnPath { at });
            }
            let inc = wrap_phase(next.mantissa.arg() - prev.mantissa.arg());
            if inc.abs() < FRAC_PI_4 {
                phase += inc;
                prev = next;
                t = if 1.0 - (t + dt) < 0.5 * MIN_STEP_FRACTION {
                    1.0
                } else {
                    t + dt
                };
                break;
            }
            dt *= 0.5;
            if dt < MIN_STEP_FRACTION {
                return Err(Error::ZeroOrPoleOnPath { at });
            }
        }
    }
    Ok(Complex64::new(prev.ln_abs() - start.ln_abs(), phase))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(FunctionSpec::power_law(0.0).validate().is_err());
        assert!(FunctionSpec::exp_pole(1.0, -1.0).validate().is_err());
        assert!(FunctionSpec::exp_pole(-1.0, 1.0).validate().is_err());
        assert!(FunctionSpec::PowerSeries { coefficients: vec![] }.validate().is_err());
        assert!(FunctionSpec::Product { factors: vec![] }.validate().is_err());
        assert!(FunctionSpec::Pole {
            center: c(0.2, 0.0),
            order: 0
        }
        .validate()
        .is_err());
        assert!(FunctionSpec::Product {
            factors: vec![FunctionSpec::power_law(2.0), FunctionSpec::exp_pole(1.0, 2.0)]
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn bell_roundtrip() {
        let h = vec![c(0.3, 1.0), c(-2.0, 0.5), c(0.7, 0.0), c(1.5, -4.0)];
        let back = bell_inverse(&bell(&h));
        for (a, b) in h.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn power_law_tower_closed_form() {
        let f = FunctionSpec::power_law(2.0);
        let l = f.logderiv_tower(&DiscPoint::new(c(0.5, 0.0)), 2).unwrap();
        assert!((l[0] - c(4.0, 0.0)).norm() < 1e-13);
        assert!((l[1] - c(24.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exp_pole_tower_at_origin() {
        let f = FunctionSpec::exp_pole(1.0, 1.0);
        let l = f.logderiv_tower(&DiscPoint::new(c(0.0, 0.0)), 1).unwrap();
        assert!((l[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_tower_and_errors() {
        let f = FunctionSpec::Pole {
            center: c(0.3, 0.1),
            order: 2,
        };
        assert_eq!(f.poles(), vec![c(0.3, 0.1)]);
        let z = c(-0.2, 0.4);
        let l = f.logderiv_tower(&DiscPoint::new(z), 1).unwrap();
        let expected = c(2.0, 0.0) / (c(0.3, 0.1) - z);
        assert!((l[0] - expected).norm() < 1e-14);
        assert!(matches!(
            f.logderiv_tower(&DiscPoint::new(c(0.3, 0.1)), 1),
            Err(Error::PoleOrZeroAt { .. })
        ));
        let path = f.log_ratio(&DiscPoint::new(c(0.0, 0.0)), c(0.6, 0.2), 8);
        assert!(matches!(path, Err(Error::ZeroOrPoleOnPath { .. })));
    }

    #[test]
    fn series_continuation_winds_past_principal_branch() {
        // f(z) = z^3 + 0.001 near the unit circle: arg f increases by ~3 * angle.
        let mut coefficients = vec![c(0.001, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let f = FunctionSpec::PowerSeries {
            coefficients: coefficients.clone(),
        };
        let a = c(0.9, 0.0);
        let target = a * c(0.0, 1.5).exp();
        let got = f.log_ratio(&DiscPoint::new(a), target - a, 4).unwrap();
        // The chord from 0.9 to 0.9 e^{1.5i} sweeps angle ~1.5 as seen from 0,
        // and z^3 dominates along it.
        let expected_phase = 3.0 * 1.5;
        assert!((got.im - expected_phase).abs() < 1e-2, "{got}");
        coefficients[0] = c(0.0, 0.0);
        let zero_through = FunctionSpec::PowerSeries { coefficients };
        let bad = zero_through.log_ratio(&DiscPoint::new(c(0.5, 0.0)), c(-1.0, 0.0), 4);
        assert!(matches!(bad, Err(Error::ZeroOrPoleOnPath { .. })));
    }

    #[test]
    fn outside_disc_rejected() {
        let f = FunctionSpec::power_law(1.0);
        let r = f.log_ratio(&DiscPoint::new(c(0.0, 0.0)), c(0.0, 1.2), 4);
        assert!(matches!(r, Err(Error::OutsideDisc { .. })));
    }

    #[test]
    fn exp_series_coefficients() {
        let FunctionSpec::PowerSeries { coefficients } = FunctionSpec::exp_series(5) else {
            unreachable!()
        };
        assert_eq!(coefficients.len(), 6);
        assert!((coefficients[5].re - 1.0 / 120.0).abs() < 1e-18);
    }
}
