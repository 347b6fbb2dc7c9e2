//! Log-space evaluation of finite power series.
//!
//! Values are returned as `e^{log_scale} * mantissa` with `|mantissa| <= n_terms`,
//! so neither huge coefficients nor large `|z|` overflow.

use num_complex::Complex64;

/// Relative tolerance under which two log-terms count as tied.
const TIE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub log_scale: f64,
    pub mantissa: Complex64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        log_scale: 0.0,
        mantissa: Complex64 { re: 0.0, im: 0.0 },
    };

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0 || !self.ln_abs().is_finite()
    }

    pub fn ln_abs(&self) -> f64 {
        self.log_scale + self.mantissa.norm().ln()
    }

    /// Principal logarithm of the represented value.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.ln_abs(), self.mantissa.arg())
    }

    /// `self / other` as an ordinary complex number.
    pub fn ratio(&self, other: &Scaled) -> Complex64 {
        (self.mantissa / other.mantissa) * (self.log_scale - other.log_scale).exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }
}

fn ln_falling(n: usize, q: usize) -> f64 {
    ((n - q + 1)..=n).map(|k| (k as f64).ln()).sum()
}

/// `f^{(q)}(z)` for `f = sum a_n z^n`, in log-space.
pub fn eval_derivative(coefficients: &[Complex64], z: Complex64, q: usize) -> Scaled {
    let mut terms: Vec<(f64, f64)> = Vec::with_capacity(coefficients.len());
    if z == Complex64::new(0.0, 0.0) {
        if let Some(a) = coefficients.get(q) {
            if a.norm() > 0.0 {
                terms.push((a.norm().ln() + ln_falling(q, q), a.arg()));
            }
        }
    } else {
        let (lz, az) = (z.norm().ln(), z.arg());
        for (n, a) in coefficients.iter().enumerate().skip(q) {
            let m = a.norm();
            if m == 0.0 {
                continue;
            }
            let p = (n - q) as f64;
            terms.push((m.ln() + ln_falling(n, q) + p * lz, a.arg() + p * az));
        }
    }
    let Some(top) = terms.iter().map(|t| t.0).reduce(f64::max) else {
        return Scaled::ZERO;
    };
    let mantissa = terms
        .iter()
        .map(|&(l, ph)| Complex64::from_polar((l - top).exp(), ph))
        .sum();
    Scaled {
        log_scale: top,
        mantissa,
    }
}

pub fn eval(coefficients: &[Complex64], z: Complex64) -> Scaled {
    eval_derivative(coefficients, z, 0)
}

/// Maximum term `ln mu(r)` and the largest index attaining it.
pub fn max_term(coefficients: &[Complex64], r: f64) -> (f64, usize) {
    let lr = r.ln();
    let logs: Vec<f64> = coefficients
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let m = a.norm();
            if m == 0.0 {
                f64::NEG_INFINITY
            } else {
                m.ln() + n as f64 * lr
            }
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_REL * top.abs().max(1.0);
    let index = logs.iter().rposition(|&l| l >= top - tol).unwrap_or(0);
    (top, index)
}
