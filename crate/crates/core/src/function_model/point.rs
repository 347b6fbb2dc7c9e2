//! Points of the unit disc carried together with an accurate `1 - z`.
//!
//! Near the boundary the interesting discs have radii far below the spacing
//! of `f64` around 1, so `z` alone cannot resolve them. Every point keeps the
//! complement `w = 1 - z` computed without cancellation, and all closed-form
//! catalog functions (which depend on `z` only through `1 - z`) read `w`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plain disc coordinate; used wherever precision near `|z| = 1` is not an issue.
pub type ComplexPoint = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint {
    pub z: Complex64,
    /// `1 - z`, accurate to a few ulps relative to its own magnitude.
    pub w: Complex64,
}

impl DiscPoint {
    pub fn new(z: Complex64) -> Self {
        Self {
            z,
            w: Complex64::new(1.0 - z.re, -z.im),
        }
    }

    /// The point `r e^{i theta}` with `r = 1 - e^{-x}`.
    pub fn on_circle(x: f64, theta: f64) -> Self {
        let one_minus_r = (-x).exp();
        let r = -(-x).exp_m1();
        let (s, c) = theta.sin_cos();
        let half = (0.5 * theta).sin();
        Self {
            z: Complex64::new(r * c, r * s),
            w: Complex64::new(one_minus_r + 2.0 * r * half * half, -r * s),
        }
    }

    /// `self + d`, keeping `w` exact in `d`.
    pub fn shifted(&self, d: Complex64) -> Self {
        Self {
            z: self.z + d,
            w: self.w - d,
        }
    }

    /// `1 - |z|^2`, computed from `w` so it stays accurate near the boundary.
    pub fn boundary_gap(&self) -> f64 {
        2.0 * self.w.re - self.w.norm_sqr()
    }

    pub fn in_disc(&self) -> bool {
        self.boundary_gap() > 0.0
    }

    pub fn require_in_disc(&self) -> Result<()> {
        if self.in_disc() {
            Ok(())
        } else {
            Err(Error::OutsideDisc { at: self.z })
        }
    }
}

impl From<Complex64> for DiscPoint {
    fn from(z: Complex64) -> Self {
        DiscPoint::new(z)
    }
}

/// `log(1 + u)` on the principal branch, accurate for small `|u|`.
pub fn clog1p(u: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p();
    let im = u.im.atan2(1.0 + u.re);
    Complex64::new(re, im)
}

/// `exp(s) - 1`, accurate for small `|s|`.
pub fn cexpm1(s: Complex64) -> Complex64 {
    let (sb, cb) = s.im.sin_cos();
    let half = (0.5 * s.im).sin();
    let re = s.re.exp_m1() * cb - 2.0 * half * half;
    let im = s.re.exp() * sb;
    Complex64::new(re, im)
}
