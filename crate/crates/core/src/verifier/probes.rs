use std::f64::consts::TAU;

use num_complex::Complex64;

/// Concentric rings of equally spaced rays plus the centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeLayout {
    pub rings: usize,
    pub rays: usize,
}

impl ProbeLayout {
    pub fn new(rings: usize, rays: usize) -> Self {
        Self { rings, rays }
    }

    pub fn count(&self) -> usize {
        self.rings * self.rays + 1
    }
}

/// Offsets from the disc centre; ring `i` has radius `radius * i / rings`,
/// so the outermost ring lies on the boundary. The centre comes first.
pub fn disc_probes(radius: f64, layout: ProbeLayout) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(layout.count());
    out.push(Complex64::new(0.0, 0.0));
    for i in 1..=layout.rings {
        let rho = radius * i as f64 / layout.rings as f64;
        for j in 0..layout.rays {
            out.push(Complex64::from_polar(rho, TAU * j as f64 / layout.rays as f64));
        }
    }
    out
}
