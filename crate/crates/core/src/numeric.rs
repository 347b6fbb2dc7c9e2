//! Small numerical helpers shared by the growth, exceptional and verifier modules.

use num_complex::Complex64;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of `f` on `[a, b]`, stopping once
/// the bracket is shorter than `tol`. Returns `(x_max, f_max)`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // 200 iterations shrink any bracket by 1e-41.
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Central difference with one Richardson level: combines steps `h` and `h/2`.
/// Quotients divide by the spacing of the rounded arguments, which differs
/// from `2h` when `h` is far below `ulp(x) / eps`.
pub fn richardson_central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |s: f64| {
        let (lo, hi) = (x - s, x + s);
        (f(hi) - f(lo)) / (hi - lo)
    };
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Complex derivative of an analytic `g` along the real direction, Richardson-extrapolated.
pub fn complex_derivative(g: impl Fn(Complex64) -> Complex64, z: Complex64, h: f64) -> Complex64 {
    let d = |s: f64| (g(z + s) - g(z - s)) / (2.0 * s);
    (d(0.5 * h) * 4.0 - d(h)) / 3.0
}

/// Least-squares slope of `ys` against `xs`.
pub fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Least concave majorant of the points (x sorted ascending), evaluated at every x.
pub fn upper_envelope(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (j, k) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop k when it lies on or below the chord j -> i.
            let cross = (xs[k] - xs[j]) * (ys[i] - ys[j]) - (ys[k] - ys[j]) * (xs[i] - xs[j]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut seg = 0;
    for (i, &x) in xs.iter().enumerate() {
        while seg + 1 < hull.len() && hull[seg + 1] < i {
            seg += 1;
        }
        if hull.contains(&i) {
            out.push(ys[i]);
            continue;
        }
        let (j, k) = (hull[seg], hull[seg + 1]);
        let t = (x - xs[j]) / (xs[k] - xs[j]);
        out.push(ys[j] + t * (ys[k] - ys[j]));
    }
    out
}

/// Piecewise-linear interpolation on an ascending grid; outside the grid the
/// nearest end cell is extended linearly.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let i = match xs.partition_point(|&v| v <= x) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Running maximum, making a noisy non-decreasing sequence monotone.
pub fn running_max(ys: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    ys.iter()
        .map(|&y| {
            m = m.max(y);
            m
        })
        .collect()
}

/// Nearest-rank percentile, `p` in `[0, 100]`; `None` on empty input.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil() as usize;
    Some(v[rank.clamp(1, v.len()) - 1])
}

/// Split `values` into four consecutive slices of (nearly) equal length and
/// return the maximum of each; empty slices report `None`.
pub fn quartile_maxima(values: &[f64]) -> [Option<f64>; 4] {
    let n = values.len();
    let mut out = [None; 4];
    for (q, slot) in out.iter_mut().enumerate() {
        let lo = q * n / 4;
        let hi = (q + 1) * n / 4;
        *slot = values[lo..hi].iter().copied().reduce(f64::max);
    }
    out
}

/// Whether the present quartile maxima are non-increasing.
pub fn non_increasing(maxima: &[Option<f64>]) -> bool {
    let present: Vec<f64> = maxima.iter().flatten().copied().collect();
    present.windows(2).all(|w| w[1] <= w[0])
}
