use super::{ConditionId, FailureSetReport};
use crate::error::{Error, Result};
use crate::numeric::interp_linear;

/// Failure sets of the two growth-lemma inequalities for a sampled
/// non-decreasing `A > 1` on an ascending `x`-grid:
///
/// `A(x + h) < A(x) + A(x)^{1-beta}` and `A(x - h) > A(x) - A(x)^{1-beta}`
/// with `h = 1/(A^beta (log A)^{1+delta})`.
///
/// `A` between grid points is linear in `x`; beyond the grid the end cells
/// are extended linearly.
pub fn growth_lemma_failure_set(
    xs: &[f64],
    values: &[f64],
    beta: f64,
    delta: f64,
) -> Result<(FailureSetReport, FailureSetReport)> {
    if xs.len() != values.len() || xs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            have: xs.len().min(values.len()),
        });
    }
    for (i, w) in values.windows(2).enumerate() {
        if w[1] < w[0] - 1e-9 * w[0].abs().max(1.0) {
            return Err(Error::NotMonotone { x: xs[i + 1] });
        }
    }
    if let Some(i) = values.iter().position(|&v| !(v > 1.0)) {
        return Err(Error::DomainError {
            what: "A must exceed 1",
            value: values[i],
        });
    }
    let mut plus = Vec::with_capacity(xs.len());
    let mut minus = Vec::with_capacity(xs.len());
    for (&x, &a) in xs.iter().zip(values) {
        let h = 1.0 / (a.powf(beta) * a.ln().powf(1.0 + delta));
        let jump = a.powf(1.0 - beta);
        plus.push(!(interp_linear(xs, values, x + h) < a + jump));
        minus.push(!(interp_linear(xs, values, x - h) > a - jump));
    }
    Ok((
        FailureSetReport::from_flags(ConditionId::G10Plus, xs, &plus),
        FailureSetReport::from_flags(ConditionId::G10Minus, xs, &minus),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(x0: f64, x1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| x0 + (x1 - x0) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn constant_never_fails() {
        let xs = grid(2.0, 14.0, 200);
        let a = vec![3.0; 200];
        let (p, m) = growth_lemma_failure_set(&xs, &a, 0.5, 0.5).unwrap();
        assert!(p.is_empty() && m.is_empty());
    }

    #[test]
    fn exponential_passes_in_the_tail() {
        let xs = grid(2.0, 14.0, 512);
        let a: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let (p, m) = growth_lemma_failure_set(&xs, &a, 0.5, 0.5).unwrap();
        // Brute force: the increase e^x (e^h - 1) against e^{x/2}.
        for (&x, &v) in xs.iter().zip(&a) {
            let h = 1.0 / (v.sqrt() * x.powf(1.5));
            let exact_ok = x.exp() * h.exp_m1() < v.sqrt();
            if x > 4.0 {
                assert!(exact_ok);
            }
        }
        assert!(p.linear_measure < 1.0 && m.linear_measure < 1.0);
        let tail = xs[400];
        assert!(!p.contains_x(tail) && !m.contains_x(tail));
    }

    #[test]
    fn identity_fails_only_near_the_start() {
        let xs = grid(1.5, 14.0, 512);
        let (p, m) = growth_lemma_failure_set(&xs, &xs, 0.5, 0.5).unwrap();
        // x (log x)^{1.5} > 1 from x ~ 1.9 on.
        for c in p.cells.iter().chain(&m.cells) {
            assert!(c.x_hi < 2.1, "{c:?}");
        }
        assert!(p.linear_measure < 1.0);
    }

    #[test]
    fn decreasing_input_is_rejected() {
        let xs = grid(1.0, 2.0, 4);
        let a = [5.0, 4.0, 6.0, 7.0];
        assert!(matches!(
            growth_lemma_failure_set(&xs, &a, 0.5, 0.5),
            Err(Error::NotMonotone { .. })
        ));
    }
}
