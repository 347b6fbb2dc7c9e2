//! Empirical exceptional sets: grid cells where the regularity conditions on
//! `A`, `a` and `B` fail, with their linear measure in `x = log 1/(1-r)` and
//! logarithmic measure `int dt/(1-t)` in `r`.

mod eset;
pub mod export;
mod lemma;
mod local_bound;

use serde::{Deserialize, Serialize};

pub use eset::{e2_integral_check, e_set_failure, E2Integral, ExceptionalSet, SampleFlags};
pub use lemma::growth_lemma_failure_set;
pub use local_bound::{b_local_bound_check, b_local_bound_sweep, PhiSample, PhiSweep, PHI_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "G10+")]
    G10Plus,
    #[serde(rename = "G10-")]
    G10Minus,
    L5,
    L6,
    L7,
    L14,
    /// `L5 u L6 u L7`.
    Union,
    /// The union together with the initial segment `[r0, r0']`.
    E,
}

impl ConditionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::G10Plus => "G10+",
            ConditionId::G10Minus => "G10-",
            ConditionId::L5 => "L5",
            ConditionId::L6 => "L6",
            ConditionId::L7 => "L7",
            ConditionId::L14 => "L14",
            ConditionId::Union => "union",
            ConditionId::E => "E",
        }
    }
}

/// Closed interval of radii, stored in both coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub r_lo: f64,
    pub r_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl Cell {
    pub fn from_x(x_lo: f64, x_hi: f64) -> Self {
        Cell {
            r_lo: -(-x_lo).exp_m1(),
            r_hi: -(-x_hi).exp_m1(),
            x_lo,
            x_hi,
        }
    }

    pub fn contains_x(&self, x: f64) -> bool {
        self.x_lo <= x && x <= self.x_hi
    }

    /// `int_{r_lo}^{r_hi} dt/(1-t)` evaluated from the radii.
    pub fn log_measure(&self) -> f64 {
        (1.0 - self.r_lo).ln() - (1.0 - self.r_hi).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSetReport {
    pub condition: ConditionId,
    /// Disjoint, sorted.
    pub cells: Vec<Cell>,
    pub linear_measure: f64,
    pub log_measure: f64,
    pub fraction: f64,
}

impl FailureSetReport {
    /// Union of the closed grid cells adjacent to each failing sample.
    pub fn from_flags(condition: ConditionId, xs: &[f64], failing: &[bool]) -> Self {
        let n = xs.len();
        let intervals: Vec<(f64, f64)> = (0..n)
            .filter(|&i| failing[i])
            .map(|i| (xs[i.saturating_sub(1)], xs[(i + 1).min(n - 1)]))
            .collect();
        let count = failing.iter().filter(|&&b| b).count();
        let fraction = if n == 0 { 0.0 } else { count as f64 / n as f64 };
        Self::from_intervals(condition, intervals, fraction)
    }

    /// Merges closed `x`-intervals into disjoint sorted cells.
    pub fn from_intervals(condition: ConditionId, mut intervals: Vec<(f64, f64)>, fraction: f64) -> Self {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        let cells: Vec<Cell> = merged.into_iter().map(|(lo, hi)| Cell::from_x(lo, hi)).collect();
        let linear_measure = cells.iter().fold(0.0, |acc, c| acc + (c.x_hi - c.x_lo));
        let log_measure = cells.iter().fold(0.0, |acc, c| acc + c.log_measure());
        FailureSetReport {
            condition,
            cells,
            linear_measure,
            log_measure,
            fraction,
        }
    }

    pub fn contains_x(&self, x: f64) -> bool {
        self.cells.iter().any(|c| c.contains_x(x))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_failure_covers_adjacent_cells() {
        let xs: Vec<f64> = (0..10).map(|i| 1.0 + 0.5 * i as f64).collect();
        let mut fail = vec![false; 10];
        fail[4] = true;
        let rep = FailureSetReport::from_flags(ConditionId::L5, &xs, &fail);
        assert_eq!(rep.cells.len(), 1);
        assert_eq!((rep.cells[0].x_lo, rep.cells[0].x_hi), (2.5, 3.5));
        assert!((rep.linear_measure - 1.0).abs() < 1e-15);
        assert!((rep.fraction - 0.1).abs() < 1e-15);
    }

    #[test]
    fn neighbouring_failures_merge_and_clip() {
        let xs: Vec<f64> = (0..6).map(f64::from).collect();
        let fail = [true, false, true, true, false, true];
        let rep = FailureSetReport::from_flags(ConditionId::L6, &xs, &fail);
        let spans: Vec<(f64, f64)> = rep.cells.iter().map(|c| (c.x_lo, c.x_hi)).collect();
        assert_eq!(spans, vec![(0.0, 5.0)]);
        assert_eq!(rep.linear_measure, 5.0);
    }

    #[test]
    fn change_of_variables_identity() {
        let rep = FailureSetReport::from_intervals(ConditionId::E, vec![(1.0, 1.5), (7.25, 7.5), (11.0, 12.9)], 0.0);
        assert!((rep.log_measure - rep.linear_measure).abs() < 1e-9);
    }

    #[test]
    fn empty_report() {
        let rep = FailureSetReport::from_flags(ConditionId::L7, &[1.0, 2.0], &[false, false]);
        assert!(rep.is_empty());
        assert_eq!((rep.linear_measure, rep.log_measure, rep.fraction), (0.0, 0.0, 0.0));
    }
}
