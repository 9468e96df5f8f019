//! Decidable proxies for convergence of series and improper integrals.

use serde::{Deserialize, Serialize};

/// Successive refinements needed before a verdict is issued.
const RUN: usize = 3;
/// Per-refinement growth factor that signals divergence.
pub const GROWTH_FACTOR: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

/// Classifies a sequence of partial values taken at increasing refinement.
///
/// Divergent when three consecutive refinements each grow by at least
/// [`GROWTH_FACTOR`] in magnitude. Convergent when three consecutive
/// increments shrink, or when the last increment is below `tol`.
pub fn refinement_verdict(values: &[f64], tol: f64) -> Verdict {
    if values.len() < 2 {
        return Verdict::Inconclusive;
    }
    let grows = |w: &[f64]| w[1].abs() >= GROWTH_FACTOR * w[0].abs() && w[1].abs() > 0.0;
    let growth: Vec<bool> = values.windows(2).map(grows).collect();
    if growth.windows(RUN).any(|w| w.iter().all(|&g| g)) {
        return Verdict::Diverges;
    }
    let deltas: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if deltas.last().is_some_and(|d| *d <= tol * values.last().unwrap().abs().max(1.0)) {
        return Verdict::Converges;
    }
    let shrinking: Vec<bool> = deltas.windows(2).map(|w| w[1] < w[0]).collect();
    if shrinking.len() >= RUN && shrinking[shrinking.len() - RUN..].iter().all(|&s| s) {
        return Verdict::Converges;
    }
    Verdict::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_partial_sums() {
        let partial = |r: f64| -> Vec<f64> {
            (1..8).map(|n| (1..=n * 10).map(|k| r.powi(k)).sum()).collect()
        };
        assert_eq!(refinement_verdict(&partial(0.9), 1e-12), Verdict::Converges);
        assert_eq!(refinement_verdict(&partial(1.1), 1e-12), Verdict::Diverges);
    }

    #[test]
    fn short_or_flat_sequences() {
        assert_eq!(refinement_verdict(&[1.0], 1e-9), Verdict::Inconclusive);
        assert_eq!(refinement_verdict(&[1.0, 1.0], 1e-9), Verdict::Converges);
        // alternating growth with no trend
        assert_eq!(refinement_verdict(&[1.0, 2.0, 1.0, 2.0, 1.0], 1e-9), Verdict::Inconclusive);
    }
}
