//! Probabilistic distance and weighting primitives.

use crate::error::{Error, Result};
use crate::trace::{DeterministicTrace, StochasticTrace};

/// Probability floor used inside logarithms so scores stay finite.
pub const PROB_FLOOR: f64 = 1e-12;

/// Selects the measure used by matrix-based conformance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Frobenius norm of the matrix difference.
    Frobenius,
    /// Average negative log-probability of a reference trace under the matrix.
    CrossEntropy,
}

/// Nonempty vector of finite, nonnegative distances, one per candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceVector(Vec<f64>);

impl DistanceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidDistance(bad));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn check_shapes(a: &StochasticTrace, b: &StochasticTrace) -> Result<()> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    if a.events() != b.events() {
        return Err(Error::LengthMismatch {
            left: a.events(),
            right: b.events(),
        });
    }
    Ok(())
}

/// Frobenius norm of `A - B`: `sqrt(sum_ij |a_ij - b_ij|^2)`.
pub fn frobenius_distance(a: &StochasticTrace, b: &StochasticTrace) -> Result<f64> {
    check_shapes(a, b)?;
    let mut sum = 0.0;
    for j in 0..a.events() {
        let (ca, cb) = (a.column(j), b.column(j));
        for i in 0..a.activities() {
            let d = ca[i] - cb[i];
            sum += d * d;
        }
    }
    Ok(sum.sqrt())
}

/// Per-event-averaged cross-entropy of a deterministic reference under an SK
/// trace: `(1/m) * sum_j -ln(max(p[ref_j, j], PROB_FLOOR))`.
pub fn cross_entropy(reference: &DeterministicTrace, sk: &StochasticTrace) -> Result<f64> {
    if reference.alphabet() != sk.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    if reference.len() != sk.events() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: sk.events(),
        });
    }
    let m = sk.events() as f64;
    let sum: f64 = reference
        .indices()
        .iter()
        .enumerate()
        .map(|(j, &i)| -sk.prob(i, j).max(PROB_FLOOR).ln())
        .sum();
    Ok(sum / m)
}

/// Exponential normalization of distances into proximity weights:
/// `w_k = exp(-d_k) / sum exp(-d_k')`.
///
/// Computed with the minimum shifted out first, which leaves the result
/// unchanged but keeps the exponentials in range.
pub fn softmin_normalize(distances: &DistanceVector) -> Vec<f64> {
    let values = distances.values();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let exps: Vec<f64> = values.iter().map(|&d| (-(d - min)).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
