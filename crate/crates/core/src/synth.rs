//! Synthesis of SK traces from ground-truth deterministic traces under a
//! parameterized sensor-noise model.
//!
//! Randomness comes from ChaCha8, a portable counter-based generator, so the
//! same seed yields bit-identical output on every platform. Each sampled
//! trace draws from its own stream `(seed, index)`, which keeps results
//! independent of evaluation order.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::trace::{DeterministicTrace, StochasticTrace, TraceSetModel};

/// How the corrupted probability mass is spread over activities.
#[derive(Debug, Clone, PartialEq)]
pub enum Smear {
    /// Equal share `epsilon / n` to every activity.
    Uniform,
    /// Row-stochastic `n x n` confusion grid: row `i` is the distribution the
    /// mass moves to when the true activity is `i`.
    Confusion(Vec<Vec<f64>>),
}

/// Column-corruption noise: each one-hot column is mixed with a smear
/// distribution, `(1 - epsilon) * one_hot + epsilon * smear_row`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    epsilon: f64,
    smear: Smear,
    seed: u64,
}

impl NoiseModel {
    pub fn uniform(epsilon: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidProbability(epsilon));
        }
        Ok(Self {
            epsilon,
            smear: Smear::Uniform,
            seed,
        })
    }

    pub fn with_confusion(epsilon: f64, grid: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidProbability(epsilon));
        }
        let n = grid.len();
        if let Some((i, row)) = grid.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected_rows: n,
                expected_cols: n,
                found_rows: i + 1,
                found_cols: row.len(),
            });
        }
        for (i, row) in grid.iter().enumerate() {
            if let Some(&p) = row.iter().find(|&&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidProbability(p));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::ColumnSumViolation { col: i, sum });
            }
        }
        Ok(Self {
            epsilon,
            smear: Smear::Confusion(grid),
            seed,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn smear(&self) -> &Smear {
        &self.smear
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Corrupts a ground-truth trace into an SK trace. The mixture itself is
/// deterministic; the noise model's seed only drives trace sampling in
/// [`synthesize_log`].
pub fn synthesize_sk_trace(
    truth: &DeterministicTrace,
    noise: &NoiseModel,
) -> Result<StochasticTrace> {
    if truth.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n = truth.alphabet().len();
    if let Smear::Confusion(grid) = &noise.smear {
        if grid.len() != n {
            return Err(Error::DimensionMismatch {
                expected_rows: n,
                expected_cols: n,
                found_rows: grid.len(),
                found_cols: grid.first().map_or(0, Vec::len),
            });
        }
    }
    let epsilon = noise.epsilon;
    let mut values = Vec::with_capacity(n * truth.len());
    for &truth_activity in truth.indices() {
        for i in 0..n {
            let kept = if i == truth_activity {
                1.0 - epsilon
            } else {
                0.0
            };
            let smeared = match &noise.smear {
                Smear::Uniform => epsilon / n as f64,
                Smear::Confusion(grid) => epsilon * grid[truth_activity][i],
            };
            values.push(kept + smeared);
        }
    }
    Ok(StochasticTrace::from_parts(
        truth.alphabet(),
        values,
        truth.len(),
    ))
}

/// Samples `count` ground-truth traces from the model proportionally to their
/// frequencies and corrupts each one. Returns the SK trace together with the
/// index of the model entry it came from.
pub fn synthesize_log(
    model: &TraceSetModel,
    count: usize,
    noise: &NoiseModel,
) -> Result<Vec<(StochasticTrace, usize)>> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    let total = model.total_frequency();
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        rng.set_stream(index as u64);
        let mut ticket = rng.random_range(0..total);
        let mut chosen = 0;
        for (entry_index, entry) in model.entries().iter().enumerate() {
            if ticket < entry.frequency() {
                chosen = entry_index;
                break;
            }
            ticket -= entry.frequency();
        }
        let trace = model.entries()[chosen].trace();
        out.push((synthesize_sk_trace(trace, noise)?, chosen));
    }
    Ok(out)
}
