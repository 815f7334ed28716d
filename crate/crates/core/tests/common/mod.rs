//! Shared helpers for the integration suites: brute-force oracles that stay
//! independent of the library's dynamic-programming code paths, plus seeded
//! generators for reproducible fixtures.

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sktrace::{
    model_conformance, Alphabet, CostScheme, DeterministicTrace, EventLog, StochasticTrace,
    SyncCost, TraceSetModel,
};

/// Minimum alignment cost by plain recursion over every move sequence.
/// `sync(j, k)` prices pairing event `j` with model position `k`.
pub fn exhaustive_alignment_cost(
    events: usize,
    model_len: usize,
    sync: &dyn Fn(usize, usize) -> f64,
    log_cost: f64,
    model_cost: f64,
) -> f64 {
    fn go(
        j: usize,
        k: usize,
        events: usize,
        model_len: usize,
        sync: &dyn Fn(usize, usize) -> f64,
        log_cost: f64,
        model_cost: f64,
    ) -> f64 {
        if j == events && k == model_len {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        if j < events && k < model_len {
            best = best
                .min(sync(j, k) + go(j + 1, k + 1, events, model_len, sync, log_cost, model_cost));
        }
        if j < events {
            best = best.min(log_cost + go(j + 1, k, events, model_len, sync, log_cost, model_cost));
        }
        if k < model_len {
            best =
                best.min(model_cost + go(j, k + 1, events, model_len, sync, log_cost, model_cost));
        }
        best
    }
    go(0, 0, events, model_len, sync, log_cost, model_cost)
}

/// Deterministic alignment oracle: unit indel costs, pairings cost 0 on
/// matching labels and 1 otherwise.
pub fn exhaustive_align_cost(
    log_trace: &DeterministicTrace,
    model_trace: &DeterministicTrace,
) -> f64 {
    let log_indices = log_trace.indices();
    let model_indices = model_trace.indices();
    exhaustive_alignment_cost(
        log_indices.len(),
        model_indices.len(),
        &|j, k| {
            if log_indices[j] == model_indices[k] {
                0.0
            } else {
                1.0
            }
        },
        1.0,
        1.0,
    )
}

/// Stochastic alignment oracle mirroring the cost scheme semantics.
pub fn exhaustive_stochastic_cost(
    sk: &StochasticTrace,
    model_trace: &DeterministicTrace,
    scheme: &CostScheme,
) -> f64 {
    let model_indices = model_trace.indices();
    exhaustive_alignment_cost(
        sk.events(),
        model_indices.len(),
        &|j, k| {
            let p = sk.prob(model_indices[k], j);
            match scheme.sync_cost {
                SyncCost::OneMinusP => 1.0 - p,
                SyncCost::NegLogP => -p.max(1e-12).ln(),
            }
        },
        scheme.log_move_cost,
        scheme.model_move_cost,
    )
}

/// Letter-labelled alphabet `a, b, c, ...` of the given size.
pub fn letters(n: usize) -> Alphabet {
    Alphabet::new((0..n).map(|i| ((b'a' + i as u8) as char).to_string())).unwrap()
}

pub fn random_trace(rng: &mut ChaCha8Rng, alphabet: &Alphabet, len: usize) -> DeterministicTrace {
    let indices = (0..len)
        .map(|_| rng.random_range(0..alphabet.len()))
        .collect();
    DeterministicTrace::from_indices(alphabet, indices).unwrap()
}

/// Random column-stochastic trace with strictly positive entries.
pub fn random_stochastic(
    rng: &mut ChaCha8Rng,
    alphabet: &Alphabet,
    events: usize,
) -> StochasticTrace {
    let n = alphabet.len();
    let columns: Vec<Vec<f64>> = (0..events)
        .map(|_| {
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect();
    StochasticTrace::from_columns(alphabet, &columns).unwrap()
}

/// Random model of `traces` distinct traces with lengths in `len_range`.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    alphabet: &Alphabet,
    traces: usize,
    len_range: std::ops::RangeInclusive<usize>,
) -> TraceSetModel {
    let mut entries = Vec::new();
    while entries.len() < traces {
        let len = rng.random_range(*len_range.start()..=*len_range.end());
        let trace = random_trace(rng, alphabet, len);
        if entries.iter().all(|(t, _)| t != &trace) {
            let frequency = rng.random_range(1..=5u64);
            entries.push((trace, frequency));
        }
    }
    EventLog::new(alphabet, entries).unwrap()
}

/// Monte Carlo estimate of the expected optimal alignment cost: samples
/// realizations column by column and averages their model-conformance costs.
/// Returns `(mean, standard_error)`.
pub fn monte_carlo_expected_cost(
    sk: &StochasticTrace,
    model: &TraceSetModel,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let n = sk.activities();
    let m = sk.events();
    let cumulative: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let mut acc = 0.0;
            sk.column(j)
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut memo: HashMap<u64, f64> = HashMap::new();
    let mut sum = 0.0;
    let mut sum_squares = 0.0;
    for _ in 0..samples {
        let mut key = 0u64;
        let mut indices = Vec::with_capacity(m);
        for cum in &cumulative {
            let u: f64 = rng.random();
            let mut choice = n - 1;
            for (i, &edge) in cum.iter().enumerate() {
                if u < edge {
                    choice = i;
                    break;
                }
            }
            indices.push(choice);
            key = key * n as u64 + choice as u64;
        }
        let cost = *memo.entry(key).or_insert_with(|| {
            let trace = DeterministicTrace::from_indices(sk.alphabet(), indices).unwrap();
            model_conformance(&trace, model).unwrap().1.total_cost()
        });
        sum += cost;
        sum_squares += cost * cost;
    }
    let count = samples as f64;
    let mean = sum / count;
    let variance = ((sum_squares - sum * sum / count) / (count - 1.0)).max(0.0);
    (mean, (variance / count).sqrt())
}
