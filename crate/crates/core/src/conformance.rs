//! Alignments and conformance of traces against trace-set models.
//!
//! An alignment relates an observed trace to one model trace through a
//! sequence of moves: a synchronous move consumes one event and one model
//! activity, a log move skips an event, a model move skips a model activity.
//! A synchronous move on activity `a` at event `j` costs `1 - p(a, j)` (or
//! `-ln p` under the log scheme), so on one-hot input it costs 0 when the
//! labels agree and 1 when they do not, which is exactly the deterministic
//! edit cost. Minimum-cost alignments are found by dynamic programming over
//! the `(m + 1) x (m' + 1)` grid.

use crate::error::{Error, Result};
use crate::measures::{self, Measure, PROB_FLOOR};
use crate::trace::{DeterministicTrace, RealizationOptions, StochasticTrace, TraceSetModel};

/// How a synchronous move is priced from the event's probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SyncCost {
    /// `1 - p`: degenerates to the classic 0/1 costs on one-hot input.
    #[default]
    OneMinusP,
    /// `-ln(max(p, PROB_FLOOR))`: penalizes improbable pairings sharply.
    NegLogP,
}

/// Move costs for stochastic alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct CostScheme {
    pub sync_cost: SyncCost,
    pub log_move_cost: f64,
    pub model_move_cost: f64,
}

impl Default for CostScheme {
    fn default() -> Self {
        Self {
            sync_cost: SyncCost::OneMinusP,
            log_move_cost: 1.0,
            model_move_cost: 1.0,
        }
    }
}

impl CostScheme {
    pub fn new(sync_cost: SyncCost, log_move_cost: f64, model_move_cost: f64) -> Result<Self> {
        for cost in [log_move_cost, model_move_cost] {
            if !cost.is_finite() || cost < 0.0 {
                return Err(Error::InvalidMoveCost(cost));
            }
        }
        Ok(Self {
            sync_cost,
            log_move_cost,
            model_move_cost,
        })
    }

    fn sync(&self, p: f64) -> f64 {
        match self.sync_cost {
            SyncCost::OneMinusP => 1.0 - p,
            SyncCost::NegLogP => -p.max(PROB_FLOOR).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Synchronous,
    Log,
    Model,
}

/// One step of an alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub kind: MoveKind,
    /// Event index in the observed trace (synchronous and log moves).
    pub log_position: Option<usize>,
    /// Activity row index in the model trace (synchronous and model moves).
    pub model_activity: Option<usize>,
    pub cost: f64,
}

/// A sequence of moves relating an observed trace to a model trace, with the
/// summed cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    moves: Vec<Move>,
    total_cost: f64,
}

impl Alignment {
    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }
}

/// Minimum-cost alignment found by DP. `sync_cost(j, k)` prices pairing event
/// `j` with model position `k`; ties prefer synchronous over log over model
/// moves during backtracking, from the end of both traces.
fn dp_align(
    events: usize,
    model_len: usize,
    model_indices: &[usize],
    sync_cost: impl Fn(usize, usize) -> f64,
    log_cost: f64,
    model_cost: f64,
) -> Alignment {
    let width = model_len + 1;
    let mut grid = vec![0.0f64; (events + 1) * width];
    for k in 1..=model_len {
        grid[k] = grid[k - 1] + model_cost;
    }
    for j in 1..=events {
        grid[j * width] = grid[(j - 1) * width] + log_cost;
        for k in 1..=model_len {
            let sync = grid[(j - 1) * width + k - 1] + sync_cost(j - 1, k - 1);
            let log = grid[(j - 1) * width + k] + log_cost;
            let model = grid[j * width + k - 1] + model_cost;
            grid[j * width + k] = sync.min(log).min(model);
        }
    }

    let mut moves = Vec::with_capacity(events.max(model_len));
    let (mut j, mut k) = (events, model_len);
    while j > 0 || k > 0 {
        let here = grid[j * width + k];
        if j > 0 && k > 0 {
            let cost = sync_cost(j - 1, k - 1);
            if grid[(j - 1) * width + k - 1] + cost == here {
                moves.push(Move {
                    kind: MoveKind::Synchronous,
                    log_position: Some(j - 1),
                    model_activity: Some(model_indices[k - 1]),
                    cost,
                });
                j -= 1;
                k -= 1;
                continue;
            }
        }
        if j > 0 && grid[(j - 1) * width + k] + log_cost == here {
            moves.push(Move {
                kind: MoveKind::Log,
                log_position: Some(j - 1),
                model_activity: None,
                cost: log_cost,
            });
            j -= 1;
            continue;
        }
        moves.push(Move {
            kind: MoveKind::Model,
            log_position: None,
            model_activity: Some(model_indices[k - 1]),
            cost: model_cost,
        });
        k -= 1;
    }
    moves.reverse();
    Alignment {
        moves,
        total_cost: grid[events * width + model_len],
    }
}

/// Optimal alignment between two deterministic traces with unit move costs:
/// a synchronous move costs 0 on matching labels and 1 otherwise, log and
/// model moves cost 1.
pub fn align(
    log_trace: &DeterministicTrace,
    model_trace: &DeterministicTrace,
) -> Result<Alignment> {
    if log_trace.alphabet() != model_trace.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let log_indices = log_trace.indices();
    let model_indices = model_trace.indices();
    Ok(dp_align(
        log_indices.len(),
        model_indices.len(),
        model_indices,
        |j, k| {
            if log_indices[j] == model_indices[k] {
                0.0
            } else {
                1.0
            }
        },
        1.0,
        1.0,
    ))
}

/// Optimal alignment of an SK trace against one model trace under `scheme`.
pub fn stochastic_alignment(
    sk: &StochasticTrace,
    model_trace: &DeterministicTrace,
    scheme: &CostScheme,
) -> Result<Alignment> {
    if sk.alphabet() != model_trace.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let model_indices = model_trace.indices();
    Ok(dp_align(
        sk.events(),
        model_indices.len(),
        model_indices,
        |j, k| scheme.sync(sk.prob(model_indices[k], j)),
        scheme.log_move_cost,
        scheme.model_move_cost,
    ))
}

/// Best alignment of a deterministic trace over all traces of a model.
/// Returns the index of the winning model entry; ties keep the earliest.
pub fn model_conformance(
    trace: &DeterministicTrace,
    model: &TraceSetModel,
) -> Result<(usize, Alignment)> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut best: Option<(usize, Alignment)> = None;
    for (index, entry) in model.entries().iter().enumerate() {
        let alignment = align(trace, entry.trace())?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| alignment.total_cost() < b.total_cost())
        {
            best = Some((index, alignment));
        }
    }
    Ok(best.expect("nonempty model"))
}

/// Best stochastic alignment of an SK trace over all traces of a model.
pub fn stochastic_conformance(
    sk: &StochasticTrace,
    model: &TraceSetModel,
    scheme: &CostScheme,
) -> Result<(usize, Alignment)> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut best: Option<(usize, Alignment)> = None;
    for (index, entry) in model.entries().iter().enumerate() {
        let alignment = stochastic_alignment(sk, entry.trace(), scheme)?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| alignment.total_cost() < b.total_cost())
        {
            best = Some((index, alignment));
        }
    }
    Ok(best.expect("nonempty model"))
}

/// Matrix-distance conformance: the smallest measure value between the SK
/// trace and the one-hot embedding of any model trace of matching length.
/// Model traces of other lengths are skipped; if all are skipped the
/// comparison is impossible and an error is returned.
pub fn matrix_conformance(
    sk: &StochasticTrace,
    model: &TraceSetModel,
    measure: Measure,
) -> Result<(usize, f64)> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    if model.alphabet() != sk.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let mut best: Option<(usize, f64)> = None;
    for (index, entry) in model.entries().iter().enumerate() {
        if entry.trace().len() != sk.events() {
            continue;
        }
        let score = match measure {
            Measure::Frobenius => {
                measures::frobenius_distance(sk, &StochasticTrace::one_hot(entry.trace())?)?
            }
            Measure::CrossEntropy => measures::cross_entropy(entry.trace(), sk)?,
        };
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((index, score));
        }
    }
    best.ok_or(Error::NoLengthCompatibleTrace {
        length: sk.events(),
    })
}

/// Exact expected conformance cost over the realization distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedConformance {
    /// Probability-weighted average of per-realization optimal costs.
    pub expected_cost: f64,
    /// Total probability mass of the enumerated realizations; 1 when nothing
    /// was pruned, 0 when the pruning threshold excluded everything.
    pub covered_mass: f64,
}

/// Brute-force expected cost: enumerates every realization with probability
/// above `min_prob`, aligns each against the model, and averages.
pub fn expected_conformance(
    sk: &StochasticTrace,
    model: &TraceSetModel,
    min_prob: f64,
    cap: u64,
) -> Result<ExpectedConformance> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    if model.alphabet() != sk.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let realizations = sk.enumerate_realizations(&RealizationOptions {
        min_prob,
        top_k: None,
        cap,
    })?;
    let mut expected_cost = 0.0;
    let mut covered_mass = 0.0;
    for (trace, prob) in &realizations {
        let (_, alignment) = model_conformance(trace, model)?;
        expected_cost += prob * alignment.total_cost();
        covered_mass += prob;
    }
    Ok(ExpectedConformance {
        expected_cost,
        covered_mass,
    })
}
