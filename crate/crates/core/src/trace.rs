//! Deterministic and stochastically known traces over an activity alphabet.
//!
//! A stochastically known (SK) trace is an `n x m` column-stochastic matrix:
//! rows index activities, columns index ordered events, and entry `(i, j)` is
//! the probability that event `j` was an execution of activity `i`. A
//! deterministic trace is the degenerate case where every column is one-hot.

use std::fmt;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

/// Tolerance for accepting and renormalizing slightly off column sums.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-6;
/// Entries below this magnitude are treated as rounding noise around zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;
/// Default cap for realization enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Finite ordered sequence of activities from a shared alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicTrace {
    alphabet: Alphabet,
    indices: Vec<usize>,
}

impl DeterministicTrace {
    pub fn new<I, S>(alphabet: &Alphabet, activities: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let indices = activities
            .into_iter()
            .map(|label| alphabet.require(label.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alphabet: alphabet.clone(),
            indices,
        })
    }

    pub fn from_indices(alphabet: &Alphabet, indices: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= alphabet.len()) {
            return Err(Error::UnknownLabel(format!("#{bad}")));
        }
        Ok(Self {
            alphabet: alphabet.clone(),
            indices,
        })
    }

    pub(crate) fn from_indices_unchecked(alphabet: &Alphabet, indices: Vec<usize>) -> Self {
        debug_assert!(indices.iter().all(|&i| i < alphabet.len()));
        Self {
            alphabet: alphabet.clone(),
            indices,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of events `m` (may be zero).
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Activity row indices, one per event.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.indices.iter().map(|&i| self.alphabet.label(i))
    }
}

impl fmt::Display for DeterministicTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for label in self.labels() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{label}")?;
            first = false;
        }
        Ok(())
    }
}

/// One trace of an event log together with its observation frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    trace: DeterministicTrace,
    frequency: u64,
}

impl LogEntry {
    pub fn trace(&self) -> &DeterministicTrace {
        &self.trace
    }

    pub fn frequency(&self) -> u64 {
        self.frequency
    }
}

/// Multiset of deterministic traces with positive frequencies.
///
/// Doubles as the process-model representation: a model is a finite trace
/// language, i.e. an event log read as the set of admissible runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    alphabet: Alphabet,
    entries: Vec<LogEntry>,
}

/// A process model given as a finite set of traces with frequencies.
pub type TraceSetModel = EventLog;

impl EventLog {
    /// Builds a log from `(trace, frequency)` pairs. Duplicate traces are
    /// merged by summing their frequencies, preserving first-seen order.
    pub fn new<I>(alphabet: &Alphabet, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DeterministicTrace, u64)>,
    {
        let mut merged: Vec<LogEntry> = Vec::new();
        for (trace, frequency) in entries {
            if trace.alphabet() != alphabet {
                return Err(Error::AlphabetMismatch);
            }
            if frequency == 0 {
                return Err(Error::ZeroFrequency);
            }
            match merged.iter_mut().find(|e| e.trace == trace) {
                Some(entry) => entry.frequency += frequency,
                None => merged.push(LogEntry { trace, frequency }),
            }
        }
        Ok(Self {
            alphabet: alphabet.clone(),
            entries: merged,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_frequency(&self) -> u64 {
        self.entries.iter().map(|e| e.frequency).sum()
    }
}

/// Controls for [`StochasticTrace::enumerate_realizations`].
#[derive(Debug, Clone)]
pub struct RealizationOptions {
    /// Only realizations with probability strictly above this are returned.
    pub min_prob: f64,
    /// Keep at most this many realizations (highest probability first).
    pub top_k: Option<usize>,
    /// Hard cap on the number of enumerated realizations.
    pub cap: u64,
}

impl Default for RealizationOptions {
    fn default() -> Self {
        Self {
            min_prob: 0.0,
            top_k: None,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Column-stochastic probability matrix over an alphabet: the SK trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticTrace {
    alphabet: Alphabet,
    /// Column-major storage: `values[j * n + i]` is `p(activity i at event j)`.
    values: Vec<f64>,
    events: usize,
}

impl StochasticTrace {
    /// Validates a raw `n x m` grid given row-by-row and builds the trace.
    ///
    /// Columns whose sum deviates from 1 by at most [`COLUMN_SUM_TOLERANCE`]
    /// are renormalized; larger deviations are rejected. Entries may undershoot
    /// zero by [`NEGATIVE_TOLERANCE`] (softmax round-off) and are clamped.
    pub fn from_rows(alphabet: &Alphabet, rows: &[Vec<f64>]) -> Result<Self> {
        let n = alphabet.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.len() != n || m == 0 {
            return Err(Error::DimensionMismatch {
                expected_rows: n,
                expected_cols: m.max(1),
                found_rows: rows.len(),
                found_cols: m,
            });
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected_rows: n,
                expected_cols: m,
                found_rows: i + 1,
                found_cols: row.len(),
            });
        }
        let mut values = vec![0.0; n * m];
        for (i, row) in rows.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p < -NEGATIVE_TOLERANCE {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: p,
                    });
                }
                values[j * n + i] = p.max(0.0);
            }
        }
        for j in 0..m {
            let column = &mut values[j * n..(j + 1) * n];
            let sum: f64 = column.iter().sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(Error::ColumnSumViolation { col: j, sum });
            }
            if sum != 1.0 {
                for p in column.iter_mut() {
                    *p /= sum;
                }
            }
        }
        Ok(Self {
            alphabet: alphabet.clone(),
            values,
            events: m,
        })
    }

    /// Same validation as [`from_rows`](Self::from_rows) for a grid given
    /// column-by-column (one distribution per event).
    pub fn from_columns(alphabet: &Alphabet, columns: &[Vec<f64>]) -> Result<Self> {
        let n = alphabet.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected_rows: n,
                expected_cols: columns.len().max(1),
                found_rows: columns.iter().map(Vec::len).max().unwrap_or(0),
                found_cols: columns.len(),
            });
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        Self::from_rows(alphabet, &rows)
    }

    /// Internal constructor for operations that preserve stochasticity.
    pub(crate) fn from_parts(alphabet: &Alphabet, values: Vec<f64>, events: usize) -> Self {
        debug_assert_eq!(values.len(), alphabet.len() * events);
        debug_assert!(events >= 1);
        debug_assert!(values.iter().all(|&p| (-1e-9..=1.0 + 1e-9).contains(&p)));
        debug_assert!((0..events).all(|j| {
            let sum: f64 = values[j * alphabet.len()..(j + 1) * alphabet.len()]
                .iter()
                .sum();
            (sum - 1.0).abs() <= 1e-9
        }));
        Self {
            alphabet: alphabet.clone(),
            values,
            events,
        }
    }

    /// Embeds a deterministic trace as its binary (one-hot) matrix.
    pub fn one_hot(trace: &DeterministicTrace) -> Result<Self> {
        if trace.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let n = trace.alphabet().len();
        let mut values = vec![0.0; n * trace.len()];
        for (j, &i) in trace.indices().iter().enumerate() {
            values[j * n + i] = 1.0;
        }
        Ok(Self {
            alphabet: trace.alphabet().clone(),
            values,
            events: trace.len(),
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of activities `n` (rows).
    pub fn activities(&self) -> usize {
        self.alphabet.len()
    }

    /// Number of events `m` (columns).
    pub fn events(&self) -> usize {
        self.events
    }

    /// Probability of `activity` at `event`.
    pub fn prob(&self, activity: usize, event: usize) -> f64 {
        self.values[event * self.alphabet.len() + activity]
    }

    /// The distribution of one event: a slice of `n` probabilities.
    pub fn column(&self, event: usize) -> &[f64] {
        let n = self.alphabet.len();
        &self.values[event * n..(event + 1) * n]
    }

    /// The matrix row-by-row, as it is written in the text format.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.alphabet.len();
        (0..n)
            .map(|i| (0..self.events).map(|j| self.values[j * n + i]).collect())
            .collect()
    }

    fn column_argmax(&self, event: usize) -> usize {
        let column = self.column(event);
        let mut best = 0;
        for (i, &p) in column.iter().enumerate().skip(1) {
            if p > column[best] {
                best = i;
            }
        }
        best
    }

    /// Decodes the trace by taking the most probable activity of every event.
    /// Ties go to the activity earliest in alphabet order.
    pub fn argmax_decode(&self) -> DeterministicTrace {
        let indices = (0..self.events).map(|j| self.column_argmax(j)).collect();
        DeterministicTrace::from_indices_unchecked(&self.alphabet, indices)
    }

    /// Probability that this trace realizes exactly `t`, assuming events are
    /// independent: the product of the matching entries.
    pub fn realization_probability(&self, t: &DeterministicTrace) -> Result<f64> {
        if t.alphabet() != &self.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        if t.len() != self.events {
            return Err(Error::LengthMismatch {
                left: self.events,
                right: t.len(),
            });
        }
        Ok(t.indices()
            .iter()
            .enumerate()
            .map(|(j, &i)| self.prob(i, j))
            .product())
    }

    /// Enumerates deterministic realizations in decreasing probability order
    /// (ties broken lexicographically by alphabet order).
    ///
    /// Returns every realization with probability strictly above
    /// `options.min_prob`, truncated to `options.top_k` when set. A complete
    /// enumeration (`min_prob = 0`, no `top_k`) covers probability mass 1.
    pub fn enumerate_realizations(
        &self,
        options: &RealizationOptions,
    ) -> Result<Vec<(DeterministicTrace, f64)>> {
        if !(0.0..=1.0).contains(&options.min_prob) {
            return Err(Error::InvalidProbability(options.min_prob));
        }
        let n = self.alphabet.len();
        let m = self.events;

        if options.min_prob == 0.0 && options.top_k.is_none() {
            let projected: u128 = (0..m)
                .map(|j| self.column(j).iter().filter(|&&p| p > 0.0).count() as u128)
                .try_fold(1u128, |acc, c| acc.checked_mul(c))
                .unwrap_or(u128::MAX);
            if projected > options.cap as u128 {
                return Err(Error::ExplosionGuard {
                    projected,
                    cap: options.cap,
                });
            }
        }
        if options.top_k == Some(0) {
            return Ok(Vec::new());
        }

        // Depth-first walk in lexicographic order with an upper-bound prune:
        // a prefix's completions are bounded by its probability times the
        // product of the remaining column maxima, and the bound is attained
        // by the per-column argmax path. Visiting in lexicographic order also
        // settles ties for free: any completion found later is lex-greater,
        // so a subtree whose bound only ties the current k-th best cannot
        // contribute and is skipped.
        let mut suffix_best = vec![1.0f64; m + 1];
        for j in (0..m).rev() {
            let best = self.column(j).iter().cloned().fold(0.0f64, f64::max);
            suffix_best[j] = suffix_best[j + 1] * best;
        }

        let mut out: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut chosen = vec![0usize; m];
        let mut pending = vec![0usize; m];
        let mut prefix_prob = vec![1.0f64; m + 1];
        let mut depth = 0usize;
        let mut emitted: u64 = 0;
        loop {
            if depth == m {
                // The cap bounds total enumeration work whatever the other
                // options say, so a huge top_k cannot degenerate into a full
                // walk of an intractable realization space.
                emitted += 1;
                if emitted > options.cap {
                    return Err(Error::ExplosionGuard {
                        projected: emitted as u128,
                        cap: options.cap,
                    });
                }
                let prob = prefix_prob[m];
                match options.top_k {
                    None => out.push((chosen.clone(), prob)),
                    Some(k) => {
                        // Strictly better than the current k-th, or still room.
                        let position = out.partition_point(|(_, p)| *p >= prob);
                        out.insert(position, (chosen.clone(), prob));
                        out.truncate(k);
                    }
                }
                depth -= 1;
                continue;
            }
            let threshold = match options.top_k {
                Some(k) if out.len() == k => options.min_prob.max(out[k - 1].1),
                _ => options.min_prob,
            };
            let column = self.column(depth);
            let mut advanced = false;
            while pending[depth] < n {
                let i = pending[depth];
                pending[depth] += 1;
                let prob = prefix_prob[depth] * column[i];
                if prob * suffix_best[depth + 1] > threshold {
                    chosen[depth] = i;
                    prefix_prob[depth + 1] = prob;
                    depth += 1;
                    if depth < m {
                        pending[depth] = 0;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                if depth == 0 {
                    break;
                }
                depth -= 1;
            }
        }

        if options.top_k.is_none() {
            out.sort_by(|(ia, pa), (ib, pb)| pb.total_cmp(pa).then_with(|| ia.cmp(ib)));
        }
        Ok(out
            .into_iter()
            .map(|(indices, prob)| {
                (
                    DeterministicTrace::from_indices_unchecked(&self.alphabet, indices),
                    prob,
                )
            })
            .collect())
    }

    /// Merges maximal runs of consecutive events that decode to the same
    /// activity into their element-wise mean column. This is the grouping
    /// step that turns frame-level samples into activity-level events.
    pub fn collapse_frames(&self) -> StochasticTrace {
        let n = self.alphabet.len();
        let decoded: Vec<usize> = (0..self.events).map(|j| self.column_argmax(j)).collect();
        let mut values = Vec::new();
        let mut events = 0;
        let mut start = 0;
        while start < self.events {
            let mut end = start + 1;
            while end < self.events && decoded[end] == decoded[start] {
                end += 1;
            }
            let run = (end - start) as f64;
            for i in 0..n {
                let sum: f64 = (start..end).map(|j| self.prob(i, j)).sum();
                values.push(sum / run);
            }
            events += 1;
            start = end;
        }
        StochasticTrace::from_parts(&self.alphabet, values, events)
    }
}
