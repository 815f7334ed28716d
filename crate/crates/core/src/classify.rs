//! Classification of SK traces among candidate models and the
//! posterior-update pipeline: proximity weights over the log's traces, a
//! frequency-weighted likelihood matrix, and a linear blend of observation
//! and prior knowledge.

use crate::conformance::{
    expected_conformance, matrix_conformance, stochastic_conformance, CostScheme,
};
use crate::error::{Error, Result};
use crate::measures::{self, DistanceVector, Measure};
use crate::trace::{
    DeterministicTrace, EventLog, StochasticTrace, TraceSetModel, DEFAULT_ENUMERATION_CAP,
};

/// Column-stochastic matrix summarizing the log's traces, weighted by their
/// frequency and proximity to an observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodMatrix {
    matrix: StochasticTrace,
}

impl LikelihoodMatrix {
    pub fn matrix(&self) -> &StochasticTrace {
        &self.matrix
    }

    pub fn into_matrix(self) -> StochasticTrace {
        self.matrix
    }
}

impl From<StochasticTrace> for LikelihoodMatrix {
    fn from(matrix: StochasticTrace) -> Self {
        Self { matrix }
    }
}

/// Observation weight `alpha` and prior weight `beta = 1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendWeights {
    alpha: f64,
}

impl BlendWeights {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
            return Err(Error::InvalidBlendWeight(alpha));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }
}

/// How a model is scored during classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassifyMethod {
    /// Frobenius distance to the nearest length-compatible model trace,
    /// falling back to stochastic alignment when no length matches.
    #[default]
    MatrixFrobenius,
    /// Cheapest stochastic alignment over the model's traces.
    StochasticAlignment,
    /// Expected optimal alignment cost over the realization distribution.
    ExpectedCost,
}

/// Ranking of candidate models, best (lowest score) first.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    ranking: Vec<(String, f64)>,
}

impl ClassificationResult {
    /// `(identifier, score)` pairs sorted ascending by score; ties keep the
    /// submission order.
    pub fn ranking(&self) -> &[(String, f64)] {
        &self.ranking
    }

    pub fn winner(&self) -> &str {
        &self.ranking[0].0
    }
}

/// Builds the likelihood matrix `T_L` of an observation against a log:
/// softmin proximity weights over Frobenius distances to each
/// length-compatible trace, blended with the trace frequencies into a convex
/// combination of their one-hot matrices.
pub fn likelihood_matrix(sk: &StochasticTrace, log: &EventLog) -> Result<LikelihoodMatrix> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    if log.alphabet() != sk.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let eligible: Vec<_> = log
        .entries()
        .iter()
        .filter(|e| e.trace().len() == sk.events())
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoLengthCompatibleTrace {
            length: sk.events(),
        });
    }
    let distances = eligible
        .iter()
        .map(|e| measures::frobenius_distance(sk, &StochasticTrace::one_hot(e.trace())?))
        .collect::<Result<Vec<_>>>()?;
    let weights = measures::softmin_normalize(&DistanceVector::new(distances)?);

    let coefficients: Vec<f64> = eligible
        .iter()
        .zip(&weights)
        .map(|(e, w)| e.frequency() as f64 * w)
        .collect();
    let total: f64 = coefficients.iter().sum();

    let n = sk.activities();
    let m = sk.events();
    let mut values = vec![0.0; n * m];
    for (entry, coefficient) in eligible.iter().zip(&coefficients) {
        let share = coefficient / total;
        for (j, &i) in entry.trace().indices().iter().enumerate() {
            values[j * n + i] += share;
        }
    }
    Ok(LikelihoodMatrix {
        matrix: StochasticTrace::from_parts(sk.alphabet(), values, m),
    })
}

/// Element-wise blend `alpha * prior + beta * T_L`; column-stochastic by
/// convexity.
pub fn posterior_update(
    prior: &StochasticTrace,
    likelihood: &LikelihoodMatrix,
    weights: BlendWeights,
) -> Result<StochasticTrace> {
    let tl = likelihood.matrix();
    if prior.alphabet() != tl.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    if prior.events() != tl.events() {
        return Err(Error::DimensionMismatch {
            expected_rows: prior.activities(),
            expected_cols: prior.events(),
            found_rows: tl.activities(),
            found_cols: tl.events(),
        });
    }
    let (alpha, beta) = (weights.alpha(), weights.beta());
    let n = prior.activities();
    let m = prior.events();
    let mut values = Vec::with_capacity(n * m);
    for j in 0..m {
        let (cp, cl) = (prior.column(j), tl.column(j));
        for i in 0..n {
            values.push(alpha * cp[i] + beta * cl[i]);
        }
    }
    Ok(StochasticTrace::from_parts(prior.alphabet(), values, m))
}

/// Grid search for the observation weight: evaluates alpha over
/// `{0, step, 2*step, ..., 1}`, scoring each by how many posterior decodes
/// reproduce the ground truth exactly. Ties go to the largest alpha, i.e.
/// toward trusting the observation.
pub fn estimate_weights(
    pairs: &[(StochasticTrace, DeterministicTrace)],
    log: &EventLog,
    grid_step: f64,
) -> Result<BlendWeights> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidGridStep(grid_step));
    }
    let likelihoods = pairs
        .iter()
        .map(|(obs, _)| likelihood_matrix(obs, log))
        .collect::<Result<Vec<_>>>()?;

    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let alpha = f64::from(k) * grid_step;
        if alpha >= 1.0 - 1e-9 {
            break;
        }
        grid.push(alpha);
        k += 1;
    }
    grid.push(1.0);

    let mut best = (0usize, 0.0f64);
    for &alpha in &grid {
        let weights = BlendWeights::new(alpha)?;
        let mut correct = 0;
        for ((obs, truth), likelihood) in pairs.iter().zip(&likelihoods) {
            let posterior = posterior_update(obs, likelihood, weights)?;
            if &posterior.argmax_decode() == truth {
                correct += 1;
            }
        }
        if correct >= best.0 {
            best = (correct, alpha);
        }
    }
    BlendWeights::new(best.1)
}

/// Scores the observation against every candidate model and ranks them,
/// lowest score first. Ties keep the submission order.
pub fn classify(
    sk: &StochasticTrace,
    models: &[(String, TraceSetModel)],
    method: ClassifyMethod,
) -> Result<ClassificationResult> {
    if models.is_empty() {
        return Err(Error::EmptyModelList);
    }
    let mut ranking = Vec::with_capacity(models.len());
    for (name, model) in models {
        let score = match method {
            ClassifyMethod::MatrixFrobenius => {
                match matrix_conformance(sk, model, Measure::Frobenius) {
                    Ok((_, score)) => score,
                    Err(Error::NoLengthCompatibleTrace { .. }) => {
                        stochastic_conformance(sk, model, &CostScheme::default())?
                            .1
                            .total_cost()
                    }
                    Err(e) => return Err(e),
                }
            }
            ClassifyMethod::StochasticAlignment => {
                stochastic_conformance(sk, model, &CostScheme::default())?
                    .1
                    .total_cost()
            }
            ClassifyMethod::ExpectedCost => {
                expected_conformance(sk, model, 0.0, DEFAULT_ENUMERATION_CAP)?.expected_cost
            }
        };
        ranking.push((name.clone(), score));
    }
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(ClassificationResult { ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::synth::{synthesize_sk_trace, NoiseModel};

    fn abcd() -> Alphabet {
        Alphabet::new(["a", "b", "c", "d"]).unwrap()
    }

    fn det(labels: &[&str]) -> DeterministicTrace {
        DeterministicTrace::new(&abcd(), labels).unwrap()
    }

    fn prior() -> StochasticTrace {
        StochasticTrace::from_rows(
            &abcd(),
            &[
                vec![0.50, 0.30, 0.10, 0.20],
                vec![0.30, 0.60, 0.10, 0.20],
                vec![0.20, 0.05, 0.20, 0.31],
                vec![0.00, 0.05, 0.60, 0.29],
            ],
        )
        .unwrap()
    }

    fn worked_example_log() -> EventLog {
        EventLog::new(
            &abcd(),
            vec![
                (det(&["a", "b", "c", "d"]), 20),
                (det(&["b", "a", "c", "d"]), 10),
            ],
        )
        .unwrap()
    }

    #[test]
    fn likelihood_matrix_of_the_worked_example() {
        let tl = likelihood_matrix(&prior(), &worked_example_log()).unwrap();
        let m = tl.matrix();
        // First event: a carries the T_1 share, b the T_2 share.
        assert!((m.prob(0, 0) - 0.726).abs() <= 0.01, "p = {}", m.prob(0, 0));
        assert!((m.prob(1, 0) - 0.274).abs() <= 0.01);
        assert_eq!(m.prob(2, 0), 0.0);
        assert_eq!(m.prob(3, 0), 0.0);
        // Events 3 and 4 agree across the log, so they are deterministic.
        assert!((m.prob(2, 2) - 1.0).abs() < 1e-12);
        assert!((m.prob(3, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn likelihood_matrix_of_single_trace_log_is_one_hot() {
        let t = det(&["a", "b", "c", "d"]);
        let log = EventLog::new(&abcd(), vec![(t.clone(), 1)]).unwrap();
        let tl = likelihood_matrix(&prior(), &log).unwrap();
        assert_eq!(tl.matrix(), &StochasticTrace::one_hot(&t).unwrap());
    }

    #[test]
    fn equidistant_equal_frequency_traces_average() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let sk = StochasticTrace::from_rows(&ab, &[vec![0.5], vec![0.5]]).unwrap();
        let ta = DeterministicTrace::new(&ab, ["a"]).unwrap();
        let tb = DeterministicTrace::new(&ab, ["b"]).unwrap();
        let log = EventLog::new(&ab, vec![(ta, 3), (tb, 3)]).unwrap();
        let tl = likelihood_matrix(&sk, &log).unwrap();
        assert!((tl.matrix().prob(0, 0) - 0.5).abs() < 1e-12);
        assert!((tl.matrix().prob(1, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn likelihood_matrix_error_paths() {
        let empty = EventLog::new(&abcd(), Vec::new()).unwrap();
        assert_eq!(
            likelihood_matrix(&prior(), &empty).unwrap_err(),
            Error::EmptyLog
        );
        let short = EventLog::new(&abcd(), vec![(det(&["a", "b"]), 1)]).unwrap();
        assert_eq!(
            likelihood_matrix(&prior(), &short).unwrap_err(),
            Error::NoLengthCompatibleTrace { length: 4 }
        );
    }

    #[test]
    fn posterior_matches_the_golden_blend() {
        let tl = likelihood_matrix(&prior(), &worked_example_log()).unwrap();
        let posterior = posterior_update(&prior(), &tl, BlendWeights::new(0.5).unwrap()).unwrap();
        let golden = [
            [0.61, 0.29, 0.05, 0.10],
            [0.29, 0.66, 0.05, 0.10],
            [0.10, 0.02, 0.60, 0.15],
            [0.00, 0.03, 0.30, 0.65],
        ];
        for (i, row) in golden.iter().enumerate() {
            for (j, &expected) in row.iter().enumerate() {
                let got = posterior.prob(i, j);
                assert!(
                    (got - expected).abs() <= 0.01,
                    "entry ({i}, {j}): got {got}, expected {expected}"
                );
            }
        }
        assert_eq!(posterior.argmax_decode(), det(&["a", "b", "c", "d"]));
    }

    #[test]
    fn blend_extremes_are_identities() {
        let tl = likelihood_matrix(&prior(), &worked_example_log()).unwrap();
        let keep = posterior_update(&prior(), &tl, BlendWeights::new(1.0).unwrap()).unwrap();
        assert_eq!(keep, prior());
        let replace = posterior_update(&prior(), &tl, BlendWeights::new(0.0).unwrap()).unwrap();
        assert_eq!(&replace, tl.matrix());
    }

    #[test]
    fn blend_weights_validate_alpha() {
        assert_eq!(
            BlendWeights::new(1.5).unwrap_err(),
            Error::InvalidBlendWeight(1.5)
        );
        let w = BlendWeights::new(0.25).unwrap();
        assert_eq!(w.beta(), 0.75);
    }

    #[test]
    fn estimate_weights_prefers_observation_when_noise_free() {
        let t = det(&["a", "b", "c", "d"]);
        let pairs = vec![(StochasticTrace::one_hot(&t).unwrap(), t)];
        let w = estimate_weights(&pairs, &worked_example_log(), 0.1).unwrap();
        assert_eq!(w.alpha(), 1.0);
    }

    #[test]
    fn estimate_weights_single_event_fixture() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let obs = StochasticTrace::from_rows(&ab, &[vec![0.4], vec![0.6]]).unwrap();
        let truth = DeterministicTrace::new(&ab, ["a"]).unwrap();
        let log = EventLog::new(&ab, vec![(truth.clone(), 1)]).unwrap();
        let w = estimate_weights(&[(obs, truth)], &log, 0.1).unwrap();
        // Posterior a-mass is 1 - 0.6 * alpha; correct decode iff alpha < 5/6.
        assert!((w.alpha() - 0.8).abs() < 1e-9, "alpha = {}", w.alpha());
    }

    #[test]
    fn estimate_weights_keeps_alpha_one_when_both_sides_decode_correctly() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let obs = StochasticTrace::from_rows(&ab, &[vec![0.6], vec![0.4]]).unwrap();
        let truth = DeterministicTrace::new(&ab, ["a"]).unwrap();
        let log = EventLog::new(&ab, vec![(truth.clone(), 1)]).unwrap();
        let w = estimate_weights(&[(obs, truth)], &log, 0.1).unwrap();
        assert_eq!(w.alpha(), 1.0);
    }

    #[test]
    fn estimate_weights_rejects_empty_pairs() {
        assert_eq!(
            estimate_weights(&[], &worked_example_log(), 0.1).unwrap_err(),
            Error::EmptyPairs
        );
    }

    #[test]
    fn classify_worked_example_by_frobenius() {
        let models = vec![
            (
                "m1".to_string(),
                EventLog::new(&abcd(), vec![(det(&["a", "b", "c", "d"]), 1)]).unwrap(),
            ),
            (
                "m2".to_string(),
                EventLog::new(&abcd(), vec![(det(&["b", "a", "c", "d"]), 1)]).unwrap(),
            ),
        ];
        let result = classify(&prior(), &models, ClassifyMethod::MatrixFrobenius).unwrap();
        assert_eq!(result.winner(), "m1");
        assert!((result.ranking()[0].1 - 1.52).abs() <= 0.01);
        assert_eq!(result.ranking()[1].0, "m2");
        assert!((result.ranking()[1].1 - 1.82).abs() <= 0.01);
    }

    #[test]
    fn classify_finds_the_containing_model() {
        let t = det(&["b", "a", "c", "d"]);
        let models = vec![
            (
                "first".to_string(),
                EventLog::new(&abcd(), vec![(det(&["a", "b", "c", "d"]), 1)]).unwrap(),
            ),
            (
                "second".to_string(),
                EventLog::new(&abcd(), vec![(t.clone(), 1)]).unwrap(),
            ),
        ];
        for method in [
            ClassifyMethod::MatrixFrobenius,
            ClassifyMethod::StochasticAlignment,
            ClassifyMethod::ExpectedCost,
        ] {
            let result = classify(&StochasticTrace::one_hot(&t).unwrap(), &models, method).unwrap();
            assert_eq!(result.winner(), "second", "method {method:?}");
            assert_eq!(result.ranking()[0].1, 0.0);
        }
    }

    #[test]
    fn classify_recovers_the_source_model_without_noise() {
        let m1 = EventLog::new(&abcd(), vec![(det(&["a", "b", "c", "d"]), 1)]).unwrap();
        let m2 = EventLog::new(&abcd(), vec![(det(&["d", "c", "b", "a"]), 1)]).unwrap();
        let noise = NoiseModel::uniform(0.0, 7).unwrap();
        let sk = synthesize_sk_trace(&det(&["d", "c", "b", "a"]), &noise).unwrap();
        let result = classify(
            &sk,
            &[("m1".to_string(), m1), ("m2".to_string(), m2)],
            ClassifyMethod::MatrixFrobenius,
        )
        .unwrap();
        assert_eq!(result.winner(), "m2");
    }

    #[test]
    fn classify_falls_back_to_alignment_on_length_mismatch() {
        let models = vec![(
            "short".to_string(),
            EventLog::new(&abcd(), vec![(det(&["a", "b", "c"]), 1)]).unwrap(),
        )];
        let result = classify(&prior(), &models, ClassifyMethod::MatrixFrobenius).unwrap();
        // Scored by stochastic alignment instead of failing outright.
        assert!(result.ranking()[0].1.is_finite());
    }

    #[test]
    fn classify_rejects_empty_model_list() {
        assert_eq!(
            classify(&prior(), &[], ClassifyMethod::MatrixFrobenius).unwrap_err(),
            Error::EmptyModelList
        );
    }

    #[test]
    fn frequency_scaling_does_not_move_frobenius_scores() {
        // Frequencies weight the likelihood matrix, not the per-model minimum
        // distance, so scaling them leaves the ranking untouched.
        let build = |scale: u64| {
            vec![
                (
                    "m1".to_string(),
                    EventLog::new(&abcd(), vec![(det(&["a", "b", "c", "d"]), 2 * scale)]).unwrap(),
                ),
                (
                    "m2".to_string(),
                    EventLog::new(&abcd(), vec![(det(&["b", "a", "c", "d"]), scale)]).unwrap(),
                ),
            ]
        };
        let base = classify(&prior(), &build(1), ClassifyMethod::MatrixFrobenius).unwrap();
        let scaled = classify(&prior(), &build(7), ClassifyMethod::MatrixFrobenius).unwrap();
        assert_eq!(base, scaled);
    }
}
