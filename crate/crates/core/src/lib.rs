//! Conformance checking and classification for stochastically known traces.
//!
//! Sensor pipelines (e.g. the softmax layer of an activity-recognition
//! network) do not emit a sequence of activities but a probability
//! distribution over activities per observed event. This crate models such
//! observations as column-stochastic matrices and provides:
//!
//! - validation, decoding, realization enumeration and frame grouping for
//!   probability-matrix traces ([`trace`]);
//! - probabilistic measures: Frobenius distance, cross-entropy, and softmin
//!   weighting ([`measures`]);
//! - optimal alignments of deterministic and stochastic traces against
//!   trace-set models, plus a brute-force expected-cost oracle
//!   ([`conformance`]);
//! - classification among candidate models and the posterior-update pipeline
//!   blending an observation with prior process knowledge ([mod@classify]);
//! - seeded synthesis of noisy observations for experiments ([`synth`]);
//! - plain-text formats and a minimal XES import ([`ingest`]).
//!
//! All types are immutable after construction and all operations are pure,
//! so values can be shared and used across threads freely.
//!
//! ```
//! use sktrace::{Alphabet, BlendWeights, DeterministicTrace, EventLog, StochasticTrace};
//!
//! # fn main() -> sktrace::Result<()> {
//! let alphabet = Alphabet::new(["a", "b", "c", "d"])?;
//! let observation = StochasticTrace::from_rows(
//!     &alphabet,
//!     &[
//!         vec![0.50, 0.30, 0.10, 0.20],
//!         vec![0.30, 0.60, 0.10, 0.20],
//!         vec![0.20, 0.05, 0.20, 0.31],
//!         vec![0.00, 0.05, 0.60, 0.29],
//!     ],
//! )?;
//! let log = EventLog::new(
//!     &alphabet,
//!     vec![
//!         (DeterministicTrace::new(&alphabet, ["a", "b", "c", "d"])?, 20),
//!         (DeterministicTrace::new(&alphabet, ["b", "a", "c", "d"])?, 10),
//!     ],
//! )?;
//!
//! // The raw decode misreads the tail; blending with the log repairs it.
//! assert_eq!(observation.argmax_decode().to_string(), "a b d c");
//! let likelihood = sktrace::likelihood_matrix(&observation, &log)?;
//! let posterior =
//!     sktrace::posterior_update(&observation, &likelihood, BlendWeights::new(0.5)?)?;
//! assert_eq!(posterior.argmax_decode().to_string(), "a b c d");
//! # Ok(())
//! # }
//! ```

pub mod alphabet;
pub mod classify;
pub mod conformance;
pub mod error;
pub mod ingest;
pub mod measures;
pub mod synth;
pub mod trace;

pub use alphabet::Alphabet;
pub use classify::{
    classify, estimate_weights, likelihood_matrix, posterior_update, BlendWeights,
    ClassificationResult, ClassifyMethod, LikelihoodMatrix,
};
pub use conformance::{
    align, expected_conformance, matrix_conformance, model_conformance, stochastic_alignment,
    stochastic_conformance, Alignment, CostScheme, ExpectedConformance, Move, MoveKind, SyncCost,
};
pub use error::{Error, Result};
pub use measures::{cross_entropy, frobenius_distance, softmin_normalize, DistanceVector, Measure};
pub use synth::{synthesize_log, synthesize_sk_trace, NoiseModel, Smear};
pub use trace::{
    DeterministicTrace, EventLog, LogEntry, RealizationOptions, StochasticTrace, TraceSetModel,
};
