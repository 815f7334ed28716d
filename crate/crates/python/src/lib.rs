//! Python extension module exposing the main sktrace types and operations.
//!
//! Matrices cross the boundary as row-major lists of lists of floats; traces
//! as lists of activity labels. Build with
//! `cargo build -p sktrace-python --release` and import the produced
//! `sktrace_py` shared library (see `python/smoke_test.py`).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sktrace as core;
use sktrace::{
    BlendWeights, ClassifyMethod, CostScheme, Measure, RealizationOptions, SyncCost, TraceSetModel,
};

fn to_py_err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_scheme(scheme: &str, log_cost: f64, model_cost: f64) -> PyResult<CostScheme> {
    let sync_cost = match scheme {
        "one-minus-p" => SyncCost::OneMinusP,
        "neg-log-p" => SyncCost::NegLogP,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown scheme `{other}` (expected `one-minus-p` or `neg-log-p`)"
            )))
        }
    };
    CostScheme::new(sync_cost, log_cost, model_cost).map_err(to_py_err)
}

#[pyclass(name = "Alphabet", frozen, from_py_object)]
#[derive(Clone)]
struct PyAlphabet {
    inner: core::Alphabet,
}

#[pymethods]
impl PyAlphabet {
    #[new]
    fn new(labels: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: core::Alphabet::new(labels).map_err(to_py_err)?,
        })
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index_of(label)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Alphabet({:?})", self.inner.labels())
    }
}

#[pyclass(name = "DeterministicTrace", frozen, from_py_object)]
#[derive(Clone)]
struct PyDeterministicTrace {
    inner: core::DeterministicTrace,
}

#[pymethods]
impl PyDeterministicTrace {
    #[new]
    fn new(alphabet: &PyAlphabet, activities: Vec<String>) -> PyResult<Self> {
        Ok(Self {
            inner: core::DeterministicTrace::new(&alphabet.inner, activities).map_err(to_py_err)?,
        })
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().map(str::to_string).collect()
    }

    fn alphabet(&self) -> PyAlphabet {
        PyAlphabet {
            inner: self.inner.alphabet().clone(),
        }
    }

    fn one_hot(&self) -> PyResult<PyStochasticTrace> {
        Ok(PyStochasticTrace {
            inner: core::StochasticTrace::one_hot(&self.inner).map_err(to_py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("DeterministicTrace({})", self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

#[pyclass(name = "StochasticTrace", frozen, from_py_object)]
#[derive(Clone)]
struct PyStochasticTrace {
    inner: core::StochasticTrace,
}

#[pymethods]
impl PyStochasticTrace {
    /// Validates a row-major probability grid against the alphabet.
    #[new]
    fn new(alphabet: &PyAlphabet, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: core::StochasticTrace::from_rows(&alphabet.inner, &rows).map_err(to_py_err)?,
        })
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn alphabet(&self) -> PyAlphabet {
        PyAlphabet {
            inner: self.inner.alphabet().clone(),
        }
    }

    fn events(&self) -> usize {
        self.inner.events()
    }

    fn activities(&self) -> usize {
        self.inner.activities()
    }

    fn prob(&self, activity: usize, event: usize) -> f64 {
        self.inner.prob(activity, event)
    }

    fn argmax_decode(&self) -> PyDeterministicTrace {
        PyDeterministicTrace {
            inner: self.inner.argmax_decode(),
        }
    }

    fn realization_probability(&self, trace: &PyDeterministicTrace) -> PyResult<f64> {
        self.inner
            .realization_probability(&trace.inner)
            .map_err(to_py_err)
    }

    #[pyo3(signature = (min_prob=0.0, top_k=None, cap=core::trace::DEFAULT_ENUMERATION_CAP))]
    fn enumerate_realizations(
        &self,
        min_prob: f64,
        top_k: Option<usize>,
        cap: u64,
    ) -> PyResult<Vec<(PyDeterministicTrace, f64)>> {
        let options = RealizationOptions {
            min_prob,
            top_k,
            cap,
        };
        Ok(self
            .inner
            .enumerate_realizations(&options)
            .map_err(to_py_err)?
            .into_iter()
            .map(|(trace, prob)| (PyDeterministicTrace { inner: trace }, prob))
            .collect())
    }

    fn collapse_frames(&self) -> PyStochasticTrace {
        PyStochasticTrace {
            inner: self.inner.collapse_frames(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "StochasticTrace({} activities x {} events)",
            self.inner.activities(),
            self.inner.events()
        )
    }
}

#[pyclass(name = "EventLog", frozen, from_py_object)]
#[derive(Clone)]
struct PyEventLog {
    inner: core::EventLog,
}

#[pymethods]
impl PyEventLog {
    #[new]
    fn new(alphabet: &PyAlphabet, entries: Vec<(PyDeterministicTrace, u64)>) -> PyResult<Self> {
        Ok(Self {
            inner: core::EventLog::new(
                &alphabet.inner,
                entries.into_iter().map(|(t, f)| (t.inner, f)),
            )
            .map_err(to_py_err)?,
        })
    }

    fn alphabet(&self) -> PyAlphabet {
        PyAlphabet {
            inner: self.inner.alphabet().clone(),
        }
    }

    fn entries(&self) -> Vec<(PyDeterministicTrace, u64)> {
        self.inner
            .entries()
            .iter()
            .map(|e| {
                (
                    PyDeterministicTrace {
                        inner: e.trace().clone(),
                    },
                    e.frequency(),
                )
            })
            .collect()
    }

    fn total_frequency(&self) -> u64 {
        self.inner.total_frequency()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("EventLog({} traces)", self.inner.len())
    }
}

#[pyclass(name = "NoiseModel", frozen, from_py_object)]
#[derive(Clone)]
struct PyNoiseModel {
    inner: core::NoiseModel,
}

#[pymethods]
impl PyNoiseModel {
    /// Uniform smear by default; pass a row-stochastic confusion grid to
    /// redirect the corrupted mass asymmetrically.
    #[new]
    #[pyo3(signature = (epsilon, seed=0, confusion=None))]
    fn new(epsilon: f64, seed: u64, confusion: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let inner = match confusion {
            None => core::NoiseModel::uniform(epsilon, seed),
            Some(grid) => core::NoiseModel::with_confusion(epsilon, grid, seed),
        };
        Ok(Self {
            inner: inner.map_err(to_py_err)?,
        })
    }

    fn epsilon(&self) -> f64 {
        self.inner.epsilon()
    }

    fn seed(&self) -> u64 {
        self.inner.seed()
    }
}

#[pyclass(name = "Alignment", frozen)]
struct PyAlignment {
    #[pyo3(get)]
    cost: f64,
    /// `(kind, event, activity, cost)` per move; `event`/`activity` are None
    /// where the move does not touch that side.
    #[pyo3(get)]
    moves: Vec<(String, Option<usize>, Option<String>, f64)>,
}

fn wrap_alignment(alignment: core::Alignment, alphabet: &core::Alphabet) -> PyAlignment {
    PyAlignment {
        cost: alignment.total_cost(),
        moves: alignment
            .moves()
            .iter()
            .map(|m| {
                (
                    match m.kind {
                        core::MoveKind::Synchronous => "sync".to_string(),
                        core::MoveKind::Log => "log".to_string(),
                        core::MoveKind::Model => "model".to_string(),
                    },
                    m.log_position,
                    m.model_activity.map(|i| alphabet.label(i).to_string()),
                    m.cost,
                )
            })
            .collect(),
    }
}

#[pyfunction]
fn frobenius_distance(a: &PyStochasticTrace, b: &PyStochasticTrace) -> PyResult<f64> {
    core::frobenius_distance(&a.inner, &b.inner).map_err(to_py_err)
}

#[pyfunction]
fn cross_entropy(reference: &PyDeterministicTrace, sk: &PyStochasticTrace) -> PyResult<f64> {
    core::cross_entropy(&reference.inner, &sk.inner).map_err(to_py_err)
}

#[pyfunction]
fn softmin_normalize(distances: Vec<f64>) -> PyResult<Vec<f64>> {
    let distances = core::DistanceVector::new(distances).map_err(to_py_err)?;
    Ok(core::softmin_normalize(&distances))
}

#[pyfunction]
fn align(
    log_trace: &PyDeterministicTrace,
    model_trace: &PyDeterministicTrace,
) -> PyResult<PyAlignment> {
    let alignment = core::align(&log_trace.inner, &model_trace.inner).map_err(to_py_err)?;
    Ok(wrap_alignment(alignment, log_trace.inner.alphabet()))
}

#[pyfunction]
#[pyo3(signature = (sk, model_trace, scheme="one-minus-p", log_cost=1.0, model_cost=1.0))]
fn stochastic_alignment(
    sk: &PyStochasticTrace,
    model_trace: &PyDeterministicTrace,
    scheme: &str,
    log_cost: f64,
    model_cost: f64,
) -> PyResult<PyAlignment> {
    let scheme = parse_scheme(scheme, log_cost, model_cost)?;
    let alignment =
        core::stochastic_alignment(&sk.inner, &model_trace.inner, &scheme).map_err(to_py_err)?;
    Ok(wrap_alignment(alignment, sk.inner.alphabet()))
}

#[pyfunction]
fn model_conformance(
    trace: &PyDeterministicTrace,
    model: &PyEventLog,
) -> PyResult<(usize, PyAlignment)> {
    let (index, alignment) =
        core::model_conformance(&trace.inner, &model.inner).map_err(to_py_err)?;
    Ok((index, wrap_alignment(alignment, trace.inner.alphabet())))
}

#[pyfunction]
#[pyo3(signature = (sk, model, scheme="one-minus-p", log_cost=1.0, model_cost=1.0))]
fn stochastic_conformance(
    sk: &PyStochasticTrace,
    model: &PyEventLog,
    scheme: &str,
    log_cost: f64,
    model_cost: f64,
) -> PyResult<(usize, PyAlignment)> {
    let scheme = parse_scheme(scheme, log_cost, model_cost)?;
    let (index, alignment) =
        core::stochastic_conformance(&sk.inner, &model.inner, &scheme).map_err(to_py_err)?;
    Ok((index, wrap_alignment(alignment, sk.inner.alphabet())))
}

#[pyfunction]
#[pyo3(signature = (sk, model, measure="frobenius"))]
fn matrix_conformance(
    sk: &PyStochasticTrace,
    model: &PyEventLog,
    measure: &str,
) -> PyResult<(usize, f64)> {
    let measure = match measure {
        "frobenius" => Measure::Frobenius,
        "cross-entropy" => Measure::CrossEntropy,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown measure `{other}` (expected `frobenius` or `cross-entropy`)"
            )))
        }
    };
    core::matrix_conformance(&sk.inner, &model.inner, measure).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (sk, model, min_prob=0.0, cap=core::trace::DEFAULT_ENUMERATION_CAP))]
fn expected_conformance(
    sk: &PyStochasticTrace,
    model: &PyEventLog,
    min_prob: f64,
    cap: u64,
) -> PyResult<(f64, f64)> {
    let result =
        core::expected_conformance(&sk.inner, &model.inner, min_prob, cap).map_err(to_py_err)?;
    Ok((result.expected_cost, result.covered_mass))
}

#[pyfunction]
fn likelihood_matrix(sk: &PyStochasticTrace, log: &PyEventLog) -> PyResult<PyStochasticTrace> {
    Ok(PyStochasticTrace {
        inner: core::likelihood_matrix(&sk.inner, &log.inner)
            .map_err(to_py_err)?
            .into_matrix(),
    })
}

#[pyfunction]
fn posterior_update(
    prior: &PyStochasticTrace,
    likelihood: &PyStochasticTrace,
    alpha: f64,
) -> PyResult<PyStochasticTrace> {
    let weights = BlendWeights::new(alpha).map_err(to_py_err)?;
    let likelihood = core::LikelihoodMatrix::from(likelihood.inner.clone());
    Ok(PyStochasticTrace {
        inner: core::posterior_update(&prior.inner, &likelihood, weights).map_err(to_py_err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (pairs, log, grid_step=0.1))]
fn estimate_weights(
    pairs: Vec<(PyStochasticTrace, PyDeterministicTrace)>,
    log: &PyEventLog,
    grid_step: f64,
) -> PyResult<f64> {
    let pairs: Vec<_> = pairs
        .into_iter()
        .map(|(obs, truth)| (obs.inner, truth.inner))
        .collect();
    Ok(core::estimate_weights(&pairs, &log.inner, grid_step)
        .map_err(to_py_err)?
        .alpha())
}

#[pyfunction]
#[pyo3(signature = (sk, models, method="frobenius"))]
fn classify(
    sk: &PyStochasticTrace,
    models: Vec<(String, PyEventLog)>,
    method: &str,
) -> PyResult<(String, Vec<(String, f64)>)> {
    let method = match method {
        "frobenius" => ClassifyMethod::MatrixFrobenius,
        "stochastic-alignment" => ClassifyMethod::StochasticAlignment,
        "expected-cost" => ClassifyMethod::ExpectedCost,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method `{other}` (expected `frobenius`, `stochastic-alignment` \
                 or `expected-cost`)"
            )))
        }
    };
    let models: Vec<(String, TraceSetModel)> = models
        .into_iter()
        .map(|(name, model)| (name, model.inner))
        .collect();
    let result = core::classify(&sk.inner, &models, method).map_err(to_py_err)?;
    Ok((result.winner().to_string(), result.ranking().to_vec()))
}

#[pyfunction]
fn synthesize_sk_trace(
    truth: &PyDeterministicTrace,
    noise: &PyNoiseModel,
) -> PyResult<PyStochasticTrace> {
    Ok(PyStochasticTrace {
        inner: core::synthesize_sk_trace(&truth.inner, &noise.inner).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn synthesize_log(
    model: &PyEventLog,
    count: usize,
    noise: &PyNoiseModel,
) -> PyResult<Vec<(PyStochasticTrace, usize)>> {
    Ok(core::synthesize_log(&model.inner, count, &noise.inner)
        .map_err(to_py_err)?
        .into_iter()
        .map(|(sk, index)| (PyStochasticTrace { inner: sk }, index))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (text, alphabet=None))]
fn parse_matrix(text: &str, alphabet: Option<&PyAlphabet>) -> PyResult<PyStochasticTrace> {
    Ok(PyStochasticTrace {
        inner: core::ingest::parse_matrix(text, alphabet.map(|a| &a.inner)).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn parse_log(text: &str) -> PyResult<PyEventLog> {
    Ok(PyEventLog {
        inner: core::ingest::parse_log(text).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn parse_xes(text: &str) -> PyResult<PyEventLog> {
    Ok(PyEventLog {
        inner: core::ingest::parse_xes(text).map_err(to_py_err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (sk, precision=core::ingest::DEFAULT_PRECISION))]
fn write_matrix(sk: &PyStochasticTrace, precision: usize) -> String {
    core::ingest::write_matrix(&sk.inner, precision)
}

#[pyfunction]
fn write_log(log: &PyEventLog) -> String {
    core::ingest::write_log(&log.inner)
}

#[pymodule]
fn sktrace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlphabet>()?;
    m.add_class::<PyDeterministicTrace>()?;
    m.add_class::<PyStochasticTrace>()?;
    m.add_class::<PyEventLog>()?;
    m.add_class::<PyNoiseModel>()?;
    m.add_class::<PyAlignment>()?;
    m.add_function(wrap_pyfunction!(frobenius_distance, m)?)?;
    m.add_function(wrap_pyfunction!(cross_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(softmin_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(align, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_alignment, m)?)?;
    m.add_function(wrap_pyfunction!(model_conformance, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_conformance, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_conformance, m)?)?;
    m.add_function(wrap_pyfunction!(expected_conformance, m)?)?;
    m.add_function(wrap_pyfunction!(likelihood_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_update, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_weights, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_sk_trace, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_log, m)?)?;
    m.add_function(wrap_pyfunction!(parse_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(parse_log, m)?)?;
    m.add_function(wrap_pyfunction!(parse_xes, m)?)?;
    m.add_function(wrap_pyfunction!(write_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(write_log, m)?)?;
    Ok(())
}
