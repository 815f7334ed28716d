//! Batch command-line front end: every subcommand reads files, runs one
//! library pipeline, and writes a single human table or JSON document.
//!
//! Exit codes: 0 success, 1 domain/validation error, 2 I/O or syntax error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sktrace::ingest::{self, parse_log, parse_matrix, parse_xes, write_matrix};
use sktrace::{
    classify, estimate_weights, expected_conformance, likelihood_matrix, matrix_conformance,
    posterior_update, stochastic_conformance, Alignment, BlendWeights, ClassifyMethod, CostScheme,
    DeterministicTrace, EventLog, Measure, MoveKind, NoiseModel, StochasticTrace, SyncCost,
    TraceSetModel,
};

const SCHEMA: &str = "sktrace/1";

#[derive(Parser)]
#[command(
    name = "sktrace",
    version,
    about = "Conformance checking and classification for stochastically known traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the output to a file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConformMethod {
    /// Minimum-cost stochastic alignment over the model's traces
    Alignment,
    /// Frobenius distance to the nearest length-compatible model trace
    Frobenius,
    /// Cross-entropy of the nearest length-compatible model trace
    CrossEntropy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    OneMinusP,
    NegLogP,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassifyMethodArg {
    Frobenius,
    StochasticAlignment,
    ExpectedCost,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a probability-matrix trace file
    Validate {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Argmax-decode a matrix trace into an activity sequence
    Decode {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Check conformance of a trace against one model
    Conform {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ConformMethod::Alignment)]
        method: ConformMethod,
        /// Synchronous-move cost function for alignment conformance
        #[arg(long, value_enum, default_value_t = SchemeArg::OneMinusP)]
        scheme: SchemeArg,
        /// Cost of skipping an observed event
        #[arg(long, default_value_t = 1.0)]
        log_cost: f64,
        /// Cost of skipping a model activity
        #[arg(long, default_value_t = 1.0)]
        model_cost: f64,
    },
    /// Classify a trace among candidate models
    Classify {
        #[arg(long)]
        trace: PathBuf,
        /// Candidate model file; repeat once per model
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = ClassifyMethodArg::Frobenius)]
        method: ClassifyMethodArg,
    },
    /// Blend an observation with an event log's likelihood matrix
    Posterior {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        log: PathBuf,
        /// Observation weight; the log contributes 1 - alpha
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Also decode the posterior matrix
        #[arg(long)]
        decode: bool,
        /// Decimal digits in the written matrix
        #[arg(long, default_value_t = ingest::DEFAULT_PRECISION)]
        precision: usize,
    },
    /// Expected alignment cost over the realization distribution
    Expected {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Drop realizations with probability at or below this
        #[arg(long, default_value_t = 0.0)]
        min_prob: f64,
        /// Enumeration guard cap
        #[arg(long, default_value_t = sktrace::trace::DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// Synthesize noisy stochastic traces from a model
    Synth {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Corruption mass in [0, 1], spread uniformly
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Decimal digits in written matrices
        #[arg(long, default_value_t = ingest::DEFAULT_PRECISION)]
        precision: usize,
    },
    /// Estimate the observation weight from supervised pairs
    Weights {
        #[arg(long)]
        log: PathBuf,
        /// Supervised pair as `observation.csv=a b c d`; repeat per pair
        #[arg(long = "pair", required = true)]
        pairs: Vec<String>,
        #[arg(long, default_value_t = 0.1)]
        grid_step: f64,
    },
}

enum CliError {
    Io(String),
    Domain(sktrace::Error),
    Usage(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Usage(_) => 2,
            CliError::Domain(e) if e.is_syntax() => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(message) | CliError::Usage(message) => write!(f, "{message}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<sktrace::Error> for CliError {
    fn from(e: sktrace::Error) -> Self {
        CliError::Domain(e)
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read `{}`: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<StochasticTrace, CliError> {
    Ok(parse_matrix(&read_file(path)?, None)?)
}

/// Loads a log or model file; `.xes` files go through the XES importer.
fn load_log(path: &Path) -> Result<EventLog, CliError> {
    let text = read_file(path)?;
    if path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("xes"))
    {
        Ok(parse_xes(&text)?)
    } else {
        Ok(parse_log(&text)?)
    }
}

fn model_name(path: &Path) -> String {
    path.file_stem()
        .map(|stem| stem.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

#[derive(Serialize)]
struct Document<T: Serialize> {
    schema: &'static str,
    command: &'static str,
    #[serde(flatten)]
    body: T,
}

fn render<T: Serialize>(format: Format, command: &'static str, body: &T, table: String) -> String {
    match format {
        Format::Table => table,
        Format::Json => {
            let document = Document {
                schema: SCHEMA,
                command,
                body,
            };
            let mut text = serde_json::to_string_pretty(&document).expect("serializable output");
            text.push('\n');
            text
        }
    }
}

#[derive(Serialize)]
struct MatrixBody {
    alphabet: Vec<String>,
    events: usize,
    rows: Vec<Vec<f64>>,
}

impl MatrixBody {
    fn new(trace: &StochasticTrace) -> Self {
        Self {
            alphabet: trace.alphabet().labels().to_vec(),
            events: trace.events(),
            rows: trace.rows(),
        }
    }
}

fn labels(trace: &DeterministicTrace) -> Vec<String> {
    trace.labels().map(str::to_string).collect()
}

#[derive(Serialize)]
struct MoveBody {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    event: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    activity: Option<String>,
    cost: f64,
}

fn alignment_moves(alignment: &Alignment, trace: &StochasticTrace) -> Vec<MoveBody> {
    alignment
        .moves()
        .iter()
        .map(|m| MoveBody {
            kind: match m.kind {
                MoveKind::Synchronous => "sync",
                MoveKind::Log => "log",
                MoveKind::Model => "model",
            },
            event: m.log_position,
            activity: m
                .model_activity
                .map(|i| trace.alphabet().label(i).to_string()),
            cost: m.cost,
        })
        .collect()
}

fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Validate { trace } => {
            let trace = load_matrix(trace)?;
            #[derive(Serialize)]
            struct Body {
                valid: bool,
                alphabet: Vec<String>,
                activities: usize,
                events: usize,
            }
            let body = Body {
                valid: true,
                alphabet: trace.alphabet().labels().to_vec(),
                activities: trace.activities(),
                events: trace.events(),
            };
            let table = format!(
                "valid: {} activities x {} events (alphabet: {})\n",
                body.activities,
                body.events,
                trace.alphabet()
            );
            Ok(render(cli.format, "validate", &body, table))
        }
        Command::Decode { trace } => {
            let trace = load_matrix(trace)?;
            let decoded = trace.argmax_decode();
            #[derive(Serialize)]
            struct Body {
                trace: Vec<String>,
            }
            let body = Body {
                trace: labels(&decoded),
            };
            Ok(render(cli.format, "decode", &body, format!("{decoded}\n")))
        }
        Command::Conform {
            trace,
            model,
            method,
            scheme,
            log_cost,
            model_cost,
        } => {
            let sk = load_matrix(trace)?;
            let model = load_log(model)?;
            conform_output(cli, &sk, &model, *method, *scheme, *log_cost, *model_cost)
        }
        Command::Classify {
            trace,
            models,
            method,
        } => {
            let sk = load_matrix(trace)?;
            let mut candidates: Vec<(String, TraceSetModel)> = Vec::new();
            for path in models {
                candidates.push((model_name(path), load_log(path)?));
            }
            let method = match method {
                ClassifyMethodArg::Frobenius => ClassifyMethod::MatrixFrobenius,
                ClassifyMethodArg::StochasticAlignment => ClassifyMethod::StochasticAlignment,
                ClassifyMethodArg::ExpectedCost => ClassifyMethod::ExpectedCost,
            };
            let result = classify(&sk, &candidates, method)?;
            #[derive(Serialize)]
            struct Entry {
                model: String,
                score: f64,
            }
            #[derive(Serialize)]
            struct Body {
                winner: String,
                ranking: Vec<Entry>,
            }
            let body = Body {
                winner: result.winner().to_string(),
                ranking: result
                    .ranking()
                    .iter()
                    .map(|(model, score)| Entry {
                        model: model.clone(),
                        score: *score,
                    })
                    .collect(),
            };
            let mut table = format!("winner: {}\n", body.winner);
            for entry in &body.ranking {
                table.push_str(&format!("{}\t{:.6}\n", entry.model, entry.score));
            }
            Ok(render(cli.format, "classify", &body, table))
        }
        Command::Posterior {
            trace,
            log,
            alpha,
            decode,
            precision,
        } => {
            let prior = load_matrix(trace)?;
            let log = load_log(log)?;
            let weights = BlendWeights::new(*alpha)?;
            let likelihood = likelihood_matrix(&prior, &log)?;
            let posterior = posterior_update(&prior, &likelihood, weights)?;
            let decoded = decode.then(|| posterior.argmax_decode());
            #[derive(Serialize)]
            struct Body {
                alpha: f64,
                matrix: MatrixBody,
                #[serde(skip_serializing_if = "Option::is_none")]
                decode: Option<Vec<String>>,
            }
            let body = Body {
                alpha: *alpha,
                matrix: MatrixBody::new(&posterior),
                decode: decoded.as_ref().map(labels),
            };
            let mut table = format!("alpha: {alpha}\n{}", write_matrix(&posterior, *precision));
            if let Some(decoded) = &decoded {
                table.push_str(&format!("decode: {decoded}\n"));
            }
            Ok(render(cli.format, "posterior", &body, table))
        }
        Command::Expected {
            trace,
            model,
            min_prob,
            cap,
        } => {
            let sk = load_matrix(trace)?;
            let model = load_log(model)?;
            let result = expected_conformance(&sk, &model, *min_prob, *cap)?;
            #[derive(Serialize)]
            struct Body {
                min_prob: f64,
                expected_cost: f64,
                covered_mass: f64,
            }
            let body = Body {
                min_prob: *min_prob,
                expected_cost: result.expected_cost,
                covered_mass: result.covered_mass,
            };
            let table = format!(
                "expected cost: {:.6}\ncovered mass: {:.6}\n",
                result.expected_cost, result.covered_mass
            );
            Ok(render(cli.format, "expected", &body, table))
        }
        Command::Synth {
            model,
            count,
            epsilon,
            seed,
            precision,
        } => {
            let model = load_log(model)?;
            let noise = NoiseModel::uniform(*epsilon, *seed)?;
            let samples = sktrace::synthesize_log(&model, *count, &noise)?;
            #[derive(Serialize)]
            struct Sample {
                truth_index: usize,
                truth: Vec<String>,
                matrix: MatrixBody,
            }
            #[derive(Serialize)]
            struct Body {
                seed: u64,
                epsilon: f64,
                count: usize,
                samples: Vec<Sample>,
            }
            let body = Body {
                seed: *seed,
                epsilon: *epsilon,
                count: *count,
                samples: samples
                    .iter()
                    .map(|(sk, truth_index)| Sample {
                        truth_index: *truth_index,
                        truth: labels(model.entries()[*truth_index].trace()),
                        matrix: MatrixBody::new(sk),
                    })
                    .collect(),
            };
            let mut table = format!("seed: {seed}\nepsilon: {epsilon}\n");
            for (index, (sk, truth_index)) in samples.iter().enumerate() {
                table.push_str(&format!(
                    "# sample {index}: truth {truth_index} ({})\n{}",
                    model.entries()[*truth_index].trace(),
                    write_matrix(sk, *precision)
                ));
            }
            Ok(render(cli.format, "synth", &body, table))
        }
        Command::Weights {
            log,
            pairs,
            grid_step,
        } => {
            let log = load_log(log)?;
            let mut supervised = Vec::new();
            for pair in pairs {
                let (path, truth) = pair.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!(
                        "pair `{pair}` must look like `observation.csv=a b c d`"
                    ))
                })?;
                let observation = load_matrix(Path::new(path))?;
                let truth = DeterministicTrace::new(log.alphabet(), truth.split_whitespace())?;
                supervised.push((observation, truth));
            }
            let weights = estimate_weights(&supervised, &log, *grid_step)?;
            #[derive(Serialize)]
            struct Body {
                alpha: f64,
                beta: f64,
                pairs: usize,
            }
            let body = Body {
                alpha: weights.alpha(),
                beta: weights.beta(),
                pairs: supervised.len(),
            };
            let table = format!("alpha: {}\nbeta: {}\n", weights.alpha(), weights.beta());
            Ok(render(cli.format, "weights", &body, table))
        }
    }
}

fn conform_output(
    cli: &Cli,
    sk: &StochasticTrace,
    model: &TraceSetModel,
    method: ConformMethod,
    scheme: SchemeArg,
    log_cost: f64,
    model_cost: f64,
) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Body {
        method: &'static str,
        model_trace: Vec<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        cost: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        score: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        moves: Option<Vec<MoveBody>>,
    }
    match method {
        ConformMethod::Alignment => {
            let sync_cost = match scheme {
                SchemeArg::OneMinusP => SyncCost::OneMinusP,
                SchemeArg::NegLogP => SyncCost::NegLogP,
            };
            let scheme = CostScheme::new(sync_cost, log_cost, model_cost)?;
            let (index, alignment) = stochastic_conformance(sk, model, &scheme)?;
            let best = model.entries()[index].trace();
            let body = Body {
                method: "alignment",
                model_trace: labels(best),
                cost: Some(alignment.total_cost()),
                score: None,
                moves: Some(alignment_moves(&alignment, sk)),
            };
            let mut table = format!(
                "model trace: {best}\ncost: {:.6}\nmoves:\n",
                alignment.total_cost()
            );
            for m in body.moves.as_deref().unwrap_or_default() {
                let event = m
                    .event
                    .map(|j| format!("e{}", j + 1))
                    .unwrap_or_else(|| "--".into());
                let activity = m.activity.as_deref().unwrap_or("--");
                table.push_str(&format!(
                    "  {:<5} {:>4} ~ {:<4} ({:.4})\n",
                    m.kind, event, activity, m.cost
                ));
            }
            Ok(render(cli.format, "conform", &body, table))
        }
        ConformMethod::Frobenius | ConformMethod::CrossEntropy => {
            let measure = match method {
                ConformMethod::Frobenius => Measure::Frobenius,
                _ => Measure::CrossEntropy,
            };
            let (index, score) = matrix_conformance(sk, model, measure)?;
            let best = model.entries()[index].trace();
            let body = Body {
                method: match measure {
                    Measure::Frobenius => "frobenius",
                    Measure::CrossEntropy => "cross-entropy",
                },
                model_trace: labels(best),
                cost: None,
                score: Some(score),
                moves: None,
            };
            let table = format!("model trace: {best}\nscore: {score:.6}\n");
            Ok(render(cli.format, "conform", &body, table))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, &output) {
                    eprintln!("error: cannot write `{}`: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{output}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
