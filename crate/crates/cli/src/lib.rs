//! `gapcheck` command line: classification, abduction, minimal pairs,
//! evaluation and the review service.

use std::fmt;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use gapcheck_core::abduce::{abduce, build_minimal_pair, AbductionError, Target, DEFAULT_K};
use gapcheck_core::dataset::{load_dataset, load_predictions, Case, DatasetError};
use gapcheck_core::harness::{
    all_entailment_predictor, classify_all, echo_verdict_predictor, evaluate_with, query_clause_sets, render_text,
    HarnessError,
};
use gapcheck_core::review::{ReviewError, ReviewService};
use gapcheck_core::Verdict;

pub mod server;

#[derive(Debug, Parser)]
#[command(
    name = "gapcheck",
    version,
    about = "Formal entailment and label-gap auditing for contract logic"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every case (or one) and print one JSON line per case.
    Classify {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long = "case")]
        case_id: Option<String>,
    },
    /// Enumerate minimal axiom sets for a neutral case.
    Abduce {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long = "case")]
        case_id: String,
        /// Both directions when omitted.
        #[arg(long)]
        target: Option<TargetArg>,
        #[arg(short, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Write a minimal pair for every entailment solution of every neutral case.
    Pairs {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against formal verdicts and write the report.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, required_unless_present = "predictor", conflicts_with = "predictor")]
        pred: Option<PathBuf>,
        /// Use a bundled predictor instead of a predictions file.
        #[arg(long)]
        predictor: Option<PredictorArg>,
        #[arg(long)]
        report_out: PathBuf,
        /// Also write each case's two refutation queries in DIMACS form.
        #[arg(long)]
        emit_dimacs: Option<PathBuf>,
        #[arg(short, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Run the review service.
    Serve {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory holding the review UI bundle.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TargetArg {
    Entailment,
    Contradiction,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Entailment => Target::Entailment,
            TargetArg::Contradiction => Target::Contradiction,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PredictorArg {
    AllEntailment,
    Echo,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input files or arguments (exit 1).
    Input(String),
    /// A checked invariant did not hold (exit 2).
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(1),
            CliError::Invariant(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AbductionError> for CliError {
    fn from(e: AbductionError) -> Self {
        match e {
            AbductionError::PairNotEntailed { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Abduction(a) => a.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ReviewError> for CliError {
    fn from(e: ReviewError) -> Self {
        match e {
            ReviewError::Unsound { .. } => CliError::Invariant(e.to_string()),
            ReviewError::Abduction(a) => a.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn find<'a>(dataset: &'a [Case], id: &str) -> Result<&'a Case, CliError> {
    dataset
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| CliError::Input(format!("unknown case `{id}`")))
}

fn json_line<T: serde::Serialize>(out: &mut impl Write, value: &T) -> Result<(), CliError> {
    let line = serde_json::to_string(value).expect("output serializes");
    writeln!(out, "{line}").map_err(|e| CliError::Input(format!("cannot write output: {e}")))
}

/// Runs one command, writing results to `out`.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), CliError> {
    match cli.command {
        Command::Classify { dataset, case_id } => {
            let mut dataset = load_dataset(dataset)?;
            if let Some(id) = case_id {
                dataset = vec![find(&dataset, &id)?.clone()];
            }
            for c in classify_all(&dataset) {
                json_line(out, &c)?;
            }
        }
        Command::Abduce {
            dataset,
            case_id,
            target,
            k,
        } => {
            let dataset = load_dataset(dataset)?;
            let case = find(&dataset, &case_id)?;
            let targets = match target {
                Some(t) => vec![t.into()],
                None => Target::BOTH.to_vec(),
            };
            for t in targets {
                json_line(out, &abduce(case, t, k)?)?;
            }
        }
        Command::Pairs { dataset, out: path } => {
            let dataset = load_dataset(dataset)?;
            let mut lines = String::new();
            let mut count = 0;
            for (case, classified) in dataset.iter().zip(classify_all(&dataset)) {
                if classified.verdict != Verdict::Neutral {
                    continue;
                }
                for s in abduce(case, Target::Entailment, DEFAULT_K)?.solutions {
                    let pair = build_minimal_pair(case, &s.axiom_ids)?;
                    lines.push_str(&serde_json::to_string(&pair).expect("pair serializes"));
                    lines.push('\n');
                    count += 1;
                }
            }
            write_file(&path, &lines)?;
            writeln!(out, "wrote {count} minimal pairs to {}", path.display())
                .map_err(|e| CliError::Input(e.to_string()))?;
        }
        Command::Eval {
            dataset,
            pred,
            predictor,
            report_out,
            emit_dimacs,
            k,
        } => {
            let dataset = load_dataset(dataset)?;
            let verdicts = classify_all(&dataset);
            let predictions = match (pred, predictor) {
                (Some(p), _) => load_predictions(p)?,
                (None, Some(PredictorArg::AllEntailment)) => all_entailment_predictor(&dataset),
                (None, Some(PredictorArg::Echo)) => echo_verdict_predictor(&verdicts),
                (None, None) => return Err(CliError::Input("either --pred or --predictor is required".into())),
            };
            if let Some(dir) = emit_dimacs {
                fs::create_dir_all(&dir)
                    .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
                for case in &dataset {
                    for (kind, cs) in query_clause_sets(case) {
                        write_file(&dir.join(format!("{}.{kind}.cnf", case.id)), &cs.to_dimacs())?;
                    }
                }
            }
            let report = evaluate_with(&dataset, verdicts, &predictions, k)?;
            let totals = (report.shift_matrix.total(), report.confusion.total());
            if totals != (dataset.len(), report.aggregates.matched_predictions) {
                return Err(CliError::Invariant(format!(
                    "matrix totals {totals:?} do not match inputs"
                )));
            }
            write_file(&report_out, &report.to_json())?;
            out.write_all(render_text(&report).as_bytes())
                .map_err(|e| CliError::Input(e.to_string()))?;
        }
        Command::Serve {
            dataset,
            log,
            port,
            host,
            static_dir,
        } => {
            let dataset = load_dataset(dataset)?;
            let service = Arc::new(ReviewService::open(dataset, &log)?);
            let app = server::router(service, static_dir);
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Input(e.to_string()))?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|e| CliError::Input(format!("cannot bind {addr}: {e}")))?;
                eprintln!(
                    "review service listening on http://{}",
                    listener.local_addr().unwrap_or(addr)
                );
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
                    .map_err(|e| CliError::Input(e.to_string()))
            })?;
        }
    }
    Ok(())
}
