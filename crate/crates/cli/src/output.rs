use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use netddm::analysis::AnalysisError;
use netddm::dynamics::DynamicsError;
use netddm::experiments::ExperimentError;
use netddm::graph::GraphError;
use netddm::pde::PdeError;
use netddm::simulate::SimError;
use netddm::thresholds::ThresholdError;
use serde_json::Value;

/// Failure classes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: arguments, config, files. Exit code 1.
    Validation(String),
    /// A numerical routine failed on valid input. Exit code 2.
    Numeric { op: &'static str, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric { .. } => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numeric { op, msg } => write!(f, "numeric failure in {op}: {msg}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Whether an error is a numerical failure rather than bad input.
pub trait Classify: fmt::Display {
    fn is_numeric(&self) -> bool;
}

impl Classify for GraphError {
    fn is_numeric(&self) -> bool {
        matches!(self, GraphError::EigenFailure | GraphError::GenerationFailure(_))
    }
}

impl Classify for AnalysisError {
    fn is_numeric(&self) -> bool {
        matches!(self, AnalysisError::DomainOverflow { .. })
    }
}

impl Classify for DynamicsError {
    fn is_numeric(&self) -> bool {
        matches!(self, DynamicsError::Graph(g) if g.is_numeric())
    }
}

impl Classify for PdeError {
    fn is_numeric(&self) -> bool {
        matches!(self, PdeError::SolverDivergence { .. })
    }
}

impl Classify for ThresholdError {
    fn is_numeric(&self) -> bool {
        matches!(self, ThresholdError::NoRoot(_))
    }
}

impl Classify for SimError {
    fn is_numeric(&self) -> bool {
        false
    }
}

impl Classify for ExperimentError {
    fn is_numeric(&self) -> bool {
        match self {
            ExperimentError::TooManyTimeouts { .. } | ExperimentError::DegenerateEr(_) => true,
            ExperimentError::InsufficientData(_) => true,
            ExperimentError::TooFewTrials(_) | ExperimentError::UnknownNode(_) | ExperimentError::Sim(_) => false,
            ExperimentError::Dynamics(e) => e.is_numeric(),
            ExperimentError::Graph(e) => e.is_numeric(),
            ExperimentError::Analysis(e) => e.is_numeric(),
            ExperimentError::Threshold(e) => e.is_numeric(),
            ExperimentError::Pde(e) => e.is_numeric(),
        }
    }
}

/// Attach the name of the failing operation to a library error.
pub trait Context<T> {
    fn op(self, op: &'static str) -> Result<T, CliError>;
}

impl<T, E: Classify> Context<T> for Result<T, E> {
    fn op(self, op: &'static str) -> Result<T, CliError> {
        self.map_err(|e| {
            if e.is_numeric() {
                CliError::Numeric { op, msg: e.to_string() }
            } else {
                CliError::Validation(format!("{op}: {e}"))
            }
        })
    }
}

/// Data goes to `--out` when given, stdout otherwise. Metadata goes to a
/// `<out>.json` sidecar, or to stderr when writing to stdout.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Sink { path }
    }

    pub fn write_data(&self, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
        match &self.path {
            Some(p) => {
                let file = File::create(p).map_err(|e| CliError::validation(format!("{}: {e}", p.display())))?;
                let mut w = BufWriter::new(file);
                f(&mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = BufWriter::new(stdout.lock());
                f(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }

    pub fn write_meta(&self, meta: &Value) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
        match &self.path {
            Some(p) => {
                let side = sidecar(p);
                std::fs::write(&side, text + "\n")
                    .map_err(|e| CliError::validation(format!("{}: {e}", side.display())))?;
            }
            None => eprintln!("{text}"),
        }
        Ok(())
    }
}

pub fn sidecar(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
