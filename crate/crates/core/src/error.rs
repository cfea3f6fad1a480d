use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no atoms")]
    NoAtoms,

    #[error("unknown element symbol '{0}'")]
    UnknownElement(String),

    #[error("missing element {0} in basis set")]
    MissingElement(String),

    #[error("unsupported angular momentum l={l} for element {element}: only s and p shells are supported")]
    UnsupportedShell { element: String, l: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("SCF did not converge after {iterations} iterations (last dE = {last_delta_e:.3e}, last max|dP| = {last_delta_p:.3e}, E = {last_energy:.10})")]
    ScfNotConverged {
        iterations: usize,
        last_energy: f64,
        last_delta_e: f64,
        last_delta_p: f64,
    },

    #[error("Boys localization did not converge in {sweeps} sweeps (functional trajectory tail: {trajectory:?})")]
    LocalizationNotConverged { sweeps: usize, trajectory: Vec<f64> },

    #[error("vanishing MP2 denominator {denominator:.3e} for (i={i}, j={j}, a={a}, b={b})")]
    VanishingDenominator {
        i: usize,
        j: usize,
        a: usize,
        b: usize,
        denominator: f64,
    },

    #[error("empty selection: no orbital passed the thresholds (try lowering the variation threshold)")]
    EmptySelection,

    #[error("orbital {0} is already frozen")]
    AlreadyFrozen(usize),

    #[error("determinant space of dimension {dim} exceeds the dense limit {limit}; use the Davidson full-CI solver")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("Davidson did not converge after {iterations} iterations (residual {residual:.3e})")]
    DavidsonNotConverged { iterations: usize, residual: f64 },

    #[error("too many qubits ({qubits}) for the dense path (limit {limit})")]
    TooManyQubits { qubits: usize, limit: usize },

    #[error("ambiguous orbital-to-monomer assignment for orbital {orbital}: best overlap {best:.3}")]
    AmbiguousAssignment { orbital: usize, best: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing run: {0}")]
    MissingRun(String),

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the pipeline stage that produced it.
    pub fn at(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Configuration-class errors map to a distinct CLI exit code.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::NoAtoms
            | Error::UnknownElement(_)
            | Error::MissingElement(_)
            | Error::UnsupportedShell { .. }
            | Error::Io(_) => true,
            Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
