use thiserror::Error;

/// Errors raised by the closed-form model, the fitter and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid {what}: {value} ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("rate {rate} bit/s exceeds the {protocol} link maximum of {max_rate} bit/s")]
    Capability {
        protocol: String,
        rate: f64,
        max_rate: f64,
    },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("no knee: slope {slope} is not negative, so the line never meets the plateau")]
    NoKnee { slope: f64 },
    #[error("configuration has no battery")]
    MissingBattery,
    #[error("configurations do not share a battery")]
    BatteryMismatch,
    #[error("simulation parameter error: {0}")]
    SimParameter(String),
}

impl ModelError {
    pub(crate) fn domain(what: &'static str, value: f64, reason: &'static str) -> Self {
        ModelError::Domain { what, value, reason }
    }
}

/// A failure while reading one of the CSV inputs (benchmark survey, harvest profile).
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: {message}")]
    Field {
        row: usize,
        column: String,
        message: String,
    },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IngestError {
    /// 1-based data row number (header excluded) when the error is tied to a row.
    pub fn row(&self) -> Option<usize> {
        match self {
            IngestError::Field { row, .. } | IngestError::Row { row, .. } => Some(*row),
            _ => None,
        }
    }
}

/// Node configuration document errors.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: ModelError,
    },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
