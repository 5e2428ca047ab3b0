use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use qsa_core::QsaError;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(QsaError),
    Io { path: String, message: String },
    Json { path: String, message: String },
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(QsaError::Resource { .. }) => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                QsaError::Dimension(..) => "dimension",
                QsaError::Parse { .. } => "parse",
                QsaError::InvalidSpec(_) => "invalid_spec",
                QsaError::NonHermitian(_) => "non_hermitian",
                QsaError::NotInvolution(_) => "not_involution",
                QsaError::ConnectorMismatch { .. } => "connector_mismatch",
                QsaError::InvalidSchedule(_) => "invalid_schedule",
                QsaError::Infeasible(_) => "infeasible",
                QsaError::Unsupported(_) => "unsupported",
                QsaError::Domain(_) => "domain",
                QsaError::Resource { .. } => "resource",
                QsaError::Topology(_) => "topology",
                QsaError::Encoding(_) => "encoding",
            },
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
            CliError::Usage(_) => "usage",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
            CliError::Json { path, message } => write!(f, "{path}: malformed JSON: {message}"),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<QsaError> for CliError {
    fn from(e: QsaError) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

/// Collects file contents and scalar inputs into one digest, and the checks
/// and metrics of a run.
pub struct Recorder {
    hasher: Sha256,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
}

impl Recorder {
    pub fn new(args: &[String]) -> Self {
        let mut hasher = Sha256::new();
        for a in args {
            hasher.update(a.as_bytes());
            hasher.update([0u8]);
        }
        Recorder {
            hasher,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> CliResult<T> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Json {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// `value ≤ tolerance`.
    pub fn bound(&mut self, name: &str, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            pass: value <= tolerance,
            value: Some(value),
            tolerance: Some(tolerance),
            detail: None,
        });
    }

    pub fn flag(&mut self, name: &str, pass: bool, detail: Option<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            value: None,
            tolerance: None,
            detail,
        });
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(key.to_string(), v);
    }

    pub fn finish(self, command: Vec<String>, seed: u64, error: Option<&CliError>) -> RunReport {
        let pass = error.is_none() && self.checks.iter().all(|c| c.pass);
        RunReport {
            command,
            inputs_digest: hex::encode(self.hasher.finalize()),
            seed,
            pass,
            checks: self.checks,
            metrics: self.metrics,
            error: error.map(|e| ErrorInfo {
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(path, text + "\n").map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
