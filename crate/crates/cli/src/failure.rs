use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::json;

/// Exit statuses. Usage errors keep clap's status 2.
pub mod code {
    pub const PARSE: u8 = 3;
    pub const REJECTED: u8 = 4;
    pub const BUDGET: u8 = 5;
    pub const IO: u8 = 6;
    pub const INVALID: u8 = 7;
}

#[derive(Debug)]
pub enum Failure {
    Core(liftcode::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Config {
        path: PathBuf,
        message: String,
    },
}

impl Failure {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Failure::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use liftcode::Error as E;
        match self {
            Failure::Core(E::ProtographRejected(_)) => "criteria_rejected",
            Failure::Core(E::BudgetExceeded { .. }) => "budget_exceeded",
            Failure::Core(E::InvalidArgument(_) | E::ParallelEdges { .. }) => "invalid",
            Failure::Core(_) | Failure::Config { .. } => "parse",
            Failure::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "criteria_rejected" => code::REJECTED,
            "budget_exceeded" => code::BUDGET,
            "invalid" => code::INVALID,
            "io" => code::IO,
            _ => code::PARSE,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut err = json!({
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let Failure::Core(liftcode::Error::ProtographRejected(v)) = self {
            err["verdict"] = serde_json::to_value(v).unwrap_or_default();
        }
        json!({ "error": err })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Failure::Config { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl From<liftcode::Error> for Failure {
    fn from(e: liftcode::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}
