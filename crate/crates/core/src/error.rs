use thiserror::Error;

use crate::expansion::Verdict;
use crate::stopping::StoppingReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid {kind} node {id} (graph has {limit})")]
    InvalidNode {
        kind: &'static str,
        id: usize,
        limit: usize,
    },

    #[error("sign vector has length {got}, expected {expected}{}", stage_suffix(*.stage))]
    SignLengthMismatch {
        expected: usize,
        got: usize,
        stage: Option<usize>,
    },

    /// Work limit hit during an exhaustive search. `partial` carries the
    /// stopping-set report accumulated so far, when the search produces one.
    #[error("work budget exceeded: {what} (limit {limit})")]
    BudgetExceeded {
        what: &'static str,
        limit: u64,
        partial: Option<Box<StoppingReport>>,
    },

    #[error("graph has parallel edges between check {check} and variable {var}, which alist cannot represent")]
    ParallelEdges { check: usize, var: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("protograph rejected by design criteria: {}", .0.summary())]
    ProtographRejected(Box<Verdict>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn stage_suffix(stage: Option<usize>) -> String {
    match stage {
        Some(s) => format!(" at stage {s}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn budget(what: &'static str, limit: u64) -> Self {
        Error::BudgetExceeded {
            what,
            limit,
            partial: None,
        }
    }
}
