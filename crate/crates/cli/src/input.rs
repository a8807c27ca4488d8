//! Loading codes and configuration files, with format sniffing.

use std::fs;
use std::path::Path;

use liftcode::alist::read_alist;
use liftcode::design::{CodeArtifact, ARTIFACT_FORMAT};
use liftcode::expansion::CriteriaConfig;
use liftcode::lift::{apply_lift_spec, LiftSpec};
use liftcode::{Error, TannerGraph};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// A code read from disk.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub graph: TannerGraph,
    pub spec: Option<LiftSpec>,
    pub kind: &'static str,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Source {
    pub path: String,
    pub kind: &'static str,
    pub sha256: String,
}

impl Loaded {
    pub fn source(&self, path: &Path) -> Source {
        Source {
            path: path.display().to_string(),
            kind: self.kind,
            sha256: self.sha256.clone(),
        }
    }
}

/// Reads a code artifact, lift spec, graph document, multiplicity matrix
/// (JSON array of rows) or alist file.
pub fn load_code(path: &Path) -> Result<Loaded, Failure> {
    let text = read_text(path)?;
    let sha256 = sha256_hex(text.as_bytes());
    let parsed = parse_code(&text).map_err(|e| match e {
        Error::Json(j) => Failure::Core(Error::Parse(format!("{}: {j}", path.display()))),
        other => Failure::Core(other),
    })?;
    let (graph, spec, kind) = parsed;
    Ok(Loaded {
        graph,
        spec,
        kind,
        sha256,
    })
}

fn parse_code(text: &str) -> liftcode::Result<(TannerGraph, Option<LiftSpec>, &'static str)> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let m: Vec<Vec<i64>> = serde_json::from_str(text)?;
        return Ok((TannerGraph::from_multiplicity_matrix(&m)?, None, "matrix"));
    }
    if !trimmed.starts_with('{') {
        return Ok((read_alist(text)?, None, "alist"));
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(ARTIFACT_FORMAT) => {
            let art: CodeArtifact = serde_json::from_value(value)?;
            art.verify()?;
            Ok((art.final_graph, Some(art.spec), "code-artifact"))
        }
        Some("lift-spec") => {
            let spec: LiftSpec = serde_json::from_value(value)?;
            Ok((apply_lift_spec(&spec)?, Some(spec), "lift-spec"))
        }
        Some("tanner-graph") => Ok((serde_json::from_value(value)?, None, "tanner-graph")),
        other => Err(Error::Parse(format!(
            "unrecognized document format {other:?}"
        ))),
    }
}

/// Parses a TOML file, or JSON when the content starts with `{`.
pub fn load_structured<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    let parsed = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|message| Failure::Config {
        path: path.to_path_buf(),
        message,
    })
}

pub fn load_criteria(path: &Path) -> Result<CriteriaConfig, Failure> {
    let cfg: CriteriaConfig = load_structured(path)?;
    cfg.validate()?;
    Ok(cfg)
}
