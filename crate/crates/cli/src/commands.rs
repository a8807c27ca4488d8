use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use liftcode::alist::write_alist;
use liftcode::channel::{
    curve_to_csv, failure_spectrum, floor_estimate, simulate_curve, FloorEstimate, SimOptions,
    SimResult, EXACT_FER_MAX_VARS,
};
use liftcode::design::{construct_code, Trials};
use liftcode::expansion::{
    expansion_profile_with, satisfies, CriteriaConfig, ExpansionProfile, Verdict,
    DEFAULT_SEARCH_BUDGET,
};
use liftcode::graph::GraphDocument;
use liftcode::lift::DescriptionSize;
use liftcode::stopping::{
    enumerate_stopping_sets_with, EnumerationOptions, StoppingDistance, StoppingReport,
};
use liftcode::{Error, Girth, TannerGraph};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, CompareArgs, ConstructArgs, ExportArgs, ExportFormat, SimulateArgs, TableFormat,
};
use crate::config::*;
use crate::failure::{code, Failure};
use crate::input::{load_code, Loaded, Source};

/// Writes primary outputs to a file or stdout, and the run sidecar.
pub struct Output {
    path: Option<PathBuf>,
    started: SystemTime,
    clock: Instant,
    workers: Option<usize>,
}

impl Output {
    pub fn new(path: Option<PathBuf>, workers: Option<usize>) -> Self {
        Output {
            path,
            started: SystemTime::now(),
            clock: Instant::now(),
            workers,
        }
    }

    fn write(&self, body: &str) -> Result<(), Failure> {
        match &self.path {
            Some(p) => fs::write(p, body).map_err(|e| Failure::io(p, e)),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Failure::io(Path::new("<stdout>"), e))
            }
        }
    }

    fn json(&self, doc: &Value) -> Result<(), Failure> {
        self.write(&(serde_json::to_string_pretty(doc)? + "\n"))
    }

    /// Timing and environment go here, never into the primary output.
    fn sidecar<T: Serialize>(&self, resolved: &Resolved<T>) -> Result<(), Failure> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut name = path.clone().into_os_string();
        name.push(".run.json");
        let side = PathBuf::from(name);
        let started_ms = self
            .started
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64);
        let doc = json!({
            "command": resolved.command,
            "config_sha256": resolved.sha256(),
            "started_unix_ms": started_ms,
            "elapsed_ms": self.clock.elapsed().as_millis() as u64,
            "workers": self.workers,
            "output": path.display().to_string(),
        });
        fs::write(&side, serde_json::to_string_pretty(&doc)? + "\n")
            .map_err(|e| Failure::io(&side, e))
    }
}

fn echo<T: Serialize>(resolved: &Resolved<T>) {
    eprintln!("liftcode: resolved config {}", resolved.to_value());
}

fn with_provenance<T: Serialize>(
    doc: impl Serialize,
    resolved: &Resolved<T>,
    seed: Option<u64>,
) -> Result<Value, Failure> {
    let mut value = serde_json::to_value(doc)?;
    value["provenance"] = resolved.provenance(seed);
    Ok(value)
}

#[derive(Serialize)]
struct ConstructSettings {
    proto: Source,
    stages: usize,
    trials: Trials,
    seed: u64,
    criteria: CriteriaConfig,
}

pub fn construct(a: ConstructArgs, file: &FileConfig, out: Output) -> Result<u8, Failure> {
    let proto = load_code(&a.proto)?;
    let mut criteria = file.criteria(a.criteria.as_deref())?;
    criteria.require_proto |= a.require_proto;
    criteria.recheck_stages |= a.recheck_stages;
    let resolved = Resolved::new(
        "construct",
        ConstructSettings {
            proto: proto.source(&a.proto),
            stages: a.stages.or(file.stages).unwrap_or(DEFAULT_STAGES),
            trials: a.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            seed: a.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            criteria,
        },
    );
    echo(&resolved);
    let s = &resolved.settings;
    let art = construct_code(&proto.graph, s.stages, s.trials, &s.criteria, s.seed)?;
    if let Some(path) = &a.alist {
        let text = write_alist(&art.final_graph)?;
        fs::write(path, text).map_err(|e| Failure::io(path, e))?;
    }
    out.json(&with_provenance(&art, &resolved, Some(s.seed))?)?;
    out.sidecar(&resolved)?;
    Ok(0)
}

#[derive(Serialize)]
struct AnalyzeSettings {
    code: Source,
    max_weight: usize,
    budget: Option<u64>,
    criteria: Option<CriteriaConfig>,
    k_max: usize,
    eps: Vec<f64>,
}

#[derive(Serialize)]
struct ExactFer {
    epsilon: f64,
    fer: f64,
}

#[derive(Serialize)]
struct Analysis {
    format: &'static str,
    version: u32,
    num_vars: usize,
    num_checks: usize,
    num_edges: usize,
    var_degrees: Vec<usize>,
    check_degrees: Vec<usize>,
    parallel_edges: bool,
    girth: Girth,
    stopping_distance: Option<StoppingDistance>,
    stopping: StoppingReport,
    expansion: Option<ExpansionProfile>,
    verdict: Option<Verdict>,
    floor: Vec<FloorEstimate>,
    /// Present when the code is small enough for exhaustive evaluation.
    exact_fer: Option<Vec<ExactFer>>,
    description: Option<DescriptionSize>,
}

/// Stopping-set report, falling back to the partial report when the budget
/// runs out.
fn stopping_report(
    g: &TannerGraph,
    max_weight: usize,
    budget: Option<u64>,
) -> Result<(StoppingReport, bool), Failure> {
    let mut opts = EnumerationOptions::new(max_weight);
    opts.budget = budget;
    match enumerate_stopping_sets_with(g, &opts) {
        Ok(r) => Ok((r, true)),
        Err(Error::BudgetExceeded {
            partial: Some(r), ..
        }) => Ok((*r, false)),
        Err(e) => Err(e.into()),
    }
}

pub fn analyze(a: AnalyzeArgs, file: &FileConfig, out: Output) -> Result<u8, Failure> {
    let code = load_code(&a.code)?;
    let g = &code.graph;
    let criteria = match (&a.criteria, &file.criteria) {
        (None, None) => None,
        (flag, _) => Some(file.criteria(flag.as_deref())?),
    };
    let default_k = criteria
        .as_ref()
        .map_or(8.min(g.num_vars()), |c| c.effective_k_max(g));
    let resolved = Resolved::new(
        "analyze",
        AnalyzeSettings {
            code: code.source(&a.code),
            max_weight: a
                .max_weight
                .or(file.max_weight)
                .unwrap_or(DEFAULT_MAX_WEIGHT),
            budget: a.budget.or(file.budget).or(Some(DEFAULT_SEARCH_BUDGET)),
            k_max: a
                .k_max
                .or(file.k_max)
                .unwrap_or(default_k)
                .min(g.num_vars()),
            criteria,
            eps: if a.eps.is_empty() {
                file.eps.clone().unwrap_or_default()
            } else {
                a.eps
            },
        },
    );
    echo(&resolved);
    let s = &resolved.settings;

    let (stopping, complete) = stopping_report(g, s.max_weight, s.budget)?;
    let subset_budget = s
        .criteria
        .as_ref()
        .map_or(Some(liftcode::expansion::DEFAULT_SUBSET_BUDGET), |c| {
            c.subset_budget
        });
    let expansion = expansion_profile_with(g, s.k_max, subset_budget, None);
    let expansion_complete = expansion.is_ok();
    let spectrum = failure_spectrum(g, EXACT_FER_MAX_VARS).ok();
    let (var_degrees, check_degrees) = g.node_degrees();
    let analysis = Analysis {
        format: "analysis",
        version: 1,
        num_vars: g.num_vars(),
        num_checks: g.num_checks(),
        num_edges: g.num_edges(),
        var_degrees,
        check_degrees,
        parallel_edges: g.has_parallel_edges(),
        girth: g.girth(),
        stopping_distance: stopping.stopping_distance(),
        floor: s
            .eps
            .iter()
            .map(|&e| floor_estimate(&stopping, e))
            .collect(),
        stopping,
        expansion: expansion.ok(),
        verdict: s.criteria.as_ref().map(|c| satisfies(g, c)),
        exact_fer: spectrum.map(|sp| {
            s.eps
                .iter()
                .map(|&e| ExactFer {
                    epsilon: e,
                    fer: sp.fer(e),
                })
                .collect()
        }),
        description: code.spec.as_ref().map(|sp| sp.description_bits()),
    };
    out.json(&with_provenance(&analysis, &resolved, None)?)?;
    out.sidecar(&resolved)?;
    if complete && expansion_complete {
        Ok(0)
    } else {
        eprintln!("liftcode: work budget exceeded, report is partial");
        Ok(code::BUDGET)
    }
}

#[derive(Serialize)]
struct SimulateSettings {
    code: Source,
    eps: Vec<f64>,
    frames: u64,
    seed: u64,
    stop_after: Option<u64>,
}

fn csv_with_header<T: Serialize>(table: &str, resolved: &Resolved<T>, seed: u64) -> String {
    format!(
        "# liftcode {} seed={seed} config_sha256={}\n{table}",
        resolved.command,
        resolved.sha256()
    )
}

fn run_curve(g: &TannerGraph, s: &SimulateSettings) -> Result<Vec<SimResult>, Failure> {
    let opts = SimOptions {
        stop_after_errors: s.stop_after,
        workers: None,
    };
    Ok(simulate_curve(g, &s.eps, s.frames, s.seed, &opts)?)
}

pub fn simulate(a: SimulateArgs, file: &FileConfig, out: Output) -> Result<u8, Failure> {
    let code = load_code(&a.code)?;
    let resolved = Resolved::new(
        "simulate",
        SimulateSettings {
            code: code.source(&a.code),
            eps: file.eps(a.eps),
            frames: a.frames.or(file.frames).unwrap_or(DEFAULT_FRAMES),
            seed: a.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            stop_after: a.stop_after.or(file.stop_after),
        },
    );
    echo(&resolved);
    let s = &resolved.settings;
    let points = run_curve(&code.graph, s)?;
    match a.format.unwrap_or(TableFormat::Csv) {
        TableFormat::Csv => {
            out.write(&csv_with_header(&curve_to_csv(&points), &resolved, s.seed))?
        }
        TableFormat::Json => {
            let doc = json!({ "format": "simulation", "version": 1, "points": points });
            out.json(&with_provenance(doc, &resolved, Some(s.seed))?)?
        }
    }
    out.sidecar(&resolved)?;
    Ok(0)
}

#[derive(Serialize)]
struct CompareSettings {
    a: Source,
    b: Source,
    max_weight: usize,
    #[serde(flatten)]
    sim: SimulateSettings,
}

#[derive(Serialize)]
struct CodeSummary {
    num_vars: usize,
    num_checks: usize,
    num_edges: usize,
    girth: Girth,
    stopping_distance: Option<StoppingDistance>,
    exhaustive: bool,
    /// `[w, A_w]` pairs.
    counts: Vec<(usize, u64)>,
    description: Option<DescriptionSize>,
}

fn summarize(code: &Loaded, max_weight: usize) -> Result<(CodeSummary, bool), Failure> {
    let g = &code.graph;
    let (report, complete) = stopping_report(g, max_weight, Some(DEFAULT_SEARCH_BUDGET))?;
    Ok((
        CodeSummary {
            num_vars: g.num_vars(),
            num_checks: g.num_checks(),
            num_edges: g.num_edges(),
            girth: g.girth(),
            stopping_distance: report.stopping_distance(),
            exhaustive: report.exhaustive,
            counts: report.counts.iter().map(|(&w, &n)| (w, n)).collect(),
            description: code.spec.as_ref().map(|s| s.description_bits()),
        },
        complete,
    ))
}

pub fn compare(a: CompareArgs, file: &FileConfig, out: Output) -> Result<u8, Failure> {
    let (ca, cb) = (load_code(&a.a)?, load_code(&a.b)?);
    let resolved = Resolved::new(
        "compare",
        CompareSettings {
            a: ca.source(&a.a),
            b: cb.source(&a.b),
            max_weight: a
                .max_weight
                .or(file.max_weight)
                .unwrap_or(DEFAULT_MAX_WEIGHT),
            sim: SimulateSettings {
                code: ca.source(&a.a),
                eps: file.eps(a.eps),
                frames: a.frames.or(file.frames).unwrap_or(DEFAULT_FRAMES),
                seed: a.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
                stop_after: a.stop_after.or(file.stop_after),
            },
        },
    );
    echo(&resolved);
    let s = &resolved.settings;
    let curve_a = run_curve(&ca.graph, &s.sim)?;
    let curve_b = run_curve(&cb.graph, &s.sim)?;
    match a.format.unwrap_or(TableFormat::Json) {
        TableFormat::Csv => {
            let mut table = String::from("epsilon,fer_a,stderr_fer_a,fer_b,stderr_fer_b\n");
            for (x, y) in curve_a.iter().zip(&curve_b) {
                table.push_str(&format!(
                    "{},{},{},{},{}\n",
                    x.epsilon, x.fer, x.stderr_fer, y.fer, y.stderr_fer
                ));
            }
            out.write(&csv_with_header(&table, &resolved, s.sim.seed))?;
            out.sidecar(&resolved)?;
            Ok(0)
        }
        TableFormat::Json => {
            let (sa, ok_a) = summarize(&ca, s.max_weight)?;
            let (sb, ok_b) = summarize(&cb, s.max_weight)?;
            let curves: Vec<Value> = curve_a
                .iter()
                .zip(&curve_b)
                .map(|(x, y)| json!({ "epsilon": x.epsilon, "a": x, "b": y }))
                .collect();
            let doc = json!({
                "format": "comparison",
                "version": 1,
                "a": sa,
                "b": sb,
                "curves": curves,
            });
            out.json(&with_provenance(doc, &resolved, Some(s.sim.seed))?)?;
            out.sidecar(&resolved)?;
            Ok(if ok_a && ok_b { 0 } else { code::BUDGET })
        }
    }
}

#[derive(Serialize)]
struct ExportSettings {
    input: Source,
    format: &'static str,
}

pub fn export(a: ExportArgs, out: Output) -> Result<u8, Failure> {
    let code = load_code(&a.input)?;
    let resolved = Resolved::new(
        "export",
        ExportSettings {
            input: code.source(&a.input),
            format: match a.format {
                ExportFormat::Alist => "alist",
                ExportFormat::Json => "json",
            },
        },
    );
    echo(&resolved);
    match a.format {
        ExportFormat::Alist => out.write(&write_alist(&code.graph)?)?,
        ExportFormat::Json => {
            let doc = GraphDocument::from(code.graph.clone());
            out.json(&with_provenance(doc, &resolved, None)?)?
        }
    }
    out.sidecar(&resolved)?;
    Ok(0)
}
