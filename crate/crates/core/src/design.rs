//! Guided lifting: sample candidate sign vectors at each stage, rank the
//! lifted graphs by the configured metrics and keep the best.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expansion::{expansion_profile_with, satisfies, CriteriaConfig, Metric, Verdict};
use crate::graph::{Girth, TannerGraph};
use crate::lift::{apply_2lift, apply_lift_spec, random_sign_vector, LiftSpec, SignVector};
use crate::seed;
use crate::stopping::{search_stopping_distance, DistanceSearch, StoppingDistance};

/// Largest edge count for which every sign vector can be enumerated.
pub const EXHAUSTIVE_MAX_EDGES: usize = 24;

/// Candidates per stage: `n` random draws, or every sign vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trials {
    Random(usize),
    Exhaustive,
}

impl fmt::Display for Trials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trials::Random(n) => write!(f, "{n}"),
            Trials::Exhaustive => f.write_str("all"),
        }
    }
}

impl FromStr for Trials {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Trials::Exhaustive);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Trials::Random(n)),
            _ => Err(Error::InvalidArgument(format!(
                "trials must be a positive integer or \"all\", got {s:?}"
            ))),
        }
    }
}

impl Serialize for Trials {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Trials::Random(n) => s.serialize_u64(*n as u64),
            Trials::Exhaustive => s.serialize_str("all"),
        }
    }
}

impl<'de> Deserialize<'de> for Trials {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(usize),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Count(n) if n >= 1 => Ok(Trials::Random(n)),
            Repr::Count(_) => Err(serde::de::Error::custom("trials must be at least 1")),
            Repr::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Stopping-distance component of a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingScore {
    /// Budget ran out after ruling out every weight below this one.
    AtLeast(usize),
    Exactly(usize),
    GreaterThan(usize),
}

impl StoppingScore {
    fn key(self) -> (usize, u8) {
        match self {
            StoppingScore::AtLeast(w) => (w, 0),
            StoppingScore::Exactly(w) => (w, 1),
            StoppingScore::GreaterThan(cap) => (cap + 1, 2),
        }
    }

    pub fn is_partial(self) -> bool {
        matches!(self, StoppingScore::AtLeast(_))
    }
}

impl Ord for StoppingScore {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for StoppingScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<StoppingDistance> for StoppingScore {
    fn from(d: StoppingDistance) -> Self {
        match d {
            StoppingDistance::Exactly(w) => StoppingScore::Exactly(w),
            StoppingDistance::GreaterThan(c) => StoppingScore::GreaterThan(c),
        }
    }
}

/// Metrics of one lifted candidate. Only metrics named in the priority list
/// are computed; the rest stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub stopping: Option<StoppingScore>,
    pub girth: Option<Girth>,
    /// Minimum `|N(S)| / |S|` over subsets up to the criteria's `k_max`;
    /// `None` when not requested or over budget.
    pub expansion: Option<f64>,
}

impl Score {
    /// Lexicographic comparison in `priority` order; larger is better.
    pub fn compare(&self, other: &Score, priority: &[Metric]) -> Ordering {
        for metric in priority {
            let ord = match metric {
                Metric::StoppingDistance => self.stopping.cmp(&other.stopping),
                Metric::Girth => self.girth.cmp(&other.girth),
                Metric::Expansion => match (self.expansion, other.expansion) {
                    (Some(a), Some(b)) => a.total_cmp(&b),
                    (a, b) => a.is_some().cmp(&b.is_some()),
                },
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

fn stopping_score(g: &TannerGraph, cfg: &CriteriaConfig) -> StoppingScore {
    match search_stopping_distance(g, cfg.stopping_cap, cfg.search_budget, None) {
        DistanceSearch::Done(found) => found.distance.into(),
        DistanceSearch::OutOfBudget { at_least, .. } => StoppingScore::AtLeast(at_least),
    }
}

/// Computes the metrics `cfg.priority` asks for.
pub fn score_graph(g: &TannerGraph, cfg: &CriteriaConfig) -> Score {
    let wants = |m| cfg.priority.contains(&m);
    Score {
        stopping: wants(Metric::StoppingDistance).then(|| stopping_score(g, cfg)),
        girth: wants(Metric::Girth).then(|| g.girth()),
        expansion: if wants(Metric::Expansion) {
            expansion_profile_with(g, cfg.effective_k_max(g), cfg.subset_budget, None)
                .ok()
                .map(|p| p.min_neighbor_ratio())
        } else {
            None
        },
    }
}

#[derive(Debug, Clone)]
pub struct GuidedLift {
    pub graph: TannerGraph,
    pub signs: SignVector,
    pub score: Score,
    pub candidates: u64,
}

fn candidate_signs(edges: usize, trials: Trials, stage_seed: u64, i: u64) -> SignVector {
    match trials {
        Trials::Random(_) => {
            let mut rng = seed::stream(stage_seed, &[seed::domain::LIFT_CANDIDATE, i]);
            random_sign_vector(edges, &mut rng)
        }
        Trials::Exhaustive => SignVector::from_index(edges, i),
    }
}

/// Best-of-`trials` 2-lift of `g`.
///
/// Random candidate `i` draws its signs from the stream `(stage_seed, i)`,
/// so the outcome is independent of scheduling and a run with more trials
/// sees a superset of the candidates of a run with fewer. Ties go to the
/// smallest sign vector.
pub fn guided_2lift(
    g: &TannerGraph,
    trials: Trials,
    cfg: &CriteriaConfig,
    stage_seed: u64,
) -> Result<GuidedLift> {
    let edges = g.num_edges();
    let count = match trials {
        Trials::Random(0) => {
            return Err(Error::InvalidArgument("trials must be at least 1".into()))
        }
        Trials::Random(n) => n as u64,
        Trials::Exhaustive if edges > EXHAUSTIVE_MAX_EDGES => {
            return Err(Error::InvalidArgument(format!(
                "exhaustive trials need at most {EXHAUSTIVE_MAX_EDGES} edges, graph has {edges}"
            )))
        }
        Trials::Exhaustive => 1u64 << edges,
    };

    let scored: Vec<(Score, SignVector)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let signs = candidate_signs(edges, trials, stage_seed, i);
            let lifted = apply_2lift(g, &signs).expect("candidate length matches edge count");
            (score_graph(&lifted, cfg), signs)
        })
        .collect();

    let (score, signs) = scored
        .into_iter()
        .reduce(|best, cand| match cand.0.compare(&best.0, &cfg.priority) {
            Ordering::Greater => cand,
            Ordering::Equal if cand.1 < best.1 => cand,
            _ => best,
        })
        .expect("at least one candidate");
    let graph = apply_2lift(g, &signs)?;
    Ok(GuidedLift {
        graph,
        signs,
        score,
        candidates: count,
    })
}

/// Metrics of the graph at one stage; stage 0 is the protograph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMetrics {
    pub stage: usize,
    pub num_vars: usize,
    pub num_checks: usize,
    pub num_edges: usize,
    pub girth: Girth,
    /// Stopping distance up to the criteria's cap.
    pub stopping: StoppingScore,
    /// Criteria verdict, for the protograph and, when re-checking is on,
    /// for every lifted stage.
    pub verdict: Option<Verdict>,
    /// Score of the selected candidate; `None` for the protograph.
    pub score: Option<Score>,
    pub candidates: u64,
}

impl StageMetrics {
    fn measure(
        stage: usize,
        g: &TannerGraph,
        cfg: &CriteriaConfig,
        verdict: Option<Verdict>,
        selected: Option<(&Score, u64)>,
    ) -> Self {
        StageMetrics {
            stage,
            num_vars: g.num_vars(),
            num_checks: g.num_checks(),
            num_edges: g.num_edges(),
            girth: g.girth(),
            stopping: stopping_score(g, cfg),
            verdict,
            score: selected.map(|(s, _)| s.clone()),
            candidates: selected.map_or(0, |(_, n)| n),
        }
    }

    pub fn is_partial(&self) -> bool {
        self.stopping.is_partial()
    }
}

pub const ARTIFACT_FORMAT: &str = "code-artifact";
pub const ARTIFACT_VERSION: u32 = 1;

/// A constructed code with everything needed to rebuild and audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeArtifact {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub trials: Trials,
    pub criteria: CriteriaConfig,
    pub spec: LiftSpec,
    pub final_graph: TannerGraph,
    /// One entry per stage, protograph first.
    pub metrics: Vec<StageMetrics>,
    /// Some metric hit its work budget.
    pub partial: bool,
}

impl CodeArtifact {
    /// Checks the format tag and that the lift spec rebuilds `final_graph`.
    pub fn verify(&self) -> Result<()> {
        if self.format != ARTIFACT_FORMAT || self.version != ARTIFACT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported artifact {:?} version {}",
                self.format, self.version
            )));
        }
        if apply_lift_spec(&self.spec)? != self.final_graph {
            return Err(Error::Parse(
                "artifact lift spec does not reproduce its final graph".into(),
            ));
        }
        Ok(())
    }
}

/// Builds a code by `n_stages` guided 2-lifts of `proto`.
///
/// Stage `s` draws its candidates under the seed derived from `(seed, s)`.
pub fn construct_code(
    proto: &TannerGraph,
    n_stages: usize,
    trials: Trials,
    cfg: &CriteriaConfig,
    seed: u64,
) -> Result<CodeArtifact> {
    cfg.validate()?;
    let proto_verdict = satisfies(proto, cfg);
    if cfg.require_proto && !proto_verdict.pass {
        return Err(Error::ProtographRejected(Box::new(proto_verdict)));
    }

    let mut metrics = vec![StageMetrics::measure(
        0,
        proto,
        cfg,
        Some(proto_verdict),
        None,
    )];
    let mut stages = Vec::with_capacity(n_stages);
    let mut current = proto.clone();
    for stage in 0..n_stages {
        let stage_seed = seed::derive(seed, &[stage as u64]);
        let lifted = guided_2lift(&current, trials, cfg, stage_seed)?;
        let verdict = cfg.recheck_stages.then(|| satisfies(&lifted.graph, cfg));
        metrics.push(StageMetrics::measure(
            stage + 1,
            &lifted.graph,
            cfg,
            verdict,
            Some((&lifted.score, lifted.candidates)),
        ));
        stages.push(lifted.signs);
        current = lifted.graph;
    }

    let partial = metrics.iter().any(StageMetrics::is_partial);
    Ok(CodeArtifact {
        format: ARTIFACT_FORMAT.into(),
        version: ARTIFACT_VERSION,
        seed,
        trials,
        criteria: cfg.clone(),
        spec: LiftSpec::new(proto.clone(), stages, Some(seed))?,
        final_graph: current,
        metrics,
        partial,
    })
}
