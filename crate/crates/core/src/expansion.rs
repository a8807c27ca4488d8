//! Subset expansion of variable nodes and the configurable design criteria.
//!
//! For every subset size `k` the profile records the minimum number of
//! distinct check neighbours `|N(S)|` and the minimum number of incident
//! edges `e(S)` (with multiplicity) over all `k`-subsets `S`, with the
//! lexicographically first subset attaining each minimum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Girth, TannerGraph};
use crate::parallel::with_workers;
use crate::stopping::{stopping_distance_with, StoppingDistance};

/// Subsets examined by default before an expansion profile gives up.
pub const DEFAULT_SUBSET_BUDGET: u64 = 20_000_000;
/// Search nodes allowed by default for a stopping-distance criterion.
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionLevel {
    pub k: usize,
    pub min_neighbors: usize,
    pub neighbor_witness: Vec<usize>,
    pub min_edges: usize,
    pub edge_witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionProfile {
    pub k_max: usize,
    /// One entry per `k` in `1..=k_max`.
    pub levels: Vec<ExpansionLevel>,
}

impl ExpansionProfile {
    pub fn level(&self, k: usize) -> Option<&ExpansionLevel> {
        self.levels.get(k.checked_sub(1)?)
    }

    /// `min_k min|N(S)| / k`; infinite for an empty profile.
    pub fn min_neighbor_ratio(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| l.min_neighbors as f64 / l.k as f64)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Number of distinct check neighbours of `set`.
pub fn neighbor_count(g: &TannerGraph, set: &[usize]) -> usize {
    let mut seen = vec![false; g.num_checks()];
    let mut n = 0;
    for &v in set {
        for &e in g.var_edges(v) {
            let c = g.edges()[e].1;
            if !seen[c] {
                seen[c] = true;
                n += 1;
            }
        }
    }
    n
}

/// Exact profile with the default subset budget.
pub fn expansion_profile(g: &TannerGraph, k_max: usize) -> Result<ExpansionProfile> {
    expansion_profile_with(g, k_max, Some(DEFAULT_SUBSET_BUDGET), None)
}

pub fn expansion_profile_with(
    g: &TannerGraph,
    k_max: usize,
    budget: Option<u64>,
    workers: Option<usize>,
) -> Result<ExpansionProfile> {
    let n = g.num_vars();
    if k_max > n {
        return Err(Error::InvalidArgument(format!(
            "subset size bound {k_max} exceeds {n} variables"
        )));
    }
    if let Some(limit) = budget {
        if subsets_up_to(n, k_max) > limit {
            return Err(Error::budget("expansion profile", limit));
        }
    }

    let words = g.num_checks().div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = (0..n)
        .map(|v| {
            let mut m = vec![0u64; words];
            for &e in g.var_edges(v) {
                let c = g.edges()[e].1;
                m[c / 64] |= 1 << (c % 64);
            }
            m
        })
        .collect();
    let (degrees, _) = g.node_degrees();

    let per_first: Vec<Vec<Best>> = with_workers(workers, || {
        (0..n)
            .into_par_iter()
            .map(|first| {
                let mut walk = SubsetWalk {
                    masks: &masks,
                    degrees: &degrees,
                    k_max,
                    best: vec![Best::default(); k_max],
                    members: Vec::with_capacity(k_max),
                    unions: Vec::with_capacity(k_max),
                    edges: Vec::with_capacity(k_max),
                };
                walk.push(first, None);
                walk.descend(first);
                walk.best
            })
            .collect()
    });

    let mut best = vec![Best::default(); k_max];
    for part in per_first {
        for (acc, cand) in best.iter_mut().zip(part) {
            acc.merge(cand);
        }
    }
    let levels = best
        .into_iter()
        .enumerate()
        .map(|(i, b)| ExpansionLevel {
            k: i + 1,
            min_neighbors: b.neighbors.0,
            neighbor_witness: b.neighbors.1,
            min_edges: b.edges.0,
            edge_witness: b.edges.1,
        })
        .collect();
    Ok(ExpansionProfile { k_max, levels })
}

fn subsets_up_to(n: usize, k_max: usize) -> u64 {
    let mut total = 0u64;
    let mut binom = 1u64;
    for k in 1..=k_max as u64 {
        binom = binom.saturating_mul(n as u64 - k + 1) / k;
        total = total.saturating_add(binom);
    }
    total
}

#[derive(Debug, Clone)]
struct Best {
    neighbors: (usize, Vec<usize>),
    edges: (usize, Vec<usize>),
}

impl Default for Best {
    fn default() -> Self {
        Best {
            neighbors: (usize::MAX, Vec::new()),
            edges: (usize::MAX, Vec::new()),
        }
    }
}

impl Best {
    /// Keeps the earlier candidate on ties; callers feed candidates in
    /// lexicographic order.
    fn merge(&mut self, other: Best) {
        if other.neighbors.0 < self.neighbors.0 {
            self.neighbors = other.neighbors;
        }
        if other.edges.0 < self.edges.0 {
            self.edges = other.edges;
        }
    }
}

/// Depth-first walk over increasing index sequences; visits the subsets of
/// each size in lexicographic order.
struct SubsetWalk<'a> {
    masks: &'a [Vec<u64>],
    degrees: &'a [usize],
    k_max: usize,
    best: Vec<Best>,
    members: Vec<usize>,
    unions: Vec<Vec<u64>>,
    edges: Vec<usize>,
}

impl SubsetWalk<'_> {
    fn push(&mut self, v: usize, prev: Option<(&[u64], usize)>) {
        let mut union = self.masks[v].clone();
        let mut edges = self.degrees[v];
        if let Some((mask, e)) = prev {
            for (u, m) in union.iter_mut().zip(mask) {
                *u |= m;
            }
            edges += e;
        }
        let neighbors = union.iter().map(|w| w.count_ones() as usize).sum();
        let slot = &mut self.best[self.members.len()];
        self.members.push(v);
        if neighbors < slot.neighbors.0 {
            slot.neighbors = (neighbors, self.members.clone());
        }
        if edges < slot.edges.0 {
            slot.edges = (edges, self.members.clone());
        }
        self.unions.push(union);
        self.edges.push(edges);
    }

    fn pop(&mut self) {
        self.members.pop();
        self.unions.pop();
        self.edges.pop();
    }

    fn descend(&mut self, last: usize) {
        if self.members.len() == self.k_max {
            return;
        }
        for v in last + 1..self.masks.len() {
            let union = self.unions.last().unwrap().clone();
            let edges = *self.edges.last().unwrap();
            self.push(v, Some((&union, edges)));
            self.descend(v);
            self.pop();
        }
    }
}

/// Quantities a lift candidate can be ranked by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    StoppingDistance,
    Girth,
    Expansion,
}

/// Declarative design criteria. Disabled criteria are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriteriaConfig {
    /// Largest subset size checked for expansion; `None` means
    /// `min(8, num_vars)`.
    pub k_max: Option<usize>,
    /// Required `|N(S)| >= neighbor_ratio * |S|`.
    pub neighbor_ratio: Option<f64>,
    pub girth_floor: Option<usize>,
    pub stopping_floor: Option<usize>,
    /// Weight bound for stopping-distance searches.
    pub stopping_cap: usize,
    /// Lexicographic ranking order used by guided lifting.
    #[serde(alias = "weights")]
    pub priority: Vec<Metric>,
    /// Refuse to build from a protograph that fails the criteria.
    pub require_proto: bool,
    /// Evaluate the criteria again on every lifted stage.
    pub recheck_stages: bool,
    pub subset_budget: Option<u64>,
    pub search_budget: Option<u64>,
}

impl Default for CriteriaConfig {
    fn default() -> Self {
        CriteriaConfig {
            k_max: None,
            neighbor_ratio: Some(1.0),
            girth_floor: Some(6),
            stopping_floor: None,
            stopping_cap: 8,
            priority: vec![Metric::StoppingDistance, Metric::Girth, Metric::Expansion],
            require_proto: false,
            recheck_stages: false,
            subset_budget: Some(DEFAULT_SUBSET_BUDGET),
            search_budget: Some(DEFAULT_SEARCH_BUDGET),
        }
    }
}

impl CriteriaConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(alpha) = self.neighbor_ratio {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "neighbor_ratio must be positive and finite, got {alpha}"
                )));
            }
        }
        if self.k_max == Some(0) {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        if self.stopping_cap == 0 {
            return Err(Error::InvalidArgument(
                "stopping_cap must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn effective_k_max(&self, g: &TannerGraph) -> usize {
        self.k_max.unwrap_or(8).min(g.num_vars())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The work budget ran out before the criterion could be decided.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub status: Status,
    pub neighbor_ratio: f64,
    pub k_max: usize,
    /// First subset size at which the bound fails.
    pub failing_k: Option<usize>,
    pub witness: Option<Vec<usize>>,
    pub profile: Option<ExpansionProfile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GirthCheck {
    pub status: Status,
    pub floor: usize,
    pub girth: Girth,
    /// Variables on a shortest cycle when the floor is violated.
    pub witness: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingCheck {
    pub status: Status,
    pub floor: usize,
    pub distance: Option<StoppingDistance>,
    /// A stopping set below the floor when it is violated.
    pub witness: Option<Vec<usize>>,
}

/// Per-criterion outcome of [`satisfies`]. Disabled criteria are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub expansion: Option<ExpansionCheck>,
    pub girth: Option<GirthCheck>,
    pub stopping: Option<StoppingCheck>,
}

impl Verdict {
    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if let Some(x) = &self.expansion {
            if x.status != Status::Pass {
                parts.push(format!(
                    "expansion {:?} at k={:?} (witness {:?})",
                    x.status, x.failing_k, x.witness
                ));
            }
        }
        if let Some(x) = &self.girth {
            if x.status != Status::Pass {
                parts.push(format!("girth {} below floor {}", x.girth, x.floor));
            }
        }
        if let Some(x) = &self.stopping {
            if x.status != Status::Pass {
                let d = x.distance.map_or("unknown".to_string(), |d| d.to_string());
                parts.push(format!("stopping distance {d} below floor {}", x.floor));
            }
        }
        if parts.is_empty() {
            "all criteria pass".into()
        } else {
            parts.join("; ")
        }
    }
}

/// Evaluates every enabled criterion of `cfg` on `g`.
pub fn satisfies(g: &TannerGraph, cfg: &CriteriaConfig) -> Verdict {
    let expansion = cfg
        .neighbor_ratio
        .map(|alpha| check_expansion(g, cfg, alpha));
    let girth = cfg.girth_floor.map(|floor| {
        let girth = g.girth();
        let ok = girth >= Girth::Finite(floor);
        GirthCheck {
            status: if ok { Status::Pass } else { Status::Fail },
            floor,
            girth,
            witness: if ok { None } else { g.shortest_cycle_vars() },
        }
    });
    let stopping = cfg.stopping_floor.map(|floor| {
        // Search far enough to decide `distance >= floor` exactly.
        let cap = cfg.stopping_cap.max(floor.saturating_sub(1)).max(1);
        match stopping_distance_with(g, cap, cfg.search_budget, None) {
            Ok(found) => {
                let ok = match found.distance {
                    StoppingDistance::Exactly(w) => w >= floor,
                    StoppingDistance::GreaterThan(_) => true,
                };
                StoppingCheck {
                    status: if ok { Status::Pass } else { Status::Fail },
                    floor,
                    distance: Some(found.distance),
                    witness: if ok { None } else { found.witness },
                }
            }
            Err(_) => StoppingCheck {
                status: Status::Undetermined,
                floor,
                distance: None,
                witness: None,
            },
        }
    });
    let pass = expansion.as_ref().is_none_or(|x| x.status == Status::Pass)
        && girth.as_ref().is_none_or(|x| x.status == Status::Pass)
        && stopping.as_ref().is_none_or(|x| x.status == Status::Pass);
    Verdict {
        pass,
        expansion,
        girth,
        stopping,
    }
}

fn check_expansion(g: &TannerGraph, cfg: &CriteriaConfig, alpha: f64) -> ExpansionCheck {
    let k_max = cfg.effective_k_max(g);
    match expansion_profile_with(g, k_max, cfg.subset_budget, None) {
        Ok(profile) => {
            let failing = profile
                .levels
                .iter()
                .find(|l| (l.min_neighbors as f64) < alpha * l.k as f64);
            ExpansionCheck {
                status: if failing.is_some() {
                    Status::Fail
                } else {
                    Status::Pass
                },
                neighbor_ratio: alpha,
                k_max,
                failing_k: failing.map(|l| l.k),
                witness: failing.map(|l| l.neighbor_witness.clone()),
                profile: Some(profile),
            }
        }
        Err(_) => ExpansionCheck {
            status: Status::Undetermined,
            neighbor_ratio: alpha,
            k_max,
            failing_k: None,
            witness: None,
            profile: None,
        },
    }
}
