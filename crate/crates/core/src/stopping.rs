//! Stopping sets: membership test, exact low-weight enumeration and
//! stopping distance.
//!
//! A set `S` of variable nodes is a stopping set when no check node has
//! exactly one edge into `S`. Parallel edges count separately, so a check
//! joined to a single member of `S` by two edges is satisfied.
//!
//! The enumerator visits every stopping set exactly once. Sets are grouped by
//! their smallest member (the root). Below a root the search keeps a partial
//! set `S` and a list of excluded variables:
//!
//! - if some check has exactly one edge into `S`, any stopping superset must
//!   add another neighbour of that check, so the search branches over those
//!   neighbours, excluding earlier siblings from later branches;
//! - otherwise `S` itself is recorded and the search branches over every
//!   remaining variable the same way.
//!
//! Roots are independent and may run on several threads; their results are
//! merged in root order.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::gf2_nullspace;
use crate::graph::TannerGraph;
use crate::parallel::with_workers;
use crate::seed;

/// Weight of the smallest nonempty stopping set, or a lower bound on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingDistance {
    Exactly(usize),
    /// No nonempty stopping set of weight at most the stored cap exists.
    GreaterThan(usize),
}

impl std::fmt::Display for StoppingDistance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StoppingDistance::Exactly(w) => write!(f, "{w}"),
            StoppingDistance::GreaterThan(cap) => write!(f, ">{cap}"),
        }
    }
}

/// Low-weight stopping-set distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingReport {
    pub max_weight: usize,
    /// True when every weight up to `max_weight` was searched completely.
    pub exhaustive: bool,
    /// `A_w` for `w = 0..=max_weight`. `A_0 = 1` counts the empty set.
    #[serde(with = "weight_pairs")]
    pub counts: BTreeMap<usize, u64>,
    /// Nonempty stopping sets up to the witness weight cap, sorted by weight
    /// and then lexicographically, truncated to the witness limit.
    pub witnesses: Vec<Vec<usize>>,
    /// Search nodes expanded.
    pub budget_used: u64,
}

impl StoppingReport {
    pub fn count(&self, weight: usize) -> u64 {
        self.counts.get(&weight).copied().unwrap_or(0)
    }

    /// Smallest `w >= 1` with `A_w > 0`, if any was found.
    pub fn min_nonempty_weight(&self) -> Option<usize> {
        self.counts
            .iter()
            .find(|&(&w, &a)| w > 0 && a > 0)
            .map(|(&w, _)| w)
    }

    /// Stopping distance implied by the report, when it is exhaustive.
    pub fn stopping_distance(&self) -> Option<StoppingDistance> {
        match self.min_nonempty_weight() {
            Some(w) => Some(StoppingDistance::Exactly(w)),
            None if self.exhaustive => Some(StoppingDistance::GreaterThan(self.max_weight)),
            None => None,
        }
    }
}

mod weight_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, u64>, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(usize, u64)> = map.iter().map(|(&w, &a)| (w, a)).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, u64>, D::Error> {
        let pairs: Vec<(usize, u64)> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().collect())
    }
}

/// Knobs for [`enumerate_stopping_sets_with`].
#[derive(Debug, Clone)]
pub struct EnumerationOptions {
    pub max_weight: usize,
    /// Limit on expanded search nodes; `None` for unbounded.
    pub budget: Option<u64>,
    pub witness_max_weight: usize,
    pub witness_limit: usize,
    pub workers: Option<usize>,
}

impl EnumerationOptions {
    pub fn new(max_weight: usize) -> Self {
        EnumerationOptions {
            max_weight,
            budget: None,
            witness_max_weight: 8,
            witness_limit: 10_000,
            workers: None,
        }
    }
}

/// True iff every check with an edge into `set` has at least two.
pub fn is_stopping_set(g: &TannerGraph, set: &[usize]) -> Result<bool> {
    let mut member = vec![false; g.num_vars()];
    for &v in set {
        if v >= g.num_vars() {
            return Err(Error::InvalidNode {
                kind: "variable",
                id: v,
                limit: g.num_vars(),
            });
        }
        member[v] = true;
    }
    let mut count = vec![0usize; g.num_checks()];
    for (v, _) in member.iter().enumerate().filter(|(_, &m)| m) {
        for &e in g.var_edges(v) {
            count[g.edges()[e].1] += 1;
        }
    }
    Ok(count.iter().all(|&n| n != 1))
}

/// Exact `A_w` for `w <= max_weight`, unbounded work.
pub fn enumerate_stopping_sets(g: &TannerGraph, max_weight: usize) -> StoppingReport {
    enumerate_stopping_sets_with(g, &EnumerationOptions::new(max_weight))
        .expect("unbounded enumeration cannot exceed its budget")
}

/// Exact enumeration with a work budget. On budget exhaustion the error
/// carries the partial report (roots searched completely, in order).
pub fn enumerate_stopping_sets_with(
    g: &TannerGraph,
    opts: &EnumerationOptions,
) -> Result<StoppingReport> {
    let adjacency = Adjacency::new(g);
    let weight_cap = opts.max_weight.min(g.num_vars());
    let limit = opts.budget.unwrap_or(u64::MAX);

    let per_root: Vec<RootCount> = with_workers(opts.workers, || {
        (0..g.num_vars())
            .into_par_iter()
            .map(|root| {
                let mut sink = CountSink::new(weight_cap, opts);
                let mut search = Search::new(&adjacency, root, weight_cap, limit);
                let complete = search.run(&mut sink).is_ok();
                sink.finish();
                RootCount {
                    counts: sink.counts,
                    witnesses: sink.witnesses,
                    nodes: search.nodes,
                    complete,
                }
            })
            .collect()
    });

    let mut counts = vec![0u64; weight_cap + 1];
    counts[0] = 1;
    let mut witnesses = Vec::new();
    let mut used = 0u64;
    let mut exhaustive = true;
    for root in per_root {
        if !root.complete || used.saturating_add(root.nodes) > limit {
            exhaustive = false;
            break;
        }
        used += root.nodes;
        for (w, a) in root.counts.iter().enumerate() {
            counts[w] += a;
        }
        witnesses.extend(root.witnesses);
    }
    witnesses.sort_by(canonical_order);
    witnesses.truncate(opts.witness_limit);

    let report = StoppingReport {
        max_weight: opts.max_weight,
        exhaustive,
        counts: (0..=opts.max_weight)
            .map(|w| (w, counts.get(w).copied().unwrap_or(0)))
            .collect(),
        witnesses,
        budget_used: used,
    };
    if exhaustive {
        Ok(report)
    } else {
        Err(Error::BudgetExceeded {
            what: "stopping-set enumeration",
            limit,
            partial: Some(Box::new(report)),
        })
    }
}

fn canonical_order(a: &Vec<usize>, b: &Vec<usize>) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Result of a stopping-distance search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceResult {
    pub distance: StoppingDistance,
    /// A stopping set of weight `distance`, when one exists within the cap.
    pub witness: Option<Vec<usize>>,
    pub nodes: u64,
}

/// Stopping distance up to `cap` with no work limit.
pub fn stopping_distance(g: &TannerGraph, cap: usize) -> StoppingDistance {
    stopping_distance_with(g, cap, None, None)
        .expect("unbounded search cannot exceed its budget")
        .distance
}

/// Iterative deepening over the weight bound. The witness is the first set
/// found at the minimal weight, searching roots in increasing order.
pub fn stopping_distance_with(
    g: &TannerGraph,
    cap: usize,
    budget: Option<u64>,
    workers: Option<usize>,
) -> Result<DistanceResult> {
    match search_stopping_distance(g, cap, budget, workers) {
        DistanceSearch::Done(found) => Ok(found),
        DistanceSearch::OutOfBudget { .. } => Err(Error::budget(
            "stopping-distance search",
            budget.unwrap_or(u64::MAX),
        )),
    }
}

/// Outcome of a budgeted stopping-distance search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistanceSearch {
    Done(DistanceResult),
    /// Every weight below `at_least` was ruled out before the budget ran out.
    OutOfBudget {
        at_least: usize,
        nodes: u64,
    },
}

pub fn search_stopping_distance(
    g: &TannerGraph,
    cap: usize,
    budget: Option<u64>,
    workers: Option<usize>,
) -> DistanceSearch {
    let adjacency = Adjacency::new(g);
    let limit = budget.unwrap_or(u64::MAX);
    let mut used = 0u64;
    for weight in 1..=cap.min(g.num_vars()) {
        let per_root: Vec<(Option<Vec<usize>>, u64, bool)> = with_workers(workers, || {
            (0..g.num_vars())
                .into_par_iter()
                .map(|root| {
                    let mut sink = FirstSink(None);
                    let mut search = Search::new(&adjacency, root, weight, limit);
                    let outcome = search.run(&mut sink);
                    let complete = outcome.is_ok() || sink.0.is_some();
                    (sink.0, search.nodes, complete)
                })
                .collect()
        });
        for (found, nodes, complete) in per_root {
            used = used.saturating_add(nodes);
            if !complete || used > limit {
                return DistanceSearch::OutOfBudget {
                    at_least: weight,
                    nodes: used.min(limit),
                };
            }
            if let Some(mut set) = found {
                set.sort_unstable();
                return DistanceSearch::Done(DistanceResult {
                    distance: StoppingDistance::Exactly(set.len()),
                    witness: Some(set),
                    nodes: used,
                });
            }
        }
    }
    DistanceSearch::Done(DistanceResult {
        distance: StoppingDistance::GreaterThan(cap),
        witness: None,
        nodes: used,
    })
}

/// Checks that every codeword support is a stopping set, on the nullspace
/// basis and on 64 random combinations of it.
pub fn codeword_support_check(g: &TannerGraph) -> bool {
    const SAMPLES: usize = 64;
    let basis = gf2_nullspace(&g.to_parity_matrix());
    let support = |x: &[u8]| -> Vec<usize> {
        x.iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i)
            .collect()
    };
    if !basis
        .iter()
        .all(|x| is_stopping_set(g, &support(x)).unwrap_or(false))
    {
        return false;
    }
    if basis.is_empty() {
        return true;
    }
    let mut rng = seed::stream(0, &[seed::domain::CODEWORD_SAMPLE]);
    (0..SAMPLES).all(|_| {
        let mut word = vec![0u8; g.num_vars()];
        for x in &basis {
            if rng.random::<bool>() {
                for (w, b) in word.iter_mut().zip(x) {
                    *w ^= b;
                }
            }
        }
        is_stopping_set(g, &support(&word)).unwrap_or(false)
    })
}

/// Per-variable `(check, multiplicity)` and per-check `(var, multiplicity)`
/// lists.
struct Adjacency {
    var_checks: Vec<Vec<(usize, usize)>>,
    check_vars: Vec<Vec<usize>>,
    /// Largest number of distinct checks at one variable.
    max_spread: usize,
}

impl Adjacency {
    fn new(g: &TannerGraph) -> Self {
        let var_checks: Vec<_> = (0..g.num_vars()).map(|v| g.var_neighbors(v)).collect();
        let check_vars = (0..g.num_checks())
            .map(|c| g.check_neighbors(c).into_iter().map(|(v, _)| v).collect())
            .collect();
        let max_spread = var_checks.iter().map(Vec::len).max().unwrap_or(0);
        Adjacency {
            var_checks,
            check_vars,
            max_spread,
        }
    }
}

enum Halt {
    Budget,
    Found,
}

trait Sink {
    /// Returns false to stop the search.
    fn record(&mut self, set: &[usize]) -> bool;
}

struct FirstSink(Option<Vec<usize>>);

impl Sink for FirstSink {
    fn record(&mut self, set: &[usize]) -> bool {
        self.0 = Some(set.to_vec());
        false
    }
}

struct CountSink {
    counts: Vec<u64>,
    witnesses: Vec<Vec<usize>>,
    witness_max_weight: usize,
    witness_limit: usize,
}

impl CountSink {
    fn new(weight_cap: usize, opts: &EnumerationOptions) -> Self {
        CountSink {
            counts: vec![0; weight_cap + 1],
            witnesses: Vec::new(),
            witness_max_weight: opts.witness_max_weight,
            witness_limit: opts.witness_limit,
        }
    }

    fn finish(&mut self) {
        self.witnesses.sort_by(canonical_order);
        self.witnesses.truncate(self.witness_limit);
    }
}

impl Sink for CountSink {
    fn record(&mut self, set: &[usize]) -> bool {
        self.counts[set.len()] += 1;
        if set.len() <= self.witness_max_weight && self.witness_limit > 0 {
            let mut w = set.to_vec();
            w.sort_unstable();
            self.witnesses.push(w);
            if self.witnesses.len() >= self.witness_limit.saturating_mul(2) {
                self.finish();
            }
        }
        true
    }
}

struct RootCount {
    counts: Vec<u64>,
    witnesses: Vec<Vec<usize>>,
    nodes: u64,
    complete: bool,
}

/// Depth-first search for stopping sets whose smallest member is `root`.
struct Search<'a> {
    adj: &'a Adjacency,
    root: usize,
    max_weight: usize,
    limit: u64,
    nodes: u64,
    /// Edges from the current set into each check.
    count: Vec<usize>,
    /// Checks with exactly one edge into the set.
    deficient: usize,
    in_set: Vec<bool>,
    excluded: Vec<bool>,
    members: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(adj: &'a Adjacency, root: usize, max_weight: usize, limit: u64) -> Self {
        let n = adj.var_checks.len();
        Search {
            adj,
            root,
            max_weight,
            limit,
            nodes: 0,
            count: vec![0; adj.check_vars.len()],
            deficient: 0,
            in_set: vec![false; n],
            excluded: vec![false; n],
            members: Vec::new(),
        }
    }

    fn run(&mut self, sink: &mut impl Sink) -> std::result::Result<(), Halt> {
        if self.max_weight == 0 {
            return Ok(());
        }
        self.add(self.root);
        let out = self.expand(sink);
        self.remove(self.root);
        out
    }

    fn available(&self, v: usize) -> bool {
        v > self.root && !self.in_set[v] && !self.excluded[v]
    }

    fn add(&mut self, v: usize) {
        self.in_set[v] = true;
        self.members.push(v);
        for &(c, m) in &self.adj.var_checks[v] {
            let before = self.count[c];
            self.count[c] += m;
            self.track(before, self.count[c]);
        }
    }

    fn remove(&mut self, v: usize) {
        self.in_set[v] = false;
        self.members.pop();
        for &(c, m) in &self.adj.var_checks[v] {
            let before = self.count[c];
            self.count[c] -= m;
            self.track(before, self.count[c]);
        }
    }

    fn track(&mut self, before: usize, after: usize) {
        if before == 1 {
            self.deficient -= 1;
        }
        if after == 1 {
            self.deficient += 1;
        }
    }

    /// The deficient check with the fewest available neighbours, and those
    /// neighbours.
    fn tightest_deficient_check(&self) -> Vec<usize> {
        let mut best: Option<Vec<usize>> = None;
        for &v in &self.members {
            for &(c, _) in &self.adj.var_checks[v] {
                if self.count[c] != 1 {
                    continue;
                }
                let candidates: Vec<usize> = self.adj.check_vars[c]
                    .iter()
                    .copied()
                    .filter(|&u| self.available(u))
                    .collect();
                if best.as_ref().is_none_or(|b| candidates.len() < b.len()) {
                    if candidates.is_empty() {
                        return candidates;
                    }
                    best = Some(candidates);
                }
            }
        }
        best.unwrap_or_default()
    }

    fn expand(&mut self, sink: &mut impl Sink) -> std::result::Result<(), Halt> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(Halt::Budget);
        }
        let candidates = if self.deficient == 0 {
            if !sink.record(&self.members) {
                return Err(Halt::Found);
            }
            if self.members.len() == self.max_weight {
                return Ok(());
            }
            (0..self.in_set.len())
                .filter(|&v| self.available(v))
                .collect()
        } else {
            // Each added variable can repair at most `max_spread` checks.
            let needed = self.deficient.div_ceil(self.adj.max_spread.max(1));
            if self.members.len() + needed > self.max_weight {
                return Ok(());
            }
            self.tightest_deficient_check()
        };

        let mut out = Ok(());
        let mut tried = Vec::with_capacity(candidates.len());
        for u in candidates {
            self.add(u);
            out = self.expand(sink);
            self.remove(u);
            if out.is_err() {
                break;
            }
            self.excluded[u] = true;
            tried.push(u);
        }
        for u in tried {
            self.excluded[u] = false;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: &[&[i64]]) -> TannerGraph {
        TannerGraph::from_multiplicity_matrix(m).unwrap()
    }

    fn counts(report: &StoppingReport) -> Vec<u64> {
        report.counts.values().copied().collect()
    }

    #[test]
    fn membership_examples() {
        let k22 = g(&[&[1, 1], &[1, 1]]);
        assert!(is_stopping_set(&k22, &[]).unwrap());
        assert!(!is_stopping_set(&k22, &[0]).unwrap());
        assert!(is_stopping_set(&k22, &[0, 1]).unwrap());
        assert!(matches!(
            is_stopping_set(&k22, &[2]),
            Err(Error::InvalidNode { id: 2, .. })
        ));
        // Two parallel edges satisfy a check on their own.
        assert!(is_stopping_set(&g(&[&[2, 1], &[0, 1]]), &[0]).unwrap());
    }

    #[test]
    fn enumeration_examples() {
        let k22 = g(&[&[1, 1], &[1, 1]]);
        let report = enumerate_stopping_sets(&k22, 2);
        assert!(report.exhaustive);
        assert_eq!(counts(&report), vec![1, 0, 1]);
        assert_eq!(report.witnesses, vec![vec![0, 1]]);

        // Two disjoint 4-cycles.
        let doubled = g(&[&[1, 1, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 1], &[0, 0, 1, 1]]);
        assert_eq!(
            counts(&enumerate_stopping_sets(&doubled, 4)),
            vec![1, 0, 2, 0, 1]
        );

        // Every variable has a private degree-1 check.
        let forest = g(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]);
        assert_eq!(
            counts(&enumerate_stopping_sets(&forest, 3)),
            vec![1, 0, 0, 0]
        );
    }

    #[test]
    fn max_weight_beyond_blocklength_reports_zeros() {
        let report = enumerate_stopping_sets(&g(&[&[1, 1], &[1, 1]]), 5);
        assert_eq!(counts(&report), vec![1, 0, 1, 0, 0, 0]);
        assert_eq!(counts(&enumerate_stopping_sets(&g(&[&[1]]), 0)), vec![1]);
    }

    #[test]
    fn isolated_variable_is_weight_one() {
        let report = enumerate_stopping_sets(&g(&[&[1, 0]]), 2);
        assert_eq!(counts(&report), vec![1, 1, 0]);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            stopping_distance(&g(&[&[1, 1], &[1, 1]]), 8),
            StoppingDistance::Exactly(2)
        );
        // single cycle through four variables and four checks
        let cycle = g(&[&[1, 1, 0, 0], &[0, 1, 1, 0], &[0, 0, 1, 1], &[1, 0, 0, 1]]);
        assert_eq!(stopping_distance(&cycle, 8), StoppingDistance::Exactly(4));
        assert_eq!(
            stopping_distance(&g(&[&[1, 1], &[1, 0]]), 2),
            StoppingDistance::GreaterThan(2)
        );
        assert!(StoppingDistance::GreaterThan(2) > StoppingDistance::Exactly(100));
    }

    #[test]
    fn budget_exhaustion_returns_partial_report() {
        let k = g(&[&[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1]]);
        let mut opts = EnumerationOptions::new(4);
        opts.budget = Some(3);
        match enumerate_stopping_sets_with(&k, &opts) {
            Err(Error::BudgetExceeded {
                partial: Some(report),
                ..
            }) => {
                assert!(!report.exhaustive);
                assert!(report.budget_used <= 3);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(matches!(
            stopping_distance_with(&k, 4, Some(1), None),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            search_stopping_distance(&k, 4, Some(1), None),
            DistanceSearch::OutOfBudget { at_least: 1, .. }
        ));
    }

    #[test]
    fn witness_limit_keeps_canonical_prefix() {
        let k = g(&[&[1, 1, 1, 1], &[1, 1, 1, 1]]);
        let full = enumerate_stopping_sets(&k, 4);
        let mut opts = EnumerationOptions::new(4);
        opts.witness_limit = 3;
        let truncated = enumerate_stopping_sets_with(&k, &opts).unwrap();
        assert_eq!(truncated.witnesses, full.witnesses[..3].to_vec());
        assert_eq!(truncated.counts, full.counts);
    }

    #[test]
    fn codeword_supports_are_stopping_sets() {
        assert!(codeword_support_check(&g(&[&[1, 1], &[1, 1]])));
        assert!(codeword_support_check(&g(&[
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1]
        ])));
        assert!(codeword_support_check(&g(&[&[3, 1, 0, 2], &[0, 1, 1, 1]])));
    }

    #[test]
    fn report_json_shape() {
        let report = enumerate_stopping_sets(&g(&[&[1, 1], &[1, 1]]), 2);
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["counts"], serde_json::json!([[0, 1], [1, 0], [2, 1]]));
        assert_eq!(json["witnesses"], serde_json::json!([[0, 1]]));
        let back: StoppingReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }
}
