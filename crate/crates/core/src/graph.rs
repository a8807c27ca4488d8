//! Tanner multigraph model.
//!
//! Variable nodes and check nodes carry dense ids `0..num_vars` and
//! `0..num_checks`. Edges are `(var, check)` pairs and may repeat, so
//! protographs with parallel edges are represented directly. Edge ids are
//! indices into the edge sequence and never change after construction.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::gf2::ParityMatrix;

/// Format tag written into the JSON graph document.
pub const GRAPH_FORMAT: &str = "tanner-graph";
pub const GRAPH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct TannerGraph {
    num_vars: usize,
    num_checks: usize,
    edges: Vec<(usize, usize)>,
    var_edges: Vec<Vec<usize>>,
    check_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    /// Builds a graph from an explicit edge list of `(var, check)` pairs.
    pub fn new(num_vars: usize, num_checks: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut var_edges = vec![Vec::new(); num_vars];
        let mut check_edges = vec![Vec::new(); num_checks];
        for (id, &(v, c)) in edges.iter().enumerate() {
            if v >= num_vars {
                return Err(Error::InvalidNode {
                    kind: "variable",
                    id: v,
                    limit: num_vars,
                });
            }
            if c >= num_checks {
                return Err(Error::InvalidNode {
                    kind: "check",
                    id: c,
                    limit: num_checks,
                });
            }
            var_edges[v].push(id);
            check_edges[c].push(id);
        }
        Ok(TannerGraph {
            num_vars,
            num_checks,
            edges,
            var_edges,
            check_edges,
        })
    }

    /// Builds a graph from a check-by-variable multiplicity matrix.
    ///
    /// `m[c][v]` parallel edges join check `c` and variable `v`. Edge ids are
    /// assigned in row-major order, repeated entries consecutively.
    pub fn from_multiplicity_matrix<R: AsRef<[i64]>>(m: &[R]) -> Result<Self> {
        let rows = m.len();
        if rows == 0 {
            return Err(Error::InvalidMatrix("matrix has no rows".into()));
        }
        let cols = m[0].as_ref().len();
        if cols == 0 {
            return Err(Error::InvalidMatrix("matrix has no columns".into()));
        }
        let mut edges = Vec::new();
        for (c, row) in m.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::InvalidMatrix(format!(
                    "row {c} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (v, &mult) in row.iter().enumerate() {
                if mult < 0 {
                    return Err(Error::InvalidMatrix(format!(
                        "negative entry {mult} at ({c}, {v})"
                    )));
                }
                edges.extend(std::iter::repeat_n((v, c), mult as usize));
            }
        }
        TannerGraph::new(cols, rows, edges)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// All edges as `(var, check)` pairs, indexed by edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge ids incident to variable `v`, in increasing order.
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    /// Edge ids incident to check `c`, in increasing order.
    pub fn check_edges(&self, c: usize) -> &[usize] {
        &self.check_edges[c]
    }

    /// Distinct check neighbours of `v` with their edge multiplicities,
    /// sorted by check id.
    pub fn var_neighbors(&self, v: usize) -> Vec<(usize, usize)> {
        group_sorted(self.var_edges[v].iter().map(|&e| self.edges[e].1))
    }

    /// Distinct variable neighbours of `c` with their edge multiplicities,
    /// sorted by variable id.
    pub fn check_neighbors(&self, c: usize) -> Vec<(usize, usize)> {
        group_sorted(self.check_edges[c].iter().map(|&e| self.edges[e].0))
    }

    /// `m[c][v]` = number of parallel edges between check `c` and variable `v`.
    pub fn multiplicity_matrix(&self) -> Vec<Vec<usize>> {
        let mut m = vec![vec![0; self.num_vars]; self.num_checks];
        for &(v, c) in &self.edges {
            m[c][v] += 1;
        }
        m
    }

    /// The binary parity-check matrix: multiplicities reduced mod 2.
    pub fn to_parity_matrix(&self) -> ParityMatrix {
        let mut h = ParityMatrix::zeros(self.num_checks, self.num_vars);
        for &(v, c) in &self.edges {
            h.flip(c, v);
        }
        h
    }

    /// Degrees counted with edge multiplicity.
    pub fn node_degrees(&self) -> (Vec<usize>, Vec<usize>) {
        (
            self.var_edges.iter().map(Vec::len).collect(),
            self.check_edges.iter().map(Vec::len).collect(),
        )
    }

    /// First `(check, var)` pair joined by more than one edge, if any.
    pub fn first_parallel_pair(&self) -> Option<(usize, usize)> {
        (0..self.num_checks).find_map(|c| {
            self.check_neighbors(c)
                .into_iter()
                .find(|&(_, mult)| mult > 1)
                .map(|(v, _)| (c, v))
        })
    }

    pub fn has_parallel_edges(&self) -> bool {
        self.first_parallel_pair().is_some()
    }

    /// Length of the shortest cycle. A pair of parallel edges is a 2-cycle.
    pub fn girth(&self) -> Girth {
        // Unified node ids: variables first, then checks.
        let n = self.num_vars + self.num_checks;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (e, &(v, c)) in self.edges.iter().enumerate() {
            adj[v].push((self.num_vars + c, e));
            adj[self.num_vars + c].push((v, e));
        }
        // Every cycle passes through a variable node, so BFS roots are
        // restricted to variables.
        let best = AtomicUsize::new(usize::MAX);
        (0..self.num_vars).into_par_iter().for_each(|root| {
            let found = shortest_cycle_through_bfs(&adj, root, best.load(Ordering::Relaxed));
            best.fetch_min(found, Ordering::Relaxed);
        });
        match best.into_inner() {
            usize::MAX => Girth::Infinite,
            g => Girth::Finite(g),
        }
    }
}

impl TannerGraph {
    /// Variable nodes on one shortest cycle, sorted. The cycle is the first
    /// one found scanning BFS roots in increasing variable order.
    pub fn shortest_cycle_vars(&self) -> Option<Vec<usize>> {
        let target = self.girth().finite()?;
        let n = self.num_vars + self.num_checks;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (e, &(v, c)) in self.edges.iter().enumerate() {
            adj[v].push((self.num_vars + c, e));
            adj[self.num_vars + c].push((v, e));
        }
        (0..self.num_vars).find_map(|root| {
            let mut nodes = cycle_through_bfs(&adj, root, target)?;
            nodes.retain(|&x| x < self.num_vars);
            nodes.sort_unstable();
            nodes.dedup();
            Some(nodes)
        })
    }
}

/// Nodes of a closed walk of length `target` found from `root`, if any. At
/// the girth such a walk is a simple cycle.
fn cycle_through_bfs(
    adj: &[Vec<(usize, usize)>],
    root: usize,
    target: usize,
) -> Option<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut dist = vec![UNSEEN; n];
    let mut parent = vec![(UNSEEN, UNSEEN); n];
    let mut queue = std::collections::VecDeque::new();
    dist[root] = 0;
    queue.push_back(root);
    let climb = |mut x: usize, parent: &[(usize, usize)], out: &mut Vec<usize>| {
        while x != root {
            out.push(x);
            x = parent[x].0;
        }
    };
    while let Some(u) = queue.pop_front() {
        if 2 * dist[u] > target {
            break;
        }
        for &(w, e) in &adj[u] {
            if e == parent[u].1 || e == parent[w].1 {
                continue;
            }
            if dist[w] == UNSEEN {
                dist[w] = dist[u] + 1;
                parent[w] = (u, e);
                queue.push_back(w);
            } else if dist[u] + dist[w] + 1 == target {
                let mut nodes = vec![root];
                climb(u, &parent, &mut nodes);
                climb(w, &parent, &mut nodes);
                return Some(nodes);
            }
        }
    }
    None
}

/// Smallest closed walk length found by a BFS from `root` via a non-tree
/// edge, stopping once nothing shorter than `bound` can appear. Minimising
/// over all roots gives the girth.
fn shortest_cycle_through_bfs(adj: &[Vec<(usize, usize)>], root: usize, bound: usize) -> usize {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut dist = vec![UNSEEN; n];
    let mut parent_edge = vec![UNSEEN; n];
    let mut queue = std::collections::VecDeque::new();
    let mut best = bound;
    dist[root] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        if 2 * dist[u] >= best {
            break;
        }
        for &(w, e) in &adj[u] {
            if e == parent_edge[u] || e == parent_edge[w] {
                continue;
            }
            if dist[w] == UNSEEN {
                dist[w] = dist[u] + 1;
                parent_edge[w] = e;
                queue.push_back(w);
            } else {
                best = best.min(dist[u] + dist[w] + 1);
            }
        }
    }
    best
}

fn group_sorted(ids: impl Iterator<Item = usize>) -> Vec<(usize, usize)> {
    let mut ids: Vec<usize> = ids.collect();
    ids.sort_unstable();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for id in ids {
        match out.last_mut() {
            Some((last, mult)) if *last == id => *mult += 1,
            _ => out.push((id, 1)),
        }
    }
    out
}

/// Shortest-cycle length of a graph. `Infinite` for forests; orders after
/// every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }
}

impl std::fmt::Display for Girth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => f.write_str("infinite"),
        }
    }
}

/// Lossless JSON form of a [`TannerGraph`], including multigraphs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub format: String,
    pub version: u32,
    pub num_vars: usize,
    pub num_checks: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<TannerGraph> for GraphDocument {
    fn from(g: TannerGraph) -> Self {
        GraphDocument {
            format: GRAPH_FORMAT.to_string(),
            version: GRAPH_FORMAT_VERSION,
            num_vars: g.num_vars,
            num_checks: g.num_checks,
            edges: g.edges.iter().map(|&(v, c)| [v, c]).collect(),
        }
    }
}

impl TryFrom<GraphDocument> for TannerGraph {
    type Error = Error;

    fn try_from(doc: GraphDocument) -> Result<Self> {
        if doc.format != GRAPH_FORMAT {
            return Err(Error::Parse(format!(
                "expected format {GRAPH_FORMAT:?}, found {:?}",
                doc.format
            )));
        }
        if doc.version != GRAPH_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported graph format version {}",
                doc.version
            )));
        }
        let edges = doc.edges.into_iter().map(|[v, c]| (v, c)).collect();
        TannerGraph::new(doc.num_vars, doc.num_checks, edges)
    }
}
