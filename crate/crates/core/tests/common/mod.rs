//! Brute-force oracles shared by the integration and acceptance tests.
//! Each works from the multiplicity matrix alone and shares no code with
//! the library's search routines.

#![allow(dead_code)]

use liftcode::TannerGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `m[c][v]` multiplicities.
pub fn matrix(g: &TannerGraph) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; g.num_vars()]; g.num_checks()];
    for &(v, c) in g.edges() {
        m[c][v] += 1;
    }
    m
}

/// Definition-level stopping test on a variable bitmask.
pub fn is_stopping_mask(m: &[Vec<usize>], mask: u64) -> bool {
    m.iter().all(|row| {
        let into: usize = row
            .iter()
            .enumerate()
            .filter(|(v, _)| mask >> v & 1 == 1)
            .map(|(_, &k)| k)
            .sum();
        into != 1
    })
}

/// `table[mask]` is true iff `mask` is a stopping set.
pub fn stopping_table(g: &TannerGraph) -> Vec<bool> {
    let m = matrix(g);
    (0..1u64 << g.num_vars())
        .map(|mask| is_stopping_mask(&m, mask))
        .collect()
}

/// Counts `A_w` for `w <= max_weight`, index 0 included.
pub fn naive_counts(g: &TannerGraph, max_weight: usize) -> Vec<u64> {
    let mut counts = vec![0u64; max_weight + 1];
    for (mask, ok) in stopping_table(g).into_iter().enumerate() {
        let w = (mask as u64).count_ones() as usize;
        if ok && w <= max_weight {
            counts[w] += 1;
        }
    }
    counts
}

/// Union of every stopping set inside `pattern`.
pub fn maximal_stopping_subset(table: &[bool], pattern: u64) -> u64 {
    let mut union = 0u64;
    let mut sub = pattern;
    loop {
        if table[sub as usize] {
            union |= sub;
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & pattern;
    }
    union
}

/// Shortest simple cycle by exhaustive path search. A pair of parallel
/// edges is a cycle of length 2.
pub fn brute_girth(g: &TannerGraph) -> Option<usize> {
    let n = g.num_vars() + g.num_checks();
    let mut adj = vec![Vec::new(); n];
    for (e, &(v, c)) in g.edges().iter().enumerate() {
        let cn = g.num_vars() + c;
        adj[v].push((cn, e));
        adj[cn].push((v, e));
    }

    fn walk(
        adj: &[Vec<(usize, usize)>],
        start: usize,
        at: usize,
        first_edge: usize,
        len: usize,
        on_path: &mut [bool],
        best: &mut Option<usize>,
    ) {
        if best.is_some_and(|b| len + 1 >= b) {
            return;
        }
        for &(next, e) in &adj[at] {
            if next == start && e != first_edge {
                *best = Some(len + 1);
            } else if next > start && !on_path[next] {
                on_path[next] = true;
                walk(adj, start, next, first_edge, len + 1, on_path, best);
                on_path[next] = false;
            }
        }
    }

    let mut best = None;
    let mut on_path = vec![false; n];
    for start in 0..n {
        for &(next, e) in &adj[start] {
            if next > start {
                on_path[next] = true;
                walk(&adj, start, next, e, 1, &mut on_path, &mut best);
                on_path[next] = false;
            }
        }
    }
    best
}

/// `(min |N(S)|, min e(S))` over all `S` of size `k`.
pub fn naive_expansion(g: &TannerGraph, k: usize) -> (usize, usize) {
    let m = matrix(g);
    let mut best = (usize::MAX, usize::MAX);
    for mask in 0..1u64 << g.num_vars() {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut neighbors = 0;
        let mut edges = 0;
        for row in &m {
            let into: usize = (0..g.num_vars())
                .filter(|v| mask >> v & 1 == 1)
                .map(|v| row[v])
                .sum();
            neighbors += (into > 0) as usize;
            edges += into;
        }
        best.0 = best.0.min(neighbors);
        best.1 = best.1.min(edges);
    }
    best
}

/// Random multigraph: each entry is 0 with probability `1 - density`,
/// otherwise 1, or 2 with probability `parallel`.
pub fn random_graph(
    rng: &mut impl Rng,
    vars: usize,
    checks: usize,
    density: f64,
    parallel: f64,
) -> TannerGraph {
    let m: Vec<Vec<i64>> = (0..checks)
        .map(|_| {
            (0..vars)
                .map(|_| {
                    if rng.random::<f64>() >= density {
                        0
                    } else if rng.random::<f64>() < parallel {
                        2
                    } else {
                        1
                    }
                })
                .collect()
        })
        .collect();
    TannerGraph::from_multiplicity_matrix(&m).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn mask_of(set: &[usize]) -> u64 {
    set.iter().fold(0, |m, &v| m | 1 << v)
}

pub fn set_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|v| mask >> v & 1 == 1).collect()
}

/// Exact FER by direct summation over all patterns.
pub fn naive_fer(g: &TannerGraph, eps: f64) -> f64 {
    let table = stopping_table(g);
    let n = g.num_vars();
    (0..1u64 << n)
        .filter(|&p| maximal_stopping_subset(&table, p) != 0)
        .map(|p| {
            let w = p.count_ones() as i32;
            eps.powi(w) * (1.0 - eps).powi(n as i32 - w)
        })
        .sum()
}
