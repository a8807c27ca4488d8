//! Binary erasure channel: peeling decoder, Monte Carlo frame simulation,
//! exhaustive frame-error oracle and union-style floor estimate.
//!
//! The peeling decoder counts edges, not distinct variables: a check joined
//! to the last erased variable by two parallel edges does not resolve it.
//! Under that rule the residual of a failed decoding is exactly the largest
//! stopping set inside the erasure pattern.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::TannerGraph;
use crate::parallel::with_workers;
use crate::seed;
use crate::stopping::StoppingReport;

/// Largest blocklength [`exact_fer`] accepts by default.
pub const EXACT_FER_MAX_VARS: usize = 20;
/// Hard ceiling for the exhaustive oracle regardless of the caller's limit.
pub const EXACT_FER_HARD_LIMIT: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeelOutcome {
    Recovered,
    /// Variables left erased, in increasing order.
    Stuck(Vec<usize>),
}

impl PeelOutcome {
    pub fn is_recovered(&self) -> bool {
        matches!(self, PeelOutcome::Recovered)
    }

    pub fn residual(&self) -> &[usize] {
        match self {
            PeelOutcome::Recovered => &[],
            PeelOutcome::Stuck(r) => r,
        }
    }
}

/// Peeling decoder with reusable buffers.
#[derive(Debug, Clone)]
pub struct Peeler {
    var_checks: Vec<Vec<(usize, usize)>>,
    check_vars: Vec<Vec<usize>>,
    count: Vec<usize>,
    erased: Vec<bool>,
    queue: Vec<usize>,
}

impl Peeler {
    pub fn new(g: &TannerGraph) -> Self {
        Peeler {
            var_checks: (0..g.num_vars()).map(|v| g.var_neighbors(v)).collect(),
            check_vars: (0..g.num_checks())
                .map(|c| g.check_neighbors(c).into_iter().map(|(v, _)| v).collect())
                .collect(),
            count: vec![0; g.num_checks()],
            erased: vec![false; g.num_vars()],
            queue: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.erased.len()
    }

    /// Decodes the erasure pattern given by `is_erased(v)` and returns the
    /// number of variables left erased.
    pub fn run(&mut self, mut is_erased: impl FnMut(usize) -> bool) -> usize {
        self.count.iter_mut().for_each(|c| *c = 0);
        self.queue.clear();
        let mut remaining = 0;
        for v in 0..self.erased.len() {
            let e = is_erased(v);
            self.erased[v] = e;
            if e {
                remaining += 1;
                for &(c, m) in &self.var_checks[v] {
                    self.count[c] += m;
                }
            }
        }
        self.queue
            .extend((0..self.count.len()).filter(|&c| self.count[c] == 1));
        while let Some(c) = self.queue.pop() {
            if self.count[c] != 1 {
                continue;
            }
            let Some(&u) = self.check_vars[c].iter().find(|&&u| self.erased[u]) else {
                continue;
            };
            self.erased[u] = false;
            remaining -= 1;
            for &(c2, m) in &self.var_checks[u] {
                self.count[c2] -= m;
                if self.count[c2] == 1 {
                    self.queue.push(c2);
                }
            }
        }
        remaining
    }

    /// Variables still erased after the last [`Peeler::run`].
    pub fn residual(&self) -> Vec<usize> {
        (0..self.erased.len()).filter(|&v| self.erased[v]).collect()
    }
}

/// Runs the peeling decoder on the erased variable set.
pub fn peel_decode(g: &TannerGraph, erased: &[usize]) -> Result<PeelOutcome> {
    let mut pattern = vec![false; g.num_vars()];
    for &v in erased {
        if v >= g.num_vars() {
            return Err(Error::InvalidNode {
                kind: "variable",
                id: v,
                limit: g.num_vars(),
            });
        }
        pattern[v] = true;
    }
    let mut peeler = Peeler::new(g);
    if peeler.run(|v| pattern[v]) == 0 {
        Ok(PeelOutcome::Recovered)
    } else {
        Ok(PeelOutcome::Stuck(peeler.residual()))
    }
}

/// One point of an error-rate curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub epsilon: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub stderr_fer: f64,
    pub seed: u64,
    /// True when the point stopped at the frame-error target before using
    /// the whole frame budget.
    pub stopped_early: bool,
}

impl SimResult {
    fn new(
        epsilon: f64,
        frames: u64,
        frame_errors: u64,
        bit_errors: u64,
        n: usize,
        seed: u64,
    ) -> Self {
        let fer = frame_errors as f64 / frames as f64;
        SimResult {
            epsilon,
            frames,
            frame_errors,
            bit_errors,
            fer,
            ber: bit_errors as f64 / (frames as f64 * n.max(1) as f64),
            stderr_fer: (fer * (1.0 - fer) / frames as f64).sqrt(),
            seed,
            stopped_early: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    /// Stop a point once this many frame errors have been seen.
    pub stop_after_errors: Option<u64>,
    pub workers: Option<usize>,
}

const FRAMES_PER_CHUNK: u64 = 1024;
const CHUNKS_PER_BATCH: u64 = 16;

/// Erasure pattern of frame `frame`: variable `v` is erased when the `v`-th
/// uniform draw of the frame's stream is below `epsilon`.
fn frame_outcome(peeler: &mut Peeler, epsilon: f64, seed: u64, frame: u64) -> usize {
    let mut rng = seed::stream(seed, &[seed::domain::FRAME, frame]);
    peeler.run(|_| rng.random::<f64>() < epsilon)
}

/// Monte Carlo simulation of `frames` frames at erasure probability
/// `epsilon`. Frame `j` draws from a stream derived from `(seed, j)`, so the
/// result does not depend on the worker count.
pub fn simulate_bec(
    g: &TannerGraph,
    epsilon: f64,
    frames: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<SimResult> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "erasure probability {epsilon} outside [0, 1]"
        )));
    }
    if frames == 0 {
        return Err(Error::InvalidArgument("frames must be at least 1".into()));
    }
    let base = Peeler::new(g);
    let n = g.num_vars();

    with_workers(opts.workers, || match opts.stop_after_errors {
        None => {
            let (frame_errors, bit_errors) = (0..frames)
                .into_par_iter()
                .map_init(
                    || base.clone(),
                    |peeler, j| {
                        let r = frame_outcome(peeler, epsilon, seed, j) as u64;
                        ((r > 0) as u64, r)
                    },
                )
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            Ok(SimResult::new(
                epsilon,
                frames,
                frame_errors,
                bit_errors,
                n,
                seed,
            ))
        }
        Some(target) => {
            let (mut frame_errors, mut bit_errors, mut done) = (0u64, 0u64, 0u64);
            let batch = FRAMES_PER_CHUNK * CHUNKS_PER_BATCH;
            while done < frames {
                let end = (done + batch).min(frames);
                let residuals: Vec<u64> = (done..end)
                    .into_par_iter()
                    .map_init(
                        || base.clone(),
                        |peeler, j| frame_outcome(peeler, epsilon, seed, j) as u64,
                    )
                    .collect();
                for r in residuals {
                    done += 1;
                    if r > 0 {
                        frame_errors += 1;
                        bit_errors += r;
                    }
                    if frame_errors >= target {
                        let mut res =
                            SimResult::new(epsilon, done, frame_errors, bit_errors, n, seed);
                        res.stopped_early = done < frames;
                        return Ok(res);
                    }
                }
            }
            Ok(SimResult::new(
                epsilon,
                frames,
                frame_errors,
                bit_errors,
                n,
                seed,
            ))
        }
    })
}

/// One [`SimResult`] per erasure probability, all sharing `seed`.
pub fn simulate_curve(
    g: &TannerGraph,
    epsilons: &[f64],
    frames: u64,
    seed: u64,
    opts: &SimOptions,
) -> Result<Vec<SimResult>> {
    epsilons
        .iter()
        .map(|&eps| simulate_bec(g, eps, frames, seed, opts))
        .collect()
}

pub const CURVE_CSV_HEADER: &str = "epsilon,frames,frame_errors,fer,stderr_fer,bit_errors,ber";

/// Plot-ready CSV, one row per point.
pub fn curve_to_csv(points: &[SimResult]) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.epsilon, p.frames, p.frame_errors, p.fer, p.stderr_fer, p.bit_errors, p.ber
        ));
    }
    out
}

/// Number of failing erasure patterns of each weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureSpectrum {
    pub num_vars: usize,
    /// `failing[w]` = erasure patterns of weight `w` that peel to a nonempty
    /// residual.
    pub failing: Vec<u64>,
}

impl FailureSpectrum {
    /// Exact frame-error probability at erasure probability `epsilon`.
    pub fn fer(&self, epsilon: f64) -> f64 {
        let n = self.num_vars as i32;
        self.failing
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f > 0)
            .map(|(w, &f)| f as f64 * epsilon.powi(w as i32) * (1.0 - epsilon).powi(n - w as i32))
            .sum()
    }
}

/// Peels all `2^n` erasure patterns. Refuses graphs with more than
/// `max_vars` variables.
pub fn failure_spectrum(g: &TannerGraph, max_vars: usize) -> Result<FailureSpectrum> {
    let n = g.num_vars();
    let limit = max_vars.min(EXACT_FER_HARD_LIMIT);
    if n > limit {
        return Err(Error::budget("exhaustive erasure patterns", 1u64 << limit));
    }
    let base = Peeler::new(g);
    let failing = (0..1u64 << n)
        .into_par_iter()
        .fold(
            || (base.clone(), vec![0u64; n + 1]),
            |(mut peeler, mut acc), mask| {
                if peeler.run(|v| mask >> v & 1 == 1) > 0 {
                    acc[mask.count_ones() as usize] += 1;
                }
                (peeler, acc)
            },
        )
        .map(|(_, acc)| acc)
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(FailureSpectrum {
        num_vars: n,
        failing,
    })
}

/// Exact frame-error probability by exhaustive enumeration, for graphs with
/// at most [`EXACT_FER_MAX_VARS`] variables.
pub fn exact_fer(g: &TannerGraph, epsilon: f64) -> Result<f64> {
    Ok(failure_spectrum(g, EXACT_FER_MAX_VARS)?.fer(epsilon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorEstimate {
    pub epsilon: f64,
    /// `sum_{1 <= w <= max_weight} A_w * epsilon^w`.
    pub estimate: f64,
    pub max_weight: usize,
    /// Copied from the report; a non-exhaustive report gives a partial sum.
    pub exhaustive: bool,
}

/// Truncated union estimate of the frame-error floor.
pub fn floor_estimate(report: &StoppingReport, epsilon: f64) -> FloorEstimate {
    let estimate = report
        .counts
        .iter()
        .filter(|&(&w, _)| w >= 1)
        .map(|(&w, &a)| a as f64 * epsilon.powi(w as i32))
        .sum();
    FloorEstimate {
        epsilon,
        estimate,
        max_weight: report.max_weight,
        exhaustive: report.exhaustive,
    }
}
