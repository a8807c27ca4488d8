//! Construction and analysis of LDPC codes built from iterated 2-lifts of
//! protograph Tanner graphs.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`], [`gf2`] and [`alist`]: the Tanner multigraph model, its
//!   parity-check view, girth and GF(2) nullspace, and file formats.
//! - [`lift`]: single 2-lifts, iterated lift specifications and the covering
//!   map back to the protograph.
//! - [`stopping`]: exact low-weight stopping-set enumeration.
//! - [`expansion`]: subset expansion profiles and the configurable design
//!   criteria.
//! - [`design`]: best-of-m guided lifting and full code construction.
//! - [`channel`]: the erasure peeling decoder, Monte Carlo simulation, the
//!   exhaustive frame-error oracle and union-style floor estimates.

pub mod alist;
pub mod channel;
pub mod design;
pub mod error;
pub mod expansion;
pub mod gf2;
pub mod graph;
pub mod lift;
pub mod parallel;
pub mod seed;
pub mod stopping;

pub use error::{Error, Result};
pub use graph::{Girth, ParityMatrix, TannerGraph};
