//! Estimation of subgraph densities in noisy networks.
//!
//! Networks assembled from experimental measurements carry edge noise: true
//! edges observed as non-edges and vice versa. Given one to three noisy
//! replicates of the same underlying graph, this crate estimates the
//! underlying edge density, the error rates, and the density of arbitrary
//! subgraph patterns (two-stars, triangles, paths, cycles, custom
//! templates), together with asymptotic and bootstrap-based confidence
//! intervals, and derived quantities such as the clustering coefficient.
//!
//! Layout:
//! - [`graph`]: adjacency matrices, the flip-noise model, exact triad counts,
//!   the dual-model construction;
//! - [`generate`]: random graphs constrained to exact edge / two-star /
//!   triangle counts;
//! - [`moments`]: moment statistics and the closed-form and fixed-point
//!   estimators of `(alpha, beta, delta)` with their asymptotic covariances;
//! - [`pattern`]: noise-corrected subgraph-density estimation over a pattern
//!   catalog with matrix-identity fast paths and a guarded enumerator;
//! - [`bootstrap`]: the variance-matching bootstrap and the joint covariance
//!   assembly behind the interval estimates;
//! - [`sim`]: a replicated Monte-Carlo harness with CSV/JSON reports;
//! - [`coexpress`]: correlation-threshold coexpression networks from
//!   expression matrices;
//! - [`io`]: the edge-list and dense matrix file formats.

pub mod bootstrap;
pub mod coexpress;
mod dense;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod moments;
pub mod pattern;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{AdjacencyMatrix, NoiseModel};
