//! Semi-discrete optimal transport under the Euclidean (p = 1) cost.
//!
//! A continuous source measure, given as a piecewise-constant density on a
//! square grid, is transported onto a finitely supported target measure. The
//! transport map is read off an additively weighted Voronoi (Apollonius)
//! diagram whose weight vector is found by minimizing a convex functional
//! with L-BFGS, optionally warm-started from a Lloyd-clustered hierarchy of
//! coarser target measures.
//!
//! Module map:
//!
//! - [`measure`]: PGM ingestion and construction of the two measures.
//! - [`laguerre`]: labelling grid squares by weighted Voronoi cell.
//! - [`objective`]: value and gradient of the convex functional.
//! - [`optimizer`]: L-BFGS with a weak Wolfe line search.
//! - [`multiscale`]: Lloyd decomposition and the warm-started solve.
//! - [`transport`]: cost, bounds and assignment export.
//! - [`oracle`]: exact discrete optimal transport for small problems.
//! - [`render`]: hyperbolic bisectors and SVG output.
//! - [`selftest`]: embedded consistency checks used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fmt;
pub mod geometry;
pub mod laguerre;
pub mod measure;
pub mod multiscale;
pub mod objective;
pub mod optimizer;
pub mod oracle;
pub mod pgm;
pub mod render;
pub mod selftest;
pub mod transport;

pub use error::{Error, Result};
pub use geometry::Point;
pub use laguerre::{assign_cells, cell_boundary_chains, BoundaryChain, CellAssignment, WeightVector};
pub use measure::{image_to_density, image_to_discrete, DiscreteMeasure, GridDensity, RawImage};
pub use multiscale::{
    decompose, lloyd_cluster, solve_multiscale, DecompositionLevel, MultiscaleOptions,
    MultiscaleReport,
};
pub use objective::{evaluate, grad_l1_norm, ObjectiveEvaluation};
pub use optimizer::{minimize, OptimResult, OptimStatus, OptimizerConfig};
pub use pgm::load_pgm;
pub use transport::{transport_cost, upper_bound_c, TransportReport};
