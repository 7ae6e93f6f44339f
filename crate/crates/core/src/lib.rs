//! Vertex-noise models for spatially embedded graphs: tempered heavy-tailed
//! displacement, spectral sensitivity bounds, motif extremal analysis,
//! thickness repair and separability metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ctpl;
pub mod error;
pub mod format;
pub mod geometry;
pub mod graph;
pub mod kernel;
pub mod metrics;
pub mod motif;
pub mod quadrature;
pub mod reference;
pub mod repair;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Edge, EmbeddedGraph, Vertex, VertexId};
pub use kernel::WeightKernel;
pub use rng::{SeedTree, SimRng};
