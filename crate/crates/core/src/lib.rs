//! Analytic invariants of weighted countable digraphs.
//!
//! Infinite graphs are handled through coherent finite truncations. Every
//! series carries a convergence status so callers can tell an exact answer
//! from a horizon-limited one.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod ends;
pub mod error;
pub mod graph;
pub mod harmonic;
pub mod martin;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use graph::{
    BratteliDiagram, Digraph, DigraphBuilder, Family, FinitePath, LevelGeneratedGraph, ParsedGraph,
    RaySpec, VertexId,
};
pub use harmonic::{ConformalMeasure, HarmonicVector};
pub use spectral::{Controls, SeriesEstimate, SeriesStatus, WeightMatrix};
