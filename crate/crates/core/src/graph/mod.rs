//! The graph data model and its JSON document format. Infinite graphs are
//! level-generated and materialize to finite truncations on demand.

mod digraph;
pub mod family;
pub mod format;
pub mod leveled;
mod path;
pub mod ray;

pub use digraph::{Bundle, Digraph, DigraphBuilder, VertexId};
pub use family::{ExitMultiplicity, Family};
pub use format::{parse_graph, serialize_graph, ParsedGraph};
pub use leveled::{BratteliDiagram, LevelArrow, LevelBlocks, LevelGeneratedGraph, LevelRule, Levels, Tail};
pub use path::FinitePath;
pub use ray::{RayKind, RaySpec};

/// Vertex-indexed boolean set helper.
pub(crate) fn mask(n: usize, members: impl IntoIterator<Item = VertexId>) -> Vec<bool> {
    let mut m = vec![false; n];
    for v in members {
        m[v.0] = true;
    }
    m
}
