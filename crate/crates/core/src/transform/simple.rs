use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};
use crate::spectral::{simple_path_sum, Controls, SeriesEstimate, SeriesStatus};

/// R(v,w): the weighted sum over paths of positive length from v that
/// meet w only at their end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplePathSum {
    pub from: String,
    pub to: String,
    pub estimate: SeriesEstimate,
}

/// Like [`simple_path_sum`], but refuses unreachable targets and
/// undetermined estimates.
pub fn simple_path_sum_checked(
    g: &Digraph,
    beta: f64,
    v: VertexId,
    w: VertexId,
    controls: &Controls,
) -> Result<SimplePathSum> {
    let reaching = g.reaching(w);
    if !g.successors(v).any(|u| reaching[u.0]) {
        return Err(Error::precondition(format!("{} is not reachable from {}", g.name(w), g.name(v))));
    }
    let estimate = simple_path_sum(g, beta, v, w, controls);
    match estimate.status {
        SeriesStatus::Converged => {
            Ok(SimplePathSum { from: g.name(v).to_string(), to: g.name(w).to_string(), estimate })
        }
        s => Err(Error::undetermined(format!("simple-path series is {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn golden_half() {
        let g = Family::golden().truncate(0).unwrap();
        let r = simple_path_sum_checked(&g, 2f64.ln(), VertexId(0), VertexId(0), &Controls::default()).unwrap();
        assert!((r.estimate.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn ray_graph_has_no_returns() {
        let g = Family::ray_graph().truncate(10).unwrap();
        assert!(simple_path_sum_checked(&g, 1.0, VertexId(0), VertexId(0), &Controls::default()).is_err());
        assert_eq!(simple_path_sum(&g, 1.0, VertexId(0), VertexId(0), &Controls::default()).value, 0.0);
    }

    #[test]
    fn single_loop() {
        let g = Family::single_loop(1).truncate(0).unwrap();
        let r = simple_path_sum_checked(&g, 0.7, VertexId(0), VertexId(0), &Controls::default()).unwrap();
        assert!((r.estimate.value - (-0.7f64).exp()).abs() < 1e-12);
    }
}
