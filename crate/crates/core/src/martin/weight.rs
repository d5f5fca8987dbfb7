use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};
use crate::spectral::{run_series, Controls, SeriesStatus, Step, WeightMatrix};

/// 𝕎 of a ray prefix, accumulated in the log domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayWeight {
    pub log_value: f64,
    pub value: f64,
    /// log Σ_{ν∈L_j} e^{−βF(ν)} for each consecutive pair.
    pub segment_logs: Vec<f64>,
    /// True when some segment sum did not settle within the path-length cap,
    /// so the value is only a lower bound.
    pub capped: bool,
}

/// Σ over paths from `from` to `to` whose arrows never land in `forbidden`.
///
/// Paths may pass through `to` before their last arrow, so the sum keeps
/// propagating mass that arrives at `to`.
pub(crate) fn segment_sum(
    a: &WeightMatrix,
    g: &Digraph,
    from: VertexId,
    to: VertexId,
    forbidden: &[bool],
    controls: &Controls,
) -> (f64, bool) {
    // Vertices that can still reach `to` without landing in `forbidden`.
    let mut relevant = vec![false; g.len()];
    relevant[to.0] = true;
    let mut queue = VecDeque::from([to]);
    while let Some(u) = queue.pop_front() {
        for p in g.predecessors(u) {
            if !forbidden[p.0] && !relevant[p.0] {
                relevant[p.0] = true;
                queue.push_back(p);
            }
        }
    }
    let mut x = vec![0.0; g.len()];
    x[from.0] = 1.0;
    let est = run_series(controls, |_| {
        let mut y = a.left_mul(&x);
        for (i, yi) in y.iter_mut().enumerate() {
            if forbidden[i] || !relevant[i] {
                *yi = 0.0;
            }
        }
        x = y;
        Step { term: x[to.0], mass: x.iter().sum(), leak: 0.0 }
    });
    (est.value, est.status != SeriesStatus::Converged)
}

/// 𝕎(w₀,…,w_k) = ∏_j Σ_{ν∈L_j} e^{−βF(ν)} where L_j holds the paths from
/// w_j to w_{j+1} whose arrows never land in {w₀,…,w_j}.
pub fn ray_weight(g: &Digraph, beta: f64, prefix: &[VertexId], controls: &Controls) -> Result<RayWeight> {
    let mut seen = vec![false; g.len()];
    for &v in prefix {
        if seen[v.0] {
            return Err(Error::precondition(format!("vertex {} repeats in the ray prefix", g.name(v))));
        }
        seen[v.0] = true;
    }
    let a = WeightMatrix::new(g, beta);
    let mut forbidden = vec![false; g.len()];
    let mut segment_logs = Vec::with_capacity(prefix.len().saturating_sub(1));
    let mut capped = false;
    for pair in prefix.windows(2) {
        forbidden[pair[0].0] = true;
        let (s, c) = segment_sum(&a, g, pair[0], pair[1], &forbidden, controls);
        if s <= 0.0 {
            return Err(Error::precondition(format!(
                "no admissible path from {} to {}",
                g.name(pair[0]),
                g.name(pair[1])
            )));
        }
        capped |= c;
        segment_logs.push(s.ln());
    }
    let log_value = neumaier(&segment_logs);
    Ok(RayWeight { log_value, value: log_value.exp(), segment_logs, capped })
}

/// Compensated summation.
pub(crate) fn neumaier(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, RayKind, RaySpec};

    #[test]
    fn single_vertex_weight_is_one() {
        let g = Family::ray_graph().truncate(3).unwrap();
        let w = ray_weight(&g, 1.0, &[VertexId(0)], &Controls::default()).unwrap();
        assert_eq!(w.value, 1.0);
    }

    #[test]
    fn ray_graph_weight() {
        let g = Family::ray_graph().truncate(10).unwrap();
        let beta = 0.9;
        let ids: Vec<VertexId> = (1..=6).map(VertexId).collect();
        let w = ray_weight(&g, beta, &ids, &Controls::default()).unwrap();
        assert!((w.log_value + 5.0 * beta).abs() < 1e-12);
    }

    #[test]
    fn car_left_weight() {
        let g = Family::car_phase(1.0).truncate(12).unwrap();
        let beta = 2.0;
        let ids = RaySpec::new(RayKind::CarLeft).vertex_ids(&g, 8).unwrap();
        let w = ray_weight(&g, beta, &ids, &Controls::default()).unwrap();
        assert!((w.log_value + 7.0 * beta).abs() < 1e-12);
    }

    #[test]
    fn repeated_vertex_rejected() {
        let g = Family::golden().truncate(1).unwrap();
        assert!(ray_weight(&g, 1.0, &[VertexId(0), VertexId(1), VertexId(0)], &Controls::default()).is_err());
    }
}
