use std::collections::VecDeque;

use serde::Serialize;

use crate::graph::{Digraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "n", rename_all = "snake_case")]
pub enum AlmostUndirected {
    /// Every tested arrow has a reverse path of length at most `n`.
    Yes(usize),
    NoUpTo(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UndirectedReport {
    pub verdict: AlmostUndirected,
    pub arrows_tested: usize,
    /// Arrows skipped because a truncation-boundary vertex lies within
    /// `n_max` steps of their source.
    pub arrows_skipped: usize,
    /// An arrow without a reverse path of length ≤ n_max, if any.
    pub witness: Option<(String, String)>,
}

/// Length of the shortest path of positive length from `from` to `to`, if ≤ cap.
fn reverse_length(g: &Digraph, from: VertexId, to: VertexId, cap: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; g.len()];
    let mut queue = VecDeque::new();
    for w in g.successors(from) {
        if dist[w.0] == usize::MAX {
            dist[w.0] = 1;
            queue.push_back(w);
        }
    }
    while let Some(u) = queue.pop_front() {
        if u == to {
            return Some(dist[u.0]);
        }
        if dist[u.0] >= cap {
            continue;
        }
        for w in g.successors(u) {
            if dist[w.0] == usize::MAX {
                dist[w.0] = dist[u.0] + 1;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Smallest N ≤ n_max such that every interior arrow a has a path μ of
/// positive length ≤ N with s(μ) = r(a) and r(μ) = s(a).
pub fn almost_undirected_test(g: &Digraph, n_max: usize) -> UndirectedReport {
    // Distance from each vertex to the truncation boundary.
    let mut to_boundary = vec![usize::MAX; g.len()];
    let mut queue: VecDeque<VertexId> = g.boundary_vertices().into();
    for v in &queue {
        to_boundary[v.0] = 0;
    }
    while let Some(u) = queue.pop_front() {
        for p in g.predecessors(u) {
            if to_boundary[p.0] == usize::MAX {
                to_boundary[p.0] = to_boundary[u.0] + 1;
                queue.push_back(p);
            }
        }
    }
    let mut worst = 0;
    let mut tested = 0;
    let mut skipped = 0;
    for b in g.bundles() {
        if to_boundary[b.src.0] <= n_max {
            skipped += 1;
            continue;
        }
        tested += 1;
        match reverse_length(g, b.dst, b.src, n_max) {
            Some(n) => worst = worst.max(n),
            None => {
                return UndirectedReport {
                    verdict: AlmostUndirected::NoUpTo(n_max),
                    arrows_tested: tested,
                    arrows_skipped: skipped,
                    witness: Some((g.name(b.src).to_string(), g.name(b.dst).to_string())),
                }
            }
        }
    }
    UndirectedReport { verdict: AlmostUndirected::Yes(worst), arrows_tested: tested, arrows_skipped: skipped, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn dihedral_is_almost_undirected() {
        let g = Family::dihedral().truncate(10).unwrap();
        let r = almost_undirected_test(&g, 6);
        assert_eq!(r.verdict, AlmostUndirected::Yes(3));
        assert!(r.arrows_tested > 0);
    }

    #[test]
    fn single_loop_reverses_itself() {
        let g = Family::single_loop(1).truncate(1).unwrap();
        assert_eq!(almost_undirected_test(&g, 4).verdict, AlmostUndirected::Yes(1));
    }

    #[test]
    fn pascal_is_not() {
        let g = Family::pascal().truncate(12).unwrap();
        assert_eq!(almost_undirected_test(&g, 4).verdict, AlmostUndirected::NoUpTo(4));
    }
}
