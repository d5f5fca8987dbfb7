use std::collections::VecDeque;

use crate::graph::{Digraph, VertexId};

/// Vertices reachable from `v` by paths whose vertices after the first
/// avoid `avoid`, together with the vertices of `avoid` that such a path
/// can land on as its final step.
pub fn reach_set_avoiding(g: &Digraph, v: VertexId, avoid: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    seen[v.0] = true;
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        for w in g.successors(u) {
            if seen[w.0] {
                continue;
            }
            seen[w.0] = true;
            if !avoid[w.0] {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// True when some path from `v` to `w` has all vertices strictly between
/// its endpoints outside `avoid`.
pub fn reaches_avoiding(g: &Digraph, v: VertexId, w: VertexId, avoid: &[bool]) -> bool {
    reach_set_avoiding(g, v, avoid)[w.0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{mask, Family};

    #[test]
    fn pascal_monotone_paths() {
        let g = Family::pascal().truncate(5).unwrap();
        let v = g.vertex("(1,1)").unwrap();
        let w = g.vertex("(3,2)").unwrap();
        assert!(reaches_avoiding(&g, v, w, &mask(g.len(), [v])));
    }

    #[test]
    fn golden_direct_arrow() {
        let g = Family::golden().truncate(1).unwrap();
        let (v0, v1) = (g.vertex("v0").unwrap(), g.vertex("v1").unwrap());
        assert!(reaches_avoiding(&g, v0, v1, &mask(g.len(), [v1])));
    }

    #[test]
    fn ray_graph_has_no_backward_paths() {
        let g = Family::ray_graph().truncate(8).unwrap();
        let (v5, v3) = (g.vertex("v5").unwrap(), g.vertex("v3").unwrap());
        assert!(!reaches_avoiding(&g, v5, v3, &vec![false; g.len()]));
    }
}
