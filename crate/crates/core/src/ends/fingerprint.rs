use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Digraph, RaySpec, VertexId};
use crate::harmonic::decompose::shells;
use crate::harmonic::Exhaustion;

/// The chain I_n = [D_n]_p of an end at finite resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndApprox {
    pub ray: String,
    pub depth: usize,
    /// Shell layers D_n \ D_{n−1}, sorted.
    pub exhaustion: Vec<Vec<String>>,
    /// I_0, …, I_depth as sorted vertex names.
    pub fingerprint: Vec<Vec<String>>,
    /// π_{D_{n+1},D_n}(I_{n+1}) = I_n held at every level.
    pub coherent: bool,
    /// No arrow shortcuts the materialized ray prefix.
    pub reduced_prefix: bool,
    #[serde(skip)]
    pub shell: Vec<Option<usize>>,
    #[serde(skip)]
    pub levels: Vec<Vec<VertexId>>,
}

impl EndApprox {
    /// Whether two fingerprints agree on levels 0..=depth.
    pub fn agrees_with(&self, other: &EndApprox, depth: usize) -> bool {
        let d = depth.min(self.depth).min(other.depth);
        self.fingerprint[..=d] == other.fingerprint[..=d]
    }

    pub(crate) fn in_d(&self, n: usize) -> Vec<bool> {
        self.shell.iter().map(|s| s.is_some_and(|s| s <= n)).collect()
    }
}

fn inside(shell: &[Option<usize>], n: usize) -> Vec<bool> {
    shell.iter().map(|s| s.is_some_and(|s| s <= n)).collect()
}

/// Vertices of D_n with an arrow into the set of complement vertices that
/// reach `targets` without entering D_n.
fn entering(g: &Digraph, in_d: &[bool], targets: impl IntoIterator<Item = VertexId>) -> Vec<VertexId> {
    let mut hit = vec![false; g.len()];
    let mut queue = VecDeque::new();
    for t in targets {
        if !in_d[t.0] && !hit[t.0] {
            hit[t.0] = true;
            queue.push_back(t);
        }
    }
    while let Some(u) = queue.pop_front() {
        for p in g.predecessors(u) {
            if !in_d[p.0] && !hit[p.0] {
                hit[p.0] = true;
                queue.push_back(p);
            }
        }
    }
    g.vertices().filter(|&v| in_d[v.0] && g.successors(v).any(|w| hit[w.0])).collect()
}

/// π_{D_{n+1},D_n}: the image in X_{D_n} of a fingerprint at level n + 1.
pub fn bonding_map(g: &Digraph, shell: &[Option<usize>], n: usize, fine: &[VertexId]) -> Vec<VertexId> {
    let in_d = inside(shell, n);
    let mut out = entering(g, &in_d, fine.iter().copied());
    out.extend(fine.iter().copied().filter(|v| in_d[v.0]));
    out.sort();
    out.dedup();
    out
}

/// True when no arrow joins two prefix vertices at least two steps apart.
pub fn is_reduced_prefix(g: &Digraph, prefix: &[VertexId]) -> bool {
    let mut pos = vec![usize::MAX; g.len()];
    for (i, v) in prefix.iter().enumerate() {
        pos[v.0] = i;
    }
    prefix
        .iter()
        .enumerate()
        .all(|(i, &v)| g.successors(v).all(|w| pos[w.0] == usize::MAX || pos[w.0] <= i + 1))
}

fn sorted_names(g: &Digraph, vs: &[VertexId]) -> Vec<String> {
    let mut names: Vec<String> = vs.iter().map(|&v| g.name(v).to_string()).collect();
    names.sort();
    names
}

pub fn end_fingerprint(
    g: &Digraph,
    v0: VertexId,
    ray: &RaySpec,
    exhaustion: &Exhaustion,
    depth: usize,
) -> Result<EndApprox> {
    let shell = shells(g, v0, exhaustion)?;
    let len = ray.materialized_len(g, g.len() + 1);
    if len == 0 {
        return Err(Error::precondition(format!("ray {ray} has no materialized vertex")));
    }
    let ids = ray.vertex_ids(g, len)?;
    let last = *ids.last().unwrap();
    if shell[last.0].is_none_or(|s| s <= depth) {
        return Err(Error::precondition(format!(
            "ray prefix too short: {} does not leave D_{depth}",
            ray
        )));
    }
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let mut i_n = entering(g, &inside(&shell, n), [last]);
        i_n.sort();
        levels.push(i_n);
    }
    let coherent = (0..depth).all(|n| bonding_map(g, &shell, n, &levels[n + 1]) == levels[n]);
    let max_shell = shell.iter().flatten().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); max_shell.min(depth) + 1];
    for v in g.vertices() {
        if let Some(s) = shell[v.0].filter(|&s| s <= depth) {
            layers[s].push(v);
        }
    }
    Ok(EndApprox {
        ray: ray.to_string(),
        depth,
        exhaustion: layers.iter().map(|l| sorted_names(g, l)).collect(),
        fingerprint: levels.iter().map(|l| sorted_names(g, l)).collect(),
        coherent,
        reduced_prefix: is_reduced_prefix(g, &ids),
        shell,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, RayKind};

    #[test]
    fn pascal_bottom_row() {
        let g = Family::pascal().truncate(12).unwrap();
        let v0 = g.vertex("(1,1)").unwrap();
        let e = end_fingerprint(&g, v0, &RaySpec::new(RayKind::PascalEnd(1)), &Exhaustion::Bfs, 6).unwrap();
        for n in 0..=6 {
            assert_eq!(e.fingerprint[n], vec![format!("(1,{})", n + 1)]);
        }
        assert!(e.coherent);
        assert!(e.reduced_prefix);
    }

    #[test]
    fn pascal_diagonal_differs_from_column_two() {
        let g = Family::pascal().truncate(14).unwrap();
        let v0 = g.vertex("(1,1)").unwrap();
        let t0 = end_fingerprint(&g, v0, &RaySpec::new(RayKind::PascalEnd(0)), &Exhaustion::Bfs, 5).unwrap();
        let t2 = end_fingerprint(&g, v0, &RaySpec::new(RayKind::PascalEnd(2)), &Exhaustion::Bfs, 5).unwrap();
        assert!(t0.agrees_with(&t2, 1));
        assert!(!t0.agrees_with(&t2, 3));
    }

    #[test]
    fn dihedral_two_ends() {
        let g = Family::dihedral().truncate(12).unwrap();
        let v0 = g.vertex("t0").unwrap();
        let fp = |k| end_fingerprint(&g, v0, &RaySpec::new(k), &Exhaustion::Bfs, 5).unwrap();
        let up = fp(RayKind::DihedralTop(0));
        let up2 = fp(RayKind::DihedralTop(3));
        let down = fp(RayKind::DihedralBottom(0));
        let down2 = fp(RayKind::DihedralBottom(-2));
        assert!(up.agrees_with(&up2, 5));
        assert!(down.agrees_with(&down2, 5));
        assert!(!up.agrees_with(&down, 5));
    }

    #[test]
    fn short_prefix_rejected() {
        let g = Family::ray_graph().truncate(4).unwrap();
        let r = end_fingerprint(&g, VertexId(0), &RaySpec::new(RayKind::Spine), &Exhaustion::Bfs, 4);
        assert!(r.is_err());
    }

    #[test]
    fn shortcut_detected() {
        let mut b = crate::graph::DigraphBuilder::new();
        b.arrow_named("a", "b", 1.0, 1.0);
        b.arrow_named("b", "c", 1.0, 1.0);
        b.arrow_named("c", "c", 1.0, 1.0);
        let g = b.build().unwrap();
        let ids = [VertexId(0), VertexId(1), VertexId(2)];
        assert!(is_reduced_prefix(&g, &ids));
        let mut b = g.to_builder();
        b.arrow_named("a", "c", 1.0, 1.0);
        let g = b.build().unwrap();
        assert!(!is_reduced_prefix(&g, &ids));
    }
}
