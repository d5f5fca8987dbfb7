use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};
use crate::spectral::{run_vector_series, Controls, SeriesStatus, WeightMatrix};

/// How the nested sets D₀ ⊏ D₁ ⊏ … are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Exhaustion {
    /// D_n = vertices at graph distance ≤ n from the base vertex.
    Bfs,
    /// Explicit shell index per vertex; D_n = {v : shell(v) ≤ n}.
    Shells(Vec<Option<usize>>),
}

/// Boundary sets ∂D_n and level matrices M(n) of an exhaustion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    #[serde(skip)]
    pub base: VertexId,
    pub beta: f64,
    #[serde(skip)]
    pub shell: Vec<Option<usize>>,
    #[serde(skip)]
    pub boundary: Vec<Vec<VertexId>>,
    /// M(n) as rows over ∂D_n and columns over ∂D_{n+1}.
    pub matrices: Vec<Vec<Vec<f64>>>,
    pub statuses: Vec<SeriesStatus>,
    pub escape_horizon: usize,
}

impl Decomposition {
    pub fn levels(&self) -> usize {
        self.boundary.len() - 1
    }

    pub fn boundary_names(&self, g: &Digraph) -> Vec<Vec<String>> {
        self.boundary.iter().map(|l| l.iter().map(|&v| g.name(v).to_string()).collect()).collect()
    }

    /// Position of `v` inside ∂D_n.
    pub fn position(&self, n: usize, v: VertexId) -> Option<usize> {
        self.boundary[n].iter().position(|&w| w == v)
    }

    pub fn in_d(&self, n: usize) -> Vec<bool> {
        self.shell.iter().map(|s| s.is_some_and(|s| s <= n)).collect()
    }
}

pub(crate) fn shells(g: &Digraph, v0: VertexId, exhaustion: &Exhaustion) -> Result<Vec<Option<usize>>> {
    let shell = match exhaustion {
        Exhaustion::Bfs => g.distances_from(v0),
        Exhaustion::Shells(s) => {
            if s.len() != g.len() {
                return Err(Error::precondition("shell vector length differs from the vertex count"));
            }
            if s[v0.0] != Some(0) {
                return Err(Error::precondition("the base vertex must form shell 0"));
            }
            for b in g.bundles() {
                if let (Some(a), Some(c)) = (s[b.src.0], s[b.dst.0]) {
                    if c > a + 1 {
                        return Err(Error::precondition("exhaustion is not interior-nested"));
                    }
                }
            }
            s.clone()
        }
    };
    if let Some(v) = g.vertices().find(|v| shell[v.0].is_none()) {
        return Err(Error::precondition(format!("vertex {} is not reached from the base vertex", g.name(v))));
    }
    Ok(shell)
}

/// Vertices of D_n with an escape: a path leaving D_n that reaches shell
/// ≥ n + horizon or a truncation-boundary vertex without re-entering D_n.
pub(crate) fn escaping(g: &Digraph, shell: &[Option<usize>], n: usize, horizon: usize) -> Vec<VertexId> {
    let inside = |v: VertexId| shell[v.0].is_some_and(|s| s <= n);
    let mut escapes = vec![false; g.len()];
    // Vertices outside D_n from which an escape target is reachable within the complement.
    let targets: Vec<VertexId> = g
        .vertices()
        .filter(|&v| !inside(v) && (g.is_boundary(v) || shell[v.0].is_some_and(|s| s >= n + horizon)))
        .collect();
    let mut queue: VecDeque<VertexId> = targets.into_iter().collect();
    for v in &queue {
        escapes[v.0] = true;
    }
    while let Some(u) = queue.pop_front() {
        for w in g.predecessors(u) {
            if !inside(w) && !escapes[w.0] {
                escapes[w.0] = true;
                queue.push_back(w);
            }
        }
    }
    g.vertices()
        .filter(|&v| inside(v) && (g.is_boundary(v) || g.successors(v).any(|w| !inside(w) && escapes[w.0])))
        .collect()
}

/// Builds ∂D_n for n = 0..=levels and the level matrices between them.
pub fn bratteli_decompose(
    g: &Digraph,
    v0: VertexId,
    exhaustion: &Exhaustion,
    beta: f64,
    levels: Option<usize>,
    escape_horizon: usize,
    controls: &Controls,
) -> Result<Decomposition> {
    let shell = shells(g, v0, exhaustion)?;
    let max_shell = shell.iter().flatten().copied().max().unwrap_or(0);
    let levels = levels.unwrap_or(max_shell).min(max_shell);
    if levels == 0 {
        return Err(Error::precondition("graph has a single shell"));
    }
    let boundary: Vec<Vec<VertexId>> = (0..=levels).map(|n| escaping(g, &shell, n, escape_horizon)).collect();
    if let Some(n) = boundary.iter().position(|b| b.is_empty()) {
        return Err(Error::precondition(format!("no wandering structure: the boundary of D_{n} is empty")));
    }
    let a = WeightMatrix::new(g, beta);
    let mut matrices = Vec::with_capacity(levels);
    let mut statuses = Vec::with_capacity(levels);
    for n in 0..levels {
        let outside: Vec<bool> = shell.iter().map(|s| s.is_some_and(|s| s > n)).collect();
        let next = &boundary[n + 1];
        // Restrict to complement vertices that can still reach ∂D_{n+1}.
        let mut relevant = vec![false; g.len()];
        let mut queue: VecDeque<VertexId> = next.iter().copied().filter(|v| outside[v.0]).collect();
        for v in &queue {
            relevant[v.0] = true;
        }
        while let Some(u) = queue.pop_front() {
            for w in g.predecessors(u) {
                if outside[w.0] && !relevant[w.0] {
                    relevant[w.0] = true;
                    queue.push_back(w);
                }
            }
        }
        let mut rows = Vec::with_capacity(boundary[n].len());
        let mut status = SeriesStatus::Converged;
        for &v in &boundary[n] {
            let mut start = vec![0.0; g.len()];
            for &(w, aw) in a.row(v) {
                if relevant[w] {
                    start[w] += aw;
                }
            }
            let est = run_vector_series(controls, start, g.boundary_flags(), |x| {
                let mut y = a.left_mul(x);
                for (yi, &r) in y.iter_mut().zip(&relevant) {
                    if !r {
                        *yi = 0.0;
                    }
                }
                y
            });
            if est.status != SeriesStatus::Converged {
                status = est.status;
            }
            rows.push(next.iter().map(|w| est.values[w.0]).collect::<Vec<f64>>());
        }
        matrices.push(rows);
        statuses.push(status);
    }
    Ok(Decomposition { base: v0, beta, shell, boundary, matrices, statuses, escape_horizon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BratteliDiagram, Family};

    #[test]
    fn bratteli_input_recovers_levels() {
        let d = BratteliDiagram::from_family(Family::car_phase(1.0)).unwrap();
        let g = d.materialize(6).unwrap();
        let v0 = g.vertex("L0:0").unwrap();
        let dec = bratteli_decompose(&g, v0, &Exhaustion::Bfs, 0.0, None, 3, &Controls::default()).unwrap();
        assert_eq!(dec.levels(), 6);
        for n in 1..=6 {
            assert_eq!(dec.boundary_names(&g)[n], vec![format!("L{n}:0"), format!("L{n}:1")]);
        }
        assert_eq!(dec.matrices[2], vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn pascal_anti_diagonals_and_bidiagonal_matrices() {
        let g = Family::pascal().truncate(8).unwrap();
        let v0 = g.vertex("(1,1)").unwrap();
        let beta = 0.5;
        let dec = bratteli_decompose(&g, v0, &Exhaustion::Bfs, beta, Some(3), 3, &Controls::default()).unwrap();
        let names = dec.boundary_names(&g);
        assert_eq!(names[2], ["(1,3)", "(2,2)", "(3,1)"].map(String::from).to_vec());
        let e = (-beta).exp();
        for n in 0..3 {
            for (i, row) in dec.matrices[n].iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    let expected = if j == i || j == i + 1 { e } else { 0.0 };
                    assert_eq!(x, expected);
                }
            }
        }
    }

    #[test]
    fn golden_has_no_wandering_structure() {
        let g = Family::golden().truncate(1).unwrap();
        let err = bratteli_decompose(&g, VertexId(0), &Exhaustion::Bfs, 1.0, None, 3, &Controls::default());
        assert!(err.is_err());
    }

    #[test]
    fn non_nested_shells_rejected() {
        let g = Family::ray_graph().truncate(4).unwrap();
        let shells = vec![Some(0), Some(2), Some(3), Some(4), Some(5)];
        let err = bratteli_decompose(&g, VertexId(0), &Exhaustion::Shells(shells), 1.0, None, 3, &Controls::default());
        assert_eq!(err.unwrap_err(), Error::precondition("exhaustion is not interior-nested"));
    }
}
