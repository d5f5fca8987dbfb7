use serde::Serialize;

use super::reach::reach_set_avoiding;
use crate::error::{Error, Result};
use crate::graph::{BratteliDiagram, Digraph, LevelArrow, LevelBlocks, Tail, VertexId};
use crate::harmonic::decompose::{escaping, shells};
use crate::harmonic::{bratteli_decompose, Exhaustion};
use crate::spectral::{Controls, SeriesStatus};

/// Br(Γ) together with the data needed to map rays into it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BratteliReduction {
    #[serde(skip)]
    pub diagram: BratteliDiagram,
    /// ∂D_n for each level, as vertex names of Γ.
    pub levels: Vec<Vec<String>>,
    pub beta: Option<f64>,
    /// Convergence of the weighted path sums behind each level matrix.
    pub statuses: Vec<SeriesStatus>,
    #[serde(skip)]
    pub shell: Vec<Option<usize>>,
    #[serde(skip)]
    pub boundary: Vec<Vec<VertexId>>,
}

impl BratteliReduction {
    /// The computed levels of Br(Γ) as a graph whose deepest level is
    /// flagged as truncation boundary.
    pub fn truncation(&self) -> Result<Digraph> {
        let last = self.levels.len() - 1;
        let g = self.diagram.materialize(last)?;
        let mut b = g.to_builder();
        for name in &self.levels[last] {
            let v = g.vertex(name)?;
            b.mark_boundary(v);
        }
        b.build()
    }

    /// π(y) on a ray prefix: for each level n, the last prefix vertex in
    /// D_n, provided the prefix leaves D_n afterwards.
    pub fn pi(&self, g: &Digraph, prefix: &[VertexId]) -> Vec<Option<String>> {
        (0..self.levels.len())
            .map(|n| {
                let inside = |v: VertexId| self.shell[v.0].is_some_and(|s| s <= n);
                let j = prefix.iter().rposition(|&v| inside(v))?;
                (j + 1 < prefix.len()).then(|| g.name(prefix[j]).to_string())
            })
            .collect()
    }
}

/// Builds Br(Γ) on the sets ∂D_n, with an arrow v → w whenever L_{D_n}(v,w)
/// is nonempty. With a β the arrow carries F_β = −log Σ_{μ∈L_{D_n}(v,w)} e^{−βF(μ)}.
pub fn graph_to_bratteli(
    g: &Digraph,
    v0: VertexId,
    exhaustion: &Exhaustion,
    beta: Option<f64>,
    levels: Option<usize>,
    escape_horizon: usize,
    controls: &Controls,
) -> Result<BratteliReduction> {
    let (shell, boundary, arrows, statuses) = match beta {
        Some(b) => {
            let dec = bratteli_decompose(g, v0, exhaustion, b, levels, escape_horizon, controls)?;
            if let Some(s) = dec.statuses.iter().find(|s| **s != SeriesStatus::Converged) {
                return Err(Error::undetermined(format!("level matrix series is {s:?}")));
            }
            let arrows: Vec<Vec<LevelArrow>> = dec
                .matrices
                .iter()
                .map(|m| {
                    let mut out = Vec::new();
                    for (i, row) in m.iter().enumerate() {
                        for (j, &x) in row.iter().enumerate() {
                            if x > 0.0 {
                                out.push(LevelArrow { src_idx: i, dst_idx: j, mult: 1.0, potential: -x.ln() });
                            }
                        }
                    }
                    out
                })
                .collect();
            (dec.shell, dec.boundary, arrows, dec.statuses)
        }
        None => {
            let shell = shells(g, v0, exhaustion)?;
            let max_shell = shell.iter().flatten().copied().max().unwrap_or(0);
            let levels = levels.unwrap_or(max_shell).min(max_shell);
            let boundary: Vec<Vec<VertexId>> = (0..=levels).map(|n| escaping(g, &shell, n, escape_horizon)).collect();
            if let Some(n) = boundary.iter().position(|b| b.is_empty()) {
                return Err(Error::precondition(format!("no wandering structure: the boundary of D_{n} is empty")));
            }
            let mut arrows = Vec::with_capacity(levels);
            for n in 0..levels {
                let in_d: Vec<bool> = shell.iter().map(|s| s.is_some_and(|s| s <= n)).collect();
                let mut out = Vec::new();
                for (i, &v) in boundary[n].iter().enumerate() {
                    let r = reach_set_avoiding(g, v, &in_d);
                    for (j, &w) in boundary[n + 1].iter().enumerate() {
                        if !in_d[w.0] && r[w.0] {
                            out.push(LevelArrow { src_idx: i, dst_idx: j, mult: 1.0, potential: 0.0 });
                        }
                    }
                }
                arrows.push(out);
            }
            let n = arrows.len();
            (shell, boundary, arrows, vec![SeriesStatus::Converged; n])
        }
    };
    let mut names: Vec<Vec<String>> =
        boundary.iter().map(|l| l.iter().map(|&v| g.name(v).to_string()).collect()).collect();
    let mut seen = std::collections::HashSet::new();
    if !names.iter().flatten().all(|n| seen.insert(n.clone())) {
        for (n, level) in names.iter_mut().enumerate() {
            for name in level.iter_mut() {
                *name = format!("{n}:{name}");
            }
        }
    }
    let blocks = LevelBlocks { levels: names.clone(), level_arrows: arrows, tail: Tail::None };
    let diagram = BratteliDiagram::from_blocks(blocks)?;
    Ok(BratteliReduction { diagram, levels: names, beta, statuses, shell, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, RayKind, RaySpec};

    #[test]
    fn bratteli_input_is_fixed() {
        let d = BratteliDiagram::from_family(Family::car_phase(1.0)).unwrap();
        let g = d.materialize(8).unwrap();
        let r = graph_to_bratteli(&g, VertexId(0), &Exhaustion::Bfs, None, None, 2, &Controls::default()).unwrap();
        let back = r.diagram.materialize(8).unwrap();
        let pairs = |h: &Digraph| {
            let mut p: Vec<(String, String)> =
                h.bundles().iter().map(|b| (h.name(b.src).to_string(), h.name(b.dst).to_string())).collect();
            p.sort();
            p
        };
        assert_eq!(pairs(&back), pairs(&g));
    }

    #[test]
    fn pascal_is_bidiagonal() {
        let g = Family::pascal().truncate(10).unwrap();
        let beta = 1.0;
        let r = graph_to_bratteli(&g, VertexId(0), &Exhaustion::Bfs, Some(beta), Some(6), 3, &Controls::default())
            .unwrap();
        let b = r.truncation().unwrap();
        assert_eq!(b.boundary_vertices().len(), 7);
        for v in b.vertices().filter(|&v| !b.is_boundary(v)) {
            assert_eq!(b.out_bundles(v).len(), 2);
            for &i in b.out_bundles(v) {
                assert!((b.bundle(i).potential - beta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pi_of_diagonal_ray() {
        let g = Family::pascal().truncate(10).unwrap();
        let r = graph_to_bratteli(&g, VertexId(0), &Exhaustion::Bfs, None, Some(4), 3, &Controls::default()).unwrap();
        let prefix = RaySpec::new(RayKind::PascalEnd(0)).vertex_ids(&g, 8).unwrap();
        let pi = r.pi(&g, &prefix);
        let expected = ["(1,1)", "(2,1)", "(2,2)", "(3,2)", "(3,3)"];
        for (p, e) in pi.iter().zip(expected) {
            assert_eq!(p.as_deref(), Some(e));
        }
    }
}
