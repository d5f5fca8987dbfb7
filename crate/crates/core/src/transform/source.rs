use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Digraph, DigraphBuilder, VertexId};
use crate::harmonic::{HarmonicMode, HarmonicVector};
use crate::spectral::{simple_path_column, Controls, SeriesStatus};

/// Vertices from which some path runs forever or reaches the truncation
/// boundary. Everything else is a dead end.
fn alive(g: &Digraph) -> Vec<bool> {
    let mut live = g.on_loop();
    for v in g.boundary_vertices() {
        live[v.0] = true;
    }
    let mut queue: VecDeque<VertexId> = g.vertices().filter(|v| live[v.0]).collect();
    while let Some(u) = queue.pop_front() {
        for p in g.predecessors(u) {
            if !live[p.0] {
                live[p.0] = true;
                queue.push_back(p);
            }
        }
    }
    live
}

/// Γ^{v₀}: deletes every arrow into `v0`, then prunes dead ends.
pub fn turn_into_source(g: &Digraph, v0: VertexId) -> Result<Digraph> {
    if v0.0 >= g.len() {
        return Err(Error::VertexNotFound(format!("#{}", v0.0)));
    }
    let mut b = DigraphBuilder::new().family(g.family());
    for v in g.vertices() {
        let id = b.vertex(g.name(v));
        b.set_boundary(id, g.is_boundary(v));
    }
    for bundle in g.bundles().iter().filter(|b| b.dst != v0) {
        b.arrow(bundle.src, bundle.dst, bundle.mult, bundle.potential);
    }
    b.base(v0);
    let cut = b.build()?;
    let keep = alive(&cut);
    if !keep[v0.0] {
        return Err(Error::precondition(format!(
            "{} is a dead end once its incoming arrows are removed",
            g.name(v0)
        )));
    }
    Ok(cut.induced(&keep))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferDirection {
    /// φ on Γ to ψ on Γ^{v₀}.
    Forward,
    /// ψ on Γ^{v₀} back to φ on Γ.
    Inverse,
}

const HARMONIC_TOL: f64 = 1e-8;

fn check_harmonic(g: &Digraph, psi: &HarmonicVector, what: &str) -> Result<()> {
    let report = psi.residuals(g, HarmonicMode::Harmonic)?;
    let scale = psi.values.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
    if report.residual_max > HARMONIC_TOL * scale {
        return Err(Error::precondition(format!(
            "{what} is not harmonic (residual {:.3e})",
            report.residual_max
        )));
    }
    Ok(())
}

/// Moves a normalized harmonic vector between Γ and Γ^{v₀} through
/// ψ_v = (φ_v − R(v,v₀)) / (1 − R(v₀,v₀)).
///
/// `g` is always the original graph Γ. In the forward direction `phi`
/// lives on Γ and the result on `turn_into_source(g, v0)`; the inverse
/// direction takes a vector on Γ^{v₀} and returns one on Γ.
pub fn transfer_harmonic_source(
    g: &Digraph,
    beta: f64,
    v0: VertexId,
    phi: &HarmonicVector,
    direction: TransferDirection,
    controls: &Controls,
) -> Result<HarmonicVector> {
    let source = turn_into_source(g, v0)?;
    let (domain, codomain) = match direction {
        TransferDirection::Forward => (g, &source),
        TransferDirection::Inverse => (&source, g),
    };
    if phi.values.len() != domain.len() {
        return Err(Error::precondition("vector length differs from the vertex count of its graph"));
    }
    let base_in = domain.vertex(g.name(v0))?;
    if phi.base != base_in || (phi.values[base_in.0] - 1.0).abs() > 1e-12 {
        return Err(Error::precondition("input vector is not normalized at the base vertex"));
    }
    check_harmonic(domain, phi, "input vector")?;

    let r = simple_path_column(g, beta, v0, controls);
    if r.status != SeriesStatus::Converged {
        return Err(Error::undetermined(format!("simple-path column is {:?}", r.status)));
    }
    let r00 = r.values[v0.0];
    if r00 >= 1.0 - 1e-12 {
        return Err(Error::precondition(format!("not transient at the base vertex: R(v0,v0) = {r00}")));
    }
    let scale = 1.0 - r00;

    let mut values = vec![0.0; codomain.len()];
    let mut excluded = vec![false; codomain.len()];
    for v in codomain.vertices() {
        let gv = g.vertex(codomain.name(v))?;
        let rv = if gv == v0 { 0.0 } else { r.values[gv.0] };
        let (x, skip) = match direction {
            TransferDirection::Forward => {
                let p = phi.values[gv.0];
                let x = if gv == v0 { 1.0 } else { (p - rv) / scale };
                (x, phi.excluded[gv.0])
            }
            TransferDirection::Inverse => match source.id(codomain.name(v)) {
                Some(s) => {
                    let x = if gv == v0 { 1.0 } else { scale * phi.values[s.0] + rv };
                    (x, phi.excluded[s.0])
                }
                None => (rv, false),
            },
        };
        if x < -HARMONIC_TOL {
            return Err(Error::Inconsistency(format!(
                "negative value {x:.3e} at {}: the input is not harmonic or R is under-resolved",
                codomain.name(v)
            )));
        }
        values[v.0] = x.max(0.0);
        excluded[v.0] = skip;
    }
    let base = codomain.vertex(g.name(v0))?;
    Ok(HarmonicVector { beta, base, values, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;
    use crate::harmonic::extend_from_boundary;

    #[test]
    fn golden_source() {
        let g = Family::golden().truncate(0).unwrap();
        let s = turn_into_source(&g, VertexId(0)).unwrap();
        let mut pairs: Vec<(String, String)> =
            s.bundles().iter().map(|b| (s.name(b.src).to_string(), s.name(b.dst).to_string())).collect();
        pairs.sort();
        assert_eq!(pairs, [("v0".to_string(), "v1".to_string()), ("v1".to_string(), "v1".to_string())]);
        assert!(turn_into_source(&s, VertexId(0)).unwrap().same_graph(&s));
    }

    #[test]
    fn stranded_chain_pruned() {
        let mut b = DigraphBuilder::new();
        b.arrow_named("v0", "a", 1.0, 1.0);
        b.arrow_named("a", "b", 1.0, 1.0);
        b.arrow_named("b", "v0", 1.0, 1.0);
        b.arrow_named("v0", "c", 1.0, 1.0);
        b.arrow_named("c", "c", 1.0, 1.0);
        let g = b.build().unwrap();
        let s = turn_into_source(&g, VertexId(0)).unwrap();
        let names: Vec<&str> = s.vertices().map(|v| s.name(v)).collect();
        assert_eq!(names, ["v0", "c"]);
    }

    #[test]
    fn golden_has_nothing_to_transfer() {
        let g = Family::golden().truncate(0).unwrap();
        let phi = HarmonicVector::new(2f64.ln(), VertexId(0), vec![1.0, 1.0]);
        let r = transfer_harmonic_source(&g, 2f64.ln(), VertexId(0), &phi, TransferDirection::Forward, &Controls::default());
        assert!(r.is_err());
    }

    #[test]
    fn round_trip_on_truncated_tree() {
        let g = Family::regular_tree(2).truncate(4).unwrap();
        let v0 = g.base_or_first().unwrap();
        let beta = 1.5;
        let boundary: Vec<(VertexId, f64)> =
            g.boundary_vertices().into_iter().enumerate().map(|(i, v)| (v, 1.0 + i as f64 * 0.25)).collect();
        let phi = extend_from_boundary(&g, beta, v0, &boundary).unwrap();
        let c = Controls::default();
        let psi = transfer_harmonic_source(&g, beta, v0, &phi, TransferDirection::Forward, &c).unwrap();
        let src = turn_into_source(&g, v0).unwrap();
        assert!(psi.residuals(&src, HarmonicMode::Harmonic).unwrap().residual_max < 1e-9);
        let back = transfer_harmonic_source(&g, beta, v0, &psi, TransferDirection::Inverse, &c).unwrap();
        for v in g.vertices() {
            assert!((back.values[v.0] - phi.values[v.0]).abs() < 1e-9);
        }
    }
}
