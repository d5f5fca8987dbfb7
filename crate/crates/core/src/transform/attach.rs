use crate::error::{Error, Result};
use crate::graph::{Digraph, DigraphBuilder, VertexId};

/// A finite strongly connected digraph H^v glued to Γ at `anchor`.
#[derive(Debug, Clone)]
pub struct Attachment {
    pub vertex: VertexId,
    pub graph: Digraph,
    pub anchor: String,
}

/// Replaces each assigned vertex v by a copy of H^v, re-anchoring the
/// arrows of Γ at (v, u_v).
///
/// The anchor copy keeps the name of v, so the embedding Γ ⊆ Γ' is the
/// identity on names. The other vertices of H^v become `v/x`.
pub fn attach_finite(g: &Digraph, assignments: &[Attachment]) -> Result<Digraph> {
    let mut slot: Vec<Option<&Attachment>> = vec![None; g.len()];
    for a in assignments {
        if a.vertex.0 >= g.len() {
            return Err(Error::VertexNotFound(format!("#{}", a.vertex.0)));
        }
        if slot[a.vertex.0].is_some() {
            return Err(Error::precondition(format!("{} is assigned twice", g.name(a.vertex))));
        }
        if !a.graph.is_strongly_connected() {
            return Err(Error::precondition(format!(
                "the digraph attached at {} is not strongly connected",
                g.name(a.vertex)
            )));
        }
        if a.graph.has_boundary() {
            return Err(Error::precondition("attached digraphs must be finite"));
        }
        a.graph.vertex(&a.anchor)?;
        slot[a.vertex.0] = Some(a);
    }
    let mut b = DigraphBuilder::new().family(g.family());
    for v in g.vertices() {
        let id = b.vertex(g.name(v));
        b.set_boundary(id, g.is_boundary(v));
    }
    let copy_name = |v: VertexId, a: &Attachment, x: VertexId| {
        if a.graph.name(x) == a.anchor {
            g.name(v).to_string()
        } else {
            format!("{}/{}", g.name(v), a.graph.name(x))
        }
    };
    for v in g.vertices() {
        if let Some(a) = slot[v.0] {
            for x in a.graph.vertices() {
                let name = copy_name(v, a, x);
                if a.graph.name(x) != a.anchor && g.id(&name).is_some() {
                    return Err(Error::precondition(format!("vertex name {name} is already taken")));
                }
                b.vertex(&name);
            }
        }
    }
    for bundle in g.bundles() {
        b.arrow(bundle.src, bundle.dst, bundle.mult, bundle.potential);
    }
    for v in g.vertices() {
        if let Some(a) = slot[v.0] {
            for bundle in a.graph.bundles() {
                let s = b.id(&copy_name(v, a, bundle.src)).unwrap();
                let d = b.id(&copy_name(v, a, bundle.dst)).unwrap();
                b.arrow(s, d, bundle.mult, bundle.potential);
            }
        }
    }
    if let Some(base) = g.base() {
        b.base(base);
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ends::end_fingerprint;
    use crate::graph::{Family, RayKind, RaySpec};
    use crate::harmonic::Exhaustion;

    #[test]
    fn empty_assignment_is_identity() {
        let g = Family::pascal().truncate(5).unwrap();
        assert!(attach_finite(&g, &[]).unwrap().same_graph(&g));
    }

    #[test]
    fn loops_on_ray_graph_keep_the_end() {
        let g = Family::ray_graph().truncate(12).unwrap();
        let lp = Family::single_loop(1).truncate(0).unwrap();
        let assignments: Vec<Attachment> = g
            .vertices()
            .map(|v| Attachment { vertex: v, graph: lp.clone(), anchor: "v".into() })
            .collect();
        let h = attach_finite(&g, &assignments).unwrap();
        assert_eq!(h.len(), g.len());
        let ray = RaySpec::new(RayKind::Spine);
        for d in 0..=6 {
            let a = end_fingerprint(&g, VertexId(0), &ray, &Exhaustion::Bfs, d).unwrap();
            let b = end_fingerprint(&h, VertexId(0), &ray, &Exhaustion::Bfs, d).unwrap();
            assert_eq!(a.fingerprint, b.fingerprint);
        }
    }

    #[test]
    fn golden_on_pascal() {
        let g = Family::pascal().truncate(12).unwrap();
        let golden = Family::golden().truncate(0).unwrap();
        let v0 = g.vertex("(1,1)").unwrap();
        let h = attach_finite(&g, &[Attachment { vertex: v0, graph: golden, anchor: "v0".into() }]).unwrap();
        assert!(h.id("(1,1)/v1").is_some());
        for kind in [RayKind::PascalEnd(0), RayKind::PascalEnd(1), RayKind::PascalEnd(-2)] {
            let ray = RaySpec::new(kind);
            let a = end_fingerprint(&g, v0, &ray, &Exhaustion::Bfs, 4).unwrap();
            let b = end_fingerprint(&h, v0, &ray, &Exhaustion::Bfs, 4).unwrap();
            assert_eq!(a.fingerprint, b.fingerprint);
        }
    }

    #[test]
    fn rejects_non_strongly_connected() {
        let g = Family::ray_graph().truncate(3).unwrap();
        let chain = Family::ray_graph().truncate(2).unwrap();
        let r = attach_finite(&g, &[Attachment { vertex: VertexId(0), graph: chain, anchor: "v0".into() }]);
        assert!(r.is_err());
    }
}
