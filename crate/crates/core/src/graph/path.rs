use super::{Digraph, VertexId};
use crate::error::{Error, Result};

/// A finite path given by its bundle sequence, with cached endpoints and potential.
///
/// A length-zero path is a bare vertex with potential 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePath {
    source: VertexId,
    range: VertexId,
    arrows: Vec<usize>,
    potential: f64,
}

impl FinitePath {
    pub fn vertex(v: VertexId) -> Self {
        FinitePath { source: v, range: v, arrows: Vec::new(), potential: 0.0 }
    }

    /// Builds a path from bundle indices, checking composability.
    pub fn from_arrows(g: &Digraph, source: VertexId, arrows: Vec<usize>) -> Result<Self> {
        let mut path = FinitePath::vertex(source);
        for i in arrows {
            let b = g.bundles().get(i).ok_or_else(|| Error::precondition(format!("no arrow {i}")))?;
            if b.src != path.range {
                return Err(Error::NonComposable(format!(
                    "arrow {} -> {} does not start at {}",
                    g.name(b.src),
                    g.name(b.dst),
                    g.name(path.range)
                )));
            }
            path.arrows.push(i);
            path.potential += b.potential;
            path.range = b.dst;
        }
        Ok(path)
    }

    /// Builds a path through consecutive vertices, taking the first bundle
    /// joining each pair.
    pub fn through(g: &Digraph, vertices: &[VertexId]) -> Result<Self> {
        let first = *vertices.first().ok_or_else(|| Error::precondition("empty vertex sequence"))?;
        let mut arrows = Vec::with_capacity(vertices.len().saturating_sub(1));
        for pair in vertices.windows(2) {
            let bundle = g
                .out_bundles(pair[0])
                .iter()
                .copied()
                .find(|&i| g.bundle(i).dst == pair[1])
                .ok_or_else(|| {
                    Error::NonComposable(format!("no arrow {} -> {}", g.name(pair[0]), g.name(pair[1])))
                })?;
            arrows.push(bundle);
        }
        Self::from_arrows(g, first, arrows)
    }

    pub fn through_names(g: &Digraph, names: &[&str]) -> Result<Self> {
        let ids = names.iter().map(|n| g.vertex(n)).collect::<Result<Vec<_>>>()?;
        Self::through(g, &ids)
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn range(&self) -> VertexId {
        self.range
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn arrows(&self) -> &[usize] {
        &self.arrows
    }

    pub fn potential(&self) -> f64 {
        self.potential
    }

    /// Vertex sequence s(a_1), r(a_1), …, r(a_n).
    pub fn vertices(&self, g: &Digraph) -> Vec<VertexId> {
        let mut out = vec![self.source];
        out.extend(self.arrows.iter().map(|&i| g.bundle(i).dst));
        out
    }

    /// Concatenation; fails unless the range of `self` is the source of `other`.
    pub fn concat(&self, other: &FinitePath) -> Result<FinitePath> {
        if self.range != other.source {
            return Err(Error::NonComposable(format!(
                "range {} differs from source {}",
                self.range.0, other.source.0
            )));
        }
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&other.arrows);
        Ok(FinitePath {
            source: self.source,
            range: other.range,
            arrows,
            potential: self.potential + other.potential,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Digraph {
        let mut b = Digraph::builder();
        b.arrow_named("a", "b", 1.0, 1.0);
        b.arrow_named("b", "c", 1.0, 1.0);
        b.arrow_named("c", "c", 1.0, 0.25);
        b.build().unwrap()
    }

    #[test]
    fn identity_and_additivity() {
        let g = chain();
        let a = FinitePath::through_names(&g, &["a", "b"]).unwrap();
        let b = FinitePath::through_names(&g, &["b", "c"]).unwrap();
        let ab = a.concat(&b).unwrap();
        assert_eq!(ab.len(), 2);
        assert_eq!(ab.potential(), 2.0);
        let id = FinitePath::vertex(a.source());
        assert_eq!(id.concat(&a).unwrap(), a);
    }

    #[test]
    fn non_composable() {
        let g = chain();
        let a = FinitePath::through_names(&g, &["a", "b"]).unwrap();
        assert!(matches!(a.concat(&a), Err(Error::NonComposable(_))));
        assert!(FinitePath::through_names(&g, &["a", "c"]).is_err());
    }
}
