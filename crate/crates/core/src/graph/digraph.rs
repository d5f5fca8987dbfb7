use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};

/// Dense index of a vertex inside one [`Digraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

/// A bundle of `mult` parallel arrows sharing one potential value.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub src: VertexId,
    pub dst: VertexId,
    pub mult: f64,
    pub potential: f64,
}

/// A finite row-finite multigraph with a real potential on arrows.
///
/// Vertices flagged as boundary belong to a truncation whose out-arrows are
/// not materialized yet; analyses skip them when checking sinks and residuals.
#[derive(Debug, Clone)]
pub struct Digraph {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    bundles: Vec<Bundle>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    base: Option<VertexId>,
    family: String,
}

/// Incremental constructor for [`Digraph`]; intermediate states may hold sinks.
#[derive(Debug, Clone, Default)]
pub struct DigraphBuilder {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    bundles: Vec<Bundle>,
    boundary: Vec<bool>,
    base: Option<VertexId>,
    family: Option<String>,
}

impl DigraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn family(mut self, name: impl Into<String>) -> Self {
        self.family = Some(name.into());
        self
    }

    pub fn set_family(&mut self, name: impl Into<String>) {
        self.family = Some(name.into());
    }

    /// Returns the id of `name`, declaring it if new.
    pub fn vertex(&mut self, name: &str) -> VertexId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = VertexId(self.names.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.boundary.push(false);
        id
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn arrow(&mut self, src: VertexId, dst: VertexId, mult: f64, potential: f64) {
        self.bundles.push(Bundle { src, dst, mult, potential });
    }

    /// Adds an arrow between named vertices, declaring them if needed.
    pub fn arrow_named(&mut self, src: &str, dst: &str, mult: f64, potential: f64) {
        let s = self.vertex(src);
        let d = self.vertex(dst);
        self.arrow(s, d, mult, potential);
    }

    pub fn mark_boundary(&mut self, v: VertexId) {
        self.boundary[v.0] = true;
    }

    pub fn set_boundary(&mut self, v: VertexId, flag: bool) {
        self.boundary[v.0] = flag;
    }

    pub fn base(&mut self, v: VertexId) {
        self.base = Some(v);
    }

    pub fn build(self) -> Result<Digraph> {
        for b in &self.bundles {
            if b.mult == 0.0 {
                return Err(Error::ZeroMultiplicity {
                    src: self.names[b.src.0].clone(),
                    dst: self.names[b.dst.0].clone(),
                });
            }
            if !b.mult.is_finite() || b.mult < 1.0 || b.mult.fract() != 0.0 {
                return Err(Error::schema(
                    "mult",
                    format!("multiplicity {} is not a positive integer", b.mult),
                ));
            }
            if !b.potential.is_finite() {
                return Err(Error::schema("F", "potential must be finite"));
            }
        }
        let n = self.names.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (i, b) in self.bundles.iter().enumerate() {
            out[b.src.0].push(i);
            inc[b.dst.0].push(i);
        }
        Ok(Digraph {
            names: self.names,
            index: self.index,
            bundles: self.bundles,
            out,
            inc,
            boundary: self.boundary,
            base: self.base,
            family: self.family.unwrap_or_else(|| "explicit".to_string()),
        })
    }
}

impl Digraph {
    pub fn builder() -> DigraphBuilder {
        DigraphBuilder::new()
    }

    /// Rebuilds a builder holding a copy of this graph.
    pub fn to_builder(&self) -> DigraphBuilder {
        DigraphBuilder {
            names: self.names.clone(),
            index: self.index.clone(),
            bundles: self.bundles.clone(),
            boundary: self.boundary.clone(),
            base: self.base,
            family: Some(self.family.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.names.len()).map(VertexId)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId> {
        self.id(name).ok_or_else(|| Error::VertexNotFound(name.to_string()))
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn bundle(&self, i: usize) -> &Bundle {
        &self.bundles[i]
    }

    pub fn out_bundles(&self, v: VertexId) -> &[usize] {
        &self.out[v.0]
    }

    pub fn in_bundles(&self, v: VertexId) -> &[usize] {
        &self.inc[v.0]
    }

    pub fn successors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out[v.0].iter().map(move |&i| self.bundles[i].dst)
    }

    pub fn predecessors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.inc[v.0].iter().map(move |&i| self.bundles[i].src)
    }

    pub fn out_multiplicity(&self, v: VertexId) -> f64 {
        self.out[v.0].iter().map(|&i| self.bundles[i].mult).sum()
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary[v.0]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.boundary[v.0]).collect()
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.iter().any(|&b| b)
    }

    pub fn base(&self) -> Option<VertexId> {
        self.base
    }

    /// The designated base vertex, or the first vertex when none is set.
    pub fn base_or_first(&self) -> Result<VertexId> {
        match self.base {
            Some(v) => Ok(v),
            None if !self.names.is_empty() => Ok(VertexId(0)),
            None => Err(Error::precondition("graph has no vertices")),
        }
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn with_base(mut self, v: VertexId) -> Self {
        self.base = Some(v);
        self
    }

    /// Interior vertices without out-arrows.
    pub fn sinks(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| !self.boundary[v.0] && self.out[v.0].is_empty()).collect()
    }

    pub fn require_no_sinks(&self) -> Result<()> {
        match self.sinks().first() {
            Some(&v) => Err(Error::Sink(self.names[v.0].clone())),
            None => Ok(()),
        }
    }

    /// Vertices reachable from `v` by paths of length ≥ 0.
    pub fn reachable_from(&self, v: VertexId) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([v]);
        seen[v.0] = true;
        while let Some(u) = queue.pop_front() {
            for w in self.successors(u) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Vertices from which `v` is reachable by paths of length ≥ 0.
    pub fn reaching(&self, v: VertexId) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([v]);
        seen[v.0] = true;
        while let Some(u) = queue.pop_front() {
            for w in self.predecessors(u) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Breadth-first distances from `v`; unreachable vertices get `None`.
    pub fn distances_from(&self, v: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[v.0] = Some(0);
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.0].unwrap();
            for w in self.successors(u) {
                if dist[w.0].is_none() {
                    dist[w.0] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Strongly connected component labels (Tarjan), plus the component count.
    pub fn scc(&self) -> (Vec<usize>, usize) {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comp = vec![usize::MAX; n];
        let mut next_index = 0;
        let mut ncomp = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut work: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = work.last_mut() {
                if *pos < self.out[v].len() {
                    let w = self.bundles[self.out[v][*pos]].dst.0;
                    *pos += 1;
                    if index[w] == usize::MAX {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    work.pop();
                    if let Some(&(parent, _)) = work.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp[w] = ncomp;
                            if w == v {
                                break;
                            }
                        }
                        ncomp += 1;
                    }
                }
            }
        }
        (comp, ncomp)
    }

    /// Vertices lying on at least one loop.
    pub fn on_loop(&self) -> Vec<bool> {
        let (comp, ncomp) = self.scc();
        let mut size = vec![0usize; ncomp];
        for &c in &comp {
            size[c] += 1;
        }
        let mut flags: Vec<bool> = comp.iter().map(|&c| size[c] > 1).collect();
        for b in &self.bundles {
            if b.src == b.dst {
                flags[b.src.0] = true;
            }
        }
        flags
    }

    pub fn is_strongly_connected(&self) -> bool {
        !self.is_empty() && self.scc().1 == 1
    }

    /// Subgraph induced on the vertices with `keep[v]`, preserving order and flags.
    pub fn induced(&self, keep: &[bool]) -> Digraph {
        let mut b = DigraphBuilder::new().family(self.family.clone());
        for v in self.vertices().filter(|v| keep[v.0]) {
            let id = b.vertex(&self.names[v.0]);
            if self.boundary[v.0] {
                b.mark_boundary(id);
            }
        }
        for bundle in &self.bundles {
            if keep[bundle.src.0] && keep[bundle.dst.0] {
                let s = b.id(&self.names[bundle.src.0]).unwrap();
                let d = b.id(&self.names[bundle.dst.0]).unwrap();
                b.arrow(s, d, bundle.mult, bundle.potential);
            }
        }
        if let Some(base) = self.base.filter(|v| keep[v.0]) {
            let id = b.id(&self.names[base.0]).unwrap();
            b.base(id);
        }
        b.build().expect("induced subgraph of a valid graph is valid")
    }

    /// Canonical description used for graph equality: vertex names, boundary
    /// flags and the multiset of bundles keyed by names.
    fn canonical(&self) -> Canonical {
        let verts = self.vertices().map(|v| (self.names[v.0].clone(), self.boundary[v.0])).collect();
        let mut arrows: Vec<_> = self
            .bundles
            .iter()
            .map(|b| {
                (
                    self.names[b.src.0].clone(),
                    self.names[b.dst.0].clone(),
                    b.mult.to_bits(),
                    b.potential.to_bits(),
                )
            })
            .collect();
        arrows.sort();
        (verts, arrows)
    }

    /// Equality of vertex names, boundary flags, bundles and base vertex.
    pub fn same_graph(&self, other: &Digraph) -> bool {
        let base_a = self.base.map(|v| self.names[v.0].clone());
        let base_b = other.base.map(|v| other.names[v.0].clone());
        base_a == base_b && self.canonical() == other.canonical()
    }

    /// Vertex set equality and arrow equality ignoring multiplicity splits.
    pub fn same_structure(&self, other: &Digraph) -> bool {
        let (va, aa) = self.canonical();
        let (vb, ab) = other.canonical();
        let names = |v: &BTreeSet<(String, bool)>| v.iter().map(|x| x.0.clone()).collect::<BTreeSet<_>>();
        names(&va) == names(&vb) && aa == ab
    }
}

/// Named vertices with boundary flags, and sorted arrows with exact float bits.
type Canonical = (BTreeSet<(String, bool)>, Vec<(String, String, u64, u64)>);

impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.same_graph(other) && self.family == other.family
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Digraph {
        let mut b = Digraph::builder();
        b.arrow_named("v0", "v1", 1.0, 1.0);
        b.arrow_named("v1", "v0", 1.0, 1.0);
        b.arrow_named("v1", "v1", 1.0, 1.0);
        b.build().unwrap()
    }

    #[test]
    fn golden_is_strongly_connected() {
        let g = golden();
        assert_eq!(g.len(), 2);
        assert!(g.is_strongly_connected());
        assert_eq!(g.on_loop(), vec![true, true]);
    }

    #[test]
    fn zero_multiplicity_rejected() {
        let mut b = Digraph::builder();
        b.arrow_named("a", "b", 0.0, 0.0);
        assert!(matches!(b.build(), Err(Error::ZeroMultiplicity { .. })));
    }

    #[test]
    fn sinks_skip_boundary() {
        let mut b = Digraph::builder();
        b.arrow_named("a", "b", 1.0, 0.0);
        let g = b.clone().build().unwrap();
        assert_eq!(g.sinks(), vec![VertexId(1)]);
        let id = b.id("b").unwrap();
        b.mark_boundary(id);
        assert!(b.build().unwrap().sinks().is_empty());
    }

    #[test]
    fn scc_on_chain() {
        let mut b = Digraph::builder();
        b.arrow_named("a", "b", 1.0, 0.0);
        b.arrow_named("b", "c", 1.0, 0.0);
        b.arrow_named("c", "b", 1.0, 0.0);
        let g = b.build().unwrap();
        let (comp, n) = g.scc();
        assert_eq!(n, 2);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[0], comp[1]);
        assert_eq!(g.on_loop(), vec![false, true, true]);
    }
}
