use super::{Digraph, DigraphBuilder, Family};
use crate::error::{Error, Result};

/// One bundle between consecutive levels, addressed by position in each level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelArrow {
    pub src_idx: usize,
    pub dst_idx: usize,
    pub mult: f64,
    pub potential: f64,
}

/// How levels continue past the explicitly listed blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum Tail {
    None,
    Repeat,
    Family(Box<Family>),
}

/// Explicit level blocks plus a tail rule.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelBlocks {
    pub levels: Vec<Vec<String>>,
    pub level_arrows: Vec<Vec<LevelArrow>>,
    pub tail: Tail,
}

/// Uniform access to graphs organized in levels.
pub trait Levels {
    fn width(&self, n: usize) -> usize;
    fn level_names(&self, n: usize) -> Vec<String>;
    /// Bundles from level `n` to level `n + 1`.
    fn transition(&self, n: usize) -> Vec<LevelArrow>;
    /// Deepest available level, `None` when levels continue forever.
    fn last_level(&self) -> Option<usize>;
}

pub(crate) fn generated_name(level: usize, idx: usize) -> String {
    format!("L{level}:{idx}")
}

impl LevelBlocks {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::schema("levels", "at least one level is required"));
        }
        for (n, level) in self.levels.iter().enumerate() {
            if level.is_empty() {
                return Err(Error::schema(format!("levels[{n}]"), "level is empty"));
            }
        }
        if self.level_arrows.len() + 1 != self.levels.len() {
            return Err(Error::schema(
                "level_arrows",
                format!("expected {} transition blocks, found {}", self.levels.len() - 1, self.level_arrows.len()),
            ));
        }
        let last = self.levels.len() - 1;
        match &self.tail {
            Tail::None => {}
            Tail::Repeat => {
                if self.level_arrows.is_empty() {
                    return Err(Error::schema("tail", "repeat needs at least one transition block"));
                }
            }
            Tail::Family(f) => {
                if f.level_width(last).is_none() {
                    return Err(Error::schema("tail", format!("family {} has no level structure", f.name())));
                }
                if f.level_width(last) != Some(self.levels[last].len()) {
                    return Err(Error::schema("tail", "family level width does not match the last block"));
                }
            }
        }
        let depth_to_check = if matches!(self.tail, Tail::Repeat) { last + 1 } else { last };
        for n in 0..depth_to_check {
            let (ws, wd) = (self.width(n), self.width(n + 1));
            for a in self.transition(n) {
                if a.src_idx >= ws || a.dst_idx >= wd {
                    return Err(Error::DanglingEndpoint(format!("level {n} arrow {}->{}", a.src_idx, a.dst_idx)));
                }
            }
        }
        Ok(())
    }
}

impl Levels for LevelBlocks {
    fn width(&self, n: usize) -> usize {
        if n < self.levels.len() {
            return self.levels[n].len();
        }
        match &self.tail {
            Tail::None => 0,
            Tail::Repeat => self.levels.last().unwrap().len(),
            Tail::Family(f) => f.level_width(n).unwrap_or(0),
        }
    }

    fn level_names(&self, n: usize) -> Vec<String> {
        if n < self.levels.len() {
            return self.levels[n].clone();
        }
        match &self.tail {
            Tail::None => Vec::new(),
            Tail::Repeat => (0..self.width(n)).map(|i| generated_name(n, i)).collect(),
            Tail::Family(f) => f.level_names(n),
        }
    }

    fn transition(&self, n: usize) -> Vec<LevelArrow> {
        if n < self.level_arrows.len() {
            return self.level_arrows[n].clone();
        }
        match &self.tail {
            Tail::None => Vec::new(),
            Tail::Repeat => self.level_arrows.last().cloned().unwrap_or_default(),
            Tail::Family(f) => f.level_transition(n),
        }
    }

    fn last_level(&self) -> Option<usize> {
        match self.tail {
            Tail::None => Some(self.levels.len() - 1),
            _ => None,
        }
    }
}

/// Materializes levels `0..=depth` of a leveled structure; the deepest
/// materialized level is flagged as boundary unless it is the true last level.
pub fn materialize_levels<L: Levels + ?Sized>(src: &L, depth: usize, family: &str) -> Result<Digraph> {
    let depth = src.last_level().map_or(depth, |last| depth.min(last));
    let mut b = DigraphBuilder::new().family(family);
    let mut ids = Vec::with_capacity(depth + 1);
    let mut total = 0usize;
    for n in 0..=depth {
        let names = src.level_names(n);
        total += names.len();
        if total > super::family::VERTEX_CAP {
            return Err(Error::ResourceCap(format!("more than {} vertices", super::family::VERTEX_CAP)));
        }
        ids.push(names.iter().map(|name| b.vertex(name)).collect::<Vec<_>>());
    }
    for n in 0..depth {
        for a in src.transition(n) {
            let s = *ids[n].get(a.src_idx).ok_or_else(|| Error::DanglingEndpoint(format!("level {n} index {}", a.src_idx)))?;
            let d = *ids[n + 1]
                .get(a.dst_idx)
                .ok_or_else(|| Error::DanglingEndpoint(format!("level {} index {}", n + 1, a.dst_idx)))?;
            b.arrow(s, d, a.mult, a.potential);
        }
    }
    if src.last_level() != Some(depth) {
        for &v in &ids[depth] {
            b.mark_boundary(v);
        }
    }
    if let Some(&first) = ids[0].first() {
        b.base(first);
    }
    b.build()
}

/// How a [`LevelGeneratedGraph`] produces its truncations.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelRule {
    Blocks(LevelBlocks),
    Family(Family),
}

/// A countable graph realized through coherent truncations.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGeneratedGraph {
    pub rule: LevelRule,
}

impl LevelGeneratedGraph {
    pub fn family(f: Family) -> Self {
        LevelGeneratedGraph { rule: LevelRule::Family(f) }
    }

    pub fn blocks(blocks: LevelBlocks) -> Result<Self> {
        blocks.validate()?;
        Ok(LevelGeneratedGraph { rule: LevelRule::Blocks(blocks) })
    }

    pub fn truncate(&self, depth: usize) -> Result<Digraph> {
        if depth == 0 {
            return Err(Error::precondition("depth must be at least 1"));
        }
        match &self.rule {
            LevelRule::Blocks(b) => materialize_levels(b, depth, "leveled"),
            LevelRule::Family(f) => f.truncate(depth),
        }
    }

    pub fn family_ref(&self) -> Option<&Family> {
        match &self.rule {
            LevelRule::Family(f) => Some(f),
            LevelRule::Blocks(_) => None,
        }
    }
}

/// A Bratteli diagram: singleton top level, arrows only between consecutive
/// levels, no sinks, and the top vertex as the only source.
#[derive(Debug, Clone, PartialEq)]
pub struct BratteliDiagram {
    rule: LevelRule,
}

impl BratteliDiagram {
    pub fn from_blocks(blocks: LevelBlocks) -> Result<Self> {
        blocks.validate()?;
        let d = BratteliDiagram { rule: LevelRule::Blocks(blocks) };
        d.check_shape()?;
        Ok(d)
    }

    pub fn from_family(f: Family) -> Result<Self> {
        if f.level_width(0).is_none() {
            return Err(Error::precondition(format!("family {} is not a Bratteli diagram", f.name())));
        }
        let d = BratteliDiagram { rule: LevelRule::Family(f) };
        d.check_shape()?;
        Ok(d)
    }

    pub fn rule(&self) -> &LevelRule {
        &self.rule
    }

    pub fn blocks(&self) -> Option<&LevelBlocks> {
        match &self.rule {
            LevelRule::Blocks(b) => Some(b),
            LevelRule::Family(_) => None,
        }
    }

    fn check_shape(&self) -> Result<()> {
        if self.width(0) != 1 {
            return Err(Error::schema("levels[0]", "top level must be a singleton"));
        }
        let horizon = self.last_level().unwrap_or(6);
        for n in 0..horizon {
            let arrows = self.transition(n);
            let mut has_out = vec![false; self.width(n)];
            let mut has_in = vec![false; self.width(n + 1)];
            for a in &arrows {
                has_out[a.src_idx] = true;
                has_in[a.dst_idx] = true;
            }
            if let Some(i) = has_out.iter().position(|&x| !x) {
                return Err(Error::Sink(self.level_names(n)[i].clone()));
            }
            if let Some(i) = has_in.iter().position(|&x| !x) {
                return Err(Error::schema(
                    format!("levels[{}]", n + 1),
                    format!("vertex {} is a source other than the top vertex", self.level_names(n + 1)[i]),
                ));
            }
        }
        Ok(())
    }

    pub fn top_vertex(&self) -> String {
        self.level_names(0)[0].clone()
    }

    pub fn materialize(&self, depth: usize) -> Result<Digraph> {
        match &self.rule {
            LevelRule::Blocks(b) => materialize_levels(b, depth, "bratteli"),
            LevelRule::Family(f) => materialize_levels(f, depth, f.name()),
        }
    }

    pub fn as_level_graph(&self) -> LevelGeneratedGraph {
        LevelGeneratedGraph { rule: self.rule.clone() }
    }
}

impl Levels for BratteliDiagram {
    fn width(&self, n: usize) -> usize {
        match &self.rule {
            LevelRule::Blocks(b) => b.width(n),
            LevelRule::Family(f) => f.width(n),
        }
    }

    fn level_names(&self, n: usize) -> Vec<String> {
        match &self.rule {
            LevelRule::Blocks(b) => b.level_names(n),
            LevelRule::Family(f) => Levels::level_names(f, n),
        }
    }

    fn transition(&self, n: usize) -> Vec<LevelArrow> {
        match &self.rule {
            LevelRule::Blocks(b) => b.transition(n),
            LevelRule::Family(f) => f.transition(n),
        }
    }

    fn last_level(&self) -> Option<usize> {
        match &self.rule {
            LevelRule::Blocks(b) => b.last_level(),
            LevelRule::Family(f) => f.last_level(),
        }
    }
}

impl Levels for Family {
    fn width(&self, n: usize) -> usize {
        self.level_width(n).unwrap_or(0)
    }

    fn level_names(&self, n: usize) -> Vec<String> {
        Family::level_names(self, n)
    }

    fn transition(&self, n: usize) -> Vec<LevelArrow> {
        self.level_transition(n)
    }

    fn last_level(&self) -> Option<usize> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_chains() -> LevelBlocks {
        let arrow = |s, d| LevelArrow { src_idx: s, dst_idx: d, mult: 1.0, potential: 1.0 };
        LevelBlocks {
            levels: vec![vec!["top".into()], vec!["a1".into(), "b1".into()], vec!["a2".into(), "b2".into()]],
            level_arrows: vec![vec![arrow(0, 0), arrow(0, 1)], vec![arrow(0, 0), arrow(1, 1)]],
            tail: Tail::Repeat,
        }
    }

    #[test]
    fn repeat_tail_extends_coherently() {
        let d = BratteliDiagram::from_blocks(two_chains()).unwrap();
        let g3 = d.materialize(3).unwrap();
        let g5 = d.materialize(5).unwrap();
        assert_eq!(g3.len(), 7);
        assert_eq!(g5.len(), 11);
        assert!(g5.id("L5:1").is_some());
        assert!(g3.is_boundary(g3.vertex("L3:0").unwrap()));
    }

    #[test]
    fn top_must_be_singleton() {
        let mut b = two_chains();
        b.levels.remove(0);
        b.level_arrows.remove(0);
        assert!(BratteliDiagram::from_blocks(b).is_err());
    }

    #[test]
    fn finite_blocks_have_no_boundary_at_full_depth() {
        let mut b = two_chains();
        b.tail = Tail::None;
        let g = LevelGeneratedGraph::blocks(b).unwrap().truncate(9).unwrap();
        assert_eq!(g.len(), 5);
        assert!(!g.has_boundary());
    }
}
