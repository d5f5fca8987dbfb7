use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::fingerprint::EndApprox;
use super::reach::reach_set_avoiding;
use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};

/// A candidate ideal I_E of a Bratteli diagram, stored through its
/// complement (the vertices from which the end is reachable).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct IdealSet {
    /// Br_n \ I for n = 0..=depth.
    pub support: Vec<Vec<String>>,
    /// Br_n ∩ I for n = 0..=depth.
    pub ideal: Vec<Vec<String>>,
    pub proper: bool,
    pub hereditary: bool,
    pub saturated: bool,
    pub primitive_condition_d: bool,
}

impl IdealSet {
    pub fn is_end(&self) -> bool {
        self.proper && self.hereditary && self.saturated && self.primitive_condition_d
    }
}

/// Search parameters for [`bratteli_ends`].
#[derive(Debug, Clone, PartialEq)]
pub struct EndSearch {
    /// Number of consecutive depths whose answers must agree.
    pub window: usize,
    /// Extra levels searched for common descendants (condition d).
    pub horizon: usize,
    /// Largest level width enumerated exhaustively.
    pub width_cap: usize,
    /// Vertex sets whose descendants seed the search instead of enumeration.
    pub seeds: Option<Vec<Vec<VertexId>>>,
}

impl Default for EndSearch {
    fn default() -> Self {
        EndSearch { window: 2, horizon: 4, width_cap: 12, seeds: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BratteliEnds {
    pub depth: usize,
    pub window: usize,
    pub horizon: usize,
    pub ends: Vec<IdealSet>,
    /// (depth, number of ends) for each depth of the stabilization window.
    pub counts: Vec<(usize, usize)>,
    pub stabilized: bool,
    pub exhaustive: bool,
}

/// Levels of a materialized Bratteli diagram, checking that every arrow
/// goes from one level to the next.
pub fn bratteli_levels(g: &Digraph, top: VertexId) -> Result<Vec<Vec<VertexId>>> {
    let dist = g.distances_from(top);
    let mut levels: Vec<Vec<VertexId>> = Vec::new();
    for v in g.vertices() {
        let d = dist[v.0].ok_or_else(|| Error::precondition(format!("{} is not below the top vertex", g.name(v))))?;
        if levels.len() <= d {
            levels.resize(d + 1, Vec::new());
        }
        levels[d].push(v);
    }
    for b in g.bundles() {
        if dist[b.dst.0] != dist[b.src.0].map(|d| d + 1) {
            return Err(Error::precondition(format!(
                "arrow {} -> {} does not go to the next level",
                g.name(b.src),
                g.name(b.dst)
            )));
        }
    }
    Ok(levels)
}

struct Layout {
    level_of: Vec<usize>,
    /// Vertices at levels ≤ limit, in level order.
    order: Vec<VertexId>,
    pos: Vec<usize>,
}

impl Layout {
    fn new(g: &Digraph, levels: &[Vec<VertexId>], limit: usize) -> Self {
        let mut level_of = vec![usize::MAX; g.len()];
        let mut order = Vec::new();
        let mut pos = vec![usize::MAX; g.len()];
        for (n, lv) in levels.iter().enumerate().take(limit + 1) {
            for &v in lv {
                level_of[v.0] = n;
                pos[v.0] = order.len();
                order.push(v);
            }
        }
        Layout { level_of, order, pos }
    }
}

fn reaching_set(g: &Digraph, targets: &[VertexId]) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut queue: VecDeque<VertexId> = targets.iter().copied().collect();
    for t in targets {
        seen[t.0] = true;
    }
    while let Some(u) = queue.pop_front() {
        for p in g.predecessors(u) {
            if !seen[p.0] {
                seen[p.0] = true;
                queue.push_back(p);
            }
        }
    }
    seen
}

fn evaluate(g: &Digraph, levels: &[Vec<VertexId>], layout: &Layout, support: &[bool], depth: usize, horizon: usize) -> IdealSet {
    let limit = depth + horizon;
    let in_c = |v: VertexId| layout.level_of[v.0] <= limit && support[v.0];
    let proper = levels.iter().take(limit + 1).flatten().any(|&v| in_c(v));
    // Complement of I closed under predecessors is the same as I hereditary.
    let hereditary = g
        .bundles()
        .iter()
        .filter(|b| layout.level_of[b.dst.0] <= limit)
        .all(|b| !in_c(b.dst) || in_c(b.src));
    let saturated = levels
        .iter()
        .take(limit)
        .flatten()
        .all(|&v| !in_c(v) || g.successors(v).any(in_c));
    // Descendants inside C, as bitsets over the layout order.
    let words = layout.order.len().div_ceil(64);
    let mut desc = vec![vec![0u64; words]; layout.order.len()];
    for i in (0..layout.order.len()).rev() {
        let v = layout.order[i];
        if !in_c(v) {
            continue;
        }
        desc[i][i / 64] |= 1 << (i % 64);
        for w in g.successors(v) {
            if in_c(w) {
                let j = layout.pos[w.0];
                let (lo, hi) = desc.split_at_mut(j);
                for (a, b) in lo[i].iter_mut().zip(&hi[0]) {
                    *a |= *b;
                }
            }
        }
    }
    let members: Vec<usize> = levels
        .iter()
        .take(depth + 1)
        .flatten()
        .filter(|&&v| in_c(v))
        .map(|v| layout.pos[v.0])
        .collect();
    let level_masks: Vec<Vec<u64>> = (0..=limit)
        .map(|n| {
            let mut m = vec![0u64; words];
            for (i, v) in layout.order.iter().enumerate() {
                if layout.level_of[v.0] <= n {
                    m[i / 64] |= 1 << (i % 64);
                }
            }
            m
        })
        .collect();
    let mut condition_d = true;
    'pairs: for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            let top = layout.level_of[layout.order[i].0].max(layout.level_of[layout.order[j].0]) + horizon;
            let mask = &level_masks[top.min(limit)];
            let meet = desc[i].iter().zip(&desc[j]).zip(mask).any(|((x, y), m)| x & y & m != 0);
            if !meet {
                condition_d = false;
                break 'pairs;
            }
        }
    }
    let names = |keep: bool| -> Vec<Vec<String>> {
        levels
            .iter()
            .take(depth + 1)
            .map(|lv| {
                let mut v: Vec<String> =
                    lv.iter().filter(|&&v| in_c(v) == keep).map(|&v| g.name(v).to_string()).collect();
                v.sort();
                v
            })
            .collect()
    };
    IdealSet {
        support: names(true),
        ideal: names(false),
        proper,
        hereditary,
        saturated,
        primitive_condition_d: condition_d,
    }
}

fn ends_at(g: &Digraph, levels: &[Vec<VertexId>], depth: usize, search: &EndSearch) -> Result<(Vec<IdealSet>, bool)> {
    let limit = depth + search.horizon;
    if levels.len() <= limit {
        return Err(Error::precondition(format!(
            "diagram materialized to level {} but depth {depth} with horizon {} needs level {limit}",
            levels.len() - 1,
            search.horizon
        )));
    }
    let layout = Layout::new(g, levels, limit);
    let deepest = &levels[limit];
    let seeds: Vec<Vec<VertexId>> = match &search.seeds {
        Some(seeds) => seeds
            .iter()
            .map(|s| {
                let mut below = vec![false; g.len()];
                for &v in s {
                    for (w, &r) in reach_set_avoiding(g, v, &vec![false; g.len()]).iter().enumerate() {
                        below[w] |= r;
                    }
                }
                deepest.iter().copied().filter(|v| below[v.0]).collect()
            })
            .filter(|t: &Vec<VertexId>| !t.is_empty())
            .collect(),
        None => {
            if deepest.len() > search.width_cap {
                return Err(Error::ResourceCap(format!(
                    "level {limit} has {} vertices, above the exhaustive cap of {}",
                    deepest.len(),
                    search.width_cap
                )));
            }
            (1u64..(1u64 << deepest.len()))
                .map(|bits| deepest.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &v)| v).collect())
                .collect()
        }
    };
    let mut found = BTreeSet::new();
    for t in seeds {
        let support = reaching_set(g, &t);
        let ideal = evaluate(g, levels, &layout, &support, depth, search.horizon);
        if ideal.is_end() {
            found.insert(ideal);
        }
    }
    Ok((found.into_iter().collect(), search.seeds.is_none()))
}

/// Ends of a materialized Bratteli diagram as ideal sets satisfying the
/// four conditions, truncated to levels ≤ depth.
pub fn bratteli_ends(g: &Digraph, top: VertexId, depth: usize, search: &EndSearch) -> Result<BratteliEnds> {
    let levels = bratteli_levels(g, top)?;
    let first = depth.saturating_sub(search.window).max(1).min(depth);
    let mut counts = Vec::new();
    let mut restricted = Vec::new();
    let mut last = Vec::new();
    let mut exhaustive = true;
    for d in first..=depth {
        let (ends, ex) = ends_at(g, &levels, d, search)?;
        exhaustive &= ex;
        counts.push((d, ends.len()));
        let cut: BTreeSet<Vec<Vec<String>>> = ends.iter().map(|e| e.support[..=first].to_vec()).collect();
        restricted.push(cut);
        last = ends;
    }
    let stabilized = counts.windows(2).all(|w| w[0].1 == w[1].1) && restricted.windows(2).all(|w| w[0] == w[1]);
    Ok(BratteliEnds {
        depth,
        window: search.window,
        horizon: search.horizon,
        ends: last,
        counts,
        stabilized,
        exhaustive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Minimality {
    Minimal,
    NotMinimal,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalReport {
    pub verdict: Minimality,
    /// Vertices whose reachability was tested.
    pub tested: usize,
    /// Tested vertices that never reached a whole level.
    pub failing: Vec<String>,
    /// For the first failing vertex: unreachable vertices per later level.
    pub unreachable_trace: Vec<usize>,
}

/// Simplicity of a finite leveled diagram given by per-level successor lists.
fn simplicity(
    names: &[Vec<String>],
    succ: &[Vec<Vec<usize>>],
    horizon: usize,
    window: usize,
) -> MinimalReport {
    let last = names.len() - 1;
    let tested_levels = last.saturating_sub(horizon);
    let mut tested = 0;
    let mut failing = Vec::new();
    let mut trace_of_first = Vec::new();
    for n in 0..=tested_levels.min(last.saturating_sub(1)) {
        for i in 0..names[n].len() {
            tested += 1;
            let mut cur = vec![false; names[n].len()];
            cur[i] = true;
            let mut full = false;
            let mut trace = Vec::new();
            for m in n..last {
                let mut next = vec![false; names[m + 1].len()];
                for (j, &on) in cur.iter().enumerate() {
                    if on {
                        for &k in &succ[m][j] {
                            next[k] = true;
                        }
                    }
                }
                let missing = next.iter().filter(|&&x| !x).count();
                trace.push(missing);
                cur = next;
                if missing == 0 {
                    full = true;
                    break;
                }
            }
            if !full {
                if failing.is_empty() {
                    trace_of_first = trace;
                }
                failing.push(names[n][i].clone());
            }
        }
    }
    let verdict = if failing.is_empty() && tested > 0 {
        Minimality::Minimal
    } else if !failing.is_empty()
        && trace_of_first.len() >= window.max(1)
        && trace_of_first[trace_of_first.len() - window.max(1)..].windows(2).all(|w| w[1] >= w[0])
    {
        Minimality::NotMinimal
    } else {
        Minimality::Undetermined
    };
    MinimalReport { verdict, tested, failing, unreachable_trace: trace_of_first }
}

/// Minimality of the end with fingerprint `end`, tested through simplicity
/// of the diagram Br(E) whose n-th level is I_n.
pub fn minimal_end_test(g: &Digraph, end: &EndApprox, horizon: usize, window: usize) -> MinimalReport {
    let names: Vec<Vec<String>> =
        end.levels.iter().map(|l| l.iter().map(|&v| g.name(v).to_string()).collect()).collect();
    let mut succ = Vec::with_capacity(end.depth);
    for n in 0..end.depth {
        let in_d = end.in_d(n);
        let next = &end.levels[n + 1];
        let rows = end.levels[n]
            .iter()
            .map(|&v| {
                let r = reach_set_avoiding(g, v, &in_d);
                next.iter().enumerate().filter(|(_, w)| !in_d[w.0] && r[w.0]).map(|(k, _)| k).collect()
            })
            .collect();
        succ.push(rows);
    }
    simplicity(&names, &succ, horizon, window)
}

/// Minimality of a Bratteli-diagram end through simplicity of the
/// subdiagram on its support.
pub fn minimal_ideal_test(g: &Digraph, ideal: &IdealSet, horizon: usize, window: usize) -> Result<MinimalReport> {
    let ids: Vec<Vec<VertexId>> = ideal.support.iter().map(|l| l.iter().map(|n| g.vertex(n)).collect()).collect::<Result<_>>()?;
    let mut succ = Vec::new();
    for n in 0..ids.len().saturating_sub(1) {
        let rows = ids[n]
            .iter()
            .map(|&v| ids[n + 1].iter().enumerate().filter(|(_, &w)| g.successors(v).any(|s| s == w)).map(|(k, _)| k).collect())
            .collect();
        succ.push(rows);
    }
    Ok(simplicity(&ideal.support, &succ, horizon, window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ends::end_fingerprint;
    use crate::graph::{BratteliDiagram, Family, LevelArrow, LevelBlocks, RayKind, RaySpec, Tail};
    use crate::harmonic::Exhaustion;

    fn two_chains() -> Digraph {
        let arrow = |s, d| LevelArrow { src_idx: s, dst_idx: d, mult: 1.0, potential: 1.0 };
        let blocks = LevelBlocks {
            levels: vec![vec!["top".into()], vec!["a1".into(), "b1".into()], vec!["a2".into(), "b2".into()]],
            level_arrows: vec![vec![arrow(0, 0), arrow(0, 1)], vec![arrow(0, 0), arrow(1, 1)]],
            tail: Tail::Repeat,
        };
        BratteliDiagram::from_blocks(blocks).unwrap().materialize(12).unwrap()
    }

    #[test]
    fn car_has_one_end() {
        let g = BratteliDiagram::from_family(Family::car_phase(1.0)).unwrap().materialize(12).unwrap();
        let r = bratteli_ends(&g, VertexId(0), 6, &EndSearch::default()).unwrap();
        assert_eq!(r.ends.len(), 1);
        assert!(r.ends[0].ideal.iter().all(|l| l.is_empty()));
        assert!(r.stabilized);
        let m = minimal_ideal_test(&g, &r.ends[0], 2, 2).unwrap();
        assert_eq!(m.verdict, Minimality::Minimal);
    }

    #[test]
    fn disconnected_chains_have_two_ends() {
        let g = two_chains();
        let r = bratteli_ends(&g, VertexId(0), 5, &EndSearch::default()).unwrap();
        assert_eq!(r.ends.len(), 2);
        assert!(r.stabilized);
    }

    #[test]
    fn pascal_strips() {
        let g = Family::pascal().truncate(10).unwrap();
        let search = EndSearch { window: 1, horizon: 6, ..Default::default() };
        let r = bratteli_ends(&g, VertexId(0), 3, &search).unwrap();
        assert_eq!(r.ends.len(), 7);
    }

    #[test]
    fn width_cap_enforced() {
        let g = Family::pascal().truncate(16).unwrap();
        assert!(matches!(bratteli_ends(&g, VertexId(0), 12, &EndSearch::default()), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn pascal_minimal_ends() {
        let g = Family::pascal().truncate(16).unwrap();
        let v0 = g.vertex("(1,1)").unwrap();
        let fp = |t| end_fingerprint(&g, v0, &RaySpec::new(RayKind::PascalEnd(t)), &Exhaustion::Bfs, 8).unwrap();
        assert_eq!(minimal_end_test(&g, &fp(1), 3, 3).verdict, Minimality::Minimal);
        assert_eq!(minimal_end_test(&g, &fp(-1), 3, 3).verdict, Minimality::Minimal);
        assert_eq!(minimal_end_test(&g, &fp(0), 3, 3).verdict, Minimality::NotMinimal);
    }
}
