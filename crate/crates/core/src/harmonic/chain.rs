use serde::Serialize;

use super::decompose::Decomposition;
use super::HarmonicVector;
use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};
use crate::spectral::{green_column, green_function, Controls};

/// Per-level vectors ψⁿ over ∂D_n with M(n)ψⁿ⁺¹ = ψⁿ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelChain {
    /// Boundary vertex of ∂D_N whose unit vector seeded the chain.
    pub seed: String,
    pub levels: Vec<Vec<f64>>,
}

impl LevelChain {
    /// Largest |M(n)ψⁿ⁺¹ − ψⁿ| relative to max(1, |ψⁿ|∞) over all levels.
    pub fn telescoping_defect(&self, dec: &Decomposition) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.levels.len() - 1 {
            let scale = self.levels[n].iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (i, row) in dec.matrices[n].iter().enumerate() {
                let s: f64 = row.iter().zip(&self.levels[n + 1]).map(|(m, x)| m * x).sum();
                worst = worst.max((s - self.levels[n][i]).abs() / scale);
            }
        }
        worst
    }

    fn sup_distance(&self, other: &LevelChain, upto: usize) -> f64 {
        let mut d: f64 = 0.0;
        for n in 1..=upto.min(self.levels.len() - 1) {
            for (a, b) in self.levels[n].iter().zip(&other.levels[n]) {
                d = d.max((a - b).abs());
            }
        }
        d
    }
}

/// Result of pulling back the extreme points of the level-N simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSolution {
    pub beta: f64,
    pub horizon: usize,
    /// 1 / Σ_n A(β)ⁿ_{v₀,v₀}.
    pub base_mass: f64,
    /// Raw pullbacks, one per admissible seed.
    pub chains: Vec<LevelChain>,
    /// Representatives after merging chains closer than the dedup tolerance on levels 1..=5.
    pub distinct: Vec<LevelChain>,
    /// Hausdorff distance on level 1 between horizons N−1 and N.
    pub gap: Option<f64>,
}

pub const DEDUP_TOL: f64 = 1e-6;
const DEDUP_LEVELS: usize = 5;

fn pull_back(dec: &Decomposition, horizon: usize, seed: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut levels = vec![Vec::new(); horizon + 1];
    let mut logs = vec![0.0; horizon + 1];
    let mut x = vec![0.0; dec.boundary[horizon].len()];
    x[seed] = 1.0;
    levels[horizon] = x;
    for n in (0..horizon).rev() {
        let mut y: Vec<f64> = dec.matrices[n]
            .iter()
            .map(|row| row.iter().zip(&levels[n + 1]).map(|(m, x)| m * x).sum())
            .collect();
        let top = y.iter().fold(0.0f64, |m, v| m.max(*v));
        logs[n] = logs[n + 1];
        if top > 0.0 {
            for v in &mut y {
                *v /= top;
            }
            logs[n] += top.ln();
        }
        levels[n] = y;
    }
    (levels, logs)
}

fn chains_at(
    g: &Digraph,
    dec: &Decomposition,
    horizon: usize,
    base_mass: f64,
    face: Option<&[bool]>,
) -> Vec<LevelChain> {
    let mut out = Vec::new();
    for (seed, &w) in dec.boundary[horizon].iter().enumerate() {
        if face.is_some_and(|f| !f[w.0]) {
            continue;
        }
        let (levels, logs) = pull_back(dec, horizon, seed);
        let x0 = levels[0][0];
        if !(x0 > 0.0) {
            continue;
        }
        if let Some(f) = face {
            let leaks = (0..=horizon).any(|n| {
                dec.boundary[n].iter().zip(&levels[n]).any(|(v, &x)| x > 0.0 && !f[v.0])
            });
            if leaks {
                continue;
            }
        }
        let scaled = levels
            .iter()
            .zip(&logs)
            .map(|(lv, &l)| {
                let c = (l - logs[0]).exp() * base_mass / x0;
                lv.iter().map(|x| x * c).collect()
            })
            .collect();
        out.push(LevelChain { seed: g.name(w).to_string(), levels: scaled });
    }
    out
}

fn dedup(chains: &[LevelChain]) -> Vec<LevelChain> {
    let mut distinct: Vec<LevelChain> = Vec::new();
    for c in chains {
        if distinct.iter().all(|d| d.sup_distance(c, DEDUP_LEVELS) >= DEDUP_TOL) {
            distinct.push(c.clone());
        }
    }
    distinct
}

fn hausdorff_level1(a: &[LevelChain], b: &[LevelChain]) -> f64 {
    let dist = |x: &LevelChain, y: &LevelChain| x.sup_distance(y, 1);
    let one_way = |p: &[LevelChain], q: &[LevelChain]| {
        p.iter().map(|x| q.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Pulls the unit vectors of ∂D_N back through M(N−1)⋯M(0).
///
/// `face` restricts seeds to a vertex set E and drops chains that put mass
/// outside E at any level.
pub fn solve_level_chain(
    g: &Digraph,
    dec: &Decomposition,
    horizon: usize,
    face: Option<&[bool]>,
    controls: &Controls,
) -> Result<ChainSolution> {
    if horizon == 0 || horizon > dec.levels() {
        return Err(Error::precondition(format!(
            "horizon {horizon} outside the decomposition's 1..={} levels",
            dec.levels()
        )));
    }
    let green = green_function(g, dec.beta, dec.base, dec.base, controls);
    let g00 = green.converged_value("Green function at the base vertex")?;
    let base_mass = 1.0 / g00;
    let chains = chains_at(g, dec, horizon, base_mass, face);
    if chains.is_empty() {
        return Err(Error::precondition("normalization impossible: every pullback vanishes at the base vertex"));
    }
    let distinct = dedup(&chains);
    let gap = (horizon >= 2)
        .then(|| chains_at(g, dec, horizon - 1, base_mass, face))
        .filter(|c| !c.is_empty())
        .map(|prev| hausdorff_level1(&dedup(&prev), &distinct));
    Ok(ChainSolution { beta: dec.beta, horizon, base_mass, chains, distinct, gap })
}

/// Harmonic vector on D_n from a chain: ψ_v = Σ_{w∈∂D_n} G(v,w) ψⁿ_w.
pub fn chain_to_vector(
    g: &Digraph,
    dec: &Decomposition,
    chain: &LevelChain,
    level: usize,
    controls: &Controls,
) -> Result<HarmonicVector> {
    let inside = dec.in_d(level);
    let mut values = vec![0.0; g.len()];
    for (&w, &weight) in dec.boundary[level].iter().zip(&chain.levels[level]) {
        if weight == 0.0 {
            continue;
        }
        let col = green_column(g, dec.beta, w, controls);
        if !col.status.eq(&crate::spectral::SeriesStatus::Converged) {
            return Err(Error::undetermined(format!("Green column at {}", g.name(w))));
        }
        for v in g.vertices().filter(|v| inside[v.0]) {
            values[v.0] += col.values[v.0] * weight;
        }
    }
    let mut psi = HarmonicVector::new(dec.beta, dec.base, values);
    psi.excluded = inside.iter().map(|&i| !i).collect();
    Ok(psi)
}

/// Positions of the vertices of `set` on each boundary level.
pub fn face_mask(g: &Digraph, vertices: &[VertexId]) -> Vec<bool> {
    crate::graph::mask(g.len(), vertices.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BratteliDiagram, Family, LevelArrow, LevelBlocks, Tail};
    use crate::harmonic::decompose::{bratteli_decompose, Exhaustion};

    fn car(beta: f64, depth: usize) -> (Digraph, Decomposition) {
        let d = BratteliDiagram::from_family(Family::car_phase(1.0)).unwrap();
        let g = d.materialize(depth).unwrap();
        let v0 = g.vertex("L0:0").unwrap();
        let dec = bratteli_decompose(&g, v0, &Exhaustion::Bfs, beta, None, 3, &Controls::default()).unwrap();
        (g, dec)
    }

    #[test]
    fn car_two_chains_above_alpha() {
        let (g, dec) = car(2.0, 40);
        let sol = solve_level_chain(&g, &dec, 40, None, &Controls::default()).unwrap();
        assert_eq!(sol.distinct.len(), 2);
        for c in &sol.chains {
            assert!(c.telescoping_defect(&dec) < 1e-9);
        }
    }

    #[test]
    fn car_single_chain_below_alpha() {
        let (g, dec) = car(0.5, 40);
        let sol = solve_level_chain(&g, &dec, 40, None, &Controls::default()).unwrap();
        assert_eq!(sol.distinct.len(), 1);
    }

    #[test]
    fn one_vertex_per_level() {
        let blocks = LevelBlocks {
            levels: vec![vec!["a0".into()], vec!["a1".into()]],
            level_arrows: vec![vec![LevelArrow { src_idx: 0, dst_idx: 0, mult: 1.0, potential: 1.0 }]],
            tail: Tail::Repeat,
        };
        let d = BratteliDiagram::from_blocks(blocks).unwrap();
        let g = d.materialize(8).unwrap();
        let beta = 0.7;
        let dec = bratteli_decompose(&g, VertexId(0), &Exhaustion::Bfs, beta, None, 3, &Controls::default()).unwrap();
        let sol = solve_level_chain(&g, &dec, 8, None, &Controls::default()).unwrap();
        assert_eq!(sol.chains.len(), 1);
        for (n, lv) in sol.chains[0].levels.iter().enumerate() {
            let expected = (n as f64 * beta).exp();
            assert!((lv[0] - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn face_restricts_seeds() {
        let (g, dec) = car(2.0, 10);
        let face: Vec<bool> = g.names().iter().map(|n| n == "L0:0" || n.ends_with(":0")).collect();
        let sol = solve_level_chain(&g, &dec, 10, Some(&face), &Controls::default());
        assert!(sol.is_err());
    }
}
