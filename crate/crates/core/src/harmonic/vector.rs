use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};
use crate::spectral::WeightMatrix;

/// Nonnegative vertex function over a truncation.
///
/// `excluded` marks vertices whose value is not trusted (for instance because
/// a limit had not settled there); residual checks skip them together with
/// truncation-boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicVector {
    pub beta: f64,
    pub base: VertexId,
    pub values: Vec<f64>,
    pub excluded: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicMode {
    Harmonic,
    Almost,
}

/// Per-vertex harmonicity defects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub mode: HarmonicMode,
    pub residuals: BTreeMap<String, f64>,
    pub residual_max: f64,
    /// Vertices with no residual because they or a successor carry no value.
    pub skipped: Vec<String>,
}

impl HarmonicVector {
    pub fn new(beta: f64, base: VertexId, values: Vec<f64>) -> Self {
        let n = values.len();
        HarmonicVector { beta, base, values, excluded: vec![false; n] }
    }

    pub fn value(&self, v: VertexId) -> f64 {
        self.values[v.0]
    }

    pub fn is_normalized(&self) -> bool {
        self.values[self.base.0] == 1.0
    }

    /// Scales so that the base vertex has value 1.
    pub fn normalized(mut self) -> Result<Self> {
        let b = self.values[self.base.0];
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::precondition("base value is not positive"));
        }
        for x in &mut self.values {
            *x /= b;
        }
        self.values[self.base.0] = 1.0;
        Ok(self)
    }

    pub fn residuals(&self, g: &Digraph, mode: HarmonicMode) -> Result<ResidualReport> {
        let values: Vec<Option<f64>> = self
            .values
            .iter()
            .zip(&self.excluded)
            .map(|(&x, &e)| if e { None } else { Some(x) })
            .collect();
        verify_harmonic(g, self.beta, &values, mode)
    }

    pub fn to_map(&self, g: &Digraph) -> BTreeMap<String, f64> {
        g.vertices()
            .filter(|v| !self.excluded[v.0])
            .map(|v| (g.name(v).to_string(), self.values[v.0]))
            .collect()
    }
}

/// Checks Σ_w A(β)_{v,w} ψ_w against ψ_v at every interior vertex with a value.
///
/// `None` marks a vertex without a value. A vertex whose value is present but
/// which has a valueless out-neighbor is an error unless it lies on the
/// truncation boundary.
pub fn verify_harmonic(g: &Digraph, beta: f64, psi: &[Option<f64>], mode: HarmonicMode) -> Result<ResidualReport> {
    if psi.len() != g.len() {
        return Err(Error::precondition("vector length differs from the vertex count"));
    }
    if let Some(v) = g.vertices().find(|v| psi[v.0].is_some_and(|x| x < 0.0 || x.is_nan())) {
        return Err(Error::precondition(format!("negative value at {}", g.name(v))));
    }
    let a = WeightMatrix::new(g, beta);
    let mut residuals = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut residual_max: f64 = 0.0;
    for v in g.vertices() {
        let Some(pv) = psi[v.0] else {
            skipped.push(g.name(v).to_string());
            continue;
        };
        if g.is_boundary(v) {
            skipped.push(g.name(v).to_string());
            continue;
        }
        let mut s = 0.0;
        let mut incomplete = false;
        for &(w, aw) in a.row(v) {
            match psi[w] {
                Some(x) => s += aw * x,
                None => incomplete = true,
            }
        }
        if incomplete {
            skipped.push(g.name(v).to_string());
            continue;
        }
        let r = match mode {
            HarmonicMode::Harmonic => (pv - s).abs(),
            HarmonicMode::Almost => (s - pv).max(0.0),
        };
        residual_max = residual_max.max(r);
        residuals.insert(g.name(v).to_string(), r);
    }
    Ok(ResidualReport { mode, residuals, residual_max, skipped })
}

/// Bounds b_v = (A(β)ᵏ_{v₀,v})⁻¹ with k the graph distance from v₀.
pub fn upper_bounds(g: &Digraph, beta: f64, v0: VertexId) -> Vec<Option<f64>> {
    let a = WeightMatrix::new(g, beta);
    let dist = g.distances_from(v0);
    let mut weight = vec![0.0; g.len()];
    weight[v0.0] = 1.0;
    let mut order: Vec<VertexId> = g.vertices().filter(|v| dist[v.0].is_some()).collect();
    order.sort_by_key(|v| dist[v.0]);
    let mut queue: VecDeque<VertexId> = order.into();
    while let Some(u) = queue.pop_front() {
        for &(w, aw) in a.row(u) {
            if dist[w] == dist[u.0].map(|d| d + 1) {
                weight[w] += weight[u.0] * aw;
            }
        }
    }
    weight.into_iter().map(|w| (w > 0.0).then(|| 1.0 / w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn golden_perron_vector() {
        let g = Family::golden().truncate(1).unwrap();
        let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
        let r = verify_harmonic(&g, phi.ln(), &[Some(1.0), Some(phi)], HarmonicMode::Harmonic).unwrap();
        assert!(r.residual_max < 1e-12);
    }

    #[test]
    fn ray_graph_exponential() {
        let g = Family::ray_graph().truncate(10).unwrap();
        let beta = 0.8;
        let psi: Vec<Option<f64>> = (0..g.len()).map(|k| Some((k as f64 * beta).exp())).collect();
        let r = verify_harmonic(&g, beta, &psi, HarmonicMode::Harmonic).unwrap();
        assert!(r.residual_max < 1e-12);
        assert_eq!(r.skipped, vec!["v10".to_string()]);
    }

    #[test]
    fn negative_value_rejected() {
        let g = Family::golden().truncate(1).unwrap();
        assert!(verify_harmonic(&g, 0.0, &[Some(1.0), Some(-1.0)], HarmonicMode::Almost).is_err());
    }

    #[test]
    fn bounds_on_pascal() {
        let g = Family::pascal().truncate(5).unwrap();
        let b = upper_bounds(&g, 1.0, g.vertex("(1,1)").unwrap());
        let v = g.vertex("(2,2)").unwrap();
        assert!((b[v.0].unwrap() - (2.0f64).exp() / 2.0).abs() < 1e-12);
    }
}
