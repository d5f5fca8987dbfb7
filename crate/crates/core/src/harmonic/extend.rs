use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::HarmonicVector;
use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};
use crate::spectral::{Controls, Monitor, SeriesStatus, Verdict, WeightMatrix};

/// Solves (I − A_II) ψ_I = A_IB ψ_B for the interior values given the
/// values on the truncation boundary.
///
/// The result is normalized at `base` when the base value is positive.
pub fn extend_from_boundary(
    g: &Digraph,
    beta: f64,
    base: VertexId,
    boundary_values: &[(VertexId, f64)],
) -> Result<HarmonicVector> {
    let mut fixed = vec![None; g.len()];
    for &(v, x) in boundary_values {
        if !(x >= 0.0) {
            return Err(Error::precondition(format!("negative boundary value at {}", g.name(v))));
        }
        fixed[v.0] = Some(x);
    }
    for v in g.boundary_vertices() {
        if fixed[v.0].is_none() {
            return Err(Error::precondition(format!("no value for boundary vertex {}", g.name(v))));
        }
    }
    let interior: Vec<VertexId> = g.vertices().filter(|v| fixed[v.0].is_none()).collect();
    let mut pos = vec![usize::MAX; g.len()];
    for (i, v) in interior.iter().enumerate() {
        pos[v.0] = i;
    }
    let a = WeightMatrix::new(g, beta);
    let n = interior.len();
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, &v) in interior.iter().enumerate() {
        for &(w, aw) in a.row(v) {
            match fixed[w] {
                Some(x) => rhs[i] += aw * x,
                None => m[(i, pos[w])] -= aw,
            }
        }
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::precondition("interior system is singular"))?;
    let mut values = vec![0.0; g.len()];
    for v in g.vertices() {
        values[v.0] = match fixed[v.0] {
            Some(x) => x,
            None => sol[pos[v.0]],
        };
    }
    if let Some(v) = g.vertices().find(|v| values[v.0] < -1e-12) {
        return Err(Error::precondition(format!("solution is negative at {}", g.name(v))));
    }
    for x in &mut values {
        *x = x.max(0.0);
    }
    let psi = HarmonicVector::new(beta, base, values);
    if psi.values[base.0] > 0.0 {
        psi.normalized()
    } else {
        Ok(psi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

/// Outcome of extending a harmonic vector off a hereditary set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extension {
    pub feasibility: Feasibility,
    /// Partial sum of the feasibility series at the base vertex.
    pub base_value: f64,
    pub terms_used: usize,
    /// True when the complement walk ran into the truncation boundary.
    pub touched_boundary: bool,
    #[serde(skip)]
    pub vector: Option<HarmonicVector>,
}

/// Controls suited to extension series whose terms arrive once per spine
/// step; shorter blocks let a verdict form within desk-scale truncations.
pub fn extension_controls() -> Controls {
    Controls { block_len: 8, max_power: 4096, ..Controls::default() }
}

/// Extends ψ from a hereditary set H by
/// ψ̄_v = Σ_{a∈M} Σ_n C(β)ⁿ_{v,s(a)} e^{−βF(a)} ψ_{r(a)} for v ∉ H.
///
/// `psi_on_h` is indexed by graph vertex; entries outside H are ignored.
/// Feasibility is decided by the series at `v0`. When the complement walk
/// reaches the truncation boundary the verdict comes from the block-ratio
/// monitor on the terms, never from the finite truncation alone.
pub fn extend_from_hereditary(
    g: &Digraph,
    beta: f64,
    v0: VertexId,
    h: &[bool],
    psi_on_h: &[f64],
    controls: &Controls,
) -> Result<Extension> {
    if h[v0.0] {
        return Err(Error::precondition("the base vertex lies in H"));
    }
    for b in g.bundles() {
        if h[b.src.0] && !h[b.dst.0] {
            return Err(Error::precondition(format!(
                "H is not hereditary: {} -> {}",
                g.name(b.src),
                g.name(b.dst)
            )));
        }
    }
    let a = WeightMatrix::new(g, beta);
    let mut x = vec![0.0; g.len()];
    for v in g.vertices().filter(|v| !h[v.0]) {
        x[v.0] = a.row(v).iter().filter(|(w, _)| h[*w]).map(|&(w, aw)| aw * psi_on_h[w]).sum();
    }
    let mut values = vec![0.0; g.len()];
    let mut monitor = Monitor::new(*controls);
    let mut partial = 0.0;
    let mut touched_boundary = false;
    let mut exhausted = false;
    let mut settled = false;
    let mut terms_used = 0;
    for _ in 0..controls.max_power {
        terms_used += 1;
        for (val, xi) in values.iter_mut().zip(&x) {
            *val += xi;
        }
        let term = x[v0.0];
        partial += term;
        if !partial.is_finite() || partial > 1e300 {
            break;
        }
        if let Verdict::Settled = monitor.feed(term, term, partial) {
            settled = true;
            break;
        }
        // (C x)_v = Σ_{w∉H} A_{v,w} x_w; truncation-boundary vertices have no
        // materialized successors, so mass that reaches them stops there.
        let mut y = vec![0.0; g.len()];
        for v in g.vertices().filter(|v| !h[v.0]) {
            let s: f64 = a.row(v).iter().filter(|(w, _)| !h[*w]).map(|&(w, aw)| aw * x[w]).sum();
            y[v.0] = s;
            if g.is_boundary(v) && x[v.0] > 0.0 {
                touched_boundary = true;
            }
        }
        x = y;
        if x.iter().all(|&xi| xi == 0.0) {
            exhausted = true;
            break;
        }
    }
    let status = if !partial.is_finite() || partial > controls.divergence_threshold || monitor.non_decaying() {
        SeriesStatus::Diverged
    } else if settled || monitor.converging() || (exhausted && !touched_boundary) {
        SeriesStatus::Converged
    } else {
        SeriesStatus::Undetermined
    };
    let feasibility = match status {
        SeriesStatus::Converged if partial > 0.0 => Feasibility::Feasible,
        SeriesStatus::Converged | SeriesStatus::Diverged => Feasibility::Infeasible,
        SeriesStatus::Undetermined => {
            return Err(Error::undetermined(format!(
                "extension series at {} after {terms_used} terms",
                g.name(v0)
            )))
        }
    };
    let vector = (feasibility == Feasibility::Feasible).then(|| {
        for v in g.vertices().filter(|v| h[v.0]) {
            values[v.0] = psi_on_h[v.0];
        }
        HarmonicVector::new(beta, v0, values)
    });
    Ok(Extension { feasibility, base_value: partial, terms_used, touched_boundary, vector })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DigraphBuilder, Family};
    use crate::harmonic::HarmonicMode;

    #[test]
    fn boundary_extension_on_ray_graph() {
        let g = Family::ray_graph().truncate(6).unwrap();
        let beta = 0.4;
        let top = g.vertex("v6").unwrap();
        let psi = extend_from_boundary(&g, beta, VertexId(0), &[(top, (6.0 * beta).exp())]).unwrap();
        for k in 0..=6 {
            assert!((psi.values[k] - (k as f64 * beta).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_extension_is_harmonic() {
        // v0 -> v1 -> h0 (loop with weight making h0 harmonic), v1 -> v1.
        let mut b = DigraphBuilder::new();
        b.arrow_named("v0", "v1", 1.0, 1.0);
        b.arrow_named("v1", "v1", 1.0, 1.0);
        b.arrow_named("v1", "h0", 1.0, 1.0);
        b.arrow_named("h0", "h0", 1.0, 0.0);
        let g = b.build().unwrap();
        let beta = 1.0;
        let h: Vec<bool> = g.names().iter().map(|n| n == "h0").collect();
        let psi_h: Vec<f64> = h.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect();
        let ext = extend_from_hereditary(&g, beta, VertexId(0), &h, &psi_h, &Controls::default()).unwrap();
        assert_eq!(ext.feasibility, Feasibility::Feasible);
        let psi = ext.vector.unwrap();
        let r = psi.residuals(&g, HarmonicMode::Harmonic).unwrap();
        assert!(r.residual_max < 1e-12);
        let e = (-beta).exp();
        let v1 = e / (1.0 - e);
        assert!((psi.values[1] - v1).abs() < 1e-12);
        assert!((psi.values[0] - e * v1).abs() < 1e-12);
    }

    #[test]
    fn empty_connection_is_infeasible() {
        let mut b = DigraphBuilder::new();
        b.arrow_named("v0", "v0", 1.0, 1.0);
        b.arrow_named("h0", "h0", 1.0, 0.0);
        let g = b.build().unwrap();
        let h = vec![false, true];
        let ext = extend_from_hereditary(&g, 1.0, VertexId(0), &h, &[0.0, 1.0], &Controls::default()).unwrap();
        assert_eq!(ext.feasibility, Feasibility::Infeasible);
    }

    #[test]
    fn non_hereditary_rejected() {
        let g = Family::golden().truncate(1).unwrap();
        let h = vec![false, true];
        assert!(extend_from_hereditary(&g, 1.0, VertexId(0), &h, &[0.0, 1.0], &Controls::default()).is_err());
    }
}
