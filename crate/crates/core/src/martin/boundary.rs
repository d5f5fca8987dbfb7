use serde::Serialize;

use super::kernel::martin_column;
use crate::error::{Error, Result};
use crate::graph::{Digraph, RaySpec, VertexId};
use crate::harmonic::ConformalMeasure;
use crate::spectral::Controls;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSample {
    pub vertex: String,
    pub kernel: f64,
    pub target: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryStep {
    pub k: usize,
    pub ray_vertex: String,
    pub samples: Vec<KernelSample>,
    pub max_deviation: f64,
}

/// Comparison of K_β(v, s(y_k)) with m(Z(v))/m(Z(v₀)) along a ray.
///
/// `consistent` is a necessary condition for m to be the limit measure of
/// the ray; it does not certify extremality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub ray: String,
    pub beta: f64,
    pub steps: Vec<BoundaryStep>,
    /// Maximal deviations never increase along the schedule.
    pub monotone: bool,
    pub final_deviation: f64,
    pub tolerance: f64,
    pub consistent: bool,
}

pub fn boundary_limit_test(
    g: &Digraph,
    beta: f64,
    v0: VertexId,
    ray: &RaySpec,
    m: &ConformalMeasure,
    sample: &[VertexId],
    k_schedule: &[usize],
    tolerance: f64,
    controls: &Controls,
) -> Result<BoundaryReport> {
    if k_schedule.is_empty() {
        return Err(Error::precondition("empty k schedule"));
    }
    if (m.beta() - beta).abs() > 1e-12 {
        return Err(Error::precondition(format!("measure is conformal at beta {} but the test uses {beta}", m.beta())));
    }
    let base_mass = m.psi.values[v0.0];
    if !(base_mass > 0.0) {
        return Err(Error::precondition("the measure vanishes on the base cylinder"));
    }
    let mut steps = Vec::with_capacity(k_schedule.len());
    for &k in k_schedule {
        let name = ray.vertex(k).ok_or_else(|| Error::precondition(format!("ray {ray} has no vertex {k}")))?;
        let w = g.id(&name).ok_or_else(|| Error::precondition(format!("ray vertex {name} is not materialized")))?;
        let col = martin_column(g, beta, v0, w, controls)?;
        let samples: Vec<KernelSample> = sample
            .iter()
            .map(|&v| {
                let target = m.psi.values[v.0] / base_mass;
                let kernel = col.values[v.0];
                KernelSample { vertex: g.name(v).to_string(), kernel, target, deviation: (kernel - target).abs() }
            })
            .collect();
        let max_deviation = samples.iter().fold(0.0f64, |a, s| a.max(s.deviation));
        steps.push(BoundaryStep { k, ray_vertex: name, samples, max_deviation });
    }
    let monotone = steps.windows(2).all(|p| p[1].max_deviation <= p[0].max_deviation);
    let final_deviation = steps.last().unwrap().max_deviation;
    Ok(BoundaryReport {
        ray: ray.to_string(),
        beta,
        steps,
        monotone,
        final_deviation,
        tolerance,
        consistent: monotone && final_deviation < tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, RayKind};
    use crate::harmonic::HarmonicVector;

    fn pascal_psi(g: &Digraph, alpha: f64, beta: f64) -> HarmonicVector {
        let values = g
            .names()
            .iter()
            .map(|n| {
                let (x, y) = n.trim_matches(|c| c == '(' || c == ')').split_once(',').unwrap();
                let (x, y): (i32, i32) = (x.parse().unwrap(), y.parse().unwrap());
                alpha.powi(x - 1) * (1.0 - alpha).powi(y - 1) * (beta * (x + y - 2) as f64).exp()
            })
            .collect();
        HarmonicVector::new(beta, VertexId(0), values)
    }

    #[test]
    fn pascal_deviation_shrinks() {
        let g = Family::pascal().truncate(42).unwrap();
        let beta = 1.0;
        let m = ConformalMeasure::new(pascal_psi(&g, 0.5, beta));
        let v0 = g.vertex("(1,1)").unwrap();
        let sample: Vec<VertexId> = ["(2,1)", "(2,2)", "(3,1)"].iter().map(|n| g.vertex(n).unwrap()).collect();
        let ray = RaySpec::new(RayKind::PascalSlope(0.5));
        let r = boundary_limit_test(&g, beta, v0, &ray, &m, &sample, &[10, 20, 40], 0.5, &Controls::default()).unwrap();
        assert!(r.monotone);
        assert!(r.consistent);
        // On the diagonal K((2,1), ·) is exactly a/(a+b) = 1/2 times e^β.
        let s = &r.steps[2].samples[0];
        assert!((s.kernel - 0.5 * beta.exp()).abs() < 1e-12);
    }

    #[test]
    fn wrong_beta_rejected() {
        let g = Family::pascal().truncate(6).unwrap();
        let m = ConformalMeasure::new(pascal_psi(&g, 0.5, 1.0));
        let ray = RaySpec::new(RayKind::PascalSlope(0.5));
        assert!(boundary_limit_test(&g, 2.0, VertexId(0), &ray, &m, &[], &[2], 1e-3, &Controls::default()).is_err());
    }
}
