use serde::Serialize;

use super::kernel::martin_column;
use super::weight::{neumaier, segment_sum};
use crate::error::{Error, Result};
use crate::graph::{Digraph, RaySpec, VertexId};
use crate::harmonic::{ConformalMeasure, HarmonicVector};
use crate::spectral::{green_column_with, Controls, Monitor, SeriesStatus, WeightMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Summability {
    Summable,
    NotSummable,
    Undetermined,
}

/// Options for [`summability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummabilityOptions {
    /// Number of ray vertices to use.
    pub ray_len: usize,
    /// Increments of log(G/𝕎) below this count as settled.
    pub cauchy_tol: f64,
    /// Growth of log(G/𝕎) above its running minimum that means divergence.
    pub log_threshold: f64,
    /// Allowed relative decrease of the monotone sequence before it is an error.
    pub monotone_slack: f64,
}

impl Default for SummabilityOptions {
    fn default() -> Self {
        SummabilityOptions { ray_len: 64, cauchy_tol: 1e-9, log_threshold: 1e9f64.ln(), monotone_slack: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub ray: String,
    pub beta: f64,
    pub verdict: Summability,
    /// log of G(v₀,s(y_k)) / 𝕎(y[1,k[) for k = 1, 2, …
    pub monotone_trace: Vec<f64>,
    /// Last value of the monotone sequence, a lower bound for 𝕍_β(v₀,y).
    pub v_base: f64,
    /// Geometric extrapolation of the remaining log growth, when available.
    pub log_tail: Option<f64>,
    /// True when some segment sum of 𝕎 hit the path-length cap.
    pub capped: bool,
    /// v ↦ 𝕍_β(v,y)/𝕍_β(v₀,y) over the truncation on a summable verdict.
    #[serde(skip)]
    pub vector: Option<HarmonicVector>,
}

/// Tracks G(v₀,s(y_k))/𝕎(y[1,k[) along the ray and decides whether it stays bounded.
pub fn summability(
    g: &Digraph,
    beta: f64,
    v0: VertexId,
    ray: &RaySpec,
    options: &SummabilityOptions,
    controls: &Controls,
) -> Result<SummabilityReport> {
    let available = ray.materialized_len(g, options.ray_len);
    if available < 2 {
        return Err(Error::precondition(format!("ray {ray} has fewer than two materialized vertices")));
    }
    let ids = ray.vertex_ids(g, available)?;
    let a = WeightMatrix::new(g, beta);
    let reach = g.reachable_from(v0);
    if let Some(w) = ids.iter().find(|w| !reach[w.0]) {
        return Err(Error::precondition(format!("{} is not reachable from {}", g.name(*w), g.name(v0))));
    }

    let mut forbidden = vec![false; g.len()];
    let mut segment_logs = Vec::new();
    let mut trace = Vec::with_capacity(ids.len());
    let mut capped = false;
    let mut monitor = Monitor::new(*controls);
    let mut running_min = f64::INFINITY;
    let mut diverged = false;
    let mut small_run = 0usize;
    for (k, &w) in ids.iter().enumerate() {
        if k > 0 {
            let prev = ids[k - 1];
            forbidden[prev.0] = true;
            let (s, c) = segment_sum(&a, g, prev, w, &forbidden, controls);
            if s <= 0.0 {
                return Err(Error::precondition(format!("no admissible path from {} to {}", g.name(prev), g.name(w))));
            }
            capped |= c;
            segment_logs.push(s.ln());
        }
        let col = green_column_with(&a, g, w, controls);
        if col.status != SeriesStatus::Converged {
            return Err(Error::undetermined(format!("Green function into {} is {:?}", g.name(w), col.status)));
        }
        let log_ratio = col.values[v0.0].ln() - neumaier(&segment_logs);
        if let Some(&last) = trace.last() {
            let inc: f64 = log_ratio - last;
            if inc < -options.monotone_slack * (1.0 + f64::abs(last)) {
                return Err(Error::Inconsistency(format!(
                    "ratio G/W decreased at step {k} by {} (capped segments: {capped})",
                    -inc
                )));
            }
            let inc = inc.max(0.0);
            monitor.feed(inc, inc, log_ratio);
            if inc <= options.cauchy_tol * (1.0 + log_ratio.abs()) {
                small_run += 1;
            } else {
                small_run = 0;
            }
        }
        running_min = running_min.min(log_ratio);
        trace.push(log_ratio);
        if log_ratio - running_min > options.log_threshold {
            diverged = true;
            break;
        }
    }
    let settled_run = controls.block_len * controls.run_len;
    let verdict = if diverged || monitor.non_decaying() {
        Summability::NotSummable
    } else if small_run >= settled_run.min(trace.len().saturating_sub(1)).max(1) || monitor.converging() {
        if capped {
            Summability::Undetermined
        } else {
            Summability::Summable
        }
    } else {
        Summability::Undetermined
    };
    let log_tail = (verdict == Summability::Summable).then(|| if small_run > 0 && !monitor.converging() { 0.0 } else { monitor.tail() });
    let last = *trace.last().unwrap();
    let vector = if verdict == Summability::Summable {
        let w = ids[trace.len() - 1];
        let col = martin_column(g, beta, v0, w, controls)?;
        let mut psi = HarmonicVector::new(beta, v0, col.values.clone());
        psi.excluded = g.vertices().map(|v| v == w || col.values[v.0] == 0.0 || g.is_boundary(v)).collect();
        psi.values[v0.0] = 1.0;
        Some(psi)
    } else {
        None
    };
    Ok(SummabilityReport {
        ray: ray.to_string(),
        beta,
        verdict,
        monotone_trace: trace,
        v_base: last.exp(),
        log_tail,
        capped,
        vector,
    })
}

/// The conformal measure of the normalized 𝕍 vector of a summable ray.
pub fn extremal_measure_along_ray(
    g: &Digraph,
    beta: f64,
    v0: VertexId,
    ray: &RaySpec,
    options: &SummabilityOptions,
    controls: &Controls,
) -> Result<ConformalMeasure> {
    let report = summability(g, beta, v0, ray, options, controls)?;
    match (report.verdict, report.vector) {
        (Summability::Summable, Some(psi)) => Ok(ConformalMeasure::new(psi)),
        (Summability::NotSummable, _) => Err(Error::precondition(format!("ray {ray} is not summable at beta {beta}"))),
        _ => Err(Error::undetermined(format!("summability of ray {ray} at beta {beta}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, RayKind};
    use crate::harmonic::HarmonicMode;
    use crate::spectral::green_function;

    fn car_options() -> SummabilityOptions {
        SummabilityOptions { ray_len: 200, ..Default::default() }
    }

    #[test]
    fn car_summable_above_alpha() {
        let g = Family::car_phase(1.0).truncate(200).unwrap();
        let beta = 2.0;
        let ray = RaySpec::new(RayKind::CarLeft);
        let r = summability(&g, beta, VertexId(0), &ray, &car_options(), &Controls::default()).unwrap();
        assert_eq!(r.verdict, Summability::Summable);
        // r_k = ∏_{n=1}^{k-2} (1 + e^{(1 - ln n) β}) for the k-th ray vertex (k ≥ 1).
        let mut log_prod = 0.0;
        for (i, &t) in r.monotone_trace.iter().enumerate() {
            let k = i + 1;
            if k >= 3 {
                let n = (k - 2) as f64;
                log_prod += (1.0 + ((1.0 - n.ln()) * beta).exp()).ln();
            }
            assert!((t - log_prod).abs() < 1e-9 * (1.0 + log_prod), "step {k}");
        }
    }

    #[test]
    fn car_not_summable_below_alpha() {
        let g = Family::car_phase(1.0).truncate(200).unwrap();
        let ray = RaySpec::new(RayKind::CarLeft);
        let r = summability(&g, 0.5, VertexId(0), &ray, &car_options(), &Controls::default()).unwrap();
        assert_eq!(r.verdict, Summability::NotSummable);
    }

    #[test]
    fn ray_graph_extremal_vector() {
        let g = Family::ray_graph().truncate(30).unwrap();
        let beta = 0.7;
        let ray = RaySpec::new(RayKind::Spine);
        let opts = SummabilityOptions { ray_len: 20, ..Default::default() };
        let m = extremal_measure_along_ray(&g, beta, VertexId(0), &ray, &opts, &Controls::default()).unwrap();
        for k in 0..15 {
            let expected = (k as f64 * beta).exp();
            assert!((m.psi.values[k] - expected).abs() < 1e-9 * expected);
        }
        assert!(m.psi.residuals(&g, HarmonicMode::Harmonic).unwrap().residual_max < 1e-8);
    }

    #[test]
    fn dihedral_matches_green_diagonal() {
        let g = Family::dihedral().truncate(30).unwrap();
        let beta = 2.0;
        let v0 = g.vertex("t0").unwrap();
        let ray = RaySpec::new(RayKind::DihedralTop(0));
        let opts = SummabilityOptions { ray_len: 10, ..Default::default() };
        let r = summability(&g, beta, v0, &ray, &opts, &Controls::default()).unwrap();
        assert_eq!(r.verdict, Summability::Summable);
        let g00 = green_function(&g, beta, v0, v0, &Controls::default()).value;
        assert!((r.v_base - g00).abs() < 1e-9);
    }
}
