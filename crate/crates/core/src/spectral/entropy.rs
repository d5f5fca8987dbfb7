use serde::Serialize;

use super::{Controls, SeriesStatus, WeightMatrix};
use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};

/// Perron value of a nonnegative irreducible matrix block with a
/// Collatz–Wielandt bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerronValue {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on A + I restricted to `members`; returns ρ(A) on that block
/// together with the Perron vector (zero off the block).
pub fn perron(a: &WeightMatrix, members: &[bool], tol: f64, max_iter: usize) -> (PerronValue, Vec<f64>) {
    let n = a.dim();
    let mut x: Vec<f64> = members.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut y = vec![0.0; n];
        for u in (0..n).filter(|&u| members[u]) {
            let mut s = x[u];
            for &(w, aw) in &a.rows()[u] {
                if members[w] {
                    s += aw * x[w];
                }
            }
            y[u] = s;
        }
        lower = f64::INFINITY;
        upper = 0.0;
        for u in (0..n).filter(|&u| members[u]) {
            let q = y[u] / x[u];
            lower = f64::min(lower, q);
            upper = f64::max(upper, q);
        }
        let norm: f64 = y.iter().sum();
        for yi in &mut y {
            *yi /= norm;
        }
        x = y;
        if upper - lower <= tol * upper {
            converged = true;
            break;
        }
    }
    let value = 0.5 * (lower + upper) - 1.0;
    (PerronValue { value, lower: lower - 1.0, upper: upper - 1.0, iterations, converged }, x)
}

/// Gurevich entropy report at a vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    /// log of the Perron value of the strongly connected component of `v`.
    pub estimate: f64,
    /// Running max of (1/n) log Aⁿ_{vv} over the computed powers.
    pub lower_bound: f64,
    pub status: SeriesStatus,
    pub powers_used: usize,
    pub perron: PerronValue,
}

/// Gurevich entropy of the component containing `v`, computed on A(Γ).
pub fn gurevich_entropy(g: &Digraph, v: VertexId, controls: &Controls) -> Result<EntropyEstimate> {
    if !g.on_loop()[v.0] {
        return Err(Error::precondition(format!("vertex {} lies on no materialized loop", g.name(v))));
    }
    let a = WeightMatrix::new(g, 0.0);
    let (comp, _) = g.scc();
    let members: Vec<bool> = comp.iter().map(|&c| c == comp[v.0]).collect();

    let mut x = vec![0.0; g.len()];
    x[v.0] = 1.0;
    let mut log_scale = 0.0;
    let mut lower = f64::NEG_INFINITY;
    for n in 1..=controls.max_power {
        x = a.left_mul(&x);
        let s: f64 = x.iter().sum();
        if s == 0.0 {
            break;
        }
        log_scale += s.ln();
        for xi in &mut x {
            *xi /= s;
        }
        if x[v.0] > 0.0 {
            lower = lower.max((x[v.0].ln() + log_scale) / n as f64);
        }
    }
    let (p, _) = perron(&a, &members, 1e-12, 100_000);
    let status = if p.converged { SeriesStatus::Converged } else { SeriesStatus::Undetermined };
    Ok(EntropyEstimate {
        estimate: p.value.ln(),
        lower_bound: lower,
        status,
        powers_used: controls.max_power,
        perron: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn two_loops_give_ln2() {
        let g = Family::single_loop(2).truncate(1).unwrap();
        let e = gurevich_entropy(&g, VertexId(0), &Controls::default()).unwrap();
        assert!((e.estimate - 2f64.ln()).abs() < 1e-12);
        assert!((e.lower_bound - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn one_loop_gives_zero() {
        let g = Family::single_loop(1).truncate(1).unwrap();
        let e = gurevich_entropy(&g, VertexId(0), &Controls::default()).unwrap();
        assert!(e.estimate.abs() < 1e-12);
        assert_eq!(e.lower_bound, 0.0);
    }

    #[test]
    fn golden_ratio() {
        let g = Family::golden().truncate(1).unwrap();
        let e = gurevich_entropy(&g, VertexId(0), &Controls::default()).unwrap();
        let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((e.estimate - phi.ln()).abs() < 1e-11);
        assert!((e.estimate - 0.481211825).abs() < 1e-9);
        assert!(e.lower_bound <= e.estimate + 1e-12);
    }

    #[test]
    fn vertex_off_loops_is_rejected() {
        let g = Family::ray_graph().truncate(4).unwrap();
        assert!(gurevich_entropy(&g, VertexId(0), &Controls::default()).is_err());
    }
}
