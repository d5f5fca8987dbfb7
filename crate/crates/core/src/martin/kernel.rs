use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};
use crate::spectral::{green_column_with, green_with, Controls, SeriesEstimate, SeriesStatus, WeightMatrix};

/// K_β(v,w) = G(v,w) / G(v₀,w) with the estimates it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    /// Propagated from the tail bounds of both Green series.
    pub error_bar: f64,
    pub numerator: SeriesEstimate,
    pub denominator: SeriesEstimate,
}

pub fn martin_kernel(
    g: &Digraph,
    beta: f64,
    v0: VertexId,
    v: VertexId,
    w: VertexId,
    controls: &Controls,
) -> Result<KernelValue> {
    let a = WeightMatrix::new(g, beta);
    let denominator = green_with(&a, g, v0, w, controls);
    let den = denominator.converged_value("denominator Green series")?;
    if den == 0.0 {
        return Err(Error::precondition(format!("{} does not reach {}", g.name(v0), g.name(w))));
    }
    let numerator = green_with(&a, g, v, w, controls);
    let num = numerator.converged_value("numerator Green series")?;
    let value = num / den;
    let rel = |e: &SeriesEstimate, x: f64| if x > 0.0 { e.tail_bound.unwrap_or(0.0) / x } else { 0.0 };
    let error_bar = value * (rel(&numerator, num) + rel(&denominator, den));
    Ok(KernelValue { value, error_bar, numerator, denominator })
}

/// The column K_β(·,w) over every vertex of the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelColumn {
    pub target: VertexId,
    pub values: Vec<f64>,
    /// G(v₀,w).
    pub base_green: f64,
    pub status: SeriesStatus,
    pub tail_bound: Option<f64>,
}

pub fn martin_column(g: &Digraph, beta: f64, v0: VertexId, w: VertexId, controls: &Controls) -> Result<KernelColumn> {
    let a = WeightMatrix::new(g, beta);
    let col = green_column_with(&a, g, w, controls);
    if col.status != SeriesStatus::Converged {
        return Err(Error::undetermined(format!("Green column at {} is {:?}", g.name(w), col.status)));
    }
    let base_green = col.values[v0.0];
    if base_green <= 0.0 {
        return Err(Error::precondition(format!("{} does not reach {}", g.name(v0), g.name(w))));
    }
    let values = col.values.iter().map(|x| x / base_green).collect();
    Ok(KernelColumn { target: w, values, base_green, status: col.status, tail_bound: col.tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn base_row_is_one() {
        let g = Family::pascal().truncate(6).unwrap();
        let v0 = g.vertex("(1,1)").unwrap();
        for name in ["(2,3)", "(4,1)", "(3,3)"] {
            let w = g.vertex(name).unwrap();
            let k = martin_kernel(&g, 1.0, v0, v0, w, &Controls::default()).unwrap();
            assert_eq!(k.value, 1.0);
        }
    }

    #[test]
    fn pascal_value_at_three_two() {
        let g = Family::pascal().truncate(6).unwrap();
        let beta: f64 = 0.8;
        let v0 = g.vertex("(1,1)").unwrap();
        let v = g.vertex("(2,1)").unwrap();
        let w = g.vertex("(3,2)").unwrap();
        let k = martin_kernel(&g, beta, v0, v, w, &Controls::default()).unwrap();
        assert!((k.value - 2.0 / 3.0 * beta.exp()).abs() < 1e-12);
        let col = martin_column(&g, beta, v0, w, &Controls::default()).unwrap();
        assert!((col.values[v.0] - k.value).abs() < 1e-12);
    }

    #[test]
    fn single_loop_kernel() {
        let g = Family::single_loop(1).truncate(1).unwrap();
        let k = martin_kernel(&g, 1.0, VertexId(0), VertexId(0), VertexId(0), &Controls::default()).unwrap();
        assert_eq!(k.value, 1.0);
    }
}
