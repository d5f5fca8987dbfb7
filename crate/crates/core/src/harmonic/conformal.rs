use super::HarmonicVector;
use crate::error::{Error, Result};
use crate::graph::{Digraph, FinitePath};
use crate::spectral::WeightMatrix;

/// The e^{βF}-conformal measure determined by a harmonic vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMeasure {
    pub psi: HarmonicVector,
}

impl ConformalMeasure {
    pub fn new(psi: HarmonicVector) -> Self {
        ConformalMeasure { psi }
    }

    pub fn beta(&self) -> f64 {
        self.psi.beta
    }

    /// m(Z(μ)) = e^{−βF(μ)} ψ_{r(μ)}.
    pub fn measure_of_cylinder(&self, mu: &FinitePath) -> Result<f64> {
        let r = mu.range();
        if r.0 >= self.psi.values.len() || self.psi.excluded[r.0] {
            return Err(Error::precondition(format!("no value at vertex index {}", r.0)));
        }
        Ok((-self.psi.beta * mu.potential()).exp() * self.psi.values[r.0])
    }

    /// m(Z(μ)) − Σ_{a: s(a)=r(μ)} m(Z(μa)), counting parallel arrows.
    pub fn refinement_defect(&self, g: &Digraph, mu: &FinitePath) -> Result<f64> {
        let whole = self.measure_of_cylinder(mu)?;
        let mut parts = 0.0;
        for &i in g.out_bundles(mu.range()) {
            let ext = mu.concat(&FinitePath::from_arrows(g, mu.range(), vec![i])?)?;
            parts += g.bundle(i).mult * self.measure_of_cylinder(&ext)?;
        }
        Ok(whole - parts)
    }

    /// State value on S_μ S_ν*: zero unless μ = ν, then m(Z(μ)).
    pub fn kms_state_value(&self, mu: &FinitePath, nu: &FinitePath) -> Result<f64> {
        let base = self.psi.base;
        if mu.source() != base || nu.source() != base {
            return Err(Error::precondition("both paths must start at the base vertex"));
        }
        if mu != nu {
            return Ok(0.0);
        }
        self.measure_of_cylinder(mu)
    }
}

/// Row-stochastic matrix p(v,w) = A(β)_{v,w} ψ_w / ψ_v.
#[derive(Debug, Clone, PartialEq)]
pub struct DoobMatrix {
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Largest |Σ_w p(v,w) − 1| over interior vertices.
    pub max_row_defect: f64,
}

impl DoobMatrix {
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.rows.len();
        let mut m = vec![vec![0.0; n]; n];
        for (v, row) in self.rows.iter().enumerate() {
            for &(w, p) in row {
                m[v][w] = p;
            }
        }
        m
    }
}

/// Doob transform of A(β) by a strictly positive harmonic vector.
pub fn doob_transform(g: &Digraph, psi: &HarmonicVector, tol: f64) -> Result<DoobMatrix> {
    if let Some(v) = g.vertices().find(|v| !(psi.values[v.0] > 0.0)) {
        return Err(Error::precondition(format!("value at {} is not strictly positive", g.name(v))));
    }
    let report = psi.residuals(g, super::HarmonicMode::Harmonic)?;
    let scale = psi.values.iter().cloned().fold(0.0, f64::max).max(1.0);
    if report.residual_max > tol * scale {
        return Err(Error::precondition(format!("vector is not harmonic (residual {})", report.residual_max)));
    }
    let a = WeightMatrix::new(g, psi.beta);
    let mut rows = Vec::with_capacity(g.len());
    let mut max_row_defect: f64 = 0.0;
    for v in g.vertices() {
        let pv = psi.values[v.0];
        let row: Vec<(usize, f64)> = a.row(v).iter().map(|&(w, aw)| (w, aw * psi.values[w] / pv)).collect();
        if !g.is_boundary(v) && !psi.excluded[v.0] {
            let s: f64 = row.iter().map(|e| e.1).sum();
            max_row_defect = max_row_defect.max((s - 1.0).abs());
        }
        rows.push(row);
    }
    Ok(DoobMatrix { rows, max_row_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn golden_measure() -> (Digraph, ConformalMeasure) {
        let g = Family::golden().truncate(1).unwrap();
        let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
        let psi = HarmonicVector::new(phi.ln(), g.vertex("v0").unwrap(), vec![1.0, phi]);
        (g, ConformalMeasure::new(psi))
    }

    #[test]
    fn kms_values() {
        let (g, m) = golden_measure();
        let v0 = FinitePath::vertex(g.vertex("v0").unwrap());
        assert_eq!(m.kms_state_value(&v0, &v0).unwrap(), 1.0);
        let mu = FinitePath::through_names(&g, &["v0", "v1"]).unwrap();
        assert!((m.kms_state_value(&mu, &mu).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(m.kms_state_value(&mu, &v0).unwrap(), 0.0);
    }

    #[test]
    fn refinement_at_v1() {
        let (g, m) = golden_measure();
        let v1 = FinitePath::vertex(g.vertex("v1").unwrap());
        assert!(m.refinement_defect(&g, &v1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn golden_doob_rows() {
        let (g, m) = golden_measure();
        let d = doob_transform(&g, &m.psi, 1e-9).unwrap();
        let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
        let dense = d.dense();
        assert!((dense[0][1] - 1.0).abs() < 1e-15);
        assert!((dense[1][0] - 1.0 / (phi * phi)).abs() < 1e-15);
        assert!((dense[1][1] - 1.0 / phi).abs() < 1e-15);
        assert!(d.max_row_defect < 1e-12);
    }

    #[test]
    fn ray_doob_is_deterministic() {
        let g = Family::ray_graph().truncate(6).unwrap();
        let beta = 1.1;
        let psi = HarmonicVector::new(beta, g.vertex("v0").unwrap(), (0..7).map(|k| (k as f64 * beta).exp()).collect());
        let d = doob_transform(&g, &psi, 1e-9).unwrap();
        for v in 0..6 {
            assert!((d.rows[v][0].1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_entry_rejected() {
        let g = Family::golden().truncate(1).unwrap();
        let psi = HarmonicVector::new(0.0, g.vertex("v0").unwrap(), vec![1.0, 0.0]);
        assert!(doob_transform(&g, &psi, 1e-9).is_err());
    }

    #[test]
    fn pascal_cylinder_value() {
        let g = Family::pascal().truncate(4).unwrap();
        let (alpha, beta) = (0.3f64, 1.0f64);
        let values = g
            .names()
            .iter()
            .map(|n| {
                let (x, y) = n[1..n.len() - 1].split_once(',').unwrap();
                let (x, y): (i32, i32) = (x.parse().unwrap(), y.parse().unwrap());
                alpha.powi(x - 1) * (1.0f64 - alpha).powi(y - 1) * (beta * (x + y - 2) as f64).exp()
            })
            .collect();
        let m = ConformalMeasure::new(HarmonicVector::new(beta, g.vertex("(1,1)").unwrap(), values));
        let mu = FinitePath::through_names(&g, &["(1,1)", "(2,1)"]).unwrap();
        assert!((m.measure_of_cylinder(&mu).unwrap() - alpha).abs() < 1e-15);
    }
}
