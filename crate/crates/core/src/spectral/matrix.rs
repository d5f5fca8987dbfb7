use crate::graph::{Digraph, VertexId};

/// Sparse nonnegative matrix A(β) over a truncation.
///
/// Entries aggregate parallel bundles: A(β)_{v,w} = Σ mult · e^{−βF}.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub beta: f64,
    rows: Vec<Vec<(usize, f64)>>,
}

impl WeightMatrix {
    pub fn new(g: &Digraph, beta: f64) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.len()];
        for b in g.bundles() {
            let w = b.mult * (-beta * b.potential).exp();
            let row = &mut rows[b.src.0];
            match row.iter_mut().find(|(d, _)| *d == b.dst.0) {
                Some(entry) => entry.1 += w,
                None => row.push((b.dst.0, w)),
            }
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
        }
        WeightMatrix { beta, rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, v: VertexId) -> &[(usize, f64)] {
        &self.rows[v.0]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn entry(&self, v: VertexId, w: VertexId) -> f64 {
        self.rows[v.0].iter().find(|e| e.0 == w.0).map_or(0.0, |e| e.1)
    }

    /// Row vector times matrix: y = x A.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows.len()];
        for (u, row) in self.rows.iter().enumerate() {
            let xu = x[u];
            if xu != 0.0 {
                for &(w, a) in row {
                    y[w] += xu * a;
                }
            }
        }
        y
    }

    /// Matrix times column vector: y = A x.
    pub fn right_mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(w, a)| a * x[w]).sum()).collect()
    }

    /// Row sums Σ_w A_{v,w}.
    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|e| e.1).sum()).collect()
    }

    /// Dense copy, for small brute-force computations.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.rows.len();
        let mut m = vec![vec![0.0; n]; n];
        for (v, row) in self.rows.iter().enumerate() {
            for &(w, a) in row {
                m[v][w] = a;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn single_loop_half() {
        let g = Family::single_loop(1).truncate(1).unwrap();
        let a = WeightMatrix::new(&g, 2f64.ln());
        assert_eq!(a.to_dense(), vec![vec![0.5]]);
    }

    #[test]
    fn golden_adjacency() {
        let g = Family::golden().truncate(1).unwrap();
        assert_eq!(WeightMatrix::new(&g, 0.0).to_dense(), vec![vec![0.0, 1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn pascal_rows_have_two_equal_entries() {
        let g = Family::pascal().truncate(5).unwrap();
        let beta = 0.7;
        let a = WeightMatrix::new(&g, beta);
        for v in g.vertices().filter(|&v| !g.is_boundary(v)) {
            let row = a.row(v);
            assert_eq!(row.len(), 2);
            assert!(row.iter().all(|e| e.1 == (-beta).exp()));
        }
    }

    #[test]
    fn scaling_with_unit_potential() {
        let g = Family::dihedral().truncate(3).unwrap();
        let a0 = WeightMatrix::new(&g, 0.0);
        let a = WeightMatrix::new(&g, 1.3);
        let s = (-1.3f64).exp();
        for (r0, r) in a0.rows().iter().zip(a.rows()) {
            for (e0, e) in r0.iter().zip(r) {
                assert_eq!(e.1, s * e0.1);
            }
        }
    }
}
