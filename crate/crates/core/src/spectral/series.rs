use serde::Serialize;

use super::WeightMatrix;
use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};

/// Iteration limits shared by all series computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub max_power: usize,
    pub divergence_threshold: f64,
    /// Terms per block in the ratio test.
    pub block_len: usize,
    /// Consecutive qualifying blocks needed for a verdict.
    pub run_len: usize,
    pub tol: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Controls { max_power: 512, divergence_threshold: 1e9, block_len: 16, run_len: 4, tol: 1e-9 }
    }
}

impl Controls {
    pub fn with_max_power(mut self, n: usize) -> Self {
        self.max_power = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStatus {
    Converged,
    Diverged,
    Undetermined,
}

/// A partial sum with its convergence verdict.
///
/// `boundary_mass` accumulates the weight that reached truncation-boundary
/// vertices; it is zero exactly when no path used in the sum touched the
/// unmaterialized part of the graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEstimate {
    pub value: f64,
    pub status: SeriesStatus,
    pub tail_bound: Option<f64>,
    pub terms_used: usize,
    pub boundary_mass: f64,
}

impl SeriesEstimate {
    pub fn is_converged(&self) -> bool {
        self.status == SeriesStatus::Converged
    }

    /// The value of a converged series, an error otherwise.
    pub fn converged_value(&self, what: &str) -> Result<f64> {
        match self.status {
            SeriesStatus::Converged => Ok(self.value),
            SeriesStatus::Diverged => Err(Error::precondition(format!("{what} diverged"))),
            SeriesStatus::Undetermined => Err(Error::undetermined(format!("{what} did not settle"))),
        }
    }
}

/// One step of a monitored series.
pub(crate) struct Step {
    /// Contribution added to the partial sum.
    pub term: f64,
    /// Mass of the state that generates all later terms.
    pub mass: f64,
    /// Mass sitting on boundary vertices at this step.
    pub leak: f64,
}

/// Block ratio monitor shared by scalar and vector series.
pub(crate) struct Monitor {
    controls: Controls,
    block_mass: f64,
    block_term: f64,
    prev_block_mass: Option<f64>,
    last_block_term: f64,
    in_block: usize,
    conv_run: usize,
    div_run: usize,
    ratio: f64,
}

pub(crate) enum Verdict {
    Continue,
    /// Tail is negligible; stop early.
    Settled,
}

impl Monitor {
    pub fn new(controls: Controls) -> Self {
        Monitor {
            controls,
            block_mass: 0.0,
            block_term: 0.0,
            prev_block_mass: None,
            last_block_term: 0.0,
            in_block: 0,
            conv_run: 0,
            div_run: 0,
            ratio: 1.0,
        }
    }

    /// Feeds one step; `partial` is the magnitude of the partial sum so far.
    pub fn feed(&mut self, term: f64, mass: f64, partial: f64) -> Verdict {
        self.block_mass += mass;
        self.block_term += term;
        self.in_block += 1;
        if self.in_block < self.controls.block_len {
            return Verdict::Continue;
        }
        let cur = self.block_mass;
        match self.prev_block_mass {
            Some(prev) if prev > 0.0 => {
                let r = cur / prev;
                self.ratio = r;
                if r < 1.0 - self.controls.tol {
                    self.conv_run += 1;
                    self.div_run = 0;
                } else {
                    self.div_run += 1;
                    self.conv_run = 0;
                }
            }
            _ => {
                self.conv_run = 0;
                self.div_run = 0;
            }
        }
        self.prev_block_mass = Some(cur);
        self.last_block_term = self.block_term;
        self.block_mass = 0.0;
        self.block_term = 0.0;
        self.in_block = 0;
        if self.converging() && partial.abs() > 0.0 && self.tail() <= 1e-15 * partial.abs() {
            Verdict::Settled
        } else {
            Verdict::Continue
        }
    }

    pub fn converging(&self) -> bool {
        self.conv_run >= self.controls.run_len
    }

    pub fn non_decaying(&self) -> bool {
        self.div_run >= self.controls.run_len
    }

    /// Geometric extrapolation of the remaining terms from the last block.
    pub fn tail(&self) -> f64 {
        let r = self.ratio.min(1.0 - self.controls.tol);
        self.last_block_term * r / (1.0 - r)
    }
}

/// Runs a scalar series whose `n`-th step is produced by `next`.
pub(crate) fn run_series(controls: &Controls, mut next: impl FnMut(usize) -> Step) -> SeriesEstimate {
    let mut partial = 0.0;
    let mut leak = 0.0;
    let mut monitor = Monitor::new(*controls);
    let finish = |value, status, tail_bound, terms_used, boundary_mass| SeriesEstimate {
        value,
        status,
        tail_bound,
        terms_used,
        boundary_mass,
    };
    for n in 0..controls.max_power {
        let step = next(n);
        partial += step.term;
        leak += step.leak;
        if !partial.is_finite() || partial > 1e300 || !step.mass.is_finite() {
            return finish(partial, SeriesStatus::Diverged, None, n + 1, leak);
        }
        if step.mass == 0.0 {
            return finish(partial, SeriesStatus::Converged, Some(0.0), n + 1, leak);
        }
        if let Verdict::Settled = monitor.feed(step.term, step.mass, partial) {
            return finish(partial, SeriesStatus::Converged, Some(monitor.tail()), n + 1, leak);
        }
    }
    let n = controls.max_power;
    if partial > controls.divergence_threshold || monitor.non_decaying() {
        finish(partial, SeriesStatus::Diverged, None, n, leak)
    } else if monitor.converging() {
        finish(partial, SeriesStatus::Converged, Some(monitor.tail()), n, leak)
    } else {
        finish(partial, SeriesStatus::Undetermined, None, n, leak)
    }
}

/// A vector of partial sums sharing one verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub values: Vec<f64>,
    pub status: SeriesStatus,
    /// Uniform bound on the remaining mass of the summed vector increments.
    pub tail_bound: Option<f64>,
    pub terms_used: usize,
    pub boundary_mass: f64,
}

/// Runs a vector series `Σ_n x_n` with `x_{n+1} = step(x_n)`.
pub(crate) fn run_vector_series(
    controls: &Controls,
    start: Vec<f64>,
    boundary: &[bool],
    mut step: impl FnMut(&[f64]) -> Vec<f64>,
) -> VectorEstimate {
    let mut values = vec![0.0; start.len()];
    let mut x = start;
    let mut leak = 0.0;
    let mut monitor = Monitor::new(*controls);
    let mut total = 0.0;
    let mut support = 0usize;
    for n in 0..controls.max_power {
        let mass: f64 = x.iter().sum();
        for (v, xi) in values.iter_mut().zip(&x) {
            *v += xi;
        }
        // Settling is judged against the smallest positive entry, and only
        // once the support has stopped growing.
        let now = values.iter().filter(|&&v| v > 0.0).count();
        let floor = if now > support {
            0.0
        } else {
            values.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min)
        };
        support = now;
        total += mass;
        leak += x.iter().zip(boundary).filter(|(_, &b)| b).map(|(xi, _)| xi).sum::<f64>();
        if !total.is_finite() || total > 1e300 {
            return VectorEstimate { values, status: SeriesStatus::Diverged, tail_bound: None, terms_used: n + 1, boundary_mass: leak };
        }
        if mass == 0.0 {
            return VectorEstimate { values, status: SeriesStatus::Converged, tail_bound: Some(0.0), terms_used: n + 1, boundary_mass: leak };
        }
        let settled = matches!(monitor.feed(mass, mass, floor), Verdict::Settled);
        x = step(&x);
        if settled {
            return VectorEstimate {
                values,
                status: SeriesStatus::Converged,
                tail_bound: Some(monitor.tail()),
                terms_used: n + 1,
                boundary_mass: leak,
            };
        }
        if x.iter().all(|&xi| xi == 0.0) {
            return VectorEstimate { values, status: SeriesStatus::Converged, tail_bound: Some(0.0), terms_used: n + 1, boundary_mass: leak };
        }
    }
    let status = if total > controls.divergence_threshold || monitor.non_decaying() {
        SeriesStatus::Diverged
    } else if monitor.converging() {
        SeriesStatus::Converged
    } else {
        SeriesStatus::Undetermined
    };
    let tail_bound = (status == SeriesStatus::Converged).then(|| monitor.tail());
    VectorEstimate { values, status, tail_bound, terms_used: controls.max_power, boundary_mass: leak }
}

fn boundary_mass(g: &Digraph, x: &[f64]) -> f64 {
    g.vertices().filter(|&v| g.is_boundary(v)).map(|v| x[v.0]).sum()
}

/// Green function G(v,w) = Σ_n A(β)ⁿ_{v,w}.
pub fn green_function(g: &Digraph, beta: f64, v: VertexId, w: VertexId, controls: &Controls) -> SeriesEstimate {
    let a = WeightMatrix::new(g, beta);
    green_with(&a, g, v, w, controls)
}

pub(crate) fn green_with(a: &WeightMatrix, g: &Digraph, v: VertexId, w: VertexId, controls: &Controls) -> SeriesEstimate {
    let relevant = g.reaching(w);
    let mut x = vec![0.0; g.len()];
    if relevant[v.0] {
        x[v.0] = 1.0;
    }
    run_series(controls, |_| {
        let term = x[w.0];
        let leak = boundary_mass(g, &x);
        let mut y = a.left_mul(&x);
        for (yi, &r) in y.iter_mut().zip(&relevant) {
            if !r {
                *yi = 0.0;
            }
        }
        x = y;
        Step { term, mass: x.iter().sum(), leak }
    })
}

/// Row G(v,·) of the Green function.
pub fn green_row(g: &Digraph, beta: f64, v: VertexId, controls: &Controls) -> VectorEstimate {
    let a = WeightMatrix::new(g, beta);
    let mut start = vec![0.0; g.len()];
    start[v.0] = 1.0;
    run_vector_series(controls, start, g.boundary_flags(), |x| a.left_mul(x))
}

/// Column G(·,w) of the Green function.
pub fn green_column(g: &Digraph, beta: f64, w: VertexId, controls: &Controls) -> VectorEstimate {
    let a = WeightMatrix::new(g, beta);
    green_column_with(&a, g, w, controls)
}

pub(crate) fn green_column_with(a: &WeightMatrix, g: &Digraph, w: VertexId, controls: &Controls) -> VectorEstimate {
    let mut start = vec![0.0; g.len()];
    start[w.0] = 1.0;
    run_vector_series(controls, start, g.boundary_flags(), |x| a.right_mul(x))
}

/// Sum over paths of length ≥ 1 from `v` that hit `w` only at their end.
pub fn simple_path_sum(g: &Digraph, beta: f64, v: VertexId, w: VertexId, controls: &Controls) -> SeriesEstimate {
    let a = WeightMatrix::new(g, beta);
    taboo_sum(&a, g, v, w, controls)
}

pub(crate) fn taboo_sum(a: &WeightMatrix, g: &Digraph, v: VertexId, w: VertexId, controls: &Controls) -> SeriesEstimate {
    let relevant = g.reaching(w);
    let mut x = vec![0.0; g.len()];
    x[v.0] = 1.0;
    let mut first = true;
    run_series(controls, |_| {
        if first {
            first = false;
            let leak = boundary_mass(g, &x);
            return Step { term: 0.0, mass: 1.0, leak };
        }
        let mut y = a.left_mul(&x);
        let term = y[w.0];
        y[w.0] = 0.0;
        for (yi, &r) in y.iter_mut().zip(&relevant) {
            if !r {
                *yi = 0.0;
            }
        }
        x = y;
        Step { term, mass: x.iter().sum(), leak: boundary_mass(g, &x) }
    })
}

/// First-return series Σ_n lⁿ(β)_{v,v}.
pub fn first_return_series(g: &Digraph, beta: f64, v: VertexId, controls: &Controls) -> SeriesEstimate {
    simple_path_sum(g, beta, v, v, controls)
}

/// Column R(·,w): for each u, the sum over paths of length ≥ 1 from u hitting w only at the end.
pub fn simple_path_column(g: &Digraph, beta: f64, w: VertexId, controls: &Controls) -> VectorEstimate {
    let a = WeightMatrix::new(g, beta);
    let start: Vec<f64> = (0..g.len()).map(|u| a.entry(VertexId(u), w)).collect();
    run_vector_series(controls, start, g.boundary_flags(), |x| {
        let mut masked = x.to_vec();
        masked[w.0] = 0.0;
        a.right_mul(&masked)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn ln2() -> f64 {
        2f64.ln()
    }

    #[test]
    fn single_loop_geometric() {
        let g = Family::single_loop(1).truncate(1).unwrap();
        let v = VertexId(0);
        let est = green_function(&g, ln2(), v, v, &Controls::default());
        assert_eq!(est.status, SeriesStatus::Converged);
        let oracle: f64 = (0..64).map(|n| 0.5f64.powi(n)).sum::<f64>() + 0.5f64.powi(63);
        assert!((est.value - 2.0).abs() <= est.tail_bound.unwrap() + 1e-15);
        assert!((oracle - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_loop_diverges_at_zero() {
        let g = Family::single_loop(1).truncate(1).unwrap();
        let est = green_function(&g, 0.0, VertexId(0), VertexId(0), &Controls::default());
        assert_eq!(est.status, SeriesStatus::Diverged);
    }

    #[test]
    fn pascal_single_term() {
        let g = Family::pascal().truncate(6).unwrap();
        let v = g.vertex("(1,1)").unwrap();
        let w = g.vertex("(2,2)").unwrap();
        let est = green_function(&g, ln2(), v, w, &Controls::default());
        assert_eq!(est.status, SeriesStatus::Converged);
        assert!((est.value - 0.5).abs() < 1e-15);
        assert_eq!(est.boundary_mass, 0.0);
    }

    #[test]
    fn golden_first_return_identity() {
        let g = Family::golden().truncate(1).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let v1 = g.vertex("v1").unwrap();
        let est = first_return_series(&g, phi.ln(), v1, &Controls::default());
        assert!((est.value - 1.0).abs() < 1e-12);
        let est = first_return_series(&g, ln2(), v1, &Controls::default());
        assert!((est.value - 0.75).abs() < 1e-15);
    }

    #[test]
    fn golden_green_at_v0() {
        let g = Family::golden().truncate(1).unwrap();
        let v0 = g.vertex("v0").unwrap();
        let est = green_function(&g, ln2(), v0, v0, &Controls::default());
        let oracle: f64 = {
            let a = WeightMatrix::new(&g, ln2());
            let mut x = vec![1.0, 0.0];
            let mut s = 0.0;
            for _ in 0..2000 {
                s += x[0];
                x = a.left_mul(&x);
            }
            s
        };
        assert!((est.value - 2.0).abs() < 1e-9);
        assert!((oracle - 2.0).abs() < 1e-12);
        let r = simple_path_sum(&g, ln2(), v0, v0, &Controls::default());
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn simple_path_column_matches_scalar() {
        let g = Family::golden().truncate(1).unwrap();
        let v0 = g.vertex("v0").unwrap();
        let col = simple_path_column(&g, 1.0, v0, &Controls::default());
        for u in g.vertices() {
            let s = simple_path_sum(&g, 1.0, u, v0, &Controls::default());
            assert!((col.values[u.0] - s.value).abs() < 1e-12);
        }
    }

    #[test]
    fn row_and_column_agree() {
        let g = Family::dihedral().truncate(6).unwrap();
        let t0 = g.vertex("t0").unwrap();
        let row = green_row(&g, 1.0, t0, &Controls::default());
        for w in g.vertices().take(6) {
            let col = green_column(&g, 1.0, w, &Controls::default());
            assert!((row.values[w.0] - col.values[t0.0]).abs() < 1e-9 * row.values[w.0].max(1.0));
        }
    }
}
