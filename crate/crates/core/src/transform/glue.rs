//! Bratteli diagrams glued onto a spine v₀ → v₁ → ⋯ so that diagram k
//! carries extendable conformal measures exactly for β in a prescribed
//! interval I_k.
//!
//! Each diagram is a telescoped copy of the two-vertex CAR diagram: level L
//! has two vertices (one at level 0), consecutive levels are joined by all
//! four arrows with a common multiplicity, and B^L_{u₀,v} = 2^{t_L − 1}.
//! The sequences use a_n = 2^{s_n}, which makes the integer parts x_n(v)
//! and y_n(v) exact powers of two.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{Digraph, DigraphBuilder, VertexId};
use crate::harmonic::{extend_from_hereditary, extension_controls, Feasibility};
use crate::spectral::Controls;

/// Largest exponent t_L a telescoped diagram may reach.
const MAX_EXPONENT: u32 = 1000;
/// Extra binary digits in a_n, so that d_n / a_n and b_n / a_n match
/// their targets to about one part in 2^PRECISION.
const PRECISION: i32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "yes")]
    pub lo_closed: bool,
    #[serde(default = "yes")]
    pub hi_closed: bool,
}

fn yes() -> bool {
    true
}

impl Interval {
    pub fn contains(&self, beta: f64) -> bool {
        let above = if self.lo_closed { beta >= self.lo } else { beta > self.lo };
        let below = if self.hi_closed { beta <= self.hi } else { beta < self.hi };
        above && below
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramSpec {
    pub interval: Interval,
    #[serde(default = "car")]
    pub diagram: String,
}

fn car() -> String {
    "car".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueSpec {
    pub h: f64,
    #[serde(default)]
    pub diagrams: Vec<DiagramSpec>,
}

impl GlueSpec {
    pub fn from_json(params: &Value) -> Result<Self> {
        let spec: GlueSpec =
            serde_json::from_value(params.clone()).map_err(|e| Error::schema("params", e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("glue spec serializes")
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::schema("params.h", "expected a positive finite number"));
        }
        for (i, d) in self.diagrams.iter().enumerate() {
            let field = format!("params.diagrams[{i}]");
            if d.diagram != "car" {
                return Err(Error::schema(format!("{field}.diagram"), "only \"car\" is supported"));
            }
            let iv = d.interval;
            if !(iv.lo.is_finite() && iv.hi.is_finite()) {
                return Err(Error::schema(format!("{field}.interval"), "bounds must be finite"));
            }
            if iv.lo < self.h {
                return Err(Error::schema(format!("{field}.interval.lo"), "interval must lie in [h, ∞)"));
            }
            if iv.lo > iv.hi || (iv.lo == iv.hi && !(iv.lo_closed && iv.hi_closed)) {
                return Err(Error::schema(format!("{field}.interval"), "interval is empty"));
            }
        }
        Ok(())
    }
}

/// The sequences (d_n, b_n, a_n = 2^{s_n}) of one diagram, n = 1, 2, …
#[derive(Debug, Clone, PartialEq)]
struct Sequences {
    s: Vec<i32>,
    d: Vec<f64>,
    b: Vec<f64>,
}

impl Sequences {
    /// d_n/a_n ≈ e^{−n·hi} and b_n/a_n ≈ e^{n·lo}, each divided by n² at a
    /// closed endpoint.
    fn new(iv: &Interval, len: usize) -> Self {
        let ln2 = std::f64::consts::LN_2;
        let mut s = vec![0];
        let mut d = vec![1.0];
        let mut b = vec![iv.lo.exp().round().max(1.0)];
        for n in 2..=len {
            let nf = n as f64;
            let log2_p = -nf * iv.hi / ln2 - if iv.hi_closed { 2.0 * nf.log2() } else { 0.0 };
            let log2_q = nf * iv.lo / ln2 - if iv.lo_closed { 2.0 * nf.log2() } else { 0.0 };
            let sn = (-log2_p).ceil() as i32 + PRECISION;
            s.push(sn);
            d.push((log2_p + sn as f64).exp2().round().max(1.0));
            b.push((log2_q + sn as f64).exp2().round().max(1.0));
        }
        Sequences { s, d, b }
    }

    fn a_log2(&self, n: usize) -> i32 {
        self.s[n - 1]
    }
}

/// Materialized layout of one diagram inside the glued graph.
#[derive(Debug, Clone)]
struct Layout {
    k: usize,
    /// B^L_{u₀,v} = 2^{t_L − 1} for L ≥ 1.
    t: Vec<u32>,
    levels: Vec<Vec<VertexId>>,
    seq: Sequences,
}

impl Layout {
    fn log2_paths(&self, level: usize) -> i32 {
        if level == 0 {
            0
        } else {
            self.t[level] as i32 - 1
        }
    }
}

fn exponents(seq: &Sequences, levels: usize) -> Result<Vec<u32>> {
    let mut t = vec![0u32];
    for l in 1..=levels {
        let need = seq.a_log2(l + 1) + 2;
        let tl = (t[l - 1] + 1).max(need.max(1) as u32);
        if tl > MAX_EXPONENT {
            return Err(Error::ResourceCap(format!("telescoping needs 2^{tl} paths at level {l}")));
        }
        t.push(tl);
    }
    Ok(t)
}

fn build(spec: &GlueSpec, depth: usize) -> Result<(Digraph, Vec<Layout>)> {
    spec.validate()?;
    let mut g = DigraphBuilder::new().family("glue");
    let spine: Vec<VertexId> = (0..=depth).map(|i| g.vertex(&format!("v{i}"))).collect();
    g.base(spine[0]);
    g.mark_boundary(spine[depth]);
    for i in 0..depth {
        g.arrow(spine[i], spine[i + 1], 1.0, 1.0);
    }
    let mut layouts = Vec::new();
    for (idx, d) in spec.diagrams.iter().enumerate() {
        let k = idx + 1;
        if k > depth {
            break;
        }
        let deepest = 2 * (depth - k);
        let seq = Sequences::new(&d.interval, deepest + 2);
        let t = exponents(&seq, deepest)?;
        let mut levels = Vec::with_capacity(deepest + 1);
        for l in 0..=deepest {
            let width = if l == 0 { 1 } else { 2 };
            let level: Vec<VertexId> = (0..width).map(|i| g.vertex(&format!("B{k}:{l}:{i}"))).collect();
            if l == deepest {
                for &v in &level {
                    g.mark_boundary(v);
                }
            }
            levels.push(level);
        }
        for l in 0..deepest {
            let mult = if l == 0 { (t[1] as f64 - 1.0).exp2() } else { (t[l + 1] as f64 - t[l] as f64 - 1.0).exp2() };
            for &u in &levels[l] {
                for &w in &levels[l + 1] {
                    g.arrow(u, w, mult, 1.0);
                }
            }
        }
        let layout = Layout { k, t, levels, seq };
        // Green arrows: v_{k+i} → Br^k_{2i}, d_{i+1} x_{i+1}(v) each.
        for i in 0..=(depth - k) {
            let src = spine[k + i];
            if src == spine[depth] {
                break;
            }
            let n = i + 1;
            let x = (layout.log2_paths(2 * i) - layout.seq.a_log2(n)) as f64;
            for &v in &layout.levels[2 * i] {
                g.arrow(src, v, layout.seq.d[n - 1] * x.exp2().floor().max(0.0), 1.0);
            }
        }
        // Blue arrows: v_{k+2i+1} → Br^k_i, b_{i+1} y_{i+1}(v) each.
        let mut i = 0;
        while k + 2 * i + 1 < depth {
            let n = i + 1;
            let y = (layout.log2_paths(i) - layout.seq.a_log2(n)) as f64;
            for &v in &layout.levels[i] {
                g.arrow(spine[k + 2 * i + 1], v, layout.seq.b[n - 1] * y.exp2().floor().max(0.0), 1.0);
            }
            i += 1;
        }
        layouts.push(layout);
    }
    let g = g.build()?;
    Ok((g, layouts))
}

/// Depth-`depth` truncation: spine v₀, …, v_depth and, for each diagram k ≤
/// depth, levels 0, …, 2(depth − k).
pub fn materialize(spec: &GlueSpec, depth: usize) -> Result<Digraph> {
    build(spec, depth).map(|(g, _)| g)
}

/// Same as [`materialize`].
pub fn build_glue(spec: &GlueSpec, depth: usize) -> Result<Digraph> {
    materialize(spec, depth)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramVerdict {
    pub k: usize,
    pub interval: Interval,
    pub in_interval: bool,
    pub feasible: bool,
    /// Partial sum of the extension series at v₀.
    pub base_value: f64,
    pub terms_used: usize,
    /// B^{2n−2} ≥ 2a_n and B^{n−1} ≥ 2a_n on the materialized levels.
    pub certificates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlueFeasibility {
    pub beta: f64,
    pub depth: usize,
    pub diagrams: Vec<DiagramVerdict>,
    /// One measure from the spine end plus one per feasible diagram.
    pub extreme_count: usize,
}

fn certificates_hold(layout: &Layout) -> bool {
    let top = layout.levels.len() - 1;
    (2..).take_while(|n| 2 * n - 2 <= top).all(|n| layout.log2_paths(2 * n - 2) > layout.seq.a_log2(n))
        && (2..).take_while(|n| n - 1 <= top).all(|n| layout.log2_paths(n - 1) > layout.seq.a_log2(n))
}

/// Decides, for each diagram, whether its unique normalized harmonic vector
/// extends to the glued graph at β.
pub fn glue_feasibility(spec: &GlueSpec, depth: usize, beta: f64, controls: Option<&Controls>) -> Result<GlueFeasibility> {
    let (g, layouts) = build(spec, depth)?;
    let controls = controls.copied().unwrap_or_else(extension_controls);
    let v0 = g.vertex("v0")?;
    let mut diagrams = Vec::with_capacity(layouts.len());
    for layout in &layouts {
        let mut h = vec![false; g.len()];
        let mut psi = vec![0.0; g.len()];
        for (l, level) in layout.levels.iter().enumerate() {
            // ψ = 1 at the top and e^{Lβ} / (2 B^L) below.
            let log = if l == 0 {
                0.0
            } else {
                l as f64 * beta - std::f64::consts::LN_2 * layout.t[l] as f64
            };
            for &v in level {
                h[v.0] = true;
                psi[v.0] = log.exp();
            }
        }
        let ext = extend_from_hereditary(&g, beta, v0, &h, &psi, &controls)?;
        let iv = spec.diagrams[layout.k - 1].interval;
        diagrams.push(DiagramVerdict {
            k: layout.k,
            interval: iv,
            in_interval: iv.contains(beta),
            feasible: ext.feasibility == Feasibility::Feasible,
            base_value: ext.base_value,
            terms_used: ext.terms_used,
            certificates: certificates_hold(layout),
        });
    }
    let extreme_count = 1 + diagrams.iter().filter(|d| d.feasible).count();
    Ok(GlueFeasibility { beta, depth, diagrams, extreme_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::HarmonicMode;
    use crate::harmonic::HarmonicVector;
    use serde_json::json;

    fn one(lo: f64, hi: f64) -> GlueSpec {
        GlueSpec::from_json(&json!({
            "h": 0.5,
            "diagrams": [{"interval": {"lo": lo, "hi": hi, "lo_closed": true, "hi_closed": true}, "diagram": "car"}]
        }))
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let spec = one(2.0, 3.0);
        assert_eq!(GlueSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!(GlueSpec::from_json(&json!({"h": 1.0, "diagrams": [{"interval": {"lo": 0.5, "hi": 2.0}}]})).is_err());
    }

    #[test]
    fn empty_spec_is_a_spine() {
        let spec = GlueSpec::from_json(&json!({"h": 1.0})).unwrap();
        let g = materialize(&spec, 6).unwrap();
        assert_eq!(g.len(), 7);
        let beta = 0.8;
        let psi = HarmonicVector::new(beta, VertexId(0), (0..7).map(|j| (j as f64 * beta).exp()).collect());
        assert!(psi.residuals(&g, HarmonicMode::Harmonic).unwrap().residual_max < 1e-12);
    }

    #[test]
    fn diagram_vector_is_harmonic() {
        let spec = one(2.0, 3.0);
        let (g, layouts) = build(&spec, 12).unwrap();
        let beta = 2.4;
        let mut values = vec![None; g.len()];
        for (l, level) in layouts[0].levels.iter().enumerate() {
            let x = if l == 0 { 1.0 } else { (l as f64 * beta - std::f64::consts::LN_2 * layouts[0].t[l] as f64).exp() };
            for &v in level {
                values[v.0] = Some(x);
            }
        }
        let r = crate::harmonic::verify_harmonic(&g, beta, &values, HarmonicMode::Harmonic).unwrap();
        let scale = values.iter().flatten().fold(0.0f64, |m, &x| m.max(x));
        assert!(r.residual_max <= 1e-12 * scale);
        assert!(certificates_hold(&layouts[0]));
    }

    #[test]
    fn threshold_inside_and_outside() {
        let spec = one(2.0, 3.0);
        let inside = glue_feasibility(&spec, 73, 2.5, None).unwrap();
        assert!(inside.diagrams[0].feasible);
        assert_eq!(inside.extreme_count, 2);
        let outside = glue_feasibility(&spec, 73, 3.2, None).unwrap();
        assert!(!outside.diagrams[0].feasible);
        assert_eq!(outside.extreme_count, 1);
    }
}
