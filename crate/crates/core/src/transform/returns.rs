use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Digraph, DigraphBuilder, VertexId};
use crate::spectral::{green_row, Controls, SeriesStatus, WeightMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnMode {
    /// Return paths only; the first-return mass at h is brought to 1 by
    /// dyadic bracketing.
    RecurrentExact,
    /// Return paths with mass below 1 − e^{−h}, a loop e₀ at v₀ and
    /// length-one returns from a ray with unique incoming arrows.
    RecurrentWithLoop,
    /// As `RecurrentWithLoop`; the graph of interest is Γ' = Γ minus e₀.
    TransientVariant,
}

/// `multiplicity` parallel return paths of length `length` from `source` to v₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnEntry {
    pub source: String,
    pub length: usize,
    pub multiplicity: f64,
    /// α_i = Σ_{n≥1} A(Γ⁰)ⁿ_{v₀,v_i} e^{−nh}.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPathPlan {
    pub base: String,
    pub h: f64,
    pub mode: ReturnMode,
    pub entries: Vec<ReturnEntry>,
    /// Loop modes: the ray w₁, w₂, … whose vertices receive extra returns.
    pub ray: Vec<String>,
    /// Loop modes: b_n for n = 1, 2, …; b₁ = 1 is the loop e₀.
    pub b: Vec<f64>,
    /// Σ α_i b_i e^{−m_i h} plus, in loop modes, the ray returns and e₀.
    pub planned_mass: f64,
}

/// Γ and, in loop modes, Γ' = Γ without the loop e₀.
#[derive(Debug, Clone)]
pub struct ReturnPathGraphs {
    pub gamma: Digraph,
    pub gamma_prime: Option<Digraph>,
}

const LOOP_NAME_SUFFIX: &str = "ret";

fn check_hypotheses(g: &Digraph, v0: VertexId, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::precondition("h must be positive and finite"));
    }
    if !g.in_bundles(v0).is_empty() {
        return Err(Error::precondition(format!("{} receives arrows", g.name(v0))));
    }
    let reach = g.reachable_from(v0);
    if let Some(v) = g.vertices().find(|v| !reach[v.0]) {
        return Err(Error::precondition(format!("{} is not reachable from {}", g.name(v), g.name(v0))));
    }
    Ok(())
}

/// Vertices in breadth-first order from v₀, interior ones only.
fn numbering(g: &Digraph, v0: VertexId) -> Vec<VertexId> {
    let dist = g.distances_from(v0);
    let mut order: Vec<VertexId> = g.vertices().filter(|&v| v != v0 && !g.is_boundary(v)).collect();
    order.sort_by_key(|v| (dist[v.0], v.0));
    order
}

/// Smallest m ≥ 1 with α e^{−mh} ≤ target, together with the largest
/// multiplicity b ≥ 1 keeping α b e^{−mh} ≤ target.
fn fit(alpha: f64, h: f64, target: f64) -> Option<(usize, f64)> {
    if !(target > 0.0 && alpha > 0.0) {
        return None;
    }
    let mut m = ((alpha / target).ln() / h).ceil().max(1.0) as usize;
    while alpha * (-(m as f64) * h).exp() > target * (1.0 + 1e-12) {
        m += 1;
    }
    let unit = alpha * (-(m as f64) * h).exp();
    let b = (target / unit * (1.0 + 1e-12)).floor().max(1.0);
    Some((m, b))
}

/// Chooses return paths so that the first-return series at β = h equals 1.
///
/// α_i is evaluated with the potentials of Γ⁰, and new arrows carry
/// potential 1. Boundary vertices of a truncation get no return paths.
pub fn plan_return_paths(
    g: &Digraph,
    v0: VertexId,
    h: f64,
    mode: ReturnMode,
    controls: &Controls,
) -> Result<ReturnPathPlan> {
    check_hypotheses(g, v0, h)?;
    let row = green_row(g, h, v0, controls);
    if row.status != SeriesStatus::Converged {
        return Err(Error::precondition(format!(
            "Σ A(Γ⁰)ⁿ e^(-nh) from {} is {:?}: h is not above the growth rate",
            g.name(v0),
            row.status
        )));
    }
    let order = numbering(g, v0);
    if order.is_empty() {
        return Err(Error::precondition("no interior vertex besides the base"));
    }
    let mut entries = Vec::with_capacity(order.len());
    let (ray, b, planned_mass) = match mode {
        ReturnMode::RecurrentExact => {
            // `gap` is 1 minus the mass planned so far; after entry k it
            // should sit at the bracket 2^{-k}.
            let mut gap = 1.0f64;
            for (k, &v) in order.iter().enumerate() {
                let alpha = row.values[v.0];
                let last = k + 1 == order.len();
                let target = if last { gap } else { gap - 0.5f64.powi(k as i32 + 1) };
                let (m, mult) = if last {
                    closing_fit(alpha, h, target)
                } else {
                    fit(alpha, h, target).ok_or_else(|| Error::Infeasible("dyadic bracket exhausted".into()))?
                };
                gap -= alpha * mult * (-(m as f64) * h).exp();
                entries.push(ReturnEntry { source: g.name(v).to_string(), length: m, multiplicity: mult, alpha });
            }
            (Vec::new(), Vec::new(), 1.0 - gap)
        }
        ReturnMode::RecurrentWithLoop | ReturnMode::TransientVariant => {
            let ray = unique_entry_ray(g, v0)?;
            let budget = 1.0 - (-h).exp();
            // Return mass stays below half the budget; the ray absorbs the rest.
            let mut used = 0.0;
            for (k, &v) in order.iter().enumerate() {
                let alpha = row.values[v.0];
                let target = budget * 0.5f64.powi(k as i32 + 2);
                let (m, _) = fit(alpha, h, target).ok_or_else(|| Error::Infeasible("return budget exhausted".into()))?;
                used += alpha * (-(m as f64) * h).exp();
                entries.push(ReturnEntry { source: g.name(v).to_string(), length: m, multiplicity: 1.0, alpha });
            }
            let l = first_return_counts(g, v0, &entries, ray.len() + 1)?;
            let mut b = vec![1.0];
            let mut gap = 1.0 - (-h).exp() - used;
            for n in 2..=ray.len() + 1 {
                let w = (-(n as f64) * h).exp();
                let last = n == ray.len() + 1;
                let extra = if last { (gap / w).round().max(0.0) } else { (gap / w * (1.0 + 1e-12)).floor().max(0.0) };
                gap -= extra * w;
                b.push(l[n] + extra);
            }
            let names = ray.iter().map(|&v| g.name(v).to_string()).collect();
            (names, b, 1.0 - gap)
        }
    };
    Ok(ReturnPathPlan { base: g.name(v0).to_string(), h, mode, entries, ray, b, planned_mass })
}

/// Picks m near the minimal admissible length so that the closing term
/// α b e^{−mh} lands as close as possible to `target`.
fn closing_fit(alpha: f64, h: f64, target: f64) -> (usize, f64) {
    let (m0, _) = fit(alpha, h, target).unwrap_or((1, 1.0));
    let mut best = (m0, 1.0, f64::INFINITY);
    for m in m0..m0 + 8 {
        let unit = alpha * (-(m as f64) * h).exp();
        let b = (target / unit).round().max(1.0);
        let err = (target - b * unit).abs();
        if err < best.2 {
            best = (m, b, err);
        }
        if err <= 1e-15 * target.max(1e-300) {
            break;
        }
    }
    (best.0, best.1)
}

/// Follows arrows from v₀ while the next vertex has exactly one incoming
/// arrow, stopping at the truncation boundary.
fn unique_entry_ray(g: &Digraph, v0: VertexId) -> Result<Vec<VertexId>> {
    let mut ray = Vec::new();
    let mut cur = v0;
    loop {
        let next = g.out_bundles(cur).iter().map(|&i| g.bundle(i)).find(|b| {
            b.dst != v0 && b.mult == 1.0 && g.in_bundles(b.dst).len() == 1 && !ray.contains(&b.dst)
        });
        match next {
            Some(b) if !g.is_boundary(b.dst) => {
                ray.push(b.dst);
                cur = b.dst;
            }
            _ => break,
        }
    }
    if ray.len() < 2 {
        return Err(Error::precondition(format!(
            "no ray with unique incoming arrows leaves {} on the materialized prefix",
            g.name(v0)
        )));
    }
    Ok(ray)
}

/// l^n_{v₀,v₀} of Γ¹ (Γ⁰ with the planned return paths), n ≤ `max_len`,
/// counted with multiplicity.
fn first_return_counts(g: &Digraph, v0: VertexId, entries: &[ReturnEntry], max_len: usize) -> Result<Vec<f64>> {
    let a = WeightMatrix::new(g, 0.0);
    let mut x = vec![0.0; g.len()];
    x[v0.0] = 1.0;
    let mut counts_to = vec![x.clone()];
    for _ in 1..=max_len {
        x = a.left_mul(&x);
        counts_to.push(x.clone());
    }
    let mut l = vec![0.0; max_len + 1];
    for e in entries {
        let v = g.vertex(&e.source)?;
        for (n, c) in counts_to.iter().enumerate().skip(1) {
            let total = n + e.length;
            if total <= max_len {
                l[total] += c[v.0] * e.multiplicity;
            }
        }
    }
    Ok(l)
}

/// Adds the planned return paths to Γ⁰. Intermediate vertices of a path
/// of length m from v are named `v~ret1`, …, `v~ret{m−1}`; new arrows
/// carry potential 1 and the first arrow of each path carries the
/// multiplicity.
pub fn apply_return_paths(g: &Digraph, plan: &ReturnPathPlan) -> Result<ReturnPathGraphs> {
    let v0 = g.vertex(&plan.base)?;
    if !g.in_bundles(v0).is_empty() {
        return Err(Error::precondition(format!("{} already receives arrows", plan.base)));
    }
    let mut b: DigraphBuilder = g.to_builder();
    b.base(v0);
    for e in &plan.entries {
        let src = g.vertex(&e.source)?;
        if e.length == 0 || !(e.multiplicity >= 1.0) {
            return Err(Error::precondition(format!("invalid return entry from {}", e.source)));
        }
        let mut prev = src;
        for j in 1..e.length {
            let name = format!("{}~{LOOP_NAME_SUFFIX}{j}", e.source);
            if g.id(&name).is_some() {
                return Err(Error::precondition(format!("vertex name {name} is already taken")));
            }
            let mid = b.vertex(&name);
            b.arrow(prev, mid, if j == 1 { e.multiplicity } else { 1.0 }, 1.0);
            prev = mid;
        }
        b.arrow(prev, v0, if e.length == 1 { e.multiplicity } else { 1.0 }, 1.0);
    }
    let gamma_prime = if plan.mode == ReturnMode::RecurrentExact {
        None
    } else {
        let l = first_return_counts(g, v0, &plan.entries, plan.ray.len() + 1)?;
        for (k, name) in plan.ray.iter().enumerate() {
            // A return from w_{n−1} closes a loop of length n = k + 2.
            let bn = plan.b.get(k + 1).copied().unwrap_or(0.0);
            let w = g.vertex(name)?;
            let extra = bn - l[k + 2];
            if extra > 0.0 {
                b.arrow(w, v0, extra, 1.0);
            }
        }
        let without_loop = b.clone().build()?;
        b.arrow(v0, v0, 1.0, 1.0);
        Some(without_loop)
    };
    Ok(ReturnPathGraphs { gamma: b.build()?, gamma_prime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;
    use crate::spectral::{first_return_series, gurevich_entropy};

    fn ln2() -> f64 {
        2f64.ln()
    }

    #[test]
    fn ray_graph_plan_is_dyadic() {
        let g = Family::ray_graph().truncate(40).unwrap();
        let plan = plan_return_paths(&g, VertexId(0), ln2(), ReturnMode::RecurrentExact, &Controls::default()).unwrap();
        for e in &plan.entries[..plan.entries.len() - 1] {
            assert_eq!((e.length, e.multiplicity), (1, 2.0));
        }
        assert!((plan.planned_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ray_graph_becomes_recurrent() {
        let g = Family::ray_graph().truncate(48).unwrap();
        let plan = plan_return_paths(&g, VertexId(0), ln2(), ReturnMode::RecurrentExact, &Controls::default()).unwrap();
        let out = apply_return_paths(&g, &plan).unwrap();
        let f = first_return_series(&out.gamma, ln2(), VertexId(0), &Controls::default());
        assert!((f.value - 1.0).abs() < 1e-9, "{}", f.value);
        let h = gurevich_entropy(&out.gamma, VertexId(0), &Controls::default()).unwrap();
        assert!((h.estimate - ln2()).abs() < 1e-6, "{}", h.estimate);
        assert!(apply_return_paths(&out.gamma, &plan).is_err());
    }

    #[test]
    fn low_h_refused() {
        let mut b = DigraphBuilder::new();
        b.arrow_named("v0", "v1", 1.0, 1.0);
        b.arrow_named("v1", "v1", 2.0, 1.0);
        let g = b.build().unwrap();
        assert!(plan_return_paths(&g, VertexId(0), 0.5, ReturnMode::RecurrentExact, &Controls::default()).is_err());
    }

    #[test]
    fn loop_mode_on_ray_graph() {
        let g = Family::ray_graph().truncate(60).unwrap();
        let plan =
            plan_return_paths(&g, VertexId(0), ln2(), ReturnMode::RecurrentWithLoop, &Controls::default()).unwrap();
        assert!((plan.planned_mass - 1.0).abs() < 1e-12, "{}", plan.planned_mass);
        let out = apply_return_paths(&g, &plan).unwrap();
        let c = Controls::default();
        let f = first_return_series(&out.gamma, ln2(), VertexId(0), &c);
        assert!((f.value - 1.0).abs() < 1e-9, "{}", f.value);
        let prime = out.gamma_prime.unwrap();
        let f = first_return_series(&prime, ln2(), VertexId(0), &c);
        assert!((f.value - 0.5).abs() < 1e-9);
        let loops = out.gamma.bundles().iter().filter(|b| b.src == b.dst && b.src == VertexId(0)).count();
        assert_eq!(loops, 1);
    }
}
