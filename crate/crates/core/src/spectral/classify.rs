use serde::Serialize;

use super::entropy::perron;
use super::series::{first_return_series, green_function};
use super::{Controls, SeriesEstimate, SeriesStatus, WeightMatrix};
use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Recurrence {
    Recurrent,
    Transient,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub verdict: Recurrence,
    pub green: SeriesEstimate,
    pub first_return: SeriesEstimate,
}

/// Recurrence at `v`: transient iff the Green diagonal converges, recurrent
/// iff it diverges or the first-return series equals 1 within `controls.tol`.
pub fn classify_recurrence(g: &Digraph, beta: f64, v: VertexId, controls: &Controls) -> Result<RecurrenceReport> {
    let green = green_function(g, beta, v, v, controls);
    let first_return = first_return_series(g, beta, v, controls);
    let returns_surely = first_return.status == SeriesStatus::Converged
        && (first_return.value - 1.0).abs() <= controls.tol + first_return.tail_bound.unwrap_or(0.0);
    let verdict = match green.status {
        SeriesStatus::Converged if returns_surely && green.value < controls.divergence_threshold => {
            return Err(Error::Inconsistency(format!(
                "Green series converged to {} while the first-return series is {}",
                green.value, first_return.value
            )));
        }
        SeriesStatus::Converged => Recurrence::Transient,
        SeriesStatus::Diverged => {
            if first_return.status == SeriesStatus::Converged && first_return.value < 1.0 - 1e-6 {
                return Err(Error::Inconsistency(format!(
                    "Green series diverged while the first-return series is {}",
                    first_return.value
                )));
            }
            Recurrence::Recurrent
        }
        SeriesStatus::Undetermined if returns_surely => Recurrence::Recurrent,
        SeriesStatus::Undetermined => Recurrence::Undetermined,
    };
    Ok(RecurrenceReport { verdict, green, first_return })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NwStatus {
    Empty,
    FiniteNonempty,
    Infinite,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopSign {
    AllPositive,
    AllNegative,
    Mixed,
    HasZero,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSetShape {
    AllReals,
    Singleton { beta0: f64 },
    HalfLineRight { beta0: f64 },
    HalfLineLeft { beta0: f64 },
    Empty,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureClassification {
    pub nw_status: NwStatus,
    pub beta_set_shape: BetaSetShape,
    pub loop_sign: LoopSign,
    /// Whether every loop vertex of the truncation can reach every other one.
    pub cofinal_core: bool,
}

fn family_nw_hint(family: &str) -> Option<NwStatus> {
    match family {
        "pascal" | "ray-graph" | "three-exit" | "car-phase" | "glue" => Some(NwStatus::Empty),
        "dihedral-cayley" | "regular-tree" => Some(NwStatus::Infinite),
        "golden" | "single-loop" => Some(NwStatus::FiniteNonempty),
        _ => None,
    }
}

/// Minimum and maximum cycle mean of the potential over the nontrivial
/// components marked in `comp_of` (Karp's algorithm per component).
fn cycle_mean_range(g: &Digraph, comp: &[usize], core: &[bool]) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut seen = std::collections::BTreeSet::new();
    for v in g.vertices().filter(|v| core[v.0]) {
        if !seen.insert(comp[v.0]) {
            continue;
        }
        let members: Vec<usize> = g.vertices().filter(|u| comp[u.0] == comp[v.0]).map(|u| u.0).collect();
        let pos: std::collections::HashMap<usize, usize> = members.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let edges: Vec<(usize, usize, f64)> = g
            .bundles()
            .iter()
            .filter(|b| pos.contains_key(&b.src.0) && pos.contains_key(&b.dst.0))
            .map(|b| (pos[&b.src.0], pos[&b.dst.0], b.potential))
            .collect();
        for sign in [1.0, -1.0] {
            if let Some(m) = karp_min_mean(members.len(), &edges, sign) {
                if sign > 0.0 {
                    lo = lo.min(m);
                } else {
                    hi = hi.max(-m);
                }
            }
        }
    }
    lo.is_finite().then_some((lo, hi))
}

fn karp_min_mean(n: usize, edges: &[(usize, usize, f64)], sign: f64) -> Option<f64> {
    let inf = f64::INFINITY;
    let mut d = vec![vec![inf; n]; n + 1];
    d[0].iter_mut().for_each(|x| *x = 0.0);
    for k in 1..=n {
        for &(s, t, w) in edges {
            if d[k - 1][s] < inf {
                let c = d[k - 1][s] + sign * w;
                if c < d[k][t] {
                    d[k][t] = c;
                }
            }
        }
    }
    let mut best = inf;
    for v in 0..n {
        if d[n][v] == inf {
            continue;
        }
        let mut worst = f64::NEG_INFINITY;
        for k in 0..n {
            if d[k][v] < inf {
                worst = worst.max((d[n][v] - d[k][v]) / (n - k) as f64);
            }
        }
        best = best.min(worst);
    }
    best.is_finite().then_some(best)
}

/// log ρ(A(β)) on the loop core, from the Perron value of each component.
fn log_spectral_radius(g: &Digraph, beta: f64, comp: &[usize], core: &[bool]) -> f64 {
    let a = WeightMatrix::new(g, beta);
    let mut best = f64::NEG_INFINITY;
    let mut seen = std::collections::BTreeSet::new();
    for v in g.vertices().filter(|v| core[v.0]) {
        if seen.insert(comp[v.0]) {
            let members: Vec<bool> = comp.iter().map(|&c| c == comp[v.0]).collect();
            let (p, _) = perron(&a, &members, 1e-13, 100_000);
            best = best.max(p.value.ln());
        }
    }
    best
}

/// Shape of the set of inverse temperatures admitting harmonic vectors.
pub fn classify_beta_set(g: &Digraph) -> TemperatureClassification {
    let on_loop = g.on_loop();
    let (comp, ncomp) = g.scc();
    let core: Vec<bool> = on_loop.clone();
    let mut comp_has_boundary = vec![false; ncomp];
    for v in g.vertices().filter(|&v| g.is_boundary(v)) {
        comp_has_boundary[comp[v.0]] = true;
    }
    let detected = if !on_loop.iter().any(|&x| x) {
        NwStatus::Empty
    } else if g.vertices().any(|v| core[v.0] && comp_has_boundary[comp[v.0]]) {
        NwStatus::Infinite
    } else {
        NwStatus::FiniteNonempty
    };
    let nw_status = family_nw_hint(g.family()).unwrap_or(detected);
    let core_comps: std::collections::BTreeSet<usize> =
        g.vertices().filter(|v| core[v.0]).map(|v| comp[v.0]).collect();
    let cofinal_core = core_comps.len() <= 1;

    let loop_sign = match cycle_mean_range(g, &comp, &core) {
        None => LoopSign::Undetermined,
        Some((lo, hi)) => {
            let eps = 1e-12;
            if lo > eps {
                LoopSign::AllPositive
            } else if hi < -eps {
                LoopSign::AllNegative
            } else if lo < -eps && hi > eps {
                LoopSign::Mixed
            } else {
                LoopSign::HasZero
            }
        }
    };

    let beta_set_shape = match nw_status {
        NwStatus::Empty => BetaSetShape::AllReals,
        NwStatus::Undetermined => BetaSetShape::Undetermined,
        _ if detected == NwStatus::Empty => BetaSetShape::Undetermined,
        _ => match critical_beta(g, &comp, &core, loop_sign) {
            None => BetaSetShape::Undetermined,
            Some(beta0) => match (nw_status, loop_sign) {
                (NwStatus::FiniteNonempty, _) => BetaSetShape::Singleton { beta0 },
                (_, LoopSign::AllPositive) => BetaSetShape::HalfLineRight { beta0 },
                (_, LoopSign::AllNegative) => BetaSetShape::HalfLineLeft { beta0 },
                _ => BetaSetShape::Undetermined,
            },
        },
    };
    TemperatureClassification { nw_status, beta_set_shape, loop_sign, cofinal_core }
}

/// Solves log ρ(A(β)) = 0 on the loop core when every loop has the same sign.
fn critical_beta(g: &Digraph, comp: &[usize], core: &[bool], sign: LoopSign) -> Option<f64> {
    let s = match sign {
        LoopSign::AllPositive => 1.0,
        LoopSign::AllNegative => -1.0,
        _ => return None,
    };
    let core_potentials: Vec<f64> = g
        .bundles()
        .iter()
        .filter(|b| core[b.src.0] && core[b.dst.0] && comp[b.src.0] == comp[b.dst.0])
        .map(|b| b.potential)
        .collect();
    if let Some(&c) = core_potentials.first() {
        if core_potentials.iter().all(|&p| p == c) {
            return Some(log_spectral_radius(g, 0.0, comp, core) / c);
        }
    }
    // log ρ(A(β)) is strictly monotone in β, decreasing when s > 0.
    let g_at = |beta: f64| log_spectral_radius(g, beta, comp, core);
    let (mut a, mut b) = (-1.0f64, 1.0f64);
    let mut expansions = 0;
    while (s * g_at(a) <= 0.0 || s * g_at(b) >= 0.0) && expansions < 60 {
        a = 2.0 * a - 1.0;
        b = 2.0 * b + 1.0;
        expansions += 1;
    }
    if expansions >= 60 {
        return None;
    }
    let positive_at_a = g_at(a) > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (g_at(m) > 0.0) == positive_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn golden_singleton() {
        let g = Family::golden().truncate(1).unwrap();
        let c = classify_beta_set(&g);
        assert_eq!(c.nw_status, NwStatus::FiniteNonempty);
        assert_eq!(c.loop_sign, LoopSign::AllPositive);
        let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
        match c.beta_set_shape {
            BetaSetShape::Singleton { beta0 } => assert!((beta0 - phi.ln()).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn golden_bisection_with_uneven_potentials() {
        let mut b = Digraph::builder();
        b.arrow_named("v0", "v1", 1.0, 1.0);
        b.arrow_named("v1", "v0", 1.0, 2.0);
        b.arrow_named("v1", "v1", 1.0, 0.5);
        let g = b.build().unwrap();
        let BetaSetShape::Singleton { beta0 } = classify_beta_set(&g).beta_set_shape else { panic!() };
        // Perron value 1 at β0: e^{−0.5β} + e^{−3β} = 1.
        assert!(((-0.5 * beta0).exp() + (-3.0 * beta0).exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ray_graph_all_reals() {
        let g = Family::ray_graph().truncate(5).unwrap();
        assert_eq!(classify_beta_set(&g).beta_set_shape, BetaSetShape::AllReals);
    }

    #[test]
    fn golden_recurrence() {
        let g = Family::golden().truncate(1).unwrap();
        let v1 = g.vertex("v1").unwrap();
        let c = Controls::default();
        assert_eq!(classify_recurrence(&g, 2f64.ln(), v1, &c).unwrap().verdict, Recurrence::Transient);
        let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(classify_recurrence(&g, phi.ln(), v1, &c).unwrap().verdict, Recurrence::Recurrent);
    }

    #[test]
    fn pascal_always_transient() {
        let g = Family::pascal().truncate(8).unwrap();
        let v = g.vertex("(2,2)").unwrap();
        for beta in [-1.0, 0.0, 2.0] {
            let r = classify_recurrence(&g, beta, v, &Controls::default()).unwrap();
            assert_eq!(r.verdict, Recurrence::Transient);
        }
    }

    #[test]
    fn mixed_loops() {
        let mut b = Digraph::builder();
        b.arrow_named("a", "a", 1.0, 1.0);
        b.arrow_named("a", "b", 1.0, -3.0);
        b.arrow_named("b", "a", 1.0, 0.0);
        let c = classify_beta_set(&b.build().unwrap());
        assert_eq!(c.loop_sign, LoopSign::Mixed);
        assert_eq!(c.beta_set_shape, BetaSetShape::Undetermined);
    }
}
