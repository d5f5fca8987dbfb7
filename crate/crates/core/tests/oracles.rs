//! Closed-form values on the built-in families.

use kmsgraph::ends::{almost_undirected_test, AlmostUndirected};
use kmsgraph::harmonic::{verify_harmonic, HarmonicMode};
use kmsgraph::martin::{martin_kernel, ray_weight};
use kmsgraph::spectral::{
    classify_beta_set, classify_recurrence, first_return_series, green_function, gurevich_entropy, BetaSetShape,
    Recurrence,
};
use kmsgraph::{Controls, Digraph, Family, RaySpec, VertexId};

fn c() -> Controls {
    Controls::default()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn pv(g: &Digraph, x: u32, y: u32) -> VertexId {
    g.vertex(&format!("({x},{y})")).unwrap()
}

#[test]
fn pascal_green_is_binomial() {
    let g = Family::pascal().truncate(14).unwrap();
    for beta in [0.3, 1.0, 2.5] {
        for (x, y, n, m) in [(1, 1, 4, 3), (2, 3, 6, 7), (3, 1, 3, 5), (1, 1, 1, 1)] {
            let est = green_function(&g, beta, pv(&g, x, y), pv(&g, n, m), &c());
            let len = n + m - x - y;
            let exact = binomial(len, n - x) * (-beta * len as f64).exp();
            assert!(((est.value - exact) / exact).abs() < 1e-12, "{x},{y} -> {n},{m}");
        }
    }
}

#[test]
fn pascal_martin_kernel_is_binomial_ratio() {
    let g = Family::pascal().truncate(14).unwrap();
    let (n, m) = (9, 6);
    let k = martin_kernel(&g, 1.0, pv(&g, 1, 1), pv(&g, 2, 3), pv(&g, n, m), &c()).unwrap();
    let exact = binomial(n + m - 5, n - 2) / binomial(n + m - 2, n - 1) * 3f64.exp();
    assert!((k.value - exact).abs() / exact < 1e-12);
}

#[test]
fn golden_critical_temperature() {
    let g = Family::golden().truncate(1).unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    match classify_beta_set(&g).beta_set_shape {
        BetaSetShape::Singleton { beta0 } => assert!((beta0 - phi.ln()).abs() < 1e-9),
        other => panic!("{other:?}"),
    }
    let v0 = g.vertex("v0").unwrap();
    let e = gurevich_entropy(&g, v0, &c()).unwrap();
    assert!((e.estimate - phi.ln()).abs() < 1e-6);
    let f = first_return_series(&g, phi.ln(), v0, &c());
    assert!((f.value - 1.0).abs() < 1e-9);
    let r = verify_harmonic(&g, phi.ln(), &[Some(1.0), Some(phi)], HarmonicMode::Harmonic).unwrap();
    assert!(r.residual_max < 1e-12);
}

#[test]
fn single_loop_geometric_series() {
    let g = Family::single_loop(1).truncate(1).unwrap();
    let v = g.vertex("v").unwrap();
    for beta in [0.5f64, 1.0, 3.0] {
        let z = (-beta).exp();
        let est = green_function(&g, beta, v, v, &c());
        assert!((est.value - 1.0 / (1.0 - z)).abs() < 1e-9);
        assert!((first_return_series(&g, beta, v, &c()).value - z).abs() < 1e-15);
    }
}

#[test]
fn regular_tree_green_function() {
    let d = 3.0;
    let beta: f64 = 2.5;
    let g = Family::regular_tree(3).truncate(12).unwrap();
    let e = g.vertex("e").unwrap();
    let z = (-beta).exp();
    let f = (1.0 - (1.0 - 4.0 * (d - 1.0) * z * z).sqrt()) / (2.0 * (d - 1.0) * z);
    let exact = 1.0 / (1.0 - d * z * f);
    let est = green_function(&g, beta, e, e, &c());
    assert!((est.value - exact).abs() < 1e-12, "{} vs {exact}", est.value);
}

#[test]
fn ray_graph_weights_and_transience() {
    let g = Family::ray_graph().truncate(10).unwrap();
    let v0 = g.vertex("v0").unwrap();
    let ids = RaySpec::parse("spine").unwrap().vertex_ids(&g, 6).unwrap();
    let w = ray_weight(&g, 0.7, &ids, &c()).unwrap();
    assert!((w.log_value + 0.7 * 5.0).abs() < 1e-12);
    let r = classify_recurrence(&g, 0.7, v0, &c()).unwrap();
    assert_eq!(r.verdict, Recurrence::Transient);
    let v5 = g.vertex("v5").unwrap();
    assert!((green_function(&g, 0.7, v0, v5, &c()).value - (-3.5f64).exp()).abs() < 1e-15);
}

#[test]
fn dihedral_is_almost_undirected() {
    let g = Family::dihedral().truncate(10).unwrap();
    assert!(matches!(almost_undirected_test(&g, 6).verdict, AlmostUndirected::Yes(3)));
}

#[test]
fn return_paths_prescribe_entropy() {
    use kmsgraph::transform::{apply_return_paths, plan_return_paths, ReturnMode};
    let h = std::f64::consts::LN_2;
    let g0 = Family::ray_graph().truncate(40).unwrap();
    let v0 = g0.vertex("v0").unwrap();
    let plan = plan_return_paths(&g0, v0, h, ReturnMode::RecurrentExact, &c()).unwrap();
    let out = apply_return_paths(&g0, &plan).unwrap();
    let f = first_return_series(&out.gamma, h, v0, &c());
    assert!((f.value - 1.0).abs() < 1e-9);
    let e = gurevich_entropy(&out.gamma, v0, &c()).unwrap();
    assert!((e.estimate - h).abs() < 1e-6);
    assert!(apply_return_paths(&out.gamma, &plan).is_err());
}
