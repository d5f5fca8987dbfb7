//! One handler per verb. Each returns the report as a JSON value.

use kmsgraph::ends::{
    almost_undirected_test, bratteli_ends, end_fingerprint, graph_to_bratteli, minimal_end_test, minimal_ideal_test,
    reaches_avoiding, EndApprox, EndSearch,
};
use kmsgraph::graph::format::{digraph_to_json, graph_to_json};
use kmsgraph::harmonic::{
    bratteli_decompose, chain_to_vector, doob_transform, face_mask, solve_level_chain, verify_harmonic, Exhaustion,
    HarmonicMode,
};
use kmsgraph::martin::{
    boundary_limit_test, extremal_measure_along_ray, martin_column, martin_kernel, ray_weight, summability,
    SummabilityOptions,
};
use kmsgraph::spectral::{
    classify_beta_set, classify_recurrence, first_return_series, green_function, gurevich_entropy,
};
use kmsgraph::transform::{
    apply_return_paths, attach_finite, build_glue, glue_feasibility, plan_return_paths, simple_path_sum_checked,
    transfer_harmonic_source, turn_into_source, Attachment, GlueSpec, ReturnMode, ReturnPathPlan, TransferDirection,
};
use kmsgraph::{
    ConformalMeasure, Digraph, Error, Family, FinitePath, HarmonicVector, ParsedGraph, Result, VertexId, WeightMatrix,
};
use serde_json::{json, Map, Value};

use crate::args::{DirectionArg, ModeArg, ReturnModeArg, Verb};
use crate::context::{
    harmonic_vector, num, ray, read_json, split_names, usize_list, vector_doc, vector_json, vertex_list, vertex_or_base, Context,
};

macro_rules! to_value {
    ($x:expr) => {
        serde_json::to_value($x).expect("report types serialize")
    };
}

/// Inserts `pairs` into an object report.
fn with(mut report: Value, pairs: Vec<(&str, Value)>) -> Value {
    if let Value::Object(m) = &mut report {
        for (k, v) in pairs {
            m.insert(k.to_string(), v);
        }
    }
    report
}

fn names(g: &Digraph, ids: &[VertexId]) -> Value {
    Value::Array(ids.iter().map(|&v| Value::String(g.name(v).to_string())).collect())
}

fn mask(g: &Digraph, ids: &[VertexId]) -> Vec<bool> {
    let mut m = vec![false; g.len()];
    for v in ids {
        m[v.0] = true;
    }
    m
}

fn graph_summary(g: &Digraph) -> Value {
    let arrows: f64 = g.bundles().iter().map(|b| b.mult).sum();
    json!({
        "vertices": g.len(),
        "bundles": g.bundles().len(),
        "arrows": arrows,
        "base_vertex": g.base().map(|b| g.name(b).to_string()),
        "boundary": g.boundary_vertices().len(),
        "sinks": names(g, &g.sinks()),
        "strongly_connected": g.is_strongly_connected(),
        "family": g.family(),
    })
}

pub fn dispatch(ctx: &Context, verb: &Verb) -> Result<Value> {
    match verb {
        Verb::Parse { emit, matrix } => parse(ctx, *emit, *matrix),
        Verb::Green { from, to } => green(ctx, from.as_deref(), to.as_deref()),
        Verb::Entropy { vertex } => entropy(ctx, vertex.as_deref()),
        Verb::FirstReturn { vertex } => first_return(ctx, vertex.as_deref()),
        Verb::Classify { vertex } => classify(ctx, vertex.as_deref()),
        Verb::BetaSet => Ok(to_value!(&classify_beta_set(&ctx.graph()?))),
        Verb::HarmonicVerify { vector, mode } => harmonic_verify(ctx, vector, *mode),
        Verb::DeltaSolve { base, horizon, levels, escape_horizon, face, vectors } => {
            delta_solve(ctx, base.as_deref(), *horizon, *levels, *escape_horizon, face.as_deref(), *vectors)
        }
        Verb::Martin { base, from, to, column } => martin(ctx, base.as_deref(), from.as_deref(), to, *column),
        Verb::RayWeight { ray: r, length } => ray_weight_cmd(ctx, r, *length),
        Verb::Summability { base, ray: r, ray_len } => summability_cmd(ctx, base.as_deref(), r, *ray_len),
        Verb::ExtremalRay { base, ray: r, ray_len } => extremal_ray(ctx, base.as_deref(), r, *ray_len),
        Verb::BoundaryTest { base, ray: r, vector, sample, schedule, threshold } => {
            boundary_test(ctx, base.as_deref(), r, vector, sample.as_deref(), schedule, *threshold)
        }
        Verb::Ends { base, ray: rays, resolution, shift, reach, avoid } => {
            ends(ctx, base.as_deref(), rays, *resolution, *shift, reach.as_deref(), avoid.as_deref())
        }
        Verb::BratteliEnds { top, resolution, window, horizon, width_cap } => {
            let g = ctx.graph()?;
            let top = vertex_or_base(&g, top.as_deref())?;
            let search = EndSearch { window: *window, horizon: *horizon, width_cap: *width_cap, seeds: None };
            Ok(to_value!(&bratteli_ends(&g, top, *resolution, &search)?))
        }
        Verb::MinimalEnd { base, ray: r, resolution, horizon, window } => {
            minimal_end(ctx, base.as_deref(), r.as_deref(), *resolution, *horizon, *window)
        }
        Verb::AlmostUndirected { n_max } => Ok(to_value!(&almost_undirected_test(&ctx.graph()?, *n_max))),
        Verb::ToBratteli { base, levels, escape_horizon, emit } => {
            to_bratteli(ctx, base.as_deref(), *levels, *escape_horizon, *emit)
        }
        Verb::SourceTurn { base, emit } => source_turn(ctx, base.as_deref(), *emit),
        Verb::Transfer { base, vector, direction } => transfer(ctx, base.as_deref(), vector, *direction),
        Verb::PlanReturns { base, h, mode } => {
            let g = ctx.graph()?;
            let v0 = vertex_or_base(&g, base.as_deref())?;
            Ok(to_value!(&plan_return_paths(&g, v0, *h, return_mode(*mode), &ctx.controls())?))
        }
        Verb::ApplyReturns { base, plan, h, mode, emit } => {
            apply_returns(ctx, base.as_deref(), plan.as_deref(), *h, *mode, *emit)
        }
        Verb::Attach { at, emit } => attach(ctx, at, *emit),
        Verb::Glue { spec, emit } => glue(ctx, spec.as_deref(), *emit),
        Verb::Kms { vector, mu, nu, doob } => kms(ctx, vector, mu, nu.as_deref(), *doob),
        Verb::Example { name, alpha } => crate::presets::example(ctx, name, *alpha),
        Verb::Selftest { only } => crate::presets::selftest(ctx, only.as_deref()),
    }
}

fn parse(ctx: &Context, emit: bool, matrix: bool) -> Result<Value> {
    let src = ctx.source()?;
    let g = &src.graph;
    let kind = match &src.parsed {
        ParsedGraph::Explicit(_) => "explicit",
        ParsedGraph::Leveled(_) => "leveled",
        ParsedGraph::Bratteli(_) => "bratteli",
    };
    let mut pairs = vec![("kind", json!(kind)), ("document", graph_to_json(&src.parsed))];
    if kind != "explicit" {
        pairs.push(("depth", json!(src.depth)));
    }
    if emit {
        pairs.push(("graph", digraph_to_json(g)));
    }
    if matrix {
        let beta = ctx.beta()?;
        let a = WeightMatrix::new(g, beta);
        let entries: Vec<Value> = g
            .vertices()
            .flat_map(|v| {
                a.row(v)
                    .iter()
                    .map(|&(w, x)| json!({"src": g.name(v), "dst": g.name(VertexId(w)), "weight": num(x)}))
                    .collect::<Vec<_>>()
            })
            .collect();
        pairs.push(("matrix", json!({"beta": num(beta), "entries": entries})));
    }
    Ok(with(graph_summary(g), pairs))
}

fn green(ctx: &Context, from: Option<&str>, to: Option<&str>) -> Result<Value> {
    let g = ctx.graph()?;
    let beta = ctx.beta()?;
    let v = vertex_or_base(&g, from)?;
    let w = vertex_or_base(&g, to)?;
    let est = green_function(&g, beta, v, w, &ctx.controls());
    Ok(with(to_value!(&est), vec![("from", json!(g.name(v))), ("to", json!(g.name(w))), ("beta", num(beta))]))
}

fn entropy(ctx: &Context, vertex: Option<&str>) -> Result<Value> {
    let g = ctx.graph()?;
    let v = vertex_or_base(&g, vertex)?;
    let e = gurevich_entropy(&g, v, &ctx.controls())?;
    Ok(with(to_value!(&e), vec![("vertex", json!(g.name(v)))]))
}

fn first_return(ctx: &Context, vertex: Option<&str>) -> Result<Value> {
    let g = ctx.graph()?;
    let beta = ctx.beta()?;
    let v = vertex_or_base(&g, vertex)?;
    let est = first_return_series(&g, beta, v, &ctx.controls());
    Ok(with(to_value!(&est), vec![("vertex", json!(g.name(v))), ("beta", num(beta))]))
}

fn classify(ctx: &Context, vertex: Option<&str>) -> Result<Value> {
    let g = ctx.graph()?;
    let beta = ctx.beta()?;
    let v = vertex_or_base(&g, vertex)?;
    let r = classify_recurrence(&g, beta, v, &ctx.controls())?;
    Ok(with(to_value!(&r), vec![("vertex", json!(g.name(v))), ("beta", num(beta))]))
}

fn harmonic_verify(ctx: &Context, vector: &str, mode: ModeArg) -> Result<Value> {
    let g = ctx.graph()?;
    let doc = vector_doc(&g, vector)?;
    let beta = match (ctx.global.beta, doc.beta) {
        (Some(b), _) | (None, Some(b)) => b,
        (None, None) => return Err(Error::precondition("--beta is required")),
    };
    let mode = match mode {
        ModeArg::Harmonic => HarmonicMode::Harmonic,
        ModeArg::Almost => HarmonicMode::Almost,
    };
    let r = verify_harmonic(&g, beta, &doc.values, mode)?;
    Ok(with(to_value!(&r), vec![("beta", num(beta))]))
}

fn delta_solve(
    ctx: &Context,
    base: Option<&str>,
    horizon: Option<usize>,
    levels: Option<usize>,
    escape_horizon: usize,
    face: Option<&str>,
    vectors: bool,
) -> Result<Value> {
    let g = ctx.graph()?;
    let beta = ctx.beta()?;
    let c = ctx.controls();
    let v0 = vertex_or_base(&g, base)?;
    let dec = bratteli_decompose(&g, v0, &Exhaustion::Bfs, beta, levels, escape_horizon, &c)?;
    let horizon = horizon.unwrap_or(dec.levels());
    let face = face.map(|f| vertex_list(&g, f).map(|ids| face_mask(&g, &ids))).transpose()?;
    let sol = solve_level_chain(&g, &dec, horizon, face.as_deref(), &c)?;
    let mut pairs = vec![
        ("boundary", to_value!(&dec.boundary_names(&g))),
        ("statuses", to_value!(&dec.statuses)),
        ("extreme_count", json!(sol.distinct.len())),
        ("defects", Value::Array(sol.distinct.iter().map(|ch| num(ch.telescoping_defect(&dec))).collect())),
    ];
    if vectors {
        let level = horizon.min(dec.levels());
        let vs = sol
            .distinct
            .iter()
            .map(|ch| {
                let psi = chain_to_vector(&g, &dec, ch, level, &c)?;
                let r = psi.residuals(&g, HarmonicMode::Harmonic)?;
                Ok(vector_json(&g, &psi, Some(r.residual_max)))
            })
            .collect::<Result<Vec<_>>>()?;
        pairs.push(("vectors", Value::Array(vs)));
    }
    Ok(with(to_value!(&sol), pairs))
}

fn martin(ctx: &Context, base: Option<&str>, from: Option<&str>, to: &str, column: bool) -> Result<Value> {
    let g = ctx.graph()?;
    let beta = ctx.beta()?;
    let v0 = vertex_or_base(&g, base)?;
    let w = g.vertex(to)?;
    if column {
        let col = martin_column(&g, beta, v0, w, &ctx.controls())?;
        let values: Map<String, Value> = g.vertices().map(|v| (g.name(v).to_string(), num(col.values[v.0]))).collect();
        return Ok(json!({
            "beta": num(beta),
            "base_vertex": g.name(v0),
            "target": g.name(w),
            "base_green": num(col.base_green),
            "status": to_value!(&col.status),
            "tail_bound": col.tail_bound.map(num),
            "values": values,
        }));
    }
    let v = vertex_or_base(&g, from)?;
    let k = martin_kernel(&g, beta, v0, v, w, &ctx.controls())?;
    Ok(with(
        to_value!(&k),
        vec![("beta", num(beta)), ("base_vertex", json!(g.name(v0))), ("from", json!(g.name(v))), ("to", json!(to))],
    ))
}

fn ray_weight_cmd(ctx: &Context, r: &str, length: usize) -> Result<Value> {
    let g = ctx.graph()?;
    let beta = ctx.beta()?;
    let spec = ray(r)?;
    let ids = spec.vertex_ids(&g, length)?;
    let w = ray_weight(&g, beta, &ids, &ctx.controls())?;
    Ok(with(to_value!(&w), vec![("ray", json!(spec.to_string())), ("prefix", names(&g, &ids)), ("beta", num(beta))]))
}

fn options(ray_len: Option<usize>) -> SummabilityOptions {
    let mut o = SummabilityOptions::default();
    if let Some(n) = ray_len {
        o.ray_len = n;
    }
    o
}

fn summability_cmd(ctx: &Context, base: Option<&str>, r: &str, ray_len: Option<usize>) -> Result<Value> {
    let g = ctx.graph()?;
    let beta = ctx.beta()?;
    let v0 = vertex_or_base(&g, base)?;
    let rep = summability(&g, beta, v0, &ray(r)?, &options(ray_len), &ctx.controls())?;
    let vector = rep.vector.as_ref().map(|psi| vector_json(&g, psi, None));
    Ok(with(to_value!(&rep), vec![("vector", vector.unwrap_or(Value::Null))]))
}

fn extremal_ray(ctx: &Context, base: Option<&str>, r: &str, ray_len: Option<usize>) -> Result<Value> {
    let g = ctx.graph()?;
    let beta = ctx.beta()?;
    let v0 = vertex_or_base(&g, base)?;
    let m = extremal_measure_along_ray(&g, beta, v0, &ray(r)?, &options(ray_len), &ctx.controls())?;
    let res = m.psi.residuals(&g, HarmonicMode::Harmonic)?;
    Ok(with(vector_json(&g, &m.psi, Some(res.residual_max)), vec![("ray", json!(r))]))
}

fn boundary_test(
    ctx: &Context,
    base: Option<&str>,
    r: &str,
    vector: &str,
    sample: Option<&str>,
    schedule: &str,
    threshold: f64,
) -> Result<Value> {
    let g = ctx.graph()?;
    let psi = harmonic_vector(&g, vector, ctx.global.beta, base)?;
    let beta = psi.beta;
    let v0 = psi.base;
    let sample = match sample {
        Some(s) => vertex_list(&g, s)?,
        None => {
            let dist = g.distances_from(v0);
            g.vertices().filter(|v| dist[v.0].is_some_and(|d| d <= 2) && !g.is_boundary(*v)).collect()
        }
    };
    let ks = usize_list(schedule, "--schedule")?;
    let m = ConformalMeasure::new(psi);
    let rep = boundary_limit_test(&g, beta, v0, &ray(r)?, &m, &sample, &ks, threshold, &ctx.controls())?;
    Ok(to_value!(&rep))
}

fn ends(
    ctx: &Context,
    base: Option<&str>,
    rays: &[String],
    resolution: usize,
    shift: usize,
    reach: Option<&str>,
    avoid: Option<&str>,
) -> Result<Value> {
    let g = ctx.graph()?;
    let v0 = vertex_or_base(&g, base)?;
    let mut approx: Vec<EndApprox> = Vec::new();
    for r in rays {
        let spec = ray(r)?.shift(shift);
        approx.push(end_fingerprint(&g, v0, &spec, &Exhaustion::Bfs, resolution)?);
    }
    let mut classes: Vec<Vec<String>> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    for (i, a) in approx.iter().enumerate() {
        match reps.iter().position(|&j| approx[j].agrees_with(a, resolution)) {
            Some(c) => classes[c].push(a.ray.clone()),
            None => {
                reps.push(i);
                classes.push(vec![a.ray.clone()]);
            }
        }
    }
    let mut report = json!({
        "resolution": resolution,
        "fingerprints": to_value!(&approx),
        "classes": classes,
        "distinct_ends": reps.len(),
    });
    if let Some(pair) = reach {
        let (from, to) = match split_names(pair)[..] {
            [from, to] => (from, to),
            _ => return Err(Error::schema("--reach", "expected FROM,TO")),
        };
        let (v, w) = (g.vertex(from)?, g.vertex(to)?);
        let avoid_ids = avoid.map(|a| vertex_list(&g, a)).transpose()?.unwrap_or_default();
        let reachable = reaches_avoiding(&g, v, w, &mask(&g, &avoid_ids));
        report = with(
            report,
            vec![("reach", json!({"from": from, "to": to, "avoid": names(&g, &avoid_ids), "reachable": reachable}))],
        );
    }
    Ok(report)
}

fn minimal_end(
    ctx: &Context,
    base: Option<&str>,
    r: Option<&str>,
    resolution: usize,
    horizon: usize,
    window: usize,
) -> Result<Value> {
    let g = ctx.graph()?;
    let v0 = vertex_or_base(&g, base)?;
    match r {
        Some(r) => {
            let fp = end_fingerprint(&g, v0, &ray(r)?, &Exhaustion::Bfs, resolution)?;
            let rep = minimal_end_test(&g, &fp, horizon, window);
            Ok(with(to_value!(&rep), vec![("ray", json!(fp.ray)), ("fingerprint", to_value!(&fp.fingerprint))]))
        }
        None => {
            let found = bratteli_ends(&g, v0, resolution, &EndSearch::default())?;
            let rows = found
                .ends
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let rep = minimal_ideal_test(&g, e, horizon, window)?;
                    Ok(with(to_value!(&rep), vec![("end", json!(i)), ("support", to_value!(&e.support))]))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(json!({"stabilized": found.stabilized, "rows": rows}))
        }
    }
}

fn to_bratteli(ctx: &Context, base: Option<&str>, levels: Option<usize>, escape: usize, emit: bool) -> Result<Value> {
    let g = ctx.graph()?;
    let v0 = vertex_or_base(&g, base)?;
    let red = graph_to_bratteli(&g, v0, &Exhaustion::Bfs, ctx.global.beta, levels, escape, &ctx.controls())?;
    let sizes: Vec<usize> = red.levels.iter().map(Vec::len).collect();
    let mut pairs = vec![("level_sizes", json!(sizes))];
    if emit {
        pairs.push(("diagram", digraph_to_json(&red.truncation()?)));
    }
    Ok(with(to_value!(&red), pairs))
}

fn source_turn(ctx: &Context, base: Option<&str>, emit: bool) -> Result<Value> {
    let g = ctx.graph()?;
    let v0 = vertex_or_base(&g, base)?;
    let s = turn_into_source(&g, v0)?;
    let removed: Vec<VertexId> = g.vertices().filter(|&v| s.id(g.name(v)).is_none()).collect();
    let mut pairs = vec![
        ("base_vertex", json!(g.name(v0))),
        ("pruned", names(&g, &removed)),
        ("arrows_into_base", json!(g.in_bundles(v0).len())),
    ];
    if let Some(beta) = ctx.global.beta {
        let r = match simple_path_sum_checked(&g, beta, v0, v0, &ctx.controls()) {
            Ok(s) => to_value!(&s.estimate),
            Err(Error::Precondition(msg)) => json!({"value": 0.0, "note": msg}),
            Err(e) => return Err(e),
        };
        pairs.push(("return_sum", r));
        pairs.push(("beta", num(beta)));
    }
    if emit {
        pairs.push(("graph", digraph_to_json(&s)));
    }
    Ok(with(graph_summary(&s), pairs))
}

fn transfer(ctx: &Context, base: Option<&str>, vector: &str, direction: DirectionArg) -> Result<Value> {
    let g = ctx.graph()?;
    let v0 = vertex_or_base(&g, base)?;
    let (dir, domain) = match direction {
        DirectionArg::Forward => (TransferDirection::Forward, g.clone()),
        DirectionArg::Inverse => (TransferDirection::Inverse, turn_into_source(&g, v0)?),
    };
    let phi = harmonic_vector(&domain, vector, ctx.global.beta, Some(g.name(v0)))?;
    let out = transfer_harmonic_source(&g, phi.beta, v0, &phi, dir, &ctx.controls())?;
    let codomain = match dir {
        TransferDirection::Forward => turn_into_source(&g, v0)?,
        TransferDirection::Inverse => g,
    };
    let res = out.residuals(&codomain, HarmonicMode::Harmonic)?;
    Ok(with(vector_json(&codomain, &out, Some(res.residual_max)), vec![("direction", to_value!(&dir))]))
}

fn return_mode(m: ReturnModeArg) -> ReturnMode {
    match m {
        ReturnModeArg::RecurrentExact => ReturnMode::RecurrentExact,
        ReturnModeArg::RecurrentWithLoop => ReturnMode::RecurrentWithLoop,
        ReturnModeArg::TransientVariant => ReturnMode::TransientVariant,
    }
}

fn apply_returns(
    ctx: &Context,
    base: Option<&str>,
    plan: Option<&str>,
    h: Option<f64>,
    mode: ReturnModeArg,
    emit: bool,
) -> Result<Value> {
    let g = ctx.graph()?;
    let c = ctx.controls();
    let plan: ReturnPathPlan = match (plan, h) {
        (Some(text), _) => serde_json::from_value(read_json(text, "--plan")?)
            .map_err(|e| Error::schema("plan", e.to_string()))?,
        (None, Some(h)) => plan_return_paths(&g, vertex_or_base(&g, base)?, h, return_mode(mode), &c)?,
        (None, None) => return Err(Error::precondition("pass --plan or --h")),
    };
    let out = apply_return_paths(&g, &plan)?;
    let describe = |gamma: &Digraph| -> Result<Value> {
        let v0 = gamma.vertex(&plan.base)?;
        let f = first_return_series(gamma, plan.h, v0, &c);
        let mut s = graph_summary(gamma);
        s = with(s, vec![("first_return_at_h", to_value!(&f))]);
        if emit {
            s = with(s, vec![("graph", digraph_to_json(gamma))]);
        }
        Ok(s)
    };
    let prime = out.gamma_prime.as_ref().map(describe).transpose()?;
    Ok(json!({
        "plan": to_value!(&plan),
        "gamma": describe(&out.gamma)?,
        "gamma_prime": prime,
    }))
}

/// A finite digraph for `attach`: a finite family name or a graph file.
fn finite_piece(ctx: &Context, source: &str) -> Result<Digraph> {
    if Family::names().contains(&source) {
        let f = Family::from_params(source, &json!({}))?;
        if !f.is_finite() {
            return Err(Error::precondition(format!("family {source} is infinite")));
        }
        return f.truncate(0);
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| Error::precondition(format!("cannot read attachment {source}: {e}")))?;
    kmsgraph::graph::parse_graph(&text, false)?.materialize(ctx.depth())
}

fn attach(ctx: &Context, at: &[String], emit: bool) -> Result<Value> {
    let g = ctx.graph()?;
    let mut assignments = Vec::new();
    for item in at {
        let (vertex, rest) =
            item.split_once('=').ok_or_else(|| Error::schema("--at", format!("expected VERTEX=SOURCE, got {item:?}")))?;
        let (source, anchor) = match rest.rsplit_once('@') {
            Some((s, a)) => (s, Some(a)),
            None => (rest, None),
        };
        let piece = finite_piece(ctx, source)?;
        let anchor = match anchor {
            Some(a) => a.to_string(),
            None => piece.name(piece.base_or_first()?).to_string(),
        };
        assignments.push(Attachment { vertex: g.vertex(vertex)?, graph: piece, anchor });
    }
    let out = attach_finite(&g, &assignments)?;
    let mut pairs = vec![("attached", json!(at))];
    if emit {
        pairs.push(("graph", digraph_to_json(&out)));
    }
    Ok(with(graph_summary(&out), pairs))
}

fn glue(ctx: &Context, spec: Option<&str>, emit: bool) -> Result<Value> {
    let spec = match spec {
        Some(text) => GlueSpec::from_json(&read_json(text, "--spec")?)?,
        None if ctx.global.family.as_deref() == Some("glue") => GlueSpec::from_json(&ctx.params()?)?,
        None => return Err(Error::precondition("pass --spec or --family glue --params")),
    };
    let depth = ctx.depth();
    if let Some(beta) = ctx.global.beta {
        let custom = (ctx.global.max_power.is_some() || ctx.global.tol.is_some()).then(|| {
            let mut c = kmsgraph::harmonic::extension_controls();
            if let Some(p) = ctx.global.max_power {
                c.max_power = p;
            }
            if let Some(t) = ctx.global.tol {
                c.tol = t;
            }
            c
        });
        let f = glue_feasibility(&spec, depth, beta, custom.as_ref())?;
        let rows = to_value!(&f.diagrams);
        return Ok(with(to_value!(&f), vec![("rows", rows), ("spec", spec.to_json())]));
    }
    let g = build_glue(&spec, depth)?;
    let mut pairs = vec![("spec", spec.to_json()), ("depth", json!(depth))];
    if emit {
        pairs.push(("graph", digraph_to_json(&g)));
    }
    Ok(with(graph_summary(&g), pairs))
}

fn path_of(g: &Digraph, text: &str) -> Result<FinitePath> {
    let parts = split_names(text);
    if parts.is_empty() {
        return Err(Error::schema("path", "empty vertex list"));
    }
    FinitePath::through_names(g, &parts)
}

fn kms(ctx: &Context, vector: &str, mu: &[String], nu: Option<&str>, doob: bool) -> Result<Value> {
    let g = ctx.graph()?;
    let psi: HarmonicVector = harmonic_vector(&g, vector, ctx.global.beta, None)?;
    let m = ConformalMeasure::new(psi.clone());
    let mut path = path_of(&g, &mu[0])?;
    for piece in &mu[1..] {
        path = path.concat(&path_of(&g, piece)?)?;
    }
    let nu_path = match nu {
        Some(t) => path_of(&g, t)?,
        None => path.clone(),
    };
    let mut report = json!({
        "beta": num(m.beta()),
        "mu": names(&g, &path.vertices(&g)),
        "nu": names(&g, &nu_path.vertices(&g)),
        "cylinder_measure": num(m.measure_of_cylinder(&path)?),
        "state_value": num(m.kms_state_value(&path, &nu_path)?),
        "refinement_defect": num(m.refinement_defect(&g, &path)?),
    });
    if doob {
        let tol = ctx.global.tol.unwrap_or(1e-9);
        let d = doob_transform(&g, &psi, tol)?;
        let rows: Vec<Value> = d
            .rows
            .iter()
            .enumerate()
            .flat_map(|(v, row)| {
                row.iter()
                    .map(|&(w, p)| json!({"src": g.name(VertexId(v)), "dst": g.name(VertexId(w)), "p": num(p)}))
                    .collect::<Vec<_>>()
            })
            .collect();
        report = with(report, vec![("doob", json!({"max_row_defect": num(d.max_row_defect), "entries": rows}))]);
    }
    Ok(report)
}
