//! Graph loading and argument decoding shared by the verbs.

use std::collections::BTreeMap;
use std::fs;

use kmsgraph::graph::format::parse_value;
use kmsgraph::{Controls, Digraph, Error, HarmonicVector, ParsedGraph, RaySpec, Result, VertexId};
use serde_json::{Map, Value};

use crate::args::Global;

pub const DEFAULT_DEPTH: usize = 12;

/// The materialized graph of a command together with where it came from.
pub struct Source {
    pub graph: Digraph,
    pub parsed: ParsedGraph,
    pub depth: usize,
}

pub struct Context {
    pub global: Global,
}

impl Context {
    pub fn new(global: Global) -> Self {
        Context { global }
    }

    pub fn controls(&self) -> Controls {
        let mut c = Controls::default();
        if let Some(p) = self.global.max_power {
            c.max_power = p;
        }
        if let Some(t) = self.global.tol {
            c.tol = t;
        }
        c
    }

    pub fn depth(&self) -> usize {
        self.global.depth.unwrap_or(DEFAULT_DEPTH)
    }

    pub fn beta(&self) -> Result<f64> {
        let b = self.global.beta.ok_or_else(|| Error::precondition("--beta is required"))?;
        if !b.is_finite() {
            return Err(Error::precondition("--beta must be finite"));
        }
        Ok(b)
    }

    pub fn params(&self) -> Result<Value> {
        match &self.global.params {
            None => Ok(Value::Object(Map::new())),
            Some(text) => read_json(text, "--params"),
        }
    }

    pub fn source(&self) -> Result<Source> {
        let depth = self.depth();
        let parsed = match (&self.global.graph, &self.global.family) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::precondition(format!("cannot read {}: {e}", path.display())))?;
                kmsgraph::graph::parse_graph(&text, false)?
            }
            (None, Some(name)) => {
                let doc = serde_json::json!({"kind": "family", "name": name, "params": self.params()?});
                parse_value(&doc, false)?
            }
            (None, None) => return Err(Error::precondition("a graph is required: pass --graph FILE or --family NAME")),
        };
        let graph = parsed.materialize(depth)?;
        Ok(Source { graph, parsed, depth })
    }

    pub fn graph(&self) -> Result<Digraph> {
        Ok(self.source()?.graph)
    }
}

/// Reads inline JSON, or the JSON file at `text` when it does not start with `{` or `[`.
pub fn read_json(text: &str, what: &str) -> Result<Value> {
    let trimmed = text.trim_start();
    let body = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        text.to_string()
    } else {
        fs::read_to_string(text).map_err(|e| Error::precondition(format!("cannot read {what} file {text}: {e}")))?
    };
    serde_json::from_str(&body).map_err(|e| Error::schema(what, e.to_string()))
}

/// The named vertex, or the base vertex when no name is given.
pub fn vertex_or_base(g: &Digraph, name: Option<&str>) -> Result<VertexId> {
    match name {
        Some(n) => g.vertex(n),
        None => g.base_or_first(),
    }
}

/// Splits a comma-separated list of vertex names, keeping commas inside
/// brackets, so `(1,1),(2,1)` yields two names.
pub fn split_names(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts.retain(|s| !s.is_empty());
    parts
}

pub fn vertex_list(g: &Digraph, text: &str) -> Result<Vec<VertexId>> {
    split_names(text).into_iter().map(|n| g.vertex(n)).collect()
}

pub fn usize_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Error::schema(what, format!("{s:?} is not a nonnegative integer"))))
        .collect()
}

pub fn ray(text: &str) -> Result<RaySpec> {
    RaySpec::parse(text)
}

/// Decodes a vertex-value document: either `{vertex: value}` or
/// `{"values": {vertex: value}, "beta": …, "base_vertex": …, "excluded": [vertex, …]}`.
pub struct VectorDoc {
    pub values: Vec<Option<f64>>,
    pub beta: Option<f64>,
    pub base: Option<String>,
    pub excluded: Vec<bool>,
}

pub fn vector_doc(g: &Digraph, text: &str) -> Result<VectorDoc> {
    let doc = read_json(text, "--vector")?;
    let obj = doc.as_object().ok_or_else(|| Error::schema("vector", "expected an object"))?;
    let (map, beta, base) = match obj.get("values") {
        Some(Value::Object(values)) => (
            values,
            obj.get("beta").and_then(Value::as_f64),
            obj.get("base_vertex").and_then(Value::as_str).map(String::from),
        ),
        Some(_) => return Err(Error::schema("vector.values", "expected an object")),
        None => (obj, None, None),
    };
    let mut excluded = vec![false; g.len()];
    if obj.contains_key("values") {
        if let Some(list) = obj.get("excluded") {
            let list = list.as_array().ok_or_else(|| Error::schema("vector.excluded", "expected an array"))?;
            for name in list {
                let name = name.as_str().ok_or_else(|| Error::schema("vector.excluded", "expected vertex names"))?;
                excluded[g.vertex(name)?.0] = true;
            }
        }
    }
    let mut values = vec![None; g.len()];
    for (name, x) in map {
        let v = g.vertex(name)?;
        let x = x.as_f64().ok_or_else(|| Error::schema(format!("vector.{name}"), "expected a number"))?;
        values[v.0] = Some(x);
    }
    Ok(VectorDoc { values, beta, base, excluded })
}

/// A harmonic vector at `beta` with every vertex valued. Vertices the
/// document excludes, and unlisted truncation-boundary vertices, are
/// excluded and get 0.
pub fn harmonic_vector(g: &Digraph, text: &str, beta: Option<f64>, base: Option<&str>) -> Result<HarmonicVector> {
    let doc = vector_doc(g, text)?;
    let beta = match (beta, doc.beta) {
        (Some(b), Some(d)) if (b - d).abs() > 1e-12 => {
            return Err(Error::precondition(format!("--beta {b} differs from the vector's beta {d}")))
        }
        (Some(b), _) | (None, Some(b)) => b,
        (None, None) => return Err(Error::precondition("--beta is required")),
    };
    let base = match base.or(doc.base.as_deref()) {
        Some(n) => g.vertex(n)?,
        None => g.base_or_first()?,
    };
    let mut values = Vec::with_capacity(g.len());
    let mut excluded = Vec::with_capacity(g.len());
    for v in g.vertices() {
        match doc.values[v.0] {
            Some(x) => {
                values.push(x);
                excluded.push(doc.excluded[v.0]);
            }
            None if g.is_boundary(v) || doc.excluded[v.0] => {
                values.push(0.0);
                excluded.push(true);
            }
            None => return Err(Error::precondition(format!("the vector has no value at {}", g.name(v)))),
        }
    }
    Ok(HarmonicVector { beta, base, values, excluded })
}

/// `{beta, base_vertex, values, excluded}` with an optional residual.
pub fn vector_json(g: &Digraph, psi: &HarmonicVector, residual_max: Option<f64>) -> Value {
    let values: BTreeMap<String, f64> = psi.to_map(g);
    let excluded: Vec<Value> =
        g.vertices().filter(|v| psi.excluded[v.0]).map(|v| Value::String(g.name(v).to_string())).collect();
    let mut m = Map::new();
    m.insert("beta".into(), num(psi.beta));
    m.insert("base_vertex".into(), g.name(psi.base).into());
    m.insert("values".into(), serde_json::to_value(values).unwrap());
    m.insert("excluded".into(), Value::Array(excluded));
    if let Some(r) = residual_max {
        m.insert("residual_max".into(), num(r));
    }
    Value::Object(m)
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::split_names;

    #[test]
    fn names_with_commas() {
        assert_eq!(split_names("(1,1), (2,1),v3"), vec!["(1,1)", "(2,1)", "v3"]);
        assert_eq!(split_names(" a ,, b"), vec!["a", "b"]);
        assert!(split_names("").is_empty());
    }
}
