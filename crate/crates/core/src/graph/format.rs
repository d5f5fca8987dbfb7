//! JSON graph documents.

use serde_json::{Map, Value};

use super::leveled::{LevelArrow, LevelBlocks, LevelRule, Tail};
use super::{family::family_to_json, BratteliDiagram, Digraph, DigraphBuilder, Family, LevelGeneratedGraph};
use crate::error::{Error, Result};

/// A parsed graph document.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedGraph {
    Explicit(Digraph),
    Leveled(LevelGeneratedGraph),
    Bratteli(BratteliDiagram),
}

impl ParsedGraph {
    /// A concrete digraph: explicit graphs as is, others truncated at `depth`.
    pub fn materialize(&self, depth: usize) -> Result<Digraph> {
        match self {
            ParsedGraph::Explicit(g) => Ok(g.clone()),
            ParsedGraph::Leveled(l) => l.truncate(depth),
            ParsedGraph::Bratteli(b) => b.materialize(depth),
        }
    }

    pub fn family(&self) -> Option<&Family> {
        match self {
            ParsedGraph::Leveled(l) => l.family_ref(),
            _ => None,
        }
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::schema(format!("{ctx}{key}"), "missing field"))
}

fn as_str<'a>(v: &'a Value, ctx: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::schema(ctx, "expected a string"))
}

fn as_num(v: &Value, ctx: &str) -> Result<f64> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| Error::schema(ctx, "expected a finite number"))
}

fn as_index(v: &Value, ctx: &str) -> Result<usize> {
    let x = as_num(v, ctx)?;
    if x < 0.0 || x.fract() != 0.0 {
        return Err(Error::schema(ctx, "expected a nonnegative integer"));
    }
    Ok(x as usize)
}

fn as_array<'a>(v: &'a Value, ctx: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::schema(ctx, "expected an array"))
}

fn mult_of(v: Option<&Value>, ctx: &str) -> Result<f64> {
    match v {
        None => Ok(1.0),
        Some(v) => as_num(v, ctx),
    }
}

fn check_mult(mult: f64, src: &str, dst: &str, ctx: &str) -> Result<()> {
    if mult == 0.0 {
        return Err(Error::ZeroMultiplicity { src: src.into(), dst: dst.into() });
    }
    if mult < 1.0 || mult.fract() != 0.0 {
        return Err(Error::schema(ctx, "multiplicity must be a positive integer"));
    }
    Ok(())
}

/// Parses a graph document. With `require_no_sinks`, explicit graphs and
/// truncations holding interior sinks are rejected.
pub fn parse_graph(text: &str, require_no_sinks: bool) -> Result<ParsedGraph> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::schema("document", e.to_string()))?;
    parse_value(&doc, require_no_sinks)
}

pub fn parse_value(doc: &Value, require_no_sinks: bool) -> Result<ParsedGraph> {
    let obj = doc.as_object().ok_or_else(|| Error::schema("document", "expected a JSON object"))?;
    let kind = as_str(field(obj, "kind", "")?, "kind")?;
    let parsed = match kind {
        "explicit" => ParsedGraph::Explicit(parse_explicit(obj)?),
        "leveled" => ParsedGraph::Leveled(LevelGeneratedGraph::blocks(parse_blocks(obj)?)?),
        "bratteli" => ParsedGraph::Bratteli(BratteliDiagram::from_blocks(parse_blocks(obj)?)?),
        "family" => {
            let name = as_str(field(obj, "name", "")?, "name")?;
            let params = obj.get("params").cloned().unwrap_or(Value::Object(Map::new()));
            ParsedGraph::Leveled(LevelGeneratedGraph::family(Family::from_params(name, &params)?))
        }
        other => return Err(Error::schema("kind", format!("unknown kind {other:?}"))),
    };
    if require_no_sinks {
        match &parsed {
            ParsedGraph::Explicit(g) => g.require_no_sinks()?,
            other => other.materialize(4)?.require_no_sinks()?,
        }
    }
    Ok(parsed)
}

fn parse_explicit(obj: &Map<String, Value>) -> Result<Digraph> {
    let mut b = DigraphBuilder::new();
    for (i, v) in as_array(field(obj, "vertices", "")?, "vertices")?.iter().enumerate() {
        let name = as_str(v, &format!("vertices[{i}]"))?;
        if b.id(name).is_some() {
            return Err(Error::schema(format!("vertices[{i}]"), format!("duplicate vertex {name:?}")));
        }
        b.vertex(name);
    }
    for (i, a) in as_array(field(obj, "arrows", "")?, "arrows")?.iter().enumerate() {
        let ctx = format!("arrows[{i}].");
        let a = a.as_object().ok_or_else(|| Error::schema(format!("arrows[{i}]"), "expected an object"))?;
        let src = as_str(field(a, "src", &ctx)?, &format!("{ctx}src"))?;
        let dst = as_str(field(a, "dst", &ctx)?, &format!("{ctx}dst"))?;
        let mult = mult_of(a.get("mult"), &format!("{ctx}mult"))?;
        let pot = as_num(field(a, "F", &ctx)?, &format!("{ctx}F"))?;
        let s = b.id(src).ok_or_else(|| Error::DanglingEndpoint(src.into()))?;
        let d = b.id(dst).ok_or_else(|| Error::DanglingEndpoint(dst.into()))?;
        check_mult(mult, src, dst, &format!("{ctx}mult"))?;
        b.arrow(s, d, mult, pot);
    }
    if let Some(base) = obj.get("base_vertex") {
        let name = as_str(base, "base_vertex")?;
        let id = b.id(name).ok_or_else(|| Error::DanglingEndpoint(name.into()))?;
        b.base(id);
    }
    if let Some(boundary) = obj.get("boundary") {
        for (i, v) in as_array(boundary, "boundary")?.iter().enumerate() {
            let name = as_str(v, &format!("boundary[{i}]"))?;
            let id = b.id(name).ok_or_else(|| Error::DanglingEndpoint(name.into()))?;
            b.mark_boundary(id);
        }
    }
    if let Some(f) = obj.get("family") {
        b.set_family(as_str(f, "family")?);
    }
    b.build()
}

fn parse_blocks(obj: &Map<String, Value>) -> Result<LevelBlocks> {
    let mut levels = Vec::new();
    for (n, level) in as_array(field(obj, "levels", "")?, "levels")?.iter().enumerate() {
        let ctx = format!("levels[{n}]");
        let l = level.as_object().ok_or_else(|| Error::schema(&ctx, "expected an object"))?;
        let names = as_array(field(l, "vertices", &format!("{ctx}."))?, &format!("{ctx}.vertices"))?
            .iter()
            .enumerate()
            .map(|(i, v)| as_str(v, &format!("{ctx}.vertices[{i}]")).map(String::from))
            .collect::<Result<Vec<_>>>()?;
        levels.push(names);
    }
    let mut level_arrows = Vec::new();
    for (n, block) in as_array(field(obj, "level_arrows", "")?, "level_arrows")?.iter().enumerate() {
        let mut arrows = Vec::new();
        for (i, a) in as_array(block, &format!("level_arrows[{n}]"))?.iter().enumerate() {
            let ctx = format!("level_arrows[{n}][{i}].");
            let a = a.as_object().ok_or_else(|| Error::schema(&ctx, "expected an object"))?;
            let src_idx = as_index(field(a, "src_idx", &ctx)?, &format!("{ctx}src_idx"))?;
            let dst_idx = as_index(field(a, "dst_idx", &ctx)?, &format!("{ctx}dst_idx"))?;
            let mult = mult_of(a.get("mult"), &format!("{ctx}mult"))?;
            let potential = as_num(field(a, "F", &ctx)?, &format!("{ctx}F"))?;
            let name = |lvl: usize, idx: usize| {
                levels.get(lvl).and_then(|l| l.get(idx)).cloned().unwrap_or_else(|| format!("#{idx}"))
            };
            check_mult(mult, &name(n, src_idx), &name(n + 1, dst_idx), &format!("{ctx}mult"))?;
            arrows.push(LevelArrow { src_idx, dst_idx, mult, potential });
        }
        level_arrows.push(arrows);
    }
    let tail = match obj.get("tail") {
        None => Tail::None,
        Some(t) => {
            let t = t.as_object().ok_or_else(|| Error::schema("tail", "expected an object"))?;
            match as_str(field(t, "rule", "tail.")?, "tail.rule")? {
                "none" => Tail::None,
                "repeat" => Tail::Repeat,
                "family" => {
                    let name = as_str(field(t, "name", "tail.")?, "tail.name")?;
                    let params = t.get("params").cloned().unwrap_or(Value::Object(Map::new()));
                    Tail::Family(Box::new(Family::from_params(name, &params)?))
                }
                other => return Err(Error::schema("tail.rule", format!("unknown rule {other:?}"))),
            }
        }
    };
    Ok(LevelBlocks { levels, level_arrows, tail })
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Serializes a digraph as an explicit document.
pub fn digraph_to_json(g: &Digraph) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), "explicit".into());
    m.insert("vertices".into(), Value::Array(g.names().iter().map(|n| Value::String(n.clone())).collect()));
    let arrows = g
        .bundles()
        .iter()
        .map(|b| {
            let mut a = Map::new();
            a.insert("src".into(), g.name(b.src).into());
            a.insert("dst".into(), g.name(b.dst).into());
            a.insert("mult".into(), num(b.mult));
            a.insert("F".into(), num(b.potential));
            Value::Object(a)
        })
        .collect();
    m.insert("arrows".into(), Value::Array(arrows));
    if let Some(base) = g.base() {
        m.insert("base_vertex".into(), g.name(base).into());
    }
    let boundary: Vec<Value> = g.boundary_vertices().iter().map(|&v| g.name(v).into()).collect();
    if !boundary.is_empty() {
        m.insert("boundary".into(), Value::Array(boundary));
    }
    if g.family() != "explicit" {
        m.insert("family".into(), g.family().into());
    }
    Value::Object(m)
}

fn blocks_to_json(kind: &str, b: &LevelBlocks) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), kind.into());
    let levels = b
        .levels
        .iter()
        .map(|l| {
            let mut o = Map::new();
            o.insert("vertices".into(), Value::Array(l.iter().map(|n| Value::String(n.clone())).collect()));
            Value::Object(o)
        })
        .collect();
    m.insert("levels".into(), Value::Array(levels));
    let blocks = b
        .level_arrows
        .iter()
        .map(|block| {
            Value::Array(
                block
                    .iter()
                    .map(|a| {
                        let mut o = Map::new();
                        o.insert("src_idx".into(), num(a.src_idx as f64));
                        o.insert("dst_idx".into(), num(a.dst_idx as f64));
                        o.insert("mult".into(), num(a.mult));
                        o.insert("F".into(), num(a.potential));
                        Value::Object(o)
                    })
                    .collect(),
            )
        })
        .collect();
    m.insert("level_arrows".into(), Value::Array(blocks));
    let tail = match &b.tail {
        Tail::None => serde_json::json!({"rule": "none"}),
        Tail::Repeat => serde_json::json!({"rule": "repeat"}),
        Tail::Family(f) => {
            let mut o = family_to_json(f).as_object().cloned().unwrap();
            o.insert("rule".into(), "family".into());
            Value::Object(o)
        }
    };
    m.insert("tail".into(), tail);
    Value::Object(m)
}

pub fn graph_to_json(g: &ParsedGraph) -> Value {
    match g {
        ParsedGraph::Explicit(d) => digraph_to_json(d),
        ParsedGraph::Leveled(l) => match &l.rule {
            LevelRule::Blocks(b) => blocks_to_json("leveled", b),
            LevelRule::Family(f) => {
                let mut o = family_to_json(f).as_object().cloned().unwrap();
                o.insert("kind".into(), "family".into());
                Value::Object(o)
            }
        },
        ParsedGraph::Bratteli(b) => match b.rule() {
            LevelRule::Blocks(blocks) => blocks_to_json("bratteli", blocks),
            LevelRule::Family(f) => {
                let mut o = family_to_json(f).as_object().cloned().unwrap();
                o.insert("kind".into(), "family".into());
                Value::Object(o)
            }
        },
    }
}

/// Serializes with sorted keys and shortest round-trip floats.
pub fn serialize_graph(g: &ParsedGraph) -> String {
    graph_to_json(g).to_string()
}
