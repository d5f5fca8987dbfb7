use serde_json::{json, Map, Value};

use super::leveled::{materialize_levels, LevelArrow};
use super::{Digraph, DigraphBuilder};
use crate::error::{Error, Result};
use crate::transform::glue::GlueSpec;

/// Upper bound on the number of vertices a single truncation may hold.
pub const VERTEX_CAP: usize = 2_000_000;

/// Multiplicities `d_i` of the three-exit graph.
#[derive(Debug, Clone, PartialEq)]
pub enum ExitMultiplicity {
    /// `d_i = base^i`.
    Power(f64),
    /// Explicit list `d_1, d_2, …`; the last entry repeats.
    List(Vec<f64>),
}

impl ExitMultiplicity {
    pub fn get(&self, i: usize) -> f64 {
        match self {
            ExitMultiplicity::Power(b) => b.powi(i as i32),
            ExitMultiplicity::List(l) => l[(i - 1).min(l.len() - 1)],
        }
    }
}

/// Built-in graph families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Lattice ℕ×ℕ with potentials `u'_k` on (k,n)→(k+1,n) and `v'_n` on (k,n)→(k,n+1).
    Pascal { u: Vec<f64>, v: Vec<f64> },
    /// Cayley graph of the infinite dihedral group with generators a and b.
    DihedralCayley { fa: f64, fb: f64 },
    RegularTree { degree: usize, potential: f64 },
    Golden { potential: f64 },
    SingleLoop { loops: u32, potential: f64 },
    /// Two-vertex-per-level diagram whose cross arrows from level j carry ln(j)/α.
    CarPhase { alpha: f64 },
    ThreeExit { d: ExitMultiplicity },
    RayGraph { potential: f64 },
    Glue(Box<GlueSpec>),
}

fn repeat_last(list: &[f64], k: usize) -> f64 {
    list[(k - 1).min(list.len() - 1)]
}

fn num_param(params: &Value, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::schema(format!("params.{key}"), "expected a finite number")),
    }
}

fn list_param(params: &Value, key: &str) -> Result<Option<Vec<f64>>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) if !items.is_empty() => items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| {
                    Error::schema(format!("params.{key}[{i}]"), "expected a finite number")
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some),
        Some(_) => Err(Error::schema(format!("params.{key}"), "expected a non-empty array of numbers")),
    }
}

fn integral(x: f64, field: &str) -> Result<f64> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x)
    } else {
        Err(Error::schema(field, "expected a positive integer"))
    }
}

impl Family {
    pub fn pascal() -> Self {
        Family::Pascal { u: vec![1.0], v: vec![1.0] }
    }

    pub fn golden() -> Self {
        Family::Golden { potential: 1.0 }
    }

    pub fn single_loop(loops: u32) -> Self {
        Family::SingleLoop { loops, potential: 1.0 }
    }

    pub fn ray_graph() -> Self {
        Family::RayGraph { potential: 1.0 }
    }

    pub fn dihedral() -> Self {
        Family::DihedralCayley { fa: 1.0, fb: 1.0 }
    }

    pub fn car_phase(alpha: f64) -> Self {
        Family::CarPhase { alpha }
    }

    pub fn regular_tree(degree: usize) -> Self {
        Family::RegularTree { degree, potential: 1.0 }
    }

    pub fn three_exit_power(base: f64) -> Self {
        Family::ThreeExit { d: ExitMultiplicity::Power(base) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Pascal { .. } => "pascal",
            Family::DihedralCayley { .. } => "dihedral-cayley",
            Family::RegularTree { .. } => "regular-tree",
            Family::Golden { .. } => "golden",
            Family::SingleLoop { .. } => "single-loop",
            Family::CarPhase { .. } => "car-phase",
            Family::ThreeExit { .. } => "three-exit",
            Family::RayGraph { .. } => "ray-graph",
            Family::Glue(_) => "glue",
        }
    }

    pub fn names() -> &'static [&'static str] {
        &[
            "pascal",
            "dihedral-cayley",
            "regular-tree",
            "golden",
            "single-loop",
            "car-phase",
            "three-exit",
            "ray-graph",
            "glue",
        ]
    }

    /// Parses a family from its name and parameter object.
    pub fn from_params(name: &str, params: &Value) -> Result<Self> {
        if !(params.is_object() || params.is_null()) {
            return Err(Error::schema("params", "expected an object"));
        }
        Ok(match name {
            "pascal" => Family::Pascal {
                u: list_param(params, "u")?.unwrap_or_else(|| vec![1.0]),
                v: list_param(params, "v")?.unwrap_or_else(|| vec![1.0]),
            },
            "dihedral-cayley" => Family::DihedralCayley {
                fa: num_param(params, "fa", 1.0)?,
                fb: num_param(params, "fb", 1.0)?,
            },
            "regular-tree" => {
                let degree = integral(num_param(params, "degree", 3.0)?, "params.degree")? as usize;
                if !(2..=10).contains(&degree) {
                    return Err(Error::schema("params.degree", "degree must lie in 2..=10"));
                }
                Family::RegularTree { degree, potential: num_param(params, "F", 1.0)? }
            }
            "golden" => Family::Golden { potential: num_param(params, "F", 1.0)? },
            "single-loop" => Family::SingleLoop {
                loops: integral(num_param(params, "loops", 1.0)?, "params.loops")? as u32,
                potential: num_param(params, "F", 1.0)?,
            },
            "car-phase" => {
                let alpha = num_param(params, "alpha", 1.0)?;
                if alpha <= 0.0 {
                    return Err(Error::schema("params.alpha", "alpha must be positive"));
                }
                Family::CarPhase { alpha }
            }
            "three-exit" => {
                let d = match list_param(params, "d")? {
                    Some(list) => {
                        for (i, x) in list.iter().enumerate() {
                            integral(*x, &format!("params.d[{i}]"))?;
                        }
                        ExitMultiplicity::List(list)
                    }
                    None => ExitMultiplicity::Power(integral(num_param(params, "d_base", 2.0)?, "params.d_base")?),
                };
                Family::ThreeExit { d }
            }
            "ray-graph" => Family::RayGraph { potential: num_param(params, "F", 1.0)? },
            "glue" => Family::Glue(Box::new(GlueSpec::from_json(params)?)),
            other => return Err(Error::schema("name", format!("unknown family {other:?}"))),
        })
    }

    /// Parameter object that [`Family::from_params`] maps back to `self`.
    pub fn params(&self) -> Value {
        match self {
            Family::Pascal { u, v } => json!({"u": u, "v": v}),
            Family::DihedralCayley { fa, fb } => json!({"fa": fa, "fb": fb}),
            Family::RegularTree { degree, potential } => json!({"degree": *degree as f64, "F": potential}),
            Family::Golden { potential } | Family::RayGraph { potential } => json!({"F": potential}),
            Family::SingleLoop { loops, potential } => json!({"loops": *loops as f64, "F": potential}),
            Family::CarPhase { alpha } => json!({"alpha": alpha}),
            Family::ThreeExit { d } => match d {
                ExitMultiplicity::Power(b) => json!({"d_base": b}),
                ExitMultiplicity::List(l) => json!({"d": l}),
            },
            Family::Glue(spec) => spec.to_json(),
        }
    }

    pub fn base_name(&self) -> String {
        match self {
            Family::Pascal { .. } => "(1,1)".into(),
            Family::DihedralCayley { .. } => "t0".into(),
            Family::RegularTree { .. } => "e".into(),
            Family::SingleLoop { .. } => "v".into(),
            Family::CarPhase { .. } => "L0:0".into(),
            _ => "v0".into(),
        }
    }

    /// True when the family is finite, so every depth yields the same graph.
    pub fn is_finite(&self) -> bool {
        matches!(self, Family::Golden { .. } | Family::SingleLoop { .. })
    }

    /// Width of level `n` for families organized as Bratteli-style levels.
    pub fn level_width(&self, n: usize) -> Option<usize> {
        match self {
            Family::Pascal { .. } => Some(n + 1),
            Family::CarPhase { .. } => Some(if n == 0 { 1 } else { 2 }),
            Family::RayGraph { .. } => Some(1),
            _ => None,
        }
    }

    pub fn level_names(&self, n: usize) -> Vec<String> {
        match self {
            Family::Pascal { .. } => (1..=n + 1).map(|x| format!("({},{})", x, n + 2 - x)).collect(),
            Family::CarPhase { .. } => {
                if n == 0 {
                    vec!["L0:0".into()]
                } else {
                    vec![format!("L{n}:0"), format!("L{n}:1")]
                }
            }
            Family::RayGraph { .. } => vec![format!("v{n}")],
            _ => Vec::new(),
        }
    }

    /// Bundles from level `n` to level `n + 1`.
    pub fn level_transition(&self, n: usize) -> Vec<LevelArrow> {
        let arrow = |s, d, f| LevelArrow { src_idx: s, dst_idx: d, mult: 1.0, potential: f };
        match self {
            Family::Pascal { u, v } => {
                let mut out = Vec::with_capacity(2 * (n + 1));
                for i in 0..=n {
                    let (x, y) = (i + 1, n + 1 - i);
                    out.push(arrow(i, i + 1, repeat_last(u, x)));
                    out.push(arrow(i, i, repeat_last(v, y)));
                }
                out
            }
            Family::CarPhase { alpha } => {
                if n == 0 {
                    vec![arrow(0, 0, 1.0), arrow(0, 1, 1.0)]
                } else {
                    let cross = (n as f64).ln() / alpha;
                    vec![arrow(0, 0, 1.0), arrow(0, 1, cross), arrow(1, 1, 1.0), arrow(1, 0, cross)]
                }
            }
            Family::RayGraph { potential } => vec![arrow(0, 0, *potential)],
            _ => Vec::new(),
        }
    }

    /// Materializes the depth-`depth` truncation.
    pub fn truncate(&self, depth: usize) -> Result<Digraph> {
        match self {
            Family::Pascal { .. } | Family::CarPhase { .. } | Family::RayGraph { .. } => {
                if matches!(self, Family::Pascal { .. }) && (depth + 1) * (depth + 2) / 2 > VERTEX_CAP {
                    return Err(Error::ResourceCap(format!("pascal depth {depth}")));
                }
                materialize_levels(self, depth, self.name())
            }
            Family::DihedralCayley { fa, fb } => Ok(dihedral(depth as i64, *fa, *fb)),
            Family::RegularTree { degree, potential } => regular_tree(*degree, depth, *potential),
            Family::Golden { potential } => {
                let mut b = DigraphBuilder::new().family("golden");
                b.arrow_named("v0", "v1", 1.0, *potential);
                b.arrow_named("v1", "v0", 1.0, *potential);
                b.arrow_named("v1", "v1", 1.0, *potential);
                let v0 = b.id("v0").unwrap();
                b.base(v0);
                b.build()
            }
            Family::SingleLoop { loops, potential } => {
                let mut b = DigraphBuilder::new().family("single-loop");
                b.arrow_named("v", "v", *loops as f64, *potential);
                let v = b.id("v").unwrap();
                b.base(v);
                b.build()
            }
            Family::ThreeExit { d } => Ok(three_exit(d, depth)),
            Family::Glue(spec) => crate::transform::glue::materialize(spec, depth),
        }
    }
}

fn dihedral(depth: i64, fa: f64, fb: f64) -> Digraph {
    let mut b = DigraphBuilder::new().family("dihedral-cayley");
    let t0 = b.vertex("t0");
    b.vertex("b0");
    for k in 1..=depth {
        for n in [k, -k] {
            b.vertex(&format!("t{n}"));
            b.vertex(&format!("b{n}"));
        }
    }
    for n in -depth..=depth {
        let (t, bb) = (format!("t{n}"), format!("b{n}"));
        if n < depth {
            b.arrow_named(&t, &format!("t{}", n + 1), 1.0, fa);
        }
        b.arrow_named(&t, &bb, 1.0, fb);
        if n > -depth {
            b.arrow_named(&bb, &format!("b{}", n - 1), 1.0, fa);
        }
        b.arrow_named(&bb, &t, 1.0, fb);
    }
    let top = b.id(&format!("t{depth}")).unwrap();
    let bottom = b.id(&format!("b{}", -depth)).unwrap();
    b.mark_boundary(top);
    b.mark_boundary(bottom);
    b.base(t0);
    b.build().expect("dihedral truncation is valid")
}

fn regular_tree(degree: usize, depth: usize, potential: f64) -> Result<Digraph> {
    let size: f64 = 1.0 + (1..=depth).map(|k| degree as f64 * ((degree - 1) as f64).powi(k as i32 - 1)).sum::<f64>();
    if size > VERTEX_CAP as f64 {
        return Err(Error::ResourceCap(format!("regular tree of degree {degree} at depth {depth}")));
    }
    let mut b = DigraphBuilder::new().family("regular-tree");
    let root = b.vertex("e");
    b.base(root);
    let mut frontier = vec![String::new()];
    for level in 1..=depth {
        let mut next = Vec::new();
        for word in &frontier {
            let last = word.chars().last().and_then(|c| c.to_digit(10)).map(|d| d as usize);
            for letter in (0..degree).filter(|&l| Some(l) != last) {
                let child = format!("{word}{letter}");
                let parent = if word.is_empty() { "e".to_string() } else { word.clone() };
                b.arrow_named(&parent, &child, 1.0, potential);
                b.arrow_named(&child, &parent, 1.0, potential);
                if level == depth {
                    let id = b.id(&child).unwrap();
                    b.mark_boundary(id);
                }
                next.push(child);
            }
        }
        frontier = next;
    }
    if depth == 0 {
        b.mark_boundary(root);
    }
    b.build()
}

fn three_exit(d: &ExitMultiplicity, depth: usize) -> Digraph {
    let depth = depth.max(1);
    let mut b = DigraphBuilder::new().family("three-exit");
    let v0 = b.vertex("v0");
    b.base(v0);
    b.arrow_named("v0", "v1", 1.0, 1.0);
    b.arrow_named("v0", "p1", 1.0, 1.0);
    b.arrow_named("v0", "m1", 1.0, 1.0);
    for i in 1..depth {
        b.arrow_named(&format!("v{i}"), &format!("v{}", i + 1), 1.0, 1.0);
    }
    for j in 1..2 * depth {
        b.arrow_named(&format!("p{j}"), &format!("p{}", j + 1), 1.0, 1.0);
        b.arrow_named(&format!("m{j}"), &format!("m{}", j + 1), 1.0, 1.0);
    }
    for i in 1..=depth {
        let mult = d.get(i);
        b.arrow_named(&format!("p{}", 2 * i - 1), &format!("v{i}"), mult, 1.0);
        b.arrow_named(&format!("m{}", 2 * i - 1), &format!("v{i}"), mult, 1.0);
    }
    for name in [format!("v{depth}"), format!("p{}", 2 * depth), format!("m{}", 2 * depth)] {
        let id = b.id(&name).unwrap();
        b.mark_boundary(id);
    }
    b.build().expect("three-exit truncation is valid")
}

/// Serializes a family as `{"name", "params"}`.
pub fn family_to_json(f: &Family) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), Value::String(f.name().into()));
    m.insert("params".into(), f.params());
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pascal_depth_two() {
        let g = Family::pascal().truncate(2).unwrap();
        let mut names: Vec<_> = g.names().to_vec();
        names.sort();
        assert_eq!(names, ["(1,1)", "(1,2)", "(1,3)", "(2,1)", "(2,2)", "(3,1)"]);
        assert_eq!(g.boundary_vertices().len(), 3);
        assert_eq!(g.bundles().len(), 6);
    }

    #[test]
    fn car_phase_depth_three() {
        let g = Family::car_phase(1.0).truncate(3).unwrap();
        assert_eq!(g.len(), 7);
        let l1 = g.vertex("L1:0").unwrap();
        assert_eq!(g.out_bundles(l1).len(), 2);
    }

    #[test]
    fn coherence_across_depths() {
        let fams = [
            Family::pascal(),
            Family::dihedral(),
            Family::regular_tree(3),
            Family::car_phase(1.0),
            Family::three_exit_power(2.0),
            Family::ray_graph(),
        ];
        for f in fams {
            for m in 1..4 {
                let small = f.truncate(m).unwrap();
                let big = f.truncate(m + 2).unwrap();
                let keep: Vec<bool> = big.names().iter().map(|n| small.id(n).is_some()).collect();
                let restricted = big.induced(&keep);
                assert!(restricted.same_structure(&small), "{} depth {m}", f.name());
            }
        }
    }

    #[test]
    fn dihedral_has_no_interior_sinks() {
        let g = Family::dihedral().truncate(4).unwrap();
        assert_eq!(g.len(), 18);
        assert!(g.require_no_sinks().is_ok());
    }

    #[test]
    fn params_round_trip() {
        for f in [Family::pascal(), Family::car_phase(0.5), Family::three_exit_power(2.0), Family::single_loop(3)] {
            let back = Family::from_params(f.name(), &f.params()).unwrap();
            assert_eq!(back, f);
        }
    }
}
