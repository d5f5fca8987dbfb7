use std::fmt;

use super::{Digraph, FinitePath, VertexId};
use crate::error::{Error, Result};

/// Shape of a ray before any shift is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum RayKind {
    /// Eventually periodic vertex sequence.
    Periodic { preamble: Vec<String>, cycle: Vec<String> },
    /// Pascal ray `t_k`: the diagonal for k = 0, column x = k for k > 0, row y = −k for k < 0.
    PascalEnd(i64),
    /// Pascal ray through (⌊αk⌋+1, k−⌊αk⌋+1).
    PascalSlope(f64),
    /// Dihedral ray t_s, t_{s+1}, …
    DihedralTop(i64),
    /// Dihedral ray b_s, b_{s−1}, …
    DihedralBottom(i64),
    CarLeft,
    CarRight,
    ThreeExitMiddle,
    ThreeExitPlus,
    ThreeExitMinus,
    /// v0, v1, v2, … (ray-graph and the glue spine).
    Spine,
    /// Alternating word ray 0101… in a regular tree.
    TreeAlternating,
}

/// A ray description together with a shift offset.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySpec {
    pub kind: RayKind,
    pub offset: usize,
}

impl RaySpec {
    pub fn new(kind: RayKind) -> Self {
        RaySpec { kind, offset: 0 }
    }

    pub fn periodic(preamble: Vec<String>, cycle: Vec<String>) -> Result<Self> {
        if preamble.is_empty() && cycle.is_empty() {
            return Err(Error::precondition("periodic ray needs at least one vertex"));
        }
        Ok(RaySpec::new(RayKind::Periodic { preamble, cycle }))
    }

    /// Name of the `i`-th vertex, `None` past the end of a finite periodic description.
    pub fn vertex(&self, i: usize) -> Option<String> {
        let k = i + self.offset;
        Some(match &self.kind {
            RayKind::Periodic { preamble, cycle } => {
                if k < preamble.len() {
                    preamble[k].clone()
                } else if cycle.is_empty() {
                    return None;
                } else {
                    cycle[(k - preamble.len()) % cycle.len()].clone()
                }
            }
            RayKind::PascalEnd(t) => {
                let (x, y) = pascal_end(*t, k as i64);
                format!("({x},{y})")
            }
            RayKind::PascalSlope(alpha) => {
                let a = (alpha * k as f64).floor() as i64;
                format!("({},{})", a + 1, k as i64 - a + 1)
            }
            RayKind::DihedralTop(s) => format!("t{}", s + k as i64),
            RayKind::DihedralBottom(s) => format!("b{}", s - k as i64),
            RayKind::CarLeft => format!("L{k}:0"),
            RayKind::CarRight => {
                if k == 0 {
                    "L0:0".into()
                } else {
                    format!("L{k}:1")
                }
            }
            RayKind::ThreeExitMiddle | RayKind::Spine => format!("v{k}"),
            RayKind::ThreeExitPlus => if k == 0 { "v0".into() } else { format!("p{k}") },
            RayKind::ThreeExitMinus => if k == 0 { "v0".into() } else { format!("m{k}") },
            RayKind::TreeAlternating => {
                if k == 0 {
                    "e".into()
                } else {
                    (0..k).map(|j| if j % 2 == 0 { '0' } else { '1' }).collect()
                }
            }
        })
    }

    /// Whether every prefix has pairwise distinct vertices.
    pub fn distinct_vertices(&self) -> bool {
        match &self.kind {
            RayKind::Periodic { preamble, cycle } => {
                if !cycle.is_empty() {
                    return false;
                }
                let mut seen = std::collections::HashSet::new();
                preamble.iter().skip(self.offset).all(|v| seen.insert(v))
            }
            _ => true,
        }
    }

    /// σ^k: drops the first `k` arrows.
    pub fn shift(&self, k: usize) -> RaySpec {
        match &self.kind {
            RayKind::Periodic { preamble, cycle } => {
                let start = self.offset + k;
                let (preamble, cycle) = if start <= preamble.len() {
                    (preamble[start..].to_vec(), cycle.clone())
                } else if cycle.is_empty() {
                    (Vec::new(), Vec::new())
                } else {
                    let r = (start - preamble.len()) % cycle.len();
                    let mut c = cycle[r..].to_vec();
                    c.extend_from_slice(&cycle[..r]);
                    (Vec::new(), c)
                };
                RaySpec { kind: RayKind::Periodic { preamble, cycle }, offset: 0 }
            }
            kind => RaySpec { kind: kind.clone(), offset: self.offset + k },
        }
    }

    /// Ids of the first `count` vertices in `g`.
    pub fn vertex_ids(&self, g: &Digraph, count: usize) -> Result<Vec<VertexId>> {
        (0..count)
            .map(|i| {
                let name = self.vertex(i).ok_or_else(|| Error::precondition("ray description is too short"))?;
                g.id(&name).ok_or_else(|| Error::precondition(format!("ray vertex {name} is not materialized")))
            })
            .collect()
    }

    /// Number of leading vertices present in `g`, capped at `cap`.
    pub fn materialized_len(&self, g: &Digraph, cap: usize) -> usize {
        (0..cap).take_while(|&i| self.vertex(i).and_then(|n| g.id(&n)).is_some()).count()
    }

    /// The path formed by the first `n` arrows.
    pub fn prefix(&self, g: &Digraph, n: usize) -> Result<FinitePath> {
        let ids = self.vertex_ids(g, n + 1)?;
        FinitePath::through(g, &ids)
    }

    /// Parses the textual form produced by `Display`.
    pub fn parse(text: &str) -> Result<RaySpec> {
        let (body, offset) = match text.rsplit_once('@') {
            Some((b, o)) => (b, o.parse::<usize>().map_err(|_| Error::schema("ray", "bad offset after @"))?),
            None => (text, 0),
        };
        let (head, arg) = match body.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (body, None),
        };
        let int_arg = |a: Option<&str>| -> Result<i64> {
            a.ok_or_else(|| Error::schema("ray", format!("{head} needs an argument")))?
                .parse::<i64>()
                .map_err(|_| Error::schema("ray", "expected an integer argument"))
        };
        let kind = match head {
            "pascal-diagonal" => RayKind::PascalEnd(0),
            "pascal-t" => RayKind::PascalEnd(int_arg(arg)?),
            "pascal-slope" => RayKind::PascalSlope(
                arg.and_then(|a| a.parse::<f64>().ok())
                    .filter(|a| (0.0..=1.0).contains(a))
                    .ok_or_else(|| Error::schema("ray", "pascal-slope needs alpha in [0,1]"))?,
            ),
            "dihedral-top" => RayKind::DihedralTop(int_arg(arg)?),
            "dihedral-bottom" => RayKind::DihedralBottom(int_arg(arg)?),
            "car-left" => RayKind::CarLeft,
            "car-right" => RayKind::CarRight,
            "three-exit-middle" => RayKind::ThreeExitMiddle,
            "three-exit-plus" => RayKind::ThreeExitPlus,
            "three-exit-minus" => RayKind::ThreeExitMinus,
            "spine" => RayKind::Spine,
            "tree" => RayKind::TreeAlternating,
            "periodic" => {
                let a = arg.ok_or_else(|| Error::schema("ray", "periodic needs vertices"))?;
                let (pre, cyc) = a.split_once(';').unwrap_or((a, ""));
                let split = |s: &str| s.split(',').filter(|x| !x.is_empty()).map(String::from).collect::<Vec<_>>();
                return Ok(RaySpec::periodic(split(pre), split(cyc))?.shift(offset));
            }
            other => return Err(Error::schema("ray", format!("unknown ray kind {other:?}"))),
        };
        Ok(RaySpec { kind, offset })
    }
}

fn pascal_end(t: i64, k: i64) -> (i64, i64) {
    match t {
        0 => ((k + 1) / 2 + 1, k / 2 + 1),
        t if t > 0 => {
            if k < t {
                (k + 1, 1)
            } else {
                (t, k - t + 2)
            }
        }
        t => {
            let t = -t;
            if k < t {
                (1, k + 1)
            } else {
                (k - t + 2, t)
            }
        }
    }
}

impl std::str::FromStr for RaySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<RaySpec> {
        RaySpec::parse(text)
    }
}

impl fmt::Display for RaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RayKind::Periodic { preamble, cycle } => write!(f, "periodic:{};{}", preamble.join(","), cycle.join(","))?,
            RayKind::PascalEnd(0) => write!(f, "pascal-diagonal")?,
            RayKind::PascalEnd(t) => write!(f, "pascal-t:{t}")?,
            RayKind::PascalSlope(a) => write!(f, "pascal-slope:{a}")?,
            RayKind::DihedralTop(s) => write!(f, "dihedral-top:{s}")?,
            RayKind::DihedralBottom(s) => write!(f, "dihedral-bottom:{s}")?,
            RayKind::CarLeft => write!(f, "car-left")?,
            RayKind::CarRight => write!(f, "car-right")?,
            RayKind::ThreeExitMiddle => write!(f, "three-exit-middle")?,
            RayKind::ThreeExitPlus => write!(f, "three-exit-plus")?,
            RayKind::ThreeExitMinus => write!(f, "three-exit-minus")?,
            RayKind::Spine => write!(f, "spine")?,
            RayKind::TreeAlternating => write!(f, "tree")?,
        }
        if self.offset > 0 {
            write!(f, "@{}", self.offset)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn diagonal_shift_by_two_starts_at_2_2() {
        let ray = RaySpec::new(RayKind::PascalEnd(0)).shift(2);
        let names: Vec<_> = (0..3).map(|i| ray.vertex(i).unwrap()).collect();
        assert_eq!(names, ["(2,2)", "(3,2)", "(3,3)"]);
    }

    #[test]
    fn shift_zero_is_identity() {
        let ray = RaySpec::parse("periodic:a,b;c,d").unwrap();
        assert_eq!(ray.shift(0), ray);
    }

    #[test]
    fn periodic_shift_by_period_keeps_cycle() {
        let ray = RaySpec::periodic(vec!["a".into(), "b".into(), "c".into()], vec!["x".into(), "y".into()]).unwrap();
        let shifted = ray.shift(2);
        match &shifted.kind {
            RayKind::Periodic { preamble, cycle } => {
                assert_eq!(preamble, &["c"]);
                assert_eq!(cycle, &["x", "y"]);
            }
            _ => unreachable!(),
        }
        for i in 0..10 {
            assert_eq!(shifted.vertex(i), ray.vertex(i + 2));
        }
    }

    #[test]
    fn pascal_rays_are_paths() {
        let g = Family::pascal().truncate(12).unwrap();
        for t in -3..=3 {
            let ray = RaySpec::new(RayKind::PascalEnd(t));
            let p = ray.prefix(&g, 10).unwrap();
            assert_eq!(p.len(), 10);
        }
        let slope = RaySpec::new(RayKind::PascalSlope(0.3));
        assert!(slope.prefix(&g, 12).is_ok());
    }

    #[test]
    fn display_round_trip() {
        for text in ["pascal-t:-2@3", "dihedral-bottom:-2", "car-left@1", "periodic:a;b,c", "pascal-slope:0.3"] {
            let ray = RaySpec::parse(text).unwrap();
            assert_eq!(RaySpec::parse(&ray.to_string()).unwrap(), ray);
        }
    }
}
