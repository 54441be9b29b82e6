//! The answer-line grammar of provider responses.
//!
//! Only lines with a known prefix are read; anything else (reasoning, prose)
//! is ignored. A response whose answer lines do not parse is malformed and
//! drops out of the vote.

use std::collections::BTreeMap;

use crate::dsl::{default_tau_with, parse_op_line, EditKind, EditOp, EditProgram, KindFamily, Operand, ParamDecl, TauDefaults};
use crate::geometry::{snap_vec, Vec3};
use crate::shape::{Feature, Hexahedron, ShapeGraph};
use crate::symbolic::SymExpr;

/// Name of the control parameter of a seed program.
pub const SEED_PARAM: &str = "x";

fn answer_lines<'a>(text: &'a str, prefix: &str) -> Vec<&'a str> {
    text.lines()
        .map(|l| l.trim().trim_start_matches(['-', '*', '`']).trim())
        .filter_map(|l| l.strip_prefix(prefix))
        .map(|l| l.trim().trim_end_matches('`').trim())
        .collect()
}

fn world_axis(s: &str) -> Option<Vec3> {
    let (sign, name) = match s.as_bytes().first()? {
        b'+' => (1.0, &s[1..]),
        b'-' => (-1.0, &s[1..]),
        _ => (1.0, s),
    };
    let v = match name {
        "x" => Vec3::x(),
        "y" => Vec3::y(),
        "z" => Vec3::z(),
        "left" => -Vec3::x(),
        "right" => Vec3::x(),
        "bottom" | "down" => -Vec3::y(),
        "top" | "up" => Vec3::y(),
        "front" => -Vec3::z(),
        "back" => Vec3::z(),
        _ => return None,
    };
    Some(v * sign)
}

/// The cage face whose outward normal points most along `dir`.
fn face_towards(cage: &Hexahedron, dir: &Vec3) -> Feature {
    let mut best = (f64::NEG_INFINITY, 0);
    for k in 0..3 {
        let d = cage.axes[k].dot(dir);
        for (face, s) in [(2 * k, -d), (2 * k + 1, d)] {
            if s > best.0 {
                best = (s, face);
            }
        }
    }
    Feature::Face(best.1 as u8)
}

fn feature(cage: &Hexahedron, name: &str) -> Option<Feature> {
    let indexed = |prefix: &str, n: u8, f: fn(u8) -> Feature| {
        name.strip_prefix(prefix).and_then(|d| d.parse::<u8>().ok()).filter(|i| *i < n).map(f)
    };
    indexed("face", 6, Feature::Face)
        .or_else(|| indexed("edge", 12, Feature::Edge))
        .or_else(|| indexed("corner", 8, Feature::Corner))
        .or_else(|| world_axis(name).filter(|_| name.chars().all(|c| c.is_ascii_lowercase())).map(|d| face_towards(cage, &d)))
}

fn origin(cage: &Hexahedron, name: &str) -> Option<Vec3> {
    let p = if name == "center" { cage.center } else { cage.feature_center(feature(cage, name)?) };
    Some(snap_vec(&p))
}

/// One `seed:` answer, resolved against the graph. The amount is `x`.
pub fn parse_seed_line(line: &str, graph: &ShapeGraph) -> Result<EditOp, String> {
    if line.starts_with("op ") {
        let op = parse_op_line(1, line).map_err(|e| e.to_string())?;
        let params = op.amount.params();
        if params.iter().any(|p| p != SEED_PARAM) {
            return Err(format!("seed amounts may only use `{SEED_PARAM}`"));
        }
        return Ok(op);
    }
    let mut words = line.split_whitespace();
    let kind = words.next().ok_or("empty seed")?;
    let target = words.next().ok_or("missing part")?;
    let mut keys = BTreeMap::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| format!("expected key=value, got `{w}`"))?;
        keys.insert(k, v);
    }
    let amount = SymExpr::param(SEED_PARAM);
    if let Some(rel) = target.strip_prefix('@') {
        let edge = graph.edge(rel).ok_or_else(|| format!("unknown relation `{rel}`"))?;
        if !edge.is_array() {
            return Err(format!("`{rel}` is not an array"));
        }
        let k = match kind {
            "count" => EditKind::SymGroupCount,
            "spacing" => EditKind::SymGroupSpacing,
            _ => return Err(format!("`{kind}` does not apply to a relation")),
        };
        return Ok(EditOp::new(Operand::Relation(rel.to_string()), k, amount));
    }
    let (part, feat) = match target.split_once('.') {
        Some((p, f)) => (p, Some(f)),
        None => (target, None),
    };
    let node = graph.node(part).ok_or_else(|| format!("unknown part `{part}`"))?;
    let cage = &node.cage;
    let operand = match feat {
        None => Operand::Part(part.to_string()),
        Some(f) => Operand::Feature(part.to_string(), feature(cage, f).ok_or_else(|| format!("unknown feature `{f}`"))?),
    };
    let vector = |key: &str| -> Result<Vec3, String> {
        let v = keys.get(key).ok_or_else(|| format!("missing {key}="))?;
        world_axis(v).ok_or_else(|| format!("bad {key} `{v}`"))
    };
    let point = |key: &str| -> Result<Vec3, String> {
        let v = keys.get(key).copied().unwrap_or("center");
        origin(cage, v).ok_or_else(|| format!("bad {key} `{v}`"))
    };
    let kind = match kind {
        "translate" => EditKind::Translate { dir: vector("dir")? },
        "scale" => EditKind::Scale { origin: point("origin")?, axis: vector("axis")? },
        "rotate" => EditKind::Rotate { origin: point("origin")?, axis: vector("axis")? },
        "shear" => EditKind::Shear { origin: point("origin")?, normal: vector("normal")?, dir: vector("dir")? },
        other => return Err(format!("unknown edit kind `{other}`")),
    };
    if let EditKind::Shear { normal, dir, .. } = &kind {
        if normal.dot(dir).abs() > 1e-9 {
            return Err("shear direction must be orthogonal to its normal".into());
        }
    }
    Ok(EditOp::new(operand, kind, amount))
}

/// All `seed:` lines of a response as a one-parameter program over
/// `[0, τ]`, τ taken from the first edit.
pub fn parse_seed_response(text: &str, graph: &ShapeGraph, tau: &TauDefaults) -> Result<EditProgram, String> {
    let lines = answer_lines(text, "seed:");
    if lines.is_empty() {
        return Err("no `seed:` line".into());
    }
    let ops = lines.iter().map(|l| parse_seed_line(l, graph)).collect::<Result<Vec<_>, _>>()?;
    let hi = default_tau_with(&ops[0].kind, &ops[0].operand, graph, tau);
    Ok(EditProgram { params: vec![ParamDecl { name: SEED_PARAM.into(), lo: 0.0, hi }], ops })
}

pub fn parse_validity_response(text: &str) -> Result<bool, String> {
    let answers: Vec<bool> = answer_lines(text, "valid:")
        .iter()
        .map(|a| match a.to_ascii_lowercase().trim_end_matches('.') {
            "yes" | "true" => Ok(true),
            "no" | "false" => Ok(false),
            other => Err(format!("bad validity `{other}`")),
        })
        .collect::<Result<_, _>>()?;
    match answers.as_slice() {
        [] => Err("no `valid:` line".into()),
        [first, rest @ ..] if rest.iter().all(|a| a == first) => Ok(*first),
        _ => Err("conflicting `valid:` lines".into()),
    }
}

/// `hint <part>: <kind>` lines, or `hints: none`.
pub fn parse_hints_response(text: &str, graph: &ShapeGraph) -> Result<BTreeMap<String, KindFamily>, String> {
    let none = !answer_lines(text, "hints:").is_empty();
    let lines = answer_lines(text, "hint ");
    if lines.is_empty() && !none {
        return Err("no `hint` line".into());
    }
    let mut out = BTreeMap::new();
    for l in lines {
        let (part, kind) = l.split_once(':').ok_or_else(|| format!("expected `hint <part>: <kind>`, got `{l}`"))?;
        let part = part.trim();
        if graph.node(part).is_none() {
            return Err(format!("unknown part `{part}`"));
        }
        let kind = kind.trim().to_ascii_lowercase();
        let kind = KindFamily::parse(kind.trim_end_matches('.')).ok_or_else(|| format!("bad hint kind `{kind}`"))?;
        if out.insert(part.to_string(), kind).is_some_and(|k| k != kind) {
            return Err(format!("conflicting hints for `{part}`"));
        }
    }
    Ok(out)
}

pub fn parse_requests_response(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in answer_lines(text, "request:") {
        let r = r.trim_matches('"').trim();
        if !r.is_empty() && !out.iter().any(|o| o == r) {
            out.push(r.to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::print;
    use crate::fixtures;
    use crate::shape::{build_graph, ShapeConfig};

    fn graph(name: &str) -> ShapeGraph {
        build_graph(&fixtures::by_name(name).unwrap(), ShapeConfig::default()).unwrap().0
    }

    #[test]
    fn seed_lines_resolve_against_cages() {
        let g = graph("chair");
        let text = "The seat should get wider.\nseed: scale seat axis=x origin=center\n";
        let p = parse_seed_response(text, &g, &TauDefaults::default()).unwrap();
        assert_eq!(print(&p), "param x [0, 1]\nop scale seat x {origin=0,1.05,0 axis=1,0,0}\n");

        let p = parse_seed_response("seed: scale leg_bl axis=y origin=top", &g, &TauDefaults::default()).unwrap();
        assert_eq!(print(&p), "param x [0, 1]\nop scale leg_bl x {origin=-0.8,1,0.6 axis=0,1,0}\n");

        let g = graph("cabinet");
        let p = parse_seed_response("- seed: rotate door axis=y origin=left", &g, &TauDefaults::default()).unwrap();
        assert_eq!(
            print(&p),
            "param x [0, 1.5707963267948966]\nop rotate door x {origin=-0.48,0.6,-0.415 axis=0,1,0}\n"
        );
    }

    #[test]
    fn feature_and_group_seeds() {
        let g = graph("bench");
        let p = parse_seed_response("seed: count @sym1", &g, &TauDefaults::default()).unwrap();
        assert_eq!(print(&p), "param x [0, 5]\nop count @sym1 x {}\n");
        let op = parse_seed_line("translate slat0.top dir=+y", &g).unwrap();
        let top = g.node("slat0").unwrap().cage.feature_center(match &op.operand {
            Operand::Feature(_, f) => *f,
            _ => panic!(),
        });
        assert!((top.y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn malformed_seeds_are_rejected() {
        let g = graph("chair");
        let tau = TauDefaults::default();
        assert!(parse_seed_response("I would widen it.", &g, &tau).is_err());
        assert!(parse_seed_response("seed: scale stool axis=x", &g, &tau).is_err());
        assert!(parse_seed_response("seed: scale seat axis=w", &g, &tau).is_err());
        assert!(parse_seed_response("seed: bend seat axis=x", &g, &tau).is_err());
        assert!(parse_seed_response("seed: count @sym0", &g, &tau).is_err());
        assert!(parse_seed_response("seed: op translate seat y {dir=1,0,0}", &g, &tau).is_err());
    }

    #[test]
    fn validity_and_hints() {
        let g = graph("chair");
        assert_eq!(parse_validity_response("reasoning...\nvalid: no"), Ok(false));
        assert!(parse_validity_response("valid: maybe").is_err());
        assert!(parse_validity_response("valid: yes\nvalid: no").is_err());
        let h = parse_hints_response("hint leg_fl: translate\nhint back: Scale", &g).unwrap();
        assert_eq!(h["leg_fl"], KindFamily::Translate);
        assert_eq!(h["back"], KindFamily::Scale);
        assert!(parse_hints_response("hints: none", &g).unwrap().is_empty());
        assert!(parse_hints_response("hint leg_fl: bend", &g).is_err());
        assert!(parse_hints_response("no idea", &g).is_err());
    }

    #[test]
    fn request_lists() {
        let r = parse_requests_response("Here:\nrequest: widen the seat\nrequest: \"make the back taller\"\nrequest: widen the seat\n");
        assert_eq!(r, ["widen the seat", "make the back taller"]);
        assert!(parse_requests_response("").is_empty());
    }
}
