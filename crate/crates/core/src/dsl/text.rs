//! Line-oriented program text.
//!
//! ```text
//! # comments and blank lines are ignored
//! param x [0, 1]
//! op scale seat x {origin=0,1.05,0 axis=1,0,0}
//! op translate leg_fl.face3 0.8 * x {dir=-1,0,0}
//! op count @sym2 x {}
//! ```
//!
//! Operands are a part id, `part.faceN` / `part.edgeN` / `part.cornerN`, or
//! `@relation`. Static vectors are comma separated without spaces, and every
//! kind lists its keys in a fixed order when printed.

use std::fmt::Write as _;

use super::op::{EditKind, EditOp, EditProgram, Operand, ParamDecl};
use super::DslError;
use crate::geometry::Vec3;
use crate::shape::Feature;
use crate::symbolic::{format_number, parse_expr};

fn fmt_vec(v: &Vec3) -> String {
    // `+ 0.0` turns a negative zero into a positive one
    format!("{},{},{}", format_number(v.x + 0.0), format_number(v.y + 0.0), format_number(v.z + 0.0))
}

pub fn operand_text(o: &Operand) -> String {
    match o {
        Operand::Part(p) => p.clone(),
        Operand::Feature(p, Feature::Face(i)) => format!("{p}.face{i}"),
        Operand::Feature(p, Feature::Edge(i)) => format!("{p}.edge{i}"),
        Operand::Feature(p, Feature::Corner(i)) => format!("{p}.corner{i}"),
        Operand::Relation(r) => format!("@{r}"),
    }
}

fn params_text(kind: &EditKind) -> String {
    let fields: Vec<String> = match kind {
        EditKind::Translate { dir } => vec![format!("dir={}", fmt_vec(dir))],
        EditKind::Scale { origin, axis } | EditKind::Rotate { origin, axis } => {
            vec![format!("origin={}", fmt_vec(origin)), format!("axis={}", fmt_vec(axis))]
        }
        EditKind::Shear { origin, normal, dir } => vec![
            format!("origin={}", fmt_vec(origin)),
            format!("normal={}", fmt_vec(normal)),
            format!("dir={}", fmt_vec(dir)),
        ],
        EditKind::SymGroupCount | EditKind::SymGroupSpacing => vec![],
    };
    format!("{{{}}}", fields.join(" "))
}

pub fn op_text(op: &EditOp) -> String {
    format!("op {} {} {} {}", op.kind.name(), operand_text(&op.operand), op.amount, params_text(&op.kind))
}

pub fn print(program: &EditProgram) -> String {
    let mut out = String::new();
    for p in &program.params {
        let _ = writeln!(out, "param {} [{}, {}]", p.name, format_number(p.lo), format_number(p.hi));
    }
    for op in &program.ops {
        out.push_str(&op_text(op));
        out.push('\n');
    }
    out
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    fn err(&self, column: usize, message: impl Into<String>) -> DslError {
        DslError::Syntax { line: self.number, column, message: message.into() }
    }

    /// 1-based column of a subslice of this line.
    fn col_of(&self, sub: &str) -> usize {
        sub.as_ptr() as usize - self.text.as_ptr() as usize + 1
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn is_part_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Split off the first whitespace-delimited word.
fn word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    let end = s.find(char::is_whitespace).unwrap_or(s.len());
    (&s[..end], &s[end..])
}

fn parse_number(line: &Line, s: &str) -> Result<f64, DslError> {
    let t = s.trim();
    t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| line.err(line.col_of(s), format!("expected a number, found `{t}`")))
}

fn parse_param(line: &Line, rest: &str) -> Result<ParamDecl, DslError> {
    let (name, rest) = word(rest);
    if !is_ident(name) {
        return Err(line.err(line.col_of(name), format!("invalid parameter name `{name}`")));
    }
    let body = rest.trim();
    let inner = body
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| line.err(line.col_of(body), "expected a range `[lo, hi]`"))?;
    let (lo, hi) = inner.split_once(',').ok_or_else(|| line.err(line.col_of(inner), "expected `,` in range"))?;
    let lo = parse_number(line, lo)?;
    let hi = parse_number(line, hi)?;
    if lo > hi {
        return Err(line.err(line.col_of(inner), "empty range"));
    }
    Ok(ParamDecl { name: name.to_string(), lo, hi })
}

fn parse_operand(line: &Line, s: &str) -> Result<Operand, DslError> {
    let bad = |msg: String| line.err(line.col_of(s), msg);
    if let Some(rel) = s.strip_prefix('@') {
        return if is_part_id(rel) { Ok(Operand::Relation(rel.to_string())) } else { Err(bad(format!("invalid relation `{s}`"))) };
    }
    let Some((part, feat)) = s.split_once('.') else {
        return if is_part_id(s) { Ok(Operand::Part(s.to_string())) } else { Err(bad(format!("invalid operand `{s}`"))) };
    };
    if !is_part_id(part) {
        return Err(bad(format!("invalid part `{part}`")));
    }
    let split = feat.find(|c: char| c.is_ascii_digit()).unwrap_or(feat.len());
    let index: u8 = feat[split..].parse().map_err(|_| bad(format!("invalid feature `{feat}`")))?;
    let f = match &feat[..split] {
        "face" => Feature::Face(index),
        "edge" => Feature::Edge(index),
        "corner" => Feature::Corner(index),
        _ => return Err(bad(format!("invalid feature `{feat}`"))),
    };
    if !f.is_valid() {
        return Err(bad(format!("feature index out of range in `{feat}`")));
    }
    Ok(Operand::Feature(part.to_string(), f))
}

fn parse_vec(line: &Line, s: &str) -> Result<Vec3, DslError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(line.err(line.col_of(s), "expected three comma-separated numbers"));
    }
    Ok(Vec3::new(parse_number(line, parts[0])?, parse_number(line, parts[1])?, parse_number(line, parts[2])?))
}

fn parse_kind(line: &Line, name: &str, body: &str) -> Result<EditKind, DslError> {
    let mut fields: Vec<(&str, &str)> = Vec::new();
    for item in body.split_whitespace() {
        let (k, v) = item.split_once('=').ok_or_else(|| line.err(line.col_of(item), "expected `key=value`"))?;
        if fields.iter().any(|(f, _)| *f == k) {
            return Err(line.err(line.col_of(item), format!("duplicate key `{k}`")));
        }
        fields.push((k, v));
    }
    let expected: &[&str] = match name {
        "translate" => &["dir"],
        "scale" | "rotate" => &["origin", "axis"],
        "shear" => &["origin", "normal", "dir"],
        "count" | "spacing" => &[],
        _ => unreachable!("kind checked by caller"),
    };
    for (k, v) in &fields {
        if !expected.contains(k) {
            return Err(line.err(line.col_of(v) - k.len() - 1, format!("unexpected key `{k}` for {name}")));
        }
    }
    let get = |key: &str| -> Result<Vec3, DslError> {
        match fields.iter().find(|(k, _)| *k == key) {
            Some((_, v)) => parse_vec(line, v),
            None => Err(line.err(line.col_of(body), format!("missing key `{key}` for {name}"))),
        }
    };
    Ok(match name {
        "translate" => EditKind::Translate { dir: get("dir")? },
        "scale" => EditKind::Scale { origin: get("origin")?, axis: get("axis")? },
        "rotate" => EditKind::Rotate { origin: get("origin")?, axis: get("axis")? },
        "shear" => EditKind::Shear { origin: get("origin")?, normal: get("normal")?, dir: get("dir")? },
        "count" => EditKind::SymGroupCount,
        _ => EditKind::SymGroupSpacing,
    })
}

pub fn parse_op_line(number: usize, text: &str) -> Result<EditOp, DslError> {
    let line = Line { number, text };
    let (kw, rest) = word(text);
    if kw != "op" {
        return Err(line.err(line.col_of(kw), "expected `op`"));
    }
    parse_op_body(&line, rest)
}

fn parse_op_body(line: &Line, rest: &str) -> Result<EditOp, DslError> {
    let (kind_name, rest) = word(rest);
    if !["translate", "scale", "rotate", "shear", "count", "spacing"].contains(&kind_name) {
        return Err(line.err(line.col_of(kind_name), format!("unknown operation `{kind_name}`")));
    }
    let (operand_src, rest) = word(rest);
    if operand_src.is_empty() {
        return Err(line.err(line.text.len() + 1, "missing operand"));
    }
    let operand = parse_operand(line, operand_src)?;
    let rest = rest.trim_end();
    let open = rest.rfind('{').filter(|_| rest.ends_with('}')).ok_or_else(|| line.err(line.text.trim_end().len() + 1, "expected `{...}` at end of line"))?;
    let amount_src = &rest[..open];
    if amount_src.trim().is_empty() {
        return Err(line.err(line.col_of(rest), "missing amount"));
    }
    let amount = parse_expr(amount_src).map_err(|e| line.err(line.col_of(amount_src) + e.column - 1, e.message))?;
    let body = &rest[open + 1..rest.len() - 1];
    let kind = parse_kind(line, kind_name, body)?;
    match (&operand, kind.is_group()) {
        (Operand::Relation(_), false) => Err(line.err(line.col_of(operand_src), format!("{kind_name} needs a part operand"))),
        (Operand::Part(_) | Operand::Feature(..), true) => {
            Err(line.err(line.col_of(operand_src), format!("{kind_name} needs a relation operand")))
        }
        _ => Ok(EditOp { operand, kind, amount }),
    }
}

/// Parse program text. Only syntax is checked; see [`super::validate`].
pub fn parse(text: &str) -> Result<EditProgram, DslError> {
    let mut program = EditProgram::default();
    for (i, raw) in text.lines().enumerate() {
        let line = Line { number: i + 1, text: raw };
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (kw, rest) = word(raw);
        match kw {
            "param" => {
                if !program.ops.is_empty() {
                    return Err(line.err(line.col_of(kw), "parameters must be declared before operations"));
                }
                let decl = parse_param(&line, rest)?;
                if program.param(&decl.name).is_some() {
                    return Err(line.err(line.col_of(kw), format!("parameter `{}` declared twice", decl.name)));
                }
                program.params.push(decl);
            }
            "op" => program.ops.push(parse_op_body(&line, rest)?),
            _ => return Err(line.err(line.col_of(kw), format!("expected `param` or `op`, found `{kw}`"))),
        }
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::SymExpr;

    #[test]
    fn one_op_program_round_trips() {
        let p = EditProgram {
            params: vec![ParamDecl { name: "x".into(), lo: 0.0, hi: 1.0 }],
            ops: vec![EditOp::new(
                Operand::Feature("leg_fl".into(), Feature::Face(3)),
                EditKind::Translate { dir: Vec3::new(-1.0, 0.0, 0.0) },
                SymExpr::param("x").scale(0.8),
            )],
        };
        let text = print(&p);
        assert_eq!(text, "param x [0, 1]\nop translate leg_fl.face3 0.8 * x {dir=-1,0,0}\n");
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn malformed_amount_reports_column() {
        let err = parse("param x [0, 1]\nop translate seat x + {dir=1,0,0}\n").unwrap_err();
        match err {
            DslError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 23);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_structural_mistakes() {
        for bad in [
            "op bend seat x {}",
            "op translate seat x {axis=1,0,0}",
            "op translate seat x",
            "op count seat x {}",
            "op scale @sym0 x {origin=0,0,0 axis=1,0,0}",
            "op translate seat.face9 x {dir=1,0,0}",
            "param X [0, 1]",
            "param x [1, 0]",
        ] {
            assert!(matches!(parse(bad), Err(DslError::Syntax { .. })), "{bad}");
        }
    }
}
