//! Numeric evaluation of programs on a shape graph.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use super::op::{EditKind, EditOp, EditProgram, Operand};
use super::{apply_ops_numeric, DslError};
use crate::geometry::Vec3;
use crate::shape::{Mesh, RelationKind, ShapeGraph, SymTransform};
use crate::symbolic::Assignment;

#[derive(Debug, Clone, PartialEq)]
pub enum EvalWarning {
    Clamped { param: String, value: f64, lo: f64, hi: f64 },
    Missing { param: String },
}

impl fmt::Display for EvalWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalWarning::Clamped { param, value, lo, hi } => {
                write!(f, "parameter {param} = {value} clamped to [{lo}, {hi}]")
            }
            EvalWarning::Missing { param } => write!(f, "parameter {param} not set, using 0"),
        }
    }
}

/// One part of an evaluated shape. Parts created by a count edit take the
/// triangles of `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedPart {
    pub id: String,
    pub source: String,
    pub corners: [Vec3; 8],
    pub vertices: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeformedShape {
    pub parts: Vec<DeformedPart>,
}

impl DeformedShape {
    pub fn part(&self, id: &str) -> Option<&DeformedPart> {
        self.parts.iter().find(|p| p.id == id)
    }

    /// Deformed meshes with the triangles of each part's source node.
    pub fn meshes(&self, graph: &ShapeGraph) -> Vec<(String, Mesh)> {
        self.parts
            .iter()
            .map(|p| {
                let triangles = graph.node(&p.source).map(|n| n.mesh.triangles.clone()).unwrap_or_default();
                (p.id.clone(), Mesh::new(p.vertices.clone(), triangles))
            })
            .collect()
    }

    pub fn cages(&self) -> BTreeMap<String, [Vec3; 8]> {
        self.parts.iter().map(|p| (p.id.clone(), p.corners)).collect()
    }

    /// Corners of the parts that exist in the input graph, keyed by id, for
    /// rebasing a graph on this result.
    pub fn rebase(&self, graph: &ShapeGraph) -> ShapeGraph {
        let cages = self.parts.iter().filter(|p| p.id == p.source).map(|p| (p.id.clone(), p.corners)).collect();
        let meshes = self
            .parts
            .iter()
            .filter(|p| p.id == p.source && !p.vertices.is_empty())
            .map(|p| (p.id.clone(), p.vertices.clone()))
            .collect();
        graph.rebased(&cages, &meshes)
    }
}

/// Full assignment for the program's parameters: values outside the declared
/// range are clamped and missing ones default to 0.
pub fn resolve_assignment(program: &EditProgram, sigma: &Assignment) -> (Assignment, Vec<EvalWarning>) {
    let mut warnings = Vec::new();
    let mut out = Assignment::new();
    for p in &program.params {
        let v = match sigma.get(&p.name) {
            Some(&v) if v.is_nan() => {
                warnings.push(EvalWarning::Missing { param: p.name.clone() });
                0.0
            }
            Some(&v) if v < p.lo || v > p.hi => {
                warnings.push(EvalWarning::Clamped { param: p.name.clone(), value: v, lo: p.lo, hi: p.hi });
                v.clamp(p.lo, p.hi)
            }
            Some(&v) => v,
            None => {
                warnings.push(EvalWarning::Missing { param: p.name.clone() });
                0.0
            }
        };
        out.insert(p.name.clone(), v);
    }
    (out, warnings)
}

fn amounts<'a>(program: &'a EditProgram, sigma: &Assignment) -> Result<Vec<(&'a EditOp, f64)>, DslError> {
    program
        .ops
        .iter()
        .enumerate()
        .map(|(index, op)| op.amount.eval(sigma).map(|a| (op, a)).map_err(|source| DslError::Eval { index, source }))
        .collect()
}

/// Evaluate at an already resolved assignment. With `vertices` off only the
/// cages are computed.
pub fn apply_numeric(
    program: &EditProgram,
    graph: &ShapeGraph,
    sigma: &Assignment,
    vertices: bool,
) -> Result<DeformedShape, DslError> {
    for op in &program.ops {
        match &op.operand {
            Operand::Part(p) | Operand::Feature(p, _) if graph.node(p).is_none() => {
                return Err(DslError::UnknownPart(p.clone()));
            }
            Operand::Relation(r) if graph.edge(r).is_none() => return Err(DslError::UnknownRelation(r.clone())),
            _ => {}
        }
    }
    let amounts = amounts(program, sigma)?;
    let mut per_part: BTreeMap<&str, Vec<(&EditOp, f64)>> = BTreeMap::new();
    for (op, a) in &amounts {
        if let Some(p) = op.operand.part() {
            per_part.entry(p).or_default().push((op, *a));
        }
    }
    let parts: Vec<DeformedPart> = graph
        .nodes
        .par_iter()
        .map(|n| {
            let corners = match per_part.get(n.id.as_str()) {
                Some(ops) => apply_ops_numeric(&n.cage.corners, ops),
                None => n.cage.corners,
            };
            let verts = if vertices { n.deform_vertices(&corners) } else { Vec::new() };
            DeformedPart { id: n.id.clone(), source: n.id.clone(), corners, vertices: verts }
        })
        .collect();
    let mut shape = DeformedShape { parts };
    apply_group_ops(&mut shape, &amounts, graph);
    Ok(shape)
}

/// Evaluate a program: clamps the assignment, deforms cages and meshes, and
/// regenerates symmetry groups.
pub fn evaluate(
    program: &EditProgram,
    graph: &ShapeGraph,
    sigma: &Assignment,
) -> Result<(DeformedShape, Vec<EvalWarning>), DslError> {
    let (resolved, warnings) = resolve_assignment(program, sigma);
    Ok((apply_numeric(program, graph, &resolved, true)?, warnings))
}

fn map_part(part: &mut DeformedPart, f: impl Fn(&Vec3) -> Vec3) {
    for c in part.corners.iter_mut() {
        *c = f(c);
    }
    for v in part.vertices.iter_mut() {
        *v = f(v);
    }
}

/// Count edits first, then spacing edits, per relation in order of first use.
fn apply_group_ops(shape: &mut DeformedShape, amounts: &[(&EditOp, f64)], graph: &ShapeGraph) {
    let mut order: Vec<&str> = Vec::new();
    for (op, _) in amounts {
        if let Operand::Relation(r) = &op.operand {
            if !order.contains(&r.as_str()) {
                order.push(r);
            }
        }
    }
    for rel in order {
        let Some(RelationKind::Symmetry { transform, members }) = graph.edge(rel).map(|e| &e.kind) else {
            continue;
        };
        if members.is_empty() || matches!(transform, SymTransform::Reflection { .. }) {
            continue;
        }
        let sum = |want: fn(&EditKind) -> bool| -> Option<f64> {
            let vals: Vec<f64> = amounts
                .iter()
                .filter(|(op, _)| want(&op.kind) && matches!(&op.operand, Operand::Relation(r) if r == rel))
                .map(|(_, a)| *a)
                .collect();
            (!vals.is_empty()).then(|| vals.iter().sum())
        };
        let count_amount = sum(|k| matches!(k, EditKind::SymGroupCount));
        let spacing = sum(|k| matches!(k, EditKind::SymGroupSpacing)).unwrap_or(0.0);
        let rest_n = members.len();
        let new_n = match count_amount {
            Some(a) => ((rest_n as f64 + a + 0.5).floor()).max(1.0) as usize,
            None => rest_n,
        };
        let edited = match transform {
            SymTransform::Translation { offset } => {
                let m = offset.norm();
                SymTransform::Translation { offset: offset * ((m + spacing) / m) }
            }
            SymTransform::Rotation { origin, axis, angle } => {
                let full = (rest_n as f64 * angle.abs() - std::f64::consts::TAU).abs() < 1e-9;
                let base = if full && new_n != rest_n { std::f64::consts::TAU / new_n as f64 * angle.signum() } else { *angle };
                SymTransform::Rotation { origin: *origin, axis: *axis, angle: base + spacing }
            }
            SymTransform::Reflection { .. } => unreachable!(),
        };
        if new_n == rest_n && edited == *transform {
            continue;
        }
        // existing members move to their place in the edited array
        let index_of = |id: &str, shape: &DeformedShape| shape.parts.iter().position(|p| p.id == id);
        if edited != *transform {
            for (k, id) in members.iter().enumerate().take(new_n).skip(1) {
                let Some(i) = index_of(id, shape) else { continue };
                let back = transform.power(-(k as i64));
                let fwd = edited.power(k as i64);
                map_part(&mut shape.parts[i], |p| fwd.apply_point(&back.apply_point(p)));
            }
        }
        if new_n < rest_n {
            let drop: Vec<&String> = members[new_n..].iter().collect();
            shape.parts.retain(|p| !drop.contains(&&p.id));
        } else if new_n > rest_n {
            let Some(last) = index_of(&members[rest_n - 1], shape) else { continue };
            let template = shape.parts[last].clone();
            let mut insert_at = last + 1;
            for k in rest_n..new_n {
                let step = edited.power((k - (rest_n - 1)) as i64);
                let mut part = template.clone();
                part.id = format!("{rel}#{k}");
                map_part(&mut part, |p| step.apply_point(p));
                shape.parts.insert(insert_at, part);
                insert_at += 1;
            }
        }
    }
}
