//! Parameterized editing programs: operations, text form, symbolic cage
//! functions, evaluation and composition.

mod compose;
mod eval;
mod op;
mod text;

use std::collections::BTreeMap;

use thiserror::Error;

pub use compose::compose;
pub use eval::{apply_numeric, evaluate, resolve_assignment, DeformedPart, DeformedShape, EvalWarning};
pub use op::{EditKind, EditOp, EditProgram, KindFamily, Operand, ParamDecl};
pub use text::{op_text, operand_text, parse, parse_op_line, print};

use crate::geometry::Vec3;
use crate::shape::{Hexahedron, RelationKind, ShapeGraph, SymTransform};
use crate::symbolic::{EvalError, SymExpr, SymMatrix};

/// Allowed deviation of direction vectors from unit length.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown part `{0}`")]
    UnknownPart(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{0}` is not a translation or rotation array")]
    NotAnArray(String),
    #[error("undeclared parameter `{0}`")]
    UndeclaredParameter(String),
    #[error("`{key}` of op {index} is not a unit vector (length {length})")]
    NonUnitVector { index: usize, key: &'static str, length: f64 },
    #[error("evaluating op {index}: {source}")]
    Eval { index: usize, source: EvalError },
}

/// Check a program against a graph: operands exist, vectors are unit length
/// and amounts only use declared parameters.
pub fn validate(program: &EditProgram, graph: &ShapeGraph) -> Result<(), DslError> {
    for (index, op) in program.ops.iter().enumerate() {
        match &op.operand {
            Operand::Part(p) | Operand::Feature(p, _) => {
                if graph.node(p).is_none() {
                    return Err(DslError::UnknownPart(p.clone()));
                }
            }
            Operand::Relation(r) => {
                let edge = graph.edge(r).ok_or_else(|| DslError::UnknownRelation(r.clone()))?;
                if !edge.is_array() {
                    return Err(DslError::NotAnArray(r.clone()));
                }
            }
        }
        for (key, v) in op.kind.directions() {
            let length = v.norm();
            if (length - 1.0).abs() > UNIT_TOL {
                return Err(DslError::NonUnitVector { index, key, length });
            }
        }
        for name in op.amount.params() {
            if program.param(&name).is_none() {
                return Err(DslError::UndeclaredParameter(name));
            }
        }
    }
    Ok(())
}

/// Parse and validate in one step.
pub fn parse_for(text: &str, graph: &ShapeGraph) -> Result<EditProgram, DslError> {
    let program = parse(text)?;
    validate(&program, graph)?;
    Ok(program)
}

/// Default upper bound `τ` of a parameter driving an op of this kind.
/// Default upper ends of parameter ranges.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TauDefaults {
    /// Translation, shear and linear spacing, as a fraction of the diagonal.
    pub translate_rel: f64,
    pub scale: f64,
    /// Rotation angle and angular spacing, in radians.
    pub rotate: f64,
}

impl Default for TauDefaults {
    fn default() -> Self {
        TauDefaults { translate_rel: 0.5, scale: 1.0, rotate: std::f64::consts::FRAC_PI_2 }
    }
}

pub fn default_tau(kind: &EditKind, operand: &Operand, graph: &ShapeGraph) -> f64 {
    default_tau_with(kind, operand, graph, &TauDefaults::default())
}

pub fn default_tau_with(kind: &EditKind, operand: &Operand, graph: &ShapeGraph, tau: &TauDefaults) -> f64 {
    let symmetry = |r: &str| match graph.edge(r).map(|e| &e.kind) {
        Some(RelationKind::Symmetry { members, transform }) => Some((members.len(), transform)),
        _ => None,
    };
    match kind {
        EditKind::Translate { .. } | EditKind::Shear { .. } => tau.translate_rel * graph.diag,
        EditKind::Scale { .. } => tau.scale,
        EditKind::Rotate { .. } => tau.rotate,
        EditKind::SymGroupCount => match operand {
            Operand::Relation(r) => symmetry(r).map_or(1.0, |(n, _)| n as f64),
            _ => 1.0,
        },
        EditKind::SymGroupSpacing => match operand {
            Operand::Relation(r) => match symmetry(r) {
                Some((_, SymTransform::Rotation { .. })) => tau.rotate,
                _ => tau.translate_rel * graph.diag,
            },
            _ => tau.translate_rel * graph.diag,
        },
    }
}

/// Cage as a symbolic 8×3 matrix after applying `ops` in order to `rest`.
///
/// Feature operands only move the feature's corners.
pub fn symbolic_apply<'a>(rest: &Hexahedron, ops: impl IntoIterator<Item = &'a EditOp>) -> SymMatrix {
    let mut rows: Vec<[SymExpr; 3]> =
        rest.corners.iter().map(|c| std::array::from_fn(|k| SymExpr::constant(c[k]))).collect();
    for op in ops {
        if op.kind.is_group() {
            continue;
        }
        for c in op.operand.corners() {
            rows[c] = op.kind.apply_symbolic(&op.amount, &rows[c]);
        }
    }
    SymMatrix::from_rows(rows.into_iter().map(|r| r.to_vec()).collect()).simplify()
}

/// Symbolic cage of every part touched by a part or feature op.
pub fn cage_function(program: &EditProgram, graph: &ShapeGraph) -> BTreeMap<String, SymMatrix> {
    program
        .edited_parts()
        .into_iter()
        .filter_map(|id| {
            let node = graph.node(&id)?;
            Some((id.clone(), symbolic_apply(&node.cage, program.ops_on(&id))))
        })
        .collect()
}

/// Corners of `rest` after applying `ops` numerically at `amounts`.
pub fn apply_ops_numeric(rest: &[Vec3; 8], ops: &[(&EditOp, f64)]) -> [Vec3; 8] {
    let mut corners = *rest;
    for (op, a) in ops {
        if *a == 0.0 || op.kind.is_group() {
            continue;
        }
        for c in op.operand.corners() {
            corners[c] = op.kind.apply_point(*a, &corners[c]);
        }
    }
    corners
}
