//! Relation residuals as symbolic matrices and the sampled SAT check.

use std::collections::BTreeMap;

use crate::dsl::{symbolic_apply, EditProgram, ParamDecl};
use crate::shape::{corner_permutation, RelationEdge, RelationKind, ShapeGraph, SymTransform};
use crate::symbolic::{random_assignments, Assignment, SymExpr, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintKind {
    Symmetry,
    Attachment,
}

/// `‖residual(x)‖∞ < delta` for every admissible `x`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub source: String,
    pub kind: ConstraintKind,
    pub residual: SymMatrix,
    pub delta: f64,
}

/// Symbolic cages of the edited parts of a program.
#[derive(Debug, Clone, Default)]
pub struct CageFunctions {
    cages: BTreeMap<String, SymMatrix>,
}

impl CageFunctions {
    pub fn new(program: &EditProgram, graph: &ShapeGraph) -> CageFunctions {
        CageFunctions { cages: crate::dsl::cage_function(program, graph) }
    }

    /// Recompute the cage of one part after its ops changed.
    pub fn update(&mut self, program: &EditProgram, graph: &ShapeGraph, part: &str) {
        if let Some(node) = graph.node(part) {
            self.cages.insert(part.to_string(), symbolic_apply(&node.cage, program.ops_on(part)));
        }
    }

    pub fn is_edited(&self, part: &str) -> bool {
        self.cages.contains_key(part)
    }

    /// The cage of `part`, constant when it is not edited.
    pub fn cage(&self, graph: &ShapeGraph, part: &str) -> SymMatrix {
        match self.cages.get(part) {
            Some(m) => m.clone(),
            None => {
                let node = graph.node(part).expect("part checked by caller");
                SymMatrix::from_numeric(&node.cage.corner_array())
            }
        }
    }
}

fn attachment_residual(graph: &ShapeGraph, cf: &CageFunctions, edge: &RelationEdge) -> Option<SymMatrix> {
    let RelationKind::Attachment { part_a, part_b, points } = &edge.kind else { return None };
    let ha = cf.cage(graph, part_a);
    let hb = cf.cage(graph, part_b);
    let rows = points
        .iter()
        .map(|pt| {
            let a = ha.weighted_row(&pt.weights_a);
            let b = hb.weighted_row(&pt.weights_b);
            a.iter().zip(&b).map(|(x, y)| x.minus(y).simplify()).collect()
        })
        .collect();
    Some(SymMatrix::from_rows(rows))
}

/// `T(p)` for a symbolic point.
pub fn transform_symbolic(t: &SymTransform, p: &[SymExpr]) -> Vec<SymExpr> {
    let l = t.linear();
    let shift = t.apply_point(&crate::geometry::Vec3::zeros());
    (0..3)
        .map(|k| {
            let mut terms: Vec<SymExpr> = (0..3).filter(|&j| l[(k, j)] != 0.0).map(|j| p[j].scale(l[(k, j)])).collect();
            if shift[k] != 0.0 {
                terms.push(SymExpr::constant(shift[k]));
            }
            SymExpr::sum(&terms)
        })
        .collect()
}

fn symmetry_residual(graph: &ShapeGraph, cf: &CageFunctions, edge: &RelationEdge) -> Option<SymMatrix> {
    let RelationKind::Symmetry { transform, .. } = &edge.kind else { return None };
    let mut rows = Vec::new();
    for (src, dst) in edge.symmetry_pairs() {
        let (Some(ns), Some(nd)) = (graph.node(&src), graph.node(&dst)) else { continue };
        let perm = corner_permutation(&ns.cage, &nd.cage, transform, f64::INFINITY).expect("eight corners");
        let hs = cf.cage(graph, &src);
        let hd = cf.cage(graph, &dst);
        for (c, &pc) in perm.iter().enumerate() {
            let mapped = transform_symbolic(transform, hs.row(pc));
            rows.push(hd.row(c).iter().zip(&mapped).map(|(a, b)| a.minus(b).simplify()).collect());
        }
    }
    (!rows.is_empty()).then(|| SymMatrix::from_rows(rows))
}

/// Residual constraint of one relation under the current cage functions.
pub fn relation_constraint(graph: &ShapeGraph, cf: &CageFunctions, edge: &RelationEdge) -> Option<Constraint> {
    let (kind, residual) = match edge.kind {
        RelationKind::Symmetry { .. } => (ConstraintKind::Symmetry, symmetry_residual(graph, cf, edge)?),
        RelationKind::Attachment { .. } => (ConstraintKind::Attachment, attachment_residual(graph, cf, edge)?),
    };
    Some(Constraint { source: edge.id.clone(), kind, residual, delta: graph.delta() })
}

/// Sample assignments: `n` uniform draws plus the all-low and all-high corners.
pub fn sample_assignments(params: &[ParamDecl], n: usize, seed: u64) -> Vec<Assignment> {
    let names = params.iter().map(|p| p.name.clone()).collect();
    let range = |name: &str| params.iter().find(|p| p.name == name).map_or((0.0, 0.0), |p| (p.lo, p.hi));
    let mut out = random_assignments(&names, &range, n, seed);
    out.push(params.iter().map(|p| (p.name.clone(), p.lo)).collect());
    out.push(params.iter().map(|p| (p.name.clone(), p.hi)).collect());
    out
}

/// True when the residual stays below `delta` at every sample.
pub fn check_sat_at(residual: &SymMatrix, delta: f64, samples: &[Assignment]) -> bool {
    samples.iter().all(|s| matches!(residual.max_abs(s), Ok(v) if v < delta))
}

/// Sampled satisfiability of a constraint over the declared ranges.
pub fn check_sat(c: &Constraint, params: &[ParamDecl], n_samples: usize, seed: u64) -> bool {
    check_sat_at(&c.residual, c.delta, &sample_assignments(params, n_samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decl(hi: f64) -> Vec<ParamDecl> {
        vec![ParamDecl { name: "x".into(), lo: 0.0, hi }]
    }

    #[test]
    fn zero_residual_is_satisfied() {
        let c = Constraint {
            source: "r".into(),
            kind: ConstraintKind::Attachment,
            residual: SymMatrix::zeros(2, 3),
            delta: 1e-3,
        };
        assert!(check_sat(&c, &decl(1.0), 16, 7));
    }

    #[test]
    fn growing_residual_is_broken() {
        let x = SymExpr::param("x");
        let c = Constraint {
            source: "r".into(),
            kind: ConstraintKind::Attachment,
            residual: SymMatrix::from_rows(vec![vec![x, SymExpr::zero(), SymExpr::zero()]]),
            delta: 1e-3,
        };
        assert!(!check_sat(&c, &decl(1.0), 16, 7));
    }

    #[test]
    fn samples_include_both_endpoints() {
        let s = sample_assignments(&decl(2.0), 4, 1);
        assert_eq!(s.len(), 6);
        assert_eq!(s[4]["x"], 0.0);
        assert_eq!(s[5]["x"], 2.0);
        assert!(s[..4].iter().all(|a| (0.0..2.0).contains(&a["x"])));
    }
}
