//! Analytical edit propagation.
//!
//! Starting from seed edits, relations broken by the current program are
//! restored one part at a time: symmetric partners receive conjugated edits,
//! and parts attached to edited ones receive a corrective edit whose amount
//! is solved in closed form from the attachment constraints.

mod candidate;
mod conjugate;
mod constraint;
mod report;
mod solve;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use thiserror::Error;

pub use candidate::{enumerate_candidates, CandidateEdit, Provenance};
pub use conjugate::{conjugate, conjugate_onto};
pub use constraint::{
    check_sat, check_sat_at, relation_constraint, sample_assignments, transform_symbolic, CageFunctions, Constraint,
    ConstraintKind,
};
pub use report::{Round, SolverReport};
pub use solve::{
    arap_energy, compare_outcomes, select, solve_amount, sym_planes, tidy, PartProblem, PointConstraint, SolveOutcome,
    TargetPoint, UNKNOWN,
};

use crate::dsl::{validate, DslError, EditOp, EditProgram, KindFamily};
use crate::geometry::Vec3;
use crate::shape::{Hexahedron, RelationKind, ShapeGraph};
use crate::symbolic::Assignment;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AepError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("unknown part `{0}` in type hints")]
    UnknownPart(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("no feasible amount for a candidate on `{0}`")]
    NoFeasibleSolution(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AepWarning {
    /// No candidate could be applied; the part stays unedited.
    PropagationStalled { part: String, reason: String },
}

impl std::fmt::Display for AepWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AepWarning::PropagationStalled { part, reason } => write!(f, "propagation stalled at {part}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AepConfig {
    /// Uniform samples per SAT check (both range ends are always added).
    pub n_samples: usize,
    pub seed: u64,
    pub use_nhbd: bool,
    pub allow_breaking: bool,
}

impl Default for AepConfig {
    fn default() -> Self {
        AepConfig { n_samples: 16, seed: 0x5eed, use_nhbd: true, allow_breaking: true }
    }
}

/// A corrective edit chosen by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedEdit {
    /// Index of the edit in the output program.
    pub op_index: usize,
    pub part: String,
    pub satisfied: Vec<String>,
    pub broken: Vec<String>,
    pub arap_energy: f64,
    pub sym_planes: u8,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub program: EditProgram,
    pub solved: Vec<SolvedEdit>,
    /// Enabled relations that hold under the final program.
    pub maintained: Vec<String>,
    pub broken: Vec<String>,
    pub stalled: Vec<String>,
    pub warnings: Vec<AepWarning>,
    pub report: SolverReport,
}

struct State<'a> {
    graph: &'a ShapeGraph,
    program: EditProgram,
    cf: CageFunctions,
    samples: Vec<Assignment>,
    sat_cache: HashMap<String, bool>,
}

impl State<'_> {
    fn edited(&self, part: &str) -> bool {
        self.cf.is_edited(part)
    }

    fn holds(&mut self, id: &str) -> bool {
        if let Some(v) = self.sat_cache.get(id) {
            return *v;
        }
        let edge = self.graph.edge(id).expect("edge ids come from the graph");
        let ok = match relation_constraint(self.graph, &self.cf, edge) {
            Some(c) => check_sat_at(&c.residual, c.delta, &self.samples),
            None => true,
        };
        self.sat_cache.insert(id.to_string(), ok);
        ok
    }

    fn add_ops(&mut self, part: &str, ops: Vec<EditOp>) -> usize {
        let index = self.program.ops.len();
        self.program.ops.extend(ops);
        self.cf.update(&self.program, self.graph, part);
        let graph = self.graph;
        self.sat_cache.retain(|id, _| graph.edge(id).is_none_or(|e| !e.involves(part)));
        index
    }

    /// Copy edits across broken symmetry relations until every pair of a
    /// broken relation has both sides edited.
    fn conjugate_closure(&mut self, round: &mut Round) {
        loop {
            let mut changed = false;
            let edges: Vec<_> = self.graph.enabled_edges().filter(|e| e.is_symmetry()).cloned().collect();
            for edge in &edges {
                if self.holds(&edge.id) {
                    continue;
                }
                let RelationKind::Symmetry { transform, .. } = &edge.kind else { continue };
                for (src, dst) in edge.symmetry_pairs() {
                    let (from, to, t) = match (self.edited(&src), self.edited(&dst)) {
                        (true, false) => (src, dst, transform.clone()),
                        (false, true) => (dst, src, transform.inverse()),
                        _ => continue,
                    };
                    let (Some(nf), Some(nt)) = (self.graph.node(&from), self.graph.node(&to)) else { continue };
                    let ops: Vec<EditOp> = self
                        .program
                        .ops_on(&from)
                        .filter_map(|op| conjugate_onto(op, &t, &nf.cage, &nt.cage, &to))
                        .collect();
                    if ops.is_empty() {
                        continue;
                    }
                    round.conjugated.push((to.clone(), from.clone(), edge.id.clone()));
                    self.add_ops(&to, ops);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// First unedited part (in node order) with a broken attachment to an
    /// edited part.
    fn next_part(&mut self, stalled: &BTreeSet<String>) -> Option<String> {
        let graph = self.graph;
        for node in &graph.nodes {
            let id = node.id.as_str();
            if self.edited(id) || stalled.contains(id) {
                continue;
            }
            for e in graph.enabled_edges() {
                let RelationKind::Attachment { part_a, part_b, .. } = &e.kind else { continue };
                let other = if part_a == id { part_b } else if part_b == id { part_a } else { continue };
                if self.edited(other) && !self.holds(&e.id) {
                    return Some(id.to_string());
                }
            }
        }
        None
    }

    fn edited_neighbors(&self, part: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in self.graph.enabled_edges() {
            if let RelationKind::Attachment { part_a, part_b, .. } = &e.kind {
                let other = if part_a == part { part_b } else if part_b == part { part_a } else { continue };
                if self.edited(other) && !out.contains(other) {
                    out.push(other.clone());
                }
            }
        }
        out.sort_by_key(|id| self.graph.node_index(id));
        out
    }

    /// Attachment constraints of `part` against edited parts.
    fn problem(&self, part: &str) -> PartProblem {
        let node = self.graph.node(part).expect("part exists");
        let params = &self.program.params;
        let reference: Assignment = params.iter().map(|p| (p.name.clone(), 0.5 * (p.lo + p.hi))).collect();
        let zero: Assignment = params.iter().map(|p| (p.name.clone(), 0.0)).collect();
        let mut constraints = Vec::new();
        for e in self.graph.enabled_edges() {
            let RelationKind::Attachment { part_a, part_b, points } = &e.kind else { continue };
            let (other, mine_is_a) = if part_a == part { (part_b, true) } else if part_b == part { (part_a, false) } else { continue };
            if !self.edited(other) {
                continue;
            }
            let cage = self.cf.cage(self.graph, other);
            let pts = points
                .iter()
                .map(|pt| {
                    let (mine, theirs) = if mine_is_a { (&pt.weights_a, &pt.weights_b) } else { (&pt.weights_b, &pt.weights_a) };
                    let rest = Hexahedron::combine(mine, &node.cage.corners);
                    let row = cage.weighted_row(theirs);
                    let target: [crate::symbolic::SymExpr; 3] = std::array::from_fn(|k| row[k].simplify());
                    let motion = std::array::from_fn(|k| {
                        let q0 = target[k].eval(&zero).unwrap_or(0.0);
                        target[k].minus(&crate::symbolic::SymExpr::constant(q0)).simplify()
                    });
                    let sampled = self
                        .samples
                        .iter()
                        .map(|s| Vec3::from_fn(|k, _| target[k].eval(s).unwrap_or(f64::NAN)))
                        .collect();
                    TargetPoint { rest, target, motion, sampled }
                })
                .collect();
            constraints.push(PointConstraint { source: e.id.clone(), points: pts });
        }
        PartProblem {
            part: part.to_string(),
            rest: node.cage.corners,
            constraints,
            samples: self.samples.clone(),
            reference,
            delta: self.graph.delta(),
            diag: self.graph.diag,
        }
    }
}

fn solve_all(candidates: &[CandidateEdit], problem: &PartProblem) -> Vec<SolveOutcome> {
    let per: Vec<Vec<SolveOutcome>> =
        candidates.par_iter().map(|c| solve_amount(c, problem).unwrap_or_default()).collect();
    per.into_iter().flatten().collect()
}

/// Propagate seed edits through the graph's enabled relations.
///
/// `hints` restricts the candidate kinds of individual parts and `disabled`
/// lists relations to ignore.
pub fn propagate(
    graph: &ShapeGraph,
    seeds: &EditProgram,
    hints: &BTreeMap<String, KindFamily>,
    disabled: &[String],
    config: &AepConfig,
) -> Result<Propagation, AepError> {
    for id in disabled {
        if graph.edge(id).is_none() {
            return Err(AepError::UnknownRelation(id.clone()));
        }
    }
    for part in hints.keys() {
        if graph.node(part).is_none() {
            return Err(AepError::UnknownPart(part.clone()));
        }
    }
    let view = graph.with_disabled(disabled);
    validate(seeds, &view)?;
    let mut state = State {
        graph: &view,
        program: seeds.clone(),
        cf: CageFunctions::new(seeds, &view),
        samples: sample_assignments(&seeds.params, config.n_samples, config.seed),
        sat_cache: HashMap::new(),
    };
    let mut report = SolverReport::new(seeds);
    let mut solved = Vec::new();
    let mut stalled: BTreeSet<String> = BTreeSet::new();
    let mut warnings = Vec::new();

    for number in 1..=view.nodes.len() + 1 {
        let mut round = Round { number, ..Round::default() };
        let ids: Vec<String> = view.enabled_edges().map(|e| e.id.clone()).collect();
        round.broken = ids.iter().filter(|id| !state.holds(id)).cloned().collect();
        state.conjugate_closure(&mut round);

        let next = state.next_part(&stalled);
        let Some(part) = next else {
            if !round.conjugated.is_empty() || !round.broken.is_empty() {
                report.rounds.push(round);
            }
            break;
        };

        let problem = state.problem(&part);
        let hint = hints.get(&part).copied();
        let neighbors = state.edited_neighbors(&part);
        let own = enumerate_candidates(&view, &part, hint, &neighbors, false);
        let mut outcomes = solve_all(&own, &problem);
        round.part = Some(part.clone());
        round.candidates = own.len();
        let all_ok = |o: &SolveOutcome| o.broken.is_empty();
        if !outcomes.iter().any(all_ok) && config.use_nhbd && !neighbors.is_empty() {
            let with_nbrs = enumerate_candidates(&view, &part, hint, &neighbors, true);
            let extra: Vec<CandidateEdit> = with_nbrs.into_iter().filter(|c| c.provenance != Provenance::Own).collect();
            round.candidates += extra.len();
            outcomes.extend(solve_all(&extra, &problem));
        }
        round.solutions = outcomes.len();
        let admissible: Vec<SolveOutcome> = if outcomes.iter().any(all_ok) {
            outcomes.into_iter().filter(all_ok).collect()
        } else if config.allow_breaking {
            outcomes
        } else {
            Vec::new()
        };
        match select(&admissible) {
            Some(best) => {
                let op_index = state.add_ops(&part, vec![best.edit.clone()]);
                round.selected = Some(best.clone());
                solved.push(SolvedEdit {
                    op_index,
                    part: part.clone(),
                    satisfied: best.satisfied.clone(),
                    broken: best.broken.clone(),
                    arap_energy: best.arap_energy,
                    sym_planes: best.sym_planes,
                    provenance: best.candidate.provenance.clone(),
                });
            }
            None => {
                let reason = if round.solutions == 0 {
                    "no candidate has a feasible amount".to_string()
                } else {
                    "every candidate breaks a constraint".to_string()
                };
                round.stalled = Some(reason.clone());
                warnings.push(AepWarning::PropagationStalled { part: part.clone(), reason });
                stalled.insert(part.clone());
            }
        }
        report.rounds.push(round);
    }

    let mut maintained = Vec::new();
    let mut broken = Vec::new();
    for e in view.enabled_edges() {
        if state.holds(&e.id) {
            maintained.push(e.id.clone());
        } else {
            broken.push(e.id.clone());
        }
    }
    report.maintained = maintained.clone();
    report.broken = broken.clone();
    report.disabled = disabled.to_vec();
    let program = state.program;
    report.program = crate::dsl::print(&program);
    Ok(Propagation { program, solved, maintained, broken, stalled: stalled.into_iter().collect(), warnings, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::fixtures;
    use crate::shape::{build_graph, InputPart, Mesh, ShapeConfig};

    #[test]
    fn isolated_seed_is_returned_unchanged() {
        let parts = vec![InputPart { id: "a".into(), label: "a".into(), mesh: Mesh::cuboid(Vec3::zeros(), Vec3::repeat(1.0), 1) }];
        let (g, _) = build_graph(&parts, ShapeConfig::default()).unwrap();
        let seeds = parse("param x [0, 1]\nop translate a x {dir=1,0,0}\n").unwrap();
        let out = propagate(&g, &seeds, &BTreeMap::new(), &[], &AepConfig::default()).unwrap();
        assert_eq!(out.program, seeds);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn mirrored_translate_is_added() {
        let parts = vec![
            InputPart { id: "l".into(), label: "box".into(), mesh: Mesh::cuboid(Vec3::new(-2.0, 0.0, 0.0), Vec3::new(-1.0, 1.0, 1.0), 1) },
            InputPart { id: "r".into(), label: "box".into(), mesh: Mesh::cuboid(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 1.0, 1.0), 1) },
        ];
        let (g, _) = build_graph(&parts, ShapeConfig::default()).unwrap();
        let seeds = parse("param x [0, 1]\nop translate l x {dir=1,0,0}\n").unwrap();
        let out = propagate(&g, &seeds, &BTreeMap::new(), &[], &AepConfig::default()).unwrap();
        assert_eq!(out.program.ops.len(), 2);
        assert_eq!(crate::dsl::op_text(&out.program.ops[1]), "op translate r x {dir=-1,0,0}");
        assert!(out.broken.is_empty());
    }

    #[test]
    fn chair_widening_moves_legs_and_scales_back() {
        let (g, _) = build_graph(&fixtures::chair(), ShapeConfig::default()).unwrap();
        let seeds = parse("param x [0, 1]\nop scale seat x {origin=0,1.05,0 axis=1,0,0}\n").unwrap();
        let out = propagate(&g, &seeds, &BTreeMap::new(), &[], &AepConfig::default()).unwrap();
        let text = crate::dsl::print(&out.program);
        assert!(out.broken.is_empty(), "{text}\n{}", out.report);
        assert_eq!(out.program.ops.len(), 6, "{text}");
        assert!(text.contains("op translate leg_fl 0.8 * x {dir=-1,0,0}"), "{text}");
        assert!(text.contains("op scale back x {origin=0,1.7,0.75 axis=1,0,0}"), "{text}");
    }
}
