//! Per-session state: the graph, every program produced so far, and the
//! stack of programs currently composed into the active one.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use shapeprog_core::dsl::{compose, print, resolve_assignment, EditProgram, KindFamily};
use shapeprog_core::llm::InferenceBundle;
use shapeprog_core::pipeline::EditOutcome;
use shapeprog_core::shape::ShapeGraph;
use shapeprog_core::symbolic::Assignment;

use crate::error::ServiceError;

#[derive(Debug, Clone)]
pub struct StoredProgram {
    pub id: usize,
    /// Request text, or "uploaded" / "resolved".
    pub origin: String,
    pub program: EditProgram,
    pub report: Option<String>,
    /// What a re-solve starts from, when the program came out of propagation.
    pub seeds: Option<EditProgram>,
    pub hints: BTreeMap<String, KindFamily>,
    pub disabled: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistoryEntry {
    pub request: String,
    pub program_id: Option<usize>,
    pub bundle: Value,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    /// Shape name used for transcript lookup and prompts.
    pub shape: String,
    pub graph: ShapeGraph,
    pub programs: Vec<StoredProgram>,
    pub stack: Vec<usize>,
    pub active: EditProgram,
    pub params: Assignment,
    pub history: Vec<HistoryEntry>,
}

pub fn bundle_json(b: &InferenceBundle) -> Value {
    let votes: BTreeMap<&String, Value> = b
        .votes
        .iter()
        .map(|(k, t)| (k, json!({ "counts": t.counts, "malformed": t.malformed })))
        .collect();
    let hints: BTreeMap<&String, &str> = b.type_hints.iter().map(|(k, v)| (k, v.name())).collect();
    json!({
        "request": b.request,
        "seeds": print(&b.seeds),
        "relation_validity": b.relation_validity,
        "type_hints": hints,
        "votes": votes,
        "warnings": b.warnings,
        "exchanges": b.transcript.len(),
    })
}

pub fn graph_json(graph: &ShapeGraph) -> Value {
    let parts: Vec<Value> = graph
        .nodes
        .iter()
        .map(|n| json!({ "id": n.id, "label": n.label, "name": n.verbal_name(), "vertices": n.mesh.vertices.len() }))
        .collect();
    let relations: Vec<Value> = graph
        .edges
        .iter()
        .map(|e| json!({ "id": e.id, "parts": e.parts(), "description": e.describe(), "enabled": e.enabled }))
        .collect();
    json!({ "parts": parts, "relations": relations, "diag": graph.diag })
}

impl Session {
    pub fn new(id: String, shape: String, graph: ShapeGraph) -> Session {
        Session {
            id,
            shape,
            graph,
            programs: Vec::new(),
            stack: Vec::new(),
            active: EditProgram::default(),
            params: Assignment::new(),
            history: Vec::new(),
        }
    }

    pub fn program(&self, id: usize) -> Result<&StoredProgram, ServiceError> {
        self.programs.get(id).ok_or_else(|| ServiceError::NotFound(format!("no program {id}")))
    }

    pub fn store(&mut self, mut p: StoredProgram) -> usize {
        p.id = self.programs.len();
        self.programs.push(p);
        self.programs.len() - 1
    }

    pub fn store_outcome(&mut self, request: &str, outcome: &EditOutcome, disabled: Vec<String>) -> usize {
        let id = self.store(StoredProgram {
            id: 0,
            origin: request.to_string(),
            program: outcome.program().clone(),
            report: Some(outcome.propagation.report.to_string()),
            seeds: Some(outcome.bundle.seeds.clone()),
            hints: outcome.bundle.type_hints.clone(),
            disabled,
        });
        self.history.push(HistoryEntry {
            request: request.to_string(),
            program_id: Some(id),
            bundle: bundle_json(&outcome.bundle),
        });
        id
    }

    /// Replace the stack, recompose the active program and reset every
    /// parameter to its lower bound clamped at zero.
    pub fn set_stack(&mut self, stack: Vec<usize>) -> Result<(), ServiceError> {
        for &id in &stack {
            self.program(id)?;
        }
        let mut active = EditProgram::default();
        for &id in &stack {
            active = compose(&active, &self.programs[id].program);
        }
        self.stack = stack;
        self.params = active.assignment(|d| 0f64.clamp(d.lo, d.hi));
        self.active = active;
        Ok(())
    }

    pub fn install(&mut self, id: usize, stack: bool) -> Result<(), ServiceError> {
        let mut ids = if stack { self.stack.clone() } else { Vec::new() };
        ids.push(id);
        self.set_stack(ids)
    }

    /// Session values overlaid with `overrides`, clamped to the declared
    /// ranges.
    pub fn assignment(&self, overrides: &Assignment) -> Assignment {
        let mut sigma = self.params.clone();
        for (k, v) in overrides {
            sigma.insert(k.clone(), *v);
        }
        resolve_assignment(&self.active, &sigma).0
    }

    pub fn set_params(&mut self, values: &Assignment) -> Result<(), ServiceError> {
        if let Some(k) = values.keys().find(|k| self.active.param(k).is_none()) {
            return Err(ServiceError::Unprocessable(format!("the active program has no parameter {k}")));
        }
        self.params = self.assignment(values);
        Ok(())
    }

    pub fn summary(&self) -> Value {
        let programs: Vec<Value> = self
            .programs
            .iter()
            .map(|p| json!({ "id": p.id, "origin": p.origin, "params": p.program.params.len(), "ops": p.program.ops.len() }))
            .collect();
        let params: Vec<Value> = self
            .active
            .params
            .iter()
            .map(|d| json!({ "name": d.name, "lo": d.lo, "hi": d.hi, "value": self.params.get(&d.name) }))
            .collect();
        json!({
            "id": self.id,
            "shape": self.shape,
            "graph": graph_json(&self.graph),
            "programs": programs,
            "stack": self.stack,
            "params": params,
            "history": self.history,
        })
    }
}
