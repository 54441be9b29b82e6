//! From a natural-language request to seed edits, relation validity and
//! type hints, by voting over provider responses.

pub mod prompt;
pub mod provider;
pub mod response;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use prompt::{inference_prompt, validity_subjects, Prompt, PromptOptions, Workflow};
pub use provider::{MockProvider, Provider, RemoteConfig, RemoteProvider};

use crate::dsl::{print, EditProgram, KindFamily, TauDefaults};
use crate::shape::ShapeGraph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("all {count} {workflow} responses were malformed")]
    AllResponsesMalformed { workflow: Workflow, count: usize },
    #[error("the number of votes must be odd and at least 1, got {0}")]
    BadVoteCount(usize),
}

/// Counts of one voted field, in order of first appearance.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tally {
    pub counts: Vec<(String, usize)>,
    pub malformed: usize,
}

impl Tally {
    pub fn add(&mut self, value: &str) {
        match self.counts.iter_mut().find(|(v, _)| v == value) {
            Some((_, n)) => *n += 1,
            None => self.counts.push((value.to_string(), 1)),
        }
    }

    /// The most frequent value; ties go to the one seen first.
    pub fn winner(&self) -> Option<&str> {
        let mut best: Option<&(String, usize)> = None;
        for c in &self.counts {
            if best.is_none_or(|b| c.1 > b.1) {
                best = Some(c);
            }
        }
        best.map(|(v, _)| v.as_str())
    }

    pub fn valid(&self) -> usize {
        self.counts.iter().map(|(_, n)| n).sum()
    }
}

/// One provider call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exchange {
    pub workflow: Workflow,
    pub subject: Option<String>,
    pub sample: usize,
    pub temperature: f64,
    pub prompt: String,
    pub response: Option<String>,
    /// Why the response was not counted, if it was not.
    pub rejected: Option<String>,
}

#[derive(Debug, Clone)]
pub struct InferenceBundle {
    pub request: String,
    pub seeds: EditProgram,
    /// Symmetry relation id to whether it should keep holding.
    pub relation_validity: BTreeMap<String, bool>,
    /// Parts without a hint are absent.
    pub type_hints: BTreeMap<String, KindFamily>,
    /// Field name (`seed`, `valid <relation>`, `hint <part>`) to tally.
    pub votes: BTreeMap<String, Tally>,
    pub transcript: Vec<Exchange>,
    pub warnings: Vec<String>,
}

impl InferenceBundle {
    pub fn invalid_relations(&self) -> Vec<String> {
        self.relation_validity.iter().filter(|(_, v)| !**v).map(|(k, _)| k.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferOptions {
    /// Shape identifier handed to the provider (fixture name for the mock).
    pub shape: String,
    pub n_votes: usize,
    pub prompts: PromptOptions,
    pub tau: TauDefaults,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions { shape: String::new(), n_votes: 5, prompts: PromptOptions::default(), tau: TauDefaults::default() }
    }
}

pub const VOTING_TEMPERATURE: f64 = 0.7;

fn temperature(n_votes: usize) -> f64 {
    if n_votes == 1 {
        0.0
    } else {
        VOTING_TEMPERATURE
    }
}

struct Job {
    prompt: Prompt,
    sample: usize,
}

/// Run every prompt concurrently; results come back in job order.
fn run_jobs(provider: &dyn Provider, jobs: &[Job], temp: f64) -> Vec<Result<String, LlmError>> {
    jobs.par_iter().map(|j| provider.complete(&j.prompt, temp, Some(j.sample as u64))).collect()
}

fn all_failed(results: &[&Result<String, LlmError>]) -> Option<LlmError> {
    if results.is_empty() || results.iter().any(|r| r.is_ok()) {
        return None;
    }
    results.iter().find_map(|r| r.as_ref().err().cloned())
}

pub fn infer(request: &str, graph: &ShapeGraph, provider: &dyn Provider, options: &InferOptions) -> Result<InferenceBundle, LlmError> {
    let n = options.n_votes;
    if n == 0 || n % 2 == 0 {
        return Err(LlmError::BadVoteCount(n));
    }
    let temp = temperature(n);
    let prompt = |w: Workflow, subject: Option<&str>| {
        inference_prompt(w, graph, &options.shape, request, subject, &options.prompts)
    };
    let subjects = validity_subjects(graph);
    let mut jobs = Vec::new();
    for sample in 0..n {
        jobs.push(Job { prompt: prompt(Workflow::Seed, None), sample });
        jobs.push(Job { prompt: prompt(Workflow::Hints, None), sample });
        for s in &subjects {
            jobs.push(Job { prompt: prompt(Workflow::Valid, Some(s)), sample });
        }
    }
    let results = run_jobs(provider, &jobs, temp);

    let mut transcript = Vec::with_capacity(jobs.len());
    let mut votes: BTreeMap<String, Tally> = BTreeMap::new();
    let mut seed_programs: BTreeMap<String, EditProgram> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (job, result) in jobs.iter().zip(&results) {
        let p = &job.prompt;
        let mut rejected = None;
        match result {
            Err(e) => rejected = Some(e.to_string()),
            Ok(text) => match p.workflow {
                Workflow::Seed => match response::parse_seed_response(text, graph, &options.tau) {
                    Ok(prog) => {
                        let key = print(&prog);
                        votes.entry("seed".into()).or_default().add(&key);
                        seed_programs.entry(key).or_insert(prog);
                    }
                    Err(e) => rejected = Some(e),
                },
                Workflow::Hints => match response::parse_hints_response(text, graph) {
                    Ok(hints) => {
                        for node in &graph.nodes {
                            let v = hints.get(&node.id).map_or("none", |k| k.name());
                            votes.entry(format!("hint {}", node.id)).or_default().add(v);
                        }
                    }
                    Err(e) => rejected = Some(e),
                },
                Workflow::Valid => match response::parse_validity_response(text) {
                    Ok(v) => {
                        let field = format!("valid {}", p.subject.as_deref().unwrap_or_default());
                        votes.entry(field).or_default().add(if v { "yes" } else { "no" });
                    }
                    Err(e) => rejected = Some(e),
                },
                Workflow::Proxydural | Workflow::Variations => unreachable!("not an inference workflow"),
            },
        }
        if rejected.is_some() {
            let field = match p.workflow {
                Workflow::Valid => format!("valid {}", p.subject.as_deref().unwrap_or_default()),
                w => w.name().to_string(),
            };
            votes.entry(field).or_default().malformed += 1;
        }
        transcript.push(Exchange {
            workflow: p.workflow,
            subject: p.subject.clone(),
            sample: job.sample,
            temperature: temp,
            prompt: p.text.clone(),
            response: result.as_ref().ok().cloned(),
            rejected,
        });
    }

    let of = |w: Workflow| -> Vec<&Result<String, LlmError>> {
        jobs.iter().zip(&results).filter(|(j, _)| j.prompt.workflow == w).map(|(_, r)| r).collect()
    };
    if let Some(e) = all_failed(&of(Workflow::Seed)) {
        return Err(e);
    }
    let seeds = match votes.get("seed").and_then(Tally::winner) {
        Some(key) => seed_programs.remove(key).expect("every tallied seed was parsed"),
        None => return Err(LlmError::AllResponsesMalformed { workflow: Workflow::Seed, count: n }),
    };

    let mut type_hints = BTreeMap::new();
    if votes.keys().any(|k| k.starts_with("hint ")) {
        for node in &graph.nodes {
            let winner = votes.get(&format!("hint {}", node.id)).and_then(Tally::winner);
            if let Some(kind) = winner.and_then(KindFamily::parse) {
                type_hints.insert(node.id.clone(), kind);
            }
        }
    } else {
        warnings.push(format!("no usable hints response out of {n}; no type hints applied"));
    }

    let mut relation_validity = BTreeMap::new();
    for s in &subjects {
        let winner = votes.get(&format!("valid {s}")).and_then(Tally::winner);
        if winner.is_none() {
            warnings.push(format!("no usable validity response for {s}; kept as valid"));
        }
        relation_validity.insert(s.clone(), winner != Some("no"));
    }

    Ok(InferenceBundle {
        request: request.to_string(),
        seeds,
        relation_validity,
        type_hints,
        votes,
        transcript,
        warnings,
    })
}

/// What propagation needs from a bundle.
#[derive(Debug, Clone)]
pub struct AppliedBundle {
    pub seeds: EditProgram,
    /// The graph with the invalid relations disabled.
    pub graph: ShapeGraph,
    pub disabled: Vec<String>,
    pub hints: BTreeMap<String, KindFamily>,
}

pub fn apply_bundle(bundle: &InferenceBundle, graph: &ShapeGraph) -> AppliedBundle {
    let disabled = bundle.invalid_relations();
    AppliedBundle {
        seeds: bundle.seeds.clone(),
        graph: if disabled.is_empty() { graph.clone() } else { graph.with_disabled(&disabled) },
        disabled,
        hints: bundle.type_hints.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenerateMode {
    /// Independent requests to stack into a multi-slider model.
    Proxydural,
    /// Rephrasings of a base request with different secondary effects.
    Variations(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub requests: Vec<String>,
    pub exchange: Exchange,
    pub warnings: Vec<String>,
}

pub fn generate_requests(
    graph: &ShapeGraph,
    provider: &dyn Provider,
    mode: &GenerateMode,
    shape: &str,
) -> Result<Generated, LlmError> {
    let (workflow, request) = match mode {
        GenerateMode::Proxydural => (Workflow::Proxydural, ""),
        GenerateMode::Variations(base) => (Workflow::Variations, base.as_str()),
    };
    let prompt = inference_prompt(workflow, graph, shape, request, None, &PromptOptions::default());
    let text = provider.complete(&prompt, 0.0, Some(0))?;
    let requests = response::parse_requests_response(&text);
    let mut warnings = Vec::new();
    if requests.is_empty() {
        warnings.push(format!("the {workflow} response held no requests"));
    }
    Ok(Generated {
        requests,
        exchange: Exchange {
            workflow,
            subject: None,
            sample: 0,
            temperature: 0.0,
            prompt: prompt.text,
            response: Some(text),
            rejected: None,
        },
        warnings,
    })
}
