//! Request in, program out.

use thiserror::Error;

use crate::aep::{propagate, AepConfig, AepError, Propagation};
use crate::dsl::{compose, EditProgram};
use crate::llm::{apply_bundle, generate_requests, infer, GenerateMode, InferOptions, InferenceBundle, LlmError, Provider};
use crate::shape::ShapeGraph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Aep(#[from] AepError),
    #[error("the provider proposed no requests")]
    NoRequests,
}

#[derive(Debug, Clone)]
pub struct EditOutcome {
    pub bundle: InferenceBundle,
    pub propagation: Propagation,
}

impl EditOutcome {
    pub fn program(&self) -> &EditProgram {
        &self.propagation.program
    }
}

pub fn edit_from_request(
    graph: &ShapeGraph,
    request: &str,
    provider: &dyn Provider,
    infer_options: &InferOptions,
    config: &AepConfig,
) -> Result<EditOutcome, PipelineError> {
    let bundle = infer(request, graph, provider, infer_options)?;
    let applied = apply_bundle(&bundle, graph);
    let propagation = propagate(graph, &applied.seeds, &applied.hints, &applied.disabled, config)?;
    Ok(EditOutcome { bundle, propagation })
}

/// A stack of single-parameter programs, one slider each.
#[derive(Debug, Clone)]
pub struct ProxyduralModel {
    pub program: EditProgram,
    pub requests: Vec<String>,
    pub outcomes: Vec<EditOutcome>,
    pub warnings: Vec<String>,
}

/// Ask for requests, turn each into a program and compose them in order.
/// Requests whose inference or propagation fails are skipped with a warning.
pub fn proxydural(
    graph: &ShapeGraph,
    provider: &dyn Provider,
    infer_options: &InferOptions,
    config: &AepConfig,
) -> Result<ProxyduralModel, PipelineError> {
    let generated = generate_requests(graph, provider, &GenerateMode::Proxydural, &infer_options.shape)?;
    let mut warnings = generated.warnings;
    let mut program = EditProgram::default();
    let mut outcomes = Vec::new();
    for r in &generated.requests {
        match edit_from_request(graph, r, provider, infer_options, config) {
            Ok(o) => {
                program = compose(&program, o.program());
                outcomes.push(o);
            }
            Err(e) => warnings.push(format!("skipped \"{r}\": {e}")),
        }
    }
    if outcomes.is_empty() {
        return Err(PipelineError::NoRequests);
    }
    Ok(ProxyduralModel { program, requests: generated.requests, outcomes, warnings })
}
