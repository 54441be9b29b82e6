//! Prompt assembly from the text templates under `prompts/`.

use serde::{Deserialize, Serialize};

use crate::shape::{RelationKind, ShapeGraph};
use crate::symbolic::format_number;

pub const TEMPLATE_VERSION: &str = "v1";

const PREAMBLE: &str = include_str!("../../prompts/v1/preamble.txt");
const REASONING: &str = include_str!("../../prompts/v1/reasoning.txt");
const SEED: [&str; 3] = [
    include_str!("../../prompts/v1/seed.txt"),
    include_str!("../../prompts/v1/seed_examples.txt"),
    include_str!("../../prompts/v1/seed_reminders.txt"),
];
const VALID: [&str; 3] = [
    include_str!("../../prompts/v1/valid.txt"),
    include_str!("../../prompts/v1/valid_examples.txt"),
    include_str!("../../prompts/v1/valid_reminders.txt"),
];
const HINTS: [&str; 3] = [
    include_str!("../../prompts/v1/hints.txt"),
    include_str!("../../prompts/v1/hints_examples.txt"),
    include_str!("../../prompts/v1/hints_reminders.txt"),
];
const PROXYDURAL: &str = include_str!("../../prompts/v1/proxydural.txt");
const VARIATIONS: &str = include_str!("../../prompts/v1/variations.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Workflow {
    Seed,
    Valid,
    Hints,
    Proxydural,
    Variations,
}

impl Workflow {
    pub fn name(&self) -> &'static str {
        match self {
            Workflow::Seed => "seed",
            Workflow::Valid => "valid",
            Workflow::Hints => "hints",
            Workflow::Proxydural => "proxydural",
            Workflow::Variations => "variations",
        }
    }
}

impl std::fmt::Display for Workflow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which optional blocks go into the inference prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptOptions {
    pub chain_of_thought: bool,
    pub in_context: bool,
    pub reminders: bool,
}

impl Default for PromptOptions {
    fn default() -> Self {
        PromptOptions { chain_of_thought: true, in_context: true, reminders: true }
    }
}

/// A rendered prompt together with the keys a replaying provider needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prompt {
    pub workflow: Workflow,
    /// Shape identifier, for example a fixture name.
    pub shape: String,
    pub request: String,
    /// The relation a validity prompt asks about.
    pub subject: Option<String>,
    pub text: String,
}

pub fn part_list(graph: &ShapeGraph) -> String {
    let mut out = String::new();
    for n in &graph.nodes {
        let (lo, hi) = n.cage.corners.iter().fold(
            ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]),
            |(mut lo, mut hi), c| {
                for k in 0..3 {
                    lo[k] = lo[k].min(c[k]);
                    hi[k] = hi[k].max(c[k]);
                }
                (lo, hi)
            },
        );
        let num = |v: f64| format_number((v * 1000.0).round() / 1000.0 + 0.0);
        let c = n.cage.center;
        out.push_str(&format!(
            "- {}: {}, center ({}, {}, {}), size ({}, {}, {})\n",
            n.id,
            n.verbal_name(),
            num(c.x),
            num(c.y),
            num(c.z),
            num(hi[0] - lo[0]),
            num(hi[1] - lo[1]),
            num(hi[2] - lo[2]),
        ));
    }
    out
}

pub fn relation_list(graph: &ShapeGraph) -> String {
    let mut out = String::new();
    for e in graph.enabled_edges() {
        out.push_str(&format!("- {}: {}\n", e.id, e.describe()));
    }
    if out.is_empty() {
        out.push_str("- none\n");
    }
    out
}

fn preamble(graph: &ShapeGraph) -> String {
    PREAMBLE.replace("{parts}", part_list(graph).trim_end()).replace("{relations}", relation_list(graph).trim_end())
}

fn fill(template: &str, graph: &ShapeGraph, request: &str) -> String {
    template.replace("{preamble}", &preamble(graph)).replace("{request}", request)
}

fn with_blocks(parts: [&str; 3], options: &PromptOptions) -> String {
    let pick = |on: bool, s: &str| if on { s.to_string() } else { String::new() };
    parts[0]
        .replace("{examples}", &pick(options.in_context, parts[1]))
        .replace("{reasoning}", &pick(options.chain_of_thought, REASONING))
        .replace("{reminders}", &pick(options.reminders, parts[2]))
}

/// The prompt for one inference workflow. `subject` is the relation id for
/// validity prompts.
pub fn inference_prompt(
    workflow: Workflow,
    graph: &ShapeGraph,
    shape: &str,
    request: &str,
    subject: Option<&str>,
    options: &PromptOptions,
) -> Prompt {
    let template = match workflow {
        Workflow::Seed => with_blocks(SEED, options),
        Workflow::Valid => with_blocks(VALID, options),
        Workflow::Hints => with_blocks(HINTS, options),
        Workflow::Proxydural => PROXYDURAL.to_string(),
        Workflow::Variations => VARIATIONS.to_string(),
    };
    let mut text = fill(&template, graph, request);
    if let Some(id) = subject {
        let described = graph.edge(id).map_or_else(|| id.to_string(), |e| format!("{id}, {}", e.describe()));
        text = text.replace("{relation}", &described);
    }
    Prompt {
        workflow,
        shape: shape.to_string(),
        request: request.to_string(),
        subject: subject.map(str::to_string),
        text,
    }
}

/// Symmetry relations get their own validity prompt each.
pub fn validity_subjects(graph: &ShapeGraph) -> Vec<String> {
    graph.enabled_edges().filter(|e| matches!(e.kind, RelationKind::Symmetry { .. })).map(|e| e.id.clone()).collect()
}
