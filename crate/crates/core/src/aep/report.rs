use std::fmt::{self, Write as _};

use super::candidate::Provenance;
use super::solve::SolveOutcome;
use crate::dsl::{op_text, EditProgram};
use crate::symbolic::format_number;

/// One iteration of the propagation loop.
#[derive(Debug, Clone, Default)]
pub struct Round {
    pub number: usize,
    /// Enabled relations broken at the start of the round.
    pub broken: Vec<String>,
    /// `(part, from, relation)` for every conjugated copy.
    pub conjugated: Vec<(String, String, String)>,
    pub part: Option<String>,
    pub candidates: usize,
    pub solutions: usize,
    pub selected: Option<SolveOutcome>,
    pub stalled: Option<String>,
}

/// Log of a propagation run, printed as indented text.
#[derive(Debug, Clone, Default)]
pub struct SolverReport {
    pub seeds: Vec<String>,
    pub rounds: Vec<Round>,
    pub maintained: Vec<String>,
    pub broken: Vec<String>,
    pub disabled: Vec<String>,
    pub program: String,
}

impl SolverReport {
    pub fn new(seeds: &EditProgram) -> SolverReport {
        SolverReport { seeds: seeds.ops.iter().map(op_text).collect(), ..SolverReport::default() }
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

fn energy_text(e: f64) -> String {
    if e.abs() < 1e-12 {
        "0".to_string()
    } else {
        format_number(format!("{e:.6e}").parse().unwrap_or(e))
    }
}

impl fmt::Display for SolverReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for s in &self.seeds {
            let _ = writeln!(out, "seed {s}");
        }
        let _ = writeln!(out, "disabled {}", list(&self.disabled));
        for r in &self.rounds {
            let _ = writeln!(out, "round {}", r.number);
            let _ = writeln!(out, "  broken {}", list(&r.broken));
            for (part, from, rel) in &r.conjugated {
                let _ = writeln!(out, "  conjugate {part} from {from} via {rel}");
            }
            if let Some(part) = &r.part {
                let _ = writeln!(out, "  solve {part}: {} candidates, {} solutions", r.candidates, r.solutions);
            }
            if let Some(o) = &r.selected {
                let origin = match &o.candidate.provenance {
                    Provenance::Own => "own".to_string(),
                    Provenance::Neighbor(n) => format!("neighbor {n}"),
                };
                let _ = writeln!(out, "  select {}", op_text(&o.edit));
                let _ = writeln!(
                    out,
                    "    features {origin}, energy {}, planes {}, satisfied {}, broken {}",
                    energy_text(o.arap_energy),
                    o.sym_planes,
                    list(&o.satisfied),
                    list(&o.broken)
                );
            }
            if let Some(reason) = &r.stalled {
                let _ = writeln!(out, "  stalled: {reason}");
            }
        }
        let _ = writeln!(out, "maintained {}", list(&self.maintained));
        let _ = writeln!(out, "broken {}", list(&self.broken));
        let _ = writeln!(out, "program");
        for line in self.program.lines() {
            let _ = writeln!(out, "  {line}");
        }
        f.write_str(&out)
    }
}
