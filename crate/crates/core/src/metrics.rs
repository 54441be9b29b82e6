//! Program quality against a reference program: programmatic overlap,
//! geometric distance and relation-state agreement.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aep::{check_sat, relation_constraint, CageFunctions};
use crate::dsl::{apply_numeric, operand_text, resolve_assignment, DeformedShape, EditKind, EditOp, EditProgram};
use crate::geometry::Vec3;
use crate::shape::ShapeGraph;
use crate::symbolic::Assignment;

pub const N_SAMPLES: usize = 16;
pub const AMOUNT_TOL: f64 = 1e-3;
pub const SAMPLE_SEED: u64 = 0x6d65_7472;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub j_prog: f64,
    /// In hundredths of the bounding-box diagonal.
    pub d_geo: f64,
    pub pct_rel: f64,
}

fn quantize(v: &Vec3) -> String {
    let q = |c: f64| (c * 20.0).round() / 20.0 + 0.0;
    format!("{},{},{}", q(v.x), q(v.y), q(v.z))
}

/// Operand, kind and direction rounded to 0.05.
pub fn signature(op: &EditOp) -> String {
    let dirs = match &op.kind {
        EditKind::Translate { dir } => quantize(dir),
        EditKind::Scale { axis, .. } | EditKind::Rotate { axis, .. } => quantize(axis),
        EditKind::Shear { normal, dir, .. } => format!("{};{}", quantize(normal), quantize(dir)),
        EditKind::SymGroupCount | EditKind::SymGroupSpacing => String::new(),
    };
    format!("{} {} {}", op.kind.name(), operand_text(&op.operand), dirs)
}

/// Sample assignments for two programs whose parameters correspond by
/// position. Each position draws one value from the reference range (or
/// the other program's range past the end of the reference list) and both
/// programs get it.
pub fn aligned_samples(p: &EditProgram, gt: &EditProgram, n: usize, seed: u64) -> Vec<(Assignment, Assignment)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = p.params.len().max(gt.params.len());
    (0..n)
        .map(|_| {
            let mut a = Assignment::new();
            let mut b = Assignment::new();
            for i in 0..k {
                let d = gt.params.get(i).or_else(|| p.params.get(i)).expect("i below both lengths' max");
                let v = if d.hi > d.lo { rng.random_range(d.lo..=d.hi) } else { d.lo };
                if let Some(pd) = p.params.get(i) {
                    a.insert(pd.name.clone(), v);
                }
                if let Some(gd) = gt.params.get(i) {
                    b.insert(gd.name.clone(), v);
                }
            }
            (a, b)
        })
        .collect()
}

fn first_by_signature(p: &EditProgram) -> BTreeMap<String, &EditOp> {
    let mut out = BTreeMap::new();
    for op in &p.ops {
        out.entry(signature(op)).or_insert(op);
    }
    out
}

/// Jaccard index of the operation signatures times the share of matched
/// operations whose amounts agree at every sample.
pub fn j_prog(p: &EditProgram, gt: &EditProgram) -> f64 {
    let a = first_by_signature(p);
    let b = first_by_signature(gt);
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let keys_a: BTreeSet<&String> = a.keys().collect();
    let keys_b: BTreeSet<&String> = b.keys().collect();
    let shared: Vec<&String> = keys_a.intersection(&keys_b).copied().collect();
    if shared.is_empty() {
        return 0.0;
    }
    let union = keys_a.union(&keys_b).count();
    let samples = aligned_samples(p, gt, N_SAMPLES, SAMPLE_SEED);
    let agree = shared
        .iter()
        .filter(|k| {
            samples.iter().all(|(sa, sb)| match (a[k.as_str()].amount.eval(sa), b[k.as_str()].amount.eval(sb)) {
                (Ok(x), Ok(y)) => (x - y).abs() < AMOUNT_TOL,
                _ => false,
            })
        })
        .count();
    shared.len() as f64 / union as f64 * (agree as f64 / shared.len() as f64)
}

fn cages(p: &EditProgram, graph: &ShapeGraph, sigma: &Assignment) -> Option<DeformedShape> {
    let (resolved, _) = resolve_assignment(p, sigma);
    apply_numeric(p, graph, &resolved, false).ok()
}

fn mean_corner_distance(a: &DeformedShape, b: &DeformedShape) -> f64 {
    let counterpart = |s: &'_ DeformedShape, id: &str, source: &str| -> Option<[Vec3; 8]> {
        s.part(id).or_else(|| s.part(source)).map(|p| p.corners)
    };
    let mut total = 0.0;
    let mut count = 0usize;
    let mut seen = BTreeSet::new();
    for (this, other) in [(a, b), (b, a)] {
        for part in &this.parts {
            if !seen.insert(part.id.as_str()) {
                continue;
            }
            if let Some(c) = counterpart(other, &part.id, &part.source) {
                total += part.corners.iter().zip(&c).map(|(p, q)| (p - q).norm()).sum::<f64>();
                count += 8;
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Mean corner distance between the two edited shapes over sampled
/// assignments, in units of `diag / 100`.
pub fn d_geo(p: &EditProgram, gt: &EditProgram, graph: &ShapeGraph) -> f64 {
    let samples = aligned_samples(p, gt, N_SAMPLES, SAMPLE_SEED);
    let mut sum = 0.0;
    for (sa, sb) in &samples {
        let (Some(a), Some(b)) = (cages(p, graph, sa), cages(gt, graph, sb)) else { return f64::INFINITY };
        sum += mean_corner_distance(&a, &b);
    }
    sum / samples.len() as f64 * 100.0 / graph.diag
}

/// Whether each relation holds under `p`, by id.
pub fn relation_states(p: &EditProgram, graph: &ShapeGraph) -> BTreeMap<String, bool> {
    let cf = CageFunctions::new(p, graph);
    graph
        .edges
        .iter()
        .map(|e| {
            let holds = relation_constraint(graph, &cf, e).is_none_or(|c| check_sat(&c, &p.params, N_SAMPLES, SAMPLE_SEED));
            (e.id.clone(), holds)
        })
        .collect()
}

/// Percentage of relations whose state (maintained or broken) is the same
/// under both programs.
pub fn pct_rel(p: &EditProgram, gt: &EditProgram, graph: &ShapeGraph) -> f64 {
    if graph.edges.is_empty() {
        return 100.0;
    }
    let a = relation_states(p, graph);
    let b = relation_states(gt, graph);
    let same = a.iter().filter(|(k, v)| b.get(*k) == Some(v)).count();
    100.0 * same as f64 / graph.edges.len() as f64
}

pub fn evaluate(p: &EditProgram, gt: &EditProgram, graph: &ShapeGraph) -> EvalReport {
    EvalReport { j_prog: j_prog(p, gt), d_geo: d_geo(p, gt, graph), pct_rel: pct_rel(p, gt, graph) }
}

#[derive(Debug, Serialize)]
struct Row<'a> {
    name: &'a str,
    j_prog: f64,
    d_geo: f64,
    pct_rel: f64,
}

/// One CSV row per named report, with a header.
pub fn write_csv<W: Write>(out: W, rows: &[(String, EvalReport)]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for (name, r) in rows {
        w.serialize(Row { name, j_prog: r.j_prog, d_geo: r.d_geo, pct_rel: r.pct_rel })?;
    }
    w.flush()?;
    Ok(())
}
