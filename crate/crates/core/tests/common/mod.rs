#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapeprog_core::dsl::{EditKind, EditOp, EditProgram, Operand, ParamDecl};
use shapeprog_core::geometry::Vec3;
use shapeprog_core::shape::{build_graph, Feature, ShapeConfig, ShapeGraph};
use shapeprog_core::symbolic::{Assignment, Node, SymExpr};
use shapeprog_core::fixtures;

pub fn graph(name: &str) -> ShapeGraph {
    build_graph(&fixtures::by_name(name).unwrap(), ShapeConfig::default()).unwrap().0
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NAMES: [&str; 6] = ["x", "y", "t", "w_1", "len", "a2"];

pub fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if v.norm() > 0.2 {
            return v.normalize();
        }
    }
}

pub fn point(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.random_range(-1.5..1.5), rng.random_range(-0.5..2.5), rng.random_range(-1.5..1.5))
}

pub fn expr(rng: &mut ChaCha8Rng, params: &[String], depth: usize) -> SymExpr {
    if depth == 0 || rng.random_bool(0.3) {
        return if rng.random_bool(0.6) {
            SymExpr::param(&params[rng.random_range(0..params.len())])
        } else {
            SymExpr::constant(rng.random_range(-2.0..2.0))
        };
    }
    let sub = |rng: &mut ChaCha8Rng| expr(rng, params, depth - 1);
    let node = match rng.random_range(0..8) {
        0 => Node::Add(sub(rng), sub(rng)),
        1 => Node::Sub(sub(rng), sub(rng)),
        2 => Node::Mul(sub(rng), sub(rng)),
        3 => Node::Div(sub(rng), SymExpr::constant(rng.random_range(0.5..2.0))),
        4 => Node::Neg(sub(rng)),
        5 => Node::Sin(sub(rng)),
        6 => Node::Cos(sub(rng)),
        _ => Node::Atan2(sub(rng), SymExpr::constant(rng.random_range(0.5..2.0))),
    };
    SymExpr::new(node)
}

pub fn operand(rng: &mut ChaCha8Rng, graph: &ShapeGraph) -> Operand {
    let part = graph.nodes[rng.random_range(0..graph.nodes.len())].id.clone();
    match rng.random_range(0..6) {
        0 => Operand::Feature(part, Feature::Face(rng.random_range(0..6))),
        1 => Operand::Feature(part, Feature::Edge(rng.random_range(0..12))),
        2 => Operand::Feature(part, Feature::Corner(rng.random_range(0..8))),
        _ => Operand::Part(part),
    }
}

pub fn kind(rng: &mut ChaCha8Rng) -> EditKind {
    match rng.random_range(0..4) {
        0 => EditKind::Translate { dir: unit(rng) },
        1 => EditKind::Scale { origin: point(rng), axis: unit(rng) },
        2 => EditKind::Rotate { origin: point(rng), axis: unit(rng) },
        _ => {
            let normal = unit(rng);
            let dir = (unit(rng) - normal * 0.5).normalize();
            EditKind::Shear { origin: point(rng), normal, dir }
        }
    }
}

/// Part and feature operations only; group operations are added by
/// `with_group_ops`.
pub fn program(rng: &mut ChaCha8Rng, graph: &ShapeGraph, max_params: usize, max_ops: usize) -> EditProgram {
    let n_params = rng.random_range(1..=max_params);
    let mut names: Vec<String> = NAMES.iter().map(|s| s.to_string()).collect();
    for i in (1..names.len()).rev() {
        names.swap(i, rng.random_range(0..=i));
    }
    names.truncate(n_params);
    let params = names
        .iter()
        .map(|n| {
            let lo = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(-1.0..0.0) };
            ParamDecl { name: n.clone(), lo, hi: rng.random_range(0.1..1.5) }
        })
        .collect();
    let n_ops = rng.random_range(1..=max_ops);
    let ops = (0..n_ops).map(|_| EditOp::new(operand(rng, graph), kind(rng), expr(rng, &names, 3))).collect();
    EditProgram { params, ops }
}

/// Append count and spacing operations on the graph's arrays.
pub fn with_group_ops(rng: &mut ChaCha8Rng, graph: &ShapeGraph, mut p: EditProgram) -> EditProgram {
    let names: Vec<String> = p.params.iter().map(|d| d.name.clone()).collect();
    for e in graph.edges.iter().filter(|e| e.is_array()) {
        if rng.random_bool(0.5) {
            p.ops.push(EditOp::new(Operand::Relation(e.id.clone()), EditKind::SymGroupCount, expr(rng, &names, 1)));
        }
        if rng.random_bool(0.5) {
            let a = SymExpr::param(&names[0]).scale(0.05);
            p.ops.push(EditOp::new(Operand::Relation(e.id.clone()), EditKind::SymGroupSpacing, a));
        }
    }
    p
}

pub fn sample(rng: &mut ChaCha8Rng, p: &EditProgram) -> Assignment {
    p.params.iter().map(|d| (d.name.clone(), rng.random_range(d.lo..=d.hi))).collect::<BTreeMap<_, _>>()
}

pub fn max_corner_gap(a: &BTreeMap<String, [Vec3; 8]>, b: &BTreeMap<String, [Vec3; 8]>) -> f64 {
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    a.iter()
        .flat_map(|(k, ca)| ca.iter().zip(&b[k]).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

/// Multiply every amount by a parameter so the program vanishes at zero.
pub fn vanishing_at_zero(mut p: EditProgram) -> EditProgram {
    let names: Vec<String> = p.params.iter().map(|d| d.name.clone()).collect();
    for (i, op) in p.ops.iter_mut().enumerate() {
        op.amount = op.amount.times(&SymExpr::param(&names[i % names.len()]));
    }
    p
}

/// A seed edit per fixture that exercises propagation.
pub fn seed_program(name: &str) -> &'static str {
    match name {
        "chair" => "param x [0, 1]\nop scale seat x {origin=0,1.05,0 axis=1,0,0}\n",
        "table" => "param x [0, 1]\nop scale top x {origin=0,0.95,0 axis=1,0,0}\n",
        "cabinet" => "param x [0, 1.5707963267948966]\nop rotate door x {origin=-0.48,0.6,-0.415 axis=0,1,0}\n",
        "bench" => "param x [0, 1]\nop translate support_r x {dir=1,0,0}\n",
        "shelf" => "param x [0, 1]\nop scale shelf1 x {origin=0,0.715,0 axis=1,0,0}\n",
        "lamp" => "param x [0, 1]\nop scale pole x {origin=0,0.1,0 axis=0,1,0}\n",
        "grid50" => "param x [0, 1]\nop scale base x {origin=0,0.05,0 axis=1,0,0}\n",
        _ => panic!("no seed for {name}"),
    }
}
