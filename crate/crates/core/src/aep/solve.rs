//! Per-candidate amount solving, outcome scoring and selection.

use std::cmp::Ordering;

use nalgebra::Matrix3;

use super::candidate::CandidateEdit;
use super::AepError;
use crate::dsl::{EditKind, EditOp};
use crate::geometry::{plane_basis, snap, Vec3};
use crate::symbolic::{
    probably_equal, solve_linear, solve_rotation_angle, Assignment, LinearSolution, Node, SymExpr,
};

/// Name of the unknown amount while solving.
pub const UNKNOWN: &str = "_u";

/// One attachment point seen from the part being solved.
#[derive(Debug, Clone)]
pub struct TargetPoint {
    /// Rest position on the part being solved.
    pub rest: Vec3,
    /// Position on the edited partner as a function of the parameters.
    pub target: [SymExpr; 3],
    /// `target(x) - target(0)`.
    pub motion: [SymExpr; 3],
    /// `target` evaluated at each SAT sample.
    pub sampled: Vec<Vec3>,
}

/// An attachment relation between the part and an edited partner.
#[derive(Debug, Clone)]
pub struct PointConstraint {
    pub source: String,
    pub points: Vec<TargetPoint>,
}

/// Everything needed to solve candidates of one part.
#[derive(Debug, Clone)]
pub struct PartProblem {
    pub part: String,
    pub rest: [Vec3; 8],
    pub constraints: Vec<PointConstraint>,
    pub samples: Vec<Assignment>,
    pub reference: Assignment,
    pub delta: f64,
    pub diag: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub candidate: CandidateEdit,
    pub edit: EditOp,
    pub satisfied: Vec<String>,
    pub broken: Vec<String>,
    pub arap_energy: f64,
    pub sym_planes: u8,
    /// Amount at the reference assignment.
    pub reference_amount: f64,
}

/// Displacement of `p` per unit amount for the affine kinds.
fn unit_motion(kind: &EditKind, p: &Vec3) -> Option<Vec3> {
    match kind {
        EditKind::Translate { dir } => Some(*dir),
        EditKind::Scale { origin, axis } => Some(axis * (p - origin).dot(axis)),
        EditKind::Shear { origin, normal, dir } => Some(dir * (p - origin).dot(normal)),
        _ => None,
    }
}

/// Round constants that sit within float noise of a 12-digit decimal and
/// drop negligible ones, so solved amounts print cleanly.
pub fn tidy(e: &SymExpr) -> SymExpr {
    fn go(e: &SymExpr) -> SymExpr {
        match e.node() {
            Node::Const(c) => SymExpr::constant(snap(*c)),
            Node::Param(_) => e.clone(),
            Node::Add(a, b) => SymExpr::new(Node::Add(go(a), go(b))),
            Node::Sub(a, b) => SymExpr::new(Node::Sub(go(a), go(b))),
            Node::Mul(a, b) => SymExpr::new(Node::Mul(go(a), go(b))),
            Node::Div(a, b) => SymExpr::new(Node::Div(go(a), go(b))),
            Node::Neg(a) => SymExpr::new(Node::Neg(go(a))),
            Node::Sin(a) => SymExpr::new(Node::Sin(go(a))),
            Node::Cos(a) => SymExpr::new(Node::Cos(go(a))),
            Node::Atan2(y, x) => SymExpr::new(Node::Atan2(go(y), go(x))),
        }
    }
    go(e).simplify()
}

fn split_factor(e: &SymExpr) -> (f64, &SymExpr) {
    match e.node() {
        Node::Mul(a, b) => match (a.as_const(), b.as_const()) {
            (Some(c), None) => (c, b),
            (None, Some(c)) => (c, a),
            _ => (1.0, e),
        },
        _ => (1.0, e),
    }
}

/// `atan2(k sin u, k cos u)` with `k > 0` is `u` up to a multiple of 2π.
fn unwrap_angle(e: &SymExpr) -> Option<SymExpr> {
    let Node::Atan2(y, x) = e.node() else { return None };
    let (ky, sy) = split_factor(y);
    let (kx, cx) = split_factor(x);
    if ky <= 0.0 || (ky - kx).abs() > 1e-9 * ky {
        return None;
    }
    match (sy.node(), cx.node()) {
        (Node::Sin(u), Node::Cos(v)) if u.to_string() == v.to_string() => Some(u.clone()),
        _ => None,
    }
}

/// Candidate amounts, one per constraint component that involves the unknown.
fn solutions(candidate: &CandidateEdit, problem: &PartProblem) -> Vec<SymExpr> {
    let mut out: Vec<SymExpr> = Vec::new();
    let mut push = |s: SymExpr| {
        let mut s = tidy(&s);
        if let Some(u) = unwrap_angle(&s) {
            let same = problem.samples.iter().all(|a| match (s.eval(a), u.eval(a)) {
                (Ok(p), Ok(q)) => (p - q).abs() <= 1e-9,
                _ => false,
            });
            if same {
                s = u;
            }
        }
        if s.is_const(0.0) || out.iter().any(|o| probably_equal(o, &s)) {
            return;
        }
        out.push(s);
    };
    let tiny = 1e-12 * problem.diag.max(1.0);
    for c in &problem.constraints {
        for pt in &c.points {
            if let EditKind::Rotate { origin, axis } = &candidate.kind {
                let r = pt.rest - origin;
                let (e1, e2) = plane_basis(axis);
                let rest2 = [r.dot(&e1), r.dot(&e2)];
                if rest2[0].hypot(rest2[1]) < 1e-6 * problem.diag {
                    continue;
                }
                let planar = |e: &Vec3, r0: f64| {
                    let mut terms = vec![SymExpr::constant(r0)];
                    terms.extend((0..3).filter(|&k| e[k] != 0.0).map(|k| pt.motion[k].scale(e[k])));
                    SymExpr::sum(&terms).simplify()
                };
                let (t1, t2) = (planar(&e1, rest2[0]), planar(&e2, rest2[1]));
                if let Ok(angle) = solve_rotation_angle(rest2, [&t1, &t2]) {
                    push(angle);
                }
                continue;
            }
            let Some(g) = unit_motion(&candidate.kind, &pt.rest) else { continue };
            for k in 0..3 {
                if g[k].abs() <= tiny {
                    continue;
                }
                let residual = SymExpr::param(UNKNOWN).scale(g[k]).minus(&pt.motion[k]);
                if let Ok(LinearSolution::Unique(s)) = solve_linear(&residual, UNKNOWN) {
                    push(s);
                }
            }
        }
    }
    out
}

/// Closest rotation to `f` (polar decomposition).
fn closest_rotation(f: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = f.svd(true, true);
    let (Some(mut u), Some(v_t)) = (svd.u, svd.v_t) else { return Matrix3::identity() };
    if (u * v_t).determinant() < 0.0 {
        let flipped = -u.column(2);
        u.set_column(2, &flipped);
    }
    u * v_t
}

/// `‖F − R(F)‖²` of the best-fit affine map taking rest corners to deformed
/// corners.
pub fn arap_energy(rest: &[Vec3; 8], deformed: &[Vec3; 8]) -> f64 {
    let cr = rest.iter().fold(Vec3::zeros(), |a, p| a + p) / 8.0;
    let cd = deformed.iter().fold(Vec3::zeros(), |a, p| a + p) / 8.0;
    let mut a = Matrix3::zeros();
    let mut b = Matrix3::zeros();
    for (r, d) in rest.iter().zip(deformed) {
        let r = r - cr;
        let d = d - cd;
        a += d * r.transpose();
        b += r * r.transpose();
    }
    let Some(inv) = b.try_inverse() else { return f64::INFINITY };
    let f = a * inv;
    (f - closest_rotation(&f)).norm_squared()
}

/// Number of the cage's three mid-planes that are still mirror planes of
/// the deformed corners.
pub fn sym_planes(corners: &[Vec3; 8], delta: f64) -> u8 {
    let center = corners.iter().fold(Vec3::zeros(), |a, p| a + p) / 8.0;
    let mut count = 0;
    for k in 0..3 {
        let bit = 1 << k;
        let span = (0..8).fold(Vec3::zeros(), |a, c| if c & bit != 0 { a + corners[c] } else { a - corners[c] });
        if span.norm() == 0.0 {
            continue;
        }
        let n = span.normalize();
        let ok = (0..8).all(|c| {
            let p = corners[c];
            let mirrored = p - n * (2.0 * (p - center).dot(&n));
            (mirrored - corners[c ^ bit]).amax() < delta
        });
        if ok {
            count += 1;
        }
    }
    count
}

fn apply_corners(kind: &EditKind, a: f64, rest: &[Vec3; 8]) -> [Vec3; 8] {
    std::array::from_fn(|i| kind.apply_point(a, &rest[i]))
}

/// Solve the candidate's amount against each constraint component, then
/// classify every distinct solution against all constraints.
pub fn solve_amount(candidate: &CandidateEdit, problem: &PartProblem) -> Result<Vec<SolveOutcome>, AepError> {
    let sols = solutions(candidate, problem);
    if sols.is_empty() {
        return Err(AepError::NoFeasibleSolution(candidate.part.clone()));
    }
    let mut out = Vec::new();
    for sol in sols {
        let Ok(reference_amount) = sol.eval(&problem.reference) else { continue };
        let amounts: Vec<Option<f64>> = problem.samples.iter().map(|s| sol.eval(s).ok()).collect();
        let mut satisfied = Vec::new();
        let mut broken = Vec::new();
        for c in &problem.constraints {
            let ok = amounts.iter().enumerate().all(|(i, a)| {
                let Some(a) = a else { return false };
                c.points.iter().all(|pt| (candidate.kind.apply_point(*a, &pt.rest) - pt.sampled[i]).amax() < problem.delta)
            });
            if ok {
                satisfied.push(c.source.clone());
            } else {
                broken.push(c.source.clone());
            }
        }
        let deformed = apply_corners(&candidate.kind, reference_amount, &problem.rest);
        out.push(SolveOutcome {
            candidate: candidate.clone(),
            edit: candidate.with_amount(sol),
            satisfied,
            broken,
            arap_energy: arap_energy(&problem.rest, &deformed),
            sym_planes: sym_planes(&deformed, problem.delta),
            reference_amount,
        });
    }
    Ok(out)
}

const ENERGY_TOL: f64 = 1e-9;

/// Lexicographic preference: fewer broken constraints, lower energy, more
/// symmetry planes, a non-negative amount, then enumeration order.
pub fn compare_outcomes(a: &SolveOutcome, b: &SolveOutcome) -> Ordering {
    a.broken
        .len()
        .cmp(&b.broken.len())
        .then_with(|| {
            if (a.arap_energy - b.arap_energy).abs() <= ENERGY_TOL * (1.0 + a.arap_energy.abs().max(b.arap_energy.abs())) {
                Ordering::Equal
            } else {
                a.arap_energy.total_cmp(&b.arap_energy)
            }
        })
        .then_with(|| b.sym_planes.cmp(&a.sym_planes))
        .then_with(|| (a.reference_amount < 0.0).cmp(&(b.reference_amount < 0.0)))
        .then_with(|| a.candidate.index.cmp(&b.candidate.index))
}

/// Best outcome by [`compare_outcomes`]; ties keep the earlier one.
pub fn select(outcomes: &[SolveOutcome]) -> Option<&SolveOutcome> {
    let mut best: Option<&SolveOutcome> = None;
    for o in outcomes {
        if best.is_none_or(|b| compare_outcomes(o, b) == Ordering::Less) {
            best = Some(o);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aep::candidate::Provenance;
    use crate::symbolic::parse_expr;

    fn unit_box() -> [Vec3; 8] {
        std::array::from_fn(|c| Vec3::new((c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64))
    }

    #[test]
    fn rigid_motion_has_zero_energy_and_stretch_does_not() {
        let rest = unit_box();
        let moved = rest.map(|p| crate::geometry::rotation_matrix(&Vec3::y(), 0.3) * p + Vec3::new(1.0, 2.0, 3.0));
        assert!(arap_energy(&rest, &moved) < 1e-20);
        let stretched = rest.map(|p| Vec3::new(1.5 * p.x, p.y, p.z));
        assert!((arap_energy(&rest, &stretched) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn plane_counts() {
        let rest = unit_box();
        assert_eq!(sym_planes(&rest, 1e-9), 3);
        let sheared = rest.map(|p| Vec3::new(p.x + 0.3 * p.y, p.y, p.z));
        assert_eq!(sym_planes(&sheared, 1e-9), 1);
    }

    #[test]
    fn tidy_rounds_float_noise() {
        let e = parse_expr("0.7999999999999999 * x + 0.00000000000000001").unwrap();
        assert_eq!(tidy(&e).to_string(), "0.8 * x");
    }

    fn outcome(broken: usize, arap: f64, planes: u8, index: usize) -> SolveOutcome {
        SolveOutcome {
            candidate: CandidateEdit {
                part: "p".into(),
                kind: EditKind::Translate { dir: Vec3::x() },
                provenance: Provenance::Own,
                index,
            },
            edit: EditOp::new(
                crate::dsl::Operand::Part("p".into()),
                EditKind::Translate { dir: Vec3::x() },
                SymExpr::param("x"),
            ),
            satisfied: vec![],
            broken: (0..broken).map(|i| format!("r{i}")).collect(),
            arap_energy: arap,
            sym_planes: planes,
            reference_amount: 0.5,
        }
    }

    #[test]
    fn selection_is_lexicographic() {
        let set = [outcome(2, 0.0, 3, 0), outcome(1, 5.0, 0, 1), outcome(2, 0.0, 3, 2)];
        assert_eq!(select(&set).unwrap().candidate.index, 1);
        let set = [outcome(0, 0.3, 3, 0), outcome(0, 0.0, 3, 1)];
        assert_eq!(select(&set).unwrap().candidate.index, 1);
        let set = [outcome(0, 0.2, 1, 0), outcome(0, 0.2, 3, 1)];
        assert_eq!(select(&set).unwrap().candidate.index, 1);
        let set = [outcome(0, 0.2, 3, 4), outcome(0, 0.2, 3, 1)];
        assert_eq!(select(&set).unwrap().candidate.index, 1);
    }
}
