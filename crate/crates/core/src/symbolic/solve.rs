//! Single-unknown solving: affine isolation and rotation-angle recovery.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::expr::{Assignment, SymExpr};
use super::simplify::{Canon, Poly};

/// Number of random assignments used by probabilistic identity tests.
pub const IDENTITY_SAMPLES: usize = 32;
const IDENTITY_SEED: u64 = 0x5eed_1d;
const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("residual is not affine in `{0}`")]
    NotAffine(String),
    #[error("rotated point lies on the rotation axis")]
    DegenerateRadius,
}

/// `coeff * u + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub coeff: SymExpr,
    pub offset: SymExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearSolution {
    Unique(SymExpr),
    NoSolution,
    AnySolution,
}

impl LinearForm {
    /// Write `residual` as `coeff * unknown + offset`.
    ///
    /// Only the numerator of the canonical rational form is inspected, so the
    /// returned form is proportional to the residual wherever the residual's
    /// denominator is non-zero; roots are preserved.
    pub fn extract(residual: &SymExpr, unknown: &str) -> Result<LinearForm, SolveError> {
        let (coeff, offset, den) = split(residual, unknown)?;
        let mut canon = Canon::default();
        let _ = canon.rational(residual);
        let den_expr = canon.poly_expr(&den);
        let coeff = (canon.poly_expr(&coeff) / den_expr.clone()).simplify();
        let offset = (canon.poly_expr(&offset) / den_expr).simplify();
        Ok(LinearForm { coeff, offset })
    }

    pub fn rebuild(&self, unknown: &str) -> SymExpr {
        (self.coeff.clone() * SymExpr::param(unknown) + self.offset.clone()).simplify()
    }
}

fn split(residual: &SymExpr, unknown: &str) -> Result<(Poly, Poly, Poly), SolveError> {
    let mut canon = Canon::default();
    let r = canon.rational(residual);
    let not_affine = || SolveError::NotAffine(unknown.to_string());
    // the unknown may only appear as a bare atom in the numerator
    for (key, atom) in &canon.atoms {
        if key != unknown && atom.contains_param(unknown) && appears(&r.num, key) {
            return Err(not_affine());
        }
        if atom.contains_param(unknown) && appears(&r.den, key) {
            return Err(not_affine());
        }
    }
    if r.num.degree_in(unknown) > 1 {
        return Err(not_affine());
    }
    let (coeff, offset) = r.num.split_linear(unknown);
    Ok((coeff, offset, r.den))
}

fn appears(p: &Poly, key: &str) -> bool {
    p.terms.keys().any(|m| m.iter().any(|(k, _)| k == key))
}

/// Solve `residual(unknown) = 0` for an affine residual.
pub fn solve_linear(residual: &SymExpr, unknown: &str) -> Result<LinearSolution, SolveError> {
    let (coeff, offset, _den) = split(residual, unknown)?;
    let mut canon = Canon::default();
    let _ = canon.rational(residual);
    let coeff_expr = canon.poly_expr(&coeff);
    let offset_expr = canon.poly_expr(&offset);
    let coeff_zero = coeff.is_zero() || is_identically_zero(&coeff_expr);
    let offset_zero = offset.is_zero() || is_identically_zero(&offset_expr);
    Ok(match (coeff_zero, offset_zero) {
        (true, true) => LinearSolution::AnySolution,
        (true, false) => LinearSolution::NoSolution,
        (false, _) => LinearSolution::Unique((-offset_expr / coeff_expr).simplify()),
    })
}

/// Angle (about the origin of the plane) taking `rest` onto `target`.
///
/// Both are 2D coordinates in the rotation plane. The result is exact
/// whenever `|target| == |rest|`; otherwise it is the angle of the closest
/// reachable point.
pub fn solve_rotation_angle(rest: [f64; 2], target: [&SymExpr; 2]) -> Result<SymExpr, SolveError> {
    if rest[0].hypot(rest[1]) < 1e-9 {
        return Err(SolveError::DegenerateRadius);
    }
    let [r0, r1] = rest;
    let [t0, t1] = target;
    let cross = t1.scale(r0).minus(&t0.scale(r1));
    let dot = t0.scale(r0).plus(&t1.scale(r1));
    Ok(SymExpr::atan2(cross, dot).simplify())
}

/// Random assignments over the parameters of `exprs`, each drawn from
/// `[-1, 1]` unless a range is given.
pub fn random_assignments(
    params: &BTreeSet<String>,
    ranges: &dyn Fn(&str) -> (f64, f64),
    n: usize,
    seed: u64,
) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            params
                .iter()
                .map(|p| {
                    let (lo, hi) = ranges(p);
                    (p.clone(), if hi > lo { rng.random_range(lo..hi) } else { lo })
                })
                .collect()
        })
        .collect()
}

fn default_range(_: &str) -> (f64, f64) {
    (-1.0, 1.0)
}

/// Probabilistic zero test over 32 random assignments.
pub fn is_identically_zero(e: &SymExpr) -> bool {
    let s = e.simplify();
    if s.is_const(0.0) {
        return true;
    }
    if s.as_const().is_some() {
        return false;
    }
    let samples = random_assignments(&s.params(), &default_range, IDENTITY_SAMPLES, IDENTITY_SEED);
    let mut evaluated = 0;
    for a in &samples {
        match s.eval(a) {
            Ok(v) if v.abs() > IDENTITY_TOL => return false,
            Ok(_) => evaluated += 1,
            Err(_) => {}
        }
    }
    evaluated > 0
}

/// Structural equality after simplification, backed by a 32-sample
/// randomized evaluation.
pub fn probably_equal(a: &SymExpr, b: &SymExpr) -> bool {
    let (sa, sb) = (a.simplify(), b.simplify());
    if sa == sb {
        return true;
    }
    let mut params = sa.params();
    params.extend(sb.params());
    let samples = random_assignments(&params, &default_range, IDENTITY_SAMPLES, IDENTITY_SEED);
    let mut evaluated = 0;
    for s in &samples {
        match (sa.eval(s), sb.eval(s)) {
            (Ok(x), Ok(y)) => {
                if (x - y).abs() > IDENTITY_TOL * (1.0 + x.abs().max(y.abs())) {
                    return false;
                }
                evaluated += 1;
            }
            (Err(_), Err(_)) => {}
            _ => return false,
        }
    }
    evaluated > 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_expr;

    fn p(s: &str) -> SymExpr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn isolates_unknown() {
        let sol = solve_linear(&p("u - 0.8 * x"), "u").unwrap();
        assert_eq!(sol, LinearSolution::Unique(p("0.8 * x")));
        let sol = solve_linear(&p("2 * u + x"), "u").unwrap();
        assert_eq!(sol, LinearSolution::Unique(p("-0.5 * x")));
    }

    #[test]
    fn degenerate_linear_cases() {
        assert_eq!(solve_linear(&p("0 * u + x"), "u").unwrap(), LinearSolution::NoSolution);
        assert_eq!(solve_linear(&p("u * x - x * u"), "u").unwrap(), LinearSolution::AnySolution);
        assert!(matches!(solve_linear(&p("u * u - x"), "u"), Err(SolveError::NotAffine(_))));
        assert!(matches!(solve_linear(&p("sin(u) - x"), "u"), Err(SolveError::NotAffine(_))));
        assert!(matches!(solve_linear(&p("x / u - 1"), "u"), Err(SolveError::NotAffine(_))));
    }

    #[test]
    fn coefficients_may_depend_on_parameters() {
        let sol = solve_linear(&p("(1 + x) * u - cos(x)"), "u").unwrap();
        let LinearSolution::Unique(f) = sol else { panic!("expected unique") };
        for x in [0.0, 0.3, 0.9] {
            let v = f.eval(&[("x", x)]).unwrap();
            assert!((v - x.cos() / (1.0 + x)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_form_round_trips() {
        let r = p("(2 + y) * u - 3 * x + sin(y)");
        let lf = LinearForm::extract(&r, "u").unwrap();
        assert!(probably_equal(&lf.rebuild("u"), &r));
    }

    #[test]
    fn rotation_angle_trivial_cases() {
        let zero = SymExpr::zero();
        let one = SymExpr::one();
        let a = solve_rotation_angle([1.0, 0.0], [&one, &zero]).unwrap();
        assert_eq!(a.eval(&[("x", 0.0)]).unwrap(), 0.0);
        let a = solve_rotation_angle([1.0, 0.0], [&zero, &one]).unwrap();
        assert!((a.eval(&[("x", 0.0)]).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(solve_rotation_angle([0.0, 1e-12], [&one, &zero]), Err(SolveError::DegenerateRadius));
    }

    #[test]
    fn identity_testing() {
        assert!(probably_equal(&p("(x + 1) * (x - 1)"), &p("x * x - 1")));
        assert!(!probably_equal(&p("x"), &p("x + 0.001")));
        assert!(is_identically_zero(&p("sin(x) - sin(x + 0)")));
    }
}
