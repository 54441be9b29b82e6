//! Edit operations and programs.

use std::collections::BTreeSet;

use crate::geometry::{rotation_matrix, Vec3};
use crate::shape::Feature;
use crate::symbolic::SymExpr;

/// What an operation acts on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Part(String),
    Feature(String, Feature),
    Relation(String),
}

impl Operand {
    /// Part id for part and feature operands.
    pub fn part(&self) -> Option<&str> {
        match self {
            Operand::Part(p) | Operand::Feature(p, _) => Some(p),
            Operand::Relation(_) => None,
        }
    }

    /// Corners moved by an edit on this operand.
    pub fn corners(&self) -> Vec<usize> {
        match self {
            Operand::Feature(_, f) => f.corners(),
            _ => (0..8).collect(),
        }
    }
}

/// Operation kind with its static parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum EditKind {
    Translate { dir: Vec3 },
    Scale { origin: Vec3, axis: Vec3 },
    Rotate { origin: Vec3, axis: Vec3 },
    Shear { origin: Vec3, normal: Vec3, dir: Vec3 },
    SymGroupCount,
    SymGroupSpacing,
}

/// Abstract family used by type hints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KindFamily {
    Translate,
    Rotate,
    Scale,
}

impl KindFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KindFamily::Translate => "translate",
            KindFamily::Rotate => "rotate",
            KindFamily::Scale => "scale",
        }
    }

    pub fn parse(s: &str) -> Option<KindFamily> {
        match s {
            "translate" => Some(KindFamily::Translate),
            "rotate" => Some(KindFamily::Rotate),
            "scale" => Some(KindFamily::Scale),
            _ => None,
        }
    }
}

impl EditKind {
    pub fn name(&self) -> &'static str {
        match self {
            EditKind::Translate { .. } => "translate",
            EditKind::Scale { .. } => "scale",
            EditKind::Rotate { .. } => "rotate",
            EditKind::Shear { .. } => "shear",
            EditKind::SymGroupCount => "count",
            EditKind::SymGroupSpacing => "spacing",
        }
    }

    /// Ordinal used for deterministic tie-breaking.
    pub fn rank(&self) -> u8 {
        match self {
            EditKind::Translate { .. } => 0,
            EditKind::Scale { .. } => 1,
            EditKind::Rotate { .. } => 2,
            EditKind::Shear { .. } => 3,
            EditKind::SymGroupCount => 4,
            EditKind::SymGroupSpacing => 5,
        }
    }

    pub fn family(&self) -> Option<KindFamily> {
        match self {
            EditKind::Translate { .. } => Some(KindFamily::Translate),
            EditKind::Rotate { .. } => Some(KindFamily::Rotate),
            EditKind::Scale { .. } | EditKind::Shear { .. } => Some(KindFamily::Scale),
            _ => None,
        }
    }

    pub fn is_group(&self) -> bool {
        matches!(self, EditKind::SymGroupCount | EditKind::SymGroupSpacing)
    }

    /// Unit-length vectors of the kind, by name.
    pub fn directions(&self) -> Vec<(&'static str, Vec3)> {
        match self {
            EditKind::Translate { dir } => vec![("dir", *dir)],
            EditKind::Scale { axis, .. } | EditKind::Rotate { axis, .. } => vec![("axis", *axis)],
            EditKind::Shear { normal, dir, .. } => vec![("normal", *normal), ("dir", *dir)],
            _ => vec![],
        }
    }

    /// Apply the closed form to one point for a numeric amount.
    pub fn apply_point(&self, a: f64, p: &Vec3) -> Vec3 {
        match self {
            EditKind::Translate { dir } => p + dir * a,
            EditKind::Scale { origin, axis } => p + axis * (a * (p - origin).dot(axis)),
            EditKind::Rotate { origin, axis } => origin + rotation_matrix(axis, a) * (p - origin),
            EditKind::Shear { origin, normal, dir } => p + dir * (a * (p - origin).dot(normal)),
            EditKind::SymGroupCount | EditKind::SymGroupSpacing => *p,
        }
    }

    /// Apply the closed form to a symbolic point.
    pub fn apply_symbolic(&self, a: &SymExpr, p: &[SymExpr; 3]) -> [SymExpr; 3] {
        let rel = |o: &Vec3| -> [SymExpr; 3] { std::array::from_fn(|k| p[k].minus(&SymExpr::constant(o[k]))) };
        let dot = |v: &[SymExpr; 3], n: &Vec3| -> SymExpr {
            let terms: Vec<SymExpr> = (0..3).filter(|&k| n[k] != 0.0).map(|k| v[k].scale(n[k])).collect();
            SymExpr::sum(&terms)
        };
        match self {
            EditKind::Translate { dir } => std::array::from_fn(|k| p[k].plus(&a.scale(dir[k]))),
            EditKind::Scale { origin, axis } => {
                let s = a.times(&dot(&rel(origin), axis));
                std::array::from_fn(|k| p[k].plus(&s.scale(axis[k])))
            }
            EditKind::Shear { origin, normal, dir } => {
                let s = a.times(&dot(&rel(origin), normal));
                std::array::from_fn(|k| p[k].plus(&s.scale(dir[k])))
            }
            EditKind::Rotate { origin, axis } => {
                // o + cos·r + sin·(â × r) + (1 − cos)(â · r) â
                let r = rel(origin);
                let (c, s) = (a.clone().cos(), a.clone().sin());
                let ar = dot(&r, axis);
                let cross: [SymExpr; 3] = std::array::from_fn(|k| {
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    r[j].scale(axis[i]).minus(&r[i].scale(axis[j]))
                });
                let one_minus_c = SymExpr::one().minus(&c);
                std::array::from_fn(|k| {
                    let terms = [
                        SymExpr::constant(origin[k]),
                        c.times(&r[k]),
                        s.times(&cross[k]),
                        one_minus_c.times(&ar).scale(axis[k]),
                    ];
                    SymExpr::sum(&terms)
                })
            }
            EditKind::SymGroupCount | EditKind::SymGroupSpacing => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditOp {
    pub operand: Operand,
    pub kind: EditKind,
    pub amount: SymExpr,
}

impl EditOp {
    pub fn new(operand: Operand, kind: EditKind, amount: SymExpr) -> EditOp {
        EditOp { operand, kind, amount }
    }

    /// The same op with a different amount.
    pub fn with_amount(&self, amount: SymExpr) -> EditOp {
        EditOp { amount, ..self.clone() }
    }
}

/// Declared control parameter with its range `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EditProgram {
    pub params: Vec<ParamDecl>,
    pub ops: Vec<EditOp>,
}

impl EditProgram {
    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn param_names(&self) -> BTreeSet<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    /// Range lookup usable by samplers; undeclared names map to `[0, 0]`.
    pub fn range_of(&self, name: &str) -> (f64, f64) {
        self.param(name).map_or((0.0, 0.0), |p| (p.lo, p.hi))
    }

    /// Ops acting on `part` (directly or via one of its features), in order.
    pub fn ops_on<'a>(&'a self, part: &'a str) -> impl Iterator<Item = &'a EditOp> + 'a {
        self.ops.iter().filter(move |o| o.operand.part() == Some(part))
    }

    pub fn edited_parts(&self) -> BTreeSet<String> {
        self.ops.iter().filter_map(|o| o.operand.part().map(str::to_string)).collect()
    }

    /// Assignment with every declared parameter at `f(decl)`.
    pub fn assignment(&self, f: impl Fn(&ParamDecl) -> f64) -> crate::symbolic::Assignment {
        self.params.iter().map(|p| (p.name.clone(), f(p))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_and_numeric_closed_forms_agree() {
        let kinds = [
            EditKind::Translate { dir: Vec3::new(0.6, 0.0, 0.8) },
            EditKind::Scale { origin: Vec3::new(0.1, 0.2, 0.3), axis: Vec3::new(0.0, 0.6, 0.8) },
            EditKind::Rotate { origin: Vec3::new(-0.5, 0.0, 1.0), axis: Vec3::new(1.0, 2.0, 2.0) / 3.0 },
            EditKind::Shear { origin: Vec3::zeros(), normal: Vec3::y(), dir: Vec3::x() },
        ];
        let p = Vec3::new(0.3, -0.7, 1.1);
        let sp: [SymExpr; 3] = std::array::from_fn(|k| SymExpr::constant(p[k]));
        let a = SymExpr::param("x").scale(0.5);
        for kind in kinds {
            let sym = kind.apply_symbolic(&a, &sp);
            for x in [0.0, 0.37, 1.2] {
                let num = kind.apply_point(0.5 * x, &p);
                for k in 0..3 {
                    assert!((sym[k].eval(&[("x", x)]).unwrap() - num[k]).abs() < 1e-12, "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn scale_doubles_extent_at_one() {
        let k = EditKind::Scale { origin: Vec3::new(0.5, 0.5, 0.5), axis: Vec3::x() };
        assert_eq!(k.apply_point(1.0, &Vec3::new(1.0, 1.0, 0.0)), Vec3::new(1.5, 1.0, 0.0));
        assert_eq!(k.apply_point(1.0, &Vec3::new(0.0, 0.0, 1.0)), Vec3::new(-0.5, 0.0, 1.0));
    }
}
