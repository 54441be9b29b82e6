use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops;
use std::sync::Arc;

use thiserror::Error;

/// Denominators closer to zero than this are reported as a division by zero.
pub const DIV_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Parameter values used when evaluating an expression.
pub trait Bindings {
    fn value(&self, name: &str) -> Option<f64>;
}

impl Bindings for HashMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for BTreeMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Bindings for [(&str, f64)] {
    fn value(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Bindings for [(&str, f64); N] {
    fn value(&self, name: &str) -> Option<f64> {
        self.as_slice().value(name)
    }
}

/// Parameter assignment used throughout the crate.
pub type Assignment = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Param(Arc<str>),
    Add(SymExpr, SymExpr),
    Sub(SymExpr, SymExpr),
    Mul(SymExpr, SymExpr),
    Div(SymExpr, SymExpr),
    Neg(SymExpr),
    Sin(SymExpr),
    Cos(SymExpr),
    Atan2(SymExpr, SymExpr),
}

/// Immutable, cheaply clonable expression tree over named scalar parameters.
#[derive(Clone, PartialEq)]
pub struct SymExpr(Arc<Node>);

impl SymExpr {
    pub fn new(node: Node) -> Self {
        SymExpr(Arc::new(node))
    }

    pub fn constant(value: f64) -> Self {
        Self::new(Node::Const(value))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn param(name: &str) -> Self {
        Self::new(Node::Param(Arc::from(name)))
    }

    pub fn sin(self) -> Self {
        Self::new(Node::Sin(self))
    }

    pub fn cos(self) -> Self {
        Self::new(Node::Cos(self))
    }

    pub fn atan2(y: SymExpr, x: SymExpr) -> Self {
        Self::new(Node::Atan2(y, x))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    pub fn eval<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<f64, EvalError> {
        Ok(match self.node() {
            Node::Const(c) => *c,
            Node::Param(name) => bindings
                .value(name)
                .ok_or_else(|| EvalError::UnboundParameter(name.to_string()))?,
            Node::Add(a, b) => a.eval(bindings)? + b.eval(bindings)?,
            Node::Sub(a, b) => a.eval(bindings)? - b.eval(bindings)?,
            Node::Mul(a, b) => a.eval(bindings)? * b.eval(bindings)?,
            Node::Div(a, b) => {
                let den = b.eval(bindings)?;
                if den.abs() < DIV_EPS {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(bindings)? / den
            }
            Node::Neg(a) => -a.eval(bindings)?,
            Node::Sin(a) => a.eval(bindings)?.sin(),
            Node::Cos(a) => a.eval(bindings)?.cos(),
            Node::Atan2(y, x) => y.eval(bindings)?.atan2(x.eval(bindings)?),
        })
    }

    /// Names of all parameters referenced by the expression.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Param(name) => {
                out.insert(name.to_string());
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Atan2(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Node::Neg(a) | Node::Sin(a) | Node::Cos(a) => a.collect_params(out),
        }
    }

    pub fn contains_param(&self, name: &str) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Param(p) => &**p == name,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Atan2(a, b) => {
                a.contains_param(name) || b.contains_param(name)
            }
            Node::Neg(a) | Node::Sin(a) | Node::Cos(a) => a.contains_param(name),
        }
    }

    /// Replace every occurrence of parameter `name` by `with`.
    pub fn substitute(&self, name: &str, with: &SymExpr) -> SymExpr {
        if !self.contains_param(name) {
            return self.clone();
        }
        let s = |e: &SymExpr| e.substitute(name, with);
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Param(p) => {
                if &**p == name {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Node::Add(a, b) => Self::new(Node::Add(s(a), s(b))),
            Node::Sub(a, b) => Self::new(Node::Sub(s(a), s(b))),
            Node::Mul(a, b) => Self::new(Node::Mul(s(a), s(b))),
            Node::Div(a, b) => Self::new(Node::Div(s(a), s(b))),
            Node::Neg(a) => Self::new(Node::Neg(s(a))),
            Node::Sin(a) => Self::new(Node::Sin(s(a))),
            Node::Cos(a) => Self::new(Node::Cos(s(a))),
            Node::Atan2(y, x) => Self::new(Node::Atan2(s(y), s(x))),
        }
    }

    /// Rename parameters according to `map`; unmapped names are kept.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> SymExpr {
        let mut out = self.clone();
        // two-phase so that swaps (x->y, y->x) do not collide
        let tmp: Vec<(String, String, String)> = map
            .iter()
            .enumerate()
            .map(|(i, (from, to))| (from.clone(), format!("\u{1}{i}"), to.clone()))
            .collect();
        for (from, mid, _) in &tmp {
            out = out.substitute(from, &SymExpr::param(mid));
        }
        for (_, mid, to) in &tmp {
            out = out.substitute(mid, &SymExpr::param(to));
        }
        out
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Param(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Atan2(a, b) => {
                1 + a.size() + b.size()
            }
            Node::Neg(a) | Node::Sin(a) | Node::Cos(a) => 1 + a.size(),
        }
    }
}

impl fmt::Debug for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymExpr({self})")
    }
}

impl From<f64> for SymExpr {
    fn from(v: f64) -> Self {
        SymExpr::constant(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait<SymExpr> for SymExpr {
            type Output = SymExpr;
            fn $method(self, rhs: SymExpr) -> SymExpr {
                SymExpr::new(Node::$variant(self, rhs))
            }
        }
        impl ops::$trait<&SymExpr> for &SymExpr {
            type Output = SymExpr;
            fn $method(self, rhs: &SymExpr) -> SymExpr {
                SymExpr::new(Node::$variant(self.clone(), rhs.clone()))
            }
        }
        impl ops::$trait<f64> for SymExpr {
            type Output = SymExpr;
            fn $method(self, rhs: f64) -> SymExpr {
                SymExpr::new(Node::$variant(self, SymExpr::constant(rhs)))
            }
        }
        impl ops::$trait<SymExpr> for f64 {
            type Output = SymExpr;
            fn $method(self, rhs: SymExpr) -> SymExpr {
                SymExpr::new(Node::$variant(SymExpr::constant(self), rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        SymExpr::new(Node::Neg(self))
    }
}

impl ops::Neg for &SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        SymExpr::new(Node::Neg(self.clone()))
    }
}

impl SymExpr {
    /// `self + rhs` with constant folding and zero elimination.
    pub fn plus(&self, rhs: &SymExpr) -> SymExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => SymExpr::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => self + rhs,
        }
    }

    /// `self - rhs` with constant folding and zero elimination.
    pub fn minus(&self, rhs: &SymExpr) -> SymExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => SymExpr::constant(a - b),
            (_, Some(b)) if b == 0.0 => self.clone(),
            (Some(a), _) if a == 0.0 => -rhs,
            _ => self - rhs,
        }
    }

    /// `self * rhs` with constant folding and 0/1 elimination.
    pub fn times(&self, rhs: &SymExpr) -> SymExpr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => SymExpr::constant(a * b),
            (Some(a), _) if a == 0.0 => SymExpr::zero(),
            (_, Some(b)) if b == 0.0 => SymExpr::zero(),
            (Some(a), _) if a == 1.0 => rhs.clone(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            _ => self * rhs,
        }
    }

    pub fn scale(&self, k: f64) -> SymExpr {
        SymExpr::constant(k).times(self)
    }

    /// Folding sum of many terms.
    pub fn sum<'a>(terms: impl IntoIterator<Item = &'a SymExpr>) -> SymExpr {
        terms.into_iter().fold(SymExpr::zero(), |acc, t| acc.plus(t))
    }
}
