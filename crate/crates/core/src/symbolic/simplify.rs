//! Canonicalization into a rational normal form.
//!
//! Every expression is brought to `num / den` where both sides are
//! polynomials over *atoms*: parameters and opaque function applications
//! (`sin`, `cos`, `atan2`) whose arguments are themselves canonical.
//! Polynomials are coefficient maps keyed by monomial; monomials are sorted
//! lists of `(atom key, exponent)` where the key is the atom's printed form,
//! which gives a deterministic term order for printing.

use std::collections::{BTreeMap, HashMap};

use super::expr::{Node, SymExpr};

pub(crate) type Mono = Vec<(String, u32)>;

#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct Poly {
    pub terms: BTreeMap<Mono, f64>,
}

/// Snap a coefficient to 12 decimals when that moves it by at most a few ulps,
/// so that sums like `0.1 + 0.7` print as `0.8`.
pub(crate) fn clean(c: f64) -> f64 {
    if c == 0.0 || !c.is_finite() {
        return if c == 0.0 { 0.0 } else { c };
    }
    let r = (c * 1e12).round() / 1e12;
    if (r - c).abs() <= 1e-15 * c.abs().max(1.0) {
        if r == 0.0 {
            0.0
        } else {
            r
        }
    } else {
        c
    }
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (k, e) in b {
        *out.entry(k.clone()).or_insert(0) += e;
    }
    out.into_iter().collect()
}

impl Poly {
    pub fn constant(c: f64) -> Poly {
        let mut p = Poly::default();
        let c = clean(c);
        if c != 0.0 {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn atom(key: String) -> Poly {
        let mut p = Poly::default();
        p.terms.insert(vec![(key, 1)], 1.0);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Mono, c: f64) {
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += c;
    }

    fn normalize(mut self) -> Poly {
        self.terms = self
            .terms
            .into_iter()
            .map(|(m, c)| (m, clean(c)))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        self
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out.normalize()
    }

    pub fn scale(&self, k: f64) -> Poly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= k;
        }
        out.normalize()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out.normalize()
    }

    /// Monomial dividing every term (minimum exponent per atom).
    fn monomial_gcd(&self) -> Option<BTreeMap<String, u32>> {
        let mut iter = self.terms.keys();
        let first = iter.next()?;
        let mut g: BTreeMap<String, u32> = first.iter().cloned().collect();
        for m in iter {
            let mm: BTreeMap<&str, u32> = m.iter().map(|(k, e)| (k.as_str(), *e)).collect();
            g = g
                .into_iter()
                .filter_map(|(k, e)| mm.get(k.as_str()).map(|&e2| (k, e.min(e2))))
                .collect();
        }
        Some(g)
    }

    fn divide_monomial(&self, g: &BTreeMap<String, u32>) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            let nm: Mono = m
                .iter()
                .filter_map(|(k, e)| {
                    let d = g.get(k).copied().unwrap_or(0);
                    (e > &d).then(|| (k.clone(), e - d))
                })
                .collect();
            out.terms.insert(nm, *c);
        }
        out
    }

    /// Degree of `key` across all monomials.
    pub fn degree_in(&self, key: &str) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.iter().filter(|(k, _)| k == key).map(|(_, e)| *e))
            .max()
            .unwrap_or(0)
    }

    /// Split into (coefficient of key^1, key^0 part). Caller checks degree.
    pub fn split_linear(&self, key: &str) -> (Poly, Poly) {
        let mut coeff = Poly::default();
        let mut rest = Poly::default();
        for (m, c) in &self.terms {
            if m.iter().any(|(k, _)| k == key) {
                let nm: Mono = m.iter().filter(|(k, _)| k != key).cloned().collect();
                coeff.add_term(nm, *c);
            } else {
                rest.add_term(m.clone(), *c);
            }
        }
        (coeff.normalize(), rest.normalize())
    }
}

/// `num / den` with both sides polynomial.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Rational {
    pub num: Poly,
    pub den: Poly,
}

impl Rational {
    fn constant(c: f64) -> Rational {
        Rational { num: Poly::constant(c), den: Poly::constant(1.0) }
    }

    fn atom(key: String) -> Rational {
        Rational { num: Poly::atom(key), den: Poly::constant(1.0) }
    }

    pub fn as_constant(&self) -> Option<f64> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(clean(n / d))
    }

    fn normalize(self) -> Rational {
        let Rational { mut num, mut den } = self;
        if num.is_zero() {
            return Rational::constant(0.0);
        }
        if let (Some(a), Some(b)) = (num.monomial_gcd(), den.monomial_gcd()) {
            let g: BTreeMap<String, u32> = a
                .into_iter()
                .filter_map(|(k, e)| b.get(&k).map(|&e2| (k, e.min(e2))))
                .collect();
            if !g.is_empty() {
                num = num.divide_monomial(&g);
                den = den.divide_monomial(&g);
            }
        }
        let lead = den.terms.values().next().copied().unwrap_or(1.0);
        if lead != 1.0 {
            num = num.scale(1.0 / lead);
            den = den.scale(1.0 / lead);
        }
        // num = k * den
        if num.terms.len() == den.terms.len() && !den.terms.is_empty() {
            let mut ratio: Option<f64> = None;
            let proportional = num.terms.iter().zip(den.terms.iter()).all(|((mn, cn), (md, cd))| {
                if mn != md {
                    return false;
                }
                let r = cn / cd;
                match ratio {
                    None => {
                        ratio = Some(r);
                        true
                    }
                    Some(prev) => (prev - r).abs() <= 1e-14 * prev.abs().max(1.0),
                }
            });
            if proportional {
                return Rational::constant(ratio.unwrap_or(0.0));
            }
        }
        Rational { num, den }
    }

    fn add(&self, other: &Rational) -> Rational {
        if self.den == other.den {
            Rational { num: self.num.add(&other.num), den: self.den.clone() }.normalize()
        } else {
            Rational {
                num: self.num.mul(&other.den).add(&other.num.mul(&self.den)),
                den: self.den.mul(&other.den),
            }
            .normalize()
        }
    }

    fn neg(&self) -> Rational {
        Rational { num: self.num.scale(-1.0), den: self.den.clone() }
    }

    fn mul(&self, other: &Rational) -> Rational {
        Rational { num: self.num.mul(&other.num), den: self.den.mul(&other.den) }.normalize()
    }

    fn div(&self, other: &Rational) -> Option<Rational> {
        if other.num.is_zero() {
            return None;
        }
        Some(Rational { num: self.num.mul(&other.den), den: self.den.mul(&other.num) }.normalize())
    }
}

/// Canonicalizer. Keeps the table of atom keys to their (canonical) expressions.
#[derive(Default)]
pub(crate) struct Canon {
    pub atoms: HashMap<String, SymExpr>,
}

impl Canon {
    fn atom(&mut self, e: SymExpr) -> Rational {
        let key = e.to_string();
        self.atoms.entry(key.clone()).or_insert(e);
        Rational::atom(key)
    }

    pub fn rational(&mut self, e: &SymExpr) -> Rational {
        match e.node() {
            Node::Const(c) => Rational::constant(*c),
            Node::Param(_) => self.atom(e.clone()),
            Node::Add(a, b) => {
                let ra = self.rational(a);
                ra.add(&self.rational(b))
            }
            Node::Sub(a, b) => {
                let ra = self.rational(a);
                ra.add(&self.rational(b).neg())
            }
            Node::Mul(a, b) => {
                let ra = self.rational(a);
                ra.mul(&self.rational(b))
            }
            Node::Div(a, b) => {
                let ra = self.rational(a);
                let rb = self.rational(b);
                match ra.div(&rb) {
                    Some(r) => r,
                    // symbolic division by zero: keep it opaque
                    None => {
                        let opaque = SymExpr::new(Node::Div(self.rebuild(&ra), self.rebuild(&rb)));
                        self.atom(opaque)
                    }
                }
            }
            Node::Neg(a) => self.rational(a).neg(),
            Node::Sin(a) => {
                let inner = self.canonical(a);
                match inner.as_const() {
                    Some(c) => Rational::constant(c.sin()),
                    None => self.atom(inner.sin()),
                }
            }
            Node::Cos(a) => {
                let inner = self.canonical(a);
                match inner.as_const() {
                    Some(c) => Rational::constant(c.cos()),
                    None => self.atom(inner.cos()),
                }
            }
            Node::Atan2(y, x) => {
                let cy = self.canonical(y);
                let cx = self.canonical(x);
                match (cy.as_const(), cx.as_const()) {
                    (Some(a), Some(b)) => Rational::constant(a.atan2(b)),
                    _ => self.atom(SymExpr::atan2(cy, cx)),
                }
            }
        }
    }

    pub fn canonical(&mut self, e: &SymExpr) -> SymExpr {
        let r = self.rational(e);
        self.rebuild(&r)
    }

    fn mono_expr(&self, m: &Mono) -> SymExpr {
        let mut out: Option<SymExpr> = None;
        for (key, exp) in m {
            let atom = self.atoms.get(key).cloned().unwrap_or_else(|| SymExpr::param(key));
            for _ in 0..*exp {
                out = Some(match out {
                    None => atom.clone(),
                    Some(acc) => acc * atom.clone(),
                });
            }
        }
        out.unwrap_or_else(SymExpr::one)
    }

    fn term(&self, c: f64, m: &Mono) -> SymExpr {
        if m.is_empty() {
            return SymExpr::constant(c);
        }
        let me = self.mono_expr(m);
        if c == 1.0 {
            me
        } else {
            SymExpr::constant(c) * me
        }
    }

    pub fn poly_expr(&self, p: &Poly) -> SymExpr {
        let constant = p.terms.get(&Vec::new()).copied();
        let mut out: Option<SymExpr> = None;
        for (m, &c) in p.terms.iter().filter(|(m, _)| !m.is_empty()) {
            out = Some(match out {
                None if c == -1.0 => -self.mono_expr(m),
                None => self.term(c, m),
                Some(acc) if c < 0.0 => acc - self.term(-c, m),
                Some(acc) => acc + self.term(c, m),
            });
        }
        match (out, constant) {
            (None, None) => SymExpr::zero(),
            (None, Some(c)) => SymExpr::constant(c),
            (Some(acc), None) => acc,
            (Some(acc), Some(c)) if c < 0.0 => acc - SymExpr::constant(-c),
            (Some(acc), Some(c)) => acc + SymExpr::constant(c),
        }
    }

    pub fn rebuild(&self, r: &Rational) -> SymExpr {
        if let Some(c) = r.as_constant() {
            return SymExpr::constant(c);
        }
        let num = self.poly_expr(&r.num);
        if r.den.as_constant() == Some(1.0) {
            num
        } else {
            num / self.poly_expr(&r.den)
        }
    }
}

impl SymExpr {
    /// Constant folding, 0/1 identity elimination and like-term collection.
    /// Idempotent and value preserving.
    pub fn simplify(&self) -> SymExpr {
        Canon::default().canonical(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse_expr;

    fn s(src: &str) -> String {
        parse_expr(src).unwrap().simplify().to_string()
    }

    #[test]
    fn identities() {
        assert_eq!(s("x + 0"), "x");
        assert_eq!(s("2 * x + 3 * x"), "5 * x");
        assert_eq!(s("x * x - x * x"), "0");
        assert_eq!(s("1 * x * 1"), "x");
        assert_eq!(s("0 * sin(x)"), "0");
        assert_eq!(s("x / x"), "1");
        assert_eq!(s("2 * x * x / x"), "2 * x");
        assert_eq!(s("sin(0) + cos(0)"), "1");
        assert_eq!(s("0.1 + 0.7"), "0.8");
        assert_eq!(s("-(0.8 * x)"), "-0.8 * x");
        assert_eq!(s("-x"), "-x");
        assert_eq!(s("x - 1 - y"), "x - y - 1");
    }

    #[test]
    fn rational_forms() {
        assert_eq!(s("x / 2"), "0.5 * x");
        assert_eq!(s("1 / x + 1 / x"), "2 / x");
        assert_eq!(s("(2 * x + 2) / (x + 1)"), "2");
        let e = s("x / (y + 1)");
        assert_eq!(s(&e), e);
    }

    #[test]
    fn atoms_are_canonical() {
        assert_eq!(s("sin(x + x) - sin(2 * x)"), "0");
        assert_eq!(s("atan2(y + 0, x * 1)"), "atan2(y, x)");
    }

    #[test]
    fn clean_snaps_near_decimals() {
        assert_eq!(clean(0.7999999999999999), 0.8);
        assert_eq!(clean(1.0 / 3.0), 1.0 / 3.0);
        assert_eq!(clean(3e-17), 0.0);
        assert_eq!(clean(1e-13), 1e-13);
    }
}
