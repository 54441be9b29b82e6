use super::expr::{Bindings, EvalError, SymExpr};

/// Dense row-major matrix of expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    rows: usize,
    cols: usize,
    data: Vec<SymExpr>,
}

impl SymMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SymMatrix { rows, cols, data: vec![SymExpr::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<SymExpr>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        SymMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_numeric(rows: &[[f64; 3]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| SymExpr::constant(v)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &SymExpr {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, e: SymExpr) {
        self.data[r * self.cols + c] = e;
    }

    pub fn row(&self, r: usize) -> &[SymExpr] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[SymExpr] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&SymExpr) -> SymExpr) -> SymMatrix {
        SymMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn simplify(&self) -> SymMatrix {
        self.map(SymExpr::simplify)
    }

    pub fn substitute(&self, name: &str, with: &SymExpr) -> SymMatrix {
        self.map(|e| e.substitute(name, with))
    }

    /// Entrywise difference; shapes must agree.
    pub fn minus(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        SymMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.minus(b)).collect(),
        }
    }

    /// `weights (1×rows) · self`, producing one row.
    pub fn weighted_row(&self, weights: &[f64]) -> Vec<SymExpr> {
        assert_eq!(weights.len(), self.rows);
        (0..self.cols)
            .map(|c| {
                let terms: Vec<SymExpr> = weights
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w != 0.0)
                    .map(|(r, w)| self.get(r, c).scale(*w))
                    .collect();
                SymExpr::sum(&terms)
            })
            .collect()
    }

    pub fn eval<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<Vec<f64>, EvalError> {
        self.data.iter().map(|e| e.eval(bindings)).collect()
    }

    /// Infinity norm (max absolute entry) at an assignment.
    pub fn max_abs<B: Bindings + ?Sized>(&self, bindings: &B) -> Result<f64, EvalError> {
        let mut m: f64 = 0.0;
        for e in &self.data {
            let v = e.eval(bindings)?;
            if !v.is_finite() {
                return Ok(f64::INFINITY);
            }
            m = m.max(v.abs());
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_matches_entries() {
        let x = SymExpr::param("x");
        let m = SymMatrix::from_rows(vec![vec![x.clone(), x.scale(2.0)], vec![SymExpr::one(), -x.clone()]]);
        assert_eq!(m.eval(&[("x", 0.5)]).unwrap(), vec![0.5, 1.0, 1.0, -0.5]);
        let d = m.minus(&m);
        assert_eq!((d.rows(), d.cols()), (2, 2));
        assert_eq!(d.simplify().max_abs(&[("x", 3.0)]).unwrap(), 0.0);
    }
}
