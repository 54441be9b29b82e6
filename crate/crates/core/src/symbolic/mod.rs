//! Minimal computer algebra: expression trees over named control parameters,
//! canonical simplification, infix text form, and single-unknown solving.

mod expr;
mod matrix;
mod simplify;
mod solve;
mod text;

pub use expr::{Assignment, Bindings, EvalError, Node, SymExpr, DIV_EPS};
pub use matrix::SymMatrix;
pub use solve::{
    is_identically_zero, probably_equal, random_assignments, solve_linear, solve_rotation_angle, LinearForm,
    LinearSolution, SolveError, IDENTITY_SAMPLES,
};
pub use text::{format_number, parse_expr, ParseError};
