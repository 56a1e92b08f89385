//! Symbolic scalar functions on a chart.
//!
//! [`Expr`] is the syntax tree produced by the parser. [`Scalar`] is the
//! working representation: a rational function over exact rationals whose
//! indeterminates are coordinates, parameters and elementary-function
//! applications. Geometric code computes with `Scalar`; `Expr` is for input
//! and display.

mod chart;
mod eval;
mod parse;
mod poly;
mod print;
mod scalar;
mod zero;

use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

pub use chart::{Chart, Interval, ParamSpec, Point};
pub use eval::EvalError;
pub use parse::{parse, ParseError};
pub use scalar::Scalar;
pub use zero::{all_zero, classify_sign, is_zero, snap, SignProfile, ZeroVerdict};


/// Interned-by-value name of a coordinate or parameter.
pub type Symbol = Arc<str>;

/// Elementary functions admitted in expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Ln, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression syntax tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Num(BigRational),
    Var(Symbol),
    Param(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// Integer power; the exponent is never zero.
    Pow(Box<Expr>, i32),
    Quotient(Box<Expr>, Box<Expr>),
    Apply(Func, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(n.into()))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Symbol::from(name))
    }

    /// Canonical form (see [`Scalar`]) rendered back as a tree.
    pub fn canonicalize(&self) -> Result<Expr, ExprError> {
        Ok(Scalar::from_expr(self)?.to_expr())
    }

    /// Partial derivative with respect to a coordinate, simplified.
    pub fn differentiate(&self, var: &str) -> Result<Expr, ExprError> {
        Ok(Scalar::from_expr(self)?.diff(var).to_expr())
    }

    /// Whether the tree mentions only numbers, coordinates and parameters.
    pub fn is_rational(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => true,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().all(Expr::is_rational),
            Expr::Pow(b, _) => b.is_rational(),
            Expr::Quotient(a, b) => a.is_rational() && b.is_rational(),
            Expr::Apply(..) => false,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => 0,
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().map(Expr::size).sum(),
            Expr::Pow(b, _) | Expr::Apply(_, b) => b.size(),
            Expr::Quotient(a, b) => a.size() + b.size(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("division by an identically zero expression")]
    DivisionByZero,
    #[error("zero raised to a negative power")]
    ZeroToNegativePower,
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("zero test failed: no admissible sample among {attempts} attempts (expression singular on the box)")]
    SingularOnBox { attempts: usize },
}
