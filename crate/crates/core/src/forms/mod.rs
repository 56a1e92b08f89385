//! Exterior calculus on a chart: vector fields, differential forms, frames,
//! coframes and explicit coordinate maps.

mod field;
mod kform;
pub mod linalg;
mod map;

use thiserror::Error;

use crate::expr::{ExprError, Point};

pub use field::{lie_bracket, Coframe, Frame, VectorField};
pub use kform::KForm;
pub use map::DiffeoMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("objects live on different charts (`{0}` vs `{1}`)")]
    ChartMismatch(String, String),
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("degree {degree} exceeds the chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("a {degree}-form takes {degree} vector fields, got {got}")]
    Arity { degree: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    BadIndex { index: usize, dim: usize },
    #[error("singular frame: determinant {det:e} at {witness}")]
    SingularFrame { witness: Point, det: f64 },
    #[error("map inverse is inconsistent: residual {residual:e} at {witness}")]
    InverseMismatch { witness: Point, residual: f64 },
}
