//! Equivalence-method reductions: structure functions of admissible
//! coframes, normalization of torsion by explicit group parameters, case
//! classification and extraction of the invariant functions.

mod corank1;
mod dim2;
mod dim3;
mod structure;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{classify_sign, Chart, ExprError, Point, Scalar, SignProfile};
use crate::flags::{AffineDistribution, FlagError};
use crate::forms::FormError;
use crate::sample::{sample_with, SampleConfig};

pub use corank1::adapt_corank1;
pub use dim2::adapt_dim2_rank1;
pub use dim3::{adapt_dim3_rank1, elkin_case};
pub use structure::StructureFunctions;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoframeError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Flag(#[from] FlagError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("unsupported system with n = {n}, s = {s}; supported: s = 1 with n = 2 or n = 3, and s = n - 1")]
    Unsupported { n: usize, s: usize },
    #[error("{routine} needs n = {n} and s = {s}")]
    Shape { routine: &'static str, n: usize, s: usize },
    #[error("the drift lies in the span of the generators at {witness}")]
    NotStrictlyAffine { witness: Point },
    #[error("neither bracket-generating nor almost bracket-generating (final rank {rank})")]
    Neither { rank: usize },
    #[error("{name} vanishes identically, so it cannot be normalized")]
    Vanishing { name: String },
    #[error("{name} is not of constant type: {first_value:e} at {first} but {second_value:e} at {second}")]
    NonConstantType { name: String, first: Point, first_value: f64, second: Point, second_value: f64 },
    #[error("expected {expected} Pfaff coordinate functions, got {got}")]
    PfaffCount { expected: usize, got: usize },
    #[error("the Pfaff coordinates do not put the 1-form in normal form: residual {residual:e} at {witness}")]
    PfaffMismatch { witness: Point, residual: f64 },
}

/// Maps a singular initial frame to the strictness diagnosis.
pub(crate) fn strictness(e: FormError) -> CoframeError {
    match e {
        FormError::SingularFrame { witness, .. } => CoframeError::NotStrictlyAffine { witness },
        e => e.into(),
    }
}

/// Sign of `s` on the box; fails when `s` vanishes identically or changes
/// sign class between samples.
pub(crate) fn require_nonvanishing(name: &str, s: &Scalar, chart: &Chart, cfg: &SampleConfig) -> Result<i32, CoframeError> {
    match classify_sign(s, chart, cfg)? {
        SignProfile::Zero => Err(CoframeError::Vanishing { name: name.to_string() }),
        SignProfile::Positive => Ok(1),
        SignProfile::Negative => Ok(-1),
        SignProfile::Mixed { first, first_value, second, second_value } => {
            Err(CoframeError::NonConstantType { name: name.to_string(), first, first_value, second, second_value })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// Rank 1 on a surface.
    Dim2Rank1,
    /// Rank 1 on a 3-manifold.
    Dim3Rank1,
    /// Rank `n − 1`.
    CorankOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CaseLabel {
    pub theorem: Theorem,
    pub case: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pfaff_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_power_vanishes: Option<bool>,
}

impl CaseLabel {
    pub(crate) fn new(theorem: Theorem, case: u8) -> Self {
        Self { theorem, case, epsilon: None, pfaff_k: None, top_power_vanishes: None }
    }

    /// Whether the adapted coframe is unique, so every torsion is an invariant
    /// function (up to the sign cover in the 3D case 3).
    pub fn is_e_structure(&self) -> bool {
        matches!((self.theorem, self.case), (Theorem::Dim2Rank1, 2) | (Theorem::Dim3Rank1, 2) | (Theorem::Dim3Rank1, 3))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Invariant {
    pub name: String,
    pub expr: Scalar,
}

/// Result of a reduction: the case, the named invariants, their values at
/// sampled points, and the structure functions of the adapted coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub label: CaseLabel,
    pub invariants: Vec<Invariant>,
    pub structure: StructureFunctions,
    pub points: Vec<Point>,
    /// `values[p][i]` is invariant `i` at `points[p]`.
    pub values: Vec<Vec<f64>>,
    pub notes: Vec<String>,
}

impl InvariantReport {
    pub(crate) fn build(
        label: CaseLabel,
        invariants: Vec<Invariant>,
        structure: StructureFunctions,
        notes: Vec<String>,
        cfg: &SampleConfig,
    ) -> Result<Self, CoframeError> {
        let chart = structure.frame().chart().clone();
        let (points, values) = if invariants.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            let refs: Vec<&Scalar> = invariants.iter().map(|i| &i.expr).collect();
            let samples = sample_with(&chart, cfg, cfg.samples.max(1), |p| Scalar::eval_many(&refs, &chart, p))
                .map_err(ExprError::from)?;
            samples.into_iter().map(|s| (s.point, s.value)).unzip()
        };
        Ok(Self { label, invariants, structure, points, values, notes })
    }

    pub fn invariant(&self, name: &str) -> Option<&Scalar> {
        self.invariants.iter().find(|i| i.name == name).map(|i| &i.expr)
    }

    /// Sampled values of one invariant, in point order.
    pub fn sampled(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.invariants.iter().position(|inv| inv.name == name)?;
        Some(self.values.iter().map(|row| row[i]).collect())
    }

    pub fn chart(&self) -> &Chart {
        self.structure.frame().chart()
    }
}

/// Runs the reduction that applies to the shape `(n, s)` of `f`.
/// `pfaff` optionally gives Pfaff coordinates for the corank-one case.
pub fn adapt(f: &AffineDistribution, pfaff: Option<&[Scalar]>, cfg: &SampleConfig) -> Result<InvariantReport, CoframeError> {
    let (n, s) = (f.chart().dim(), f.rank());
    match (n, s) {
        (2, 1) => adapt_dim2_rank1(f, cfg),
        (3, 1) => adapt_dim3_rank1(f, cfg),
        (n, s) if n >= 3 && s + 1 == n => adapt_corank1(f, pfaff, cfg),
        _ => Err(CoframeError::Unsupported { n, s }),
    }
}

/// Name of a torsion entry in 1-based notation, e.g. `T2_13`.
pub(crate) fn torsion_name(k: usize, i: usize, j: usize) -> String {
    format!("T{}_{}{}", k + 1, i + 1, j + 1)
}
