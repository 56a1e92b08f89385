//! Point-affine equivalence: verification along an explicit map, the 2D
//! flatness test, and comparison of sampled invariant signatures.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::coframe::{adapt, CaseLabel, CoframeError, InvariantReport, Theorem};
use crate::expr::{is_zero, Chart, EvalError, ExprError, Point, Scalar};
use crate::flags::AffineDistribution;
use crate::forms::{DiffeoMap, FormError};
use crate::sample::{sample_with, SampleConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Coframe(#[from] CoframeError),
    #[error("systems differ in shape: (n, s) = ({0}, {1}) vs ({2}, {3})")]
    Shape(usize, usize, usize, usize),
    #[error("the map goes {0} -> {1}, but the systems live on {2} and {3}")]
    MapCharts(String, String, String, String),
    #[error("map inconsistency: forward and inverse disagree by {residual:e} at {witness}")]
    MapInconsistency { witness: Point, residual: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    VerifiedAtSamples,
    RefutedWithWitness,
    Inconclusive,
}

/// Largest sampled residual of one equivalence condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResidual {
    pub condition: String,
    pub max_residual: f64,
    pub at: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub residuals: Vec<ConditionResidual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Point>,
    pub samples: usize,
    pub tolerance: f64,
}

fn hysteresis(residual: f64, tol: f64) -> Verdict {
    if residual <= tol {
        Verdict::VerifiedAtSamples
    } else if residual > 10.0 * tol {
        Verdict::RefutedWithWitness
    } else {
        Verdict::Inconclusive
    }
}

/// Checks that `ψ` carries `F_X` to `F_Y`: `ψ_*a₀ = b₀∘ψ` and every `ψ_*aᵢ`
/// lies in `span(b_j∘ψ)`.
///
/// Everything is evaluated at sampled source points, with residuals
/// relative to `max(1, |b|)`. The verdict uses a hysteresis band: verified
/// when every residual is at most `tol`, refuted when one exceeds `10·tol`,
/// inconclusive otherwise.
pub fn check_point_affine_equiv(
    psi: &DiffeoMap,
    fx: &AffineDistribution,
    fy: &AffineDistribution,
    cfg: &SampleConfig,
) -> Result<EquivalenceReport, EquivError> {
    let (cx, cy) = (fx.chart(), fy.chart());
    if cx.dim() != cy.dim() || fx.rank() != fy.rank() {
        return Err(EquivError::Shape(cx.dim(), fx.rank(), cy.dim(), fy.rank()));
    }
    if !psi.source().compatible(cx) || !psi.target().compatible(cy) {
        return Err(EquivError::MapCharts(
            psi.source().to_string(),
            psi.target().to_string(),
            cx.to_string(),
            cy.to_string(),
        ));
    }
    psi.check_inverse(cfg).map_err(|e| match e {
        FormError::InverseMismatch { witness, residual } => EquivError::MapInconsistency { witness, residual },
        e => e.into(),
    })?;

    let jac = psi.jacobian();
    // ψ_*v in source coordinates: J(x) v(x)
    let push = |v: &[Scalar]| -> Vec<Scalar> {
        jac.iter()
            .map(|row| row.iter().zip(v).fold(Scalar::zero(), |acc, (j, c)| acc.add(&j.mul(c))))
            .collect()
    };
    let a0 = push(fx.drift().components());
    let ai: Vec<Vec<Scalar>> = fx.generators().iter().map(|g| push(g.components())).collect();
    let pull = |v: &[Scalar]| v.iter().map(|c| psi.to_source(c)).collect::<Result<Vec<_>, _>>();
    let b0 = pull(fy.drift().components())?;
    let bj: Vec<Vec<Scalar>> = fy.generators().iter().map(|g| pull(g.components())).collect::<Result<_, _>>()?;

    let eval = |v: &[Scalar], p: &Point| -> Result<DVector<f64>, EvalError> {
        let refs: Vec<&Scalar> = v.iter().collect();
        Ok(DVector::from_vec(Scalar::eval_many(&refs, cx, p)?))
    };
    let samples = sample_with(cx, cfg, cfg.samples.max(1), |p| {
        let mut out = Vec::with_capacity(1 + ai.len());
        let (pa, pb) = (eval(&a0, p)?, eval(&b0, p)?);
        out.push((&pa - &pb).amax() / pb.amax().max(1.0));
        let cols: Vec<DVector<f64>> = bj.iter().map(|b| eval(b, p)).collect::<Result<_, _>>()?;
        let basis = DMatrix::from_columns(&cols);
        for a in &ai {
            let v = eval(a, p)?;
            let scale = v.amax().max(basis.amax()).max(1.0);
            let coeffs = basis.clone().svd(true, true).solve(&v, 1e-12).map_err(|e| EvalError::NonFinite(e.into()))?;
            out.push((&basis * coeffs - &v).amax() / scale);
        }
        if out.iter().any(|r| !r.is_finite()) {
            return Err(EvalError::NonFinite("equivalence residual".into()));
        }
        Ok(out)
    })
    .map_err(ExprError::from)?;

    let names: Vec<String> = std::iter::once("drift".to_string())
        .chain((1..=ai.len()).map(|i| format!("control {i}")))
        .collect();
    let residuals: Vec<ConditionResidual> = names
        .into_iter()
        .enumerate()
        .map(|(c, condition)| {
            let worst = samples.iter().max_by(|a, b| a.value[c].total_cmp(&b.value[c])).expect("at least one sample");
            ConditionResidual { condition, max_residual: worst.value[c], at: worst.point.clone() }
        })
        .collect();
    let worst = residuals.iter().max_by(|a, b| a.max_residual.total_cmp(&b.max_residual)).expect("drift condition");
    let verdict = hysteresis(worst.max_residual, cfg.tol);
    let witness = (verdict == Verdict::RefutedWithWitness).then(|| worst.at.clone());
    Ok(EquivalenceReport { verdict, residuals, witness, samples: samples.len(), tolerance: cfg.tol })
}

/// Whether the 2D normal form with function `J` is flat, i.e. `J = g(x¹)x²`:
/// `∂²J/∂(x²)²` and `J|_{x²=0}` both vanish.
pub fn flatness_dim2(j: &Scalar, chart: &Chart, cfg: &SampleConfig) -> Result<bool, EquivError> {
    if chart.dim() != 2 {
        return Err(ExprError::InvalidChart(format!("flatness_dim2 needs a 2-chart, got {chart}")).into());
    }
    let x2 = chart.variable(1).to_string();
    if !is_zero(&j.diff(&x2).diff(&x2), chart, cfg)?.is_zero() {
        return Ok(false);
    }
    let on_axis = j.substitute(&[(x2, Scalar::zero())].into_iter().collect())?;
    Ok(is_zero(&on_axis, chart, cfg)?.is_zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SignatureVerdict {
    /// Every sampled invariant tuple of X is matched on Y. A necessary
    /// condition only.
    PossiblyEquivalent,
    RefutedWithWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureReport {
    pub verdict: SignatureVerdict,
    pub label_x: CaseLabel,
    pub label_y: CaseLabel,
    /// Invariants that were compared, in tuple order.
    pub compared: Vec<String>,
    /// Sign applied to the odd invariants of Y in the 3D case 3 (`+1` or `−1`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    /// Match tolerance used for the tuple distances.
    pub tolerance: f64,
    /// Largest distance from an X tuple to its nearest Y tuple.
    pub distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Point>,
    pub reason: String,
}

/// Invariants that change sign under the residual `ℤ/2` of the 3D case 3.
const ODD_UNDER_COVER: [&str; 3] = ["T1_13", "T2_23", "T3_23"];

/// Compares sampled invariant tuples of two systems. Different case labels
/// refute at once. For e-structures every X tuple must lie within tolerance
/// of some Y tuple (in max-norm); in the 3D case 3 both sign choices of the
/// double cover are tried.
///
/// The tolerance is `max(10·tol, spread_Y / (2·N^{1/n}))`, where `spread_Y`
/// is the largest range of a Y invariant over its samples: the expected gap
/// between neighbouring samples of a Lipschitz image of the box.
pub fn invariant_signature_compare(
    fx: &AffineDistribution,
    fy: &AffineDistribution,
    cfg: &SampleConfig,
) -> Result<SignatureReport, EquivError> {
    let rx = adapt(fx, None, cfg)?;
    let ry = adapt(fy, None, cfg)?;
    signature_compare_reports(&rx, &ry, cfg)
}

/// [`invariant_signature_compare`] on reports that are already computed.
pub fn signature_compare_reports(
    rx: &InvariantReport,
    ry: &InvariantReport,
    cfg: &SampleConfig,
) -> Result<SignatureReport, EquivError> {
    let mut report = SignatureReport {
        verdict: SignatureVerdict::PossiblyEquivalent,
        label_x: rx.label,
        label_y: ry.label,
        compared: Vec::new(),
        sign: None,
        tolerance: 10.0 * cfg.tol,
        distance: 0.0,
        witness: None,
        reason: String::new(),
    };
    if rx.label != ry.label {
        report.verdict = SignatureVerdict::RefutedWithWitness;
        report.witness = rx.points.first().cloned();
        report.reason = "case labels differ, and the case is an invariant".into();
        return Ok(report);
    }
    if !rx.label.is_e_structure() {
        report.reason = "no invariant functions to compare in this case".into();
        return Ok(report);
    }
    let names: Vec<String> = rx.invariants.iter().map(|i| i.name.clone()).filter(|n| n.starts_with('T')).collect();
    let tuples = |r: &InvariantReport| -> Vec<Vec<f64>> {
        let idx: Vec<usize> =
            names.iter().map(|n| r.invariants.iter().position(|i| &i.name == n).expect("same case, same invariants")).collect();
        r.values.iter().map(|row| idx.iter().map(|&i| row[i]).collect()).collect()
    };
    let (tx, ty) = (tuples(rx), tuples(ry));
    let spread = (0..names.len())
        .map(|c| {
            let (lo, hi) = ty.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t[c]), hi.max(t[c])));
            hi - lo
        })
        .fold(0.0, f64::max);
    let dim = rx.chart().dim() as f64;
    let tol = (10.0 * cfg.tol).max(spread / (2.0 * (ty.len().max(1) as f64).powf(1.0 / dim)));
    report.compared = names.clone();
    report.tolerance = tol;

    let signs: Vec<i8> = if rx.label.theorem == Theorem::Dim3Rank1 && rx.label.case == 3 { vec![1, -1] } else { vec![1] };
    let mut best: Option<(i8, f64, usize)> = None;
    for &sign in &signs {
        let flip: Vec<f64> = names
            .iter()
            .map(|n| if sign < 0 && ODD_UNDER_COVER.contains(&n.as_str()) { -1.0 } else { 1.0 })
            .collect();
        let mut worst = (0.0, 0);
        for (p, x) in tx.iter().enumerate() {
            let d = ty
                .iter()
                .map(|y| x.iter().zip(y).zip(&flip).map(|((a, b), f)| (a - f * b).abs()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            if d > worst.0 {
                worst = (d, p);
            }
        }
        if best.is_none_or(|(_, d, _)| worst.0 < d) {
            best = Some((sign, worst.0, worst.1));
        }
    }
    let (sign, distance, at) = best.expect("at least one sign");
    report.distance = distance;
    if signs.len() > 1 {
        report.sign = Some(sign);
    }
    if distance > tol {
        report.verdict = SignatureVerdict::RefutedWithWitness;
        report.witness = rx.points.get(at).cloned();
        report.reason = format!("an invariant tuple of X is {distance:e} from every sampled tuple of Y");
    } else {
        report.reason = "every sampled invariant tuple of X is matched on Y (necessary condition only)".into();
    }
    Ok(report)
}
