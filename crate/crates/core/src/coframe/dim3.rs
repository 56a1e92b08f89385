use num_rational::BigRational;

use crate::expr::{is_zero, Func, Scalar};
use crate::flags::{classify_bracket, is_frobenius, AffineDistribution, BracketClass, LinearDistribution};
use crate::forms::{lie_bracket, Frame};
use crate::sample::SampleConfig;

use super::{require_nonvanishing, strictness, torsion_name, CaseLabel, CoframeError, Invariant, InvariantReport, StructureFunctions, Theorem};

fn s(n: i64) -> Scalar {
    Scalar::from_int(n)
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn diag(b: &Scalar) -> Vec<Vec<Scalar>> {
    vec![vec![s(1), s(0), s(0)], vec![s(0), b.clone(), s(0)], vec![s(0), s(0), b.clone()]]
}

fn check_shape(f: &AffineDistribution, routine: &'static str) -> Result<(), CoframeError> {
    if f.chart().dim() != 3 || f.rank() != 1 {
        return Err(CoframeError::Shape { routine, n: 3, s: 1 });
    }
    Ok(())
}

/// Rank 1 on a 3-manifold.
///
/// Starts from the admissible frame `(a₀, a₁, [a₀, a₁])` and reduces in
/// three steps:
/// 1. `ṽ₃ = T¹₁₂ v₁ + T³₁₂ v₃` gives `T³₁₂ = 1`, `T¹₁₂ = 0`;
/// 2. `ṽ₃ += b₃ v₂` with `b₃ = (c²₁₂ − c³₁₃)/2` removes the torsion left
///    in `dη³` along `η¹ ∧ η³` once `β₂` absorbs what it can;
/// 3. `diag(1, b₂, b₂)` normalizes `T¹₁₃ = 1` (case 2) or `T¹₂₃ = ε` (case 3).
pub fn adapt_dim3_rank1(f: &AffineDistribution, cfg: &SampleConfig) -> Result<InvariantReport, CoframeError> {
    check_shape(f, "adapt_dim3_rank1")?;
    let chart = f.chart();
    let class = classify_bracket(f, cfg)?;
    if let BracketClass::Neither { rank } = class {
        return Err(CoframeError::Neither { rank });
    }
    let (a0, a1) = (f.drift(), &f.generators()[0]);
    let frame = Frame::new(chart, vec![a0.clone(), a1.clone(), lie_bracket(a0, a1)?])?;
    let s0 = StructureFunctions::from_frame(&frame, cfg)
        .map_err(|e| match e {
            CoframeError::Form(e) => strictness(e),
            e => e,
        })?
        .snapped(cfg)?;

    let t312 = s0.c(2, 0, 1).clone();
    require_nonvanishing("T3_12", &t312, chart, cfg)?;
    let g1 = vec![vec![s(1), s(0), s0.c(0, 0, 1).clone()], vec![s(0), s(1), s(0)], vec![s(0), s(0), t312]];
    let s1 = s0.transform(&g1, cfg)?.snapped(cfg)?;

    let b3 = s1.c(1, 0, 1).sub(s1.c(2, 0, 2)).scale(&BigRational::new(1.into(), 2.into()));
    let g2 = vec![vec![s(1), s(0), s(0)], vec![s(0), s(1), b3], vec![s(0), s(0), s(1)]];
    let s2 = s1.transform(&g2, cfg)?.snapped(cfg)?;

    let t123 = s2.c(0, 1, 2).clone();
    let t113 = s2.c(0, 0, 2).clone();
    let mut notes = Vec::new();
    let (label, structure, names) = if is_zero(&t123, chart, cfg)?.is_zero() {
        if is_zero(&t113, chart, cfg)?.is_zero() {
            (CaseLabel::new(Theorem::Dim3Rank1, 1), s2, vec![(1, 0, 2)])
        } else {
            require_nonvanishing("T1_13", &t113, chart, cfg)?;
            let s3 = s2.transform(&diag(&t113.recip()?), cfg)?.snapped(cfg)?;
            (CaseLabel::new(Theorem::Dim3Rank1, 2), s3, vec![(1, 0, 1), (1, 0, 2), (1, 1, 2)])
        }
    } else {
        let eps = require_nonvanishing("T1_23", &t123, chart, cfg)?;
        // b₂² T¹₂₃ = ε; the sign of b₂ follows the normal form.
        let root = t123.scale(&q(eps as i64)).apply(Func::Sqrt);
        let b2 = s(-eps as i64).div(&root)?;
        let s3 = s2.transform(&diag(&b2), cfg)?.snapped(cfg)?;
        let mut label = CaseLabel::new(Theorem::Dim3Rank1, 3);
        label.epsilon = Some(eps as i8);
        notes.push("case 3 invariants are defined on a double cover; reported with the positive square root".to_string());
        (label, s3, vec![(0, 0, 2), (1, 0, 1), (1, 0, 2), (1, 1, 2), (2, 1, 2)])
    };

    if (label.case == 1) != matches!(class, BracketClass::AlmostBracketGenerating { .. }) {
        notes.push(format!("torsion case {} disagrees with the bracket class ({})", label.case, class.label()));
    }

    let mut invariants: Vec<Invariant> =
        names.iter().map(|&(k, i, j)| Invariant { name: torsion_name(k, i, j), expr: structure.c(k, i, j).clone() }).collect();
    if label.case == 3 {
        if let Some((h, j_input)) = case3_coordinates(f, cfg)? {
            let eps = label.epsilon.unwrap_or(1) as i64;
            let hx1 = h.diff(chart.variable(0));
            let root = hx1.scale(&q(-eps)).apply(Func::Sqrt);
            let b = structure.c(0, 0, 2);
            let j = b.neg().div(&root)?;
            if !is_zero(&j.sub(&j_input), chart, cfg)?.is_zero() {
                notes.push("J recovered from T1_13 differs from the drift's J".to_string());
            }
            invariants.push(Invariant { name: "H".into(), expr: h });
            invariants.push(Invariant { name: "J".into(), expr: j });
        }
    }
    InvariantReport::build(label, invariants, structure, notes, cfg)
}

/// `(H, J)` when `a₁ = x³∂₁ + ∂₂ + H∂₃` and `a₀ = ∂₁ + J a₁`.
fn case3_coordinates(f: &AffineDistribution, cfg: &SampleConfig) -> Result<Option<(Scalar, Scalar)>, CoframeError> {
    let chart = f.chart();
    let a1 = &f.generators()[0];
    if *a1.component(0) != Scalar::var(chart.variable(2)) || *a1.component(1) != Scalar::one() {
        return Ok(None);
    }
    let h = a1.component(2).clone();
    let j = f.drift().component(1).clone();
    let rest = f.drift().sub(&a1.scale(&j))?;
    let expected = crate::forms::VectorField::coordinate(chart, 0);
    if !rest.sub(&expected)?.is_zero(cfg)?.is_zero() {
        return Ok(None);
    }
    Ok(Some((h, j)))
}

/// The classical case of a rank-1 affine distribution on a 3-manifold:
/// 1 if almost bracket-generating, otherwise 2 or 3 as `L_{F²}` is or is not
/// Frobenius.
pub fn elkin_case(f: &AffineDistribution, cfg: &SampleConfig) -> Result<u8, CoframeError> {
    check_shape(f, "elkin_case")?;
    match classify_bracket(f, cfg)? {
        BracketClass::Neither { rank } => Err(CoframeError::Neither { rank }),
        BracketClass::AlmostBracketGenerating { .. } => Ok(1),
        BracketClass::BracketGenerating { .. } => {
            let a1 = &f.generators()[0];
            let l2 = LinearDistribution::new(f.chart(), vec![a1.clone(), lie_bracket(f.drift(), a1)?])?;
            Ok(if is_frobenius(&l2, cfg)? { 2 } else { 3 })
        }
    }
}
