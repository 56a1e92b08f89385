//! Zero and sign tests: exact on rational canonical forms, sampled otherwise.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{Chart, ExprError, Point, Scalar};
use crate::sample::{sample_with, SampleConfig, SampleError};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ZeroVerdict {
    ExactZero,
    ExactNonzero,
    NumericZero { samples: usize, tolerance: f64 },
    NumericNonzero { witness: Point, value: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::ExactZero | ZeroVerdict::NumericZero { .. })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ZeroVerdict::ExactZero | ZeroVerdict::ExactNonzero)
    }
}

impl From<SampleError> for ExprError {
    fn from(e: SampleError) -> Self {
        match e {
            SampleError::Exhausted { attempts, .. } => ExprError::SingularOnBox { attempts },
        }
    }
}

/// Decides whether `s` vanishes identically on the chart box.
pub fn is_zero(s: &Scalar, chart: &Chart, cfg: &SampleConfig) -> Result<ZeroVerdict, ExprError> {
    if s.is_exact_zero() {
        return Ok(ZeroVerdict::ExactZero);
    }
    if s.is_rational() {
        return Ok(ZeroVerdict::ExactNonzero);
    }
    let samples = sample_with(chart, cfg, cfg.samples.max(1), |p| s.eval(chart, p))?;
    match samples.iter().find(|x| x.value.abs() > cfg.tol) {
        Some(w) => Ok(ZeroVerdict::NumericNonzero { witness: w.point.clone(), value: w.value }),
        None => Ok(ZeroVerdict::NumericZero { samples: samples.len(), tolerance: cfg.tol }),
    }
}

/// Joint verdict for a family of scalars: the first nonzero verdict, else
/// `ExactZero` when every member is exactly zero, else `NumericZero`.
pub fn all_zero<'a>(
    items: impl IntoIterator<Item = &'a Scalar>,
    chart: &Chart,
    cfg: &SampleConfig,
) -> Result<ZeroVerdict, ExprError> {
    let mut joint = ZeroVerdict::ExactZero;
    for s in items {
        match is_zero(s, chart, cfg)? {
            ZeroVerdict::ExactZero => {}
            v @ ZeroVerdict::NumericZero { .. } => joint = v,
            v => return Ok(v),
        }
    }
    Ok(joint)
}

/// Sign behaviour of a scalar over the sampled box.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "sign", rename_all = "snake_case")]
pub enum SignProfile {
    Zero,
    Positive,
    Negative,
    /// Two sample points in different sign classes (negative, zero, positive).
    Mixed { first: Point, first_value: f64, second: Point, second_value: f64 },
}

impl SignProfile {
    /// `+1`, `-1`, or `0` for the constant-sign profiles.
    pub fn sign(&self) -> Option<i32> {
        match self {
            SignProfile::Zero => Some(0),
            SignProfile::Positive => Some(1),
            SignProfile::Negative => Some(-1),
            SignProfile::Mixed { .. } => None,
        }
    }
}

fn class(v: f64, tol: f64) -> i32 {
    if v.abs() <= tol {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

pub fn classify_sign(s: &Scalar, chart: &Chart, cfg: &SampleConfig) -> Result<SignProfile, ExprError> {
    if s.is_exact_zero() {
        return Ok(SignProfile::Zero);
    }
    if let Some(q) = s.as_rational() {
        return Ok(if q.is_positive() { SignProfile::Positive } else { SignProfile::Negative });
    }
    let samples = sample_with(chart, cfg, cfg.samples.max(1), |p| s.eval(chart, p))?;
    let first = &samples[0];
    let c0 = class(first.value, cfg.tol);
    if let Some(other) = samples.iter().find(|x| class(x.value, cfg.tol) != c0) {
        return Ok(SignProfile::Mixed {
            first: first.point.clone(),
            first_value: first.value,
            second: other.point.clone(),
            second_value: other.value,
        });
    }
    Ok(match c0 {
        0 => SignProfile::Zero,
        1 => SignProfile::Positive,
        _ => SignProfile::Negative,
    })
}

/// Replaces a scalar that is numerically constant on the box by that
/// constant: zero, or a rational with denominator at most 12. Anything else
/// is returned unchanged. Rational canonical forms are already exact and are
/// never altered.
pub fn snap(s: &Scalar, chart: &Chart, cfg: &SampleConfig) -> Result<Scalar, ExprError> {
    if s.is_constant() || s.is_rational() {
        return Ok(s.clone());
    }
    let samples = sample_with(chart, cfg, cfg.samples.max(1), |p| s.eval(chart, p))?;
    let v0 = samples[0].value;
    let scale = v0.abs().max(1.0);
    if samples.iter().any(|x| (x.value - v0).abs() > cfg.tol * scale) {
        return Ok(s.clone());
    }
    if v0.abs() <= cfg.tol {
        return Ok(Scalar::zero());
    }
    for d in 1..=12i64 {
        let n = (v0 * d as f64).round();
        if (n / d as f64 - v0).abs() <= cfg.tol * scale && n.abs() < 1e12 {
            let q = BigRational::new((n as i64).into(), d.into());
            if !q.is_zero() {
                return Ok(Scalar::from_rational(q));
            }
        }
    }
    Ok(s.clone())
}
