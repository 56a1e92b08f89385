use std::collections::BTreeMap;

use crate::expr::{Chart, ExprError, Point, Scalar};
use crate::sample::{sample_with, SampleConfig};

use super::field::same_chart;
use super::{FormError, KForm, VectorField};

/// Coordinate change `y = F(x)` between two charts with an explicit inverse.
///
/// The charts may share coordinate names; substitutions are simultaneous.
/// Both charts must declare the same parameters, which pass through unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoMap {
    source: Chart,
    target: Chart,
    forward: Vec<Scalar>,
    inverse: Vec<Scalar>,
}

fn substitution(chart: &Chart, values: &[Scalar]) -> BTreeMap<String, Scalar> {
    chart.variables().iter().zip(values).map(|(v, s)| (v.to_string(), s.clone())).collect()
}

impl DiffeoMap {
    pub fn new(source: &Chart, target: &Chart, forward: Vec<Scalar>, inverse: Vec<Scalar>) -> Result<Self, FormError> {
        if forward.len() != target.dim() {
            return Err(FormError::ComponentCount { expected: target.dim(), got: forward.len() });
        }
        if inverse.len() != source.dim() {
            return Err(FormError::ComponentCount { expected: source.dim(), got: inverse.len() });
        }
        let same_params = source.params().len() == target.params().len()
            && source.params().iter().zip(target.params()).all(|(a, b)| a.name == b.name);
        if !same_params || source.dim() != target.dim() {
            return Err(FormError::ChartMismatch(source.to_string(), target.to_string()));
        }
        Ok(Self { source: source.clone(), target: target.clone(), forward, inverse })
    }

    pub fn parse(source: &Chart, target: &Chart, forward: &[&str], inverse: &[&str]) -> Result<Self, FormError> {
        let f = forward.iter().map(|t| Scalar::parse(t, source)).collect::<Result<Vec<_>, _>>()?;
        let g = inverse.iter().map(|t| Scalar::parse(t, target)).collect::<Result<Vec<_>, _>>()?;
        Self::new(source, target, f, g)
    }

    pub fn identity(chart: &Chart) -> Self {
        let ids: Vec<Scalar> = chart.variables().iter().map(|v| Scalar::var(v)).collect();
        Self { source: chart.clone(), target: chart.clone(), forward: ids.clone(), inverse: ids }
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn forward(&self) -> &[Scalar] {
        &self.forward
    }

    pub fn inverse(&self) -> &[Scalar] {
        &self.inverse
    }

    /// `J[a][i] = ∂Fᵃ/∂xⁱ`.
    pub fn jacobian(&self) -> Vec<Vec<Scalar>> {
        self.forward.iter().map(|f| self.source.variables().iter().map(|x| f.diff(x)).collect()).collect()
    }

    /// Rewrites a source function in target coordinates: `f ∘ F⁻¹`.
    pub fn to_target(&self, f: &Scalar) -> Result<Scalar, ExprError> {
        f.substitute(&substitution(&self.source, &self.inverse))
    }

    /// Rewrites a target function in source coordinates: `g ∘ F`.
    pub fn to_source(&self, g: &Scalar) -> Result<Scalar, ExprError> {
        g.substitute(&substitution(&self.target, &self.forward))
    }

    /// Image of a source point.
    pub fn map_point(&self, p: &Point) -> Result<Point, crate::expr::EvalError> {
        let refs: Vec<&Scalar> = self.forward.iter().collect();
        let vars = Scalar::eval_many(&refs, &self.source, p)?;
        Ok(Point { vars, params: p.params.clone() })
    }

    /// Checks `F⁻¹(F(x)) = x` at sampled source points, relative to the point scale.
    pub fn check_inverse(&self, cfg: &SampleConfig) -> Result<(), FormError> {
        let inv: Vec<&Scalar> = self.inverse.iter().collect();
        let samples = sample_with(&self.source, cfg, cfg.samples.max(1), |p| {
            let y = self.map_point(p)?;
            let back = Scalar::eval_many(&inv, &self.target, &y)?;
            Ok(back.iter().zip(&p.vars).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max))
        })
        .map_err(ExprError::from)?;
        match samples.into_iter().find(|s| s.value > cfg.tol * 1e3) {
            Some(s) => Err(FormError::InverseMismatch { witness: s.point, residual: s.value }),
            None => Ok(()),
        }
    }

    /// `(F_* v)(y) = J(x) v(x)` with `x = F⁻¹(y)`.
    pub fn pushforward(&self, v: &VectorField) -> Result<VectorField, FormError> {
        same_chart(&self.source, v.chart())?;
        let jac = self.jacobian();
        let comps = jac
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero();
                for (j, vi) in row.iter().zip(v.components()) {
                    acc = acc.add(&j.mul(vi));
                }
                self.to_target(&acc)
            })
            .collect::<Result<Vec<_>, _>>()?;
        VectorField::new(&self.target, comps)
    }

    /// `F^* ω = Σ_I ω_I(F(x)) dF^{I₁} ∧ … ∧ dF^{I_k}`.
    pub fn pullback(&self, omega: &KForm) -> Result<KForm, FormError> {
        same_chart(&self.target, omega.chart())?;
        let jac = self.jacobian();
        let d_f: Vec<KForm> =
            jac.into_iter().map(|row| KForm::one_form(&self.source, row)).collect::<Result<_, _>>()?;
        let mut out = KForm::zero(&self.source, omega.degree());
        for (idx, c) in omega.terms() {
            let mut term = KForm::function(&self.source, self.to_source(c)?);
            for &i in idx {
                term = term.wedge(&d_f[i])?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &DiffeoMap) -> Result<DiffeoMap, FormError> {
        same_chart(&self.target, &other.source)?;
        let forward = other.forward.iter().map(|g| self.to_source(g)).collect::<Result<Vec<_>, _>>()?;
        let back = substitution(&other.target, &other.inverse);
        let inverse = self.inverse.iter().map(|h| h.substitute(&back)).collect::<Result<Vec<_>, _>>()?;
        DiffeoMap::new(&self.source, &other.target, forward, inverse)
    }
}
