use std::collections::BTreeMap;
use std::fmt;

use crate::expr::{all_zero, Chart, ExprError, Scalar, ZeroVerdict};
use crate::sample::SampleConfig;

use super::field::same_chart;
use super::{FormError, VectorField};

/// Differential form of fixed degree with coefficients on increasing index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct KForm {
    chart: Chart,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, Scalar>,
}

/// Sorts `idx` in place; returns the permutation sign, or `None` on a repeat.
fn sort_sign(idx: &mut [usize]) -> Option<bool> {
    let mut negative = false;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(negative)
    }
}

impl KForm {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        Self { chart: chart.clone(), degree, coeffs: BTreeMap::new() }
    }

    /// The 0-form `f`.
    pub fn function(chart: &Chart, f: Scalar) -> Self {
        let mut out = Self::zero(chart, 0);
        out.insert(Vec::new(), f);
        out
    }

    /// `dxⁱ`.
    pub fn dx(chart: &Chart, i: usize) -> Self {
        let mut out = Self::zero(chart, 1);
        out.insert(vec![i], Scalar::one());
        out
    }

    /// `Σ cᵢ dxⁱ`.
    pub fn one_form(chart: &Chart, coeffs: Vec<Scalar>) -> Result<Self, FormError> {
        if coeffs.len() != chart.dim() {
            return Err(FormError::ComponentCount { expected: chart.dim(), got: coeffs.len() });
        }
        let mut out = Self::zero(chart, 1);
        for (i, c) in coeffs.into_iter().enumerate() {
            out.insert(vec![i], c);
        }
        Ok(out)
    }

    pub fn parse_one_form(chart: &Chart, coeffs: &[&str]) -> Result<Self, FormError> {
        let cs = coeffs.iter().map(|t| Scalar::parse(t, chart)).collect::<Result<Vec<_>, _>>()?;
        Self::one_form(chart, cs)
    }

    /// Builds a form from terms on arbitrary index tuples, antisymmetrizing.
    pub fn from_terms(chart: &Chart, degree: usize, terms: Vec<(Vec<usize>, Scalar)>) -> Result<Self, FormError> {
        if degree > chart.dim() {
            return Err(FormError::DegreeOverflow { degree, dim: chart.dim() });
        }
        let mut out = Self::zero(chart, degree);
        for (mut idx, c) in terms {
            if idx.len() != degree {
                return Err(FormError::Arity { degree, got: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= chart.dim()) {
                return Err(FormError::BadIndex { index: bad, dim: chart.dim() });
            }
            if let Some(negative) = sort_sign(&mut idx) {
                out.accumulate(idx, if negative { c.neg() } else { c });
            }
        }
        Ok(out)
    }

    fn insert(&mut self, idx: Vec<usize>, c: Scalar) {
        if !c.is_exact_zero() {
            self.coeffs.insert(idx, c);
        }
    }

    fn accumulate(&mut self, idx: Vec<usize>, c: Scalar) {
        let sum = match self.coeffs.remove(&idx) {
            Some(old) => old.add(&c),
            None => c,
        };
        self.insert(idx, sum);
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient on an increasing index tuple.
    pub fn coeff(&self, idx: &[usize]) -> Scalar {
        self.coeffs.get(idx).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self, cfg: &SampleConfig) -> Result<ZeroVerdict, ExprError> {
        all_zero(self.coeffs.values(), &self.chart, cfg)
    }

    fn check_same(&self, other: &Self) -> Result<(), FormError> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(FormError::Arity { degree: self.degree, got: other.degree });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.coeffs {
            out.accumulate(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::from_int(-1))
    }

    /// Multiplication by a function.
    pub fn scale(&self, f: &Scalar) -> Self {
        let mut out = Self::zero(&self.chart, self.degree);
        for (idx, c) in &self.coeffs {
            out.insert(idx.clone(), c.mul(f));
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, FormError> {
        same_chart(&self.chart, &other.chart)?;
        let degree = self.degree + other.degree;
        if degree > self.chart.dim() {
            return Err(FormError::DegreeOverflow { degree, dim: self.chart.dim() });
        }
        let mut out = Self::zero(&self.chart, degree);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let mut idx: Vec<usize> = a.iter().chain(b).copied().collect();
                if let Some(negative) = sort_sign(&mut idx) {
                    let c = ca.mul(cb);
                    out.accumulate(idx, if negative { c.neg() } else { c });
                }
            }
        }
        Ok(out)
    }

    /// `self ∧ self ∧ … ` (`k` factors); `k = 0` gives the constant 1.
    pub fn wedge_power(&self, k: usize) -> Result<Self, FormError> {
        let mut out = Self::function(&self.chart, Scalar::one());
        for _ in 0..k {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self) -> Result<Self, FormError> {
        let degree = self.degree + 1;
        if degree > self.chart.dim() {
            return Err(FormError::DegreeOverflow { degree, dim: self.chart.dim() });
        }
        let mut out = Self::zero(&self.chart, degree);
        for (idx, c) in &self.coeffs {
            for (j, x) in self.chart.variables().iter().enumerate() {
                let dc = c.diff(x);
                if dc.is_exact_zero() {
                    continue;
                }
                let mut full = Vec::with_capacity(degree);
                full.push(j);
                full.extend_from_slice(idx);
                if let Some(negative) = sort_sign(&mut full) {
                    out.accumulate(full, if negative { dc.neg() } else { dc });
                }
            }
        }
        Ok(out)
    }

    /// Alternating evaluation `ω(X₁, …, X_k) = Σ_I ω_I det[X_j^{I_i}]`.
    pub fn apply(&self, fields: &[&VectorField]) -> Result<Scalar, FormError> {
        if fields.len() != self.degree {
            return Err(FormError::Arity { degree: self.degree, got: fields.len() });
        }
        for f in fields {
            same_chart(&self.chart, f.chart())?;
        }
        let mut acc = Scalar::zero();
        for (idx, c) in &self.coeffs {
            let m: Vec<Vec<Scalar>> =
                idx.iter().map(|&i| fields.iter().map(|f| f.component(i).clone()).collect()).collect();
            acc = acc.add(&c.mul(&super::linalg::determinant(&m)));
        }
        Ok(acc)
    }

    /// Interior product `ι_X ω`.
    pub fn interior(&self, x: &VectorField) -> Result<Self, FormError> {
        same_chart(&self.chart, x.chart())?;
        if self.degree == 0 {
            return Ok(Self::zero(&self.chart, 0));
        }
        let mut out = Self::zero(&self.chart, self.degree - 1);
        for (idx, c) in &self.coeffs {
            for (pos, &i) in idx.iter().enumerate() {
                let xi = x.component(i);
                if xi.is_exact_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(pos);
                let t = c.mul(xi);
                out.accumulate(rest, if pos % 2 == 1 { t.neg() } else { t });
            }
        }
        Ok(out)
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (n, (idx, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if idx.is_empty() {
                write!(f, "{c}")?;
                continue;
            }
            if *c != Scalar::one() {
                write!(f, "({c})*")?;
            }
            for (k, i) in idx.iter().enumerate() {
                if k > 0 {
                    write!(f, "^")?;
                }
                write!(f, "d{}", self.chart.variable(*i))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::new("X", &["x1", "x2", "x3"]).unwrap()
    }

    fn contact() -> KForm {
        KForm::parse_one_form(&chart(), &["1", "-x3", "0"]).unwrap()
    }

    #[test]
    fn derivative_of_contact_form() {
        let c = chart();
        let d = contact().d().unwrap();
        assert_eq!(d, KForm::from_terms(&c, 2, vec![(vec![1, 2], Scalar::one())]).unwrap());
        let top = contact().wedge(&d).unwrap();
        assert_eq!(top.coeff(&[0, 1, 2]), Scalar::one());
        assert!(d.d().unwrap().is_exact_zero());
    }

    #[test]
    fn wedge_antisymmetry() {
        let c = chart();
        assert!(KForm::dx(&c, 0).wedge(&KForm::dx(&c, 0)).unwrap().is_exact_zero());
        let a = contact();
        let b = KForm::parse_one_form(&c, &["x2", "1", "sin(x1)"]).unwrap();
        assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().neg());
        assert!(matches!(
            a.wedge(&a.d().unwrap()).unwrap().wedge(&a),
            Err(FormError::DegreeOverflow { degree: 4, dim: 3 })
        ));
    }

    #[test]
    fn evaluation_on_fields() {
        let c = chart();
        let e2 = VectorField::coordinate(&c, 1);
        assert_eq!(KForm::dx(&c, 1).apply(&[&e2]).unwrap(), Scalar::one());
        assert_eq!(contact().apply(&[&e2]).unwrap(), Scalar::parse("-x3", &c).unwrap());
        assert!(matches!(contact().apply(&[]), Err(FormError::Arity { degree: 1, got: 0 })));
    }

    #[test]
    fn interior_product_matches_apply() {
        let c = chart();
        let w = contact().d().unwrap();
        let x = VectorField::parse(&c, &["x2", "1", "x1"]).unwrap();
        let y = VectorField::parse(&c, &["0", "x3", "1"]).unwrap();
        let lhs = w.interior(&x).unwrap().apply(&[&y]).unwrap();
        assert_eq!(lhs, w.apply(&[&x, &y]).unwrap());
    }
}
