use std::fmt;

use crate::expr::{all_zero, Chart, EvalError, ExprError, Point, Scalar, ZeroVerdict};
use crate::sample::{sample_with, SampleConfig};

use super::linalg::{self, SymMatrix};
use super::{FormError, KForm};

/// Vector field `Σ vⁱ ∂/∂xⁱ` on a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Chart,
    components: Vec<Scalar>,
}

pub(crate) fn same_chart(a: &Chart, b: &Chart) -> Result<(), FormError> {
    if a.compatible(b) {
        Ok(())
    } else {
        Err(FormError::ChartMismatch(a.to_string(), b.to_string()))
    }
}

impl VectorField {
    pub fn new(chart: &Chart, components: Vec<Scalar>) -> Result<Self, FormError> {
        if components.len() != chart.dim() {
            return Err(FormError::ComponentCount { expected: chart.dim(), got: components.len() });
        }
        Ok(Self { chart: chart.clone(), components })
    }

    pub fn parse(chart: &Chart, components: &[&str]) -> Result<Self, FormError> {
        let comps = components.iter().map(|t| Scalar::parse(t, chart)).collect::<Result<Vec<_>, _>>()?;
        Self::new(chart, comps)
    }

    pub fn zero(chart: &Chart) -> Self {
        Self { chart: chart.clone(), components: vec![Scalar::zero(); chart.dim()] }
    }

    /// `∂/∂xⁱ`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut v = Self::zero(chart);
        v.components[i] = Scalar::one();
        v
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Scalar] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Scalar {
        &self.components[i]
    }

    /// Directional derivative `v(f)`.
    pub fn apply_to(&self, f: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for (c, x) in self.components.iter().zip(self.chart.variables()) {
            if !c.is_exact_zero() {
                acc = acc.add(&c.mul(&f.diff(x)));
            }
        }
        acc
    }

    fn zip(&self, other: &Self, op: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Self, FormError> {
        same_chart(&self.chart, &other.chart)?;
        let components = self.components.iter().zip(&other.components).map(|(a, b)| op(a, b)).collect();
        Ok(Self { chart: self.chart.clone(), components })
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.zip(other, Scalar::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.zip(other, Scalar::sub)
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::from_int(-1))
    }

    /// Multiplication by a function.
    pub fn scale(&self, f: &Scalar) -> Self {
        Self { chart: self.chart.clone(), components: self.components.iter().map(|c| c.mul(f)).collect() }
    }

    /// `Σ fᵢ vᵢ`.
    pub fn combination(chart: &Chart, terms: &[(Scalar, &VectorField)]) -> Result<Self, FormError> {
        let mut acc = Self::zero(chart);
        for (f, v) in terms {
            acc = acc.add(&v.scale(f))?;
        }
        Ok(acc)
    }

    pub fn bracket(&self, other: &Self) -> Result<Self, FormError> {
        lie_bracket(self, other)
    }

    pub fn is_zero(&self, cfg: &SampleConfig) -> Result<ZeroVerdict, ExprError> {
        all_zero(&self.components, &self.chart, cfg)
    }

    pub fn eval(&self, point: &Point) -> Result<Vec<f64>, EvalError> {
        let refs: Vec<&Scalar> = self.components.iter().collect();
        Scalar::eval_many(&refs, &self.chart, point)
    }

    /// Same components re-read over another chart with the same names.
    pub fn with_chart(&self, chart: &Chart) -> Result<Self, FormError> {
        same_chart(&self.chart, chart)?;
        Ok(Self { chart: chart.clone(), components: self.components.clone() })
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// `[v, w]ᵏ = Σᵢ (vⁱ ∂wᵏ/∂xⁱ − wⁱ ∂vᵏ/∂xⁱ)`.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> Result<VectorField, FormError> {
    same_chart(&v.chart, &w.chart)?;
    let components = (0..v.dim()).map(|k| v.apply_to(&w.components[k]).sub(&w.apply_to(&v.components[k]))).collect();
    Ok(VectorField { chart: v.chart.clone(), components })
}

fn check_nonsingular(m: &SymMatrix, det: &Scalar, chart: &Chart, cfg: &SampleConfig) -> Result<(), FormError> {
    // Evaluate the determinant from the entries so the check does not depend
    // on how far the symbolic determinant simplified.
    let samples = sample_with(chart, cfg, cfg.samples.max(1), |p| {
        let rows = m
            .iter()
            .map(|row| Scalar::eval_many(&row.iter().collect::<Vec<_>>(), chart, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(linalg::numeric_det(&rows))
    })
    .map_err(ExprError::from)?;
    let scale = samples.iter().map(|s| s.value.abs()).fold(0.0, f64::max);
    if det.is_exact_zero() || scale == 0.0 {
        let witness = samples.first().map(|s| s.point.clone()).unwrap_or_else(|| chart.point(vec![0.0; chart.dim()], vec![0.0; chart.params().len()]));
        return Err(FormError::SingularFrame { witness, det: 0.0 });
    }
    if let Some(s) = samples.iter().find(|s| s.value.abs() <= cfg.tol) {
        return Err(FormError::SingularFrame { witness: s.point.clone(), det: s.value });
    }
    Ok(())
}

/// An ordered basis of vector fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    chart: Chart,
    fields: Vec<VectorField>,
}

impl Frame {
    pub fn new(chart: &Chart, fields: Vec<VectorField>) -> Result<Self, FormError> {
        if fields.len() != chart.dim() {
            return Err(FormError::ComponentCount { expected: chart.dim(), got: fields.len() });
        }
        for f in &fields {
            same_chart(chart, &f.chart)?;
        }
        Ok(Self { chart: chart.clone(), fields })
    }

    pub fn coordinate(chart: &Chart) -> Self {
        Self { chart: chart.clone(), fields: (0..chart.dim()).map(|i| VectorField::coordinate(chart, i)).collect() }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> &VectorField {
        &self.fields[i]
    }

    /// Column `j` holds the components of field `j`.
    pub fn matrix(&self) -> SymMatrix {
        let n = self.chart.dim();
        (0..n).map(|i| (0..n).map(|j| self.fields[j].components[i].clone()).collect()).collect()
    }

    /// The coframe `ηⁱ` with `ηⁱ(v_j) = δⁱ_j`.
    pub fn dual(&self, cfg: &SampleConfig) -> Result<Coframe, FormError> {
        let m = self.matrix();
        let (inv, det) = match linalg::inverse(&m) {
            Ok(r) => r,
            Err(ExprError::DivisionByZero) => (Vec::new(), Scalar::zero()),
            Err(e) => return Err(e.into()),
        };
        check_nonsingular(&m, &det, &self.chart, cfg)?;
        let forms = inv.into_iter().map(|row| KForm::one_form(&self.chart, row)).collect::<Result<Vec<_>, _>>()?;
        Ok(Coframe { chart: self.chart.clone(), forms })
    }
}

/// An ordered basis of 1-forms.
#[derive(Clone, Debug, PartialEq)]
pub struct Coframe {
    chart: Chart,
    forms: Vec<KForm>,
}

impl Coframe {
    pub fn new(chart: &Chart, forms: Vec<KForm>) -> Result<Self, FormError> {
        if forms.len() != chart.dim() {
            return Err(FormError::ComponentCount { expected: chart.dim(), got: forms.len() });
        }
        for f in &forms {
            same_chart(chart, f.chart())?;
            if f.degree() != 1 {
                return Err(FormError::Arity { degree: f.degree(), got: 1 });
            }
        }
        Ok(Self { chart: chart.clone(), forms })
    }

    pub fn coordinate(chart: &Chart) -> Self {
        Self { chart: chart.clone(), forms: (0..chart.dim()).map(|i| KForm::dx(chart, i)).collect() }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn forms(&self) -> &[KForm] {
        &self.forms
    }

    pub fn form(&self, i: usize) -> &KForm {
        &self.forms[i]
    }

    /// Row `i` holds the coefficients of `ηⁱ`.
    pub fn matrix(&self) -> SymMatrix {
        let n = self.chart.dim();
        self.forms.iter().map(|f| (0..n).map(|j| f.coeff(&[j])).collect()).collect()
    }

    pub fn dual(&self, cfg: &SampleConfig) -> Result<Frame, FormError> {
        let m = self.matrix();
        let (inv, det) = match linalg::inverse(&m) {
            Ok(r) => r,
            Err(ExprError::DivisionByZero) => (Vec::new(), Scalar::zero()),
            Err(e) => return Err(e.into()),
        };
        check_nonsingular(&m, &det, &self.chart, cfg)?;
        let cols = linalg::transpose(&inv);
        let fields = cols.into_iter().map(|c| VectorField::new(&self.chart, c)).collect::<Result<Vec<_>, _>>()?;
        Ok(Frame { chart: self.chart.clone(), fields })
    }
}

impl fmt::Display for Coframe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, form) in self.forms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "eta{} = {form}", i + 1)?;
        }
        Ok(())
    }
}
