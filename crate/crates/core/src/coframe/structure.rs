use crate::expr::{snap, Scalar, ZeroVerdict};
use crate::forms::linalg::{inverse, SymMatrix};
use crate::forms::{lie_bracket, Coframe, Frame, KForm, VectorField};
use crate::sample::SampleConfig;

use super::{require_nonvanishing, CoframeError};

/// Structure functions of a coframe: `dηᵏ = Σ_{i<j} cᵏ_ij ηⁱ ∧ ηʲ`.
///
/// The table is stored in full, `cᵏ_ji = −cᵏ_ij`, with 0-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureFunctions {
    frame: Frame,
    coframe: Coframe,
    table: Vec<Scalar>,
}

impl StructureFunctions {
    /// Structure functions of the coframe dual to `frame`.
    pub fn from_frame(frame: &Frame, cfg: &SampleConfig) -> Result<Self, CoframeError> {
        let coframe = frame.dual(cfg)?;
        Self::compute(frame.clone(), coframe)
    }

    pub fn from_coframe(coframe: &Coframe, cfg: &SampleConfig) -> Result<Self, CoframeError> {
        let frame = coframe.dual(cfg)?;
        Self::compute(frame, coframe.clone())
    }

    /// `cᵏ_ij = dηᵏ(v_i, v_j) = −ηᵏ([v_i, v_j])`, since `ηᵏ(v_j)` is constant.
    fn compute(frame: Frame, coframe: Coframe) -> Result<Self, CoframeError> {
        let n = frame.chart().dim();
        let mut table = vec![Scalar::zero(); n * n * n];
        for i in 0..n {
            for j in i + 1..n {
                let br = lie_bracket(frame.field(i), frame.field(j))?;
                for k in 0..n {
                    let eta = coframe.form(k);
                    let mut acc = Scalar::zero();
                    for m in 0..n {
                        let b = br.component(m);
                        if !b.is_exact_zero() {
                            acc = acc.add(&eta.coeff(&[m]).mul(b));
                        }
                    }
                    table[(k * n + i) * n + j] = acc.neg();
                    table[(k * n + j) * n + i] = acc;
                }
            }
        }
        Ok(Self { frame, coframe, table })
    }

    pub fn dim(&self) -> usize {
        self.frame.chart().dim()
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn coframe(&self) -> &Coframe {
        &self.coframe
    }

    /// `cᵏ_ij`, 0-based.
    pub fn c(&self, k: usize, i: usize, j: usize) -> &Scalar {
        let n = self.dim();
        &self.table[(k * n + i) * n + j]
    }

    /// Nonzero entries with `i < j`, as `(k, i, j, c)`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, &Scalar)> {
        let n = self.dim();
        let mut out = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in i + 1..n {
                    let c = self.c(k, i, j);
                    if !c.is_exact_zero() {
                        out.push((k, i, j, c));
                    }
                }
            }
        }
        out
    }

    /// The 2-form `Σ_{i<j} cᵏ_ij ηⁱ ∧ ηʲ`.
    pub fn structure_form(&self, k: usize) -> Result<KForm, CoframeError> {
        let n = self.dim();
        let mut acc = KForm::zero(self.frame.chart(), 2);
        for i in 0..n {
            for j in i + 1..n {
                let c = self.c(k, i, j);
                if c.is_exact_zero() {
                    continue;
                }
                let w = self.coframe.form(i).wedge(self.coframe.form(j))?;
                acc = acc.add(&w.scale(c))?;
            }
        }
        Ok(acc)
    }

    /// Joint zero verdict of `dηᵏ − Σ cᵏ_ij ηⁱ ∧ ηʲ` over all `k`.
    pub fn reconstruction(&self, cfg: &SampleConfig) -> Result<ZeroVerdict, CoframeError> {
        let mut joint = ZeroVerdict::ExactZero;
        for k in 0..self.dim() {
            let diff = self.coframe.form(k).d()?.sub(&self.structure_form(k)?)?;
            match diff.is_zero(cfg)? {
                ZeroVerdict::ExactZero => {}
                v @ ZeroVerdict::NumericZero { .. } => joint = v,
                v => return Ok(v),
            }
        }
        Ok(joint)
    }

    /// Structure functions after the change of frame `ṽ_b = Σ_j v_j g_jb`,
    /// equivalently `η̃ = g⁻¹ η`. Only `g` is differentiated, so the frame
    /// itself never has to be inverted again.
    pub fn transform(&self, g: &SymMatrix, cfg: &SampleConfig) -> Result<Self, CoframeError> {
        let n = self.dim();
        let chart = self.frame.chart();
        let (ginv, det) = inverse(g).map_err(|_| CoframeError::Vanishing { name: "det g".into() })?;
        require_nonvanishing("det g", &det, chart, cfg)?;
        let fields: Vec<VectorField> = (0..n)
            .map(|b| {
                let terms: Vec<(Scalar, &VectorField)> =
                    (0..n).filter(|&j| !g[j][b].is_exact_zero()).map(|j| (g[j][b].clone(), self.frame.field(j))).collect();
                VectorField::combination(chart, &terms)
            })
            .collect::<Result<_, _>>()?;
        let forms: Vec<KForm> = (0..n)
            .map(|m| {
                let mut acc = KForm::zero(chart, 1);
                for (k, gk) in ginv[m].iter().enumerate() {
                    if !gk.is_exact_zero() {
                        acc = acc.add(&self.coframe.form(k).scale(gk))?;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_, CoframeError>>()?;
        let mut table = vec![Scalar::zero(); n * n * n];
        for a in 0..n {
            for b in a + 1..n {
                // w^k = coefficient of v_k in [ṽ_a, ṽ_b]
                let mut w = vec![Scalar::zero(); n];
                for (k, wk) in w.iter_mut().enumerate() {
                    let mut acc = fields[a].apply_to(&g[k][b]).sub(&fields[b].apply_to(&g[k][a]));
                    for i in 0..n {
                        if g[i][a].is_exact_zero() {
                            continue;
                        }
                        for j in 0..n {
                            let c = self.c(k, i, j);
                            if g[j][b].is_exact_zero() || c.is_exact_zero() {
                                continue;
                            }
                            acc = acc.sub(&g[i][a].mul(&g[j][b]).mul(c));
                        }
                    }
                    *wk = acc;
                }
                for m in 0..n {
                    let mut acc = Scalar::zero();
                    for (k, wk) in w.iter().enumerate() {
                        if !ginv[m][k].is_exact_zero() && !wk.is_exact_zero() {
                            acc = acc.add(&ginv[m][k].mul(wk));
                        }
                    }
                    table[(m * n + a) * n + b] = acc.neg();
                    table[(m * n + b) * n + a] = acc;
                }
            }
        }
        Ok(Self { frame: Frame::new(chart, fields)?, coframe: Coframe::new(chart, forms)?, table })
    }

    /// Replaces entries that are numerically constant on the box by their
    /// exact values, which keeps later reductions small.
    pub fn snapped(mut self, cfg: &SampleConfig) -> Result<Self, CoframeError> {
        let chart = self.frame.chart().clone();
        for c in self.table.iter_mut() {
            if !c.is_rational() {
                *c = snap(c, &chart, cfg)?;
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Chart, Interval};

    fn cfg() -> SampleConfig {
        SampleConfig::zero_test()
    }

    #[test]
    fn coordinate_coframe_has_no_torsion() {
        let c = Chart::new("X", &["x1", "x2", "x3"]).unwrap();
        let s = StructureFunctions::from_coframe(&Coframe::coordinate(&c), &cfg()).unwrap();
        assert!(s.entries().is_empty());
    }

    #[test]
    fn two_dimensional_flat_coframe() {
        // (dx1/x2, (dx2 - J dx1)/x2) with J = 0: dη¹ = η¹∧η², dη² = 0.
        let c = Chart::with_box("X", &["x1", "x2"], &[Interval::new(-1.0, 1.0).unwrap(), Interval::new(0.5, 2.0).unwrap()])
            .unwrap();
        let cf = Coframe::new(
            &c,
            vec![KForm::parse_one_form(&c, &["1/x2", "0"]).unwrap(), KForm::parse_one_form(&c, &["0", "1/x2"]).unwrap()],
        )
        .unwrap();
        let s = StructureFunctions::from_coframe(&cf, &cfg()).unwrap();
        assert_eq!(*s.c(0, 0, 1), Scalar::one());
        assert_eq!(*s.c(0, 1, 0), Scalar::from_int(-1));
        assert!(s.c(1, 0, 1).is_exact_zero());
        assert_eq!(s.reconstruction(&cfg()).unwrap(), ZeroVerdict::ExactZero);
    }

    #[test]
    fn transform_matches_recomputation() {
        let c = Chart::with_box("X", &["x1", "x2", "x3"], &[Interval::new(0.5, 1.5).unwrap(); 3]).unwrap();
        let fr = Frame::new(
            &c,
            vec![
                VectorField::parse(&c, &["1", "x3", "x1*x2"]).unwrap(),
                VectorField::parse(&c, &["0", "0", "1"]).unwrap(),
                VectorField::parse(&c, &["0", "1", "x2"]).unwrap(),
            ],
        )
        .unwrap();
        let s = StructureFunctions::from_frame(&fr, &cfg()).unwrap();
        let p = |t: &str| Scalar::parse(t, &c).unwrap();
        let g = vec![vec![p("1"), p("0"), p("x2")], vec![p("0"), p("x1"), p("x3^2")], vec![p("0"), p("0"), p("1 + x1")]];
        let moved = s.transform(&g, &cfg()).unwrap();
        let direct = StructureFunctions::from_frame(moved.frame(), &cfg()).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let d = moved.c(k, i, j).sub(direct.c(k, i, j));
                    assert!(d.is_exact_zero(), "c{k}{i}{j}: {d}");
                }
            }
        }
        assert!(moved.reconstruction(&cfg()).unwrap().is_zero());
    }
}
