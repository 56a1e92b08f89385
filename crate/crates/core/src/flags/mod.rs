//! Linear and affine distributions, derived flags, growth vectors, bracket
//! classification, constant-type checks, Frobenius tests and Pfaff rank.

mod probe;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Chart, ExprError, Point};
use crate::forms::{lie_bracket, DiffeoMap, FormError, KForm, VectorField};
use crate::sample::{sample_with, SampleConfig};

use probe::{Probe, RankStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlagError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("a distribution needs at least one generator")]
    NoGenerators,
    #[error("stage {stage} has rank {found} at {witness} but rank {expected} at most samples")]
    NonConstantRank { stage: usize, expected: usize, found: usize, witness: Point },
    #[error("the drift lies in the span of the generators at {witness}")]
    NotStrictlyAffine { witness: Point },
    #[error("the 1-form vanishes at {witness}")]
    VanishingForm { witness: Point },
}

/// `D = span(g₁, …, g_s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearDistribution {
    chart: Chart,
    generators: Vec<VectorField>,
}

impl LinearDistribution {
    pub fn new(chart: &Chart, generators: Vec<VectorField>) -> Result<Self, FlagError> {
        if generators.is_empty() {
            return Err(FlagError::NoGenerators);
        }
        for g in &generators {
            if !g.chart().compatible(chart) {
                return Err(FormError::ChartMismatch(chart.to_string(), g.chart().to_string()).into());
            }
        }
        Ok(Self { chart: chart.clone(), generators })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn pushforward(&self, map: &DiffeoMap) -> Result<Self, FlagError> {
        let gens = self.generators.iter().map(|g| map.pushforward(g)).collect::<Result<Vec<_>, _>>()?;
        Self::new(map.target(), gens)
    }
}

/// `F = a₀ + span(a₁, …, a_s)` with distinguished drift `a₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineDistribution {
    chart: Chart,
    drift: VectorField,
    generators: Vec<VectorField>,
}

impl AffineDistribution {
    pub fn new(chart: &Chart, drift: VectorField, generators: Vec<VectorField>) -> Result<Self, FlagError> {
        let direction = LinearDistribution::new(chart, generators)?;
        if !drift.chart().compatible(chart) {
            return Err(FormError::ChartMismatch(chart.to_string(), drift.chart().to_string()).into());
        }
        Ok(Self { chart: chart.clone(), drift, generators: direction.generators })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn drift(&self) -> &VectorField {
        &self.drift
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// `L_F`.
    pub fn direction(&self) -> LinearDistribution {
        LinearDistribution { chart: self.chart.clone(), generators: self.generators.clone() }
    }

    pub fn pushforward(&self, map: &DiffeoMap) -> Result<Self, FlagError> {
        let drift = map.pushforward(&self.drift)?;
        let gens = self.generators.iter().map(|g| map.pushforward(g)).collect::<Result<Vec<_>, _>>()?;
        Self::new(map.target(), drift, gens)
    }

    /// Same data on a chart with another sampling box.
    pub fn with_chart(&self, chart: &Chart) -> Result<Self, FlagError> {
        let drift = self.drift.with_chart(chart)?;
        let gens = self.generators.iter().map(|g| g.with_chart(chart)).collect::<Result<Vec<_>, _>>()?;
        Self::new(chart, drift, gens)
    }
}

/// Derived flag: kept generators per stage and the growth vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Flag {
    pub stages: Vec<Vec<VectorField>>,
    pub growth: Vec<usize>,
    /// The flag stopped because a further stage added nothing.
    pub stabilized: bool,
    pub samples: usize,
}

impl Flag {
    pub fn step(&self) -> usize {
        self.growth.len()
    }

    pub fn final_rank(&self) -> usize {
        *self.growth.last().unwrap_or(&0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum BracketClass {
    BracketGenerating { rank: usize },
    AlmostBracketGenerating { rank: usize },
    Neither { rank: usize },
}

impl BracketClass {
    pub fn label(&self) -> &'static str {
        match self {
            BracketClass::BracketGenerating { .. } => "bracket-generating",
            BracketClass::AlmostBracketGenerating { .. } => "almost bracket-generating",
            BracketClass::Neither { .. } => "neither",
        }
    }
}

/// Flag computation shared by the linear and affine variants.
struct Growth {
    probe: Probe,
    stages: Vec<Vec<usize>>,
    /// Every candidate generated up to each stage, kept or not. The kept
    /// fields span the same space at most samples, but only the full set
    /// spans it wherever a kept bracket happens to vanish.
    spans: Vec<Vec<usize>>,
    stats: Vec<RankStats>,
    stabilized: bool,
}

fn grow(chart: &Chart, drift: Option<&VectorField>, generators: &[VectorField], cfg: &SampleConfig) -> Result<Growth, FlagError> {
    let n = chart.dim();
    let mut probe = Probe::new(chart, drift, generators, cfg)?;
    let mut kept = Vec::new();
    for g in generators {
        probe.offer(g.clone(), &mut kept);
    }
    let mut stages = vec![kept.clone()];
    let mut spans = vec![(0..probe.field_count()).collect::<Vec<_>>()];
    let mut stats = vec![probe.rank_stats(&kept, false)];
    let first = kept.clone();
    let mut fresh = kept.clone();
    let mut stabilized = false;
    while stats.last().map(|s| s.mode) != Some(n) {
        let mut next = kept.clone();
        for &h in &fresh {
            if let Some(a0) = drift {
                let b = lie_bracket(a0, probe.field(h))?;
                probe.offer(b, &mut next);
            }
            for &g in &first {
                if g != h {
                    let b = lie_bracket(probe.field(g), probe.field(h))?;
                    probe.offer(b, &mut next);
                }
            }
        }
        if next.len() == kept.len() {
            stabilized = true;
            break;
        }
        spans.push((0..probe.field_count()).collect());
        fresh = next[kept.len()..].to_vec();
        kept = next;
        stats.push(probe.rank_stats(&kept, false));
        stages.push(kept.clone());
    }
    Ok(Growth { probe, stages, spans, stats, stabilized })
}

impl Growth {
    fn into_flag(self) -> Result<Flag, FlagError> {
        for (i, s) in self.stats.iter().enumerate() {
            if let Some((witness, found)) = &s.outlier {
                return Err(FlagError::NonConstantRank { stage: i + 1, expected: s.mode, found: *found, witness: witness.clone() });
            }
        }
        Ok(Flag {
            growth: self.stats.iter().map(|s| s.mode).collect(),
            stages: self.stages.iter().map(|st| st.iter().map(|&i| self.probe.field(i).clone()).collect()).collect(),
            stabilized: self.stabilized,
            samples: self.probe.len(),
        })
    }
}

/// `D^{i+1} = D^i + [D, D^i]`.
pub fn linear_flag(d: &LinearDistribution, cfg: &SampleConfig) -> Result<Flag, FlagError> {
    grow(&d.chart, None, &d.generators, cfg)?.into_flag()
}

fn require_strict(growth: &Growth) -> Result<(), FlagError> {
    let s = growth.probe.rank_stats(&growth.stages[0], true);
    let base = growth.stats[0].mode;
    if let Some(w) = s.first_below(base + 1) {
        return Err(FlagError::NotStrictlyAffine { witness: w });
    }
    Ok(())
}

/// `F^{i+1} = F^i + [F, F^i]`, reported through the direction distributions
/// `L_{F^i}`; the growth vector lists their ranks.
pub fn affine_flag(f: &AffineDistribution, cfg: &SampleConfig) -> Result<Flag, FlagError> {
    let growth = grow(&f.chart, Some(&f.drift), &f.generators, cfg)?;
    require_strict(&growth)?;
    growth.into_flag()
}

pub fn classify_bracket(f: &AffineDistribution, cfg: &SampleConfig) -> Result<BracketClass, FlagError> {
    let growth = grow(&f.chart, Some(&f.drift), &f.generators, cfg)?;
    require_strict(&growth)?;
    let n = f.chart.dim();
    let last = growth.stages.last().cloned().unwrap_or_default();
    let completed = growth.probe.rank_stats(&last, true).first_below(n).is_none();
    let rank = growth.into_flag()?.final_rank();
    if rank == n {
        return Ok(BracketClass::BracketGenerating { rank });
    }
    if rank + 1 == n && completed {
        return Ok(BracketClass::AlmostBracketGenerating { rank });
    }
    Ok(BracketClass::Neither { rank })
}

/// One line of a constant-type report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeCheck {
    pub name: String,
    pub passed: bool,
    /// Dimension at most samples.
    pub dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantTypeReport {
    pub passed: bool,
    pub strictly_affine: bool,
    pub growth: Vec<usize>,
    pub checks: Vec<TypeCheck>,
}

impl ConstantTypeReport {
    pub fn first_witness(&self) -> Option<&Point> {
        self.checks.iter().find(|c| !c.passed).and_then(|c| c.witness.as_ref())
    }
}

/// Verifies that every rank in the affine flag, and every `dim span(a₀, L_{F^i})`,
/// is constant over the box. Besides comparing ranks at the samples, a sign
/// change of a maximal minor between two samples is located by bisection,
/// which catches rank drops on hypersurfaces that sampling never hits.
pub fn constant_type_check(f: &AffineDistribution, cfg: &SampleConfig) -> Result<ConstantTypeReport, FlagError> {
    let growth = grow(&f.chart, Some(&f.drift), &f.generators, cfg)?;
    let mut checks = Vec::new();
    for (i, span) in growth.spans.iter().enumerate() {
        let stats = growth.probe.rank_stats(span, false);
        checks.push(growth.probe.type_check(format!("rank L_F^{}", i + 1), span, false, &stats));
        let with_drift = growth.probe.rank_stats(span, true);
        checks.push(growth.probe.type_check(format!("dim span(a0, L_F^{})", i + 1), span, true, &with_drift));
    }
    let strict_mode = growth.probe.rank_stats(&growth.stages[0], true);
    let strictly_affine = strict_mode.mode == growth.stats[0].mode + 1 && checks[1].passed;
    if strict_mode.mode != growth.stats[0].mode + 1 {
        checks[1].passed = false;
        checks[1].detail = Some("the drift lies in the span of the generators".into());
    }
    Ok(ConstantTypeReport {
        passed: checks.iter().all(|c| c.passed),
        strictly_affine,
        growth: growth.stats.iter().map(|s| s.mode).collect(),
        checks,
    })
}

/// True iff every bracket of generators stays in their span at all samples.
pub fn is_frobenius(d: &LinearDistribution, cfg: &SampleConfig) -> Result<bool, FlagError> {
    let mut probe = Probe::new(&d.chart, None, &d.generators, cfg)?;
    let mut kept = Vec::new();
    for g in &d.generators {
        probe.offer(g.clone(), &mut kept);
    }
    let base = probe.rank_stats(&kept, false);
    let mut all = kept.clone();
    for (a, &i) in kept.iter().enumerate() {
        for &j in &kept[a + 1..] {
            let b = lie_bracket(probe.field(i), probe.field(j))?;
            all.push(probe.push(b));
        }
    }
    let closed = probe.rank_stats(&all, false);
    Ok(closed.max <= base.mode && closed.mode == base.mode)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PfaffRank {
    pub k: usize,
    /// Whether `(dθ)^{k+1}` vanishes.
    pub top_power_vanishes: bool,
}

/// Smallest `k` with `θ ∧ (dθ)^{k+1} = 0`.
pub fn pfaff_rank(theta: &KForm, cfg: &SampleConfig) -> Result<PfaffRank, FlagError> {
    let chart = theta.chart();
    let n = chart.dim();
    if theta.degree() != 1 {
        return Err(FormError::Arity { degree: theta.degree(), got: 1 }.into());
    }
    let coeffs: Vec<_> = (0..n).map(|i| theta.coeff(&[i])).collect();
    let norms = sample_with(chart, cfg, cfg.samples.max(1), |p| {
        let refs: Vec<_> = coeffs.iter().collect();
        Ok(crate::expr::Scalar::eval_many(&refs, chart, p)?.iter().map(|x| x.abs()).fold(0.0, f64::max))
    })
    .map_err(ExprError::from)?;
    if let Some(s) = norms.iter().find(|s| s.value <= cfg.tol) {
        return Err(FlagError::VanishingForm { witness: s.point.clone() });
    }
    let dtheta = theta.d()?;
    let mut power = KForm::function(chart, crate::expr::Scalar::one());
    let mut k = 0;
    loop {
        // power = (dθ)^k here
        let next_degree = 2 * (k + 1);
        let next = if next_degree <= n { Some(power.wedge(&dtheta)?) } else { None };
        let top_zero = match &next {
            Some(p) => p.is_zero(cfg)?.is_zero(),
            None => true,
        };
        let with_theta_zero = if next_degree + 1 > n {
            true
        } else {
            theta.wedge(next.as_ref().expect("degree fits"))?.is_zero(cfg)?.is_zero()
        };
        if with_theta_zero {
            return Ok(PfaffRank { k, top_power_vanishes: top_zero });
        }
        power = next.expect("nonzero power exists");
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(c: &Chart, comps: &[&str]) -> VectorField {
        VectorField::parse(c, comps).unwrap()
    }

    #[test]
    fn heisenberg_growth() {
        let c = Chart::new("R3", &["x1", "x2", "x3"]).unwrap();
        let d = LinearDistribution::new(&c, vec![field(&c, &["0", "1", "0"]), field(&c, &["x2", "0", "1"])]).unwrap();
        let flag = linear_flag(&d, &SampleConfig::default()).unwrap();
        assert_eq!(flag.growth, vec![2, 3]);
    }

    #[test]
    fn affine_examples() {
        let cfg = SampleConfig::default();
        let c2 = Chart::new("R2", &["x1", "x2"]).unwrap();
        let f = AffineDistribution::new(&c2, field(&c2, &["1", "0"]), vec![field(&c2, &["0", "1"])]).unwrap();
        assert_eq!(affine_flag(&f, &cfg).unwrap().growth, vec![1]);
        assert_eq!(classify_bracket(&f, &cfg).unwrap(), BracketClass::AlmostBracketGenerating { rank: 1 });
        let g = AffineDistribution::new(&c2, field(&c2, &["x2", "0"]), vec![field(&c2, &["0", "1"])]);
        let g = g.unwrap().with_chart(&c2.rebox(&[crate::expr::Interval::new(-1.0, 1.0).unwrap(), crate::expr::Interval::new(0.5, 2.0).unwrap()]).unwrap()).unwrap();
        assert_eq!(affine_flag(&g, &cfg).unwrap().growth, vec![1, 2]);
        assert_eq!(classify_bracket(&g, &cfg).unwrap(), BracketClass::BracketGenerating { rank: 2 });
        let c3 = Chart::new("R3", &["x1", "x2", "x3"]).unwrap();
        let h = AffineDistribution::new(&c3, field(&c3, &["1", "x3", "0"]), vec![field(&c3, &["0", "0", "1"])]).unwrap();
        assert_eq!(affine_flag(&h, &cfg).unwrap().growth, vec![1, 2]);
        assert_eq!(classify_bracket(&h, &cfg).unwrap(), BracketClass::AlmostBracketGenerating { rank: 2 });
        let k = AffineDistribution::new(&c3, field(&c3, &["1", "0", "0"]), vec![field(&c3, &["0", "1", "0"])]).unwrap();
        assert_eq!(classify_bracket(&k, &cfg).unwrap(), BracketClass::Neither { rank: 1 });
    }

    #[test]
    fn strictness_break_is_located() {
        let c = Chart::new("R2", &["x1", "x2"]).unwrap();
        let f = AffineDistribution::new(&c, field(&c, &["x1", "0"]), vec![field(&c, &["0", "1"])]).unwrap();
        let report = constant_type_check(&f, &SampleConfig::default()).unwrap();
        assert!(!report.passed);
        let w = report.first_witness().unwrap();
        assert!(w.vars[0].abs() < 1e-6, "{w}");
    }

    #[test]
    fn frobenius_examples() {
        let cfg = SampleConfig::default();
        let c = Chart::new("R3", &["x1", "x2", "x3"]).unwrap();
        let flat = LinearDistribution::new(&c, vec![field(&c, &["0", "1", "0"]), field(&c, &["0", "0", "1"])]).unwrap();
        assert!(is_frobenius(&flat, &cfg).unwrap());
        let contact = LinearDistribution::new(&c, vec![field(&c, &["x3", "1", "0"]), field(&c, &["0", "0", "1"])]).unwrap();
        assert!(!is_frobenius(&contact, &cfg).unwrap());
    }

    #[test]
    fn pfaff_examples() {
        let cfg = SampleConfig::default();
        let c3 = Chart::new("R3", &["x1", "x2", "x3"]).unwrap();
        let theta = KForm::parse_one_form(&c3, &["1", "-x3", "0"]).unwrap();
        assert_eq!(pfaff_rank(&theta, &cfg).unwrap(), PfaffRank { k: 1, top_power_vanishes: true });
        let c4 = Chart::new("R4", &["x0", "x1", "x2", "x3"]).unwrap();
        let theta = KForm::parse_one_form(&c4, &["0", "x0", "0", "x2"]).unwrap();
        // x0 dx1 + x2 dx3 vanishes only on a codimension-2 set, so sampling never hits it.
        assert_eq!(pfaff_rank(&theta, &cfg).unwrap(), PfaffRank { k: 1, top_power_vanishes: false });
        let c2 = Chart::new("R2", &["x1", "x2"]).unwrap();
        assert_eq!(pfaff_rank(&KForm::dx(&c2, 0), &cfg).unwrap(), PfaffRank { k: 0, top_power_vanishes: true });
    }
}
