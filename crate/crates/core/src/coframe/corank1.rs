use crate::expr::{ExprError, Scalar};
use crate::flags::{pfaff_rank, AffineDistribution};
use crate::forms::{Frame, KForm};
use crate::sample::{sample_with, SampleConfig};

use super::{strictness, CaseLabel, CoframeError, Invariant, InvariantReport, StructureFunctions, Theorem};

/// Rank `n − 1`. The unique 1-form `η̄¹` with `η̄¹(L_F) = 0` and
/// `η̄¹(a₀) = 1` is the first row of the coframe dual to `(a₀, a₁, …)`. Its
/// Pfaff rank `k` and whether `(dη̄¹)^{k+1}` vanishes fix the case.
///
/// With `pfaff = Some(y)`, the coordinate functions `y¹, …, yⁿ` (written in
/// the chart's coordinates) must bring `η̄¹` to the normal form
/// `dy¹ − Σ y^{k+r+1} dy^{r+1}` (case 1) or that form divided by `y^{2k+2}`
/// (case 2). The invariants are then the components of `a₀` in these
/// coordinates: `J_{k+r+1} = a₀(y^{r+1})`, `J_{r+1} = −a₀(y^{k+r+1})` and,
/// in case 2, `J₁ = −a₀(y^{2k+2})`.
pub fn adapt_corank1(
    f: &AffineDistribution,
    pfaff: Option<&[Scalar]>,
    cfg: &SampleConfig,
) -> Result<InvariantReport, CoframeError> {
    let chart = f.chart();
    let n = chart.dim();
    if n < 2 || f.rank() + 1 != n {
        return Err(CoframeError::Shape { routine: "adapt_corank1", n, s: n.saturating_sub(1) });
    }
    let mut fields = vec![f.drift().clone()];
    fields.extend(f.generators().iter().cloned());
    let frame = Frame::new(chart, fields)?;
    let s0 = StructureFunctions::from_frame(&frame, cfg).map_err(|e| match e {
        CoframeError::Form(e) => strictness(e),
        e => e,
    })?;
    let eta1 = s0.coframe().form(0).clone();
    let pr = pfaff_rank(&eta1, cfg)?;
    let case = if pr.top_power_vanishes { 1 } else { 2 };
    let mut label = CaseLabel::new(Theorem::CorankOne, case);
    label.pfaff_k = Some(pr.k);
    label.top_power_vanishes = Some(pr.top_power_vanishes);

    let mut invariants = Vec::new();
    if let Some(y) = pfaff {
        if y.len() != n {
            return Err(CoframeError::PfaffCount { expected: n, got: y.len() });
        }
        let k = pr.k;
        let dy = |i: usize| KForm::function(chart, y[i].clone()).d();
        let mut model = dy(0)?;
        for r in 1..=k {
            model = model.sub(&dy(r)?.scale(&y[k + r]))?;
        }
        if case == 2 {
            model = model.scale(&y[2 * k + 1].recip()?);
        }
        let diff = eta1.sub(&model)?;
        if !diff.is_zero(cfg)?.is_zero() {
            let coeffs: Vec<&Scalar> = diff.terms().map(|(_, c)| c).collect();
            let samples = sample_with(chart, cfg, cfg.samples.max(1), |p| {
                Ok(Scalar::eval_many(&coeffs, chart, p)?.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
            })
            .map_err(ExprError::from)?;
            let worst = samples.into_iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("at least one sample");
            return Err(CoframeError::PfaffMismatch { witness: worst.point, residual: worst.value });
        }
        let a0 = f.drift();
        if case == 2 {
            invariants.push(Invariant { name: "J1".into(), expr: a0.apply_to(&y[2 * k + 1]).neg() });
        }
        let mut js: Vec<(usize, Scalar)> = Vec::new();
        for r in 1..=k {
            js.push((k + r + 1, a0.apply_to(&y[r])));
            js.push((r + 1, a0.apply_to(&y[k + r]).neg()));
        }
        js.sort_by_key(|(i, _)| *i);
        invariants.extend(js.into_iter().map(|(i, expr)| Invariant { name: format!("J{i}"), expr }));
    }
    InvariantReport::build(label, invariants, s0, Vec::new(), cfg)
}
