use crate::expr::{is_zero, Scalar};
use crate::flags::AffineDistribution;
use crate::forms::Frame;
use crate::sample::SampleConfig;

use super::{require_nonvanishing, strictness, torsion_name, CaseLabel, CoframeError, Invariant, InvariantReport, StructureFunctions, Theorem};

/// Rank 1 on a surface. Admissible frames are `(a₀, b₂a₁)`; the relative
/// invariant `T¹₁₂` scales as `b₂T¹₁₂`. When it vanishes the structure is
/// flat (case 1). Otherwise `b₂ = 1/T¹₁₂` gives an e-structure whose single
/// torsion `T²₁₂` is the invariant.
pub fn adapt_dim2_rank1(f: &AffineDistribution, cfg: &SampleConfig) -> Result<InvariantReport, CoframeError> {
    let chart = f.chart();
    if chart.dim() != 2 || f.rank() != 1 {
        return Err(CoframeError::Shape { routine: "adapt_dim2_rank1", n: 2, s: 1 });
    }
    let frame = Frame::new(chart, vec![f.drift().clone(), f.generators()[0].clone()])?;
    let s0 = StructureFunctions::from_frame(&frame, cfg).map_err(|e| match e {
        CoframeError::Form(e) => strictness(e),
        e => e,
    })?;
    let t112 = s0.c(0, 0, 1).clone();
    if is_zero(&t112, chart, cfg)?.is_zero() {
        return InvariantReport::build(CaseLabel::new(Theorem::Dim2Rank1, 1), Vec::new(), s0, Vec::new(), cfg);
    }
    require_nonvanishing("T1_12", &t112, chart, cfg)?;
    let b2 = t112.recip()?;
    let g = vec![vec![Scalar::one(), Scalar::zero()], vec![Scalar::zero(), b2]];
    let s1 = s0.transform(&g, cfg)?.snapped(cfg)?;
    let invariants = vec![Invariant { name: torsion_name(1, 0, 1), expr: s1.c(1, 0, 1).clone() }];
    InvariantReport::build(CaseLabel::new(Theorem::Dim2Rank1, 2), invariants, s1, Vec::new(), cfg)
}
