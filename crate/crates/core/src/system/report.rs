use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::coframe::{adapt, CaseLabel, CoframeError, InvariantReport};
use crate::coframe::elkin_case;
use crate::equiv::{check_point_affine_equiv, signature_compare_reports, EquivError, EquivalenceReport, SignatureReport};
use crate::expr::Point;
use crate::flags::{affine_flag, classify_bracket, constant_type_check, BracketClass, ConstantTypeReport, FlagError};
use crate::sample::SampleConfig;

use super::format::{System, SystemSpec};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyzeError {
    #[error(transparent)]
    Flag(#[from] FlagError),
    #[error(transparent)]
    Coframe(#[from] CoframeError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error("equivalence mode needs a [system2] section")]
    NoSecondSystem,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl From<&SampleConfig> for ConfigEcho {
    fn from(cfg: &SampleConfig) -> Self {
        Self { samples: cfg.samples, tol: cfg.tol, seed: cfg.seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemSummary {
    pub name: String,
    pub coords: Vec<String>,
    pub n: usize,
    pub s: usize,
    pub controls: Vec<String>,
}

impl From<&System> for SystemSummary {
    fn from(s: &System) -> Self {
        Self {
            name: s.decl.chart.name.clone(),
            coords: s.decl.chart.coords.clone(),
            n: s.chart.dim(),
            s: s.distribution.rank(),
            controls: s.decl.controls.iter().map(|(n, _)| n.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantSummary {
    pub name: String,
    pub expr: String,
    pub min: f64,
    pub max: f64,
    /// One value per recorded sample point.
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub system: SystemSummary,
    pub config: ConfigEcho,
    pub constant_type: ConstantTypeReport,
    /// Growth vector of the affine flag `F ⊂ F² ⊂ …`.
    pub growth: Vec<usize>,
    pub bracket_class: BracketClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elkin_case: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseLabel>,
    pub invariants: Vec<InvariantSummary>,
    /// Sample points behind `invariants[..].values`, in verbose mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Point>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection: Option<String>,
    pub notes: Vec<String>,
}

/// Errors that mean "this system is outside the classification" rather than
/// "the computation failed".
fn rejection(e: &CoframeError) -> Option<String> {
    match e {
        CoframeError::NotStrictlyAffine { .. } | CoframeError::NonConstantType { .. } | CoframeError::Neither { .. } => {
            Some(e.to_string())
        }
        _ => None,
    }
}

fn supported(n: usize, s: usize) -> bool {
    matches!((n, s), (2, 1) | (3, 1)) || (n >= 3 && s + 1 == n)
}

fn run_adapt(system: &System, cfg: &SampleConfig) -> Result<Result<InvariantReport, String>, AnalyzeError> {
    match adapt(&system.distribution, system.pfaff.as_deref(), cfg) {
        Ok(r) => Ok(Ok(r)),
        Err(e) => match rejection(&e) {
            Some(why) => Ok(Err(why)),
            None => Err(e.into()),
        },
    }
}

/// Strictness and constant type, the flags, the bracket class, the classical
/// case label when `(n, s) = (3, 1)`, and the applicable reduction.
pub fn analyze(system: &System, cfg: &SampleConfig, verbose: bool) -> Result<AnalysisReport, AnalyzeError> {
    let f = &system.distribution;
    let (n, s) = (f.chart().dim(), f.rank());
    if !supported(n, s) {
        return Err(CoframeError::Unsupported { n, s }.into());
    }
    let constant_type = constant_type_check(f, cfg)?;
    let growth = affine_flag(f, cfg)?.growth;
    let bracket_class = classify_bracket(f, cfg)?;
    let mut report = AnalysisReport {
        schema: SCHEMA,
        system: system.into(),
        config: cfg.into(),
        constant_type,
        growth,
        bracket_class,
        elkin_case: None,
        case: None,
        invariants: Vec::new(),
        points: None,
        rejection: None,
        notes: Vec::new(),
    };
    if !report.constant_type.passed {
        let failed = report.constant_type.checks.iter().find(|c| !c.passed).expect("a failed check");
        let at = failed.witness.as_ref().map(|w| format!(" near {w}")).unwrap_or_default();
        report.rejection = Some(format!("not of constant type: `{}` varies{at}", failed.name));
        return Ok(report);
    }
    if (n, s) == (3, 1) {
        match elkin_case(f, cfg) {
            Ok(c) => report.elkin_case = Some(c),
            Err(e) => match rejection(&e) {
                Some(why) => {
                    report.rejection = Some(why);
                    return Ok(report);
                }
                None => return Err(e.into()),
            },
        }
    }
    match run_adapt(system, cfg)? {
        Err(why) => report.rejection = Some(why),
        Ok(r) => {
            report.case = Some(r.label);
            report.invariants = r
                .invariants
                .iter()
                .enumerate()
                .map(|(i, inv)| {
                    let values: Vec<f64> = r.values.iter().map(|row| row[i]).collect();
                    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
                    InvariantSummary { name: inv.name.clone(), expr: inv.expr.to_string(), min, max, values }
                })
                .collect();
            if verbose {
                report.points = Some(r.points.clone());
            }
            report.notes = r.notes.clone();
            if r.label.theorem == crate::coframe::Theorem::CorankOne && system.pfaff.is_none() && r.label.pfaff_k != Some(0) {
                report.notes.push("no [pfaff] section: the invariants J_i need Pfaff coordinates and were not extracted".into());
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivCheckReport {
    pub schema: u32,
    pub config: ConfigEcho,
    pub system_x: SystemSummary,
    pub system_y: SystemSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<EquivalenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<SignatureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection: Option<String>,
    pub notes: Vec<String>,
}

/// Verifies the map (when given) and compares invariant signatures.
pub fn equiv_check(spec: &SystemSpec, cfg: &SampleConfig) -> Result<EquivCheckReport, AnalyzeError> {
    let y = spec.second.as_ref().ok_or(AnalyzeError::NoSecondSystem)?;
    let x = &spec.system;
    let mut report = EquivCheckReport {
        schema: SCHEMA,
        config: cfg.into(),
        system_x: x.into(),
        system_y: y.into(),
        map: None,
        signature: None,
        rejection: None,
        notes: Vec::new(),
    };
    match &spec.map {
        Some(psi) => report.map = Some(check_point_affine_equiv(psi, &x.distribution, &y.distribution, cfg)?),
        None => report.notes.push("no [map] section: only the invariant signatures were compared".into()),
    }
    for (a, b) in [(x, "X"), (y, "Y")] {
        let (n, s) = (a.chart.dim(), a.distribution.rank());
        if !supported(n, s) {
            report.notes.push(format!("{b}: no reduction for (n, s) = ({n}, {s}), signatures not compared"));
            return Ok(report);
        }
    }
    let rx = run_adapt(x, cfg)?;
    let ry = run_adapt(y, cfg)?;
    match (rx, ry) {
        (Ok(rx), Ok(ry)) => report.signature = Some(signature_compare_reports(&rx, &ry, cfg)?),
        (Err(why), _) => report.rejection = Some(format!("X: {why}")),
        (_, Err(why)) => report.rejection = Some(format!("Y: {why}")),
    }
    Ok(report)
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.system;
        let _ = writeln!(out, "system {} on ({}), n = {}, s = {}", s.name, s.coords.join(", "), s.n, s.s);
        let _ = writeln!(out, "config: samples = {}, tol = {:e}, seed = {}", self.config.samples, self.config.tol, self.config.seed);
        let ct = &self.constant_type;
        let _ = writeln!(out, "strictly affine: {}", ct.strictly_affine);
        let _ = writeln!(out, "constant type: {}", if ct.passed { "yes" } else { "no" });
        for c in ct.checks.iter().filter(|c| !c.passed) {
            let at = c.witness.as_ref().map(|w| format!(" at {w}")).unwrap_or_default();
            let _ = writeln!(out, "  failed: {}{at}", c.name);
        }
        let _ = writeln!(out, "growth vector: {:?}", self.growth);
        let _ = writeln!(out, "bracket class: {}", self.bracket_class.label());
        if let Some(e) = self.elkin_case {
            let _ = writeln!(out, "classical case: {e}");
        }
        if let Some(c) = &self.case {
            let _ = write!(out, "case: {:?} case {}", c.theorem, c.case);
            if let Some(e) = c.epsilon {
                let _ = write!(out, ", epsilon = {e}");
            }
            if let Some(k) = c.pfaff_k {
                let _ = write!(out, ", pfaff k = {k}");
            }
            out.push('\n');
        }
        for inv in &self.invariants {
            let _ = writeln!(out, "  {} = {}    [{:.6}, {:.6}]", inv.name, inv.expr, inv.min, inv.max);
        }
        if let Some(points) = &self.points {
            for (i, p) in points.iter().enumerate() {
                let vals: Vec<String> = self.invariants.iter().map(|inv| format!("{:.6}", inv.values[i])).collect();
                let _ = writeln!(out, "  at {p}: {}", vals.join(", "));
            }
        }
        if let Some(r) = &self.rejection {
            let _ = writeln!(out, "rejected: {r}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

impl EquivCheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "X = {} (n = {}, s = {}), Y = {} (n = {}, s = {})", self.system_x.name, self.system_x.n, self.system_x.s, self.system_y.name, self.system_y.n, self.system_y.s);
        let _ = writeln!(out, "config: samples = {}, tol = {:e}, seed = {}", self.config.samples, self.config.tol, self.config.seed);
        if let Some(m) = &self.map {
            let _ = writeln!(out, "map: {:?}", m.verdict);
            for r in &m.residuals {
                let _ = writeln!(out, "  {}: max residual {:e} at {}", r.condition, r.max_residual, r.at);
            }
        }
        if let Some(sig) = &self.signature {
            let _ = writeln!(out, "signature: {:?} ({})", sig.verdict, sig.reason);
            if let Some(w) = &sig.witness {
                let _ = writeln!(out, "  witness {w}");
            }
        }
        if let Some(r) = &self.rejection {
            let _ = writeln!(out, "rejected: {r}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}
