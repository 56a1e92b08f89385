//! The `.paf` system file format.
//!
//! ```text
//! # comment
//! [chart]
//! name = X
//! coords = x1, x2, x3
//! box.x2 = 0.5, 2
//! param.c = 0.5, 2, nonzero
//!
//! [drift]
//! x1 = x2
//! x2 = x3
//! x3 = 0
//!
//! [control u]
//! x1 = 0
//! x2 = 0
//! x3 = 1
//!
//! [pfaff]            # optional, corank-one systems
//! y1 = x1
//! ...
//!
//! [map]              # optional, equivalence mode
//! forward.<target coordinate> = expression in source coordinates
//! inverse.<source coordinate> = expression in target coordinates
//!
//! [system2]          # following chart/drift/control sections describe Y
//! ```
//!
//! Every vector field lists every coordinate exactly once. Coordinates
//! without a `box.` line use `[-1, 1]`. When `[system2]` has no `[chart]` of
//! its own it reuses the first chart.

use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::{Chart, ExprError, Interval, Scalar};
use crate::flags::AffineDistribution;
use crate::forms::{DiffeoMap, VectorField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Expression { line: usize, column: usize, message: String },
    #[error("[{section}] has {got} components, the chart has dimension {expected}")]
    DimensionMismatch { section: String, expected: usize, got: usize },
    #[error("missing section [{0}]")]
    Missing(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub nonzero: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartDecl {
    pub name: String,
    pub coords: Vec<String>,
    /// `(coordinate, lo, hi)` for the coordinates with an explicit box.
    pub boxes: Vec<(String, f64, f64)>,
    pub params: Vec<ParamDecl>,
}

/// An expression with the place it came from, for error reporting.
#[derive(Clone, Debug)]
pub struct Located {
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Located {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Located {
    fn new(text: &str) -> Self {
        Self { text: text.to_string(), line: 0, column: 1 }
    }

    fn parse(&self, chart: &Chart) -> Result<Scalar, SpecError> {
        Scalar::parse(&self.text, chart).map_err(|e| match e {
            ExprError::Parse(p) => SpecError::Expression { line: self.line, column: self.column + p.column - 1, message: p.message },
            e => SpecError::Expression { line: self.line, column: self.column, message: e.to_string() },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemDecl {
    pub chart: ChartDecl,
    /// Components in coordinate order.
    pub drift: Vec<Located>,
    pub controls: Vec<(String, Vec<Located>)>,
    pub pfaff: Option<Vec<Located>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapDecl {
    /// In target coordinate order.
    pub forward: Vec<Located>,
    /// In source coordinate order.
    pub inverse: Vec<Located>,
}

/// A parsed `.paf` file.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecFile {
    pub system: SystemDecl,
    pub map: Option<MapDecl>,
    pub second: Option<SystemDecl>,
}

/// A system with its chart and distribution built.
#[derive(Clone, Debug, PartialEq)]
pub struct System {
    pub decl: SystemDecl,
    pub chart: Chart,
    pub distribution: AffineDistribution,
    pub pfaff: Option<Vec<Scalar>>,
}

/// A validated specification: the first system and, in equivalence mode,
/// the map and the second system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub file: SpecFile,
    pub system: System,
    pub map: Option<DiffeoMap>,
    pub second: Option<System>,
}

#[derive(Default)]
struct RawSection {
    header: String,
    line: usize,
    entries: Vec<(String, Located)>,
}

fn syntax(line: usize, message: impl Into<String>) -> SpecError {
    SpecError::Syntax { line, message: message.into() }
}

fn split_sections(text: &str) -> Result<Vec<RawSection>, SpecError> {
    let mut out: Vec<RawSection> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let header = rest.strip_suffix(']').ok_or_else(|| syntax(line, "unterminated section header"))?;
            let header = header.split_whitespace().collect::<Vec<_>>().join(" ");
            out.push(RawSection { header, line, entries: Vec::new() });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| syntax(line, "expected `key = value`"))?;
        let section = out.last_mut().ok_or_else(|| syntax(line, "entry before the first section"))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(syntax(line, "empty key"));
        }
        if section.entries.iter().any(|(k, _)| *k == key) {
            return Err(syntax(line, format!("duplicate key `{key}` in [{}]", section.header)));
        }
        let offset = content.find('=').expect("split above") + 1;
        let lead = value.len() - value.trim_start().len();
        let column = content[..offset + lead].chars().count() + 1;
        section.entries.push((key, Located { text: value.trim().to_string(), line, column }));
    }
    Ok(out)
}

fn number(loc: &Located, what: &str) -> Result<f64, SpecError> {
    loc.text.trim().parse::<f64>().map_err(|_| syntax(loc.line, format!("{what}: `{}` is not a number", loc.text.trim())))
}

fn parse_chart(sec: &RawSection) -> Result<ChartDecl, SpecError> {
    let mut decl = ChartDecl { name: "X".into(), coords: Vec::new(), boxes: Vec::new(), params: Vec::new() };
    for (key, loc) in &sec.entries {
        if key == "name" {
            decl.name = loc.text.clone();
        } else if key == "coords" {
            decl.coords = loc.text.split(',').map(|c| c.trim().to_string()).collect();
        } else if let Some(v) = key.strip_prefix("box.") {
            let parts: Vec<&str> = loc.text.split(',').collect();
            if parts.len() != 2 {
                return Err(syntax(loc.line, format!("box.{v} needs `lo, hi`")));
            }
            let lo = number(&Located { text: parts[0].into(), ..loc.clone() }, key)?;
            let hi = number(&Located { text: parts[1].into(), ..loc.clone() }, key)?;
            decl.boxes.push((v.to_string(), lo, hi));
        } else if let Some(p) = key.strip_prefix("param.") {
            let parts: Vec<&str> = loc.text.split(',').map(str::trim).collect();
            let nonzero = match parts.len() {
                2 => false,
                3 if parts[2] == "nonzero" => true,
                _ => return Err(syntax(loc.line, format!("param.{p} needs `lo, hi` or `lo, hi, nonzero`"))),
            };
            let lo = number(&Located { text: parts[0].into(), ..loc.clone() }, key)?;
            let hi = number(&Located { text: parts[1].into(), ..loc.clone() }, key)?;
            decl.params.push(ParamDecl { name: p.to_string(), lo, hi, nonzero });
        } else {
            return Err(syntax(loc.line, format!("unknown chart key `{key}`")));
        }
    }
    if decl.coords.is_empty() || decl.coords.iter().any(String::is_empty) {
        return Err(syntax(sec.line, "[chart] needs `coords = a, b, ...`"));
    }
    Ok(decl)
}

/// Orders keyed components by `names`; every name must appear exactly once.
fn ordered(sec: &RawSection, names: &[String], prefix: &str) -> Result<Vec<Located>, SpecError> {
    let mut out = Vec::with_capacity(names.len());
    for (key, loc) in &sec.entries {
        let bare = key.strip_prefix(prefix).unwrap_or("");
        if !key.starts_with(prefix) || !names.iter().any(|n| n == bare) {
            return Err(syntax(loc.line, format!("`{key}` is not one of {prefix}{}", names.join(&format!(", {prefix}")))));
        }
    }
    for n in names {
        let key = format!("{prefix}{n}");
        if let Some((_, loc)) = sec.entries.iter().find(|(k, _)| *k == key) {
            out.push(loc.clone());
        }
    }
    if out.len() != names.len() {
        return Err(SpecError::DimensionMismatch { section: sec.header.clone(), expected: names.len(), got: out.len() });
    }
    Ok(out)
}

#[derive(Default)]
struct Builder<'a> {
    chart: Option<&'a RawSection>,
    drift: Option<&'a RawSection>,
    controls: Vec<&'a RawSection>,
    pfaff: Option<&'a RawSection>,
}

impl<'a> Builder<'a> {
    fn build(self, fallback: Option<&ChartDecl>, which: &str) -> Result<SystemDecl, SpecError> {
        let chart = match (self.chart, fallback) {
            (Some(c), _) => parse_chart(c)?,
            (None, Some(c)) => c.clone(),
            (None, None) => return Err(SpecError::Missing(format!("chart] of [{which}"))),
        };
        let drift = self.drift.ok_or_else(|| SpecError::Missing(format!("drift] of [{which}")))?;
        let drift = ordered(drift, &chart.coords, "")?;
        if self.controls.is_empty() {
            return Err(SpecError::Missing(format!("control <name>] of [{which}")));
        }
        let controls = self
            .controls
            .iter()
            .map(|s| Ok((s.header["control ".len()..].to_string(), ordered(s, &chart.coords, "")?)))
            .collect::<Result<Vec<_>, SpecError>>()?;
        let pfaff = match self.pfaff {
            Some(sec) => {
                let names: Vec<String> = (1..=chart.coords.len()).map(|i| format!("y{i}")).collect();
                Some(ordered(sec, &names, "")?)
            }
            None => None,
        };
        Ok(SystemDecl { chart, drift, controls, pfaff })
    }
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let sections = split_sections(text)?;
        let mut builders = vec![Builder::default()];
        let mut map_sec: Option<&RawSection> = None;
        for sec in &sections {
            let dup = || syntax(sec.line, format!("duplicate section [{}]", sec.header));
            if sec.header == "system2" {
                if builders.len() > 1 {
                    return Err(dup());
                }
                if let Some((_, loc)) = sec.entries.first() {
                    return Err(syntax(loc.line, "[system2] takes no entries"));
                }
                builders.push(Builder::default());
                continue;
            }
            if sec.header == "map" {
                if map_sec.replace(sec).is_some() {
                    return Err(dup());
                }
                continue;
            }
            let target = builders.last_mut().expect("at least one system");
            let slot = match sec.header.as_str() {
                "chart" => &mut target.chart,
                "drift" => &mut target.drift,
                "pfaff" => &mut target.pfaff,
                h if h.starts_with("control ") => {
                    if target.controls.iter().any(|c| c.header == sec.header) {
                        return Err(dup());
                    }
                    target.controls.push(sec);
                    continue;
                }
                h => return Err(syntax(sec.line, format!("unknown section [{h}]"))),
            };
            if slot.replace(sec).is_some() {
                return Err(dup());
            }
        }
        let mut builders = builders.into_iter();
        let first = builders.next().expect("at least one system");
        let second = builders.next();
        let system = first.build(None, "system")?;
        let second = second.map(|b| b.build(Some(&system.chart), "system2")).transpose()?;
        let map = match map_sec {
            None => None,
            Some(sec) => {
                let target = &second.as_ref().unwrap_or(&system).chart.coords;
                let mut fwd = RawSection { header: "map".into(), line: sec.line, entries: Vec::new() };
                let mut inv = RawSection { header: "map".into(), line: sec.line, entries: Vec::new() };
                for (k, v) in &sec.entries {
                    if k.starts_with("forward.") {
                        fwd.entries.push((k.clone(), v.clone()));
                    } else if k.starts_with("inverse.") {
                        inv.entries.push((k.clone(), v.clone()));
                    } else {
                        return Err(syntax(v.line, format!("map keys are forward.<coordinate> or inverse.<coordinate>, got `{k}`")));
                    }
                }
                Some(MapDecl { forward: ordered(&fwd, target, "forward.")?, inverse: ordered(&inv, &system.chart.coords, "inverse.")? })
            }
        };
        Ok(Self { system, map, second })
    }

    /// Canonical text; parsing it gives back an equal `SpecFile`.
    pub fn print(&self) -> String {
        let mut out = String::new();
        print_system(&mut out, &self.system);
        if let Some(map) = &self.map {
            let target = &self.second.as_ref().unwrap_or(&self.system).chart.coords;
            out.push_str("\n[map]\n");
            for (c, e) in target.iter().zip(&map.forward) {
                let _ = writeln!(out, "forward.{c} = {}", e.text);
            }
            for (c, e) in self.system.chart.coords.iter().zip(&map.inverse) {
                let _ = writeln!(out, "inverse.{c} = {}", e.text);
            }
        }
        if let Some(second) = &self.second {
            out.push_str("\n[system2]\n");
            print_system(&mut out, second);
        }
        out
    }

    /// Builds charts, distributions and the map.
    pub fn validate(self) -> Result<SystemSpec, SpecError> {
        let system = build_system(&self.system)?;
        let second = self.second.as_ref().map(build_system).transpose()?;
        let map = match &self.map {
            None => None,
            Some(m) => {
                let target = second.as_ref().map_or(&system.chart, |s| &s.chart);
                let fwd = m.forward.iter().map(|e| e.parse(&system.chart)).collect::<Result<Vec<_>, _>>()?;
                let inv = m.inverse.iter().map(|e| e.parse(target)).collect::<Result<Vec<_>, _>>()?;
                Some(DiffeoMap::new(&system.chart, target, fwd, inv).map_err(|e| SpecError::Invalid(format!("[map]: {e}")))?)
            }
        };
        Ok(SystemSpec { file: self, system, map, second })
    }
}

fn print_system(out: &mut String, s: &SystemDecl) {
    let c = &s.chart;
    let _ = writeln!(out, "[chart]\nname = {}\ncoords = {}", c.name, c.coords.join(", "));
    for (v, lo, hi) in &c.boxes {
        let _ = writeln!(out, "box.{v} = {lo}, {hi}");
    }
    for p in &c.params {
        let _ = writeln!(out, "param.{} = {}, {}{}", p.name, p.lo, p.hi, if p.nonzero { ", nonzero" } else { "" });
    }
    let field = |out: &mut String, header: &str, comps: &[Located], keys: &[String]| {
        let _ = writeln!(out, "\n[{header}]");
        for (k, e) in keys.iter().zip(comps) {
            let _ = writeln!(out, "{k} = {}", e.text);
        }
    };
    field(out, "drift", &s.drift, &c.coords);
    for (name, comps) in &s.controls {
        field(out, &format!("control {name}"), comps, &c.coords);
    }
    if let Some(y) = &s.pfaff {
        let keys: Vec<String> = (1..=y.len()).map(|i| format!("y{i}")).collect();
        field(out, "pfaff", y, &keys);
    }
}

fn build_chart(decl: &ChartDecl) -> Result<Chart, SpecError> {
    let invalid = |e: ExprError| SpecError::Invalid(format!("chart {}: {e}", decl.name));
    let coords: Vec<&str> = decl.coords.iter().map(String::as_str).collect();
    let mut bounds = vec![Interval::new(-1.0, 1.0).map_err(invalid)?; coords.len()];
    for (v, lo, hi) in &decl.boxes {
        let i = coords.iter().position(|c| c == v).ok_or_else(|| SpecError::Invalid(format!("box for unknown coordinate `{v}`")))?;
        bounds[i] = Interval::new(*lo, *hi).map_err(invalid)?;
    }
    let mut chart = Chart::with_box(&decl.name, &coords, &bounds).map_err(invalid)?;
    for p in &decl.params {
        chart = chart.with_param(&p.name, Interval::new(p.lo, p.hi).map_err(invalid)?, p.nonzero).map_err(invalid)?;
    }
    Ok(chart)
}

fn build_system(decl: &SystemDecl) -> Result<System, SpecError> {
    let chart = build_chart(&decl.chart)?;
    let field = |comps: &[Located], what: &str| -> Result<VectorField, SpecError> {
        let c = comps.iter().map(|e| e.parse(&chart)).collect::<Result<Vec<_>, _>>()?;
        VectorField::new(&chart, c).map_err(|e| SpecError::Invalid(format!("{what}: {e}")))
    };
    let drift = field(&decl.drift, "drift")?;
    let gens = decl.controls.iter().map(|(n, c)| field(c, &format!("control {n}"))).collect::<Result<Vec<_>, _>>()?;
    let distribution = AffineDistribution::new(&chart, drift, gens).map_err(|e| SpecError::Invalid(e.to_string()))?;
    let pfaff = decl.pfaff.as_ref().map(|y| y.iter().map(|e| e.parse(&chart)).collect::<Result<Vec<_>, _>>()).transpose()?;
    Ok(System { decl: decl.clone(), chart, distribution, pfaff })
}

impl SystemSpec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        SpecFile::parse(text)?.validate()
    }

    /// Builds a spec from a single system in code.
    pub fn single(chart: ChartDecl, drift: &[&str], controls: &[(&str, &[&str])]) -> Result<Self, SpecError> {
        let loc = |v: &[&str]| v.iter().map(|t| Located::new(t)).collect::<Vec<_>>();
        let system = SystemDecl {
            chart,
            drift: loc(drift),
            controls: controls.iter().map(|(n, c)| (n.to_string(), loc(c))).collect(),
            pfaff: None,
        };
        for (what, len) in
            std::iter::once(("drift".to_string(), system.drift.len())).chain(system.controls.iter().map(|(n, c)| (format!("control {n}"), c.len())))
        {
            if len != system.chart.coords.len() {
                return Err(SpecError::DimensionMismatch { section: what, expected: system.chart.coords.len(), got: len });
            }
        }
        SpecFile { system, map: None, second: None }.validate()
    }
}
