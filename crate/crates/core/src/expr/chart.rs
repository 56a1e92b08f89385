use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::{ExprError, Symbol};

/// Closed sampling interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ExprError> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(ExprError::InvalidChart(format!(
                "sampling interval [{lo}, {hi}] must have positive length"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + rng.random::<f64>() * self.width()
    }
}

/// A named constant with its own sampling interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSpec {
    #[serde(serialize_with = "ser_symbol")]
    pub name: Symbol,
    pub interval: Interval,
    /// Sampling avoids a neighbourhood of zero when set.
    pub nonzero: bool,
}

fn ser_symbol<S: serde::Serializer>(s: &Symbol, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s)
}

/// Local coordinates together with a sampling box and named parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    name: String,
    variables: Vec<Symbol>,
    bounds: Vec<Interval>,
    params: Vec<ParamSpec>,
}

impl Chart {
    /// Chart whose sampling box is `[-1, 1]` in every coordinate.
    pub fn new(name: &str, variables: &[&str]) -> Result<Self, ExprError> {
        let bounds = vec![Interval { lo: -1.0, hi: 1.0 }; variables.len()];
        Self::with_box(name, variables, &bounds)
    }

    pub fn with_box(name: &str, variables: &[&str], bounds: &[Interval]) -> Result<Self, ExprError> {
        if variables.is_empty() {
            return Err(ExprError::InvalidChart("a chart needs at least one coordinate".into()));
        }
        if variables.len() != bounds.len() {
            return Err(ExprError::InvalidChart(format!(
                "{} coordinates but {} box intervals",
                variables.len(),
                bounds.len()
            )));
        }
        let chart = Self {
            name: name.to_string(),
            variables: variables.iter().map(|v| Symbol::from(*v)).collect(),
            bounds: bounds.iter().map(|b| Interval::new(b.lo, b.hi)).collect::<Result<_, _>>()?,
            params: Vec::new(),
        };
        chart.check_names()?;
        Ok(chart)
    }

    /// Adds a parameter; names must stay unique across coordinates and parameters.
    pub fn with_param(mut self, name: &str, interval: Interval, nonzero: bool) -> Result<Self, ExprError> {
        let interval = Interval::new(interval.lo, interval.hi)?;
        self.params.push(ParamSpec { name: Symbol::from(name), interval, nonzero });
        self.check_names()?;
        Ok(self)
    }

    /// Same coordinates and parameters under a new box.
    pub fn rebox(&self, bounds: &[Interval]) -> Result<Self, ExprError> {
        if bounds.len() != self.dim() {
            return Err(ExprError::InvalidChart("box dimension mismatch".into()));
        }
        let mut out = self.clone();
        out.bounds = bounds.iter().map(|b| Interval::new(b.lo, b.hi)).collect::<Result<_, _>>()?;
        Ok(out)
    }

    fn check_names(&self) -> Result<(), ExprError> {
        let mut seen: Vec<&str> = Vec::new();
        for name in self.variables.iter().chain(self.params.iter().map(|p| &p.name)) {
            if !is_identifier(name) {
                return Err(ExprError::InvalidChart(format!("`{name}` is not a valid identifier")));
            }
            if super::Func::from_name(name).is_some() {
                return Err(ExprError::InvalidChart(format!("`{name}` is reserved for a function")));
            }
            if seen.contains(&&**name) {
                return Err(ExprError::InvalidChart(format!("duplicate name `{name}`")));
            }
            seen.push(name);
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Symbol] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &Symbol {
        &self.variables[i]
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| &**v == name)
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| &*p.name == name)
    }

    /// Same coordinate names and parameter names.
    pub fn compatible(&self, other: &Chart) -> bool {
        self.variables == other.variables
            && self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|(a, b)| a.name == b.name)
    }

    /// Uniform draw from the box and parameter intervals.
    pub fn draw_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let vars = self.bounds.iter().map(|b| b.draw(rng)).collect();
        let params = self
            .params
            .iter()
            .map(|p| loop {
                let v = p.interval.draw(rng);
                if !p.nonzero || v.abs() > 1e-2 * p.interval.width() {
                    break v;
                }
            })
            .collect();
        Point { vars, params }
    }

    /// Point with the given coordinates and parameter values.
    pub fn point(&self, vars: Vec<f64>, params: Vec<f64>) -> Point {
        assert_eq!(vars.len(), self.dim(), "coordinate count");
        assert_eq!(params.len(), self.params.len(), "parameter count");
        Point { vars, params }
    }

    pub(crate) fn lookup_var(&self, point: &Point, name: &Symbol) -> Option<f64> {
        self.variables
            .iter()
            .position(|v| Arc::ptr_eq(v, name) || v == name)
            .map(|i| point.vars[i])
    }

    pub(crate) fn lookup_param(&self, point: &Point, name: &Symbol) -> Option<f64> {
        self.params
            .iter()
            .position(|p| Arc::ptr_eq(&p.name, name) || &p.name == name)
            .map(|i| point.params[i])
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, v) in self.variables.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Numeric assignment of every coordinate and parameter of a chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point {
    pub vars: Vec<f64>,
    pub params: Vec<f64>,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v:.6}")?;
        }
        if !self.params.is_empty() {
            write!(f, "; ")?;
            for (i, v) in self.params.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v:.6}")?;
            }
        }
        write!(f, ")")
    }
}
