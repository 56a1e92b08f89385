//! Floating-point evaluation with domain checking.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::poly::{Atom, AtomRef, Poly};
use super::{Chart, Expr, Func, Point, Scalar};

/// `|cos u|` below this counts as a pole of `tan`.
const TAN_POLE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("logarithm of a nonpositive value in `{0}`")]
    LogDomain(String),
    #[error("square root of a negative value in `{0}`")]
    SqrtDomain(String),
    #[error("tangent evaluated at a pole in `{0}`")]
    TanPole(String),
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("`{0}` is not assigned by the chart")]
    Unbound(String),
}

fn apply_checked(func: Func, x: f64, show: impl Fn() -> String) -> Result<f64, EvalError> {
    let v = match func {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => {
            if x.cos().abs() < TAN_POLE {
                return Err(EvalError::TanPole(show()));
            }
            x.tan()
        }
        Func::Exp => x.exp(),
        Func::Ln => {
            if x <= 0.0 {
                return Err(EvalError::LogDomain(show()));
            }
            x.ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err(EvalError::SqrtDomain(show()));
            }
            x.sqrt()
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(show()))
    }
}

fn check_den(v: f64, show: impl Fn() -> String) -> Result<f64, EvalError> {
    if v == 0.0 || !v.is_finite() || v.abs() < f64::MIN_POSITIVE {
        Err(EvalError::DivisionByZero(show()))
    } else {
        Ok(v)
    }
}

fn finite(v: f64, show: impl Fn() -> String) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(show()))
    }
}

impl Expr {
    /// Evaluates the tree as written at a point of `chart`.
    pub fn evaluate(&self, chart: &Chart, point: &Point) -> Result<f64, EvalError> {
        let show = || self.to_string();
        match self {
            Expr::Num(q) => Ok(q.to_f64().unwrap_or(f64::NAN)),
            Expr::Var(s) => chart.lookup_var(point, s).ok_or_else(|| EvalError::Unbound(s.to_string())),
            Expr::Param(s) => chart.lookup_param(point, s).ok_or_else(|| EvalError::Unbound(s.to_string())),
            Expr::Sum(xs) => {
                let mut acc = 0.0;
                for x in xs {
                    acc += x.evaluate(chart, point)?;
                }
                finite(acc, show)
            }
            Expr::Product(xs) => {
                let mut acc = 1.0;
                for x in xs {
                    acc *= x.evaluate(chart, point)?;
                }
                finite(acc, show)
            }
            Expr::Pow(b, k) => {
                let v = b.evaluate(chart, point)?;
                if *k < 0 {
                    check_den(v, || b.to_string())?;
                }
                finite(v.powi(*k), show)
            }
            Expr::Quotient(a, b) => {
                let n = a.evaluate(chart, point)?;
                let d = check_den(b.evaluate(chart, point)?, || b.to_string())?;
                finite(n / d, show)
            }
            Expr::Apply(f, a) => apply_checked(*f, a.evaluate(chart, point)?, show),
        }
    }
}

struct Evaluator<'a> {
    chart: &'a Chart,
    point: &'a Point,
    cache: HashMap<*const Atom, f64>,
}

impl Evaluator<'_> {
    fn atom(&mut self, a: &AtomRef) -> Result<f64, EvalError> {
        if let Some(v) = self.cache.get(&a.key()) {
            return Ok(*v);
        }
        let v = match a.atom() {
            Atom::Var(s) => self.chart.lookup_var(self.point, s).ok_or_else(|| EvalError::Unbound(s.to_string()))?,
            Atom::Param(s) => {
                self.chart.lookup_param(self.point, s).ok_or_else(|| EvalError::Unbound(s.to_string()))?
            }
            Atom::Apply(f, u) => {
                let x = self.scalar(u)?;
                apply_checked(*f, x, || Expr::Apply(*f, Box::new(u.to_expr())).to_string())?
            }
        };
        self.cache.insert(a.key(), v);
        Ok(v)
    }

    fn poly(&mut self, p: &Poly) -> Result<f64, EvalError> {
        let mut acc = 0.0;
        for (m, c) in &p.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (a, e) in &m.0 {
                let v = self.atom(a)?;
                if *e < 0 {
                    check_den(v, || atom_string(a))?;
                }
                t *= v.powi(*e);
            }
            acc += t;
        }
        Ok(acc)
    }

    fn scalar(&mut self, s: &Scalar) -> Result<f64, EvalError> {
        let n = self.poly(&s.num)?;
        let mut d = 1.0;
        for (f, m) in &s.den {
            let v = self.poly(f)?;
            check_den(v, || Scalar::from_poly(f.clone()).to_string())?;
            d *= v.powi(*m as i32);
        }
        let v = n / check_den(d, || s.to_string())?;
        finite(v, || s.to_string())
    }
}

fn atom_string(a: &AtomRef) -> String {
    Scalar::from_atom_ref(a.clone()).to_string()
}

impl Scalar {
    /// Evaluates at a point of `chart`.
    pub fn eval(&self, chart: &Chart, point: &Point) -> Result<f64, EvalError> {
        Evaluator { chart, point, cache: HashMap::new() }.scalar(self)
    }

    /// Evaluates several scalars at one point, sharing atom values.
    pub fn eval_many(items: &[&Scalar], chart: &Chart, point: &Point) -> Result<Vec<f64>, EvalError> {
        let mut ev = Evaluator { chart, point, cache: HashMap::new() };
        items.iter().map(|s| ev.scalar(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn invariant_formula_value() {
        let chart = Chart::new("X", &["x1", "x2"]).unwrap();
        let j = Scalar::parse("x2^2", &chart).unwrap();
        let t = Scalar::var("x2").mul(&j.diff("x2")).sub(&j);
        assert_eq!(t.eval(&chart, &chart.point(vec![0.0, 3.0], vec![])).unwrap(), 9.0);
    }

    #[test]
    fn pole_reports_subexpression() {
        let chart = Chart::new("X", &["psi"]).unwrap();
        let e = parse("1/sin(psi)", &chart).unwrap();
        let err = e.evaluate(&chart, &chart.point(vec![0.0], vec![])).unwrap_err();
        assert_eq!(err, EvalError::DivisionByZero("sin(psi)".into()));
        let s = Scalar::from_expr(&e).unwrap();
        assert!(matches!(s.eval(&chart, &chart.point(vec![0.0], vec![])), Err(EvalError::DivisionByZero(_))));
        let ln = parse("ln(psi - 1)", &chart).unwrap();
        assert!(matches!(ln.evaluate(&chart, &chart.point(vec![0.5], vec![])), Err(EvalError::LogDomain(_))));
    }

    #[test]
    fn rational_constant() {
        let chart = Chart::new("X", &["x"]).unwrap();
        let e = parse("2/3", &chart).unwrap();
        let v = e.evaluate(&chart, &chart.point(vec![0.1], vec![])).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }
}
