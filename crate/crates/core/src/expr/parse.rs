//! Recursive-descent parser for scalar expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' '-'? integer)?
//! base   := number | identifier | fn '(' expr ')' | '(' expr ')'
//! ```
//!
//! Unary minus applies to a whole factor, so `-x^2` reads as `-(x^2)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{Chart, Expr, Func};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} at column {column}")]
pub struct ParseError {
    pub message: String,
    /// One-based character column.
    pub column: usize,
}

/// Parses `text` against the coordinates and parameters of `chart`.
pub fn parse(text: &str, chart: &Chart) -> Result<Expr, ParseError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, chart };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(e)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    chart: &'a Chart,
}

impl Parser<'_> {
    fn error(&self, message: String) -> ParseError {
        ParseError { message, column: self.pos + 1 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                let t = self.term()?;
                terms.push(negate(t));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let (first, negated) = self.factor()?;
        let mut factors = vec![first];
        let mut splice = negated;
        loop {
            if self.eat('*') {
                let (f, _) = self.factor()?;
                if splice {
                    // `-a*b` continues the product started by the sign.
                    if let Some(Expr::Product(inner)) = factors.pop() {
                        factors = inner;
                    }
                    splice = false;
                }
                factors.push(f);
            } else if self.eat('/') {
                let (d, _) = self.factor()?;
                splice = false;
                let n = collapse(std::mem::take(&mut factors));
                factors.push(match (n, d) {
                    (Expr::Num(a), Expr::Num(b)) if !b.is_zero() => Expr::Num(a / b),
                    (n, d) => Expr::Quotient(Box::new(n), Box::new(d)),
                });
            } else {
                break;
            }
        }
        Ok(collapse(factors))
    }

    /// Returns the factor and whether it is a product created by a leading minus.
    fn factor(&mut self) -> Result<(Expr, bool), ParseError> {
        if self.eat('-') {
            let (inner, _) = self.factor()?;
            let neg = negate(inner);
            let is_prod = matches!(neg, Expr::Product(_));
            return Ok((neg, is_prod));
        }
        let base = self.base()?;
        if self.eat('^') {
            let negative = self.eat('-');
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected an integer exponent".into()));
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let k: i32 = digits.parse().map_err(|_| ParseError {
                message: "exponent out of range".into(),
                column: start + 1,
            })?;
            if k == 0 {
                return Err(ParseError { message: "exponent must be nonzero".into(), column: start + 1 });
            }
            return Ok((Expr::Pow(Box::new(base), if negative { -k } else { k }), false));
        }
        Ok((base, false))
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input".into())),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.identifier(),
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut int = String::new();
        let mut frac = String::new();
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            int.push(self.chars[self.pos]);
            self.pos += 1;
        }
        if self.pos < self.chars.len() && self.chars[self.pos] == '.' {
            self.pos += 1;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                frac.push(self.chars[self.pos]);
                self.pos += 1;
            }
        }
        if int.is_empty() && frac.is_empty() {
            return Err(ParseError { message: "malformed number".into(), column: start + 1 });
        }
        let mut exp: i64 = 0;
        if self.pos < self.chars.len() && matches!(self.chars[self.pos], 'e' | 'E') {
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1;
            if self.pos < self.chars.len() && matches!(self.chars[self.pos], '+' | '-') {
                if self.chars[self.pos] == '-' {
                    sign = -1;
                }
                self.pos += 1;
            }
            let ds = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if ds == self.pos {
                // Not an exponent; leave `e` for the identifier rule to reject.
                self.pos = save;
            } else {
                let digits: String = self.chars[ds..self.pos].iter().collect();
                exp = sign * digits.parse::<i64>().map_err(|_| ParseError {
                    message: "exponent out of range".into(),
                    column: ds + 1,
                })?;
                if exp.abs() > 400 {
                    return Err(ParseError { message: "exponent out of range".into(), column: ds + 1 });
                }
            }
        }
        let digits = format!("{int}{frac}");
        let mantissa: BigInt = digits.parse().unwrap_or_default();
        let scale = exp - frac.len() as i64;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Expr::Num(value))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.chars.len() && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_') {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        if let Some(func) = Func::from_name(&name) {
            if !self.eat('(') {
                return Err(self.error(format!("expected `(` after function `{name}`")));
            }
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected `)`".into()));
            }
            return Ok(Expr::Apply(func, Box::new(arg)));
        }
        if let Some(i) = self.chart.var_index(&name) {
            return Ok(Expr::Var(self.chart.variable(i).clone()));
        }
        if let Some(i) = self.chart.param_index(&name) {
            return Ok(Expr::Param(self.chart.params()[i].name.clone()));
        }
        Err(ParseError { message: format!("unknown identifier `{name}`"), column: start + 1 })
    }
}

fn collapse(mut factors: Vec<Expr>) -> Expr {
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Product(factors)
    }
}

/// Negation in the shape the printer produces for negative terms.
pub(crate) fn negate(e: Expr) -> Expr {
    match e {
        Expr::Num(q) => Expr::Num(-q),
        Expr::Product(mut fs) => {
            if let Some(Expr::Num(c)) = fs.first_mut() {
                *c = -c.clone();
            } else {
                fs.insert(0, Expr::Num(-BigRational::one()));
            }
            Expr::Product(fs)
        }
        other => Expr::Product(vec![Expr::Num(-BigRational::one()), other]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Symbol;

    fn chart() -> Chart {
        Chart::new("X", &["x1", "x2", "x3", "psi"])
            .unwrap()
            .with_param("c", super::super::Interval::new(0.5, 2.0).unwrap(), true)
            .unwrap()
    }

    fn p(text: &str) -> Expr {
        parse(text, &chart()).unwrap()
    }

    #[test]
    fn product_with_sum() {
        assert_eq!(
            p("x2*(1 + x3^2)"),
            Expr::Product(vec![
                Expr::var("x2"),
                Expr::Sum(vec![Expr::int(1), Expr::Pow(Box::new(Expr::var("x3")), 2)])
            ])
        );
    }

    #[test]
    fn unknown_identifiers_rejected() {
        let err = parse("csc(psi)", &chart()).unwrap_err();
        assert!(err.message.contains("unknown identifier `csc`"), "{err}");
        assert_eq!(err.column, 1);
        let err = parse("dx1", &chart()).unwrap_err();
        assert!(err.message.contains("unknown identifier `dx1`"));
        let err = parse("x1 + y", &chart()).unwrap_err();
        assert_eq!(err.column, 6);
    }

    #[test]
    fn numbers_are_exact() {
        assert_eq!(p("0.25"), Expr::Num(BigRational::new(1.into(), 4.into())));
        assert_eq!(p("2/3"), Expr::Num(BigRational::new(2.into(), 3.into())));
        assert_eq!(p("1.5e-3"), Expr::Num(BigRational::new(3.into(), 2000.into())));
    }

    #[test]
    fn unary_minus_binds_to_factor() {
        assert_eq!(
            p("-x1^2"),
            Expr::Product(vec![Expr::int(-1), Expr::Pow(Box::new(Expr::var("x1")), 2)])
        );
        assert_eq!(p("-x1*x2"), Expr::Product(vec![Expr::int(-1), Expr::var("x1"), Expr::var("x2")]));
        assert_eq!(p("-2*x1"), Expr::Product(vec![Expr::int(-2), Expr::var("x1")]));
    }

    #[test]
    fn params_and_functions() {
        assert_eq!(
            p("c*cos(psi)"),
            Expr::Product(vec![
                Expr::Param(Symbol::from("c")),
                Expr::Apply(Func::Cos, Box::new(Expr::var("psi")))
            ])
        );
        assert!(parse("sin x1", &chart()).is_err());
        assert!(parse("x1^0", &chart()).is_err());
        assert!(parse("(x1", &chart()).is_err());
        assert_eq!(p("x1^-2"), Expr::Pow(Box::new(Expr::var("x1")), -2));
    }
}
