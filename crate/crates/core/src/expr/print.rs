//! Printing in the parser's grammar, with the minimum of parentheses needed
//! for the parser to rebuild the same tree.

use std::fmt::{self, Write};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::Expr;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0, true)
    }
}

fn starts_negative(e: &Expr) -> bool {
    match e {
        Expr::Num(q) => q.is_negative(),
        Expr::Product(fs) => matches!(fs.first(), Some(Expr::Num(c)) if c.is_negative()),
        Expr::Quotient(n, _) => starts_negative(n),
        _ => false,
    }
}

fn base_prec(e: &Expr) -> u8 {
    match e {
        Expr::Sum(_) => 1,
        Expr::Product(_) | Expr::Quotient(..) => 2,
        Expr::Num(q) if !q.is_integer() => 2,
        Expr::Pow(..) => 3,
        _ => 4,
    }
}

/// Writes `e` in a slot that binds at least as tightly as `min_prec`.
/// `neg_ok` says whether a leading minus sign is acceptable in this slot.
fn write_expr<W: Write>(w: &mut W, e: &Expr, min_prec: u8, neg_ok: bool) -> fmt::Result {
    let prec = if starts_negative(e) && !neg_ok { 1 } else { base_prec(e) };
    if prec < min_prec {
        w.write_char('(')?;
        write_bare(w, e, true)?;
        return w.write_char(')');
    }
    write_bare(w, e, neg_ok)
}

fn negatable(e: &Expr) -> bool {
    matches!(e, Expr::Num(_) | Expr::Product(_)) && starts_negative(e)
}

/// The term whose negation, as built by the parser, is `e`.
fn magnitude(e: &Expr) -> Expr {
    match e {
        Expr::Num(q) => Expr::Num(-q),
        Expr::Product(fs) => {
            let Some(Expr::Num(c)) = fs.first() else { unreachable!() };
            let rest = &fs[1..];
            if c == &-BigRational::one() && !rest.is_empty() && !matches!(rest[0], Expr::Num(_)) {
                if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    Expr::Product(rest.to_vec())
                }
            } else {
                let mut out = vec![Expr::Num(-c)];
                out.extend_from_slice(rest);
                Expr::Product(out)
            }
        }
        _ => unreachable!(),
    }
}

fn write_bare<W: Write>(w: &mut W, e: &Expr, neg_ok: bool) -> fmt::Result {
    match e {
        Expr::Num(q) => write!(w, "{q}"),
        Expr::Var(s) | Expr::Param(s) => w.write_str(s),
        Expr::Apply(func, arg) => {
            write!(w, "{}(", func.name())?;
            write_expr(w, arg, 0, true)?;
            w.write_char(')')
        }
        Expr::Pow(b, k) => {
            write_expr(w, b, 4, false)?;
            write!(w, "^{k}")
        }
        Expr::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    write_expr(w, t, 2, true)?;
                } else if negatable(t) {
                    w.write_str(" - ")?;
                    write_expr(w, &magnitude(t), 2, false)?;
                } else {
                    w.write_str(" + ")?;
                    write_expr(w, t, 2, false)?;
                }
            }
            Ok(())
        }
        Expr::Product(fs) => {
            let mut rest: &[Expr] = fs;
            if let Some(Expr::Num(c)) = fs.first() {
                if c.is_negative() && neg_ok {
                    w.write_char('-')?;
                    rest = &fs[1..];
                    if c != &-BigRational::one() || rest.is_empty() || matches!(rest[0], Expr::Num(_)) {
                        write!(w, "{}", -c)?;
                    } else {
                        write_expr(w, &rest[0], 3, false)?;
                        rest = &rest[1..];
                    }
                    for f in rest {
                        w.write_char('*')?;
                        write_expr(w, f, 3, false)?;
                    }
                    return Ok(());
                }
            }
            for (i, f) in rest.iter().enumerate() {
                if i == 0 {
                    let min = if matches!(f, Expr::Product(_)) { 3 } else { 2 };
                    write_expr(w, f, min, false)?;
                } else {
                    w.write_char('*')?;
                    write_expr(w, f, 3, false)?;
                }
            }
            Ok(())
        }
        Expr::Quotient(n, d) => {
            write_expr(w, n, 2, neg_ok)?;
            w.write_char('/')?;
            write_expr(w, d, 3, false)
        }
    }
}
