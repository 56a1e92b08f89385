use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Atom, AtomRef, Monomial, Poly};
use super::{parse, Chart, Expr, ExprError, Func, Symbol};

/// Canonical rational function in coordinates, parameters and function applications.
///
/// The numerator is an expanded Laurent polynomial. The denominator is a
/// multiset of multi-term polynomial factors, each free of monomial content
/// and scaled to leading coefficient one. Numerator and factors are kept
/// relatively reduced by exact division, `sqrt(u)^k` is reduced to
/// `|k| <= 1`, and applications of elementary functions to constants that
/// have an exact value are folded. Equality of the functions represented is
/// decided by the zero test on the difference, which is exact whenever no
/// function application occurs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Scalar {
    pub(crate) num: Poly,
    pub(crate) den: BTreeMap<Poly, u32>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_poly(Poly::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::from_rational(BigRational::new(n.into(), d.into()))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Scalar { num: Poly::constant(q), den: BTreeMap::new() }
    }

    pub fn var(name: &str) -> Self {
        Scalar::from_atom(Atom::Var(Symbol::from(name)))
    }

    pub fn param(name: &str) -> Self {
        Scalar::from_atom(Atom::Param(Symbol::from(name)))
    }

    /// Parses `text` over `chart` and brings it to canonical form.
    pub fn parse(text: &str, chart: &Chart) -> Result<Self, ExprError> {
        Scalar::from_expr(&parse(text, chart)?)
    }

    pub(crate) fn from_atom(atom: Atom) -> Self {
        Scalar::from_atom_ref(AtomRef::new(atom))
    }

    pub(crate) fn from_atom_ref(atom: AtomRef) -> Self {
        Scalar::from_poly(Poly::term(Monomial::atom(atom, 1), BigRational::one()))
    }

    pub(crate) fn from_poly(p: Poly) -> Self {
        Scalar::build(p, BTreeMap::new())
    }

    /// Normalizes a numerator over a factored denominator.
    fn build(num: Poly, mut den: BTreeMap<Poly, u32>) -> Self {
        if num.is_zero() {
            return Scalar::zero();
        }
        if has_reducible_sqrt(&num) {
            let expanded = reduce_sqrt(&num);
            if den.is_empty() {
                return expanded;
            }
            let inv_den = Scalar { num: Poly::one(), den };
            return expanded.mul(&inv_den);
        }
        let mut num = num;
        for (f, m) in den.iter_mut() {
            while *m > 0 {
                match num.exact_div(f) {
                    Some(q) => {
                        num = q;
                        *m -= 1;
                    }
                    None => break,
                }
            }
        }
        den.retain(|_, m| *m > 0);
        Scalar { num, den }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The value when the scalar is an exact rational constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_rational().is_some()
    }

    /// Whether only coordinates and parameters occur (no function applications).
    pub fn is_rational(&self) -> bool {
        self.all_atoms().iter().all(|a| !matches!(a.atom(), Atom::Apply(..)))
    }

    pub(crate) fn all_atoms(&self) -> Vec<AtomRef> {
        let mut set: BTreeSet<AtomRef> = self.num.atoms().into_iter().collect();
        for f in self.den.keys() {
            set.extend(f.atoms());
        }
        set.into_iter().collect()
    }

    /// Coordinate names occurring anywhere, including inside applications.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in self.all_atoms() {
            match a.atom() {
                Atom::Var(s) => {
                    out.insert(s.to_string());
                }
                Atom::Param(_) => {}
                Atom::Apply(_, u) => out.extend(u.variables()),
            }
        }
        out
    }

    /// Number of terms in numerator and denominator factors; a size measure.
    pub fn term_count(&self) -> usize {
        self.num.len() + self.den.keys().map(Poly::len).sum::<usize>()
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return Scalar::build(self.num.add(&other.num), self.den.clone());
        }
        let mut lcm = self.den.clone();
        for (f, m) in &other.den {
            let slot = lcm.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(*m);
        }
        let lift = |s: &Scalar| {
            let mut p = s.num.clone();
            for (f, m) in &lcm {
                let have = s.den.get(f).copied().unwrap_or(0);
                if *m > have {
                    p = p.mul(&f.pow(m - have));
                }
            }
            p
        };
        let num = lift(self).add(&lift(other));
        Scalar::build(num, lcm)
    }

    pub fn neg(&self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Scalar::zero();
        }
        if let Some(c) = self.as_rational() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_rational() {
            return self.scale(&c);
        }
        let mut den = self.den.clone();
        for (f, m) in &other.den {
            *den.entry(f.clone()).or_insert(0) += m;
        }
        Scalar::build(self.num.mul(&other.num), den)
    }

    pub fn scale(&self, c: &BigRational) -> Scalar {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Scalar, ExprError> {
        if self.is_exact_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let (c, content, factor) = self.num.split_content();
        let mut num = Poly::one();
        for (f, m) in &self.den {
            num = num.mul(&f.pow(*m));
        }
        let num = num.mul_monomial(&content.inv(), &c.recip());
        let mut den = BTreeMap::new();
        if let Some(f) = factor {
            den.insert(f, 1);
        }
        Ok(Scalar::build(num, den))
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, k: i32) -> Result<Scalar, ExprError> {
        if k == 0 {
            return Ok(Scalar::one());
        }
        if k < 0 {
            if self.is_exact_zero() {
                return Err(ExprError::ZeroToNegativePower);
            }
            return self.recip()?.powi(-k);
        }
        if self.num.len() == 1 && self.den.is_empty() {
            let (m, c) = self.num.terms.iter().next().unwrap();
            let c = num_traits::pow(c.clone(), k as usize);
            return Ok(Scalar::build(Poly::term(m.pow(k), c), BTreeMap::new()));
        }
        let k = k as u32;
        let num = self.num.pow(k);
        let den = self.den.iter().map(|(f, m)| (f.clone(), m * k)).collect();
        Ok(Scalar::build(num, den))
    }

    /// Elementary function applied to `self`, folding exactly known values.
    pub fn apply(&self, func: Func) -> Scalar {
        if let Some(q) = self.as_rational() {
            if q.is_zero() {
                match func {
                    Func::Sin | Func::Tan | Func::Sqrt => return Scalar::zero(),
                    Func::Cos | Func::Exp => return Scalar::one(),
                    Func::Ln => {}
                }
            }
            if func == Func::Ln && q.is_one() {
                return Scalar::zero();
            }
            if func == Func::Sqrt {
                if let Some(r) = rational_sqrt(&q) {
                    return Scalar::from_rational(r);
                }
            }
        }
        Scalar::from_atom(Atom::Apply(func, self.clone()))
    }

    /// Partial derivative with respect to the coordinate `var`.
    pub fn diff(&self, var: &str) -> Scalar {
        let mut cache = HashMap::new();
        self.diff_cached(var, &mut cache)
    }

    fn diff_cached(&self, var: &str, cache: &mut HashMap<*const Atom, Scalar>) -> Scalar {
        if self.is_exact_zero() {
            return Scalar::zero();
        }
        let dnum = d_poly(&self.num, var, cache);
        if self.den.is_empty() {
            return dnum;
        }
        let inv_den = Scalar { num: Poly::one(), den: self.den.clone() };
        let mut out = dnum.mul(&inv_den);
        let this = Scalar { num: self.num.clone(), den: self.den.clone() };
        for (f, m) in &self.den {
            let df = d_poly(f, var, cache);
            if df.is_exact_zero() {
                continue;
            }
            let f_inv = Scalar { num: Poly::one(), den: BTreeMap::from([(f.clone(), 1)]) };
            let term = this.mul(&df).mul(&f_inv).scale(&BigRational::from_integer((*m).into()));
            out = out.sub(&term);
        }
        out
    }

    /// Replaces coordinates by scalars, recursing into function arguments.
    pub fn substitute(&self, vars: &BTreeMap<String, Scalar>) -> Result<Scalar, ExprError> {
        let mut cache = HashMap::new();
        self.substitute_cached(vars, &mut cache)
    }

    fn substitute_cached(
        &self,
        vars: &BTreeMap<String, Scalar>,
        cache: &mut HashMap<*const Atom, Scalar>,
    ) -> Result<Scalar, ExprError> {
        let num = subst_poly(&self.num, vars, cache)?;
        if self.den.is_empty() {
            return Ok(num);
        }
        let mut den = Scalar::one();
        for (f, m) in &self.den {
            den = den.mul(&subst_poly(f, vars, cache)?.powi(*m as i32)?);
        }
        num.div(&den)
    }

    /// Tree form of the canonical representation.
    pub fn to_expr(&self) -> Expr {
        let num = poly_to_expr(&self.num);
        if self.den.is_empty() {
            return num;
        }
        let mut factors: Vec<Expr> = self
            .den
            .iter()
            .rev()
            .map(|(f, m)| {
                let fe = poly_to_expr(f);
                if *m == 1 {
                    fe
                } else {
                    Expr::Pow(Box::new(fe), *m as i32)
                }
            })
            .collect();
        let den = if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) };
        Expr::Quotient(Box::new(num), Box::new(den))
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let isqrt = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(BigRational::new(isqrt(q.numer())?, isqrt(q.denom())?))
}

fn has_reducible_sqrt(p: &Poly) -> bool {
    p.terms
        .keys()
        .any(|m| m.0.iter().any(|(a, e)| e.abs() >= 2 && matches!(a.atom(), Atom::Apply(Func::Sqrt, _))))
}

fn reduce_sqrt(p: &Poly) -> Scalar {
    let mut out = Scalar::zero();
    for (m, c) in &p.terms {
        let mut plain = Vec::new();
        let mut extra = Scalar::one();
        for (a, e) in &m.0 {
            match a.atom() {
                Atom::Apply(Func::Sqrt, u) if e.abs() >= 2 => {
                    let (q, r) = (e / 2, e % 2);
                    // u is nonzero wherever sqrt(u)^e is defined with e < 0.
                    extra = extra.mul(&u.powi(q).unwrap_or_else(|_| Scalar::zero()));
                    if r != 0 {
                        plain.push((a.clone(), r));
                    }
                }
                _ => plain.push((a.clone(), *e)),
            }
        }
        let term = Scalar::from_poly(Poly::term(Monomial(plain), c.clone()));
        out = out.add(&term.mul(&extra));
    }
    out
}

fn d_atom(atom: &AtomRef, var: &str, cache: &mut HashMap<*const Atom, Scalar>) -> Scalar {
    if let Some(d) = cache.get(&atom.key()) {
        return d.clone();
    }
    let d = match atom.atom() {
        Atom::Var(s) => {
            if &**s == var {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        }
        Atom::Param(_) => Scalar::zero(),
        Atom::Apply(func, u) => {
            let du = u.diff_cached(var, cache);
            if du.is_exact_zero() {
                Scalar::zero()
            } else {
                let outer = match func {
                    Func::Sin => u.apply(Func::Cos),
                    Func::Cos => u.apply(Func::Sin).neg(),
                    Func::Tan => {
                        let t = Scalar::from_atom_ref(atom.clone());
                        t.mul(&t).add(&Scalar::one())
                    }
                    Func::Exp => Scalar::from_atom_ref(atom.clone()),
                    Func::Ln => u.recip().unwrap_or_else(|_| Scalar::zero()),
                    Func::Sqrt => Scalar::from_poly(Poly::term(
                        Monomial::atom(atom.clone(), -1),
                        BigRational::new(1.into(), 2.into()),
                    )),
                };
                outer.mul(&du)
            }
        }
    };
    cache.insert(atom.key(), d.clone());
    d
}

fn d_poly(p: &Poly, var: &str, cache: &mut HashMap<*const Atom, Scalar>) -> Scalar {
    let mut out = Scalar::zero();
    for a in p.atoms() {
        let da = d_atom(&a, var, cache);
        if da.is_exact_zero() {
            continue;
        }
        out = out.add(&Scalar::from_poly(p.partial(&a)).mul(&da));
    }
    out
}

fn subst_atom(
    atom: &AtomRef,
    vars: &BTreeMap<String, Scalar>,
    cache: &mut HashMap<*const Atom, Scalar>,
) -> Result<Scalar, ExprError> {
    if let Some(s) = cache.get(&atom.key()) {
        return Ok(s.clone());
    }
    let s = match atom.atom() {
        Atom::Var(name) => match vars.get(&**name) {
            Some(s) => s.clone(),
            None => Scalar::from_atom_ref(atom.clone()),
        },
        Atom::Param(_) => Scalar::from_atom_ref(atom.clone()),
        Atom::Apply(func, u) => u.substitute_cached(vars, cache)?.apply(*func),
    };
    cache.insert(atom.key(), s.clone());
    Ok(s)
}

fn subst_poly(
    p: &Poly,
    vars: &BTreeMap<String, Scalar>,
    cache: &mut HashMap<*const Atom, Scalar>,
) -> Result<Scalar, ExprError> {
    let mut out = Scalar::zero();
    for (m, c) in &p.terms {
        let mut t = Scalar::from_rational(c.clone());
        for (a, e) in &m.0 {
            t = t.mul(&subst_atom(a, vars, cache)?.powi(*e)?);
        }
        out = out.add(&t);
    }
    Ok(out)
}

fn atom_to_expr(a: &Atom) -> Expr {
    match a {
        Atom::Var(s) => Expr::Var(s.clone()),
        Atom::Param(s) => Expr::Param(s.clone()),
        Atom::Apply(f, u) => Expr::Apply(*f, Box::new(u.to_expr())),
    }
}

fn monomial_factors(m: &Monomial) -> Vec<Expr> {
    m.0.iter()
        .rev()
        .map(|(a, e)| {
            let base = atom_to_expr(a.atom());
            if *e == 1 {
                base
            } else {
                Expr::Pow(Box::new(base), *e)
            }
        })
        .collect()
}

fn poly_to_expr(p: &Poly) -> Expr {
    let mut terms: Vec<Expr> = p
        .terms
        .iter()
        .rev()
        .map(|(m, c)| {
            if m.is_one() {
                return Expr::Num(c.clone());
            }
            let mut factors = monomial_factors(m);
            if c.is_one() && factors.len() == 1 {
                return factors.pop().unwrap();
            }
            if !c.is_one() {
                factors.insert(0, Expr::Num(c.clone()));
            }
            Expr::Product(factors)
        })
        .collect();
    match terms.len() {
        0 => Expr::int(0),
        1 => terms.pop().unwrap(),
        _ => Expr::Sum(terms),
    }
}

impl Scalar {
    /// Canonical form of a syntax tree.
    pub fn from_expr(e: &Expr) -> Result<Scalar, ExprError> {
        Ok(match e {
            Expr::Num(q) => Scalar::from_rational(q.clone()),
            Expr::Var(s) => Scalar::from_atom(Atom::Var(s.clone())),
            Expr::Param(s) => Scalar::from_atom(Atom::Param(s.clone())),
            Expr::Sum(xs) => {
                let mut acc = Scalar::zero();
                for x in xs {
                    acc = acc.add(&Scalar::from_expr(x)?);
                }
                acc
            }
            Expr::Product(xs) => {
                let mut acc = Scalar::one();
                for x in xs {
                    acc = acc.mul(&Scalar::from_expr(x)?);
                }
                acc
            }
            Expr::Pow(b, k) => {
                if *k > 0 {
                    Scalar::from_expr(b)?.powi(*k)?
                } else {
                    reciprocal_of(b)?.powi(-k)?
                }
            }
            Expr::Quotient(a, b) => Scalar::from_expr(a)?.mul(&reciprocal_of(b)?),
            Expr::Apply(f, a) => Scalar::from_expr(a)?.apply(*f),
        })
    }
}

/// Reciprocal that inverts products factor by factor, so a factored
/// denominator keeps its factors.
fn reciprocal_of(e: &Expr) -> Result<Scalar, ExprError> {
    match e {
        Expr::Product(xs) => {
            let mut acc = Scalar::one();
            for x in xs {
                acc = acc.mul(&reciprocal_of(x)?);
            }
            Ok(acc)
        }
        Expr::Pow(b, k) if *k > 0 => reciprocal_of(b)?.powi(*k),
        Expr::Pow(b, k) => Scalar::from_expr(b)?.powi(-k),
        Expr::Quotient(a, b) => Ok(Scalar::from_expr(b)?.mul(&reciprocal_of(a)?)),
        _ => Scalar::from_expr(e)?.recip(),
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar::$method(self, rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}
