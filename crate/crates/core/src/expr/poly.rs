//! Sparse Laurent polynomials over exact rationals in symbolic atoms.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::scalar::Scalar;
use super::{Func, Symbol};

/// An indeterminate of the rational function field.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Atom {
    Var(Symbol),
    Param(Symbol),
    Apply(Func, Scalar),
}

/// Shared atom with a pointer-equality fast path for comparisons.
#[derive(Clone, Debug)]
pub(crate) struct AtomRef(pub(crate) Arc<Atom>);

impl AtomRef {
    pub(crate) fn new(atom: Atom) -> Self {
        AtomRef(Arc::new(atom))
    }

    pub(crate) fn atom(&self) -> &Atom {
        &self.0
    }

    pub(crate) fn key(&self) -> *const Atom {
        Arc::as_ptr(&self.0)
    }
}

impl PartialEq for AtomRef {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for AtomRef {}

impl PartialOrd for AtomRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AtomRef {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.cmp(&other.0)
        }
    }
}

/// Product of atom powers, sorted by atom, exponents nonzero.
///
/// The total order is lexicographic on exponent vectors with atoms ordered
/// ascending, which is a monomial order on the nonnegative part.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub(crate) struct Monomial(pub(crate) Vec<(AtomRef, i32)>);

impl Monomial {
    pub(crate) fn one() -> Self {
        Monomial(Vec::new())
    }

    pub(crate) fn atom(a: AtomRef, e: i32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub(crate) fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub(crate) fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), -e)).collect())
    }

    pub(crate) fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * k)).collect())
    }

    pub(crate) fn exponent(&self, atom: &AtomRef) -> i32 {
        self.0
            .binary_search_by(|(a, _)| a.cmp(atom))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    /// Whether `self` divides `other` among monomials with nonnegative exponents.
    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().all(|(a, e)| other.exponent(a) >= *e)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, e)), None) => return e.cmp(&0),
                (None, Some((_, e))) => return 0.cmp(e),
                (Some((x, ex)), Some((y, ey))) => match x.cmp(y) {
                    Ordering::Less => return ex.cmp(&0),
                    Ordering::Greater => return 0.cmp(ey),
                    Ordering::Equal => {
                        if ex != ey {
                            return ex.cmp(ey);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

/// Sparse Laurent polynomial; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub(crate) struct Poly {
    pub(crate) terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly::default()
    }

    pub(crate) fn constant(c: BigRational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub(crate) fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub(crate) fn term(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn len(&self) -> usize {
        self.terms.len()
    }

    /// The value if the polynomial is a constant.
    pub(crate) fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) =
            if self.len() >= other.len() { (self.clone(), other) } else { (other.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub(crate) fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub(crate) fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub(crate) fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub(crate) fn mul_monomial(&self, mono: &Monomial, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.mul(mono), c * k)).collect() }
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub(crate) fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Leading term under the lexicographic monomial order.
    pub(crate) fn lead(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Componentwise minimum exponent over all terms, absent atoms counting as zero.
    pub(crate) fn content(&self) -> Monomial {
        if self.terms.len() == 1 {
            return self.terms.keys().next().unwrap().clone();
        }
        let mut out = Vec::new();
        for a in self.atoms() {
            let e = self.terms.keys().map(|m| m.exponent(&a)).min().unwrap_or(0);
            if e != 0 {
                out.push((a, e));
            }
        }
        Monomial(out)
    }

    /// Exact quotient by a polynomial with nonnegative exponents, if it exists.
    pub(crate) fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.lead()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if divisor.len() == 1 {
            return Some(self.mul_monomial(&lm.inv(), &lc.recip()));
        }
        // Shift into nonnegative exponents so the division algorithm applies.
        let shift = self.content();
        let shift = Monomial(shift.0.into_iter().filter(|(_, e)| *e < 0).map(|(a, e)| (a, -e)).collect());
        let mut rem = self.mul_monomial(&shift, &BigRational::one());
        let mut quot = Poly::zero();
        let lc_inv = lc.recip();
        while let Some((m, c)) = rem.lead() {
            if !lm.divides(m) {
                return None;
            }
            let qm = m.mul(&lm.inv());
            let qc = c * &lc_inv;
            rem = rem.sub(&divisor.mul_monomial(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot.mul_monomial(&shift.inv(), &BigRational::one()))
    }

    /// Formal partial derivative with respect to an atom.
    pub(crate) fn partial(&self, atom: &AtomRef) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(atom);
            if e != 0 {
                let dm = m.mul(&Monomial::atom(atom.clone(), -1));
                out.add_term(dm, c * BigRational::from_integer(e.into()));
            }
        }
        out
    }

    /// Distinct atoms in order.
    pub(crate) fn atoms(&self) -> Vec<AtomRef> {
        let mut set: BTreeMap<AtomRef, ()> = BTreeMap::new();
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                set.insert(a.clone(), ());
            }
        }
        set.into_keys().collect()
    }

    /// Splits `self = c * m * f` where `m` is a monomial, `f` is content-free with
    /// leading coefficient one. `f` is `None` when `self` is a single term.
    pub(crate) fn split_content(&self) -> (BigRational, Monomial, Option<Poly>) {
        debug_assert!(!self.is_zero());
        let content = self.content();
        if self.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            return (c.clone(), m.clone(), None);
        }
        let reduced = self.mul_monomial(&content.inv(), &BigRational::one());
        let lc = reduced.lead().unwrap().1.clone();
        let f = reduced.scale(&lc.recip());
        (lc, content, Some(f))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Scalar::from_poly(self.clone()).to_expr())
    }
}
