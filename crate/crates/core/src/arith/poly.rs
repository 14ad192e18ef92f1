//! Sparse multivariate polynomials over the rationals.
//!
//! A single representation serves every polynomial in the crate: plain
//! polynomials in (x, y, z), parametric ones whose coefficients involve ODE
//! parameters, and generic candidates carrying undetermined coefficients. All
//! of them are elements of Q[x, y, z, s_3, s_4, ...]; "coefficient ring"
//! views are obtained by collecting on the (x, y, z) part.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::monomial::{Mono, Monomial, Var, X, Y, Z};
use super::rat::{bigint_gcd, bigint_lcm, Rat};

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Terms are kept in a map ordered by the global monomial order; the
/// leading term is the last entry. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Poly {
        Poly::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(Rat::from_int(n))
    }

    pub fn var(v: Var) -> Poly {
        Poly::term(Rat::one(), Monomial::var(v))
    }

    pub fn x() -> Poly {
        Poly::var(X)
    }

    pub fn y() -> Poly {
        Poly::var(Y)
    }

    pub fn z() -> Poly {
        Poly::var(Z)
    }

    pub fn term(c: Rat, m: Monomial) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rat)>>(it: I) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    /// Builds from unsorted terms, merging repeated monomials.
    pub fn collect_terms(mut v: Vec<(Monomial, Rat)>) -> Poly {
        v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Monomial, Rat)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = &last.1 + &c,
                _ => {
                    if let Some(last) = out.last() {
                        if last.1.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((m, c));
                }
            }
        }
        if out.last().map_or(false, |t| t.1.is_zero()) {
            out.pop();
        }
        Poly {
            terms: out.into_iter().collect(),
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let s = &*e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_value().map_or(false, |c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// Value of a constant polynomial (zero for the zero polynomial).
    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn constant_term(&self) -> Rat {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rat)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rat {
        self.leading_term().map(|(_, c)| c.clone()).unwrap_or_default()
    }

    /// Total degree over every variable; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Total degree in (x, y, z), the degree used by the degree bounds.
    /// The zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree_xyz()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.degree_in(v) > 0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            s.extend(m.vars());
        }
        s
    }

    /// Symbols (non x/y/z variables) appearing in the polynomial.
    pub fn symbols(&self) -> BTreeSet<Var> {
        self.vars().into_iter().filter(|v| !v.is_xyz()).collect()
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    pub fn mul_term(&self, c: &Rat, m: &Monomial) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, d)| (k.mul(m), d * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative.
    pub fn partial(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.remove(v);
            if e > 0 {
                let m2 = rest.mul(&Monomial::var_pow(v, e - 1));
                out.add_term(m2, c * &Rat::from_int(e as i64));
            }
        }
        out
    }

    /// Replaces `v` by the polynomial `val`.
    pub fn substitute(&self, v: Var, val: &Poly) -> Poly {
        if !self.contains_var(v) {
            return self.clone();
        }
        let maxe = self.degree_in(v);
        let mut powers = Vec::with_capacity(maxe as usize + 1);
        powers.push(Poly::one());
        for k in 1..=maxe as usize {
            let next = &powers[k - 1] * val;
            powers.push(next);
        }
        let cap = self
            .terms
            .iter()
            .map(|(m, _)| powers[m.degree_in(v) as usize].len())
            .sum();
        let mut out = Vec::with_capacity(cap);
        for (m, c) in &self.terms {
            let (e, rest) = m.remove(v);
            if e == 0 {
                out.push((m.clone(), c.clone()));
            } else {
                for (pm, pc) in &powers[e as usize].terms {
                    out.push((pm.mul(&rest), pc * c));
                }
            }
        }
        Poly::collect_terms(out)
    }

    /// Replaces several variables by rational values.
    pub fn eval_partial(&self, vals: &BTreeMap<Var, Rat>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Monomial::one();
            for (v, e) in m.pairs() {
                match vals.get(&v) {
                    Some(r) => coeff = &coeff * &r.pow(e),
                    None => rest = rest.mul(&Monomial::var_pow(v, e)),
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    /// Full evaluation; every variable must be assigned.
    pub fn eval(&self, vals: &BTreeMap<Var, Rat>) -> Option<Rat> {
        self.eval_partial(vals).constant_value()
    }

    /// Applies a map to each coefficient (dropping zeros).
    pub fn map_coeffs<F: Fn(&Rat) -> Rat>(&self, f: F) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Renames variables (must be injective on the variables present).
    pub fn rename(&self, f: &dyn Fn(Var) -> Var) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| {
            let pairs: Vec<(Var, u32)> = m.pairs().map(|(v, e)| (f(v), e)).collect();
            (Monomial::from_pairs(&pairs), c.clone())
        }))
    }

    /// Groups terms by their (x, y, z) exponents; each coefficient is a
    /// polynomial in the remaining symbols.
    pub fn collect_xyz(&self) -> BTreeMap<Mono, Poly> {
        let mut out: BTreeMap<Mono, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (mono, rest) = m.split_xyz();
            out.entry(mono).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Groups by powers of a single variable: result[k] is the coefficient of v^k.
    pub fn coeffs_in(&self, v: Var) -> Vec<Poly> {
        let n = self.degree_in(v) as usize;
        let mut out = alloc::vec![Poly::zero(); n + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.remove(v);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(v: Var, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out += &c.mul_monomial(&Monomial::var_pow(v, k as u32));
            }
        }
        out
    }

    /// Greatest common monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let mut g = match it.next() {
            Some(m) => m.clone(),
            None => return Monomial::one(),
        };
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Divides by a monomial that divides every term.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Poly> {
        let mut out = BTreeMap::new();
        for (k, c) in &self.terms {
            out.insert(m.div(k)?, c.clone());
        }
        Some(Poly { terms: out })
    }

    /// Positive rational `c` with `self / c` having coprime integer
    /// coefficients.
    pub fn rational_content(&self) -> Rat {
        // Word-sized fast path.
        let mut g: u128 = 0;
        let mut l: u128 = 1;
        let mut small = true;
        for c in self.terms.values() {
            match c.as_small() {
                Some((n, d)) => {
                    g = gcd_u128(g, n.unsigned_abs() as u128);
                    let d = d as u128;
                    l = match (l / gcd_u128(l, d)).checked_mul(d) {
                        Some(x) if x <= i64::MAX as u128 => x,
                        _ => {
                            small = false;
                            break;
                        }
                    };
                }
                None => {
                    small = false;
                    break;
                }
            }
        }
        if small {
            if g == 0 {
                return Rat::one();
            }
            return Rat::new(g as i64, l as i64);
        }
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = bigint_gcd(&g, &c.numer());
            l = bigint_lcm(&l, &c.denom());
        }
        if g.is_zero() {
            return Rat::one();
        }
        Rat::from_bigints(g.abs(), l)
    }

    /// Scales to integer coefficients with unit content and a positive
    /// leading coefficient.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.rational_content();
        if self.leading_coeff().is_negative() {
            c = -c;
        }
        self.scale(&c.recip())
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.leading_coeff().recip())
    }

    /// Multivariate division by a single divisor under the global order;
    /// returns (quotient, remainder).
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let (dm, dc) = d.leading_term().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let dinv = dc.recip();
        let mut q = Poly::zero();
        let mut r = Poly::zero();
        let mut p = self.clone();
        while let Some((m, c)) = p.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            match dm.div(&m) {
                Some(qm) => {
                    let qc = &c * &dinv;
                    p -= &d.mul_term(&qc, &qm);
                    q.add_term(qm, qc);
                }
                None => {
                    p.terms.remove(&m);
                    r.add_term(m, c);
                }
            }
        }
        (q, r)
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        // Cheap degree rejections.
        for v in d.vars() {
            if d.degree_in(v) > self.degree_in(v) {
                return None;
            }
        }
        let (dm, dc) = d.leading_term().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let dinv = dc.recip();
        let mut q = Poly::zero();
        let mut p = self.clone();
        while let Some((m, c)) = p.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = dm.div(&m)?;
            let qc = &c * &dinv;
            p -= &d.mul_term(&qc, &qm);
            q.add_term(qm, qc);
        }
        Some(q)
    }
}

impl<'a> core::ops::AddAssign<&'a Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<'a> core::ops::SubAssign<&'a Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= rhs.len() {
            (self.clone(), rhs)
        } else {
            (rhs.clone(), self)
        };
        big += small;
        big
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let (a, b) = if self.len() <= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut v = Vec::with_capacity(a.len() * b.len());
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                v.push((ma.mul(mb), ca * cb));
            }
        }
        Poly::collect_terms(v)
    }
}

macro_rules! owned_poly_op {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Poly> for &'a Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                self.$m(&rhs)
            }
        }
    };
}
owned_poly_op!(Add, add);
owned_poly_op!(Sub, sub);
owned_poly_op!(Mul, mul);

impl core::fmt::Debug for Poly {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})*{:?}", c, m)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::x()
    }
    fn y() -> Poly {
        Poly::y()
    }
    fn z() -> Poly {
        Poly::z()
    }

    #[test]
    fn additive_identity_and_difference_of_squares() {
        let p = &(&x() * &y()) + &Poly::one();
        assert_eq!(&p + &Poly::zero(), p);
        let d = &(&x() + &y()) * &(&x() - &y());
        assert_eq!(d, &x().pow(2) - &y().pow(2));
    }

    #[test]
    fn square_matches_naive_expansion() {
        // (x^2 y - 1)^2 by hand: x^4 y^2 - 2 x^2 y + 1
        let a = &(&x().pow(2) * &y()) - &Poly::one();
        let expected = Poly::from_terms([
            (Mono([4, 2, 0]).to_monomial(), Rat::one()),
            (Mono([2, 1, 0]).to_monomial(), Rat::from_int(-2)),
            (Monomial::one(), Rat::one()),
        ]);
        assert_eq!(&a * &a, expected);
    }

    #[test]
    fn partials() {
        let a = &(&x().pow(2) * &y()) - &Poly::one();
        assert_eq!(a.partial(Y), x().pow(2));
        assert_eq!(z().pow(3).partial(Z), z().pow(2).scale(&Rat::from_int(3)));
        // Kamke 78 numerator -(y-1) z has no x.
        let m78 = -(&(&y() - &Poly::one()) * &z());
        assert!(m78.partial(X).is_zero());
    }

    #[test]
    fn exact_division() {
        let y1 = &y() - &Poly::one();
        let y2 = &y().pow(2) - &Poly::one();
        assert_eq!(y2.div_exact(&y1), Some(&y() + &Poly::one()));
        let w = &(&x().pow(2) * &y()) - &Poly::one();
        assert_eq!(w.div_exact(&x()), None);
    }

    #[test]
    fn substitute_and_collect() {
        let p = &(&x() * &z()) + &y();
        let q = p.substitute(Z, &(&x() + &Poly::one()));
        assert_eq!(q, &(&(&x() * &x()) + &x()) + &y());
        let s = Poly::var(Var(5));
        let g = &(&s * &x()) + &(&s.scale(&Rat::from_int(2)) * &x());
        let c = g.collect_xyz();
        assert_eq!(c.len(), 1);
        assert_eq!(c[&Mono([1, 0, 0])], s.scale(&Rat::from_int(3)));
    }
}
