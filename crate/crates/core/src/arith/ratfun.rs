//! Rational functions in canonical form.

use alloc::collections::BTreeMap;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use super::gcd::gcd;
use super::monomial::Var;
use super::poly::Poly;
use super::rat::Rat;
use super::ArithError;

/// `num / den` with `gcd(num, den) = 1` and a monic denominator. Zero is
/// `0 / 1`. Equal rational functions have identical representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Result<RatFun, ArithError> {
        if den.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        Ok(RatFun::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> RatFun {
        if num.is_zero() {
            return RatFun::zero();
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let s = den.leading_coeff().recip();
        RatFun {
            num: num.scale(&s),
            den: den.scale(&s),
        }
    }

    pub fn zero() -> RatFun {
        RatFun {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> RatFun {
        RatFun::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> RatFun {
        RatFun {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(c: Rat) -> RatFun {
        RatFun::from_poly(Poly::constant(c))
    }

    pub fn var(v: Var) -> RatFun {
        RatFun::from_poly(Poly::var(v))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn recip(&self) -> Result<RatFun, ArithError> {
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, other: &RatFun) -> Result<RatFun, ArithError> {
        if other.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        Ok(self * &other.recip().unwrap())
    }

    pub fn scale(&self, c: &Rat) -> RatFun {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: i32) -> RatFun {
        let r = RatFun {
            num: self.num.pow(e.unsigned_abs()),
            den: self.den.pow(e.unsigned_abs()),
        };
        if e >= 0 {
            r
        } else {
            r.recip().expect("negative power of zero")
        }
    }

    /// Quotient rule derivative.
    pub fn partial(&self, v: Var) -> RatFun {
        let dn = self.num.partial(v);
        if self.den.is_constant() {
            return RatFun::normalize(dn, self.den.clone());
        }
        let dd = self.den.partial(v);
        if dd.is_zero() {
            return RatFun::normalize(dn, self.den.clone());
        }
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        RatFun::normalize(num, &self.den * &self.den)
    }

    /// Replaces `v` by the rational function `val`.
    pub fn substitute(&self, v: Var, val: &RatFun) -> RatFun {
        let n = subst_poly(&self.num, v, val);
        let d = subst_poly(&self.den, v, val);
        n.checked_div(&d).expect("substitution annihilates the denominator")
    }

    /// Partial evaluation at rational values; `None` when the denominator vanishes.
    pub fn eval_partial(&self, vals: &BTreeMap<Var, Rat>) -> Option<RatFun> {
        let d = self.den.eval_partial(vals);
        if d.is_zero() {
            return None;
        }
        Some(RatFun::normalize(self.num.eval_partial(vals), d))
    }

    pub fn eval(&self, vals: &BTreeMap<Var, Rat>) -> Option<Rat> {
        let d = self.den.eval(vals)?;
        if d.is_zero() {
            return None;
        }
        Some(&self.num.eval(vals)? / &d)
    }

    /// Total degree in (x, y, z) of numerator and denominator combined, used
    /// to rank candidate solutions.
    pub fn degree(&self) -> u32 {
        self.num.degree().max(self.den.degree())
    }
}

fn subst_poly(p: &Poly, v: Var, val: &RatFun) -> RatFun {
    let e = p.degree_in(v);
    if e == 0 {
        return RatFun::from_poly(p.clone());
    }
    // Homogenize: p(val) = sum c_k n^k d^(e-k) / d^e.
    let coeffs = p.coeffs_in(v);
    let (n, d) = (&val.num, &val.den);
    let mut npow = alloc::vec![Poly::one()];
    let mut dpow = alloc::vec![Poly::one()];
    for k in 1..=e as usize {
        npow.push(&npow[k - 1] * n);
        dpow.push(&dpow[k - 1] * d);
    }
    let mut acc = Poly::zero();
    for (k, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            acc += &(&(c * &npow[k]) * &dpow[e as usize - k]);
        }
    }
    RatFun::normalize(acc, dpow[e as usize].clone())
}

impl From<Poly> for RatFun {
    fn from(p: Poly) -> RatFun {
        RatFun::from_poly(p)
    }
}

impl<'a> Add<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFun::normalize(&self.num + &rhs.num, self.den.clone());
        }
        let g = gcd(&self.den, &rhs.den);
        let a = self.den.div_exact(&g).unwrap();
        let b = rhs.den.div_exact(&g).unwrap();
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        RatFun::normalize(num, &self.den * &b)
    }
}

impl<'a> Sub<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        -&self
    }
}

impl<'a> Mul<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero();
        }
        // Cross-cancel before multiplying to keep sizes down.
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).unwrap();
        let d2 = rhs.den.div_exact(&g1).unwrap();
        let n2 = rhs.num.div_exact(&g2).unwrap();
        let d1 = self.den.div_exact(&g2).unwrap();
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let s = den.leading_coeff().recip();
        RatFun {
            num: num.scale(&s),
            den: den.scale(&s),
        }
    }
}

macro_rules! owned_rf_op {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFun> for RatFun {
            type Output = RatFun;
            fn $m(self, rhs: RatFun) -> RatFun {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a RatFun> for RatFun {
            type Output = RatFun;
            fn $m(self, rhs: &RatFun) -> RatFun {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<RatFun> for &'a RatFun {
            type Output = RatFun;
            fn $m(self, rhs: RatFun) -> RatFun {
                self.$m(&rhs)
            }
        }
    };
}
owned_rf_op!(Add, add);
owned_rf_op!(Sub, sub);
owned_rf_op!(Mul, mul);

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})/({:?})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::monomial::{X, Y, Z};

    fn p(v: Var) -> Poly {
        Poly::var(v)
    }

    #[test]
    fn common_factors_cancel() {
        let a = &p(X) + &p(Y);
        let b = &(&p(X) * &p(Z)) - &Poly::one();
        let r1 = RatFun::new(a.clone(), b.clone()).unwrap();
        let r2 = RatFun::new(a.scale(&Rat::from_int(2)), b.scale(&Rat::from_int(2))).unwrap();
        let g = &p(Y) + &Poly::int(3);
        let r3 = RatFun::new(&a * &g, &b * &g).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1, r3);
        assert_eq!(RatFun::new(a, Poly::zero()), Err(ArithError::ZeroDenominator));
    }

    #[test]
    fn worked_example_sigma_is_canonical() {
        // -x^2 (z - 1) / (x^2 y - 1)
        let x2 = p(X).pow(2);
        let num = -(&x2 * &(&p(Z) - &Poly::one()));
        let den = &(&x2 * &p(Y)) - &Poly::one();
        let s = RatFun::new(num.clone(), den.clone()).unwrap();
        assert_eq!(s.den(), &den);
        assert_eq!(s.num(), &num);
        let s2 = RatFun::new(-&num, -&den).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn quotient_rule_and_substitution() {
        let r = RatFun::new(Poly::one(), p(X)).unwrap();
        let d = r.partial(X);
        assert_eq!(d, RatFun::new(Poly::int(-1), p(X).pow(2)).unwrap());
        let s = r.substitute(X, &RatFun::new(p(Y), &p(Y) + &Poly::one()).unwrap());
        assert_eq!(s, RatFun::new(&p(Y) + &Poly::one(), p(Y)).unwrap());
    }
}
