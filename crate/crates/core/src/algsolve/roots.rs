//! Rational roots of univariate polynomials and exact square roots.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::arith::{partial_factor, Poly, Rat};

/// Largest integer whose divisors are enumerated by trial division.
const DIVISOR_LIMIT: u64 = 1 << 40;

fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > DIVISOR_LIMIT {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    Some(small)
}

fn horner(c: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for k in (0..c.len()).rev() {
        acc = &(&acc * x) + &c[k];
    }
    acc
}

/// Distinct rational roots of `sum c[k] t^k`, ascending. Returns `None` when
/// the coefficients are too large for candidate enumeration.
pub fn rational_roots(c: &[Rat]) -> Option<Vec<Rat>> {
    let mut c: Vec<Rat> = c.to_vec();
    while c.last().map_or(false, |x| x.is_zero()) {
        c.pop();
    }
    if c.len() <= 1 {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    // Strip roots at zero.
    let k0 = c.iter().position(|x| !x.is_zero()).unwrap();
    if k0 > 0 {
        out.push(Rat::zero());
        c.drain(..k0);
    }
    if c.len() <= 1 {
        return Some(out);
    }
    // Integer coefficients.
    let mut l = BigInt::one();
    for x in &c {
        l = l.lcm(&x.denom());
    }
    let ints: Vec<BigInt> = c.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let a0 = divisors(&ints[0])?;
    let an = divisors(ints.last().unwrap())?;
    for &p in &a0 {
        for &q in &an {
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            for s in [1i64, -1] {
                let r = Rat::from_bigints(BigInt::from(p) * s, BigInt::from(q));
                if horner(&c, &r).is_zero() && !out.contains(&r) {
                    out.push(r);
                }
            }
        }
    }
    out.sort();
    Some(out)
}

/// Exact square root of a non-negative rational.
pub fn rat_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &sn * &sn == n && &sd * &sd == d {
        Some(Rat::from_bigints(sn, sd))
    } else {
        None
    }
}

/// Square root of a polynomial that is a perfect square over Q.
pub fn poly_sqrt(p: &Poly) -> Option<Poly> {
    if p.is_zero() {
        return Some(Poly::zero());
    }
    let (c, fs) = partial_factor(p);
    let mut out = Poly::constant(rat_sqrt(&c)?);
    for (f, e) in fs {
        if e % 2 != 0 {
            return None;
        }
        out = &out * &f.pow(e / 2);
    }
    debug_assert_eq!(&out * &out, *p);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_small_polynomials() {
        // (t - 1)(2t + 3) t = 2t^3 + t^2 - 3t
        let c = [Rat::zero(), Rat::from_int(-3), Rat::one(), Rat::from_int(2)];
        let r = rational_roots(&c).unwrap();
        assert_eq!(r, [Rat::new(-3, 2), Rat::zero(), Rat::one()]);
        // t^2 + 1 has none.
        assert!(rational_roots(&[Rat::one(), Rat::zero(), Rat::one()]).unwrap().is_empty());
    }

    #[test]
    fn square_roots() {
        assert_eq!(rat_sqrt(&Rat::new(36, 625)), Some(Rat::new(6, 25)));
        assert_eq!(rat_sqrt(&Rat::from_int(2)), None);
        let a = Poly::var(crate::arith::Var(3));
        let d = a.pow(4).scale(&Rat::from_int(4 * 36 * 625));
        assert_eq!(poly_sqrt(&d), Some(a.pow(2).scale(&Rat::from_int(300))));
        let e = &a.pow(2) - &Poly::int(4);
        assert_eq!(poly_sqrt(&e), None);
    }
}
