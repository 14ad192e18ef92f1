//! Multivariate polynomial GCD over Q: recursive content/primitive-part
//! reduction with a subresultant remainder sequence in the main variable.

use alloc::vec::Vec;

use super::monomial::Var;
use super::poly::Poly;
use super::rat::Rat;

/// Greatest common divisor, monic under the global order.
/// `gcd(a, 0)` is `a` made monic; `gcd(0, 0)` is 0.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    gcd_rec(a, b).monic()
}

/// Greatest common divisor of many polynomials.
pub fn gcd_many<'a, I: IntoIterator<Item = &'a Poly>>(it: I) -> Poly {
    let mut g = Poly::zero();
    for p in it {
        g = gcd(&g, p);
        if g.is_one() {
            break;
        }
    }
    g
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.len() == 1 || b.len() == 1 {
        let (mono, other) = if a.len() == 1 { (a, b) } else { (b, a) };
        let m = mono.leading_term().unwrap().0.gcd(&other.monomial_content());
        return Poly::term(Rat::one(), m);
    }
    if a == b {
        return a.clone();
    }
    // Strip common monomial content first; it is cheap and frequent.
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    if !ma.is_one() || !mb.is_one() {
        let m = ma.gcd(&mb);
        let a1 = a.div_monomial(&ma).unwrap();
        let b1 = b.div_monomial(&mb).unwrap();
        return &gcd_rec(&a1, &b1) * &Poly::term(Rat::one(), m);
    }
    let va = a.vars();
    let vb = b.vars();
    // A variable present in only one argument: the gcd lives in its content.
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        return gcd_rec(&content_in(a, v), b);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        return gcd_rec(a, &content_in(b, v));
    }
    // Main variable: the one of smallest degree keeps the PRS short.
    let v = *va
        .iter()
        .min_by_key(|&&v| (a.degree_in(v).min(b.degree_in(v)), v.0))
        .unwrap();
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd_rec(&ca, &cb);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = subresultant_gcd(&pa, &pb, v);
    &c * &g
}

/// GCD of the coefficients of `p` viewed as a polynomial in `v`.
pub fn content_in(p: &Poly, v: Var) -> Poly {
    let coeffs = p.coeffs_in(v);
    let mut g = Poly::zero();
    for c in coeffs.iter().rev() {
        if c.is_zero() {
            continue;
        }
        g = if g.is_zero() { c.clone() } else { gcd_rec(&g, c) };
        if g.is_constant() {
            return Poly::one();
        }
    }
    if g.is_zero() {
        Poly::one()
    } else {
        g.monic()
    }
}

/// Primitive part of `p` with respect to `v`.
pub fn primitive_in(p: &Poly, v: Var) -> Poly {
    if p.is_zero() {
        return Poly::zero();
    }
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides")
}

fn trim(c: &mut Vec<Poly>) {
    while c.len() > 1 && c.last().map_or(false, |p| p.is_zero()) {
        c.pop();
    }
    if c.len() == 1 && c[0].is_zero() {
        c.clear();
    }
}

/// Pseudo-remainder of a by b in the coefficient-vector representation
/// (index = power of the main variable).
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let mut r: Vec<Poly> = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    if r.len() < b.len() {
        return r;
    }
    let mut steps = r.len() - b.len() + 1;
    while !r.is_empty() && r.len() >= b.len() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = &*c * lb;
        }
        for (i, bc) in b.iter().enumerate() {
            let t = &lr * bc;
            r[i + shift] -= &t;
        }
        steps -= 1;
        trim(&mut r);
    }
    // Complete the multiplier to lc(b)^(deg a - deg b + 1).
    if steps > 0 {
        let f = lb.pow(steps as u32);
        for c in r.iter_mut() {
            *c = &*c * &f;
        }
    }
    r
}

fn subresultant_gcd(a: &Poly, b: &Poly, v: Var) -> Poly {
    let mut a = a.coeffs_in(v);
    let mut b = b.coeffs_in(v);
    trim(&mut a);
    trim(&mut b);
    if a.len() < b.len() {
        core::mem::swap(&mut a, &mut b);
    }
    let mut g = Poly::one();
    let mut h = Poly::one();
    loop {
        if b.len() == 1 {
            return Poly::one();
        }
        let d = (a.len() - b.len()) as u32;
        let r = prem(&a, &b);
        if r.is_empty() {
            let out = Poly::from_coeffs_in(v, &b);
            return primitive_in(&out, v);
        }
        if r.len() == 1 {
            return Poly::one();
        }
        let div = &g * &h.pow(d);
        let nb: Vec<Poly> = r
            .iter()
            .map(|c| c.div_exact(&div).expect("subresultant division is exact"))
            .collect();
        a = core::mem::replace(&mut b, nb);
        g = a.last().unwrap().clone();
        h = if d == 0 {
            h
        } else {
            g.pow(d)
                .div_exact(&h.pow(d - 1))
                .expect("subresultant division is exact")
        };
    }
}

/// Factors `p` without irreducible factorization: monomial content, content
/// with respect to each variable and square-free splitting, applied
/// recursively and refined to a pairwise coprime set. Returns monic factors
/// with multiplicities and the leftover constant.
pub fn partial_factor(p: &Poly) -> (Rat, Vec<(Poly, u32)>) {
    if p.is_zero() {
        return (Rat::zero(), Vec::new());
    }
    let lc = p.leading_coeff();
    let mut pieces = Vec::new();
    split(&p.monic(), &mut pieces);
    // Refine into a coprime basis.
    let mut basis: Vec<Poly> = Vec::new();
    for f in pieces {
        let mut work = alloc::vec![f];
        while let Some(f) = work.pop() {
            if f.is_constant() {
                continue;
            }
            let mut placed = false;
            for i in 0..basis.len() {
                if basis[i] == f {
                    placed = true;
                    break;
                }
                let g = gcd(&basis[i], &f);
                if !g.is_constant() {
                    let b = basis.remove(i);
                    let b1 = b.div_exact(&g).unwrap().monic();
                    let f1 = f.div_exact(&g).unwrap().monic();
                    work.push(g);
                    work.push(b1);
                    work.push(f1);
                    placed = true;
                    break;
                }
            }
            if !placed {
                basis.push(f);
            }
        }
    }
    basis.sort_by(|a, b| a.cmp_key(b));
    let mut out = Vec::new();
    let mut rest = p.monic();
    for f in basis {
        let mut e = 0;
        while let Some(q) = rest.div_exact(&f) {
            rest = q;
            e += 1;
        }
        if e > 0 {
            out.push((f, e));
        }
    }
    debug_assert!(rest.is_constant());
    (&lc * &rest.constant_value().unwrap_or_else(Rat::one), out)
}

fn split(f: &Poly, out: &mut Vec<Poly>) {
    if f.is_constant() {
        return;
    }
    let m = f.monomial_content();
    if !m.is_one() {
        for (v, e) in m.pairs() {
            for _ in 0..e {
                out.push(Poly::var(v));
            }
        }
        split(&f.div_monomial(&m).unwrap(), out);
        return;
    }
    let vars: Vec<Var> = f.vars().into_iter().collect();
    if vars.len() > 1 {
        for &v in &vars {
            let c = content_in(f, v);
            if !c.is_constant() {
                split(&c, out);
                split(&f.div_exact(&c).unwrap().monic(), out);
                return;
            }
        }
    }
    for &v in &vars {
        let g = gcd(f, &f.partial(v));
        if !g.is_constant() {
            split(&g, out);
            split(&f.div_exact(&g).unwrap().monic(), out);
            return;
        }
    }
    out.push(f.monic());
}

/// Every monic divisor assembled from the partial factorization, in
/// increasing degree (the constant 1 first).
pub fn divisors(p: &Poly) -> Vec<Poly> {
    let (_, fs) = partial_factor(p);
    let mut out = alloc::vec![Poly::one()];
    for (f, e) in &fs {
        let mut next = Vec::new();
        for d in &out {
            let mut acc = d.clone();
            next.push(acc.clone());
            for _ in 0..*e {
                acc = &acc * f;
                next.push(acc.clone());
            }
        }
        out = next;
    }
    out.sort_by(|a, b| {
        a.degree()
            .cmp(&b.degree())
            .then(a.total_degree().cmp(&b.total_degree()))
            .then(a.len().cmp(&b.len()))
            .then(a.cmp_key(b))
    });
    out.dedup();
    out
}

impl Poly {
    /// Deterministic structural comparison (by terms from the leading one).
    pub fn cmp_key(&self, other: &Poly) -> core::cmp::Ordering {
        let a = self.terms().rev();
        let b = other.terms().rev();
        for (x, y) in a.zip(b) {
            let o = x.0.cmp(y.0).then_with(|| x.1.cmp(y.1));
            if o != core::cmp::Ordering::Equal {
                return o;
            }
        }
        self.len().cmp(&other.len())
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
    fn one() -> Poly {
        Poly::one()
    }

    #[test]
    fn idempotent_and_shared_factor() {
        let w = &(&x().pow(2) * &y()) - &one();
        assert_eq!(gcd(&w, &w), w);
        let y1 = &y() - &one();
        assert_eq!(gcd(&(&x() * &y1), &(&y() * &y1)), y1);
        assert_eq!(gcd(&w, &Poly::zero()), w);
    }

    #[test]
    fn parametric_gcd() {
        let a = Poly::var(Var(3));
        let f = &(&a * &x()) + &y();
        let g1 = &f * &(&x() + &one());
        let g2 = &f * &(&y() - &a);
        assert_eq!(gcd(&g1, &g2), f.monic());
    }

    #[test]
    fn non_monic_in_main_variable() {
        // (x y + 1)(x + y) and (x y + 1)(x - y)
        let f = &(&x() * &y()) + &one();
        let a = &f * &(&x() + &y());
        let b = &f * &(&x() - &y());
        assert_eq!(gcd(&a, &b), f);
        let c = &Poly::z().pow(2) * &f.pow(2);
        assert_eq!(gcd(&c, &(&f * &x())), f);
    }

    #[test]
    fn partial_factorization_of_square_factor() {
        let f = &(&x() * &y()) - &one();
        let p = (&(&f.pow(2) * &x().pow(3)) * &(&y() + &x())).scale(&Rat::from_int(-2));
        let (c, fs) = partial_factor(&p);
        assert_eq!(c, Rat::from_int(-2));
        let mut prod = Poly::constant(c);
        for (g, e) in &fs {
            prod = &prod * &g.pow(*e);
        }
        assert_eq!(prod, p);
        assert!(fs.iter().any(|(g, e)| *g == f && *e == 2));
        assert!(fs.iter().any(|(g, e)| *g == x() && *e == 3));
        let ds = divisors(&p);
        assert_eq!(ds[0], one());
        assert_eq!(ds.len(), 4 * 3 * 2);
    }

    #[test]
    fn divisors_of_kamke_denominator() {
        // 2 x^2 y
        let n = (&x().pow(2) * &y()).scale(&Rat::from_int(2));
        let ds = divisors(&n);
        assert_eq!(ds.len(), 6);
        assert!(ds.contains(&(&x() * &y())));
    }
}
