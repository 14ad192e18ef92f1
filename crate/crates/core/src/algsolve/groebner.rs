//! Buchberger's algorithm with the product and chain criteria, producing a
//! reduced Gröbner basis under a configurable block monomial order.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::arith::{Monomial, Poly, Rat, Var};

use super::{Meter, SolveError};

/// Block order: blocks compare in sequence; inside a block either graded
/// reverse lexicographic or lexicographic, with earlier variables of the
/// block larger. Variables in no block form an implicit last block ordered
/// by index.
#[derive(Clone, Debug, Default)]
pub struct MonoOrder {
    pub blocks: Vec<Vec<Var>>,
    pub lex: bool,
}

impl MonoOrder {
    pub fn grevlex() -> MonoOrder {
        MonoOrder::default()
    }

    pub fn lex(vars: Vec<Var>) -> MonoOrder {
        MonoOrder {
            blocks: vars.into_iter().map(|v| alloc::vec![v]).collect(),
            lex: true,
        }
    }

    pub fn block_grevlex(first: Vec<Var>, second: Vec<Var>) -> MonoOrder {
        MonoOrder {
            blocks: alloc::vec![first, second],
            lex: false,
        }
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        if self.blocks.is_empty() {
            return a.cmp(b);
        }
        for blk in &self.blocks {
            let o = cmp_block(a, b, blk, self.lex);
            if o != Ordering::Equal {
                return o;
            }
        }
        // Remaining variables.
        let rest = |m: &Monomial| {
            let pairs: Vec<(Var, u32)> = m
                .pairs()
                .filter(|(v, _)| !self.blocks.iter().any(|blk| blk.contains(v)))
                .collect();
            Monomial::from_pairs(&pairs)
        };
        rest(a).cmp(&rest(b))
    }
}

fn cmp_block(a: &Monomial, b: &Monomial, blk: &[Var], lex: bool) -> Ordering {
    if lex {
        for &v in blk {
            let o = a.degree_in(v).cmp(&b.degree_in(v));
            if o != Ordering::Equal {
                return o;
            }
        }
        return Ordering::Equal;
    }
    let da: u32 = blk.iter().map(|&v| a.degree_in(v)).sum();
    let db: u32 = blk.iter().map(|&v| b.degree_in(v)).sum();
    if da != db {
        return da.cmp(&db);
    }
    for &v in blk.iter().rev() {
        let (ea, eb) = (a.degree_in(v), b.degree_in(v));
        if ea != eb {
            return eb.cmp(&ea);
        }
    }
    Ordering::Equal
}

/// Polynomial with terms sorted in decreasing order under a `MonoOrder`.
#[derive(Clone, Debug)]
struct OPoly {
    terms: Vec<(Monomial, Rat)>,
}

impl OPoly {
    fn from_poly(p: &Poly, ord: &MonoOrder) -> OPoly {
        let mut terms: Vec<(Monomial, Rat)> =
            p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        terms.sort_by(|a, b| ord.cmp(&b.0, &a.0));
        OPoly { terms }
    }

    fn to_poly(&self) -> Poly {
        Poly::from_terms(self.terms.iter().cloned())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }

    fn make_monic(&mut self) {
        let inv = self.terms[0].1.recip();
        for t in self.terms.iter_mut() {
            t.1 = &t.1 * &inv;
        }
    }

    /// self - c * m * other, merged in order.
    fn sub_mul(&self, c: &Rat, m: &Monomial, other: &OPoly, ord: &MonoOrder) -> OPoly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut i = 0;
        let mut j = 0;
        let shifted: Vec<(Monomial, Rat)> = other
            .terms
            .iter()
            .map(|(mo, co)| (mo.mul(m), -&(co * c)))
            .collect();
        while i < self.terms.len() && j < shifted.len() {
            match ord.cmp(&self.terms[i].0, &shifted[j].0) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(shifted[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let s = &self.terms[i].1 + &shifted[j].1;
                    if !s.is_zero() {
                        out.push((self.terms[i].0.clone(), s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend(shifted[j..].iter().cloned());
        OPoly { terms: out }
    }
}

/// Full reduction of `p` by monic `g`.
fn reduce(p: &OPoly, g: &[OPoly], ord: &MonoOrder) -> OPoly {
    let mut p = p.clone();
    let mut done: Vec<(Monomial, Rat)> = Vec::new();
    while !p.is_zero() {
        let (lm, lc) = p.terms[0].clone();
        let mut hit = false;
        for d in g {
            if let Some(q) = d.lm().div(&lm) {
                p = p.sub_mul(&lc, &q, d, ord);
                hit = true;
                break;
            }
        }
        if !hit {
            done.push(p.terms.remove(0));
        }
    }
    OPoly { terms: done }
}

fn spoly(a: &OPoly, b: &OPoly, ord: &MonoOrder) -> OPoly {
    let l = a.lm().lcm(b.lm());
    let ma = a.lm().div(&l).unwrap();
    let mb = b.lm().div(&l).unwrap();
    let zero = OPoly { terms: Vec::new() };
    let pa = zero.sub_mul(&-Rat::one(), &ma, a, ord);
    pa.sub_mul(&Rat::one(), &mb, b, ord)
}

/// Reduced Gröbner basis of the ideal generated by `eqs`, sorted by
/// increasing leading monomial. Fails with `BudgetExhausted` when the
/// intermediate basis exceeds `max_size` or the meter runs out.
pub fn groebner_basis_with(
    eqs: &[Poly],
    ord: &MonoOrder,
    max_size: usize,
    meter: &Meter,
) -> Result<Vec<Poly>, SolveError> {
    let mut g: Vec<OPoly> = Vec::new();
    for e in eqs {
        let mut o = OPoly::from_poly(e, ord);
        if o.is_zero() {
            continue;
        }
        o.make_monic();
        g.push(o);
    }
    if g.iter().any(|p| p.lm().is_one()) {
        return Ok(alloc::vec![Poly::one()]);
    }
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 0..g.len() {
        for i in 0..j {
            pairs.insert((i, j));
        }
    }
    let mut active: Vec<bool> = alloc::vec![true; g.len()];
    while !pairs.is_empty() {
        meter.check()?;
        // Normal selection strategy: smallest lcm first.
        let &(i, j) = pairs
            .iter()
            .min_by(|&&(a, b), &&(c, d)| {
                let l1 = g[a].lm().lcm(g[b].lm());
                let l2 = g[c].lm().lcm(g[d].lm());
                ord.cmp(&l1, &l2)
            })
            .unwrap();
        pairs.remove(&(i, j));
        if !active[i] || !active[j] {
            continue;
        }
        let (li, lj) = (g[i].lm(), g[j].lm());
        if li.is_coprime(lj) {
            continue;
        }
        let l = li.lcm(lj);
        let chain = (0..g.len()).any(|k| {
            k != i
                && k != j
                && active[k]
                && g[k].lm().divides(&l)
                && !pairs.contains(&(i.min(k), i.max(k)))
                && !pairs.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        let s = spoly(&g[i], &g[j], ord);
        let live: Vec<OPoly> = g
            .iter()
            .zip(&active)
            .filter(|(_, a)| **a)
            .map(|(p, _)| p.clone())
            .collect();
        let mut r = reduce(&s, &live, ord);
        if r.is_zero() {
            continue;
        }
        r.make_monic();
        if r.lm().is_one() {
            return Ok(alloc::vec![Poly::one()]);
        }
        let n = g.len();
        for k in 0..n {
            if active[k] {
                pairs.insert((k, n));
            }
        }
        g.push(r);
        active.push(true);
        if active.iter().filter(|a| **a).count() > max_size {
            return Err(SolveError::BudgetExhausted);
        }
    }
    let live: Vec<OPoly> = g
        .into_iter()
        .zip(active)
        .filter(|(_, a)| *a)
        .map(|(p, _)| p)
        .collect();
    Ok(interreduce(live, ord))
}

fn interreduce(g: Vec<OPoly>, ord: &MonoOrder) -> Vec<Poly> {
    // Minimal basis: drop elements whose leading monomial is divisible by another's.
    let mut minimal: Vec<OPoly> = Vec::new();
    for (k, p) in g.iter().enumerate() {
        let redundant = g.iter().enumerate().any(|(l, q)| {
            l != k && q.lm().divides(p.lm()) && (q.lm() != p.lm() || l < k)
        });
        if !redundant {
            minimal.push(p.clone());
        }
    }
    let mut out: Vec<OPoly> = Vec::new();
    for k in 0..minimal.len() {
        let others: Vec<OPoly> = minimal
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != k)
            .map(|(_, p)| p.clone())
            .collect();
        let head = OPoly {
            terms: alloc::vec![minimal[k].terms[0].clone()],
        };
        let tail = OPoly {
            terms: minimal[k].terms[1..].to_vec(),
        };
        let mut r = reduce(&tail, &others, ord);
        r.terms.insert(0, head.terms[0].clone());
        out.push(r);
    }
    out.sort_by(|a, b| ord.cmp(a.lm(), b.lm()));
    out.iter().map(|p| p.to_poly()).collect()
}

/// Normal form of `p` modulo a Gröbner basis.
pub fn normal_form(p: &Poly, basis: &[Poly], ord: &MonoOrder) -> Poly {
    let g: Vec<OPoly> = basis
        .iter()
        .map(|b| {
            let mut o = OPoly::from_poly(b, ord);
            o.make_monic();
            o
        })
        .collect();
    reduce(&OPoly::from_poly(p, ord), &g, ord).to_poly()
}

/// Leading monomial under `ord`.
pub fn leading_monomial(p: &Poly, ord: &MonoOrder) -> Option<Monomial> {
    p.terms()
        .map(|(m, _)| m)
        .max_by(|a, b| ord.cmp(a, b))
        .cloned()
}
