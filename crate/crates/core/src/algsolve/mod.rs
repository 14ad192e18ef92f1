//! Exact solving of the determining systems: linear propagation, case
//! splitting on zero products and coefficient pivots, and a Gröbner basis
//! fallback. Branches that need algebraic numbers are reported, not solved.

pub mod groebner;
pub mod roots;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cell::Cell;

use crate::arith::{gcd_many, partial_factor, Monomial, Poly, Rat, RatFun, Var};
use crate::detsys::AlgSystem;

pub use groebner::{groebner_basis_with, MonoOrder};

/// Millisecond time source; the core crate has no clock of its own.
pub trait Clock {
    fn now_ms(&self) -> u64;
}

/// A clock that never advances (no timeout).
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> u64 {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveBudget {
    pub max_case_splits: usize,
    pub max_groebner_basis_size: usize,
    pub timeout_ms: u64,
}

impl Default for SolveBudget {
    fn default() -> SolveBudget {
        SolveBudget {
            max_case_splits: 200_000,
            max_groebner_basis_size: 300,
            timeout_ms: 60_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveError {
    BudgetExhausted,
    Inconsistent,
}

/// Tracks elapsed time and case splits against a budget.
pub struct Meter<'a> {
    clock: &'a dyn Clock,
    deadline: u64,
    splits: Cell<usize>,
    budget: SolveBudget,
    tripped: Cell<bool>,
}

impl<'a> Meter<'a> {
    pub fn new(budget: SolveBudget, clock: &'a dyn Clock) -> Meter<'a> {
        Meter {
            clock,
            deadline: clock.now_ms().saturating_add(budget.timeout_ms),
            splits: Cell::new(0),
            budget,
            tripped: Cell::new(false),
        }
    }

    pub fn unlimited() -> Meter<'static> {
        static NC: NoClock = NoClock;
        Meter::new(
            SolveBudget {
                max_case_splits: usize::MAX,
                max_groebner_basis_size: usize::MAX,
                timeout_ms: u64::MAX,
            },
            &NC,
        )
    }

    pub fn budget(&self) -> SolveBudget {
        self.budget
    }

    pub fn check(&self) -> Result<(), SolveError> {
        if self.tripped.get() || self.clock.now_ms() > self.deadline {
            self.tripped.set(true);
            return Err(SolveError::BudgetExhausted);
        }
        Ok(())
    }

    fn split(&self) -> Result<(), SolveError> {
        let n = self.splits.get() + 1;
        self.splits.set(n);
        if n > self.budget.max_case_splits {
            self.tripped.set(true);
            return Err(SolveError::BudgetExhausted);
        }
        self.check()
    }

    pub fn splits(&self) -> usize {
        self.splits.get()
    }

    /// True once the time or split budget has run out.
    pub fn tripped(&self) -> bool {
        self.tripped.get()
    }

    pub fn elapsed_ms(&self) -> u64 {
        let now = self.clock.now_ms();
        now.saturating_sub(self.deadline.saturating_sub(self.budget.timeout_ms))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    /// No parameters.
    NonParametric,
    /// Parameters are generic constants: any nonzero polynomial in them is
    /// invertible and no constraint on them is ever produced.
    Generic,
    /// Parameters are solved for alongside the coefficients; branches carry
    /// polynomial constraints on them.
    Parametric,
}

pub struct SolveRequest<'a> {
    pub system: &'a AlgSystem,
    pub params: &'a [Var],
    pub mode: SolveMode,
    /// Polynomials assumed nonzero (side conditions).
    pub nonzero: Vec<Poly>,
    /// Projective gauge: at least one of these symbols is nonzero. Branch k
    /// sets the first k to zero and the next to one.
    pub gauge: Vec<Var>,
    /// Stop after the first gauge branch that produced a solution.
    pub stop_at_first_gauge: bool,
    pub max_solutions: usize,
}

impl<'a> SolveRequest<'a> {
    pub fn new(system: &'a AlgSystem, params: &'a [Var], mode: SolveMode) -> SolveRequest<'a> {
        SolveRequest {
            system,
            params,
            mode,
            nonzero: Vec::new(),
            gauge: Vec::new(),
            stop_at_first_gauge: false,
            max_solutions: usize::MAX,
        }
    }
}

/// One solution branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    /// Solved symbols, as rational functions of free symbols (and generic parameters).
    pub values: BTreeMap<Var, RatFun>,
    pub free: Vec<Var>,
    /// Relations among parameters that hold on this branch (each `= 0`).
    pub constraints: Vec<Poly>,
    /// Polynomials assumed nonzero on this branch.
    pub nonzero: Vec<Poly>,
}

impl Assignment {
    /// Substitutes the solved values into `p`.
    pub fn apply(&self, p: &Poly) -> RatFun {
        let mut r = RatFun::from_poly(p.clone());
        for v in p.vars() {
            if let Some(val) = self.values.get(&v) {
                r = r.substitute(v, val);
            }
        }
        r
    }

    /// Fixes a free symbol to a constant.
    pub fn fix(&self, v: Var, c: Rat) -> Assignment {
        let cv = RatFun::constant(c);
        let mut out = self.clone();
        out.free.retain(|w| *w != v);
        for val in out.values.values_mut() {
            *val = val.substitute(v, &cv);
        }
        out.values.insert(v, cv);
        out
    }
}

/// A branch that requires an algebraic extension of Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unresolved {
    /// Defining relations (each `= 0`) left after elimination.
    pub relations: Vec<Poly>,
    pub values: BTreeMap<Var, RatFun>,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOutcome {
    pub solutions: Vec<Assignment>,
    pub unresolved: Vec<Unresolved>,
    /// False when the budget ran out before the search finished.
    pub complete: bool,
    pub splits: usize,
}

#[derive(Clone, Debug)]
struct Branch {
    eqs: Vec<Poly>,
    subst: Vec<(Var, RatFun)>,
    nonzero: Vec<Poly>,
    gb_level: u8,
    /// Equations are normalized against the current nonzero set.
    clean: bool,
}

enum Norm {
    Zero,
    Dead,
    Eq(Poly),
}

struct Solver<'m, 'c> {
    unknown: BTreeSet<Var>,
    generic: BTreeSet<Var>,
    params: BTreeSet<Var>,
    mode: SolveMode,
    meter: &'m Meter<'c>,
    all_unknowns: Vec<Var>,
    out: SolveOutcome,
    max_solutions: usize,
    /// Set when a branch was abandoned because an equation grew too large.
    swollen: core::cell::Cell<bool>,
}

/// Equations larger than this abandon their branch (reported as incomplete).
const MAX_EQ_TERMS: usize = 40_000;
/// Upper bound on term products spent on one substitution.
const MAX_SUBST_WORK: usize = 4_000_000;


fn sort_dedup(v: &mut Vec<Poly>) {
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp_key(b)));
    v.dedup();
}

/// Replaces `s` by `num/den` in `e`, clearing the denominator:
/// `den^k e(num/den)` with `k = deg_s e`.
/// `den^k e(num/den)` with `k = deg_s e`; None when the expansion would
/// take more than `MAX_SUBST_WORK` term products.
fn pseudo_subst(e: &Poly, s: Var, num: &Poly, den: &Poly) -> Option<Poly> {
    if !e.contains_var(s) {
        return Some(e.clone());
    }
    if let Some(d) = den.constant_value() {
        let num = num.scale(&d.recip());
        let k = e.degree_in(s) as usize;
        if e.len().saturating_mul(num.len().saturating_pow(k as u32)) > MAX_SUBST_WORK {
            return None;
        }
        return Some(e.substitute(s, &num));
    }
    let coeffs = e.coeffs_in(s);
    let k = coeffs.len() - 1;
    let mut npow = alloc::vec![Poly::one()];
    let mut dpow = alloc::vec![Poly::one()];
    for j in 1..=k {
        npow.push(&npow[j - 1] * num);
        dpow.push(&dpow[j - 1] * den);
    }
    let mut work = 0usize;
    for (j, c) in coeffs.iter().enumerate() {
        let cn = c.len().saturating_mul(npow[j].len());
        work = work.saturating_add(cn.saturating_add(cn.saturating_mul(dpow[k - j].len())));
    }
    if work > MAX_SUBST_WORK {
        return None;
    }
    let mut acc = Poly::zero();
    for (j, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            acc += &(&(c * &npow[j]) * &dpow[k - j]);
        }
    }
    Some(acc)
}

impl<'m, 'c> Solver<'m, 'c> {
    fn done(&self) -> bool {
        self.out.solutions.len() >= self.max_solutions
    }

    fn is_unknown(&self, v: Var) -> bool {
        self.unknown.contains(&v)
    }

    fn nonzero_var(&self, v: Var, br: &Branch) -> bool {
        self.generic.contains(&v) || br.nonzero.contains(&Poly::var(v))
    }

    fn invertible(&self, c: &Poly, br: &Branch) -> bool {
        if c.is_zero() {
            return false;
        }
        if c.vars().iter().all(|v| self.generic.contains(v)) {
            return true;
        }
        if c.len() == 1 && c.vars().iter().all(|&v| self.nonzero_var(v, br)) {
            return true;
        }
        br.nonzero.contains(&c.monic())
    }

    fn has_unknowns(&self, e: &Poly) -> bool {
        e.vars().iter().any(|&v| self.is_unknown(v))
    }

    /// Removes factors known to be nonzero.
    fn strip(&self, e: &Poly, br: &Branch) -> Poly {
        if e.is_zero() {
            return Poly::zero();
        }
        let mut e = e.clone();
        let m = e.monomial_content();
        if !m.is_one() {
            let keep: Vec<(Var, u32)> = m
                .pairs()
                .filter(|&(v, _)| self.nonzero_var(v, br))
                .collect();
            if !keep.is_empty() {
                e = e.div_monomial(&Monomial::from_pairs(&keep)).unwrap();
            }
        }
        for f in &br.nonzero {
            if f.len() < 2 {
                continue;
            }
            while let Some(q) = e.div_exact(f) {
                e = q;
            }
        }
        if !self.generic.is_empty() && e.vars().iter().any(|v| self.generic.contains(v)) {
            let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
            for (mono, c) in e.terms() {
                let mut own = Vec::new();
                let mut gen = Vec::new();
                for (v, k) in mono.pairs() {
                    if self.generic.contains(&v) {
                        gen.push((v, k));
                    } else {
                        own.push((v, k));
                    }
                }
                groups
                    .entry(Monomial::from_pairs(&own))
                    .or_default()
                    .add_term(Monomial::from_pairs(&gen), c.clone());
            }
            let g = gcd_many(groups.values());
            if !g.is_constant() {
                e = e.div_exact(&g).unwrap();
            }
        }
        e
    }

    fn normalize(&self, e: &Poly, br: &Branch) -> Norm {
        let e = self.strip(e, br);
        if e.is_zero() {
            Norm::Zero
        } else if !self.has_unknowns(&e) {
            Norm::Dead
        } else {
            Norm::Eq(e.primitive())
        }
    }

    fn simplify(&self, br: &mut Branch) -> bool {
        if br.clean {
            return true;
        }
        let mut eqs = Vec::with_capacity(br.eqs.len());
        for e in &br.eqs {
            match self.normalize(e, br) {
                Norm::Zero => {}
                Norm::Dead => return false,
                Norm::Eq(e) => eqs.push(e),
            }
        }
        sort_dedup(&mut eqs);
        br.eqs = eqs;
        br.clean = true;
        true
    }

    /// Applies `s = num/den`; returns false if the branch dies.
    fn substitute(&self, br: &mut Branch, s: Var, num: &Poly, den: &Poly) -> bool {
        let mut nz = Vec::with_capacity(br.nonzero.len());
        for f in &br.nonzero {
            if !f.contains_var(s) {
                nz.push(f.clone());
                continue;
            }
            let Some(g) = pseudo_subst(f, s, num, den) else {
                self.swollen.set(true);
                return false;
            };
            if g.is_zero() {
                return false;
            }
            br.clean = false;
            if !g.is_constant() {
                let g = g.monic();
                if !nz.contains(&g) {
                    nz.push(g);
                }
            }
        }
        br.nonzero = nz;
        let mut eqs = Vec::with_capacity(br.eqs.len());
        for e in core::mem::take(&mut br.eqs) {
            if !e.contains_var(s) {
                eqs.push(e);
                continue;
            }
            let e = pseudo_subst(&e, s, num, den);
            let Some(e) = e.filter(|e| e.len() <= MAX_EQ_TERMS) else {
                self.swollen.set(true);
                return false;
            };
            if self.meter.check().is_err() {
                self.swollen.set(true);
                return false;
            }
            if br.clean {
                match self.normalize(&e, br) {
                    Norm::Zero => {}
                    Norm::Dead => return false,
                    Norm::Eq(e) => eqs.push(e),
                }
            } else {
                eqs.push(e);
            }
        }
        sort_dedup(&mut eqs);
        br.eqs = eqs;
        br.subst
            .push((s, RatFun::new(num.clone(), den.clone()).expect("invertible pivot")));
        br.gb_level = 0;
        true
    }

    fn add_nonzero(&self, br: &mut Branch, f: &Poly) -> bool {
        if f.is_zero() {
            return false;
        }
        if f.is_constant() {
            return true;
        }
        let g = f.monic();
        if !br.nonzero.contains(&g) {
            br.nonzero.push(g);
            br.clean = false;
        }
        true
    }

    /// A linear elimination `s = -r/c` with an invertible coefficient `c`.
    /// Equations are sorted by length, so the scan stops at the first
    /// constant-coefficient pivot in a coefficient symbol.
    fn find_pivot(&self, br: &Branch) -> Option<(Var, Poly, Poly)> {
        // score: (is param, coefficient not constant, eq length, coefficient length)
        let mut occ: BTreeMap<Var, usize> = BTreeMap::new();
        for e in &br.eqs {
            for v in e.vars() {
                *occ.entry(v).or_insert(0) += 1;
            }
        }
        let mut best: Option<((u8, u8, usize, usize), Var, usize)> = None;
        // A coefficient symbol whose pivot needs a case split first.
        let mut blocked = false;
        for (k, e) in br.eqs.iter().enumerate() {
            // Per unknown: (max degree, terms containing it, all such terms are exactly s).
            let mut info: BTreeMap<Var, (u32, usize, bool)> = BTreeMap::new();
            for (m, _) in e.terms() {
                let single = m.pairs().count() == 1;
                for (v, d) in m.pairs() {
                    if !self.is_unknown(v) {
                        continue;
                    }
                    let ent = info.entry(v).or_insert((0, 0, true));
                    ent.0 = ent.0.max(d);
                    ent.1 += 1;
                    ent.2 &= single && d == 1;
                }
            }
            if e.len() == 1 && info.len() == 1 {
                let s = *info.keys().next().unwrap();
                return Some((s, Poly::zero(), Poly::one()));
            }
            for (&s, &(deg, clen, cst)) in &info {
                if deg != 1 {
                    continue;
                }
                let fill = (e.len() - clen) * (occ[&s] - 1);
                let score = (self.params.contains(&s) as u8, (!cst) as u8, fill, clen);
                if best.as_ref().map_or(false, |b| score >= b.0) {
                    continue;
                }
                if !cst {
                    let c = e.coeffs_in(s).swap_remove(1);
                    if !self.invertible(&c, br) {
                        blocked |= !self.params.contains(&s);
                        continue;
                    }
                }
                best = Some((score, s, k));
            }
        }
        // Solving for a parameter in terms of coefficient symbols hides the
        // parameter relation; split on the symbol's coefficient instead.
        if self.mode == SolveMode::Parametric && blocked && best.as_ref().map_or(false, |b| b.0 .0 == 1) {
            return None;
        }
        best.map(|(_, s, k)| {
            let mut cs = br.eqs[k].coeffs_in(s);
            let c = cs.swap_remove(1);
            (s, -&cs[0], c)
        })
    }

    fn child(&self, br: &Branch) -> Branch {
        br.clone()
    }

    fn find_split(&mut self, br: &Branch) -> Option<Vec<Branch>> {
        // A product of unknowns vanishes.
        for e in &br.eqs {
            if e.len() == 1 {
                let vars: Vec<Var> = e
                    .vars()
                    .into_iter()
                    .filter(|&v| self.is_unknown(v) && !self.nonzero_var(v, br))
                    .collect();
                let mut kids = Vec::new();
                for (i, &v) in vars.iter().enumerate() {
                    let mut c = self.child(br);
                    let mut ok = true;
                    for &w in &vars[..i] {
                        ok &= self.add_nonzero(&mut c, &Poly::var(w));
                    }
                    if ok && self.substitute(&mut c, v, &Poly::zero(), &Poly::one()) {
                        kids.push(c);
                    }
                }
                return Some(kids);
            }
        }
        // A common monomial factor.
        for e in &br.eqs {
            let m = e.monomial_content();
            let hit = m.pairs().find(|&(v, _)| self.is_unknown(v));
            if let Some((v, _)) = hit {
                let mut a = self.child(br);
                let mut b = self.child(br);
                let mut kids = Vec::new();
                if self.substitute(&mut a, v, &Poly::zero(), &Poly::one()) {
                    kids.push(a);
                }
                if self.add_nonzero(&mut b, &Poly::var(v)) {
                    kids.push(b);
                }
                return Some(kids);
            }
        }
        // Univariate with constant coefficients.
        for (k, e) in br.eqs.iter().enumerate() {
            let vars = e.vars();
            if vars.len() != 1 {
                continue;
            }
            let s = *vars.iter().next().unwrap();
            let cs: Vec<Rat> = e.coeffs_in(s).iter().map(|c| c.constant_term()).collect();
            let roots = roots::rational_roots(&cs);
            let mut kids = Vec::new();
            let mut rest = e.clone();
            if let Some(rs) = &roots {
                for r in rs {
                    let lin = &Poly::var(s) - &Poly::constant(r.clone());
                    while let Some(q) = rest.div_exact(&lin) {
                        rest = q;
                    }
                    let mut c = self.child(br);
                    if self.substitute(&mut c, s, &Poly::constant(r.clone()), &Poly::one()) {
                        kids.push(c);
                    }
                }
            }
            if !rest.is_constant() {
                let mut rel = alloc::vec![rest];
                rel.extend(br.eqs.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, e)| e.clone()));
                self.record_unresolved(br, rel);
            }
            return Some(kids);
        }
        // Linear in s with a coefficient that may vanish: c != 0 or c = 0.
        let mut best: Option<((bool, usize, u32, usize), Poly)> = None;
        for e in &br.eqs {
            for s in e.vars() {
                if !self.is_unknown(s) || e.degree_in(s) != 1 {
                    continue;
                }
                let c = e.coeffs_in(s).swap_remove(1);
                if self.invertible(&c, br) {
                    continue;
                }
                let score = (self.params.contains(&s), c.len(), c.total_degree().unwrap_or(0), e.len());
                if best.as_ref().map_or(true, |b| score < b.0) {
                    best = Some((score, c));
                }
            }
        }
        if let Some((_, c)) = best {
            let mut a = self.child(br);
            let mut b = self.child(br);
            let mut kids = Vec::new();
            if self.add_nonzero(&mut a, &c) {
                kids.push(a);
            }
            b.eqs.push(c);
            b.clean = false;
            b.gb_level = 0;
            kids.push(b);
            return Some(kids);
        }
        // Factor an equation.
        for (k, e) in br.eqs.iter().enumerate() {
            if let Some(fs) = self.factor_eq(e, br) {
                let mut kids = Vec::new();
                for f in fs {
                    let mut c = self.child(br);
                    c.eqs[k] = f;
                    c.clean = false;
                    c.gb_level = 0;
                    kids.push(c);
                }
                return Some(kids);
            }
        }
        None
    }

    /// Splits `e` into factors when it is reducible in a detectable way.
    fn factor_eq(&self, e: &Poly, br: &Branch) -> Option<Vec<Poly>> {
        // Quadratic in some unknown with a square discriminant.
        for s in e.vars() {
            if !self.is_unknown(s) || e.degree_in(s) != 2 {
                continue;
            }
            let cs = e.coeffs_in(s);
            let (c0, c1, c2) = (&cs[0], &cs[1], &cs[2]);
            if !self.invertible(c2, br) {
                continue;
            }
            let disc = &(c1 * c1) - &(c2 * c0).scale(&Rat::from_int(4));
            if let Some(r) = roots::poly_sqrt(&disc) {
                let base = &Poly::var(s).mul_term(&Rat::from_int(2), &Monomial::one()) * c2;
                let base = &base + c1;
                let f1 = &base - &r;
                let f2 = &base + &r;
                if f1 == f2 {
                    return Some(alloc::vec![f1]);
                }
                return Some(alloc::vec![f1, f2]);
            }
        }
        if e.len() > 40 {
            return None;
        }
        let (_, fs) = partial_factor(e);
        if fs.len() >= 2 || fs.iter().any(|(_, k)| *k > 1) {
            return Some(fs.into_iter().map(|(f, _)| f).collect());
        }
        None
    }

    fn record_unresolved(&mut self, br: &Branch, relations: Vec<Poly>) {
        let values = self.back_substitute(br);
        let u = Unresolved { relations, values };
        if !self.out.unresolved.contains(&u) {
            self.out.unresolved.push(u);
        }
    }

    fn back_substitute(&self, br: &Branch) -> BTreeMap<Var, RatFun> {
        let mut values: BTreeMap<Var, RatFun> = BTreeMap::new();
        for (s, val) in br.subst.iter().rev() {
            let mut v = val.clone();
            let vars: BTreeSet<Var> = v.num().vars().union(&v.den().vars()).copied().collect();
            for w in vars {
                if let Some(x) = values.get(&w) {
                    v = v.substitute(w, x);
                }
            }
            values.insert(*s, v);
        }
        values
    }

    fn emit(&mut self, br: &Branch) {
        let values = self.back_substitute(br);
        let free: Vec<Var> = self
            .all_unknowns
            .iter()
            .copied()
            .filter(|v| !values.contains_key(v))
            .collect();
        let mut constraints = Vec::new();
        if self.mode == SolveMode::Parametric {
            for (&v, val) in &values {
                if self.params.contains(&v) {
                    let rel = &(&Poly::var(v) * val.den()) - val.num();
                    constraints.push(rel.primitive());
                }
            }
        }
        let mut nonzero: Vec<Poly> = br
            .nonzero
            .iter()
            .map(|f| {
                let mut r = RatFun::from_poly(f.clone());
                for w in f.vars() {
                    if let Some(x) = values.get(&w) {
                        r = r.substitute(w, x);
                    }
                }
                r.num().monic()
            })
            .filter(|f| !f.is_constant())
            .collect();
        sort_dedup(&mut nonzero);
        let a = Assignment {
            values,
            free,
            constraints,
            nonzero,
        };
        if !self.out.solutions.contains(&a) {
            self.out.solutions.push(a);
        }
    }

    fn order_for(&self, br: &Branch, lex: bool) -> MonoOrder {
        let mut unk: Vec<Var> = Vec::new();
        for e in &br.eqs {
            for v in e.vars() {
                if self.is_unknown(v) && !self.params.contains(&v) && !unk.contains(&v) {
                    unk.push(v);
                }
            }
        }
        unk.sort();
        let mut rest: Vec<Var> = self.params.iter().copied().collect();
        rest.sort();
        if lex {
            let mut all = unk;
            all.extend(rest);
            MonoOrder::lex(all)
        } else {
            MonoOrder::block_grevlex(unk, rest)
        }
    }

    fn solve(&mut self, mut br: Branch) -> Result<(), SolveError> {
        self.meter.check()?;
        if self.done() {
            return Ok(());
        }
        loop {
            self.meter.check()?;
            if !self.simplify(&mut br) {
                return Ok(());
            }
            if br.eqs.is_empty() {
                self.emit(&br);
                return Ok(());
            }
            match self.find_pivot(&br) {
                Some((s, n, d)) => {
                    if !self.substitute(&mut br, s, &n, &d) {
                        return Ok(());
                    }
                }
                None => break,
            }
        }
        if let Some(kids) = self.find_split(&br) {
            for c in kids {
                self.meter.split()?;
                self.solve(c)?;
                if self.done() {
                    break;
                }
            }
            return Ok(());
        }
        if br.gb_level < 2 {
            let ord = self.order_for(&br, br.gb_level == 1);
            match groebner_basis_with(
                &br.eqs,
                &ord,
                self.meter.budget().max_groebner_basis_size,
                self.meter,
            ) {
                Ok(gb) => {
                    if gb.len() == 1 && gb[0].is_one() {
                        return Ok(());
                    }
                    let mut c = br.clone();
                    c.eqs = gb;
                    c.clean = false;
                    c.gb_level = br.gb_level + 1;
                    return self.solve(c);
                }
                Err(SolveError::BudgetExhausted) if self.meter.tripped() => {
                    return Err(SolveError::BudgetExhausted);
                }
                Err(_) => {
                    br.gb_level = 2;
                }
            }
        }
        self.stuck(br)
    }

    /// No rule applies: either the branch needs algebraic numbers or it is
    /// positive dimensional and a free unknown gets specialized.
    fn stuck(&mut self, br: Branch) -> Result<(), SolveError> {
        let coeff_vars: Vec<Var> = {
            let mut v: Vec<Var> = br
                .eqs
                .iter()
                .flat_map(|e| e.vars())
                .filter(|&v| self.is_unknown(v) && !self.params.contains(&v))
                .collect();
            v.sort();
            v.dedup();
            v
        };
        let zero_dim = br.eqs.iter().any(|e| {
            let u: Vec<Var> = e.vars().into_iter().filter(|&v| self.is_unknown(v)).collect();
            u.len() == 1
        });
        if coeff_vars.is_empty() || zero_dim {
            self.record_unresolved(&br, br.eqs.clone());
            return Ok(());
        }
        let s = *coeff_vars.last().unwrap();
        let before = self.out.solutions.len();
        for val in [0i64, 1, -1, 2] {
            let mut c = br.clone();
            if self.substitute(&mut c, s, &Poly::int(val), &Poly::one()) {
                self.meter.split()?;
                self.solve(c)?;
            }
            if self.out.solutions.len() > before || self.done() {
                break;
            }
        }
        Ok(())
    }
}

/// Solves a determining system. The outcome lists every nontrivial branch
/// found; `complete` is false when the budget ran out first.
pub fn solve_system(req: &SolveRequest, meter: &Meter) -> SolveOutcome {
    let params: BTreeSet<Var> = req.params.iter().copied().collect();
    let mut unknown: BTreeSet<Var> = req.system.unknowns.iter().copied().collect();
    for e in &req.system.equations {
        for v in e.vars() {
            if !v.is_xyz() && !params.contains(&v) {
                unknown.insert(v);
            }
        }
    }
    let generic = if req.mode == SolveMode::Generic {
        params.clone()
    } else {
        BTreeSet::new()
    };
    if req.mode == SolveMode::Parametric {
        unknown.extend(params.iter().copied());
    }
    let mut all_unknowns: Vec<Var> = unknown.iter().copied().collect();
    all_unknowns.sort();
    let mut solver = Solver {
        unknown,
        generic,
        params,
        mode: req.mode,
        meter,
        all_unknowns,
        out: SolveOutcome::default(),
        max_solutions: req.max_solutions,
        swollen: core::cell::Cell::new(false),
    };
    let mut root = Branch {
        eqs: req.system.equations.clone(),
        subst: Vec::new(),
        nonzero: Vec::new(),
        gb_level: 0,
        clean: false,
    };
    for f in &req.nonzero {
        if !solver.add_nonzero(&mut root, f) {
            solver.out.complete = true;
            return solver.out;
        }
    }
    let result = if req.gauge.is_empty() {
        solver.solve(root)
    } else {
        let mut r = Ok(());
        for k in 0..req.gauge.len() {
            let mut c = root.clone();
            let mut ok = true;
            for &v in &req.gauge[..k] {
                ok = ok && solver.substitute(&mut c, v, &Poly::zero(), &Poly::one());
            }
            ok = ok && solver.substitute(&mut c, req.gauge[k], &Poly::one(), &Poly::one());
            if !ok {
                continue;
            }
            r = solver.solve(c);
            if r.is_err() || solver.done() {
                break;
            }
            if req.stop_at_first_gauge && !solver.out.solutions.is_empty() {
                break;
            }
        }
        r
    };
    solver.out.complete = result.is_ok() && !solver.swollen.get();
    solver.out.splits = meter.splits();
    solver.out
}

/// Fixed-point pre-pass: `c*s^k = 0` gives `s = 0` and an equation linear
/// in a single symbol is solved. Nothing else is touched.
pub fn propagate_linear(system: &AlgSystem) -> Result<(AlgSystem, BTreeMap<Var, Rat>), SolveError> {
    let mut eqs: Vec<Poly> = system.equations.clone();
    let mut vals: BTreeMap<Var, Rat> = BTreeMap::new();
    loop {
        let mut found: Option<(Var, Rat)> = None;
        for e in &eqs {
            if let Some(c) = e.constant_value() {
                if !c.is_zero() {
                    return Err(SolveError::Inconsistent);
                }
                continue;
            }
            let vars = e.vars();
            if vars.len() != 1 {
                continue;
            }
            let s = *vars.iter().next().unwrap();
            if e.len() == 1 {
                found = Some((s, Rat::zero()));
                break;
            }
            if e.degree_in(s) == 1 {
                let cs = e.coeffs_in(s);
                let v = -&(&cs[0].constant_term() / &cs[1].constant_term());
                found = Some((s, v));
                break;
            }
        }
        match found {
            None => break,
            Some((s, v)) => {
                let val = Poly::constant(v.clone());
                eqs = eqs
                    .iter()
                    .map(|e| e.substitute(s, &val))
                    .filter(|e| !e.is_zero())
                    .collect();
                vals.insert(s, v);
            }
        }
    }
    for e in &eqs {
        if let Some(c) = e.constant_value() {
            if !c.is_zero() {
                return Err(SolveError::Inconsistent);
            }
        }
    }
    Ok((
        AlgSystem {
            equations: eqs,
            unknowns: system.unknowns.clone(),
        },
        vals,
    ))
}

/// Convenience: reduced Gröbner basis under the given order with no budget.
pub fn groebner_basis(eqs: &[Poly], order: &MonoOrder) -> Vec<Poly> {
    groebner_basis_with(eqs, order, usize::MAX, &Meter::unlimited()).expect("unlimited budget")
}
