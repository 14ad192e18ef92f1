//! Search orchestration: candidate shapes for p and q, the degree loop, and
//! the specializations that fix q from the factors of N or seed p from the
//! monomials of M. Every emitted sigma has passed the exact residual check.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::algsolve::{
    solve_system, Assignment, Clock, Meter, SolveBudget, SolveMode, SolveRequest, Unresolved,
};
use crate::arith::{gcd, partial_factor, Mono, Poly, Rat, RatFun, Var, X, Y, Z};
use crate::detsys::{
    extract_from, extract_system, generic_on, generic_poly, Candidate,
    IdentityParts, SymKind, SymbolTable,
};
use crate::odemodel::{degree_report, BoundKind, Ode2};
use crate::verify::verify_sigma;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyKind {
    QDividesN,
    QEqualsUN(Var),
    NOfXOnly,
    CommonFactor,
    MonomialSeed,
    /// sigma = -D_x[nu]/nu for polynomial nu (a linear system).
    PolynomialNu,
    Base,
}

impl StrategyKind {
    pub fn name(&self) -> String {
        match self {
            StrategyKind::QDividesN => "q-div-n".into(),
            StrategyKind::QEqualsUN(u) => alloc::format!(
                "q-u-n:{}",
                match u.0 {
                    0 => "x",
                    1 => "y",
                    _ => "z",
                }
            ),
            StrategyKind::NOfXOnly => "n-of-x".into(),
            StrategyKind::CommonFactor => "common-factor".into(),
            StrategyKind::MonomialSeed => "seed-monomials".into(),
            StrategyKind::PolynomialNu => "poly-nu".into(),
            StrategyKind::Base => "base".into(),
        }
    }

    pub fn parse(s: &str) -> Option<StrategyKind> {
        Some(match s {
            "q-div-n" => StrategyKind::QDividesN,
            "q-u-n:x" => StrategyKind::QEqualsUN(X),
            "q-u-n:y" => StrategyKind::QEqualsUN(Y),
            "q-u-n:z" => StrategyKind::QEqualsUN(Z),
            "n-of-x" => StrategyKind::NOfXOnly,
            "common-factor" => StrategyKind::CommonFactor,
            "seed-monomials" => StrategyKind::MonomialSeed,
            "poly-nu" => StrategyKind::PolynomialNu,
            "base" => StrategyKind::Base,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub min_degree: u32,
    pub max_degree: u32,
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyPlan {
    pub specs: Vec<StrategySpec>,
}

impl StrategyPlan {
    /// PolynomialNu, MonomialSeed, QDividesN, QEqualsUN(z, x, y), CommonFactor,
    /// NOfXOnly when N = N(x),
    /// then Base over 1..=n_max.
    pub fn auto(ode: &Ode2, n_max: u32) -> StrategyPlan {
        let mut kinds = alloc::vec![
            StrategyKind::PolynomialNu,
            StrategyKind::MonomialSeed,
            StrategyKind::QDividesN,
            StrategyKind::QEqualsUN(Z),
            StrategyKind::QEqualsUN(X),
            StrategyKind::QEqualsUN(Y),
            StrategyKind::CommonFactor,
        ];
        if n_of_x(ode) {
            kinds.push(StrategyKind::NOfXOnly);
        }
        kinds.push(StrategyKind::Base);
        StrategyPlan {
            specs: kinds
                .into_iter()
                .map(|kind| StrategySpec {
                    kind,
                    min_degree: 1,
                    max_degree: n_max,
                })
                .collect(),
        }
    }

    /// Parameter-branch analysis: NOfXOnly when N = N(x), then Base.
    pub fn parametric(ode: &Ode2, n_max: u32) -> StrategyPlan {
        let mut kinds = alloc::vec![];
        if n_of_x(ode) {
            kinds.push(StrategyKind::NOfXOnly);
        }
        kinds.push(StrategyKind::Base);
        StrategyPlan {
            specs: kinds
                .into_iter()
                .map(|kind| StrategySpec {
                    kind,
                    min_degree: 1,
                    max_degree: n_max,
                })
                .collect(),
        }
    }

    pub fn single(kind: StrategyKind, n_max: u32) -> StrategyPlan {
        StrategyPlan {
            specs: alloc::vec![StrategySpec {
                kind,
                min_degree: 1,
                max_degree: n_max,
            }],
        }
    }

    /// Base, when present, occurs once and last; degree ranges are sane.
    pub fn is_valid(&self) -> bool {
        let bases = self
            .specs
            .iter()
            .filter(|s| s.kind == StrategyKind::Base)
            .count();
        let base_ok = bases == 0
            || (bases == 1 && self.specs.last().map(|s| s.kind) == Some(StrategyKind::Base));
        base_ok
            && self
                .specs
                .iter()
                .all(|s| 1 <= s.min_degree && s.min_degree <= s.max_degree)
    }
}

#[derive(Clone)]
pub struct SearchConfig<'a> {
    pub n_max: u32,
    pub budget: SolveBudget,
    pub clock: &'a dyn Clock,
    /// How parameters of the ODE are treated (ignored when there are none).
    pub mode: SolveMode,
    /// Side conditions, polynomials in the parameters.
    pub nonzero: Vec<Poly>,
    /// Collect the branches of every gauge choice, not just the first that succeeds.
    pub all_branches: bool,
}

impl<'a> SearchConfig<'a> {
    pub fn new(clock: &'a dyn Clock) -> SearchConfig<'a> {
        SearchConfig {
            n_max: 7,
            budget: SolveBudget::default(),
            clock,
            mode: SolveMode::Generic,
            nonzero: Vec::new(),
            all_branches: false,
        }
    }
}

/// One verified solution branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaBranch {
    pub sigma: RatFun,
    pub assignment: Assignment,
    /// Parameter relations (each `= 0`) under which sigma holds.
    pub constraints: Vec<Poly>,
    /// Numerator and denominator before the free coefficients are fixed.
    pub general: (RatFun, RatFun),
    pub free: Vec<Var>,
}

impl SigmaBranch {
    /// Parameter relations of the branch, each `= 0`: every solved
    /// parameter as `s - value` with denominators cleared, then the
    /// solver's own constraints.
    pub fn relations(&self, params: &[Var]) -> Vec<Poly> {
        let mut out = Vec::new();
        for v in params {
            if let Some(val) = self.assignment.values.get(v) {
                let r = &(&Poly::var(*v) * val.den()) - val.num();
                out.push(r.primitive());
            }
        }
        for c in &self.constraints {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SigmaResult {
    pub sigma: RatFun,
    pub strategy: StrategySpec,
    /// Degree of the candidate that produced sigma (0 for fixed shapes).
    pub degree: u32,
    pub assignment: Assignment,
    pub elapsed_ms: u64,
    pub verified: bool,
    pub branches: Vec<SigmaBranch>,
    pub unresolved: Vec<Unresolved>,
    /// Per-strategy elapsed time, in the order tried.
    pub timings: Vec<(String, u64)>,
}

#[derive(Clone, Debug)]
pub enum SearchError {
    NotFound {
        tried: Vec<String>,
        max_degree: u32,
        /// False when some attempt hit its split or basis-size budget.
        exhaustive: bool,
        unresolved: Vec<Unresolved>,
    },
    BudgetExhausted {
        tried: Vec<String>,
        unresolved: Vec<Unresolved>,
    },
    Inapplicable(String),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::NotFound {
                tried, max_degree, ..
            } => write!(
                f,
                "no sigma found (strategies: {}; degrees up to {})",
                tried.join(", "),
                max_degree
            ),
            SearchError::BudgetExhausted { tried, .. } => {
                write!(f, "budget exhausted (strategies: {})", tried.join(", "))
            }
            SearchError::Inapplicable(why) => write!(f, "inapplicable: {}", why),
        }
    }
}

/// True when N depends on x only.
pub fn n_of_x(ode: &Ode2) -> bool {
    !ode.n().contains_var(Y) && !ode.n().contains_var(Z)
}

/// Upper bound on deg p for a q of degree `qdeg`.
pub fn p_bound(ode: &Ode2, qdeg: u32) -> u32 {
    match degree_report(ode).2 {
        BoundKind::Balanced => qdeg,
        BoundKind::Excess(k) => qdeg + k,
    }
}

/// Monic divisors of N in (x, y, z), ignoring factors free of x, y, z,
/// sorted by increasing degree. The first entry is 1.
pub fn xyz_divisors(n: &Poly) -> Vec<Poly> {
    let (_, fs) = partial_factor(n);
    let mut out = alloc::vec![Poly::one()];
    for (f, e) in fs.iter().filter(|(f, _)| f.degree() > 0) {
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
    out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| poly_cmp(a, b)));
    out
}

/// N with its x, y, z-free content removed.
fn n_xyz_part(ode: &Ode2) -> Poly {
    let (_, fs) = partial_factor(ode.n());
    let mut acc = Poly::one();
    for (f, e) in fs.iter().filter(|(f, _)| f.degree() > 0) {
        acc = &acc * &f.pow(*e);
    }
    acc
}

/// A pair of candidates plus the projective gauge for the solver.
struct Shape {
    table: SymbolTable,
    p: Candidate,
    q: Candidate,
    extra: Vec<Var>,
    gauge: Vec<Var>,
}

impl Shape {
    fn unknowns(&self) -> Vec<Var> {
        let mut u = self.p.syms.clone();
        u.extend(self.q.syms.iter().copied());
        u.extend(self.extra.iter().copied());
        u
    }
}

/// Gauge symbols: coefficients of the top-degree monomials of a generic q,
/// largest monomial first.
fn top_gauge(q: &Candidate, n: u32) -> Vec<Var> {
    q.syms
        .iter()
        .zip(&q.monos)
        .filter(|(_, m)| m.degree() == n)
        .map(|(s, _)| *s)
        .collect()
}

struct Outcome {
    branches: Vec<SigmaBranch>,
    unresolved: Vec<Unresolved>,
    complete: bool,
    timed_out: bool,
}

struct Runner<'c, 'a> {
    ode: &'c Ode2,
    cfg: &'c SearchConfig<'a>,
    deadline: u64,
    translation: RatFun,
    unresolved: Vec<Unresolved>,
    exhaustive: bool,
    tried: Vec<String>,
}

impl<'c, 'a> Runner<'c, 'a> {
    fn new(ode: &'c Ode2, cfg: &'c SearchConfig<'a>) -> Runner<'c, 'a> {
        let phi = ode.phi();
        let translation = -&phi
            .checked_div(&RatFun::var(Z))
            .expect("y' is a nonzero polynomial");
        Runner {
            ode,
            cfg,
            deadline: cfg.clock.now_ms().saturating_add(cfg.budget.timeout_ms),
            translation,
            unresolved: Vec::new(),
            exhaustive: true,
            tried: Vec::new(),
        }
    }

    fn mode(&self) -> SolveMode {
        if self.ode.params().is_empty() {
            SolveMode::NonParametric
        } else {
            self.cfg.mode
        }
    }

    fn meter_budget(&self) -> SolveBudget {
        let now = self.cfg.clock.now_ms();
        SolveBudget {
            timeout_ms: self.deadline.saturating_sub(now),
            ..self.cfg.budget
        }
    }

    fn out_of_time(&self) -> bool {
        self.cfg.clock.now_ms() > self.deadline
    }

    fn solve_shape(&mut self, shape: &Shape) -> Outcome {
        let id = IdentityParts::new(self.ode).identity(&shape.p.poly, &shape.q.poly);
        let sys = extract_system(&id, &shape.unknowns());
        self.solve_sys(shape, &sys, None)
    }

    fn solve_sys(
        &mut self,
        shape: &Shape,
        sys: &crate::detsys::AlgSystem,
        pre: Option<&BTreeMap<Var, Poly>>,
    ) -> Outcome {
        let params = self.ode.param_vars();
        let mode = self.mode();
        let mut req = SolveRequest::new(sys, &params, mode);
        req.nonzero = self.cfg.nonzero.clone();
        req.gauge = shape.gauge.clone();
        req.stop_at_first_gauge = !self.cfg.all_branches;
        let meter = Meter::new(self.meter_budget(), self.cfg.clock);
        let out = solve_system(&req, &meter);
        let timed_out = !out.complete && self.out_of_time();
        if !out.complete {
            self.exhaustive = false;
        }
        for u in &out.unresolved {
            if !self.unresolved.contains(u) {
                self.unresolved.push(u.clone());
            }
        }
        let mut branches: Vec<SigmaBranch> = Vec::new();
        for a in &out.solutions {
            if let Some(b) = self.branch_of(shape, a, pre, mode) {
                if !branches.iter().any(|c| c.sigma == b.sigma && c.constraints == b.constraints) {
                    branches.push(b);
                }
            }
        }
        sort_branches(&mut branches);
        Outcome {
            branches,
            unresolved: out.unresolved,
            complete: out.complete,
            timed_out,
        }
    }

    /// Turns a solver assignment into a verified sigma, or None when trivial.
    fn branch_of(
        &self,
        shape: &Shape,
        a: &Assignment,
        pre: Option<&BTreeMap<Var, Poly>>,
        mode: SolveMode,
    ) -> Option<SigmaBranch> {
        let (mut pg, mut qg) = (shape.p.poly.clone(), shape.q.poly.clone());
        if let Some(pre) = pre {
            pg = subst_polys(&pg, pre);
            qg = subst_polys(&qg, pre);
        }
        let p = a.apply(&pg);
        let q = a.apply(&qg);
        let params = self.ode.param_vars();
        let free: Vec<Var> = a
            .free
            .iter()
            .copied()
            .filter(|v| !params.contains(v))
            .collect();
        let (ps, qs) = specialize_free(&p, &q, &free)?;
        let sigma = ps.checked_div(&qs).ok()?;
        if sigma.is_zero() {
            return None;
        }
        // Parametric branches are checked on the specialized ODE.
        let ode = if mode == SolveMode::Parametric {
            let mut phi = self.ode.phi();
            for v in &params {
                if let Some(val) = a.values.get(v) {
                    phi = phi.substitute(*v, val);
                }
            }
            Ode2::from_ratfun(&phi, self.ode.params().to_vec())
        } else {
            self.ode.clone()
        };
        let translation = if mode == SolveMode::Parametric {
            -&ode.phi().checked_div(&RatFun::var(Z)).ok()?
        } else {
            self.translation.clone()
        };
        if sigma == translation {
            return None;
        }
        if !verify_sigma(&sigma, &ode).0 {
            return None;
        }
        Some(SigmaBranch {
            sigma,
            assignment: a.clone(),
            constraints: a.constraints.clone(),
            general: (p, q),
            free,
        })
    }
}

fn subst_polys(p: &Poly, vals: &BTreeMap<Var, Poly>) -> Poly {
    let mut out = p.clone();
    for (v, val) in vals {
        out = out.substitute(*v, val);
    }
    out
}

/// Fixes free coefficients greedily to 0 (or 1, 2 if 0 kills p or q).
fn specialize_free(p: &RatFun, q: &RatFun, free: &[Var]) -> Option<(RatFun, RatFun)> {
    let (mut p, mut q) = (p.clone(), q.clone());
    if p.is_zero() || q.is_zero() {
        return None;
    }
    for &v in free {
        let mut done = false;
        for c in [0i64, 1, 2, -1, 3] {
            let vals: BTreeMap<Var, Rat> = [(v, Rat::from_int(c))].into_iter().collect();
            let (Some(p2), Some(q2)) = (p.eval_partial(&vals), q.eval_partial(&vals)) else {
                continue;
            };
            if !p2.is_zero() && !q2.is_zero() {
                p = p2;
                q = q2;
                done = true;
                break;
            }
        }
        if !done {
            return None;
        }
    }
    Some((p, q))
}

fn sigma_key(s: &RatFun) -> (u32, usize) {
    (s.degree(), s.num().len() + s.den().len())
}

fn sort_branches(b: &mut [SigmaBranch]) {
    b.sort_by(|x, y| {
        sigma_key(&x.sigma)
            .cmp(&sigma_key(&y.sigma))
            .then_with(|| poly_cmp(x.sigma.num(), y.sigma.num()))
            .then_with(|| poly_cmp(x.sigma.den(), y.sigma.den()))
    });
}

fn fixed(p: Poly) -> Candidate {
    Candidate::fixed(p)
}

fn mono_support(p: &Poly) -> Vec<Mono> {
    let mut v: Vec<Mono> = p.collect_xyz().into_keys().collect();
    v.sort();
    v.reverse();
    v
}

/// Everything needed to emit a result.
struct Found {
    branches: Vec<SigmaBranch>,
    degree: u32,
}

type StepResult = Result<Option<Found>, SearchError>;

impl<'c, 'a> Runner<'c, 'a> {
    fn check_time(&self) -> Result<(), SearchError> {
        if self.out_of_time() {
            return Err(SearchError::BudgetExhausted {
                tried: self.tried.clone(),
                unresolved: self.unresolved.clone(),
            });
        }
        Ok(())
    }

    fn finish(&self, o: Outcome, degree: u32) -> StepResult {
        if !o.branches.is_empty() {
            return Ok(Some(Found {
                branches: o.branches,
                degree,
            }));
        }
        if o.timed_out {
            return Err(SearchError::BudgetExhausted {
                tried: self.tried.clone(),
                unresolved: self.unresolved.clone(),
            });
        }
        let _ = o.unresolved;
        let _ = o.complete;
        Ok(None)
    }

    fn q_fixed(&mut self, q: Poly, pdeg: u32) -> StepResult {
        self.check_time()?;
        let mut table = SymbolTable::new(self.ode);
        let p = generic_poly(pdeg, &[X, Y, Z], SymKind::A, &mut table);
        let shape = Shape {
            table,
            p,
            q: fixed(q),
            extra: Vec::new(),
            gauge: Vec::new(),
        };
        let o = self.solve_shape(&shape);
        self.finish(o, 0)
    }

    fn q_divides_n(&mut self) -> StepResult {
        let n = n_xyz_part(self.ode);
        let bound = p_bound(self.ode, n.degree());
        self.q_fixed(n, bound)
    }

    fn q_equals_un(&mut self, u: Var) -> StepResult {
        let n = n_xyz_part(self.ode);
        let bound = p_bound(self.ode, n.degree() + 1);
        self.q_fixed(&Poly::var(u) * &n, bound)
    }

    /// Generic p of degree `pdeg` (optionally times `cf`) over generic q of
    /// degree `n` in `qvars`.
    fn generic_shape(&self, n: u32, qvars: &[Var], cf: Option<&Poly>) -> Shape {
        let mut table = SymbolTable::new(self.ode);
        let pdeg = p_bound(self.ode, n);
        let mut p = match cf {
            Some(cf) => generic_poly(pdeg - cf.degree(), &[X, Y, Z], SymKind::A, &mut table),
            None => generic_poly(pdeg, &[X, Y, Z], SymKind::A, &mut table),
        };
        if let Some(cf) = cf {
            p.poly = &p.poly * cf;
        }
        let q = generic_poly(n, qvars, SymKind::B, &mut table);
        let gauge = top_gauge(&q, n);
        Shape {
            table,
            p,
            q,
            extra: Vec::new(),
            gauge,
        }
    }

    /// One degree of the base loop, with the linear prefilter and the
    /// common-factor shortcut tried first when they apply.
    fn base_degree(&mut self, n: u32, qvars: &[Var]) -> StepResult {
        self.check_time()?;
        let (ny, nz) = (self.ode.n().partial(Y), self.ode.n().partial(Z));
        if !ny.is_zero() && !nz.is_zero() {
            if let Some(f) = self.prefiltered(n, qvars)? {
                return Ok(Some(f));
            }
        }
        if ny.is_zero() && !nz.is_zero() {
            let cf = self.ode.n().div_exact(&gcd(self.ode.n(), &nz)).unwrap();
            let cf = n_xyz_part_of(&cf);
            if cf.degree() > 0 && cf.degree() <= p_bound(self.ode, n) {
                let shape = self.generic_shape(n, qvars, Some(&cf));
                let o = self.solve_shape(&shape);
                if let Some(f) = self.finish(o, n)? {
                    return Ok(Some(f));
                }
            }
        }
        let shape = self.generic_shape(n, qvars, None);
        let o = self.solve_shape(&shape);
        self.finish(o, n)
    }

    fn prefiltered(&mut self, n: u32, qvars: &[Var]) -> StepResult {
        let mut shape = self.generic_shape(n, qvars, None);
        let Some(pre) = prefilter_assignment(self.ode, &mut shape, self.cfg.clock, self.meter_budget())
        else {
            return Ok(None);
        };
        let p = subst_polys(&shape.p.poly, &pre);
        let q = subst_polys(&shape.q.poly, &pre);
        if p.is_zero() || q.is_zero() {
            return Ok(None);
        }
        let mut unknowns: Vec<Var> = Vec::new();
        for v in p.symbols().into_iter().chain(q.symbols()) {
            if !self.ode.param_vars().contains(&v) && !unknowns.contains(&v) {
                unknowns.push(v);
            }
        }
        // Gauge over the symbols in q's top-degree coefficients.
        let mut gauge: Vec<Var> = Vec::new();
        for (m, c) in q.collect_xyz().iter().rev() {
            if m.degree() != n {
                continue;
            }
            for v in c.symbols() {
                if unknowns.contains(&v) && !gauge.contains(&v) {
                    gauge.push(v);
                }
            }
        }
        if gauge.is_empty() {
            return Ok(None);
        }
        let id = IdentityParts::new(self.ode).identity(&p, &q);
        let sys = extract_from(&id.collect_xyz(), &unknowns);
        let reduced = Shape {
            table: shape.table.clone(),
            p: shape.p.clone(),
            q: shape.q.clone(),
            extra: shape.extra.clone(),
            gauge,
        };
        let o = self.solve_sys(&reduced, &sys, Some(&pre));
        self.finish(o, n)
    }

    fn degree_loop(&mut self, spec: &StrategySpec, qvars: &[Var]) -> StepResult {
        for n in spec.min_degree..=spec.max_degree.min(self.cfg.n_max) {
            if let Some(f) = self.base_degree(n, qvars)? {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    /// sigma = -D_x[nu]/nu with nu polynomial of degree m: q = N nu and
    /// p = -N D_x[nu], where nu solves the linear equation
    /// D_x^2 nu - phi_z D_x nu - phi_y nu = 0 (cleared by N^3).
    fn polynomial_nu(&mut self, m_max: u32) -> StepResult {
        let (m_, n_) = (self.ode.m().clone(), self.ode.n().clone());
        let dpoly = |f: &Poly| -> Poly {
            &(&n_ * &(&f.partial(X) + &(&Poly::z() * &f.partial(Y)))) + &(&m_ * &f.partial(Z))
        };
        let cz = &(&m_.partial(Z) * &n_) - &(&m_ * &n_.partial(Z));
        let cy = &(&m_.partial(Y) * &n_) - &(&m_ * &n_.partial(Y));
        let dn = dpoly(&n_);
        for m in 1..=m_max {
            self.check_time()?;
            let mut table = SymbolTable::new(self.ode);
            let nu = generic_poly(m, &[X, Y, Z], SymKind::B, &mut table);
            let d = dpoly(&nu.poly);
            let e = &(&(&(&n_ * &dpoly(&d)) - &(&d * &dn)) - &(&cz * &d)) - &(&(&cy * &n_) * &nu.poly);
            let sys = extract_system(&e, &nu.syms);
            let gauge = top_gauge(&nu, m);
            let shape = Shape {
                table,
                p: Candidate {
                    poly: -&d,
                    syms: Vec::new(),
                    monos: Vec::new(),
                },
                q: Candidate {
                    poly: &n_ * &nu.poly,
                    syms: nu.syms.clone(),
                    monos: nu.monos.clone(),
                },
                extra: Vec::new(),
                gauge,
            };
            let o = self.solve_sys(&shape, &sys, None);
            if let Some(f) = self.finish(o, n_.degree() + m)? {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    /// q = N_f * q_m with N_f dividing N and q_m generic of degree m,
    /// by increasing deg q, larger N_f first.
    fn common_factor(&mut self, m_max: u32, seed: Option<&[Mono]>) -> StepResult {
        let divs = xyz_divisors(&n_xyz_part(self.ode));
        let mut pairs: Vec<(u32, usize, u32)> = Vec::new();
        for (k, nf) in divs.iter().enumerate() {
            for m in 0..=m_max {
                pairs.push((nf.degree() + m, k, m));
            }
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        for (qdeg, k, m) in pairs {
            let nf = &divs[k];
            self.check_time()?;
            let mut table = SymbolTable::new(self.ode);
            let p = match seed {
                Some(monos) => generic_on(monos, SymKind::A, &mut table),
                None => {
                    if qdeg == 0 {
                        continue;
                    }
                    generic_poly(p_bound(self.ode, qdeg), &[X, Y, Z], SymKind::A, &mut table)
                }
            };
            let mut q = generic_poly(m, &[X, Y, Z], SymKind::B, &mut table);
            let gauge = top_gauge(&q, m);
            q.poly = &q.poly * nf;
            let shape = Shape {
                table,
                p,
                q,
                extra: Vec::new(),
                gauge,
            };
            let o = self.solve_shape(&shape);
            if let Some(f) = self.finish(o, qdeg)? {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    /// p on the monomial support of M (paired with q = N_f * q_m) or of M_z
    /// (paired with q = N).
    fn monomial_seed(&mut self) -> StepResult {
        let sm = mono_support(self.ode.m());
        let smz = mono_support(&self.ode.m().partial(Z));
        if !sm.is_empty() {
            if let Some(f) = self.common_factor(2, Some(&sm))? {
                return Ok(Some(f));
            }
        }
        if !smz.is_empty() {
            self.check_time()?;
            let mut table = SymbolTable::new(self.ode);
            let p = generic_on(&smz, SymKind::A, &mut table);
            let shape = Shape {
                table,
                p,
                q: fixed(n_xyz_part(self.ode)),
                extra: Vec::new(),
                gauge: Vec::new(),
            };
            let o = self.solve_shape(&shape);
            return self.finish(o, 0);
        }
        Ok(None)
    }

    fn run_spec(&mut self, spec: &StrategySpec) -> StepResult {
        self.tried.push(spec.kind.name());
        match spec.kind {
            StrategyKind::QDividesN => self.q_divides_n(),
            StrategyKind::QEqualsUN(u) => self.q_equals_un(u),
            StrategyKind::NOfXOnly => {
                if !n_of_x(self.ode) {
                    return Err(SearchError::Inapplicable("N depends on y or y'".into()));
                }
                self.degree_loop(spec, &[X, Y])
            }
            StrategyKind::CommonFactor => self.common_factor(spec.max_degree.min(2), None),
            StrategyKind::PolynomialNu => self.polynomial_nu(spec.max_degree.min(self.cfg.n_max)),
            StrategyKind::MonomialSeed => self.monomial_seed(),
            StrategyKind::Base => self.degree_loop(spec, &[X, Y, Z]),
        }
    }
}

fn n_xyz_part_of(p: &Poly) -> Poly {
    let (_, fs) = partial_factor(p);
    let mut acc = Poly::one();
    for (f, e) in fs.iter().filter(|(f, _)| f.degree() > 0) {
        acc = &acc * &f.pow(*e);
    }
    acc
}

/// Solves q N_y - p N_z - N P = 0 (linear in all coefficients) and returns
/// the coefficients of p and q in terms of the remaining free symbols.
fn prefilter_assignment(
    ode: &Ode2,
    shape: &mut Shape,
    clock: &dyn Clock,
    budget: SolveBudget,
) -> Option<BTreeMap<Var, Poly>> {
    let d = shape.p.monos.iter().chain(&shape.q.monos).map(|m| m.degree()).max()?;
    let pc = generic_poly(d, &[X, Y, Z], SymKind::C, &mut shape.table);
    let n = ode.n();
    let e = &(&(&shape.q.poly * &n.partial(Y)) - &(&shape.p.poly * &n.partial(Z))) - &(n * &pc.poly);
    let mut unknowns = shape.unknowns();
    unknowns.extend(pc.syms.iter().copied());
    let sys = extract_system(&e, &unknowns);
    let params = ode.param_vars();
    let req = SolveRequest::new(&sys, &params, SolveMode::Generic);
    let meter = Meter::new(budget, clock);
    let out = solve_system(&req, &meter);
    let a = out.solutions.into_iter().next()?;
    let mut vals = BTreeMap::new();
    for (v, r) in &a.values {
        if !r.den().is_constant() {
            return None;
        }
        let inv = r.den().constant_value().unwrap().recip();
        vals.insert(*v, r.num().scale(&inv));
    }
    shape.extra = pc.syms;
    Some(vals)
}

/// Runs a plan; the first strategy yielding a verified sigma wins.
pub fn run_plan(ode: &Ode2, plan: &StrategyPlan, cfg: &SearchConfig) -> Result<SigmaResult, SearchError> {
    let start = cfg.clock.now_ms();
    let mut r = Runner::new(ode, cfg);
    let mut timings = Vec::new();
    let mut max_degree = 0;
    let global = r.deadline;
    for (i, spec) in plan.specs.iter().enumerate() {
        let t0 = cfg.clock.now_ms();
        // The linear nu pass is a cheap prelude; it may not starve the rest.
        let capped = spec.kind == StrategyKind::PolynomialNu && i + 1 < plan.specs.len();
        if capped {
            r.deadline = global.min(t0 + global.saturating_sub(t0) / 4);
        }
        let mut res = r.run_spec(spec);
        r.deadline = global;
        if capped && matches!(res, Err(SearchError::BudgetExhausted { .. })) && !r.out_of_time() {
            r.exhaustive = false;
            res = Ok(None);
        }
        timings.push((spec.kind.name(), cfg.clock.now_ms().saturating_sub(t0)));
        match res {
            Ok(Some(f)) => {
                let first = f.branches[0].clone();
                return Ok(SigmaResult {
                    sigma: first.sigma.clone(),
                    strategy: *spec,
                    degree: f.degree,
                    assignment: first.assignment.clone(),
                    elapsed_ms: cfg.clock.now_ms().saturating_sub(start),
                    verified: true,
                    branches: f.branches,
                    unresolved: r.unresolved.clone(),
                    timings,
                });
            }
            Ok(None) => {
                if matches!(
                    spec.kind,
                    StrategyKind::Base | StrategyKind::NOfXOnly | StrategyKind::PolynomialNu
                ) {
                    max_degree = max_degree.max(spec.max_degree.min(cfg.n_max));
                }
            }
            Err(SearchError::Inapplicable(_)) if plan.specs.len() > 1 => {}
            Err(e) => return Err(e),
        }
    }
    Err(SearchError::NotFound {
        tried: r.tried.clone(),
        max_degree,
        exhaustive: r.exhaustive,
        unresolved: r.unresolved.clone(),
    })
}

pub fn run_auto(ode: &Ode2, cfg: &SearchConfig) -> Result<SigmaResult, SearchError> {
    run_plan(ode, &StrategyPlan::auto(ode, cfg.n_max), cfg)
}

pub fn run_asymm(ode: &Ode2, cfg: &SearchConfig) -> Result<SigmaResult, SearchError> {
    run_plan(ode, &StrategyPlan::single(StrategyKind::Base, cfg.n_max), cfg)
}

pub fn run_q_divides_n(ode: &Ode2, cfg: &SearchConfig) -> Result<SigmaResult, SearchError> {
    run_plan(ode, &StrategyPlan::single(StrategyKind::QDividesN, cfg.n_max), cfg)
}

pub fn run_q_equals_un(ode: &Ode2, u: Var, cfg: &SearchConfig) -> Result<SigmaResult, SearchError> {
    run_plan(ode, &StrategyPlan::single(StrategyKind::QEqualsUN(u), cfg.n_max), cfg)
}

pub fn run_n_of_x(ode: &Ode2, cfg: &SearchConfig) -> Result<SigmaResult, SearchError> {
    run_plan(ode, &StrategyPlan::single(StrategyKind::NOfXOnly, cfg.n_max), cfg)
}

pub fn run_monomial_seed(ode: &Ode2, cfg: &SearchConfig) -> Result<SigmaResult, SearchError> {
    run_plan(ode, &StrategyPlan::single(StrategyKind::MonomialSeed, cfg.n_max), cfg)
}

/// Outcome of the linear prefilter at degree n: p and q with their
/// coefficients expressed through the remaining free symbols.
#[derive(Clone, Debug)]
pub struct Prefiltered {
    pub p: Poly,
    pub q: Poly,
    pub free: Vec<Var>,
    pub table: SymbolTable,
    /// Number of coefficients of p and q before the prefilter.
    pub before: usize,
}

pub fn run_prefilter_11(ode: &Ode2, n: u32, cfg: &SearchConfig) -> Result<Prefiltered, SearchError> {
    let (ny, nz) = (ode.n().partial(Y), ode.n().partial(Z));
    if ny.is_zero() || nz.is_zero() {
        return Err(SearchError::Inapplicable("needs N_y != 0 and N_y' != 0".into()));
    }
    let r = Runner::new(ode, cfg);
    let mut shape = r.generic_shape(n, &[X, Y, Z], None);
    let before = shape.p.syms.len() + shape.q.syms.len();
    let pre = prefilter_assignment(ode, &mut shape, cfg.clock, cfg.budget).ok_or(
        SearchError::NotFound {
            tried: alloc::vec!["prefilter".into()],
            max_degree: n,
            exhaustive: true,
            unresolved: Vec::new(),
        },
    )?;
    let p = subst_polys(&shape.p.poly, &pre);
    let q = subst_polys(&shape.q.poly, &pre);
    let mut free: Vec<Var> = p.symbols().into_iter().chain(q.symbols()).collect();
    free.sort();
    free.dedup();
    free.retain(|v| !ode.param_vars().contains(v));
    Ok(Prefiltered {
        p,
        q,
        free,
        table: shape.table,
        before,
    })
}

/// True when `target` is sigma for some value of the branch's free
/// coefficients (the branch may describe a family).
pub fn branch_contains(b: &SigmaBranch, target: &RatFun, clock: &dyn Clock) -> bool {
    if b.sigma == *target {
        return true;
    }
    if b.free.is_empty() {
        return false;
    }
    let (p, q) = &b.general;
    // sigma(t) = (pn qd) / (pd qn); require pn qd tq - tp pd qn = 0.
    let lhs = &(&(p.num() * q.den()) * target.den()) - &(&(target.num() * p.den()) * q.num());
    let sys = extract_system(&lhs, &b.free);
    let params: Vec<Var> = Vec::new();
    let mut req = SolveRequest::new(&sys, &params, SolveMode::Generic);
    req.max_solutions = 16;
    let _ = &mut req;
    let budget = SolveBudget {
        max_case_splits: 2000,
        max_groebner_basis_size: 100,
        timeout_ms: 5_000,
    };
    let meter = Meter::new(budget, clock);
    let out = solve_system(&req, &meter);
    for a in &out.solutions {
        let ps = apply_rf(a, p);
        let qs = apply_rf(a, q);
        let free: Vec<Var> = a.free.clone();
        if let Some((ps, qs)) = specialize_free(&ps, &qs, &free) {
            if ps.checked_div(&qs).ok().as_ref() == Some(target) {
                return true;
            }
        }
    }
    false
}

fn apply_rf(a: &Assignment, r: &RatFun) -> RatFun {
    let mut out = r.clone();
    for (v, val) in &a.values {
        out = out.substitute(*v, val);
    }
    out
}

fn poly_cmp(a: &Poly, b: &Poly) -> core::cmp::Ordering {
    a.terms().rev().cmp(b.terms().rev())
}
