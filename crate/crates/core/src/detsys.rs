//! Candidate polynomials with undetermined coefficients, the cleared
//! determining identity for sigma = p/q, and the algebraic system obtained
//! by collecting its (x, y, z) monomials.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::arith::{Mono, Poly, Rat, Var, X, Y, Z};
use crate::odemodel::{render, Ode2};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnknownSym {
    /// Coefficient of the numerator candidate.
    A(u32),
    /// Coefficient of the denominator candidate.
    B(u32),
    /// Auxiliary coefficient (the P_c polynomial of the prefilter).
    C(u32),
    Param(String),
}

/// Symbol bookkeeping. Entry `k` describes `Var(3 + k)`; the ODE's
/// parameters come first, in the ODE's order.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    syms: Vec<UnknownSym>,
    next: [u32; 3],
}

impl SymbolTable {
    pub fn new(ode: &Ode2) -> SymbolTable {
        SymbolTable {
            syms: ode.params().iter().cloned().map(UnknownSym::Param).collect(),
            next: [0; 3],
        }
    }

    pub fn fresh(&mut self, kind: SymKind) -> Var {
        let slot = kind as usize;
        let idx = self.next[slot];
        self.next[slot] += 1;
        self.syms.push(match kind {
            SymKind::A => UnknownSym::A(idx),
            SymKind::B => UnknownSym::B(idx),
            SymKind::C => UnknownSym::C(idx),
        });
        Var(3 + self.syms.len() as u32 - 1)
    }

    pub fn sym(&self, v: Var) -> Option<&UnknownSym> {
        if v.is_xyz() {
            return None;
        }
        self.syms.get((v.0 - 3) as usize)
    }

    pub fn is_param(&self, v: Var) -> bool {
        matches!(self.sym(v), Some(UnknownSym::Param(_)))
    }

    pub fn is_b(&self, v: Var) -> bool {
        matches!(self.sym(v), Some(UnknownSym::B(_)))
    }

    pub fn params(&self) -> Vec<Var> {
        self.vars_where(|s| matches!(s, UnknownSym::Param(_)))
    }

    pub fn vars_where(&self, f: impl Fn(&UnknownSym) -> bool) -> Vec<Var> {
        self.syms
            .iter()
            .enumerate()
            .filter(|(_, s)| f(s))
            .map(|(k, _)| Var(3 + k as u32))
            .collect()
    }

    pub fn name(&self, v: Var) -> String {
        match v.0 {
            0 => "x".into(),
            1 => "y".into(),
            2 => "y'".into(),
            _ => match self.sym(v) {
                Some(UnknownSym::A(i)) => alloc::format!("a{}", i),
                Some(UnknownSym::B(i)) => alloc::format!("b{}", i),
                Some(UnknownSym::C(i)) => alloc::format!("c{}", i),
                Some(UnknownSym::Param(p)) => p.clone(),
                None => alloc::format!("s{}", v.0),
            },
        }
    }

    pub fn render(&self, p: &Poly) -> String {
        render::render_poly_with(p, &|v| self.name(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymKind {
    A = 0,
    B = 1,
    C = 2,
}

/// Monomial coefficient view of a polynomial in (x, y, z).
pub type GenPoly = BTreeMap<Mono, Poly>;

/// A candidate polynomial: flattened form plus its coefficient symbols.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub poly: Poly,
    pub syms: Vec<Var>,
    pub monos: Vec<Mono>,
}

impl Candidate {
    pub fn fixed(p: Poly) -> Candidate {
        Candidate {
            poly: p,
            syms: Vec::new(),
            monos: Vec::new(),
        }
    }
}

/// Monomials of total degree <= n in `vars`, by increasing degree and,
/// within a degree, decreasing in the global order.
pub fn monomials_upto(n: u32, vars: &[Var]) -> Vec<Mono> {
    let mut out = Vec::new();
    for d in 0..=n {
        let mut level = Vec::new();
        collect_level(d, vars, 0, [0; 3], &mut level);
        level.sort();
        level.reverse();
        out.extend(level);
    }
    out
}

fn collect_level(d: u32, vars: &[Var], k: usize, cur: [u32; 3], out: &mut Vec<Mono>) {
    if k == vars.len() {
        if d == 0 {
            out.push(Mono(cur));
        }
        return;
    }
    for e in 0..=d {
        let mut c = cur;
        c[vars[k].0 as usize] += e;
        collect_level(d - e, vars, k + 1, c, out);
    }
}

/// Generic polynomial of degree `n` in `vars` with fresh coefficients.
pub fn generic_poly(n: u32, vars: &[Var], kind: SymKind, table: &mut SymbolTable) -> Candidate {
    generic_on(&monomials_upto(n, vars), kind, table)
}

/// Generic polynomial supported on the given monomials.
pub fn generic_on(monos: &[Mono], kind: SymKind, table: &mut SymbolTable) -> Candidate {
    let mut poly = Poly::zero();
    let mut syms = Vec::with_capacity(monos.len());
    for m in monos {
        let s = table.fresh(kind);
        poly += &Poly::var(s).mul_monomial(&m.to_monomial());
        syms.push(s);
    }
    Candidate {
        poly,
        syms,
        monos: monos.to_vec(),
    }
}

/// Precomputed ODE-dependent factors of the determining identity.
pub struct IdentityParts {
    n2: Poly,
    nm: Poly,
    /// N M_z - M N_z
    cz: Poly,
    /// M N_y - N M_y
    cy: Poly,
}

impl IdentityParts {
    pub fn new(ode: &Ode2) -> IdentityParts {
        let (m, n) = (ode.m(), ode.n());
        IdentityParts {
            n2: n * n,
            nm: n * m,
            cz: &(n * &m.partial(Z)) - &(m * &n.partial(Z)),
            cy: &(m * &n.partial(Y)) - &(n * &m.partial(Y)),
        }
    }

    /// p^2 N^2 + pq (N M_z - M N_z) + q^2 (M N_y - N M_y)
    ///   - q N^2 (p_x + z p_y) + p N^2 (q_x + z q_y) + N M (p q_z - q p_z)
    pub fn identity(&self, p: &Poly, q: &Poly) -> Poly {
        let z = Poly::z();
        let dp = &p.partial(X) + &(&z * &p.partial(Y));
        let dq = &q.partial(X) + &(&z * &q.partial(Y));
        let pq = p * q;
        let mut out = &(p * p) * &self.n2;
        out += &(&pq * &self.cz);
        out += &(&(q * q) * &self.cy);
        let t = &(p * &dq) - &(q * &dp);
        out += &(&t * &self.n2);
        let u = &(p * &q.partial(Z)) - &(q * &p.partial(Z));
        out += &(&u * &self.nm);
        out
    }
}

/// Left-hand side of the cleared determining identity, flattened.
pub fn determining_identity(ode: &Ode2, p: &Poly, q: &Poly) -> Poly {
    IdentityParts::new(ode).identity(p, q)
}

/// Coefficient view of the determining identity.
pub fn build_determining_identity(ode: &Ode2, p: &Poly, q: &Poly) -> GenPoly {
    determining_identity(ode, p, q).collect_xyz()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgSystem {
    pub equations: Vec<Poly>,
    pub unknowns: Vec<Var>,
}

/// One equation per (x, y, z) monomial, in decreasing monomial order,
/// scaled to primitive integer form and deduplicated up to sign.
pub fn extract_system(identity: &Poly, unknowns: &[Var]) -> AlgSystem {
    extract_from(&identity.collect_xyz(), unknowns)
}

pub fn extract_from(g: &GenPoly, unknowns: &[Var]) -> AlgSystem {
    let mut equations: Vec<Poly> = Vec::new();
    for (_, c) in g.iter().rev() {
        let e = c.primitive();
        if !e.is_zero() && !equations.contains(&e) {
            equations.push(e);
        }
    }
    AlgSystem {
        equations,
        unknowns: unknowns.to_vec(),
    }
}

impl AlgSystem {
    /// One equation per line, `<poly> = 0`.
    pub fn dump(&self, table: &SymbolTable) -> String {
        let mut s = String::new();
        for e in &self.equations {
            s.push_str(&table.render(e));
            s.push_str(" = 0\n");
        }
        s
    }

    /// Substitutes rational values and reports whether every equation vanishes.
    pub fn satisfied_by(&self, vals: &BTreeMap<Var, Rat>) -> bool {
        self.equations
            .iter()
            .all(|e| e.eval_partial(vals).is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odemodel::parse_ode;

    const EX: &str = "y'' = ((y'-1)*(x^4*y'+2*x^3*y-x^2*y+y'))/((x^2*y-1)*x^2)";

    #[test]
    fn generic_poly_sizes() {
        let ode = parse_ode(EX).unwrap();
        let mut t = SymbolTable::new(&ode);
        let p = generic_poly(1, &[X, Y, Z], SymKind::A, &mut t);
        assert_eq!(p.syms.len(), 4);
        assert_eq!(p.monos, [Mono([0, 0, 0]), Mono([1, 0, 0]), Mono([0, 1, 0]), Mono([0, 0, 1])]);
        assert_eq!(t.render(&p.poly), "x*a1 + y*a2 + y'*a3 + a0");
        assert_eq!(generic_poly(0, &[X, Y, Z], SymKind::A, &mut t).syms.len(), 1);
        assert_eq!(generic_poly(3, &[X, Y, Z], SymKind::B, &mut t).syms.len(), 20);
        assert_eq!(generic_poly(2, &[X, Y], SymKind::B, &mut t).syms.len(), 6);
    }

    #[test]
    fn worked_example_solution_annihilates_identity() {
        let ode = parse_ode(EX).unwrap();
        let s = ode.parse_expr("-x^2*(y'-1)").unwrap();
        let q = ode.parse_expr("x^2*y-1").unwrap();
        assert!(determining_identity(&ode, s.num(), q.num()).is_zero());
        // Common factor g = x + 1.
        let g = &Poly::x() + &Poly::one();
        assert!(determining_identity(&ode, &(s.num() * &g), &(q.num() * &g)).is_zero());
    }

    #[test]
    fn p_zero_reduces_to_phi_y_term() {
        let ode = parse_ode(EX).unwrap();
        let id = determining_identity(&ode, &Poly::zero(), &Poly::one());
        let (m, n) = (ode.m(), ode.n());
        assert_eq!(id, &(m * &n.partial(Y)) - &(n * &m.partial(Y)));
        let flat = parse_ode("y'' = x*y'^2").unwrap();
        assert!(determining_identity(&flat, &Poly::zero(), &Poly::one()).is_zero());
    }
}
