//! Exact checks: sigma against its determining PDE, symmetry coefficients
//! and first integrals in Darboux form, and the integrating-factor relation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::arith::{Poly, Rat, RatFun, Var, X, Y, Z};
use crate::odemodel::parse::{Names, Parser, Tok};
use crate::odemodel::{apply_dx, render, Ode2, ParseError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyError {
    Parse(ParseError),
    /// The expression is not a product of powers times one exponential.
    NotDarbouxRepresentable(String),
    ZeroFactor,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Parse(e) => write!(f, "{}", e),
            VerifyError::NotDarbouxRepresentable(s) => {
                write!(f, "not representable as exp(R)*prod(f_i^c_i): {}", s)
            }
            VerifyError::ZeroFactor => write!(f, "zero factor"),
        }
    }
}

/// D_x sigma - sigma^2 - phi_z sigma + phi_y, normalized.
pub fn sigma_residual(sigma: &RatFun, ode: &Ode2) -> RatFun {
    let phi = ode.phi();
    let d = apply_dx(sigma, ode);
    let s2 = sigma * sigma;
    let fz = &phi.partial(Z) * sigma;
    &(&(&d - &s2) - &fz) + &phi.partial(Y)
}

/// The residual times N^2 q^2 for sigma = p/q, phi = M/N, built from
/// polynomial products only (no gcds).
pub fn residual_numerator(sigma: &RatFun, ode: &Ode2) -> Poly {
    let (p, q) = (sigma.num(), sigma.den());
    let (m, n) = (ode.m(), ode.n());
    let z = Poly::var(Z);
    let n2 = n * n;
    let tot = |f: &Poly| &f.partial(X) + &(&z * &f.partial(Y));
    let mut r = &n2 * &(&(q * &tot(p)) - &(p * &tot(q)));
    r += &(&(n * m) * &(&(q * &p.partial(Z)) - &(p * &q.partial(Z))));
    r -= &(&n2 * &(p * p));
    let phi_z = &(&m.partial(Z) * n) - &(m * &n.partial(Z));
    r -= &(&(p * q) * &phi_z);
    let phi_y = &(&m.partial(Y) * n) - &(m * &n.partial(Y));
    r += &(&(q * q) * &phi_y);
    r
}

/// True iff sigma satisfies D_x sigma = sigma^2 + phi_z sigma - phi_y.
/// The normalized residual is only built when it is nonzero.
pub fn verify_sigma(sigma: &RatFun, ode: &Ode2) -> (bool, RatFun) {
    if residual_numerator(sigma, ode).is_zero() {
        return (true, RatFun::zero());
    }
    (false, sigma_residual(sigma, ode))
}

/// `exp(R) * prod f_i^c_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DarbouxFunction {
    pub exponent: RatFun,
    pub factors: Vec<(Poly, Rat)>,
}

impl DarbouxFunction {
    pub fn new(exponent: RatFun, factors: Vec<(Poly, Rat)>) -> Result<DarbouxFunction, VerifyError> {
        if factors.iter().any(|(f, _)| f.is_zero()) {
            return Err(VerifyError::ZeroFactor);
        }
        Ok(DarbouxFunction { exponent, factors }.tidy())
    }

    pub fn exp(r: RatFun) -> DarbouxFunction {
        DarbouxFunction {
            exponent: r,
            factors: Vec::new(),
        }
    }

    pub fn from_ratfun(r: &RatFun) -> Result<DarbouxFunction, VerifyError> {
        if r.is_zero() {
            return Err(VerifyError::ZeroFactor);
        }
        DarbouxFunction::new(
            RatFun::zero(),
            alloc::vec![(r.num().clone(), Rat::one()), (r.den().clone(), -Rat::one())],
        )
    }

    /// Drops constant factors and merges repeated bases.
    fn tidy(mut self) -> DarbouxFunction {
        let mut out: Vec<(Poly, Rat)> = Vec::new();
        for (f, c) in self.factors {
            if f.is_constant() || c.is_zero() {
                continue;
            }
            let f = f.monic();
            match out.iter_mut().find(|(g, _)| *g == f) {
                Some(e) => e.1 = &e.1 + &c,
                None => out.push((f, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        self.factors = out;
        self
    }

    pub fn mul(&self, other: &DarbouxFunction) -> DarbouxFunction {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        DarbouxFunction {
            exponent: &self.exponent + &other.exponent,
            factors,
        }
        .tidy()
    }

    pub fn pow(&self, c: &Rat) -> DarbouxFunction {
        DarbouxFunction {
            exponent: self.exponent.scale(c),
            factors: self.factors.iter().map(|(f, e)| (f.clone(), e * c)).collect(),
        }
        .tidy()
    }

    /// D_x F / F = D_x R + sum c_i D_x f_i / f_i.
    pub fn logderiv(&self, ode: &Ode2) -> RatFun {
        let mut acc = apply_dx(&self.exponent, ode);
        for (f, c) in &self.factors {
            let rf = RatFun::from_poly(f.clone());
            let t = apply_dx(&rf, ode)
                .checked_div(&rf)
                .expect("factor is nonzero");
            acc = &acc + &t.scale(c);
        }
        acc
    }

    /// Parses `exp(R) * f1^c1 * ... / fk^ck`; `sqrt(f)` is `f^(1/2)`.
    pub fn parse(src: &str, ode: &Ode2) -> Result<DarbouxFunction, VerifyError> {
        let mut names = Names::fixed(ode.params());
        parse_darboux(src, &mut names)
    }

    pub fn render(&self, params: &[String]) -> String {
        let mut parts: Vec<String> = Vec::new();
        if !self.exponent.is_zero() {
            parts.push(alloc::format!("exp({})", render::render_ratfun(&self.exponent, params)));
        }
        for (f, c) in &self.factors {
            let base = alloc::format!("({})", render::render_poly(f, params));
            if c.is_one() {
                parts.push(base);
            } else if c.is_integer() && !c.is_negative() {
                parts.push(alloc::format!("{}^{}", base, c));
            } else {
                parts.push(alloc::format!("{}^({})", base, c));
            }
        }
        if parts.is_empty() {
            return "1".into();
        }
        parts.join("*")
    }
}

fn not_darboux(e: ParseError) -> VerifyError {
    match e {
        ParseError::NotRational { name, .. } => VerifyError::NotDarbouxRepresentable(name),
        other => VerifyError::Parse(other),
    }
}

fn parse_darboux(src: &str, names: &mut Names) -> Result<DarbouxFunction, VerifyError> {
    // A plain rational expression may be a sum at top level.
    if let Ok(mut p) = Parser::new(src, names) {
        if let Ok(r) = p.expr() {
            if p.expect_end().is_ok() {
                return DarbouxFunction::from_ratfun(&r);
            }
        }
    }
    let mut p = Parser::new(src, names).map_err(VerifyError::Parse)?;
    let mut acc = darboux_term(&mut p)?;
    loop {
        match p.peek() {
            Tok::Star => {
                p.bump();
                acc = acc.mul(&darboux_term(&mut p)?);
            }
            Tok::Slash => {
                p.bump();
                acc = acc.mul(&darboux_term(&mut p)?.pow(&-Rat::one()));
            }
            Tok::Plus | Tok::Minus => {
                return Err(VerifyError::NotDarbouxRepresentable(
                    "sum of transcendental terms".into(),
                ))
            }
            _ => break,
        }
    }
    p.expect_end().map_err(VerifyError::Parse)?;
    Ok(acc)
}

fn darboux_term(p: &mut Parser) -> Result<DarbouxFunction, VerifyError> {
    let head = match (p.peek().clone(), p.peek_at(1).clone()) {
        (Tok::Minus, _) => {
            p.bump();
            return darboux_term(p);
        }
        (Tok::Ident(name), Tok::LParen) if name == "exp" || name == "sqrt" => {
            p.bump();
            p.bump();
            let r = p.expr().map_err(not_darboux)?;
            p.expect(Tok::RParen, "`)`").map_err(VerifyError::Parse)?;
            if name == "exp" {
                DarbouxFunction::exp(r)
            } else {
                DarbouxFunction::from_ratfun(&r)?.pow(&Rat::new(1, 2))
            }
        }
        _ => {
            let r = p.atom().map_err(not_darboux)?;
            DarbouxFunction::from_ratfun(&r)?
        }
    };
    if *p.peek() == Tok::Caret {
        p.bump();
        let e = p.rat_exponent().map_err(VerifyError::Parse)?;
        return Ok(head.pow(&e));
    }
    Ok(head)
}

/// True iff sigma = -D_x nu / nu.
pub fn verify_nu(nu: &DarbouxFunction, sigma: &RatFun, ode: &Ode2) -> bool {
    (&nu.logderiv(ode) + sigma).is_zero()
}

/// True iff D_x I = 0.
pub fn verify_first_integral(i: &DarbouxFunction, ode: &Ode2) -> bool {
    i.logderiv(ode).is_zero()
}

/// The log-derivative D_x mu / mu = -sigma - phi_z of an integrating factor
/// paired with sigma.
pub fn mu_log_derivative(sigma: &RatFun, ode: &Ode2) -> RatFun {
    -&(sigma + &ode.phi().partial(Z))
}

const SPOT_BOUND: u64 = 1_000_000;

fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    let n = (rng.next_u64() % (2 * SPOT_BOUND + 1)) as i64 - SPOT_BOUND as i64;
    let d = (rng.next_u64() % SPOT_BOUND) as i64 + 1;
    Rat::new(n, d)
}

/// Evaluates the residual at seeded random rational points. `false` proves
/// the residual is nonzero; `true` is only probabilistic support.
pub fn numeric_spotcheck(sigma: &RatFun, ode: &Ode2, trials: u32, seed: u64) -> bool {
    let phi = ode.phi();
    let parts = [
        sigma.clone(),
        sigma.partial(X),
        sigma.partial(Y),
        sigma.partial(Z),
        phi.clone(),
        phi.partial(Y),
        phi.partial(Z),
    ];
    let mut vars: BTreeSet<Var> = [X, Y, Z].into_iter().collect();
    for r in &parts {
        vars.extend(r.num().vars());
        vars.extend(r.den().vars());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut draws = 0;
    while done < trials {
        draws += 1;
        if draws > 100 * trials + 100 {
            // Denominators vanish everywhere we look; defer to the exact check.
            return verify_sigma(sigma, ode).0;
        }
        let pt: BTreeMap<Var, Rat> = vars.iter().map(|&v| (v, random_rat(&mut rng))).collect();
        let vals: Option<Vec<Rat>> = parts.iter().map(|r| r.eval(&pt)).collect();
        let Some(v) = vals else { continue };
        let z = &pt[&Z];
        let dx = &(&v[1] + &(z * &v[2])) + &(&v[4] * &v[3]);
        let res = &(&(&dx - &(&v[0] * &v[0])) - &(&v[6] * &v[0])) + &v[5];
        if !res.is_zero() {
            return false;
        }
        done += 1;
    }
    true
}

/// The formal symmetry exp(-Int_x sigma) (d/dy - sigma d/dy').
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryRepr {
    pub sigma: RatFun,
}

impl SymmetryRepr {
    pub fn new(sigma: RatFun) -> SymmetryRepr {
        SymmetryRepr { sigma }
    }

    pub fn render(&self, params: &[String]) -> String {
        let s = render::render_ratfun(&self.sigma, params);
        alloc::format!("exp(-Intx({s}))*(d/dy - ({s})*d/dy')")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odemodel::parse_ode;

    const EX: &str = "y'' = ((y'-1)*(x^4*y'+2*x^3*y-x^2*y+y'))/((x^2*y-1)*x^2)";

    #[test]
    fn worked_example_sigma() {
        let ode = parse_ode(EX).unwrap();
        let s = ode.parse_expr("-x^2*(y'-1)/(x^2*y-1)").unwrap();
        assert!(verify_sigma(&s, &ode).0);
        let bad = &s + &RatFun::one();
        assert!(!verify_sigma(&bad, &ode).0);
        assert!(numeric_spotcheck(&s, &ode, 5, 7));
        assert!(!numeric_spotcheck(&bad, &ode, 5, 7));
    }

    #[test]
    fn darboux_parsing() {
        let ode = parse_ode(EX).unwrap();
        let i = DarbouxFunction::parse("exp(1/x)*(x^2*y - y')*(y' - 1)^(-1)", &ode).unwrap();
        assert_eq!(i.factors.len(), 2);
        assert!(verify_first_integral(&i, &ode));
        let j = DarbouxFunction::parse("exp(1/x)*(x^2*y - y')/(y' - 1)", &ode).unwrap();
        assert_eq!(i, j);
        assert!(matches!(
            DarbouxFunction::parse("ln(x)*y", &ode),
            Err(VerifyError::NotDarbouxRepresentable(_))
        ));
        assert!(matches!(
            DarbouxFunction::parse("exp(x) + y", &ode),
            Err(VerifyError::NotDarbouxRepresentable(_))
        ));
        let r = DarbouxFunction::parse("sqrt(x^2 - y)", &ode).unwrap();
        assert_eq!(r.factors[0].1, Rat::new(1, 2));
    }

    #[test]
    fn symmetry_rendering() {
        let ode = parse_ode("y'' = 0").unwrap();
        let s = ode.parse_expr("-1/x").unwrap();
        assert_eq!(
            SymmetryRepr::new(s).render(&[]),
            "exp(-Intx(-1/x))*(d/dy - (-1/x)*d/dy')"
        );
    }
}
