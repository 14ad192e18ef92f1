//! Rational second-order ODEs y'' = M/N and the total derivative along them.

pub mod parse;
pub mod render;

use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{gcd, Poly, Rat, RatFun, Var, X, Y, Z};
pub use parse::{parse_ratfun, Names, ParseError};

/// y'' = M/N with M, N coprime and scaled to integer coefficients with unit
/// content and a positive leading coefficient in N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ode2 {
    m: Poly,
    n: Poly,
    params: Vec<String>,
    deg_m: u32,
    deg_n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// deg_M <= deg_N + 1: deg p <= deg q.
    Balanced,
    /// deg_M > deg_N + 1: deg p <= deg q + offset.
    Excess(u32),
}

impl BoundKind {
    pub fn offset(self) -> u32 {
        match self {
            BoundKind::Balanced => 0,
            BoundKind::Excess(k) => k,
        }
    }
}

/// Scales `a/b` so both have integer coefficients with joint unit content
/// and `b` has a positive leading coefficient.
fn integer_scale(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let mut l = BigInt::one();
    let mut g = BigInt::zero();
    for (_, c) in a.terms().chain(b.terms()) {
        l = num_integer::lcm(l, c.denom());
    }
    for (_, c) in a.terms().chain(b.terms()) {
        let n = c.numer() * (&l / c.denom());
        g = num_integer::gcd(g, n);
    }
    let mut s = Rat::from_bigints(l, g);
    if b.leading_coeff().is_negative() {
        s = -s;
    }
    (a.scale(&s), b.scale(&s))
}

impl Ode2 {
    /// Builds from numerator and denominator; the pair is made coprime.
    pub fn new(m: Poly, n: Poly, params: Vec<String>) -> Result<Ode2, ParseError> {
        if n.is_zero() {
            return Err(ParseError::ZeroDenominator);
        }
        let (m, n) = if m.is_zero() {
            (Poly::zero(), Poly::one())
        } else {
            let g = gcd(&m, &n);
            let m = m.div_exact(&g).unwrap();
            let n = n.div_exact(&g).unwrap();
            integer_scale(&m, &n)
        };
        Ok(Ode2 {
            deg_m: m.degree(),
            deg_n: n.degree(),
            m,
            n,
            params,
        })
    }

    pub fn from_ratfun(phi: &RatFun, params: Vec<String>) -> Ode2 {
        Ode2::new(phi.num().clone(), phi.den().clone(), params).expect("denominator is nonzero")
    }

    pub fn m(&self) -> &Poly {
        &self.m
    }

    pub fn n(&self) -> &Poly {
        &self.n
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn param_vars(&self) -> Vec<Var> {
        (0..self.params.len()).map(|k| Var(3 + k as u32)).collect()
    }

    pub fn deg_m(&self) -> u32 {
        self.deg_m
    }

    pub fn deg_n(&self) -> u32 {
        self.deg_n
    }

    pub fn phi(&self) -> RatFun {
        RatFun::new(self.m.clone(), self.n.clone()).unwrap()
    }

    /// Canonical text `y'' = (M)/(N)`.
    pub fn render(&self) -> String {
        if self.n.is_one() {
            return alloc::format!("y'' = {}", render::render_poly(&self.m, &self.params));
        }
        alloc::format!(
            "y'' = ({})/({})",
            render::render_poly(&self.m, &self.params),
            render::render_poly(&self.n, &self.params)
        )
    }

    /// Parses an expression over this ODE's variables and parameters.
    pub fn parse_expr(&self, src: &str) -> Result<RatFun, ParseError> {
        parse_ratfun(src, &mut Names::fixed(&self.params))
    }

    pub fn render_expr(&self, r: &RatFun) -> String {
        render::render_ratfun(r, &self.params)
    }
}

/// Parses `y'' = expr`. Parameters are every identifier other than x, y, z,
/// numbered in alphabetical order.
pub fn parse_ode(src: &str) -> Result<Ode2, ParseError> {
    let mut ids = parse::identifiers(src)?;
    ids.sort();
    parse_ode_with_params(src, &ids)
}

/// Parses with a declared parameter order; undeclared identifiers are appended
/// alphabetically.
pub fn parse_ode_with_params(src: &str, params: &[String]) -> Result<Ode2, ParseError> {
    let mut all: Vec<String> = params.to_vec();
    let mut extra: Vec<String> = parse::identifiers(src)?
        .into_iter()
        .filter(|s| !all.contains(s))
        .collect();
    extra.sort();
    all.extend(extra);
    let mut names = Names::fixed(&all);
    let phi = parse::parse_rhs(src, &mut names)?;
    let (m, n) = phi.into_parts();
    Ode2::new(m, n, all)
}

/// D_x f = f_x + z f_y + (M/N) f_z.
pub fn apply_dx(f: &RatFun, ode: &Ode2) -> RatFun {
    let fx = f.partial(X);
    let fy = f.partial(Y);
    let fz = f.partial(Z);
    let zf = &RatFun::var(Z) * &fy;
    let phif = &ode.phi() * &fz;
    &(&fx + &zf) + &phif
}

/// D_x of a polynomial, returned as a polynomial numerator over N.
pub fn apply_dx_poly(f: &Poly, ode: &Ode2) -> Poly {
    let n = ode.n();
    let t = &f.partial(X) + &(&Poly::z() * &f.partial(Y));
    &(&t * n) + &(ode.m() * &f.partial(Z))
}

/// Degrees of M and N and the resulting bound on deg p relative to deg q.
pub fn degree_report(ode: &Ode2) -> (u32, u32, BoundKind) {
    let (dm, dn) = (ode.deg_m(), ode.deg_n());
    let kind = if dm <= dn + 1 {
        BoundKind::Balanced
    } else {
        BoundKind::Excess(dm - dn - 1)
    };
    (dm, dn, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX: &str = "y'' = ((y'-1)*(x^4*y'+2*x^3*y-x^2*y+y'))/((x^2*y-1)*x^2)";

    #[test]
    fn worked_example_degrees() {
        let ode = parse_ode(EX).unwrap();
        assert_eq!(degree_report(&ode), (6, 5, BoundKind::Balanced));
        assert!(ode.params().is_empty());
    }

    #[test]
    fn trivial_and_parametric() {
        let ode = parse_ode("y'' = 0").unwrap();
        assert!(ode.m().is_zero());
        assert!(ode.n().is_one());
        let h = parse_ode("y'' = a*y' + b*y - c*y^2").unwrap();
        assert!(h.n().is_one());
        assert_eq!(h.params(), &["a", "b", "c"]);
        let c = parse_ode("y'' = y^3").unwrap();
        assert_eq!(degree_report(&c), (3, 0, BoundKind::Excess(2)));
        let k183 = parse_ode("y'' = (x^2*y'^2+x^2-y^2)/(2*x^2*y)").unwrap();
        assert_eq!(degree_report(&k183), (4, 3, BoundKind::Balanced));
        assert_eq!(k183.n(), &(&Poly::x().pow(2) * &Poly::y()).scale(&Rat::from_int(2)));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_ode("y'' = sin(x)"),
            Err(ParseError::NotRational { .. })
        ));
        assert!(matches!(parse_ode("y'' = x/(y-y)"), Err(ParseError::ZeroDenominator)));
        assert!(matches!(parse_ode("y'' = x^y"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_ode("y'' = x^(-1)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_ode("y'' = (x+1"), Err(ParseError::Syntax { pos: 10, .. })));
    }

    #[test]
    fn dx_basics() {
        let ode = parse_ode(EX).unwrap();
        assert_eq!(apply_dx(&RatFun::var(X), &ode), RatFun::one());
        assert_eq!(apply_dx(&RatFun::var(Y), &ode), RatFun::var(Z));
        assert_eq!(apply_dx(&RatFun::var(Z), &ode), ode.phi());
    }

    #[test]
    fn render_round_trip() {
        let ode = parse_ode(EX).unwrap();
        let again = parse_ode(&ode.render()).unwrap();
        assert_eq!(ode, again);
        let h = parse_ode("y'' = a*y' + 6*a^2*y/25 - c*y^2").unwrap();
        assert_eq!(parse_ode(&h.render()).unwrap(), h);
    }
}
