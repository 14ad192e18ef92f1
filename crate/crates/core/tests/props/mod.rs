//! Property checks shared by the core test suite and the acceptance target.
//! Each check runs a fixed number of cases from a deterministic seed.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use symseek_core::algsolve::{groebner_basis, MonoOrder};
use symseek_core::arith::{Monomial, Poly, Rat, RatFun, Var, X, Y, Z};
use symseek_core::detsys::{determining_identity, extract_system, generic_poly, SymKind, SymbolTable};
use symseek_core::odemodel::{apply_dx, apply_dx_poly, parse_ode, Ode2};
use symseek_core::verify::{residual_numerator, sigma_residual};

pub fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn poly_from(terms: &[(i64, [u32; 3])], vars: [Var; 3]) -> Poly {
    Poly::from_terms(terms.iter().map(|(c, e)| {
        (
            Monomial::from_pairs(&[(vars[0], e[0]), (vars[1], e[1]), (vars[2], e[2])]),
            Rat::from_int(*c),
        )
    }))
}

/// Small polynomials in x, y, z of total degree at most `d`.
pub fn xyz_poly(d: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((-3i64..=3, [0..=d, 0..=d, 0..=d]), 1..=max_terms).prop_map(move |ts| {
        let ts: Vec<(i64, [u32; 3])> = ts
            .into_iter()
            .filter(|(_, e)| e.iter().sum::<u32>() <= d)
            .collect();
        poly_from(&ts, [X, Y, Z])
    })
}

fn nonzero_xyz_poly(d: u32, max_terms: usize) -> impl Strategy<Value = Poly> {
    xyz_poly(d, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

fn ratfun() -> impl Strategy<Value = RatFun> {
    (xyz_poly(2, 4), nonzero_xyz_poly(2, 3))
        .prop_map(|(n, d)| RatFun::new(n, d).unwrap())
}

/// A random ODE y'' = M/N with small M, N.
fn random_ode() -> impl Strategy<Value = Ode2> {
    (xyz_poly(3, 4), nonzero_xyz_poly(2, 3)).prop_map(|(m, n)| {
        let phi = RatFun::new(m, n).unwrap();
        Ode2::from_ratfun(&phi, Vec::new())
    })
}

/// Known (ODE, p, q) with sigma = p/q a solution.
fn known_solutions() -> Vec<(Ode2, Poly, Poly)> {
    let rows = [
        (
            "y'' = ((y'-1)*(x^4*y'+2*x^3*y-x^2*y+y'))/((x^2*y-1)*x^2)",
            "-x^2*(y'-1)",
            "x^2*y-1",
        ),
        ("y'' = 0", "-1", "x"),
        ("y'' = (x*y'-y)^2/x^3", "-1", "x"),
        ("y'' = -y'/x + y'^2/y", "-y'", "y"),
    ];
    rows.iter()
        .map(|(o, p, q)| {
            let ode = parse_ode(o).unwrap();
            let p = ode.parse_expr(p).unwrap().num().clone();
            let q = ode.parse_expr(q).unwrap().num().clone();
            (ode, p, q)
        })
        .collect()
}

/// (g p, g q) solves whenever (p, q) does, and in general the identity
/// scales by g^2.
pub fn common_factor_invariance(cases: u32) -> Result<(), String> {
    let known = known_solutions();
    for (ode, p, q) in &known {
        if !determining_identity(ode, p, q).is_zero() {
            return Err(format!("known solution rejected: {}", ode.render()));
        }
    }
    let n = known.len();
    runner(cases)
        .run(&(0..n, nonzero_xyz_poly(2, 4), xyz_poly(2, 3), xyz_poly(2, 3)), |(k, g, p2, q2)| {
            let (ode, p, q) = &known[k];
            let id = determining_identity(ode, &(&g * p), &(&g * q));
            prop_assert!(id.is_zero(), "g = {:?}", g);
            let lhs = determining_identity(ode, &(&g * &p2), &(&g * &q2));
            let rhs = &(&g * &g) * &determining_identity(ode, &p2, &q2);
            prop_assert_eq!(lhs, rhs);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Every extracted equation is homogeneous of degree 2 in the coefficient
/// symbols when the ODE has no parameters.
pub fn quadratic_homogeneity(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(random_ode(), 1u32..=2, 1u32..=2), |(ode, dp, dq)| {
            let mut t = SymbolTable::new(&ode);
            let p = generic_poly(dp, &[X, Y, Z], SymKind::A, &mut t);
            let q = generic_poly(dq, &[X, Y, Z], SymKind::B, &mut t);
            let mut unk = p.syms.clone();
            unk.extend(q.syms.iter().copied());
            let sys = extract_system(&determining_identity(&ode, &p.poly, &q.poly), &unk);
            for e in &sys.equations {
                for (m, _) in e.terms() {
                    let d: u32 = m.pairs().filter(|(v, _)| !v.is_xyz()).map(|(_, e)| e).sum();
                    prop_assert_eq!(d, 2, "equation {:?}", e);
                }
                for v in e.vars() {
                    prop_assert!(unk.contains(&v));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Leading monomial under the default monomial comparison.
fn lead(p: &Poly) -> Option<(Monomial, Rat)> {
    p.terms()
        .max_by(|a, b| a.0.cmp(b.0))
        .map(|(m, c)| (m.clone(), c.clone()))
}

/// Full reduction by an arbitrary list, no ordering tricks.
fn oracle_reduce(p: &Poly, g: &[Poly]) -> Poly {
    let mut p = p.clone();
    let mut rem = Poly::zero();
    while let Some((m, c)) = lead(&p) {
        let hit = g.iter().find_map(|b| {
            let (lm, lc) = lead(b)?;
            lm.div(&m).map(|q| (b, q, &c / &lc))
        });
        match hit {
            Some((b, q, k)) => p = &p - &b.mul_term(&k, &q),
            None => {
                let t = Poly::term(c.clone(), m.clone());
                rem = &rem + &t;
                p = &p - &t;
            }
        }
    }
    rem
}

fn s_poly(a: &Poly, b: &Poly) -> Poly {
    let (la, ca) = lead(a).unwrap();
    let (lb, cb) = lead(b).unwrap();
    let l = la.lcm(&lb);
    let ma = la.div(&l).unwrap();
    let mb = lb.div(&l).unwrap();
    &a.mul_term(&ca.recip(), &ma) - &b.mul_term(&cb.recip(), &mb)
}

/// Buchberger closure over every pair, no criteria.
pub fn oracle_groebner(eqs: &[Poly]) -> Vec<Poly> {
    let mut g: Vec<Poly> = eqs.iter().filter(|e| !e.is_zero()).cloned().collect();
    let mut i = 0;
    while i < g.len() {
        for j in 0..i {
            let r = oracle_reduce(&s_poly(&g[j], &g[i]), &g);
            if !r.is_zero() {
                g.push(r);
            }
        }
        i += 1;
    }
    g
}

fn quadratic_system() -> impl Strategy<Value = Vec<Poly>> {
    let vars = [Var(3), Var(4), Var(5)];
    let eq = prop::collection::vec((-2i64..=2, [0u32..=2, 0u32..=2, 0u32..=1]), 1..=3).prop_map(
        move |ts| {
            let ts: Vec<(i64, [u32; 3])> = ts
                .into_iter()
                .filter(|(_, e)| e.iter().sum::<u32>() <= 2)
                .collect();
            poly_from(&ts, vars)
        },
    );
    prop::collection::vec(eq, 1..=3)
}

/// The library basis and the naive closure generate the same ideal.
pub fn groebner_oracle(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&quadratic_system(), |eqs| {
            let gb = groebner_basis(&eqs, &MonoOrder::grevlex());
            let oracle = oracle_groebner(&eqs);
            for b in &gb {
                prop_assert!(oracle_reduce(b, &oracle).is_zero(), "{:?} not in oracle ideal", b);
            }
            for e in oracle.iter().chain(eqs.iter()) {
                prop_assert!(oracle_reduce(e, &gb).is_zero(), "{:?} not reduced by basis", e);
            }
            // Same leading-term ideal: both are Gröbner bases of one ideal.
            for o in &oracle {
                if o.is_zero() {
                    continue;
                }
                let (lo, _) = lead(o).unwrap();
                prop_assert!(gb.iter().any(|b| lead(b).map_or(false, |(lb, _)| lb.divides(&lo))));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// D_x is a derivation: additive, Leibniz and quotient rules, and it agrees
/// with the polynomial form N D_x f on polynomials.
pub fn dx_derivation_law(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(random_ode(), ratfun(), ratfun(), xyz_poly(2, 4)), |(ode, f, g, h)| {
            let (df, dg) = (apply_dx(&f, &ode), apply_dx(&g, &ode));
            prop_assert_eq!(apply_dx(&(&f + &g), &ode), &df + &dg);
            prop_assert_eq!(apply_dx(&(&f * &g), &ode), &(&f * &dg) + &(&g * &df));
            if !g.is_zero() {
                let quot = apply_dx(&f.checked_div(&g).unwrap(), &ode);
                let expect = (&(&df * &g) - &(&f * &dg)).checked_div(&(&g * &g)).unwrap();
                prop_assert_eq!(quot, expect);
            }
            let n = RatFun::from_poly(ode.n().clone());
            let lhs = &n * &apply_dx(&RatFun::from_poly(h.clone()), &ode);
            prop_assert_eq!(lhs, RatFun::from_poly(apply_dx_poly(&h, &ode)));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// parse(render(ode)) = ode on random ODEs.
pub fn parser_round_trip(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&random_ode(), |ode| {
            let again = parse_ode(&ode.render()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(again.phi(), ode.phi());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The gcd-free residual numerator is the normalized residual times N^2 q^2.
pub fn residual_scaling(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(random_ode(), ratfun()), |(ode, sigma)| {
            let n = RatFun::from_poly(ode.n().clone());
            let q = RatFun::from_poly(sigma.den().clone());
            let lhs = RatFun::from_poly(residual_numerator(&sigma, &ode));
            prop_assert_eq!(lhs, &(&(&n * &n) * &(&q * &q)) * &sigma_residual(&sigma, &ode));
            Ok(())
        })
        .map_err(|e| e.to_string())
}
