use symseek_core::algsolve::*;
use symseek_core::arith::{Rat, RatFun, X, Y, Z};
use symseek_core::detsys::*;
use symseek_core::odemodel::parse_ode;

const EX: &str = "y'' = ((y'-1)*(x^4*y'+2*x^3*y-x^2*y+y'))/((x^2*y-1)*x^2)";

fn sigma_solutions(src: &str, n: u32) -> Vec<RatFun> {
    let ode = parse_ode(src).unwrap();
    let mut t = SymbolTable::new(&ode);
    let p = generic_poly(n, &[X, Y, Z], SymKind::A, &mut t);
    let q = generic_poly(n, &[X, Y, Z], SymKind::B, &mut t);
    let id = determining_identity(&ode, &p.poly, &q.poly);
    let mut unk = p.syms.clone();
    unk.extend(q.syms.iter().copied());
    let sys = extract_system(&id, &unk);
    let params = ode.param_vars();
    let mut req = SolveRequest::new(&sys, &params, SolveMode::NonParametric);
    req.gauge = q
        .syms
        .iter()
        .zip(&q.monos)
        .filter(|(_, m)| m.degree() == n)
        .map(|(s, _)| *s)
        .collect();
    let out = solve_system(&req, &Meter::unlimited());
    assert!(out.complete);
    out.solutions
        .iter()
        .filter_map(|a| {
            let mut a = a.clone();
            for v in a.free.clone() {
                a = a.fix(v, Rat::from_int(1));
            }
            a.apply(&p.poly).checked_div(&a.apply(&q.poly)).ok()
        })
        .collect()
}

#[test]
fn worked_example_degree_three() {
    let s = sigma_solutions(EX, 3);
    let ode = parse_ode(EX).unwrap();
    let want = ode.parse_expr("-x^2*(y'-1)/(x^2*y-1)").unwrap();
    assert!(s.contains(&want));
}
