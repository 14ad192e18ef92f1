//! Text rendering in the parser's grammar.

use alloc::format;
use alloc::string::String;

use crate::arith::{Monomial, Poly, Rat, RatFun, Var};

/// Name of a variable given the parameter table; unnamed symbols render as `s<k>`.
pub fn var_name(v: Var, names: &[String]) -> String {
    match v.0 {
        0 => "x".into(),
        1 => "y".into(),
        2 => "y'".into(),
        k => names
            .get((k - 3) as usize)
            .cloned()
            .unwrap_or_else(|| format!("s{}", k)),
    }
}

fn render_monomial(m: &Monomial, namer: &dyn Fn(Var) -> String) -> String {
    let mut s = String::new();
    for (k, (v, e)) in m.pairs().enumerate() {
        if k > 0 {
            s.push('*');
        }
        s.push_str(&namer(v));
        if e > 1 {
            s.push_str(&format!("^{}", e));
        }
    }
    s
}

/// Renders with terms in decreasing global order.
pub fn render_poly_with(p: &Poly, namer: &dyn Fn(Var) -> String) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        if k == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let a: Rat = c.abs();
        if m.is_one() {
            s.push_str(&format!("{}", a));
        } else {
            if !a.is_one() {
                s.push_str(&format!("{}*", a));
            }
            s.push_str(&render_monomial(m, namer));
        }
    }
    s
}

pub fn render_poly(p: &Poly, names: &[String]) -> String {
    render_poly_with(p, &|v| var_name(v, names))
}

pub fn render_ratfun(r: &RatFun, names: &[String]) -> String {
    if r.den().is_one() {
        return render_poly(r.num(), names);
    }
    let num = render_poly(r.num(), names);
    let den = render_poly(r.den(), names);
    let num = if r.num().len() > 1 { format!("({})", num) } else { num };
    // A bare power of one variable needs no parentheses after `/`.
    let bare = r.den().len() == 1
        && r.den().terms().all(|(m, c)| c.is_one() && m.vars().count() == 1);
    if bare {
        format!("{}/{}", num, den)
    } else {
        format!("{}/({})", num, den)
    }
}
