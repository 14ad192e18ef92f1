//! Exact arithmetic: rationals, sparse polynomials, GCD and rational functions.

pub mod gcd;
pub mod monomial;
pub mod poly;
pub mod rat;
pub mod ratfun;

pub use gcd::{divisors, gcd, gcd_many, partial_factor};
pub use monomial::{Mono, Monomial, Var, X, Y, Z};
pub use poly::Poly;
pub use rat::Rat;
pub use ratfun::RatFun;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithError {
    ZeroDenominator,
}

impl core::fmt::Display for ArithError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ArithError::ZeroDenominator => write!(f, "zero denominator"),
        }
    }
}
