//! Sparse power products and the global monomial order.

use core::cmp::Ordering;
use core::fmt;

use smallvec::SmallVec;

/// Variable index. `X`, `Y`, `Z` are the ODE variables (`Z` stands for y');
/// every index from 3 upward names a symbol (parameter or unknown coefficient).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

pub const X: Var = Var(0);
pub const Y: Var = Var(1);
pub const Z: Var = Var(2);

impl Var {
    pub fn is_xyz(self) -> bool {
        self.0 < 3
    }
}

/// Exponent triple `(deg_x, deg_y, deg_z)` of a monomial in the ODE variables.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mono(pub [u32; 3]);

impl Mono {
    pub fn degree(&self) -> u32 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn to_monomial(self) -> Monomial {
        let mut m = Monomial::one();
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                m.0.push((i as u32, e));
            }
        }
        m
    }
}

/// Graded reverse lexicographic with x > y > z.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0[2].cmp(&self.0[2]))
            .then_with(|| other.0[1].cmp(&self.0[1]))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A power product over any variables, stored as `(var, exp)` pairs sorted by
/// variable with strictly positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(pub(crate) SmallVec<[(u32, u32); 4]>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var) -> Monomial {
        Monomial::var_pow(v, 1)
    }

    pub fn var_pow(v: Var, e: u32) -> Monomial {
        let mut m = Monomial::one();
        if e > 0 {
            m.0.push((v.0, e));
        }
        m
    }

    /// Builds from arbitrary pairs; duplicates are merged, zero exponents dropped.
    pub fn from_pairs(pairs: &[(Var, u32)]) -> Monomial {
        let mut m = Monomial::one();
        for &(v, e) in pairs {
            m = m.mul(&Monomial::var_pow(v, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v.0)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(v, _)| Var(v))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().map(|&(v, e)| (Var(v), e))
    }

    /// Degree counted over x, y, z only.
    pub fn degree_xyz(&self) -> u32 {
        self.0.iter().filter(|&&(v, _)| v < 3).map(|&(_, e)| e).sum()
    }

    /// Splits into the (x, y, z) part and the symbol part.
    pub fn split_xyz(&self) -> (Mono, Monomial) {
        let mut mono = [0u32; 3];
        let mut rest = Monomial::one();
        for &(v, e) in &self.0 {
            if v < 3 {
                mono[v as usize] = e;
            } else {
                rest.0.push((v, e));
            }
        }
        (Mono(mono), rest)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        let mut j = 0;
        let b = &other.0;
        for &(v, e) in &self.0 {
            while j < b.len() && b[j].0 < v {
                j += 1;
            }
            if j == b.len() || b[j].0 != v || b[j].1 < e {
                return false;
            }
        }
        true
    }

    /// `other / self` when `self` divides `other`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        let mut out = SmallVec::new();
        for &(v, e) in &other.0 {
            let d = self.degree_in(Var(v));
            if e > d {
                out.push((v, e - d));
            }
        }
        Some(Monomial(out))
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let mut out: SmallVec<[(u32, u32); 4]> = SmallVec::new();
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                out.push((a[i].0, a[i].1.max(b[j].1)));
                i += 1;
                j += 1;
            }
        }
        Monomial(out)
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::new();
        for &(v, e) in &self.0 {
            let f = other.degree_in(Var(v));
            if f > 0 {
                out.push((v, e.min(f)));
            }
        }
        Monomial(out)
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().all(|&(v, _)| other.degree_in(Var(v)) == 0)
    }

    /// Removes `v` entirely, returning its former exponent.
    pub fn remove(&self, v: Var) -> (u32, Monomial) {
        let mut out = SmallVec::new();
        let mut e0 = 0;
        for &(w, e) in &self.0 {
            if w == v.0 {
                e0 = e;
            } else {
                out.push((w, e));
            }
        }
        (e0, Monomial(out))
    }

    /// Lexicographic comparison with lower variable index more significant.
    pub fn cmp_lex(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => {
                    if va != vb {
                        return if va < vb {
                            Ordering::Greater
                        } else {
                            Ordering::Less
                        };
                    }
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                }
            }
            i += 1;
        }
    }

    /// Reverse-lex tie break of graded reverse lexicographic order.
    fn cmp_revlex(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        loop {
            match (i, j) {
                (0, 0) => return Ordering::Equal,
                (0, _) => return Ordering::Greater,
                (_, 0) => return Ordering::Less,
                _ => {}
            }
            let (va, ea) = a[i - 1];
            let (vb, eb) = b[j - 1];
            if va > vb {
                // `a` carries a later variable that `b` lacks.
                return Ordering::Less;
            }
            if vb > va {
                return Ordering::Greater;
            }
            if ea != eb {
                return eb.cmp(&ea);
            }
            i -= 1;
            j -= 1;
        }
    }
}

/// Graded reverse lexicographic, lower variable index is the larger variable.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.cmp_revlex(other))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, &(v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "v{}", v)?;
            if e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        Ok(())
    }
}
