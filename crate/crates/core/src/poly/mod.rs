//! Univariate polynomials over Q, binary forms, parameterized families and the
//! quadratic function field Q(x)[y]/(y^2 - f).

mod fnfield;
mod param;
mod roots;

pub use fnfield::{FnField, FnFieldElem, RatFunc};
pub use param::{identity_check_in_a, samples_needed, ParamPoly, RatFnA};
pub use roots::rational_roots;

use crate::numth::{rat_string, Int, Rat};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("inputs are not coprime (gcd has degree {0})")]
    NotCoprime(usize),
    #[error("root finding on the zero polynomial")]
    ZeroPolynomial,
    #[error("identity check needs {needed} usable sample values, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("curve relation y^2 = f is degenerate: f is not squarefree")]
    DegenerateRelation,
    #[error("division by the zero function-field element")]
    FnFieldDivisionByZero,
    #[error("form of degree {degree} cannot hold a monomial of degree {found}")]
    FormDegree { degree: usize, found: usize },
}

/// Polynomial over Q, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PolyQ {
    c: Vec<Rat>,
}

impl PolyQ {
    pub fn new(mut c: Vec<Rat>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        PolyQ { c }
    }

    pub fn zero() -> Self {
        PolyQ { c: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn x() -> Self {
        Self::monomial(Rat::one(), 1)
    }

    pub fn constant(r: Rat) -> Self {
        Self::new(vec![r])
    }

    pub fn monomial(coef: Rat, deg: usize) -> Self {
        let mut c = vec![Rat::zero(); deg + 1];
        c[deg] = coef;
        Self::new(c)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| Rat::from_integer(Int::from(v))).collect())
    }

    pub fn from_bigints(c: &[Int]) -> Self {
        Self::new(c.iter().map(|v| Rat::from_integer(v.clone())).collect())
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.c.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with the zero polynomial reported as 0.
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lc(&self) -> Rat {
        self.c.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.c.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.c.iter().enumerate().skip(1).map(|(i, c)| c * Rat::from_integer(Int::from(i))).collect())
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self::new(self.c.iter().map(|c| c * r).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lc().recip();
        self.scale(&l)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// self(g(x)).
    pub fn compose(&self, g: &PolyQ) -> Self {
        let mut acc = Self::zero();
        for c in self.c.iter().rev() {
            acc = &(&acc * g) + &Self::constant(c.clone());
        }
        acc
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Rat::zero(); k];
        c.extend(self.c.iter().cloned());
        Self::new(c)
    }

    pub fn divrem(&self, d: &PolyQ) -> Result<(PolyQ, PolyQ), PolyError> {
        let dd = d.degree().ok_or(PolyError::DivisionByZero)?;
        let mut r = self.c.clone();
        let n = match self.degree() {
            Some(n) if n >= dd => n,
            _ => return Ok((Self::zero(), self.clone())),
        };
        let inv = d.lc().recip();
        let mut q = vec![Rat::zero(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let t = &r[k + dd] * &inv;
            if t.is_zero() {
                continue;
            }
            for (j, dc) in d.c.iter().enumerate() {
                r[k + j] -= &t * dc;
            }
            q[k] = t;
        }
        Ok((Self::new(q), Self::new(r)))
    }

    /// Exact quotient; panics if the division leaves a remainder.
    pub fn exact_div(&self, d: &PolyQ) -> PolyQ {
        let (q, r) = self.divrem(d).expect("exact_div by zero");
        assert!(r.is_zero(), "exact_div left a remainder");
        q
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, o: &PolyQ) -> PolyQ {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).unwrap().1;
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// (g, u, v) with u*self + v*o = g monic.
    pub fn xgcd(&self, o: &PolyQ) -> (PolyQ, PolyQ, PolyQ) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Self::one(), Self::zero());
        let (mut t0, mut t1) = (Self::zero(), Self::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1).unwrap();
            let s = &s0 - &(&q * &s1);
            let t = &t0 - &(&q * &t1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let l = r0.lc().recip();
        (r0.scale(&l), s0.scale(&l), t0.scale(&l))
    }

    pub fn squarefree_part(&self) -> PolyQ {
        if self.deg0() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.exact_div(&g)
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).deg0() == 0
    }

    /// Primitive integer multiple with positive leading coefficient.
    pub fn primitive_ints(&self) -> Vec<Int> {
        if self.is_zero() {
            return vec![];
        }
        let l = self.c.iter().fold(Int::one(), |acc, c| acc.lcm(c.denom()));
        let mut v: Vec<Int> = self.c.iter().map(|c| (c * Rat::from_integer(l.clone())).to_integer()).collect();
        let g = v.iter().fold(Int::zero(), |acc, c| acc.gcd(c));
        let sign = if v.last().unwrap().is_negative() { -1 } else { 1 };
        for c in v.iter_mut() {
            *c = &*c / &g * sign;
        }
        v
    }

    pub fn is_integral(&self) -> bool {
        self.c.iter().all(|c| c.is_integer())
    }

    /// Resultant over Q by the Euclidean remainder sequence.
    pub fn resultant(&self, o: &PolyQ) -> Rat {
        let (mut a, mut b) = (self.clone(), o.clone());
        if a.is_zero() || b.is_zero() {
            return Rat::zero();
        }
        let mut acc = Rat::one();
        loop {
            let da = a.deg0();
            let db = b.deg0();
            if db == 0 {
                return acc * pow_rat(&b.lc(), da);
            }
            if da == 0 {
                return acc * pow_rat(&a.lc(), db);
            }
            let r = a.divrem(&b).unwrap().1;
            if r.is_zero() {
                return Rat::zero();
            }
            let dr = r.deg0();
            if (da * db) % 2 == 1 {
                acc = -acc;
            }
            acc *= pow_rat(&b.lc(), da - dr);
            a = b;
            b = r;
        }
    }
}

pub fn pow_rat(r: &Rat, e: usize) -> Rat {
    let mut out = Rat::one();
    for _ in 0..e {
        out *= r;
    }
    out
}

/// (u, v) with u*f + v*g = 1, deg u < deg g and deg v < deg f.
pub fn bezout_cofactors(f: &PolyQ, g: &PolyQ) -> Result<(PolyQ, PolyQ), PolyError> {
    let (d, u, v) = f.xgcd(g);
    if d.is_zero() || d.deg0() > 0 {
        return Err(PolyError::NotCoprime(d.deg0()));
    }
    Ok((u, v))
}

impl fmt::Display for PolyQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let show = !a.is_one() || i == 0;
            if show {
                if a.is_integer() {
                    write!(f, "{}", a.numer())?;
                } else {
                    write!(f, "({a})")?;
                }
            }
            match i {
                0 => {}
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &PolyQ {
    type Output = PolyQ;
    fn add(self, o: &PolyQ) -> PolyQ {
        let n = self.c.len().max(o.c.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &PolyQ {
    type Output = PolyQ;
    fn sub(self, o: &PolyQ) -> PolyQ {
        let n = self.c.len().max(o.c.len());
        PolyQ::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &PolyQ {
    type Output = PolyQ;
    fn mul(self, o: &PolyQ) -> PolyQ {
        if self.is_zero() || o.is_zero() {
            return PolyQ::zero();
        }
        let mut c = vec![Rat::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PolyQ::new(c)
    }
}

impl Neg for &PolyQ {
    type Output = PolyQ;
    fn neg(self) -> PolyQ {
        PolyQ::new(self.c.iter().map(|c| -c).collect())
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}
owned_ops!(PolyQ);
pub(crate) use owned_ops;

/// Binary form of declared degree d, stored as F(X, 1): coefficient i belongs to X^i Z^(d-i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomForm {
    degree: usize,
    p: PolyQ,
}

impl HomForm {
    pub fn new(degree: usize, p: PolyQ) -> Result<Self, PolyError> {
        if p.deg0() > degree {
            return Err(PolyError::FormDegree { degree, found: p.deg0() });
        }
        Ok(HomForm { degree, p })
    }

    /// From (i, c) pairs meaning c X^i Z^(d-i).
    pub fn from_terms(degree: usize, terms: &[(usize, Rat)]) -> Result<Self, PolyError> {
        let mut c = vec![Rat::zero(); degree + 1];
        for (i, v) in terms {
            if *i > degree {
                return Err(PolyError::FormDegree { degree, found: *i });
            }
            c[*i] += v;
        }
        Ok(HomForm { degree, p: PolyQ::new(c) })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// F(X, 1).
    pub fn dehomogenize(&self) -> &PolyQ {
        &self.p
    }

    /// F(1, Z) as a polynomial in Z.
    pub fn dehomogenize_x(&self) -> PolyQ {
        let mut c: Vec<Rat> = (0..=self.degree).map(|i| self.p.coeff(i)).collect();
        c.reverse();
        PolyQ::new(c)
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.p.coeff(i)
    }

    pub fn eval(&self, x: &Rat, z: &Rat) -> Rat {
        let mut acc = Rat::zero();
        let mut zp = Rat::one();
        let mut terms = Vec::with_capacity(self.degree + 1);
        for _ in 0..=self.degree {
            terms.push(zp.clone());
            zp *= z;
        }
        let mut xp = Rat::one();
        for i in 0..=self.degree {
            acc += self.p.coeff(i) * &xp * &terms[self.degree - i];
            xp *= x;
        }
        acc
    }

    pub fn eval_int(&self, x: &Int, z: &Int) -> Rat {
        self.eval(&Rat::from_integer(x.clone()), &Rat::from_integer(z.clone()))
    }

    pub fn mul(&self, o: &HomForm) -> HomForm {
        HomForm { degree: self.degree + o.degree, p: &self.p * &o.p }
    }

    pub fn add(&self, o: &HomForm) -> HomForm {
        assert_eq!(self.degree, o.degree, "adding forms of different degree");
        HomForm { degree: self.degree, p: &self.p + &o.p }
    }

    /// Form with the roles of X and Z exchanged.
    pub fn swap(&self) -> HomForm {
        HomForm { degree: self.degree, p: self.dehomogenize_x() }
    }
}

/// Coefficients as decimal strings, ascending degree.
impl Serialize for PolyQ {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.c.iter().map(rat_string))
    }
}

impl Serialize for HomForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("HomForm", 2)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("x_powers", &self.p)?;
        st.end()
    }
}

impl fmt::Display for HomForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in (0..=self.degree).rev() {
            let c = self.p.coeff(i);
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            first = false;
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{a}")?;
            }
            let j = self.degree - i;
            match i {
                0 => {}
                1 => f.write_str("X")?,
                _ => write!(f, "X^{i}")?,
            }
            match j {
                0 => {}
                1 => f.write_str("Z")?,
                _ => write!(f, "Z^{j}")?,
            }
            if a.is_one() && i == 0 && j == 0 {
                f.write_str("1")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::rat_int;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> PolyQ {
        PolyQ::from_ints(c)
    }

    #[test]
    fn divrem_and_gcd() {
        let (q, r) = p(&[-1, 0, 1]).divrem(&p(&[-1, 1])).unwrap();
        assert_eq!(q, p(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(p(&[1]).divrem(&PolyQ::zero()), Err(PolyError::DivisionByZero));
        let a = &p(&[-1, 1]) * &p(&[2, 3]);
        let b = &p(&[-1, 1]) * &p(&[5, 0, 1]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
    }

    #[test]
    fn family_at_one_by_composition() {
        // f = x^8 + (4-4a^4)x^6 + (8a^4+6)x^4 + (4-4a^4)x^2 + 1 at a = 1
        let x2 = PolyQ::monomial(rat_int(1), 2);
        let inner = p(&[1, 0, 14, 0, 1]);
        let f = &inner.compose(&x2);
        assert_eq!(*f, p(&[1, 0, 0, 0, 14, 0, 0, 0, 1]));
        let sq = &x2 * &x2;
        let built = &(&(&sq * &sq) + &sq.scale(&rat_int(14))) + &PolyQ::one();
        assert_eq!(built, *f);
    }

    #[test]
    fn bezout_examples() {
        let (u, v) = bezout_cofactors(&p(&[0, 1]), &p(&[1, -1])).unwrap();
        assert_eq!((u, v), (p(&[1]), p(&[1])));
        assert!(matches!(bezout_cofactors(&p(&[-1, 0, 1]), &p(&[1, 1])), Err(PolyError::NotCoprime(1))));
    }

    #[test]
    fn lemma_cofactors_from_euclid() {
        // F1(X,1), G1(X,1) at a = 5 and the cofactors with a^2 - 1 in the denominator
        let a2 = rat_int(25);
        let f1 = PolyQ::new(vec![-rat_int(2) - &a2, rat_int(0), rat_int(-6), rat_int(0), -rat_int(2) - &a2]);
        let g1 = p(&[1, 0, 2, 0, 1]);
        let (u, v) = bezout_cofactors(&f1, &g1).unwrap();
        let d = &a2 - rat_int(1);
        let expect_u = PolyQ::new(vec![-d.recip(), rat_int(0), -(rat_int(2) * &d).recip()]);
        let expect_v = PolyQ::new(vec![-rat_int(3) / &d, rat_int(0), -(&a2 / rat_int(2) + rat_int(1)) / &d]);
        assert_eq!(u, expect_u);
        assert_eq!(v, expect_v);
        assert_eq!(&(&u * &f1) + &(&v * &g1), PolyQ::one());
    }

    #[test]
    fn resultant_matches_roots() {
        // Res((x-1)(x-2), (x-3)) = (1-3)(2-3) = 2
        let a = p(&[2, -3, 1]);
        let b = p(&[-3, 1]);
        assert_eq!(a.resultant(&b), rat_int(2));
        assert_eq!(b.resultant(&a), rat_int(2));
        let c = p(&[0, 1]);
        assert_eq!(a.resultant(&c), rat_int(2));
        assert_eq!(a.resultant(&p(&[-1, 1])), rat_int(0));
        // Sylvester-determinant oracle for two quadratics
        let f = p(&[3, 5, 2]);
        let g = p(&[-1, 4, 7]);
        let (a0, a1, a2) = (3, 5, 2);
        let (b0, b1, b2) = (-1, 4, 7);
        let det = (a2 * b0 - a0 * b2) * (a2 * b0 - a0 * b2) - (a2 * b1 - a1 * b2) * (a1 * b0 - a0 * b1);
        assert_eq!(f.resultant(&g), rat_int(det));
    }

    #[test]
    fn forms() {
        let g = HomForm::from_terms(4, &[(4, rat_int(1)), (2, rat_int(2)), (0, rat_int(1))]).unwrap();
        assert_eq!(g.eval_int(&Int::from(2), &Int::from(3)), rat_int(169));
        assert_eq!(g.to_string(), "X^4 + 2X^2Z^2 + Z^4");
        let z8 = HomForm::from_terms(8, &[(0, rat_int(1))]).unwrap();
        assert_eq!(z8.swap().dehomogenize(), &PolyQ::monomial(rat_int(1), 8));
        assert!(HomForm::new(2, p(&[0, 0, 0, 1])).is_err());
        assert_eq!(p(&[1, -2, 0, 3]).to_string(), "3x^3 - 2x + 1");
    }

    fn small_poly() -> impl Strategy<Value = PolyQ> {
        proptest::collection::vec(-20i64..20, 1..9).prop_map(|v| PolyQ::from_ints(&v))
    }

    proptest! {
        #[test]
        fn bezout_random(f in small_poly(), g in small_poly()) {
            prop_assume!(!f.is_zero() && !g.is_zero());
            match bezout_cofactors(&f, &g) {
                Ok((u, v)) => {
                    prop_assert_eq!(&(&u * &f) + &(&v * &g), PolyQ::one());
                    if g.deg0() > 0 { prop_assert!(u.deg0() < g.deg0()); }
                    if f.deg0() > 0 { prop_assert!(v.deg0() < f.deg0()); }
                }
                Err(_) => prop_assert!(f.gcd(&g).deg0() > 0),
            }
        }

        #[test]
        fn divrem_identity(f in small_poly(), g in small_poly()) {
            prop_assume!(!g.is_zero());
            let (q, r) = f.divrem(&g).unwrap();
            prop_assert_eq!(&(&q * &g) + &r, f);
            prop_assert!(r.is_zero() || r.deg0() < g.deg0());
        }
    }
}
