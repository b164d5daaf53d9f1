//! Polynomials in x whose coefficients are rational functions of a parameter a.

use super::{PolyError, PolyQ};
use crate::numth::Rat;
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use std::ops::{Add, Mul, Neg, Sub};

/// num(a) / den(a), den nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFnA {
    pub num: PolyQ,
    pub den: PolyQ,
}

impl RatFnA {
    pub fn poly(num: PolyQ) -> Self {
        RatFnA { num, den: PolyQ::one() }
    }

    pub fn new(num: PolyQ, den: PolyQ) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let (num, den) = if g.deg0() > 0 { (num.exact_div(&g), den.exact_div(&g)) } else { (num, den) };
        let l = den.lc().recip();
        RatFnA { num: num.scale(&l), den: den.scale(&l) }
    }

    pub fn zero() -> Self {
        Self::poly(PolyQ::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// None where the denominator vanishes.
    pub fn eval(&self, a: &Rat) -> Option<Rat> {
        let d = self.den.eval(a);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(a) / d)
        }
    }

    fn add(&self, o: &RatFnA) -> RatFnA {
        if self.den == o.den {
            return RatFnA::new(&self.num + &o.num, self.den.clone());
        }
        RatFnA::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }

    fn mul(&self, o: &RatFnA) -> RatFnA {
        RatFnA::new(&self.num * &o.num, &self.den * &o.den)
    }
}

/// Polynomial in x; entry i is the coefficient of x^i, a rational function of a.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ParamPoly {
    c: Vec<RatFnA>,
}

impl ParamPoly {
    pub fn new(mut c: Vec<RatFnA>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        ParamPoly { c }
    }

    /// Polynomial coefficients given by polynomials in a.
    pub fn from_polys(c: Vec<PolyQ>) -> Self {
        Self::new(c.into_iter().map(RatFnA::poly).collect())
    }

    /// Sum of c(a) x^i terms, coefficients as integer vectors in ascending powers of a.
    pub fn from_int_terms(terms: &[(usize, &[i64])]) -> Self {
        let n = terms.iter().map(|t| t.0 + 1).max().unwrap_or(0);
        let mut c = vec![RatFnA::zero(); n];
        for (i, a) in terms {
            c[*i] = c[*i].add(&RatFnA::poly(PolyQ::from_ints(a)));
        }
        Self::new(c)
    }

    pub fn constant_x(r: RatFnA) -> Self {
        Self::new(vec![r])
    }

    pub fn x_pow(k: usize) -> Self {
        let mut c = vec![RatFnA::zero(); k + 1];
        c[k] = RatFnA::poly(PolyQ::one());
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[RatFnA] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> RatFnA {
        self.c.get(i).cloned().unwrap_or_else(RatFnA::zero)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::constant_x(RatFnA::poly(PolyQ::one()));
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// Specialization at a; None if some denominator vanishes there.
    pub fn eval_a(&self, a: &Rat) -> Option<PolyQ> {
        let mut out = Vec::with_capacity(self.c.len());
        for c in &self.c {
            out.push(c.eval(a)?);
        }
        Some(PolyQ::new(out))
    }

    /// Substitutes a polynomial in x for x (coefficients of the inner polynomial do not involve a).
    pub fn compose_x(&self, g: &PolyQ) -> Self {
        let gp = ParamPoly::new(g.coeffs().iter().map(|c| RatFnA::poly(PolyQ::constant(c.clone()))).collect());
        let mut acc = ParamPoly::default();
        for c in self.c.iter().rev() {
            acc = &(&acc * &gp) + &ParamPoly::constant_x(c.clone());
        }
        acc
    }
}

impl Add for &ParamPoly {
    type Output = ParamPoly;
    fn add(self, o: &ParamPoly) -> ParamPoly {
        let n = self.c.len().max(o.c.len());
        ParamPoly::new((0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }
}

impl Neg for &ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly::new(self.c.iter().map(|c| RatFnA { num: -&c.num, den: c.den.clone() }).collect())
    }
}

impl Sub for &ParamPoly {
    type Output = ParamPoly;
    fn sub(self, o: &ParamPoly) -> ParamPoly {
        self + &(-o)
    }
}

impl Mul for &ParamPoly {
    type Output = ParamPoly;
    fn mul(self, o: &ParamPoly) -> ParamPoly {
        if self.c.is_empty() || o.c.is_empty() {
            return ParamPoly::default();
        }
        let mut c = vec![RatFnA::zero(); self.c.len() + o.c.len() - 1];
        for (i, x) in self.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.c.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                c[i + j] = c[i + j].add(&x.mul(y));
            }
        }
        ParamPoly::new(c)
    }
}

super::owned_ops!(ParamPoly);

/// Number of distinct usable a-values that certify lhs = rhs: one more than the
/// a-degree of every cross-multiplied coefficient difference.
pub fn samples_needed(lhs: &ParamPoly, rhs: &ParamPoly) -> usize {
    let n = lhs.c.len().max(rhs.c.len());
    (0..n)
        .map(|i| {
            let (l, r) = (lhs.coeff(i), rhs.coeff(i));
            (l.num.deg0() + r.den.deg0()).max(r.num.deg0() + l.den.deg0()) + 1
        })
        .max()
        .unwrap_or(1)
}

/// Polynomial identity test in Q(a)[x]: compares both sides specialized at every
/// sample a where all denominators are nonzero. Errs when too few usable samples remain.
pub fn identity_check_in_a(lhs: &ParamPoly, rhs: &ParamPoly, a_values: &[Rat]) -> Result<bool, PolyError> {
    let needed = samples_needed(lhs, rhs);
    let distinct: BTreeSet<&Rat> = a_values.iter().collect();
    let mut used = 0;
    let mut agree = true;
    for a in distinct {
        let (Some(l), Some(r)) = (lhs.eval_a(a), rhs.eval_a(a)) else {
            continue;
        };
        used += 1;
        if l != r {
            agree = false;
        }
    }
    if used < needed {
        return Err(PolyError::InsufficientSamples { needed, got: used });
    }
    Ok(agree)
}

impl RatFnA {
    pub fn one() -> Self {
        Self::poly(PolyQ::one())
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }
}

impl One for ParamPoly {
    fn one() -> Self {
        ParamPoly::constant_x(RatFnA::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::rat_int;

    fn avals(r: std::ops::RangeInclusive<i64>) -> Vec<Rat> {
        r.map(rat_int).collect()
    }

    #[test]
    fn square_of_binomial() {
        // (x + a)^2 = x^2 + 2a x + a^2
        let lhs = ParamPoly::from_int_terms(&[(1, &[1]), (0, &[0, 1])]).pow(2);
        let rhs = ParamPoly::from_int_terms(&[(2, &[1]), (1, &[0, 2]), (0, &[0, 0, 1])]);
        assert_eq!(identity_check_in_a(&lhs, &rhs, &avals(1..=10)), Ok(true));
        let bad = ParamPoly::from_int_terms(&[(2, &[1]), (1, &[0, 2]), (0, &[1, 0, 1])]);
        assert_eq!(identity_check_in_a(&lhs, &bad, &avals(1..=10)), Ok(false));
        assert!(matches!(identity_check_in_a(&lhs, &rhs, &avals(1..=2)), Err(PolyError::InsufficientSamples { .. })));
    }

    #[test]
    fn rational_coefficients_skip_poles() {
        // x / (a - 1) * (a - 1) = x, a = 1 is skipped
        let inv = ParamPoly::new(vec![RatFnA::zero(), RatFnA::new(PolyQ::one(), PolyQ::from_ints(&[-1, 1]))]);
        let lin = ParamPoly::from_int_terms(&[(0, &[-1, 1])]);
        let lhs = &inv * &lin;
        assert_eq!(identity_check_in_a(&lhs, &ParamPoly::x_pow(1), &avals(1..=3)), Ok(true));
        let unreduced = RatFnA { num: PolyQ::from_ints(&[0, 0, 1]), den: PolyQ::from_ints(&[0, 1]) };
        let lhs = ParamPoly::constant_x(unreduced);
        let rhs = ParamPoly::from_int_terms(&[(0, &[0, 1])]);
        assert!(identity_check_in_a(&lhs, &rhs, &avals(0..=1)).is_err());
        assert_eq!(identity_check_in_a(&lhs, &rhs, &avals(0..=3)), Ok(true));
    }
}
