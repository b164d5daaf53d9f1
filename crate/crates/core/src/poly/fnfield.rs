//! Arithmetic in Q(x)[y]/(y^2 - f(x)).

use super::{PolyError, PolyQ};
use crate::numth::Rat;
use num_traits::{One, Zero};
use std::fmt;
use std::sync::Arc;

/// num/den with gcd removed and den monic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    num: PolyQ,
    den: PolyQ,
}

impl RatFunc {
    pub fn new(num: PolyQ, den: PolyQ) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let (n, d) = if g.deg0() > 0 { (num.exact_div(&g), den.exact_div(&g)) } else { (num, den) };
        let l = d.lc().recip();
        Ok(RatFunc { num: n.scale(&l), den: d.scale(&l) })
    }

    pub fn poly(p: PolyQ) -> Self {
        RatFunc { num: p, den: PolyQ::one() }
    }

    pub fn zero() -> Self {
        Self::poly(PolyQ::zero())
    }

    pub fn one() -> Self {
        Self::poly(PolyQ::one())
    }

    pub fn constant(r: Rat) -> Self {
        Self::poly(PolyQ::constant(r))
    }

    pub fn num(&self) -> &PolyQ {
        &self.num
    }

    pub fn den(&self) -> &PolyQ {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, x: &Rat) -> Option<Rat> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(&self.num + &o.num, self.den.clone()).unwrap();
        }
        RatFunc::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den).unwrap()
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &o.num, &self.den * &o.den).unwrap()
    }

    pub fn mul_poly(&self, p: &PolyQ) -> RatFunc {
        RatFunc::new(&self.num * p, self.den.clone()).unwrap()
    }

    pub fn inv(&self) -> Result<RatFunc, PolyError> {
        if self.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        RatFunc::new(self.den.clone(), self.num.clone())
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one_poly() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl PolyQ {
    fn is_one_poly(&self) -> bool {
        self.deg0() == 0 && self.coeff(0).is_one()
    }
}

/// The curve relation y^2 = f; f must be squarefree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnField {
    f: Arc<PolyQ>,
}

impl FnField {
    pub fn new(f: PolyQ) -> Result<Self, PolyError> {
        if f.deg0() == 0 || !f.is_squarefree() {
            return Err(PolyError::DegenerateRelation);
        }
        Ok(FnField { f: Arc::new(f) })
    }

    pub fn f(&self) -> &PolyQ {
        &self.f
    }

    pub fn elem(&self, u: RatFunc, v: RatFunc) -> FnFieldElem {
        FnFieldElem { u, v, field: self.clone() }
    }

    pub fn from_poly(&self, u: PolyQ) -> FnFieldElem {
        self.elem(RatFunc::poly(u), RatFunc::zero())
    }

    pub fn x(&self) -> FnFieldElem {
        self.from_poly(PolyQ::x())
    }

    pub fn y(&self) -> FnFieldElem {
        self.elem(RatFunc::zero(), RatFunc::one())
    }

    pub fn constant(&self, r: Rat) -> FnFieldElem {
        self.from_poly(PolyQ::constant(r))
    }
}

/// u(x) + v(x) y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnFieldElem {
    u: RatFunc,
    v: RatFunc,
    field: FnField,
}

impl FnFieldElem {
    pub fn u(&self) -> &RatFunc {
        &self.u
    }

    pub fn v(&self) -> &RatFunc {
        &self.v
    }

    pub fn field(&self) -> &FnField {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    fn same(&self, o: &FnFieldElem) {
        assert!(Arc::ptr_eq(&self.field.f, &o.field.f) || self.field == o.field, "different curve relations");
    }

    pub fn add(&self, o: &FnFieldElem) -> FnFieldElem {
        self.same(o);
        self.field.elem(self.u.add(&o.u), self.v.add(&o.v))
    }

    pub fn sub(&self, o: &FnFieldElem) -> FnFieldElem {
        self.same(o);
        self.field.elem(self.u.sub(&o.u), self.v.sub(&o.v))
    }

    pub fn neg(&self) -> FnFieldElem {
        self.field.elem(self.u.neg(), self.v.neg())
    }

    pub fn mul(&self, o: &FnFieldElem) -> FnFieldElem {
        self.same(o);
        let f = RatFunc::poly(self.field.f().clone());
        let u = self.u.mul(&o.u).add(&self.v.mul(&o.v).mul(&f));
        let v = self.u.mul(&o.v).add(&self.v.mul(&o.u));
        self.field.elem(u, v)
    }

    pub fn conj(&self) -> FnFieldElem {
        self.field.elem(self.u.clone(), self.v.neg())
    }

    /// u^2 - v^2 f.
    pub fn norm(&self) -> RatFunc {
        let f = RatFunc::poly(self.field.f().clone());
        self.u.mul(&self.u).sub(&self.v.mul(&self.v).mul(&f))
    }

    pub fn inv(&self) -> Result<FnFieldElem, PolyError> {
        if self.is_zero() {
            return Err(PolyError::FnFieldDivisionByZero);
        }
        let n = self.norm().inv()?;
        let c = self.conj();
        Ok(self.field.elem(c.u.mul(&n), c.v.mul(&n)))
    }

    pub fn div(&self, o: &FnFieldElem) -> Result<FnFieldElem, PolyError> {
        Ok(self.mul(&o.inv()?))
    }

    /// Value at a point (x, y) of the curve, None at a pole of u or v.
    pub fn eval(&self, x: &Rat, y: &Rat) -> Option<Rat> {
        let u = self.u.eval(x)?;
        if self.v.is_zero() {
            return Some(u);
        }
        Some(u + self.v.eval(x)? * y)
    }
}

impl fmt::Display for FnFieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] + [{}]·y", self.u, self.v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::{rat_int, Int};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn family_f(a: i64) -> PolyQ {
        let a4 = a.pow(4);
        PolyQ::from_ints(&[1, 0, 4 - 4 * a4, 0, 8 * a4 + 6, 0, 4 - 4 * a4, 0, 1])
    }

    #[test]
    fn relation_and_norm() {
        let k = FnField::new(family_f(3)).unwrap();
        let yy = k.y().mul(&k.y());
        assert_eq!(yy, k.from_poly(family_f(3)));
        let e = k.elem(RatFunc::poly(PolyQ::from_ints(&[1, 2])), RatFunc::poly(PolyQ::from_ints(&[0, 1])));
        let prod = e.mul(&e.conj());
        assert_eq!(prod, k.elem(e.norm(), RatFunc::zero()));
        assert!(FnField::new(PolyQ::from_ints(&[1, 2, 1])).is_err());
        assert_eq!(k.y().div(&k.constant(Rat::zero())), Err(PolyError::FnFieldDivisionByZero));
    }

    #[test]
    fn x_of_first_map_at_zero_one() {
        let a = 3i64;
        let a2 = a * a;
        let k = FnField::new(family_f(a)).unwrap();
        let num = k.from_poly(PolyQ::from_ints(&[-a2, 0, 6 * a2, 0, -a2])).sub(&k.y().mul(&k.constant(rat_int(2))));
        let den = k.from_poly(PolyQ::from_ints(&[1, 0, 2, 0, 1]));
        let xm = num.div(&den).unwrap();
        assert_eq!(xm.eval(&rat_int(0), &rat_int(1)), Some(rat_int(-a2 - 2)));
    }

    fn arb_ratfunc() -> impl Strategy<Value = RatFunc> {
        (proptest::collection::vec(-9i64..9, 0..4), proptest::collection::vec(-9i64..9, 1..3)).prop_filter_map(
            "zero den",
            |(n, d)| {
                let den = PolyQ::from_ints(&d);
                if den.is_zero() {
                    None
                } else {
                    RatFunc::new(PolyQ::from_ints(&n), den).ok()
                }
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn inverse_roundtrip(
            fc in proptest::collection::vec(-5i64..5, 8),
            u in arb_ratfunc(),
            v in arb_ratfunc(),
        ) {
            let mut c = fc.clone();
            c.push(1);
            let f = PolyQ::from_ints(&c);
            prop_assume!(f.is_squarefree());
            let k = FnField::new(f).unwrap();
            let e = k.elem(u, v);
            prop_assume!(!e.is_zero());
            let one = e.mul(&e.inv().unwrap());
            prop_assert_eq!(one, k.constant(Rat::from_integer(Int::from(1))));
            prop_assert!(!Rat::zero().is_one());
        }
    }
}
