//! Curves over prime fields by direct enumeration.

use super::{EcError, EllCurve};
use crate::numth::{self, legendre_u64, mul_mod_u64, Int, Rat};
use num_integer::Integer;
use num_traits::ToPrimitive;

/// Reduction of a rational to F_p, None if p divides the denominator.
pub fn rat_mod(v: &Rat, p: u64) -> Option<u64> {
    let pb = Int::from(p);
    let d = v.denom().mod_floor(&pb).to_u64().unwrap();
    if d == 0 {
        return None;
    }
    let n = v.numer().mod_floor(&pb).to_u64().unwrap();
    Some(mul_mod_u64(n, numth::inv_mod_u64(d, p)?, p))
}

pub type PointModP = Option<(u64, u64)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveModP {
    pub p: u64,
    pub a: [u64; 5],
}

impl CurveModP {
    pub fn from_curve(e: &EllCurve, p: u64) -> Result<Self, EcError> {
        if !numth::is_prime_u64(p) {
            return Err(EcError::NotPrime(Int::from(p)));
        }
        let mut a = [0u64; 5];
        for (slot, c) in a.iter_mut().zip(e.coeffs()) {
            *slot = rat_mod(c, p).ok_or(EcError::BadPrime(p))?;
        }
        match rat_mod(&e.disc, p) {
            Some(d) if d != 0 => Ok(CurveModP { p, a }),
            _ => Err(EcError::BadPrime(p)),
        }
    }

    fn m(&self, x: u64, y: u64) -> u64 {
        mul_mod_u64(x, y, self.p)
    }

    fn ad(&self, x: u64, y: u64) -> u64 {
        (x + y) % self.p
    }

    fn sb(&self, x: u64, y: u64) -> u64 {
        (x + self.p - y % self.p) % self.p
    }

    fn rhs(&self, x: u64) -> u64 {
        let [_, a2, _, a4, a6] = self.a;
        let x2 = self.m(x, x);
        let t = self.ad(self.m(x2, x), self.m(a2, x2));
        self.ad(self.ad(t, self.m(a4, x)), a6)
    }

    pub fn is_on(&self, pt: PointModP) -> bool {
        match pt {
            None => true,
            Some((x, y)) => {
                let [a1, _, a3, _, _] = self.a;
                let lhs = self.ad(self.ad(self.m(y, y), self.m(self.m(a1, x), y)), self.m(a3, y));
                lhs == self.rhs(x)
            }
        }
    }

    /// Point count including infinity, one character evaluation per x.
    pub fn count(&self) -> u64 {
        let p = self.p;
        let [a1, _, a3, _, _] = self.a;
        if p == 2 {
            return self.count_by_scan();
        }
        let mut n = 1u64;
        for x in 0..p {
            let b = self.ad(self.m(a1, x), a3);
            let d = self.ad(self.m(b, b), self.m(4, self.rhs(x)));
            n += (1 + legendre_u64(d as i64, p)) as u64;
        }
        n
    }

    /// Point count by scanning every (x, y).
    pub fn count_by_scan(&self) -> u64 {
        let mut n = 1u64;
        for x in 0..self.p {
            for y in 0..self.p {
                if self.is_on(Some((x, y))) {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn points(&self) -> Vec<PointModP> {
        let mut out = vec![None];
        for x in 0..self.p {
            for y in self.ys(x) {
                out.push(Some((x, y)));
            }
        }
        out
    }

    fn ys(&self, x: u64) -> Vec<u64> {
        let p = self.p;
        let [a1, _, a3, _, _] = self.a;
        if p == 2 {
            return (0..2).filter(|&y| self.is_on(Some((x, y)))).collect();
        }
        let b = self.ad(self.m(a1, x), a3);
        let d = self.ad(self.m(b, b), self.m(4, self.rhs(x)));
        let Some(s) = numth::sqrt_mod_u64(d, p) else {
            return vec![];
        };
        let inv2 = p.div_ceil(2);
        let y1 = self.m(self.sb(s, b), inv2);
        let y2 = self.m(self.sb(p - s % p, b), inv2);
        if y1 == y2 {
            vec![y1]
        } else {
            vec![y1, y2]
        }
    }

    pub fn neg(&self, pt: PointModP) -> PointModP {
        let (x, y) = pt?;
        let [a1, _, a3, _, _] = self.a;
        Some((x, self.sb(self.sb(0, y), self.ad(self.m(a1, x), a3))))
    }

    pub fn add(&self, p1: PointModP, p2: PointModP) -> PointModP {
        let (x1, y1) = match p1 {
            None => return p2,
            Some(v) => v,
        };
        let (x2, y2) = match p2 {
            None => return p1,
            Some(v) => v,
        };
        let [a1, a2, a3, a4, a6] = self.a;
        let p = self.p;
        let inv = |v: u64| numth::inv_mod_u64(v, p).unwrap();
        let (lambda, nu);
        if x1 == x2 {
            let s = self.ad(self.ad(y1, y2), self.ad(self.m(a1, x2), a3));
            if s == 0 {
                return None;
            }
            let den = inv(self.ad(self.ad(self.m(2, y1), self.m(a1, x1)), a3));
            let num =
                self.sb(self.ad(self.ad(self.m(3, self.m(x1, x1)), self.m(2, self.m(a2, x1))), a4), self.m(a1, y1));
            lambda = self.m(num, den);
            let nnum = self.sb(
                self.ad(self.ad(self.sb(0, self.m(x1, self.m(x1, x1))), self.m(a4, x1)), self.m(2, a6)),
                self.m(a3, y1),
            );
            nu = self.m(nnum, den);
        } else {
            let den = inv(self.sb(x2, x1));
            lambda = self.m(self.sb(y2, y1), den);
            nu = self.m(self.sb(self.m(y1, x2), self.m(y2, x1)), den);
        }
        let x3 = self.sb(self.sb(self.sb(self.ad(self.m(lambda, lambda), self.m(a1, lambda)), a2), x1), x2);
        let y3 = self.sb(self.sb(self.sb(0, self.m(self.ad(lambda, a1), x3)), nu), a3);
        Some((x3, y3))
    }

    pub fn mul(&self, n: u64, pt: PointModP) -> PointModP {
        let mut acc = None;
        let mut base = pt;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn reduce_point(&self, pt: &super::EPoint) -> Option<PointModP> {
        match pt {
            super::EPoint::Inf => Some(None),
            super::EPoint::Aff(x, y) => {
                let (Some(xm), Some(ym)) = (rat_mod(x, self.p), rat_mod(y, self.p)) else {
                    // p-adically large coordinates reduce to the point at infinity
                    return if x.denom().is_multiple_of(&Int::from(self.p)) { Some(None) } else { None };
                };
                Some(Some((xm, ym)))
            }
        }
    }
}

/// #E(F_p) for a prime of good reduction.
pub fn count_points_mod_p(e: &EllCurve, p: u64) -> Result<u64, EcError> {
    Ok(CurveModP::from_curve(e, p)?.count())
}

/// #C(F_p) for the smooth model of y^2 = f(x), f of even degree with a unit leading
/// coefficient: affine points plus the 1 + (lc/p) points at infinity. Returns both the
/// character count and the full (x, y) scan; callers compare them.
pub fn count_hyperelliptic_mod_p(f: &[Int], p: u64) -> Result<(u64, u64), EcError> {
    if p == 2 || !numth::is_prime_u64(p) {
        return Err(EcError::BadPrime(p));
    }
    let pb = Int::from(p);
    let c: Vec<u64> = f.iter().map(|v| v.mod_floor(&pb).to_u64().unwrap()).collect();
    let lc = *c.last().unwrap();
    if lc == 0 || c.len().is_multiple_of(2) {
        return Err(EcError::BadPrime(p));
    }
    let eval = |x: u64| c.iter().rev().fold(0u64, |acc, &v| (mul_mod_u64(acc, x, p) + v) % p);
    let inf = (1 + legendre_u64(lc as i64, p)) as u64;
    let mut by_char = inf;
    let mut by_scan = inf;
    let mut squares = vec![0u64; p as usize];
    for y in 0..p {
        squares[mul_mod_u64(y, y, p) as usize] += 1;
    }
    for x in 0..p {
        let v = eval(x);
        by_char += (1 + legendre_u64(v as i64, p)) as u64;
        by_scan += squares[v as usize];
    }
    Ok((by_char, by_scan))
}
