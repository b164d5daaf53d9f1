//! Rational torsion from reduction bounds and division-polynomial roots.

use super::{divpoly, EPoint, EllCurve};
use crate::numth::primes_up_to;
use crate::poly::rational_roots;
use num_integer::Integer;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionGroup {
    pub points: Vec<EPoint>,
    /// Invariant factors, e.g. [2, 2] for Z/2 x Z/2; empty for the trivial group.
    pub structure: Vec<u32>,
    /// gcd of #E(F_p) over the primes used.
    pub order_bound: u64,
    pub primes: Vec<u64>,
}

impl TorsionGroup {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn tag(&self) -> String {
        if self.structure.is_empty() {
            return "trivial".into();
        }
        self.structure.iter().map(|n| format!("Z/{n}Z")).collect::<Vec<_>>().join(" x ")
    }
}

/// Full rational torsion subgroup. The order divides #E(F_p) for every odd good p,
/// and each point of order n has x-coordinate a root of the n-th division polynomial.
pub fn torsion_subgroup(e: &EllCurve) -> TorsionGroup {
    let mut bound = 0u64;
    let mut used = Vec::new();
    for p in primes_up_to(400).into_iter().skip(1) {
        let Ok(m) = e.reduce_mod(p) else { continue };
        bound = bound.gcd(&m.count());
        used.push(p);
        if used.len() >= 8 {
            break;
        }
    }
    let mut found: BTreeSet<EPoint> = BTreeSet::new();
    found.insert(EPoint::Inf);
    let ff = divpoly::psi2_squared(e);
    for x in rational_roots(&ff).unwrap() {
        found.extend(e.lift_x(&x));
    }
    let divisors: Vec<u64> = (3..=bound).filter(|n| bound.is_multiple_of(*n)).collect();
    if let Some(&top) = divisors.last() {
        let f = divpoly::division_polys(e, top as usize);
        for &n in &divisors {
            for x in rational_roots(&f[n as usize]).unwrap() {
                for pt in e.lift_x(&x) {
                    if e.small_order(&pt, n as u32).is_some() {
                        found.insert(pt);
                    }
                }
            }
        }
    }
    // close under the group law
    loop {
        let cur: Vec<EPoint> = found.iter().cloned().collect();
        let before = found.len();
        for p in &cur {
            for q in &cur {
                found.insert(e.add(p, q));
            }
        }
        if found.len() == before {
            break;
        }
    }
    let points: Vec<EPoint> = found.into_iter().collect();
    let n = points.len() as u32;
    let two_torsion = points.iter().filter(|p| e.small_order(p, 2) == Some(2)).count();
    let structure = match (n, two_torsion) {
        (1, _) => vec![],
        (_, 3) => vec![2, n / 2],
        _ => vec![n],
    };
    TorsionGroup { points, structure, order_bound: bound, primes: used }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::{int, rat_int};

    #[test]
    fn family_torsion() {
        let e = EllCurve::from_ints([0, 18, 0, 77, 0]).unwrap();
        let t = torsion_subgroup(&e);
        assert_eq!(t.structure, vec![2, 2]);
        let xs: Vec<_> = t.points.iter().filter_map(|p| p.x().cloned()).collect();
        assert_eq!(xs, vec![rat_int(-11), rat_int(-7), rat_int(0)]);
        let a2 = int(237 * 237);
        let e = EllCurve::short(int(2) * &a2, &a2 * &a2 - 4, int(0)).unwrap();
        let t = torsion_subgroup(&e);
        assert_eq!(t.tag(), "Z/2Z x Z/2Z");
        let xs: Vec<_> = t.points.iter().filter_map(|p| p.x().cloned()).collect();
        assert_eq!(xs, vec![rat_int(-56171), rat_int(-56167), rat_int(0)]);
    }

    #[test]
    fn classical_curves() {
        let e = EllCurve::from_ints([0, 0, 0, -1, 0]).unwrap();
        assert_eq!(torsion_subgroup(&e).structure, vec![2, 2]);
        let e = EllCurve::from_ints([0, 0, 0, 0, 1]).unwrap();
        assert_eq!(torsion_subgroup(&e).structure, vec![6]);
        // 11a3: y^2 + y = x^3 - x^2 has Z/5
        let e = EllCurve::from_ints([0, -1, 1, 0, 0]).unwrap();
        assert_eq!(torsion_subgroup(&e).structure, vec![5]);
        // 14a1 has Z/6
        let e = EllCurve::from_ints([1, 0, 1, 4, -6]).unwrap();
        assert_eq!(torsion_subgroup(&e).structure, vec![6]);
        let e = EllCurve::from_ints([0, 0, 0, 0, 2]).unwrap();
        assert_eq!(torsion_subgroup(&e).order(), 1);
    }

    #[test]
    fn injection_into_reductions() {
        for a in [2i64, 3, 5, 9] {
            let a2 = int(a * a);
            let e = EllCurve::short(int(2) * &a2, &a2 * &a2 - 4, int(0)).unwrap();
            let t = torsion_subgroup(&e);
            for p in [5u64, 7, 11, 13] {
                if let Ok(n) = crate::ecq::count_points_mod_p(&e, p) {
                    assert_eq!(n % t.order() as u64, 0);
                }
            }
        }
    }
}
