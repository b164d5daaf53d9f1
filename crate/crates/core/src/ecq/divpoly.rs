//! Division polynomials in x.
//!
//! `f[n]` is psi_n for odd n and psi_n / psi_2 for even n, so every entry is a
//! polynomial in x alone; psi_2^2 = 4x^3 + b2 x^2 + 2 b4 x + b6.

use super::EllCurve;
use crate::numth::Rat;
use crate::poly::PolyQ;

fn r(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

pub fn psi2_squared(e: &EllCurve) -> PolyQ {
    PolyQ::new(vec![e.b6.clone(), r(2) * &e.b4, e.b2.clone(), r(4)])
}

/// f_0, ..., f_n.
pub fn division_polys(e: &EllCurve, n: usize) -> Vec<PolyQ> {
    let (b2, b4, b6, b8) = (&e.b2, &e.b4, &e.b6, &e.b8);
    let mut f = vec![
        PolyQ::zero(),
        PolyQ::one(),
        PolyQ::one(),
        PolyQ::new(vec![b8.clone(), r(3) * b6, r(3) * b4, b2.clone(), r(3)]),
        PolyQ::new(vec![b4 * b8 - b6 * b6, b2 * b8 - b4 * b6, r(10) * b8, r(10) * b6, r(5) * b4, b2.clone(), r(2)]),
    ];
    let ff = psi2_squared(e);
    let ff2 = &ff * &ff;
    for k in 5..=n {
        let m = k / 2;
        let next = if k % 2 == 1 {
            let t1 = &f[m + 2] * &f[m].pow(3);
            let t2 = &f[m - 1] * &f[m + 1].pow(3);
            if m % 2 == 0 {
                &(&ff2 * &t1) - &t2
            } else {
                &t1 - &(&ff2 * &t2)
            }
        } else {
            let inner = &(&f[m + 2] * &f[m - 1].pow(2)) - &(&f[m - 2] * &f[m + 1].pow(2));
            &f[m] * &inner
        };
        f.push(next);
    }
    f.truncate(n + 1);
    f
}

/// (num, den) with x(nP) = num(x) / den(x), n >= 1.
pub fn mul_x_polys(e: &EllCurve, n: usize) -> (PolyQ, PolyQ) {
    assert!(n >= 1);
    let f = division_polys(e, n + 1);
    let ff = psi2_squared(e);
    let (den, cross) = if n % 2 == 1 {
        (f[n].pow(2), &ff * &(&f[n - 1] * &f[n + 1]))
    } else {
        (&ff * &f[n].pow(2), &f[n - 1] * &f[n + 1])
    };
    (&(&PolyQ::x() * &den) - &cross, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecq::EPoint;
    use crate::numth::rat_int;

    #[test]
    fn multiplication_formula_matches_group_law() {
        let curves = [
            (EllCurve::from_ints([0, 18, 0, 77, 0]).unwrap(), EPoint::from_ints(-9, 6)),
            (EllCurve::from_ints([1, -1, 1, -3, 3]).unwrap(), EPoint::from_ints(1, 0)),
            (EllCurve::from_ints([0, 0, 1, -1, 0]).unwrap(), EPoint::from_ints(0, 0)),
        ];
        for (e, p) in curves {
            assert!(e.is_on(&p));
            let x = p.x().unwrap().clone();
            for n in 1..=9usize {
                let q = e.mul_i(n as i64, &p);
                let (num, den) = mul_x_polys(&e, n);
                match q {
                    EPoint::Inf => assert_eq!(den.eval(&x), rat_int(0)),
                    EPoint::Aff(qx, _) => assert_eq!(num.eval(&x) / den.eval(&x), qx, "n = {n}"),
                }
            }
        }
    }

    #[test]
    fn three_torsion_root() {
        // y^2 = x^3 + 1 has 3-torsion at x = 0
        let e = EllCurve::from_ints([0, 0, 0, 0, 1]).unwrap();
        let f = division_polys(&e, 3);
        assert_eq!(f[3].eval(&rat_int(0)), rat_int(0));
        assert_eq!(e.small_order(&EPoint::from_ints(0, 1), 12), Some(3));
    }
}
