//! Rational roots by p-adic Newton lifting and rational reconstruction.

use super::{PolyError, PolyQ};
use crate::numth::{self, inv_mod, rational_reconstruct, Int, ModInt, Rat};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn eval_int_mod(c: &[Int], x: &Int, m: &Int) -> Int {
    let mut acc = Int::zero();
    for v in c.iter().rev() {
        acc = (acc * x + v).mod_floor(m);
    }
    acc
}

fn reduce_mod(c: &[Int], p: u64) -> Vec<u64> {
    let pb = Int::from(p);
    let mut v: Vec<u64> = c.iter().map(|x| x.mod_floor(&pb).to_u64().unwrap()).collect();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn polymod_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let inv = numth::inv_mod_u64(b[db], p).unwrap();
    while r.len() > db {
        let t = numth::mul_mod_u64(*r.last().unwrap(), inv, p);
        let off = r.len() - 1 - db;
        for (j, &bc) in b.iter().enumerate() {
            let s = numth::mul_mod_u64(t, bc, p);
            r[off + j] = (r[off + j] + p - s) % p;
        }
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    r
}

fn gcd_degree_mod(a: &[u64], b: &[u64], p: u64) -> usize {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    while !y.is_empty() {
        let r = polymod_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x.len().saturating_sub(1)
}

fn derivative_ints(c: &[Int]) -> Vec<Int> {
    c.iter().enumerate().skip(1).map(|(i, v)| v * Int::from(i)).collect()
}

/// Every rational root of a nonzero polynomial, sorted, each checked by exact evaluation.
pub fn rational_roots(p: &PolyQ) -> Result<Vec<Rat>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let mut roots = Vec::new();
    let k = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    if k > 0 {
        roots.push(Rat::zero());
    }
    let q = PolyQ::new(p.coeffs()[k..].to_vec());
    if q.deg0() == 0 {
        return Ok(roots);
    }
    let sq = q.squarefree_part();
    let c = sq.primitive_ints();
    let d = c.len() - 1;
    if d == 1 {
        roots.push(Rat::new(-&c[0], c[1].clone()));
    } else {
        roots.extend(hensel_roots(&c));
    }
    roots.sort();
    roots.dedup();
    debug_assert!(roots.iter().all(|r| p.eval(r).is_zero()));
    Ok(roots)
}

fn choose_prime(c: &[Int], dc: &[Int]) -> u64 {
    let d = c.len() - 1;
    for p in numth::primes_up_to(200_000).into_iter().skip_while(|&p| p < 1009) {
        let fm = reduce_mod(c, p);
        if fm.len() != d + 1 {
            continue;
        }
        let dm = reduce_mod(dc, p);
        if dm.is_empty() || gcd_degree_mod(&fm, &dm, p) != 0 {
            continue;
        }
        return p;
    }
    panic!("no prime keeps the polynomial squarefree below 200000");
}

/// Roots of a primitive squarefree integer polynomial with nonzero constant term.
fn hensel_roots(c: &[Int]) -> Vec<Rat> {
    let d = c.len() - 1;
    let lc = c[d].abs();
    let dc = derivative_ints(c);
    let p0 = choose_prime(c, &dc);
    let pb = Int::from(p0);
    let fm = reduce_mod(c, p0);
    let mut start = Vec::new();
    for x in 0..p0 {
        let mut acc = 0u64;
        for &v in fm.iter().rev() {
            acc = (numth::mul_mod_u64(acc, x, p0) + v) % p0;
        }
        if acc == 0 {
            start.push(Int::from(x));
        }
    }
    if start.is_empty() {
        return vec![];
    }
    // numerators divide c0 and satisfy |p/q| < 1 + max|c_i / c_d|; denominators divide c_d
    let maxc = c[..d].iter().map(|v| v.abs()).max().unwrap();
    let num_bound = c[0].abs().min(&lc + &maxc);
    let den_bound = lc.clone();
    let nd = &num_bound * &den_bound;
    let target = Int::from(2) * &nd * &nd;
    let mut out = Vec::new();
    for r0 in start {
        let mut r = r0;
        let mut m = pb.clone();
        while m <= target {
            let m2 = &m * &m;
            let fv = eval_int_mod(c, &r, &m2);
            let dv = eval_int_mod(&dc, &r, &m2);
            let inv = inv_mod(&dv, &m2).expect("derivative is a unit at a simple root");
            r = (r - fv * inv).mod_floor(&m2);
            m = m2;
        }
        let mi = ModInt::new(r, m).unwrap();
        if let Some(cand) = rational_reconstruct(&mi, &num_bound, &den_bound) {
            let num = cand.numer();
            let den = cand.denom();
            // homogeneous evaluation sum c_i num^i den^(d-i)
            let mut acc = Int::zero();
            let mut np = Int::one();
            let mut dp: Vec<Int> = Vec::with_capacity(d + 1);
            let mut t = Int::one();
            for _ in 0..=d {
                dp.push(t.clone());
                t *= den;
            }
            for (i, ci) in c.iter().enumerate() {
                acc += ci * &np * &dp[d - i];
                np *= num;
            }
            if acc.is_zero() {
                out.push(cand);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::{rat, rat_int};
    use proptest::prelude::*;

    #[test]
    fn spec_style_examples() {
        let a = 3i64;
        let a2 = a * a;
        // 16 a^2 (a^2 + 2) x^2 (x^2 + 1)^2
        let x2p1 = PolyQ::from_ints(&[1, 0, 1]);
        let p = &(&x2p1 * &x2p1) * &PolyQ::monomial(rat_int(16 * a2 * (a2 + 2)), 2);
        assert_eq!(rational_roots(&p).unwrap(), vec![rat_int(0)]);
        assert!(rational_roots(&PolyQ::from_ints(&[-2, 0, 1])).unwrap().is_empty());
        let p = &(&PolyQ::from_ints(&[-1, 1]) * &PolyQ::from_ints(&[1, 1])) * &PolyQ::from_ints(&[-3, 2]);
        assert_eq!(rational_roots(&p).unwrap(), vec![rat_int(-1), rat_int(1), rat(3, 2)]);
        assert_eq!(rational_roots(&PolyQ::zero()), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn large_coefficients_and_multiplicity() {
        let big: Int = Int::from(10u32).pow(40u32) + 7u32;
        let r1 = Rat::new(big.clone(), Int::from(3));
        let r2 = Rat::new(-Int::from(5), big.clone() * 11);
        let l1 = PolyQ::new(vec![-r1.clone(), Rat::one()]);
        let l2 = PolyQ::new(vec![-r2.clone(), Rat::one()]);
        let q = PolyQ::from_ints(&[7, 0, 3, 0, 1]);
        let p = &(&(&l1 * &l1) * &l2) * &q;
        let mut expect = vec![r1, r2];
        expect.sort();
        assert_eq!(rational_roots(&p).unwrap(), expect);
    }

    fn brute(p: &PolyQ) -> Vec<Rat> {
        let mut out = Vec::new();
        for q in 1..=200i64 {
            for n in -200..=200i64 {
                if num_integer::gcd(n, q) != 1 {
                    continue;
                }
                let r = rat(n, q);
                if p.eval(&r).is_zero() {
                    out.push(r);
                }
            }
        }
        out.sort();
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn matches_brute_force(
            lin in proptest::collection::vec((-60i64..60, 1i64..60), 0..4),
            quad in proptest::collection::vec((1i64..30, -20i64..20, 1i64..30), 0..3),
        ) {
            let mut p = PolyQ::one();
            for (n, d) in &lin {
                p = &p * &PolyQ::from_ints(&[-n, *d]);
            }
            for (a, b, c) in &quad {
                // positive-definite: a x^2 + b x + c with b^2 < 4ac has no real roots
                prop_assume!(b * b < 4 * a * c);
                p = &p * &PolyQ::from_ints(&[*c, *b, *a]);
            }
            prop_assume!(p.deg0() > 0);
            prop_assert_eq!(rational_roots(&p).unwrap(), brute(&p));
        }
    }
}
