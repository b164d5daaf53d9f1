//! Local and global root numbers of E': y^2 = x^3 + (-4-a^4)x^2 + 4a^4 x, and the parity
//! argument for the oddness of its rank.

use crate::ecq::{EcError, EllCurve, ReductionType};
use crate::family::e_prime_curve;
use crate::numth::{int, inv_mod, is_prime, legendre, split_power, Int, Rat};
use crate::serial::ser_int;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("root number hypothesis violated at a = {a}: {reason}")]
    Hypothesis { a: Int, reason: String },
    #[error("no classification rule applies at {0}: {1}")]
    Unclassifiable(String, String),
    #[error("split test disagreement at {0}: -c6 character {1}, node slope {2}")]
    SplitMismatch(Int, i32, i32),
    #[error("bad prime {0} missing from the expected factorization of the discriminant")]
    Incomplete(Int),
    #[error("global root number is +1, parity predicts even rank")]
    EvenParity,
    #[error(transparent)]
    Ec(#[from] EcError),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Infinity,
    Prime(#[serde(serialize_with = "ser_int")] Int),
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

/// Which case of the local classification produced w.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootRule {
    Archimedean,
    Good,
    Split,
    NonSplit,
    /// Additive at 2, w = (-1, -c6)_2, read off from c6' mod 4.
    AdditiveAtTwo,
}

impl RootRule {
    pub fn case(&self) -> u8 {
        match self {
            RootRule::Archimedean => 1,
            RootRule::Good => 2,
            RootRule::Split => 3,
            RootRule::NonSplit => 4,
            RootRule::AdditiveAtTwo => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalRootReport {
    pub place: Place,
    pub reduction: String,
    pub w: i8,
    pub rule: RootRule,
    pub case: u8,
    pub data: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalRootReport {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    #[serde(serialize_with = "ser_int")]
    pub q: Int,
    pub places: Vec<LocalRootReport>,
    /// Every prime dividing the discriminant appears among the places.
    pub complete: bool,
    pub w_global: i8,
    pub conditional: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityCertificate {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    pub w_global: i8,
    pub rank_parity: &'static str,
    pub rank_at_least: u32,
    pub conditional: &'static str,
}

fn to_mod(v: &Rat, p: &Int) -> Int {
    (v.numer() * inv_mod(v.denom(), p).expect("integral at p")).mod_floor(p)
}

/// Split test from the reduced equation: the node (r, 0) of y^2 = x^3 + a2 x^2 + a4 x + a6
/// has tangent slopes with square 3r + a2, where r = (9a6 - a2 a4)/(2a2^2 - 6a4).
fn node_slope_symbol(e: &EllCurve, p: &Int) -> Option<i32> {
    if !e.a1.is_zero() || !e.a3.is_zero() {
        return None;
    }
    let (a2, a4, a6) = (to_mod(&e.a2, p), to_mod(&e.a4, p), to_mod(&e.a6, p));
    let num = (int(9) * &a6 - &a2 * &a4).mod_floor(p);
    let den = (int(2) * &a2 * &a2 - int(6) * &a4).mod_floor(p);
    let r = (num * inv_mod(&den, p)?).mod_floor(p);
    legendre(&(int(3) * r + a2), p).ok()
}

fn reduced_model(e: &EllCurve, p: &Int) -> String {
    let show = |c: Int| {
        let h = p / 2u32;
        if c > h {
            c - p
        } else {
            c
        }
    };
    format!(
        "y^2 = x^3 + ({})x^2 + ({})x + ({})",
        show(to_mod(&e.a2, p)),
        show(to_mod(&e.a4, p)),
        show(to_mod(&e.a6, p))
    )
}

/// (-1, u)_2 for a 2-adic unit u.
fn hilbert_minus_one_at_2(u: &Int) -> i8 {
    if u.mod_floor(&int(4)) == int(1) {
        1
    } else {
        -1
    }
}

/// Additive reduction at 2 for y^2 = x(x + A)(x + B): checks the form with d = 1, one of A, B
/// of 2-valuation exactly 2 and the other = 3 mod 4, then applies the c6' rule.
fn root_at_two(e: &EllCurve) -> Result<LocalRootReport, RootError> {
    let two = int(2);
    let fail = |why: &str| RootError::Unclassifiable("2".into(), why.into());
    if !e.a1.is_zero() || !e.a3.is_zero() || !e.a6.is_zero() || !e.is_integral() {
        return Err(fail("not of the form y^2 = x(x + A)(x + B)"));
    }
    let (s, t) = (e.a2.numer().clone(), e.a4.numer().clone());
    let d = &s * &s - int(4) * &t;
    let root = crate::numth::sqrt_exact(&d).ok_or_else(|| fail("x^2 + a2 x + a4 does not split"))?;
    let (ra, rb) = ((&s + &root) / 2u32, (&s - &root) / 2u32);
    let mut data = BTreeMap::new();
    let pick = [(ra.clone(), rb.clone()), (rb, ra)]
        .into_iter()
        .find(|(x, y)| !x.is_zero() && split_power(x, &two).0 == 2 && y.mod_floor(&int(4)) == int(3));
    let Some((ba, bb)) = pick else {
        return Err(fail("valuation and congruence conditions for type I0* not met"));
    };
    data.insert("a".into(), ba.to_string());
    data.insert("bd".into(), bb.to_string());
    data.insert("v2(a)".into(), "2".into());
    data.insert("bd mod 4".into(), "3".into());
    let c6 = e.c6.numer().clone();
    let (v, c6p) = split_power(&c6, &two);
    let c6p = if c6.is_negative() { -c6p.abs() } else { c6p.abs() };
    let m4 = c6p.mod_floor(&int(4)).to_u8().unwrap();
    data.insert("v2(c6)".into(), v.to_string());
    data.insert("c6' mod 4".into(), m4.to_string());
    let w = if m4 == 1 { -1 } else { 1 };
    let hilbert = hilbert_minus_one_at_2(&-&c6p);
    data.insert("(-1,-c6)_2".into(), hilbert.to_string());
    if hilbert != w {
        return Err(fail("Hilbert symbol and c6' rule disagree"));
    }
    let vj = if e.j.is_zero() { i64::MAX } else { crate::numth::rat_valuation(&e.j, &two).unwrap() };
    data.insert("v2(j)".into(), vj.to_string());
    data.insert("potentially_multiplicative".into(), (vj < 0).to_string());
    Ok(LocalRootReport {
        place: Place::Prime(two),
        reduction: "additive, type I0*".into(),
        w,
        rule: RootRule::AdditiveAtTwo,
        case: RootRule::AdditiveAtTwo.case(),
        data,
    })
}

pub fn local_root_number(e: &EllCurve, place: &Place) -> Result<LocalRootReport, RootError> {
    let p = match place {
        Place::Infinity => {
            return Ok(LocalRootReport {
                place: Place::Infinity,
                reduction: "archimedean".into(),
                w: -1,
                rule: RootRule::Archimedean,
                case: 1,
                data: BTreeMap::new(),
            })
        }
        Place::Prime(p) => p,
    };
    if p == &int(2) {
        let disc_odd = e.disc.numer().is_odd();
        if !disc_odd {
            return root_at_two(e);
        }
    }
    let ty = e.reduction_type(p)?;
    let mut data = BTreeMap::new();
    let (w, rule) = match ty {
        ReductionType::Good => (1, RootRule::Good),
        ReductionType::Additive => {
            return Err(RootError::Unclassifiable(p.to_string(), "additive reduction at an odd prime".into()))
        }
        ReductionType::MultSplit | ReductionType::MultNonsplit => {
            let chi = legendre(&-to_mod(&e.c6, p), p).unwrap();
            let slope = node_slope_symbol(e, p)
                .ok_or_else(|| RootError::Unclassifiable(p.to_string(), "no node on the reduced model".into()))?;
            if chi != slope {
                return Err(RootError::SplitMismatch(p.clone(), chi, slope));
            }
            data.insert("(-c6/p)".into(), chi.to_string());
            data.insert("node slope symbol".into(), slope.to_string());
            data.insert("reduced model".into(), reduced_model(e, p));
            if ty == ReductionType::MultSplit {
                (-1, RootRule::Split)
            } else {
                (1, RootRule::NonSplit)
            }
        }
    };
    Ok(LocalRootReport { place: place.clone(), reduction: ty.to_string(), w, rule, case: rule.case(), data })
}

/// Checks a = 3q with q > 3 prime, q = 3 mod 4, and a^2 +- 2 prime; returns q.
pub fn root_hypothesis(a: &Int) -> Result<Int, RootError> {
    let err = |reason: String| RootError::Hypothesis { a: a.clone(), reason };
    if !a.is_positive() || !a.is_multiple_of(&int(3)) {
        return Err(err("a is not 3q".into()));
    }
    let q = a / 3u32;
    if q <= int(3) || !is_prime(&q) {
        return Err(err(format!("q = {q} is not a prime > 3")));
    }
    if q.mod_floor(&int(4)) != int(3) {
        return Err(err(format!("q = {q} is not 3 mod 4")));
    }
    let a2 = a * a;
    for n in [&a2 - 2u32, &a2 + 2u32] {
        if !is_prime(&n) {
            return Err(err(format!("{n} is not prime")));
        }
    }
    Ok(q)
}

pub fn global_root_number(a: &Int) -> Result<GlobalRootReport, RootError> {
    let q = root_hypothesis(a)?;
    let e = e_prime_curve(a)?;
    let a2 = a * a;
    let expected = num_traits::pow(int(2), 8) * a.pow(8u32) * (&a2 - 2u32).pow(2u32) * (&a2 + 2u32).pow(2u32);
    let bad = [int(2), int(3), q.clone(), &a2 - 2u32, &a2 + 2u32];
    let disc = e.disc.numer().abs();
    let mut rest = disc.clone();
    for p in &bad {
        rest = split_power(&rest, p).1;
    }
    if !rest.is_one() {
        return Err(RootError::Incomplete(rest));
    }
    let complete = disc == expected;
    let mut places = vec![local_root_number(&e, &Place::Infinity)?];
    for p in bad {
        places.push(local_root_number(&e, &Place::Prime(p))?);
    }
    let w_global = places.iter().map(|r| r.w).product();
    Ok(GlobalRootReport { a: a.clone(), q, places, complete, w_global, conditional: "parity" })
}

/// Odd rank of E', conditional on the parity conjecture.
pub fn parity_rank_odd(a: &Int) -> Result<ParityCertificate, RootError> {
    let g = global_root_number(a)?;
    if g.w_global != -1 {
        return Err(RootError::EvenParity);
    }
    Ok(ParityCertificate { a: a.clone(), w_global: -1, rank_parity: "odd", rank_at_least: 1, conditional: "parity" })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::primes_up_to;

    #[test]
    fn local_factors() {
        for a in [21i64, 237] {
            let g = global_root_number(&int(a)).unwrap();
            let ws: Vec<i8> = g.places.iter().map(|r| r.w).collect();
            assert_eq!(ws, vec![-1, 1, 1, 1, -1, -1]);
            assert_eq!(g.w_global, -1);
            assert!(g.complete);
            let rules: Vec<u8> = g.places.iter().map(|r| r.case).collect();
            assert_eq!(rules, vec![1, 5, 4, 4, 3, 3]);
            assert_eq!(g.places[1].data["c6' mod 4"], "3");
            assert_eq!(g.places[1].data["potentially_multiplicative"], "false");
        }
    }

    #[test]
    fn reduced_models_at_3_and_q() {
        let e = e_prime_curve(&int(21)).unwrap();
        let r3 = local_root_number(&e, &Place::Prime(int(3))).unwrap();
        assert_eq!(r3.data["reduced model"], "y^2 = x^3 + (-1)x^2 + (0)x + (0)");
        let r7 = local_root_number(&e, &Place::Prime(int(7))).unwrap();
        assert_eq!(r7.data["reduced model"], "y^2 = x^3 + (3)x^2 + (0)x + (0)");
        assert_eq!(r7.data["(-c6/p)"], "-1");
    }

    #[test]
    fn hypothesis_errors() {
        assert!(matches!(global_root_number(&int(15)), Err(RootError::Hypothesis { .. })));
        assert!(matches!(parity_rank_odd(&int(6)), Err(RootError::Hypothesis { .. })));
        assert!(matches!(global_root_number(&int(3)), Err(RootError::Hypothesis { .. })));
        assert_eq!(parity_rank_odd(&int(237)).unwrap().rank_parity, "odd");
    }

    #[test]
    fn symbols_for_small_q() {
        assert_eq!(legendre(&int(2), &int(3)).unwrap(), -1);
        for q in primes_up_to(100).into_iter().filter(|&q| q > 3 && q % 4 == 3) {
            let qb = Int::from(q);
            assert_eq!(legendre(&int(-1), &qb).unwrap(), -1);
            assert_eq!(legendre(&int(-4), &qb).unwrap(), -1);
            let a = int(3) * &qb;
            let e = e_prime_curve(&a).unwrap();
            for p in [int(3), qb.clone()] {
                let r = local_root_number(&e, &Place::Prime(p)).unwrap();
                assert_eq!(r.rule, RootRule::NonSplit, "q = {q}");
            }
        }
    }

    #[test]
    fn node_slope_agrees_with_character() {
        for a in [3i64, 9, 21, 33, 237] {
            let e = e_prime_curve(&int(a)).unwrap();
            for p in [int(a * a - 2), int(a * a + 2)] {
                if is_prime(&p) {
                    let r = local_root_number(&e, &Place::Prime(p)).unwrap();
                    assert_eq!(r.w, -1);
                }
            }
        }
    }

    #[test]
    fn json_shape() {
        let g = global_root_number(&int(21)).unwrap();
        let j = serde_json::to_value(&g).unwrap();
        assert_eq!(j["w_global"], -1);
        assert_eq!(j["places"].as_array().unwrap().len(), 6);
        assert_eq!(j["conditional"], "parity");
    }
}
