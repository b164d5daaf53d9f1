//! Local Kummer images and brute-force local solubility of the 2-covering
//!   b1 z1^2 - b2 z2^2 = e2 t^2,  b1 z1^2 - b1 b2 z3^2 = e3 t^2.

use crate::numth::{legendre, split_power, Int, Rat};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeSet;

/// Square class of a nonzero rational in Q_v^* / Q_v^*2, packed in a small integer.
/// Odd p: (v mod 2, non-residue flag); p = 2: (v mod 2, unit mod 8); infinity: sign.
pub fn local_class(r: &Rat, place: &LocalPlace) -> u8 {
    assert!(!r.is_zero());
    match place {
        LocalPlace::Real => u8::from(r.is_negative()),
        LocalPlace::Prime(p) => {
            let (vn, un) = split_power(r.numer(), p);
            let (vd, ud) = split_power(r.denom(), p);
            let v = ((vn + vd) % 2) as u8;
            let u = un * ud;
            if p == &Int::from(2u32) {
                let m = u.mod_floor(&Int::from(8u32)).to_u8().unwrap();
                (v << 3) | m
            } else {
                let nr = u8::from(legendre(&u, p).unwrap() == -1);
                (v << 1) | nr
            }
        }
    }
}

/// True when r is a nonzero square in Q_v.
pub fn is_local_square(r: &Rat, place: &LocalPlace) -> bool {
    if r.is_zero() {
        return true;
    }
    let c = local_class(r, place);
    match place {
        LocalPlace::Real => c == 0,
        LocalPlace::Prime(p) if p == &Int::from(2u32) => c == 1,
        LocalPlace::Prime(_) => c == 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalPlace {
    Real,
    Prime(#[serde(serialize_with = "crate::serial::ser_int")] Int),
}

impl std::fmt::Display for LocalPlace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LocalPlace::Real => write!(f, "R"),
            LocalPlace::Prime(p) => write!(f, "Q_{p}"),
        }
    }
}

/// Image of E(Q_v) in (Q_v^*/Q_v^*2)^2 under P -> (x - e1, x - e2), for the curve
/// y^2 = x(x - e2)(x - e3).
#[derive(Clone, Debug)]
pub struct LocalImage {
    pub place: LocalPlace,
    pub classes: BTreeSet<(u8, u8)>,
    /// Expected |E(Q_v)/2E(Q_v)|; the image is complete when this many classes are found.
    pub expected: usize,
}

impl LocalImage {
    pub fn complete(&self) -> bool {
        self.classes.len() == self.expected
    }

    pub fn contains(&self, b1: &Rat, b2: &Rat) -> bool {
        self.classes.contains(&(local_class(b1, &self.place), local_class(b2, &self.place)))
    }
}

fn kummer_pair(x: &Rat, e2: &Rat, e3: &Rat) -> (Rat, Rat) {
    if x.is_zero() {
        ((-e3) / (-e2), -e2.clone())
    } else if x == e2 {
        (e2.clone(), (e2 - e3) / e2)
    } else {
        (x.clone(), x - e2)
    }
}

/// Searches x = n p^k for points of E(Q_p) until the expected number of classes appears.
pub fn local_image(e2: &Int, e3: &Int, place: &LocalPlace) -> LocalImage {
    let e2r = Rat::from_integer(e2.clone());
    let e3r = Rat::from_integer(e3.clone());
    let f = |x: &Rat| x * (x - &e2r) * (x - &e3r);
    let mut classes = BTreeSet::new();
    let add = |x: &Rat, classes: &mut BTreeSet<(u8, u8)>| {
        let (u, v) = kummer_pair(x, &e2r, &e3r);
        classes.insert((local_class(&u, place), local_class(&v, place)));
    };
    for t in [Rat::zero(), e2r.clone(), e3r.clone()] {
        add(&t, &mut classes);
    }
    let expected = match place {
        LocalPlace::Real => 2,
        LocalPlace::Prime(p) if p == &Int::from(2u32) => 8,
        LocalPlace::Prime(_) => 4,
    };
    match place {
        LocalPlace::Real => {
            // three real roots: components x >= 0 and e3 <= x <= e2
            let lo = (&e2r + &e3r) / Rat::from_integer(Int::from(2));
            for x in [Rat::one(), lo] {
                if !f(&x).is_negative() {
                    add(&x, &mut classes);
                }
            }
        }
        LocalPlace::Prime(p) => {
            let pr = Rat::from_integer(p.clone());
            'outer: for k in 0..=8i32 {
                for sgn in [1i32, -1] {
                    let pk = crate::poly::pow_rat(&pr, k as usize);
                    let scale = if sgn > 0 { pk } else { pk.recip() };
                    for n in -256i64..=256 {
                        if n == 0 || (k > 0 && sgn < 0 && n % p.to_i64().unwrap_or(i64::MAX) == 0) {
                            continue;
                        }
                        let x = Rat::from_integer(Int::from(n)) * &scale;
                        let y2 = f(&x);
                        if y2.is_zero() || is_local_square(&y2, place) {
                            add(&x, &mut classes);
                            if classes.len() == expected {
                                break 'outer;
                            }
                        }
                    }
                    if k == 0 {
                        break;
                    }
                }
            }
        }
    }
    LocalImage { place: place.clone(), classes, expected }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solubility {
    Soluble,
    Insoluble,
    Unknown,
}

/// Coefficients of the two quadrics in (z1, z2, z3, t).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadrics {
    pub q1: [Int; 4],
    pub q2: [Int; 4],
}

impl Quadrics {
    pub fn torsor(b1: &Int, b2: &Int, e2: &Int, e3: &Int) -> Self {
        Quadrics { q1: [b1.clone(), -b2, Int::zero(), -e2], q2: [b1.clone(), Int::zero(), -(b1 * b2), -e3] }
    }

    fn eval(c: &[Int; 4], v: &[Int; 4]) -> Int {
        (0..4).fold(Int::zero(), |acc, i| acc + &c[i] * &v[i] * &v[i])
    }

    /// Minimal p-valuation over the 2x2 minors of the Jacobian at v; None if all vanish.
    fn jacobian_min_val(&self, v: &[Int; 4], p: &Int) -> Option<u32> {
        let g1: Vec<Int> = (0..4).map(|i| &self.q1[i] * &v[i] * 2u32).collect();
        let g2: Vec<Int> = (0..4).map(|i| &self.q2[i] * &v[i] * 2u32).collect();
        let mut best: Option<u32> = None;
        for i in 0..4 {
            for j in i + 1..4 {
                let m = &g1[i] * &g2[j] - &g1[j] * &g2[i];
                if !m.is_zero() {
                    let v = split_power(&m, p).0;
                    best = Some(best.map_or(v, |b: u32| b.min(v)));
                }
            }
        }
        best
    }
}

fn val_or(n: &Int, p: &Int, cap: u32) -> u32 {
    if n.is_zero() {
        cap
    } else {
        split_power(n, p).0.min(cap)
    }
}

/// Exhaustive search for a Q_p-point on the intersection of two diagonal quadrics in P^3.
/// Each chart fixes the first unit coordinate to 1, with earlier coordinates divisible by p.
/// A residue class mod p^k is certified soluble by the Hensel criterion v(Q_i) >= 2 mu + 1,
/// mu the least valuation of a 2x2 Jacobian minor; the system is insoluble when every
/// branch dies before `max_lift`.
pub fn local_solubility(q: &Quadrics, p: &Int, max_lift: u32) -> Solubility {
    let mut unknown = false;
    for chart in 0..4 {
        match chart_search(q, p, chart, max_lift) {
            Solubility::Soluble => return Solubility::Soluble,
            Solubility::Unknown => unknown = true,
            Solubility::Insoluble => {}
        }
    }
    if unknown {
        Solubility::Unknown
    } else {
        Solubility::Insoluble
    }
}

fn chart_search(q: &Quadrics, p: &Int, chart: usize, max_lift: u32) -> Solubility {
    let pu = p.to_u64().expect("small prime");
    let free: Vec<usize> = (0..4).filter(|&i| i != chart).collect();
    // level 1: residues mod p with coordinates before the chart index divisible by p
    let mut level: Vec<[Int; 4]> = vec![];
    let mut start = [Int::zero(), Int::zero(), Int::zero(), Int::zero()];
    start[chart] = Int::one();
    let ranges: Vec<u64> = free.iter().map(|&i| if i < chart { 1 } else { pu }).collect();
    for a in 0..ranges[0] {
        for b in 0..ranges[1] {
            for c in 0..ranges[2] {
                let mut v = start.clone();
                v[free[0]] = Int::from(a);
                v[free[1]] = Int::from(b);
                v[free[2]] = Int::from(c);
                level.push(v);
            }
        }
    }
    let mut modulus = p.clone();
    for k in 1..=max_lift {
        let mut survivors = vec![];
        for v in level {
            let r1 = Quadrics::eval(&q.q1, &v);
            let r2 = Quadrics::eval(&q.q2, &v);
            if !r1.is_multiple_of(&modulus) || !r2.is_multiple_of(&modulus) {
                continue;
            }
            if let Some(mu) = q.jacobian_min_val(&v, p) {
                let need = 2 * mu + 1;
                if val_or(&r1, p, need) >= need && val_or(&r2, p, need) >= need {
                    return Solubility::Soluble;
                }
            }
            survivors.push(v);
        }
        if survivors.is_empty() {
            return Solubility::Insoluble;
        }
        if k == max_lift {
            break;
        }
        let mut next = vec![];
        for v in &survivors {
            for a in 0..pu {
                for b in 0..pu {
                    for c in 0..pu {
                        let mut w = v.clone();
                        w[free[0]] += &modulus * a;
                        w[free[1]] += &modulus * b;
                        w[free[2]] += &modulus * c;
                        next.push(w);
                    }
                }
            }
        }
        level = next;
        modulus *= p;
    }
    Solubility::Unknown
}

/// Real points exist iff some U = z1^2 >= 0 makes (b1 U - e2)/b2 and (b1 U - e3)/(b1 b2)
/// both nonnegative. The feasible set is cut out by two linear sign conditions, so it is
/// enough to test the breakpoints, the midpoints between them and one point beyond.
pub fn real_soluble(b1: &Int, b2: &Int, e2: &Int, e3: &Int) -> bool {
    let (b1, b2) = (Rat::from_integer(b1.clone()), Rat::from_integer(b2.clone()));
    let (e2, e3) = (Rat::from_integer(e2.clone()), Rat::from_integer(e3.clone()));
    let mut pts = vec![Rat::zero(), &e2 / &b1, &e3 / &b1];
    pts.retain(|u| !u.is_negative());
    pts.sort();
    let mut cand = pts.clone();
    for w in pts.windows(2) {
        cand.push((&w[0] + &w[1]) / Rat::from_integer(Int::from(2)));
    }
    cand.push(pts.last().unwrap() + Rat::one());
    cand.iter().any(|u| {
        let s2 = (&b1 * u - &e2) / &b2;
        let s3 = (&b1 * u - &e3) / (&b1 * &b2);
        !s2.is_negative() && !s3.is_negative()
    })
}
