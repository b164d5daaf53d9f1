//! The family C_a: y^2 = x^8 + (4-4a^4)x^6 + (8a^4+6)x^4 + (4-4a^4)x^2 + 1 with its two
//! maps to E_a: y^2 = x^3 + 2a^2x^2 + (a^4-4)x, the companion curve E', and the involution tau.

use crate::ecq::{rat_mod, CurveModP, EPoint, EcError, EllCurve, PointModP};
use crate::numth::{self, int, rat_int, Int, Rat};
use crate::poly::{
    bezout_cofactors, identity_check_in_a, samples_needed, FnField, FnFieldElem, HomForm, ParamPoly, PolyError, PolyQ,
    RatFnA, RatFunc,
};
use crate::serial::ser_int;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("parameter a must be a positive integer, got {0}")]
    BadParameter(Int),
    #[error("identity `{0}` failed")]
    IdentityFailed(String),
    #[error("point {0} is not on C_a")]
    NotOnCurve(CPoint),
    #[error("image {0} of a curve point is not on E_a")]
    ImageNotOnCurve(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Ec(#[from] EcError),
}

/// f(x) for parameter a, ascending coefficients.
pub fn family_f(a: &Int) -> PolyQ {
    let a4 = a.pow(4u32);
    let c = [
        Int::one(),
        Int::zero(),
        int(4) - int(4) * &a4,
        Int::zero(),
        int(8) * &a4 + 6u32,
        Int::zero(),
        int(4) - int(4) * &a4,
        Int::zero(),
        Int::one(),
    ];
    PolyQ::from_bigints(&c)
}

/// The genus-3 curve y^2 = f(x).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypCurve {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    pub f: PolyQ,
}

impl HypCurve {
    pub fn new(a: &Int) -> Self {
        HypCurve { a: a.clone(), f: family_f(a) }
    }

    pub fn genus(&self) -> usize {
        (self.f.deg0() - 1) / 2
    }

    /// Integer coefficients of f, ascending.
    pub fn int_coeffs(&self) -> Vec<Int> {
        (0..=self.f.deg0()).map(|i| self.f.coeff(i).to_integer()).collect()
    }

    /// F(X, Z) = Z^8 f(X/Z).
    pub fn form(&self) -> HomForm {
        HomForm::new(8, self.f.clone()).expect("degree 8")
    }

    pub fn is_on(&self, p: &CPoint) -> bool {
        Rat::from_integer(&p.y * &p.y) == self.form().eval_int(&p.x, &p.z)
    }

    /// Points with the given x-coordinate.
    pub fn points_at_x(&self, x: &Rat) -> Vec<CPoint> {
        let v = self.f.eval(x);
        match numth::rat_sqrt(&v) {
            None => vec![],
            Some(s) if s.is_zero() => vec![CPoint::from_affine(x, &s)],
            Some(s) => vec![CPoint::from_affine(x, &s), CPoint::from_affine(x, &-s)],
        }
    }

    pub fn points_at_infinity(&self) -> [CPoint; 2] {
        [CPoint::new(int(1), int(1), int(0)), CPoint::new(int(1), int(-1), int(0))]
    }

    /// (+-1, +-4), (0, +-1) and the two points at infinity, which lie on C_a for every a.
    pub fn universal_points(&self) -> Vec<CPoint> {
        let mut v = vec![];
        for (x, y) in [(1, 4), (1, -4), (-1, 4), (-1, -4), (0, 1), (0, -1)] {
            v.push(CPoint::new(int(x), int(y), int(1)));
        }
        v.extend(self.points_at_infinity());
        v.sort();
        v
    }
}

/// Point (X : Y : Z) of C_a in weighted projective coordinates, Y of weight 4.
/// Normalized: gcd(X, Z) = 1 and Z > 0, or (1 : Y : 0) at infinity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CPoint {
    #[serde(serialize_with = "ser_int")]
    pub x: Int,
    #[serde(serialize_with = "ser_int")]
    pub y: Int,
    #[serde(serialize_with = "ser_int")]
    pub z: Int,
}

impl CPoint {
    /// Normalizes; panics if (x, z) = (0, 0) or gcd(x, z)^4 does not divide y.
    pub fn new(x: Int, y: Int, z: Int) -> Self {
        let g = x.gcd(&z);
        assert!(!g.is_zero(), "X and Z both zero");
        let g4 = g.pow(4u32);
        assert!(y.is_multiple_of(&g4), "not a weighted projective point");
        let (mut x, y, mut z) = (x / &g, y / g4, z / &g);
        if z.is_negative() || (z.is_zero() && x.is_negative()) {
            x = -x;
            z = -z;
        }
        CPoint { x, y, z }
    }

    pub fn from_affine(x: &Rat, y: &Rat) -> Self {
        let d = x.denom().clone();
        let yy = y * Rat::from_integer(d.pow(4u32));
        assert!(yy.is_integer(), "y has a denominator beyond den(x)^4");
        CPoint::new(x.numer().clone(), yy.to_integer(), d)
    }

    pub fn is_infinite(&self) -> bool {
        self.z.is_zero()
    }

    pub fn affine(&self) -> Option<(Rat, Rat)> {
        if self.z.is_zero() {
            return None;
        }
        Some((Rat::new(self.x.clone(), self.z.clone()), Rat::new(self.y.clone(), self.z.pow(4u32))))
    }

    /// H(P) = max(|X|, |Z|).
    pub fn height(&self) -> Int {
        self.x.abs().max(self.z.abs())
    }

    pub fn neg_x(&self) -> CPoint {
        CPoint::new(-&self.x, self.y.clone(), self.z.clone())
    }

    pub fn neg_y(&self) -> CPoint {
        CPoint::new(self.x.clone(), -&self.y, self.z.clone())
    }

    /// tau: (X : Y : Z) -> (Z : Y : -X).
    pub fn tau(&self) -> CPoint {
        CPoint::new(self.z.clone(), self.y.clone(), -&self.x)
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} : {} : {})", self.x, self.y, self.z)
    }
}

/// A map C_a -> E given by a projective triple [xu + xv Y : yu + yv Y : den]
/// in the source coordinates (X, Z), each entry of total weight 6.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveMap {
    pub name: String,
    pub xu: HomForm,
    pub xv: HomForm,
    pub yu: HomForm,
    pub yv: HomForm,
    pub den: HomForm,
}

fn form6(c: &[(usize, Int)]) -> HomForm {
    let terms: Vec<(usize, Rat)> = c.iter().map(|(i, v)| (*i, Rat::from_integer(v.clone()))).collect();
    HomForm::from_terms(6, &terms).unwrap()
}

fn form2(c: &[(usize, Int)]) -> HomForm {
    let terms: Vec<(usize, Rat)> = c.iter().map(|(i, v)| (*i, Rat::from_integer(v.clone()))).collect();
    HomForm::from_terms(2, &terms).unwrap()
}

impl CurveMap {
    pub fn phi1(a: &Int) -> Self {
        let a2 = a * a;
        let a3 = &a2 * a;
        CurveMap {
            name: "phi1".into(),
            xu: form6(&[(6, -&a2), (4, int(5) * &a2), (2, int(5) * &a2), (0, -&a2)]),
            xv: form2(&[(2, int(-2)), (0, int(-2))]),
            yu: form6(&[(5, int(4) * &a3), (3, int(-24) * &a3), (1, int(4) * &a3)]),
            yv: form2(&[(1, int(8) * a)]),
            den: form6(&[(6, int(1)), (4, int(3)), (2, int(3)), (0, int(1))]),
        }
    }

    pub fn phi2(a: &Int) -> Self {
        let a2 = a * a;
        let a3 = &a2 * a;
        CurveMap {
            name: "phi2".into(),
            xu: form6(&[(6, a2.clone()), (4, int(-5) * &a2), (2, int(-5) * &a2), (0, a2.clone())]),
            xv: form2(&[(2, int(-2)), (0, int(-2))]),
            yu: form6(&[(6, int(-2) * &a3), (4, int(14) * &a3), (2, int(-14) * &a3), (0, int(2) * &a3)]),
            yv: form2(&[(2, int(4) * a), (0, int(-4) * a)]),
            den: form6(&[(6, int(1)), (4, int(3)), (2, int(3)), (0, int(1))]),
        }
    }

    /// Image of a curve point; the denominator (X^2 + Z^2)^3 never vanishes over Q.
    pub fn apply(&self, p: &CPoint) -> EPoint {
        let yv = Rat::from_integer(p.y.clone());
        let d = self.den.eval_int(&p.x, &p.z);
        let xn = self.xu.eval_int(&p.x, &p.z) + self.xv.eval_int(&p.x, &p.z) * &yv;
        let yn = self.yu.eval_int(&p.x, &p.z) + self.yv.eval_int(&p.x, &p.z) * &yv;
        EPoint::Aff(xn / &d, yn / d)
    }

    /// Coordinates as elements of Q(x)[y]/(y^2 - f).
    pub fn coords(&self, field: &FnField) -> (FnFieldElem, FnFieldElem) {
        let den = RatFunc::poly(self.den.dehomogenize().clone()).inv().unwrap();
        let to = |u: &HomForm, v: &HomForm| field.elem(den.mul_poly(u.dehomogenize()), den.mul_poly(v.dehomogenize()));
        (to(&self.xu, &self.xv), to(&self.yu, &self.yv))
    }

    /// Reduction mod p with exact denominators checked; None where the map is not
    /// evaluable by this triple.
    fn modp(&self, p: u64) -> Option<MapModP> {
        Some(MapModP {
            p,
            xu: FormModP::new(&self.xu, p)?,
            xv: FormModP::new(&self.xv, p)?,
            yu: FormModP::new(&self.yu, p)?,
            yv: FormModP::new(&self.yv, p)?,
            den: FormModP::new(&self.den, p)?,
        })
    }

    /// Polynomial whose rational roots are the x-coordinates of affine points with
    /// x-image t, together with y as a rational function of x on that locus:
    /// xu(x) + xv(x) y = t den(x), so y = (t den - xu) / xv.
    pub fn x_fiber(&self, t: &Rat, f: &PolyQ) -> (PolyQ, PolyQ, PolyQ) {
        let num = &self.den.dehomogenize().scale(t) - self.xu.dehomogenize();
        let v = self.xv.dehomogenize().clone();
        let cond = &(&num * &num) - &(&(&v * &v) * f);
        (cond, num, v)
    }
}

struct FormModP {
    d: usize,
    c: Vec<u64>,
}

impl FormModP {
    fn new(h: &HomForm, p: u64) -> Option<Self> {
        let c = (0..=h.degree()).map(|i| rat_mod(&h.coeff(i), p)).collect::<Option<Vec<_>>>()?;
        Some(FormModP { d: h.degree(), c })
    }

    fn eval(&self, x: u64, z: u64, p: u64) -> u64 {
        let mut acc = 0u64;
        for i in 0..=self.d {
            let t = numth::mul_mod_u64(
                numth::pow_mod_u64(x, i as u64, p),
                numth::pow_mod_u64(z, (self.d - i) as u64, p),
                p,
            );
            acc = (acc + numth::mul_mod_u64(self.c[i], t, p)) % p;
        }
        acc
    }
}

struct MapModP {
    p: u64,
    xu: FormModP,
    xv: FormModP,
    yu: FormModP,
    yv: FormModP,
    den: FormModP,
}

impl MapModP {
    fn apply(&self, x: u64, y: u64, z: u64) -> Option<PointModP> {
        let p = self.p;
        let d = self.den.eval(x, z, p);
        let di = numth::inv_mod_u64(d, p)?;
        let m = |a: u64, b: u64| numth::mul_mod_u64(a, b, p);
        let xi = m((self.xu.eval(x, z, p) + m(self.xv.eval(x, z, p), y)) % p, di);
        let yi = m((self.yu.eval(x, z, p) + m(self.yv.eval(x, z, p), y)) % p, di);
        Some(Some((xi, yi)))
    }
}

/// Everything attached to one parameter a.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyBundle {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    pub c: HypCurve,
    /// The quartic g(u) = u^4 - a^2 u^2 + 1 of H_a: w^2 = g(u).
    pub h_quartic: PolyQ,
    pub e_a: EllCurve,
    pub e_prime: EllCurve,
    pub phi1: CurveMap,
    pub phi2: CurveMap,
    /// a = 1: the point (-a^2, 2a) is torsion there.
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapChoice {
    Phi1,
    Phi2,
    Sum,
    Difference,
}

pub fn e_a_curve(a: &Int) -> Result<EllCurve, EcError> {
    let a2 = a * a;
    EllCurve::short(int(2) * &a2, &a2 * &a2 - 4u32, Int::zero())
}

pub fn e_prime_curve(a: &Int) -> Result<EllCurve, EcError> {
    let a4 = a.pow(4u32);
    EllCurve::short(int(-4) - &a4, int(4) * &a4, Int::zero())
}

pub fn build_family(a: &Int) -> Result<FamilyBundle, FamilyError> {
    if !a.is_positive() {
        return Err(FamilyError::BadParameter(a.clone()));
    }
    let a2 = Rat::from_integer(a * a);
    let h_quartic = PolyQ::new(vec![Rat::one(), Rat::zero(), -a2, Rat::zero(), Rat::one()]);
    let b = FamilyBundle {
        a: a.clone(),
        c: HypCurve::new(a),
        h_quartic,
        e_a: e_a_curve(a)?,
        e_prime: e_prime_curve(a)?,
        phi1: CurveMap::phi1(a),
        phi2: CurveMap::phi2(a),
        degenerate: a.is_one(),
    };
    if b.g_of_z_identity() != *b.c.f() {
        return Err(FamilyError::IdentityFailed("g(z(x))(x^2+1)^4 = f(x)".into()));
    }
    Ok(b)
}

impl HypCurve {
    pub fn f(&self) -> &PolyQ {
        &self.f
    }
}

impl FamilyBundle {
    pub fn map(&self, which: MapChoice) -> &CurveMap {
        match which {
            MapChoice::Phi2 => &self.phi2,
            _ => &self.phi1,
        }
    }

    fn q(&self) -> PolyQ {
        PolyQ::from_ints(&[1, 0, 1])
    }

    /// z(x)(x^2+1) = -2ax.
    fn z_num(&self) -> PolyQ {
        PolyQ::from_bigints(&[Int::zero(), int(-2) * &self.a])
    }

    /// w(x)(x^2+1) = -a(x^2-1).
    fn w_num(&self) -> PolyQ {
        PolyQ::from_bigints(&[self.a.clone(), Int::zero(), -&self.a])
    }

    /// g(z(x)) (x^2+1)^4 computed from the quartic.
    fn g_of_z_identity(&self) -> PolyQ {
        let z = self.z_num();
        let q = self.q();
        let g = &self.h_quartic;
        (0..=4).fold(PolyQ::zero(), |acc, i| acc + (&z.pow(i as u32) * &q.pow(4 - i as u32)).scale(&g.coeff(i)))
    }

    pub fn on_curve(&self, p: &CPoint) -> Result<(), FamilyError> {
        if self.c.is_on(p) {
            Ok(())
        } else {
            Err(FamilyError::NotOnCurve(p.clone()))
        }
    }

    /// phi_i(P), checked to lie on E_a.
    pub fn apply_map(&self, which: MapChoice, p: &CPoint) -> Result<EPoint, FamilyError> {
        self.on_curve(p)?;
        let img = match which {
            MapChoice::Phi1 | MapChoice::Phi2 => self.map(which).apply(p),
            MapChoice::Sum => self.e_a.add(&self.phi1.apply(p), &self.phi2.apply(p)),
            MapChoice::Difference => self.e_a.sub(&self.phi1.apply(p), &self.phi2.apply(p)),
        };
        if !self.e_a.is_on(&img) {
            return Err(FamilyError::ImageNotOnCurve(img.to_string()));
        }
        Ok(img)
    }

    pub fn p0(&self) -> EPoint {
        EPoint::Aff(Rat::from_integer(-(&self.a * &self.a)), Rat::from_integer(int(2) * &self.a))
    }

    /// Roots e1 = 0, e2 = -a^2+2, e3 = -a^2-2.
    pub fn e_roots(&self) -> [Int; 3] {
        let a2 = &self.a * &self.a;
        [Int::zero(), int(2) - &a2, int(-2) - a2]
    }

    pub fn function_field(&self) -> FnField {
        FnField::new(self.c.f.clone()).expect("f squarefree")
    }

    /// phi1 + s phi2 over the function field by the chord formula. The chord is
    /// valid away from the zeros of `exceptional`, where x(phi1) = x(phi2).
    pub fn composite_map(&self, sign: i8) -> CompositeMap {
        let field = self.function_field();
        composite_of(&self.e_a, &field, &self.phi1, &self.phi2, sign)
    }

    /// C_a -> H_a -> E_a through (u, w) -> (2u^2 - 2w - a^2, 4u^3 - 4uw - 2a^2 u), as coordinates
    /// over the function field of C_a; `second` uses w(x) in place of z(x).
    pub fn via_quartic(&self, second: bool) -> (FnFieldElem, FnFieldElem) {
        let field = self.function_field();
        let q = self.q();
        let qi = RatFunc::poly(q.clone()).inv().unwrap();
        let un = if second { self.w_num() } else { self.z_num() };
        let u = field.elem(qi.mul_poly(&un), RatFunc::zero());
        let q2i = RatFunc::poly(q.pow(2)).inv().unwrap();
        let w = field.elem(RatFunc::zero(), q2i);
        let a2 = field.constant(Rat::from_integer(&self.a * &self.a));
        let two = field.constant(rat_int(2));
        let four = field.constant(rat_int(4));
        let x = two.mul(&u.mul(&u)).sub(&two.mul(&w)).sub(&a2);
        let y = four.mul(&u.mul(&u).mul(&u)).sub(&four.mul(&u).mul(&w)).sub(&two.mul(&a2).mul(&u));
        (x, y)
    }
}

/// Sum or difference of two maps to an elliptic curve with a1 = a3 = 0.
#[derive(Clone, Debug)]
pub struct CompositeMap {
    pub sign: i8,
    pub x: FnFieldElem,
    pub y: FnFieldElem,
    /// Numerator of the norm of x(phi1) - x(phi2).
    pub exceptional: PolyQ,
}

impl CompositeMap {
    /// Value at an affine point, None at poles of the representation.
    pub fn eval(&self, x: &Rat, y: &Rat) -> Option<EPoint> {
        Some(EPoint::Aff(self.x.eval(x, y)?, self.y.eval(x, y)?))
    }
}

pub fn composite_of(e: &EllCurve, field: &FnField, m1: &CurveMap, m2: &CurveMap, sign: i8) -> CompositeMap {
    let (x1, y1) = m1.coords(field);
    let (x2, mut y2) = m2.coords(field);
    if sign < 0 {
        y2 = y2.neg();
    }
    let dx = x2.sub(&x1);
    let exceptional = dx.norm().num().clone();
    let a2 = field.constant(e.a2.clone());
    if dx.is_zero() {
        // same x-coordinate everywhere: either the zero map or doubling
        let sy = y1.add(&y2);
        if sy.is_zero() {
            let zero = field.constant(Rat::zero());
            return CompositeMap { sign, x: zero.clone(), y: zero, exceptional: PolyQ::zero() };
        }
        let three = field.constant(rat_int(3));
        let two = field.constant(rat_int(2));
        let a4 = field.constant(e.a4.clone());
        let num = three.mul(&x1).mul(&x1).add(&two.mul(&a2).mul(&x1)).add(&a4);
        let lambda = num.div(&two.mul(&y1)).unwrap();
        let x3 = lambda.mul(&lambda).sub(&a2).sub(&x1).sub(&x1);
        let y3 = lambda.mul(&x1.sub(&x3)).sub(&y1);
        return CompositeMap { sign, x: x3, y: y3, exceptional: PolyQ::zero() };
    }
    let lambda = y2.sub(&y1).div(&dx).unwrap();
    let x3 = lambda.mul(&lambda).sub(&a2).sub(&x1).sub(&x2);
    let y3 = lambda.mul(&x1.sub(&x3)).sub(&y1);
    CompositeMap { sign, x: x3, y: y3, exceptional }
}

/// Fiber statistics of a map C_a -> E_a over one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeFibers {
    pub p: u64,
    pub source_points: usize,
    pub targets: usize,
    pub max_fiber: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeEstimate {
    pub degree: u32,
    pub degenerate: bool,
    pub primes: Vec<PrimeFibers>,
}

/// Default fiber-count primes for a: primes from 11 up avoiding 2a(a^2-2)(a^2+2).
pub fn fiber_primes(a: &Int, count: usize) -> Vec<u64> {
    let a2 = a * a;
    let bad: Int = int(2) * a * (&a2 - 2u32) * (&a2 + 2u32);
    numth::primes_up_to(2000)
        .into_iter()
        .filter(|&p| p >= 11 && !bad.is_multiple_of(&Int::from(p)))
        .take(count)
        .collect()
}

/// Lower bound for the degree of a map: largest fiber over C_a(F_p), maximized over primes.
/// Primes where no point could be mapped are skipped. A map hitting a single target
/// everywhere is reported as degree 0 with the degeneracy flag.
pub fn estimate_degree<F>(b: &FamilyBundle, primes: &[u64], map: F) -> DegreeEstimate
where
    F: Fn(&CurveModP, u64, u64, u64) -> Option<PointModP>,
{
    let f = b.c.int_coeffs();
    let mut out = vec![];
    let mut all_constant = true;
    for &p in primes {
        let Ok(em) = b.e_a.reduce_mod(p) else { continue };
        let pb = Int::from(p);
        let fc: Vec<u64> = f.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect();
        let mut hist: BTreeMap<PointModP, u32> = BTreeMap::new();
        let mut n = 0;
        let mut push = |img: Option<PointModP>| {
            if let Some(t) = img {
                *hist.entry(t).or_insert(0) += 1;
                n += 1;
            }
        };
        for x in 0..p {
            if (numth::mul_mod_u64(x, x, p) + 1).is_multiple_of(p) {
                continue;
            }
            let v = fc.iter().rev().fold(0u64, |acc, &c| (numth::mul_mod_u64(acc, x, p) + c) % p);
            if v == 0 {
                push(map(&em, x, 0, 1));
            } else if let Some(s) = numth::sqrt_mod_u64(v, p) {
                push(map(&em, x, s, 1));
                push(map(&em, x, p - s, 1));
            }
        }
        push(map(&em, 1, 1, 0));
        push(map(&em, 1, p - 1, 0));
        if hist.is_empty() {
            continue;
        }
        if hist.len() > 1 {
            all_constant = false;
        }
        out.push(PrimeFibers { p, source_points: n, targets: hist.len(), max_fiber: *hist.values().max().unwrap() });
    }
    let degenerate = all_constant && !out.is_empty();
    let degree = if degenerate { 0 } else { out.iter().map(|r| r.max_fiber).max().unwrap_or(0) };
    DegreeEstimate { degree, degenerate, primes: out }
}

/// Degree estimate for phi1, phi2, phi1 + phi2 or phi1 - phi2.
pub fn estimate_map_degree(b: &FamilyBundle, which: MapChoice, primes: &[u64]) -> DegreeEstimate {
    let maps: BTreeMap<u64, (MapModP, MapModP)> =
        primes.iter().filter_map(|&p| Some((p, (b.phi1.modp(p)?, b.phi2.modp(p)?)))).collect();
    estimate_degree(b, primes, |em, x, y, z| {
        let (m1, m2) = maps.get(&em.p)?;
        match which {
            MapChoice::Phi1 => m1.apply(x, y, z),
            MapChoice::Phi2 => m2.apply(x, y, z),
            MapChoice::Sum => Some(em.add(m1.apply(x, y, z)?, m2.apply(x, y, z)?)),
            MapChoice::Difference => Some(em.add(m1.apply(x, y, z)?, em.neg(m2.apply(x, y, z)?))),
        }
    })
}

/// The pairing matrix <f_i, f_j> from degrees: diagonal d(f_i), off-diagonal
/// (d(f1 + f2) - d(f1) - d(f2)) / 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CasselsMatrix {
    #[serde(serialize_with = "ser_rat_matrix")]
    pub m: [[Rat; 2]; 2],
    #[serde(serialize_with = "crate::serial::ser_rat")]
    pub det: Rat,
    pub independent: bool,
}

fn ser_rat_matrix<S: serde::Serializer>(m: &[[Rat; 2]; 2], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(numth::rat_string).collect()).collect();
    rows.serialize(s)
}

pub fn cassels_matrix(d1: u32, d2: u32, d12: u32) -> CasselsMatrix {
    let off = Rat::new(Int::from(d12) - d1 - d2, int(2));
    let m = [[rat_int(d1 as i64), off.clone()], [off, rat_int(d2 as i64)]];
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    CasselsMatrix { independent: !det.is_zero(), m, det }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    pub degenerate: bool,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// First failing identity as an error.
    pub fn require(&self) -> Result<(), FamilyError> {
        match self.checks.iter().find(|c| !c.passed) {
            Some(c) => Err(FamilyError::IdentityFailed(c.name.clone())),
            None => Ok(()),
        }
    }
}

fn on_e_symbolic(e: &EllCurve, x: &FnFieldElem, y: &FnFieldElem) -> bool {
    let f = x.field();
    let c = |r: &Rat| f.constant(r.clone());
    let rhs = x.mul(x).mul(x).add(&c(&e.a2).mul(x).mul(x)).add(&c(&e.a4).mul(x)).add(&c(&e.a6));
    y.mul(y).sub(&rhs).is_zero()
}

/// Exact checks for a fixed a: the circle and g(z) identities, squarefree f, both maps
/// landing on E_a over the function field, agreement of the maps with the quartic
/// model route, and tau preserving C_a.
pub fn verify_construction_identities(b: &FamilyBundle) -> IdentityReport {
    let mut checks = vec![];
    let mut check = |name: &str, passed: bool| checks.push(IdentityCheck { name: name.into(), passed });
    let q = b.q();
    let a2 = Rat::from_integer(&b.a * &b.a);
    let zw = &b.z_num().pow(2) + &b.w_num().pow(2);
    check("z(x)^2 + w(x)^2 = a^2", zw == q.pow(2).scale(&a2));
    check("g(z(x))(x^2+1)^4 = f(x)", b.g_of_z_identity() == *b.c.f());
    let sqf = b.c.f().is_squarefree();
    check("f squarefree", sqf);
    if !sqf {
        return IdentityReport { a: b.a.clone(), degenerate: b.degenerate, checks };
    }
    let field = b.function_field();
    for (name, m, second) in [("phi1", &b.phi1, false), ("phi2", &b.phi2, true)] {
        let (x, y) = m.coords(&field);
        check(&format!("{name} lands on E_a"), on_e_symbolic(&b.e_a, &x, &y));
        let (hx, hy) = b.via_quartic(second);
        check(&format!("{name} = H_a iso after psi"), hx == x && hy == y);
    }
    let tau_ok = b.c.universal_points().iter().all(|p| {
        let t = p.tau();
        b.c.is_on(&t) && t.tau() == *p
    }) && {
        // F(Z, -X) = F(X, Z) as forms
        let f = b.c.form();
        let sw = f.swap();
        (0..=8).all(|i| {
            let s = if i % 2 == 0 { 1 } else { -1 };
            sw.coeff(i) * rat_int(s) == f.coeff(i)
        })
    };
    check("tau preserves C_a and is an involution", tau_ok);
    let pts_ok =
        b.c.universal_points()
            .iter()
            .all(|p| [MapChoice::Phi1, MapChoice::Phi2].iter().all(|&w| b.apply_map(w, p).is_ok()));
    check("universal points map onto E_a", pts_ok);
    IdentityReport { a: b.a.clone(), degenerate: b.degenerate, checks }
}

fn ra(num: &[i64], den: &[i64]) -> RatFnA {
    RatFnA::new(PolyQ::from_ints(num), PolyQ::from_ints(den))
}

/// A named identity lhs = rhs in Q(a)[x].
pub struct ParamIdentity {
    pub name: &'static str,
    pub lhs: ParamPoly,
    pub rhs: ParamPoly,
}

fn pp(terms: &[(usize, RatFnA)]) -> ParamPoly {
    let n = terms.iter().map(|t| t.0 + 1).max().unwrap_or(0);
    let mut c = vec![RatFnA::zero(); n];
    for (i, v) in terms {
        c[*i] = v.clone();
    }
    ParamPoly::new(c)
}

/// The bivariate quartics of the height lemmas, dehomogenized at Z = 1, as
/// (F1, G, F2): x(phi_i) is bounded below by F_i / G.
pub fn lemma_forms() -> (ParamPoly, ParamPoly, ParamPoly) {
    let one = || ra(&[1], &[1]);
    let f1 = pp(&[(4, ra(&[-2, 0, -1], &[1])), (2, ra(&[-6], &[1])), (0, ra(&[-2, 0, -1], &[1]))]);
    let g = pp(&[(4, one()), (2, ra(&[2], &[1])), (0, one())]);
    let f2 = pp(&[(4, ra(&[-2, 0, 1], &[1])), (2, ra(&[-6, 0, -12], &[1])), (0, ra(&[-2, 0, 1], &[1]))]);
    (f1, g, f2)
}

/// Every identity certified in Q(a)[x]: the g(z) construction, the circle, and the
/// four Bezout identities of the height lemmas (each at Z = 1; the X^8 forms become x^8).
pub fn param_identities() -> Vec<ParamIdentity> {
    let q = ParamPoly::from_int_terms(&[(0, &[1]), (2, &[1])]);
    let z = ParamPoly::from_int_terms(&[(1, &[0, -2])]);
    let w = ParamPoly::from_int_terms(&[(0, &[0, 1]), (2, &[0, -1])]);
    let a2 = ParamPoly::from_int_terms(&[(0, &[0, 0, 1])]);
    let g_z = &(&z.pow(4) - &(&a2 * &(&z.pow(2) * &q.pow(2)))) + &q.pow(4);
    let f = ParamPoly::from_int_terms(&[
        (8, &[1]),
        (6, &[4, 0, 0, 0, -4]),
        (4, &[6, 0, 0, 0, 8]),
        (2, &[4, 0, 0, 0, -4]),
        (0, &[1]),
    ]);
    let (big_f1, g, big_f2) = lemma_forms();
    // denominators 2(a^2-1), a^2-1, 14a^2+2, 7a^2+1, 7a^2+1 (from a^2 + 1/7)
    let f1 = pp(&[(2, ra(&[-1], &[-2, 0, 2])), (0, ra(&[-1], &[-1, 0, 1]))]);
    let g1 = pp(&[(2, ra(&[-2, 0, -1], &[-2, 0, 2])), (0, ra(&[-3], &[-1, 0, 1]))]);
    let f2 = pp(&[(2, ra(&[-1], &[-2, 0, 2])), (4, ra(&[-1], &[-1, 0, 1]))]);
    let g2 = pp(&[(2, ra(&[-2, 0, -1], &[-2, 0, 2])), (4, ra(&[-3], &[-1, 0, 1]))]);
    let h1 = pp(&[(2, ra(&[1], &[2, 0, 14])), (0, ra(&[1], &[1, 0, 7]))]);
    let i1 = pp(&[(2, ra(&[2, 0, -1], &[2, 0, 14])), (0, ra(&[3, 0, 6], &[1, 0, 7]))]);
    let h2 = pp(&[(2, ra(&[1], &[2, 0, 14])), (4, ra(&[1], &[1, 0, 7]))]);
    let i2 = pp(&[(2, ra(&[2, 0, -1], &[2, 0, 14])), (4, ra(&[3, 0, 6], &[1, 0, 7]))]);
    let one = ParamPoly::from_int_terms(&[(0, &[1])]);
    let x8 = ParamPoly::x_pow(8);
    let comb = |a: &ParamPoly, b: &ParamPoly, c: &ParamPoly, d: &ParamPoly| &(a * b) + &(c * d);
    vec![
        ParamIdentity { name: "g(z(x))(x^2+1)^4 = f(x)", lhs: g_z, rhs: f },
        ParamIdentity { name: "z^2 + w^2 = a^2", lhs: &z.pow(2) + &w.pow(2), rhs: &a2 * &q.pow(2) },
        ParamIdentity { name: "F1 f1 + G1 g1 = Z^8", lhs: comb(&big_f1, &f1, &g, &g1), rhs: one.clone() },
        ParamIdentity { name: "F1 f2 + G1 g2 = X^8", lhs: comb(&big_f1, &f2, &g, &g2), rhs: x8.clone() },
        ParamIdentity { name: "F2 h1 + G2 i1 = Z^8", lhs: comb(&big_f2, &h1, &g, &i1), rhs: one },
        ParamIdentity { name: "F2 h2 + G2 i2 = X^8", lhs: comb(&big_f2, &h2, &g, &i2), rhs: x8 },
    ]
}

/// Polynomial identity testing of `param_identities` at the given a-values.
pub fn verify_param_identities(a_values: &[Rat]) -> Result<Vec<IdentityCheck>, PolyError> {
    param_identities()
        .iter()
        .map(|id| Ok(IdentityCheck { name: id.name.into(), passed: identity_check_in_a(&id.lhs, &id.rhs, a_values)? }))
        .collect()
}

/// Distinct integer sample points for the identity tests, drawn from a seeded ChaCha8
/// stream in [8, 10^6). At least `min_count`, and at least enough for every identity
/// plus the points where some denominator may vanish.
pub fn sample_a_values(seed: u64, min_count: usize) -> Vec<Rat> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let need = param_identities().iter().map(|id| samples_needed(&id.lhs, &id.rhs)).max().unwrap_or(1);
    let count = min_count.max(need + 8);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    while seen.len() < count {
        seen.insert(rng.gen_range(8i64..1_000_000));
    }
    seen.into_iter().map(rat_int).collect()
}

/// Bezout cofactors of F_i(X, 1), G(X, 1) at a fixed a; by uniqueness under the degree
/// bounds these are the dehomogenized f_1, g_1 (resp. h_1, i_1).
pub fn bezout_at(a: &Rat, second: bool) -> Result<(PolyQ, PolyQ), PolyError> {
    let (f1, g, f2) = lemma_forms();
    let big_f = if second { f2 } else { f1 };
    let ev = |p: &ParamPoly| p.eval_a(a).ok_or(PolyError::DivisionByZero);
    bezout_cofactors(&ev(&big_f)?, &ev(&g)?)
}

/// Exact multiplicative form of the height sandwich at one point:
/// H(P)^4 <= 4 H(phi_i(P)), and H(phi_1(P)) <= max(6a^2, 4) H(P)^4, H(phi_2(P)) <= max(2a^2, 4) H(P)^4.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichCheck {
    pub point: CPoint,
    pub lower: [bool; 2],
    pub upper: [bool; 2],
}

pub fn height_sandwich(b: &FamilyBundle, p: &CPoint) -> Result<SandwichCheck, FamilyError> {
    let h4 = p.height().pow(4u32);
    let a2 = &b.a * &b.a;
    let caps = [(int(6) * &a2).max(int(4)), (int(2) * &a2).max(int(4))];
    let mut lower = [false; 2];
    let mut upper = [false; 2];
    for (i, w) in [MapChoice::Phi1, MapChoice::Phi2].into_iter().enumerate() {
        let img = b.apply_map(w, p)?;
        let hx = img.x().map(numth::rat_height).unwrap_or_else(Int::zero);
        lower[i] = h4 <= int(4) * &hx;
        upper[i] = hx <= &caps[i] * &h4;
    }
    Ok(SandwichCheck { point: p.clone(), lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::rat;

    fn fam(a: i64) -> FamilyBundle {
        build_family(&int(a)).unwrap()
    }

    #[test]
    fn curves_from_parameter() {
        let b = fam(237);
        assert_eq!(b.e_a.to_string(), "y^2 = x^3 + 112338x^2 + 3154956557x");
        let b = fam(1);
        assert_eq!(*b.c.f(), PolyQ::from_ints(&[1, 0, 0, 0, 14, 0, 0, 0, 1]));
        assert!(b.degenerate);
        let b = fam(3);
        assert_eq!(b.e_prime.to_string(), "y^2 = x^3 - 85x^2 + 324x");
        assert_eq!(b.c.genus(), 3);
        assert!(matches!(build_family(&int(0)), Err(FamilyError::BadParameter(_))));
    }

    #[test]
    fn map_values() {
        for a in [2i64, 3, 21, 237] {
            let b = fam(a);
            let a2 = a * a;
            let p = CPoint::new(int(0), int(1), int(1));
            assert_eq!(b.apply_map(MapChoice::Phi1, &p).unwrap(), EPoint::from_ints(-a2 - 2, 0));
            let q = b.apply_map(MapChoice::Phi2, &p).unwrap();
            assert_eq!(q.x(), Some(&rat_int(a2 - 2)));
            let r = b.apply_map(MapChoice::Phi1, &CPoint::new(int(1), int(4), int(1))).unwrap();
            assert_eq!(r.x(), Some(&rat_int(a2 - 2)));
            assert_eq!(r.y().unwrap().abs(), rat_int(2 * a * a2 - 4 * a));
            // points at infinity
            let inf = CPoint::new(int(1), int(1), int(0));
            assert_eq!(b.apply_map(MapChoice::Phi1, &inf).unwrap(), EPoint::from_ints(-a2 - 2, 0));
            let i2 = b.apply_map(MapChoice::Phi2, &inf).unwrap();
            assert_eq!(i2, EPoint::from_ints(a2 - 2, -2 * a * a2 + 4 * a));
        }
    }

    #[test]
    fn cpoint_normalization() {
        let p = CPoint::new(int(-2), int(16 * 3), int(-2));
        assert_eq!(p, CPoint::new(int(1), int(3), int(1)));
        let q = CPoint::new(int(-1), int(5), int(0));
        assert_eq!(q, CPoint::new(int(1), int(5), int(0)));
        let r = CPoint::from_affine(&rat(3, 2), &rat(5, 16));
        assert_eq!((r.x.clone(), r.y.clone(), r.z.clone()), (int(3), int(5), int(2)));
        assert_eq!(r.affine(), Some((rat(3, 2), rat(5, 16))));
        assert_eq!(r.to_string(), "(3 : 5 : 2)");
        let b = fam(5);
        for p in b.c.universal_points() {
            assert!(b.c.is_on(&p));
            assert_eq!(p.tau().tau(), p);
            assert!(b.c.is_on(&p.tau()));
        }
        assert_eq!(b.c.universal_points().len(), 8);
        assert_eq!(CPoint::new(int(1), int(4), int(1)).tau(), CPoint::new(int(-1), int(4), int(1)));
    }

    #[test]
    fn identities_hold_for_fixed_a() {
        for a in [1i64, 2, 3, 5] {
            let r = verify_construction_identities(&fam(a));
            assert!(r.all_passed(), "a = {a}: {:?}", r.checks);
            assert_eq!(r.degenerate, a == 1);
        }
        let mut b = fam(5);
        b.c.f = &b.c.f + &PolyQ::one();
        let r = verify_construction_identities(&b);
        assert_eq!(r.require(), Err(FamilyError::IdentityFailed("g(z(x))(x^2+1)^4 = f(x)".into())));
    }

    #[test]
    fn parametric_identities() {
        let avals: Vec<Rat> = (2..=13).map(rat_int).collect();
        for c in verify_param_identities(&avals).unwrap() {
            assert!(c.passed, "{}", c.name);
        }
        let mut ids = param_identities();
        ids[0].rhs = &ids[0].rhs + &ParamPoly::from_int_terms(&[(0, &[1])]);
        assert!(!identity_check_in_a(&ids[0].lhs, &ids[0].rhs, &avals).unwrap());
        assert!(identity_check_in_a(&ids[1].lhs, &ids[1].rhs, &avals[..2]).is_err());
    }

    #[test]
    fn bezout_recovers_lemma_cofactors() {
        for a in [2i64, 3, 7] {
            let ar = rat_int(a);
            let ids = param_identities();
            let (u, v) = bezout_at(&ar, false).unwrap();
            let (f1, g, _) = lemma_forms();
            assert_eq!(&(&u * &f1.eval_a(&ar).unwrap()) + &(&v * &g.eval_a(&ar).unwrap()), PolyQ::one());
            // f1(X,1) = -X^2/(2(a^2-1)) - 1/(a^2-1)
            let d = rat_int(a * a - 1);
            assert_eq!(u, PolyQ::new(vec![-(rat_int(1) / &d), Rat::zero(), -(rat_int(1) / (rat_int(2) * &d))]));
            let (u2, v2) = bezout_at(&ar, true).unwrap();
            let (_, g, f2) = lemma_forms();
            assert_eq!(&(&u2 * &f2.eval_a(&ar).unwrap()) + &(&v2 * &g.eval_a(&ar).unwrap()), PolyQ::one());
            assert_eq!(ids.len(), 6);
            assert_eq!(f1.eval_a(&ar).unwrap().gcd(&g.eval_a(&ar).unwrap()), PolyQ::one());
        }
    }

    #[test]
    fn composite_agrees_pointwise() {
        for a in [2i64, 3, 5] {
            let b = fam(a);
            for sign in [1i8, -1] {
                let cm = b.composite_map(sign);
                assert!(crate::poly::rational_roots(&cm.exceptional).unwrap().is_empty());
                for p in b.c.universal_points() {
                    let w = if sign > 0 { MapChoice::Sum } else { MapChoice::Difference };
                    let direct = b.apply_map(w, &p).unwrap();
                    if let Some((x, y)) = p.affine() {
                        if let Some(v) = cm.eval(&x, &y) {
                            assert_eq!(v, direct, "a={a} sign={sign} p={p}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn composite_of_map_with_itself() {
        let b = fam(3);
        let field = b.function_field();
        let cm = composite_of(&b.e_a, &field, &b.phi1, &b.phi1, -1);
        assert!(cm.x.is_zero() && cm.y.is_zero());
        let dbl = composite_of(&b.e_a, &field, &b.phi1, &b.phi1, 1);
        let p = CPoint::new(int(1), int(4), int(1));
        let (x, y) = p.affine().unwrap();
        let direct = b.e_a.double(&b.phi1.apply(&p));
        assert_eq!(dbl.eval(&x, &y), Some(direct));
    }

    #[test]
    fn degrees_and_cassels() {
        let b = fam(3);
        let primes = fiber_primes(&b.a, 8);
        assert!(primes.iter().all(|&p| p > 11));
        let d1 = estimate_map_degree(&b, MapChoice::Phi1, &primes);
        let d2 = estimate_map_degree(&b, MapChoice::Phi2, &primes);
        let ds = estimate_map_degree(&b, MapChoice::Sum, &primes);
        assert_eq!((d1.degree, d2.degree, ds.degree), (2, 2, 4));
        assert!(d1.primes.len() >= 3);
        let m = cassels_matrix(d1.degree, d2.degree, ds.degree);
        assert_eq!(m.m, [[rat_int(2), rat_int(0)], [rat_int(0), rat_int(2)]]);
        assert_eq!(m.det, rat_int(4));
        assert!(m.independent);
        let m = cassels_matrix(2, 2, 8);
        assert_eq!((m.det.clone(), m.independent), (rat_int(0), false));
        assert_eq!(m.m[0][1], rat_int(2));
        assert_eq!(cassels_matrix(1, 1, 4).det, rat_int(0));
        let c = estimate_degree(&b, &primes, |_, _, _, _| Some(None));
        assert_eq!((c.degree, c.degenerate), (0, true));
    }

    #[test]
    fn sandwich_on_universal_points() {
        for a in [2i64, 3, 5] {
            let b = fam(a);
            for p in b.c.universal_points() {
                let s = height_sandwich(&b, &p).unwrap();
                assert_eq!((s.lower, s.upper), ([true; 2], [true; 2]), "{p}");
            }
        }
    }

    #[test]
    fn x_fiber_of_two_torsion_target() {
        let b = fam(3);
        let a2 = 9;
        let (cond, _, _) = b.phi1.x_fiber(&rat_int(-a2 - 2), b.c.f());
        // 16a^2(a^2+2) x^2 (x^2+1)^2 times (x^2+1)^2 from the weight-6 triple
        let expect = PolyQ::from_ints(&[0, 0, 16 * 9 * 11]) * PolyQ::from_ints(&[1, 0, 1]).pow(4);
        assert_eq!(cond, expect);
        assert_eq!(crate::poly::rational_roots(&cond).unwrap(), vec![rat_int(0)]);
    }

    #[test]
    fn serializes() {
        let js = serde_json::to_value(fam(3)).unwrap();
        assert_eq!(js["a"], "3");
        assert_eq!(js["e_a"]["a2"], "18");
        assert_eq!(js["c"]["f"][8], "1");
    }
}
