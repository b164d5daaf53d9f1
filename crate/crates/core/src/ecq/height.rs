//! Naive and canonical heights, normalized by the x-coordinate: h(P) = log H(x(P)),
//! canonical height = lim 4^-n h(2^n P).

use super::{to_int, EPoint, EcError, EllCurve};
use crate::numth::{ln_abs, log_height, Int};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

const EXACT_BITS: u64 = 8192;
const MAX_DOUBLINGS: u32 = 40;

pub fn naive_height(p: &EPoint) -> f64 {
    match p {
        EPoint::Inf => 0.0,
        EPoint::Aff(x, _) => log_height(x),
    }
}

/// Explicit bounds on the gap between the naive and canonical heights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeightBound {
    pub h_j: f64,
    pub h_disc: f64,
    /// Upper bound on h - canonical height.
    pub naive_excess: f64,
    /// Upper bound on canonical height - h.
    pub canonical_excess: f64,
}

impl HeightBound {
    pub fn bound(&self) -> f64 {
        self.naive_excess.max(self.canonical_excess)
    }
}

/// Silverman's inequalities -h(j)/8 - h(D)/12 - 0.973 <= hhat - h/2 <= h(j)/12 + h(D)/12 + 1.07,
/// doubled for the x-coordinate normalization.
pub fn silverman_constants(e: &EllCurve) -> HeightBound {
    let h_j = log_height(&e.j);
    let h_disc = log_height(&e.disc);
    HeightBound {
        h_j,
        h_disc,
        naive_excess: h_j / 4.0 + h_disc / 6.0 + 1.946,
        canonical_excess: h_j / 6.0 + h_disc / 6.0 + 2.14,
    }
}

pub fn silverman_bound(e: &EllCurve) -> f64 {
    silverman_constants(e).bound()
}

fn int_forms(e: &EllCurve) -> Result<([Int; 5], [Int; 5]), EcError> {
    if !e.is_integral() {
        return Err(EcError::NotIntegral);
    }
    let (f, g) = e.doubling_forms();
    Ok((f.each_ref().map(to_int), g.each_ref().map(to_int)))
}

/// sum c[i] X^(4-i) Z^i.
fn eval_form(c: &[Int; 5], x: &Int, z: &Int) -> Int {
    let mut xp = [Int::one(), Int::zero(), Int::zero(), Int::zero(), Int::zero()];
    let mut zp = xp.clone();
    for i in 1..5 {
        xp[i] = &xp[i - 1] * x;
        zp[i] = &zp[i - 1] * z;
    }
    (0..5).fold(Int::zero(), |acc, i| if c[i].is_zero() { acc } else { acc + &c[i] * &xp[4 - i] * &zp[i] })
}

fn bareiss_det(mut m: Vec<Vec<Int>>) -> Int {
    let n = m.len();
    let mut sign = Int::one();
    let mut prev = Int::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(sw) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Int::zero();
            };
            m.swap(k, sw);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Resultant of two binary quartic forms via the Sylvester determinant.
fn form_resultant(f: &[Int; 5], g: &[Int; 5]) -> Int {
    let mut m = vec![vec![Int::zero(); 8]; 8];
    for r in 0..4 {
        m[r][r..r + 5].clone_from_slice(f);
        m[r + 4][r..r + 5].clone_from_slice(g);
    }
    bareiss_det(m)
}

fn truncate(x: &Int, z: &Int, prec: u64) -> (Int, Int, f64) {
    let bits = x.bits().max(z.bits());
    if bits <= prec {
        return (x.clone(), z.clone(), 0.0);
    }
    let s = bits - prec;
    let shr = |v: &Int| {
        let m = v.abs() >> s;
        if v.is_negative() {
            -m
        } else {
            m
        }
    };
    (shr(x), shr(z), s as f64 * std::f64::consts::LN_2)
}

/// h(x(2^n P)) / 4^n for an integral model. Exact while coordinates stay below
/// a few thousand bits, then top bits plus exact residues modulo powers of the
/// resultant of the doubling forms, which is all the gcd removal needs.
pub fn doubling_height(e: &EllCurve, p: &EPoint, n: u32) -> Result<f64, EcError> {
    doubling_height_switch(e, p, n, EXACT_BITS)
}

fn doubling_height_switch(e: &EllCurve, p: &EPoint, n: u32, exact_bits: u64) -> Result<f64, EcError> {
    let (phi, psi) = int_forms(e)?;
    let EPoint::Aff(x, _) = p else {
        return Ok(0.0);
    };
    let mut xx = x.numer().clone();
    let mut zz = x.denom().clone();
    let mut step = 0;
    while step < n && xx.bits().max(zz.bits()) < exact_bits {
        let x2 = eval_form(&phi, &xx, &zz);
        let z2 = eval_form(&psi, &xx, &zz);
        if z2.is_zero() {
            return Ok(0.0);
        }
        let g = x2.gcd(&z2);
        xx = x2 / &g;
        zz = z2 / &g;
        step += 1;
    }
    let scale4 = 4f64.powi(n as i32);
    if step == n {
        return Ok(ln_abs(&xx.abs().max(zz.abs())) / scale4);
    }
    let k = n - step;
    let res = form_resultant(&phi, &psi).abs();
    assert!(!res.is_zero(), "doubling forms share a factor");
    let prec = 256 + k as u64 * (res.bits() + 8);
    let mut modulus = num_traits::pow(res.clone(), k as usize + 1);
    let mut xr = xx.mod_floor(&modulus);
    let mut zr = zz.mod_floor(&modulus);
    let (mut xt, mut zt, mut scale) = truncate(&xx, &zz, prec);
    for _ in 0..k {
        let xr2 = eval_form(&phi, &xr, &zr).mod_floor(&modulus);
        let zr2 = eval_form(&psi, &xr, &zr).mod_floor(&modulus);
        let g = xr2.mod_floor(&res).gcd(&zr2.mod_floor(&res)).gcd(&res);
        modulus = &modulus / &g;
        xr = (xr2 / &g).mod_floor(&modulus);
        zr = (zr2 / &g).mod_floor(&modulus);
        let xt2 = eval_form(&phi, &xt, &zt);
        let zt2 = eval_form(&psi, &xt, &zt);
        let (a, b, s) = truncate(&xt2, &zt2, prec);
        xt = a;
        zt = b;
        scale = 4.0 * scale - ln_abs(&g) + s;
    }
    Ok((ln_abs(&xt.abs().max(zt.abs())) + scale) / scale4)
}

/// Oracle: h(x(2^n P)) / 4^n by the rational group law.
pub fn canonical_height_exact(e: &EllCurve, p: &EPoint, n: u32) -> f64 {
    let mut q = p.clone();
    for _ in 0..n {
        q = e.double(&q);
    }
    naive_height(&q) / 4f64.powi(n as i32)
}

/// Number of doublings that pushes the Silverman gap below tol.
pub fn doublings_for(e: &EllCurve, tol: f64) -> Result<u32, EcError> {
    let b = silverman_bound(e);
    let mut n = 1;
    while b / 4f64.powi(n as i32) >= tol {
        n += 1;
        if n > MAX_DOUBLINGS {
            return Err(EcError::PrecisionCap(MAX_DOUBLINGS));
        }
    }
    Ok(n)
}

/// Canonical height to within tol; torsion points give 0.
pub fn canonical_height(e: &EllCurve, p: &EPoint, tol: f64) -> Result<f64, EcError> {
    if e.is_torsion(p) {
        return Ok(0.0);
    }
    let n = doublings_for(e, tol)?;
    doubling_height(e, p, n)
}
