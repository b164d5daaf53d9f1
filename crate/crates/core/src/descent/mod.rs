//! Complete 2-descent on E_a: y^2 = x(x - e2)(x - e3), e2 = -a^2+2, e3 = -a^2-2, through
//! the Kummer map E(Q)/2E(Q) -> Q(S,2) x Q(S,2), P -> (x - e1, x - e2).

pub mod local;

pub use local::{
    is_local_square, local_class, local_image, local_solubility, real_soluble, LocalImage, LocalPlace, Quadrics,
    Solubility,
};

use crate::ecq::{torsion_subgroup, EPoint, EcError, EllCurve};
use crate::family::e_a_curve;
use crate::numth::{int, primality, rat_sqrt, split_power, trial_factor, Int, Primality, Rat};
use crate::serial::ser_int;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescentError {
    #[error("descent hypothesis violated at a = {a}: {reason}")]
    Hypothesis { a: Int, reason: String },
    #[error("square-free part of {0} leaves the factor basis")]
    OutsideBasis(Rat),
    #[error("could not factor {0}")]
    Factor(Int),
    #[error("inconsistent descent data: {0}")]
    Inconsistent(String),
    #[error("{0} cells left unresolved")]
    Unresolved(usize),
    #[error(transparent)]
    Ec(#[from] EcError),
}

/// Exponent vector over the basis {-1, p_1, ..., p_k}; bit 0 is the sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SClass(pub u32);

// exponents live in F_2, so multiplying classes adds vectors mod 2
impl std::ops::Mul for SClass {
    type Output = SClass;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: SClass) -> SClass {
        SClass(self.0 ^ o.0)
    }
}

impl SClass {
    pub const ONE: SClass = SClass(0);

    pub fn has(&self, bit: usize) -> bool {
        self.0 >> bit & 1 == 1
    }
}

/// Factor basis of Q(S,2) for E_a.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub a: Int,
    /// Odd and even primes of S, in increasing order of the hypothesis basis {2, a^2-2, a^2+2}.
    pub primes: Vec<Int>,
    /// Names for the primes when the basis is {2, a^2-2, a^2+2}.
    symbolic: bool,
}

const SYMBOLS: [&str; 3] = ["2", "(a^2-2)", "(a^2+2)"];

impl Basis {
    /// {-1, 2, a^2-2, a^2+2}.
    pub fn hypothesis(a: &Int) -> Self {
        let a2 = a * a;
        Basis { a: a.clone(), primes: vec![int(2), &a2 - 2u32, &a2 + 2u32], symbolic: true }
    }

    /// -1 and every prime dividing 2(a^2-2)(a^2+2).
    pub fn generic(a: &Int) -> Result<Self, DescentError> {
        let a2 = a * a;
        let mut primes: BTreeSet<Int> = BTreeSet::new();
        primes.insert(int(2));
        for n in [&a2 - 2u32, &a2 + 2u32] {
            let (fs, rest) = trial_factor(&n, 1 << 20);
            if !rest.is_one() {
                return Err(DescentError::Factor(n));
            }
            primes.extend(fs.into_iter().map(|(p, _)| p));
        }
        Ok(Basis { a: a.clone(), primes: primes.into_iter().collect(), symbolic: false })
    }

    pub fn rank(&self) -> usize {
        self.primes.len() + 1
    }

    pub fn classes(&self) -> impl Iterator<Item = SClass> {
        (0..1u32 << self.rank()).map(SClass)
    }

    pub fn value(&self, c: SClass) -> Int {
        let mut v = if c.has(0) { int(-1) } else { int(1) };
        for (i, p) in self.primes.iter().enumerate() {
            if c.has(i + 1) {
                v *= p;
            }
        }
        v
    }

    pub fn label(&self, c: SClass) -> String {
        if !self.symbolic {
            return self.value(c).to_string();
        }
        let mut s = String::new();
        for (i, sym) in SYMBOLS.iter().enumerate() {
            if c.has(i + 1) {
                s.push_str(sym);
            }
        }
        let s = if s.is_empty() { "1".to_string() } else { s };
        if c.has(0) {
            format!("-{s}")
        } else {
            s
        }
    }

    /// Square class of a nonzero rational, stripping squares over the basis.
    pub fn class_of(&self, r: &Rat) -> Result<SClass, DescentError> {
        if r.is_zero() {
            return Err(DescentError::OutsideBasis(r.clone()));
        }
        let mut bits = u32::from(r.is_negative());
        let mut n = r.numer().abs();
        let mut d = r.denom().clone();
        for (i, p) in self.primes.iter().enumerate() {
            let (vn, rn) = split_power(&n, p);
            let (vd, rd) = split_power(&d, p);
            if (vn + vd) % 2 == 1 {
                bits |= 1 << (i + 1);
            }
            n = rn;
            d = rd;
        }
        if rat_sqrt(&Rat::new(n, d)).is_none() {
            return Err(DescentError::OutsideBasis(r.clone()));
        }
        Ok(SClass(bits))
    }
}

pub type Cell = (SClass, SClass);

/// Coefficients of b1 z1^2 - b2 z2^2 = e2, b1 z1^2 - b1 b2 z3^2 = e3 for one cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsorSystem {
    #[serde(serialize_with = "ser_int")]
    pub b1: Int,
    #[serde(serialize_with = "ser_int")]
    pub b2: Int,
    #[serde(serialize_with = "ser_int")]
    pub e2: Int,
    #[serde(serialize_with = "ser_int")]
    pub e3: Int,
}

impl TorsorSystem {
    pub fn new(basis: &Basis, cell: Cell) -> Self {
        let a2 = &basis.a * &basis.a;
        TorsorSystem { b1: basis.value(cell.0), b2: basis.value(cell.1), e2: int(2) - &a2, e3: int(-2) - a2 }
    }

    pub fn holds(&self, z: &[Rat; 3]) -> bool {
        let (b1, b2) = (Rat::from_integer(self.b1.clone()), Rat::from_integer(self.b2.clone()));
        let l = &b1 * &z[0] * &z[0];
        &l - &b2 * &z[1] * &z[1] == Rat::from_integer(self.e2.clone())
            && &l - &b1 * &b2 * &z[2] * &z[2] == Rat::from_integer(self.e3.clone())
    }

    pub fn quadrics(&self) -> Quadrics {
        Quadrics::torsor(&self.b1, &self.b2, &self.e2, &self.e3)
    }

    /// The point (b1 z1^2, b1 b2 z1 z2 z3) on E_a.
    pub fn point(&self, z: &[Rat; 3]) -> EPoint {
        let b1 = Rat::from_integer(self.b1.clone());
        let b2 = Rat::from_integer(self.b2.clone());
        EPoint::Aff(&b1 * &z[0] * &z[0], &b1 * &b2 * &z[0] * &z[1] * &z[2])
    }
}

/// Brute-force Q_p solubility of one torsor, p prime and small.
pub fn local_solubility_qp(t: &TorsorSystem, p: &Int, max_lift: u32) -> Solubility {
    local_solubility(&t.quadrics(), p, max_lift)
}

/// Why a cell is not in the image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// b1 and b2 of opposite signs.
    Sign,
    /// Both sides of the first equation reduce to incompatible parities; a is odd.
    Parity,
    /// a^2+2 divides b2 but not b1.
    DividesPlus,
    /// a^2-2 divides b2 but not b1.
    DividesMinus,
    /// Would force a^2+2 = 0 mod a^2-2.
    DistinctPrimes,
    /// Outside the computed local image.
    LocalImage,
    /// Product of an obstructed cell with a witnessed one.
    Closure { obstructed: (u32, u32), witness: (u32, u32) },
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum CellStatus {
    Witness { point: EPoint, z: [Rat; 3] },
    Obstruction { place: LocalPlace, reason: Reason },
    Unresolved,
}

impl CellStatus {
    pub fn is_witness(&self) -> bool {
        matches!(self, CellStatus::Witness { .. })
    }

    pub fn is_obstruction(&self) -> bool {
        matches!(self, CellStatus::Obstruction { .. })
    }

    fn short(&self) -> String {
        match self {
            CellStatus::Witness { .. } => "W".into(),
            CellStatus::Unresolved => "?".into(),
            CellStatus::Obstruction { place, reason } => {
                let p = match place {
                    LocalPlace::Real => "R".to_string(),
                    LocalPlace::Prime(p) => p.to_string(),
                };
                match reason {
                    Reason::Parity => format!("{p}*"),
                    Reason::DistinctPrimes => format!("{p}d"),
                    Reason::Closure { .. } => format!("{p}c"),
                    _ => p,
                }
            }
        }
    }
}

impl Serialize for CellStatus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CellStatus::Witness { point, z } => {
                let mut st = s.serialize_struct("Witness", 3)?;
                st.serialize_field("kind", "witness")?;
                st.serialize_field("point", point)?;
                let z: Vec<String> = z.iter().map(crate::numth::rat_string).collect();
                st.serialize_field("z", &z)?;
                st.end()
            }
            CellStatus::Obstruction { place, reason } => {
                let mut st = s.serialize_struct("Obstruction", 3)?;
                st.serialize_field("kind", "obstruction")?;
                st.serialize_field("place", &place.to_string())?;
                st.serialize_field("reason", reason)?;
                st.end()
            }
            CellStatus::Unresolved => {
                let mut st = s.serialize_struct("Unresolved", 1)?;
                st.serialize_field("kind", "unresolved")?;
                st.end()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentMode {
    /// The symbolic case analysis, valid when a^2 +- 2 are prime and 3 | a.
    Symbolic,
    /// Local images at every place of S; used for parameters outside the hypothesis.
    LocalImages,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisRecord {
    pub minus_prime: Primality,
    pub plus_prime: Primality,
    pub a_divisible_by_3: bool,
    pub a_odd: bool,
}

impl HypothesisRecord {
    pub fn of(a: &Int) -> Self {
        let a2 = a * a;
        HypothesisRecord {
            minus_prime: primality(&(&a2 - 2u32)),
            plus_prime: primality(&(&a2 + 2u32)),
            a_divisible_by_3: a.is_multiple_of(&int(3)),
            a_odd: a.is_odd(),
        }
    }

    pub fn holds(&self) -> bool {
        self.minus_prime != Primality::Composite && self.plus_prime != Primality::Composite && self.a_divisible_by_3
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellRecord {
    pub b1: String,
    pub b2: String,
    #[serde(serialize_with = "ser_int")]
    pub b1_value: Int,
    #[serde(serialize_with = "ser_int")]
    pub b2_value: Int,
    pub status: CellStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct DescentCertificate {
    #[serde(serialize_with = "ser_int")]
    pub a: Int,
    pub mode: DescentMode,
    pub hypothesis: HypothesisRecord,
    pub basis: Vec<String>,
    /// Row-major over (b1, b2) in SClass order.
    pub cells: Vec<CellRecord>,
    pub survivors: usize,
    pub rank: u32,
    /// Points whose images generate the survivors.
    pub generators: Vec<EPoint>,
    #[serde(skip)]
    pub status: BTreeMap<Cell, CellStatus>,
    #[serde(skip)]
    pub basis_data: Basis,
}

impl DescentCertificate {
    pub fn survivor_cells(&self) -> Vec<Cell> {
        self.status.iter().filter(|(_, s)| s.is_witness()).map(|(c, _)| *c).collect()
    }

    pub fn torsor(&self, cell: Cell) -> TorsorSystem {
        TorsorSystem::new(&self.basis_data, cell)
    }

    /// Grid with b2 down the rows and b1 across, as in the usual layout of such tables.
    pub fn render_table(&self) -> String {
        let b = &self.basis_data;
        let labels: Vec<String> = b.classes().map(|c| b.label(c)).collect();
        let w = labels.iter().map(|l| l.len()).max().unwrap_or(1).max(8);
        let mut out = String::new();
        let _ = write!(out, "{:>w$} |", "b2 \\ b1");
        for l in &labels {
            let _ = write!(out, " {l:>w$}");
        }
        out.push('\n');
        for b2 in b.classes() {
            let _ = write!(out, "{:>w$} |", b.label(b2));
            for b1 in b.classes() {
                let _ = write!(out, " {:>w$}", self.status[&(b1, b2)].short());
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "W witness, R real, p local at p, * parity, d distinct primes, c closure; survivors {}, rank {}",
            self.survivors, self.rank
        );
        out
    }
}

#[derive(Clone, Debug)]
pub struct DescentOptions {
    /// Height bound on z1 in the witness search; None means 4a^2.
    pub witness_bound: Option<Int>,
    /// Cap on trial values of z1 per unresolved cell.
    pub max_trials: u64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions { witness_bound: None, max_trials: 4_000_000 }
    }
}

/// (x - e1, x - e2) with the two special cases at x = e1 and x = e2.
pub fn image_of_point(basis: &Basis, p: &EPoint) -> Result<Cell, DescentError> {
    let EPoint::Aff(x, _) = p else {
        return Ok((SClass::ONE, SClass::ONE));
    };
    let a2 = Rat::from_integer(&basis.a * &basis.a);
    let two = Rat::from_integer(int(2));
    let e2 = &two - &a2;
    let e3 = -&two - &a2;
    let (u, v) = if x.is_zero() {
        (e3.clone() / &e2, -&e2)
    } else if *x == e2 {
        (e2.clone(), (&e2 - &e3) / &e2)
    } else {
        (x.clone(), x - &e2)
    };
    Ok((basis.class_of(&u)?, basis.class_of(&v)?))
}

/// The symbolic rules in order: sign, parity, divisibility by a^2 +- 2, distinct primes.
pub fn classify_cell(basis: &Basis, cell: Cell) -> Option<CellStatus> {
    let (b1, b2) = cell;
    if b1.has(0) != b2.has(0) {
        return Some(CellStatus::Obstruction { place: LocalPlace::Real, reason: Reason::Sign });
    }
    let two = LocalPlace::Prime(basis.primes[0].clone());
    let minus = LocalPlace::Prime(basis.primes[1].clone());
    let plus = LocalPlace::Prime(basis.primes[2].clone());
    // (1,2), (2,1), (2,2), (-2,-2)
    let parity = [(0b0000, 0b0010), (0b0010, 0b0000), (0b0010, 0b0010), (0b0011, 0b0011)];
    if parity.contains(&(b1.0, b2.0)) {
        return Some(CellStatus::Obstruction { place: two, reason: Reason::Parity });
    }
    if !b1.has(3) && b2.has(3) {
        return Some(CellStatus::Obstruction { place: plus, reason: Reason::DividesPlus });
    }
    if !b1.has(2) && b2.has(2) {
        return Some(CellStatus::Obstruction { place: minus, reason: Reason::DividesMinus });
    }
    if (b1.0, b2.0) == (0b1100, 0b0010) {
        return Some(CellStatus::Obstruction { place: minus, reason: Reason::DistinctPrimes });
    }
    None
}

struct Engine {
    basis: Basis,
    curve: EllCurve,
    e2: Rat,
    e3: Rat,
    p0: EPoint,
    status: BTreeMap<Cell, CellStatus>,
    generators: Vec<EPoint>,
    /// Witnessed cells with a point in each.
    group: BTreeMap<Cell, EPoint>,
}

impl Engine {
    fn new(a: &Int, basis: Basis) -> Result<Self, DescentError> {
        let curve = e_a_curve(a)?;
        let a2 = Rat::from_integer(a * a);
        let two = Rat::from_integer(int(2));
        let mut status = BTreeMap::new();
        for b1 in basis.classes() {
            for b2 in basis.classes() {
                status.insert((b1, b2), CellStatus::Unresolved);
            }
        }
        let mut group = BTreeMap::new();
        group.insert((SClass::ONE, SClass::ONE), EPoint::Inf);
        Ok(Engine {
            basis,
            curve,
            e2: &two - &a2,
            e3: -&two - &a2,
            p0: EPoint::Aff(-a2, Rat::from_integer(int(2) * a)),
            status,
            generators: vec![],
            group,
        })
    }

    /// Adds a point to the known subgroup, extending the witnessed cells.
    fn add_generator(&mut self, p: &EPoint) -> Result<bool, DescentError> {
        let img = image_of_point(&self.basis, p)?;
        if self.group.contains_key(&img) {
            return Ok(false);
        }
        let old: Vec<(Cell, EPoint)> = self.group.iter().map(|(c, q)| (*c, q.clone())).collect();
        for (c, q) in old {
            self.group.insert((c.0 * img.0, c.1 * img.1), self.curve.add(&q, p));
        }
        self.generators.push(p.clone());
        Ok(true)
    }

    /// Point with x outside {e1, e2, e3} in the same class, so all three z are nonzero.
    fn witness_for(&self, cell: Cell, p: &EPoint) -> Result<CellStatus, DescentError> {
        let mut q = p.clone();
        let p2 = self.curve.double(&self.p0);
        for _ in 0..4 {
            let good = match &q {
                EPoint::Aff(x, _) => !x.is_zero() && *x != self.e2 && *x != self.e3,
                EPoint::Inf => false,
            };
            if good {
                break;
            }
            q = self.curve.add(&q, &p2);
        }
        let EPoint::Aff(x, _) = &q else {
            return Err(DescentError::Inconsistent("no affine witness".into()));
        };
        let t = TorsorSystem::new(&self.basis, cell);
        let b1 = Rat::from_integer(t.b1.clone());
        let b2 = Rat::from_integer(t.b2.clone());
        let z = [x / &b1, (x - &self.e2) / &b2, (x - &self.e3) / (&b1 * &b2)].map(|v| rat_sqrt(&v));
        let [Some(z1), Some(z2), Some(z3)] = z else {
            return Err(DescentError::Inconsistent(format!("{q} does not give a solution in its cell")));
        };
        // sign of z3 fixed by y = b1 b2 z1 z2 z3
        let mut z = [z1, z2, z3];
        if t.point(&z) != q {
            z[2] = -z[2].clone();
        }
        if !t.holds(&z) || t.point(&z) != q {
            return Err(DescentError::Inconsistent(format!("witness for {cell:?}")));
        }
        Ok(CellStatus::Witness { point: q, z })
    }

    fn record_witnesses(&mut self) -> Result<(), DescentError> {
        let cells: Vec<(Cell, EPoint)> = self.group.iter().map(|(c, p)| (*c, p.clone())).collect();
        for (c, p) in cells {
            if self.status[&c].is_obstruction() {
                return Err(DescentError::Inconsistent(format!(
                    "cell ({}, {}) is obstructed but contains {p}",
                    self.basis.label(c.0),
                    self.basis.label(c.1)
                )));
            }
            if !self.status[&c].is_witness() {
                let w = self.witness_for(c, &p)?;
                self.status.insert(c, w);
            }
        }
        Ok(())
    }

    /// An obstructed cell times a witnessed cell is obstructed at the same place.
    fn closure(&mut self) {
        let witnesses: Vec<Cell> = self.group.keys().copied().collect();
        loop {
            let mut changed = false;
            let obstructed: Vec<(Cell, LocalPlace)> = self
                .status
                .iter()
                .filter_map(|(c, s)| match s {
                    CellStatus::Obstruction { place, .. } => Some((*c, place.clone())),
                    _ => None,
                })
                .collect();
            for (c, place) in &obstructed {
                for w in &witnesses {
                    let d = (c.0 * w.0, c.1 * w.1);
                    if matches!(self.status[&d], CellStatus::Unresolved) {
                        let reason = Reason::Closure { obstructed: (c.0 .0, c.1 .0), witness: (w.0 .0, w.1 .0) };
                        self.status.insert(d, CellStatus::Obstruction { place: place.clone(), reason });
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Small z1 = n/d with x = b1 z1^2 making the other two quantities squares.
    fn search(&self, cell: Cell, bound: &Int, max_trials: u64) -> Option<EPoint> {
        let t = TorsorSystem::new(&self.basis, cell);
        let b1 = Rat::from_integer(t.b1.clone());
        let b2 = Rat::from_integer(t.b2.clone());
        let mut trials = 0u64;
        let mut d = Int::one();
        while &d <= bound {
            let mut n = Int::one();
            while &n <= bound {
                trials += 1;
                if trials > max_trials {
                    return None;
                }
                if n.gcd(&d).is_one() {
                    let x = &b1 * Rat::new(&n * &n, &d * &d);
                    if let (Some(_), Some(_)) =
                        (rat_sqrt(&((&x - &self.e2) / &b2)), rat_sqrt(&((&x - &self.e3) / (&b1 * &b2))))
                    {
                        if let Some(p) = self.curve.lift_x(&x).into_iter().next() {
                            return Some(p);
                        }
                    }
                }
                n += 1u32;
            }
            d += 1u32;
        }
        None
    }

    fn finish(mut self, a: &Int, mode: DescentMode, opts: &DescentOptions) -> Result<DescentCertificate, DescentError> {
        self.record_witnesses()?;
        self.closure();
        let bound = opts.witness_bound.clone().unwrap_or_else(|| int(4) * a * a);
        loop {
            let open: Vec<Cell> =
                self.status.iter().filter(|(_, s)| matches!(s, CellStatus::Unresolved)).map(|(c, _)| *c).collect();
            let mut grew = false;
            for c in open {
                if self.group.contains_key(&c) {
                    continue;
                }
                if let Some(p) = self.search(c, &bound, opts.max_trials) {
                    grew |= self.add_generator(&p)?;
                }
            }
            if !grew {
                break;
            }
            self.record_witnesses()?;
            self.closure();
        }
        let unresolved = self.status.values().filter(|s| matches!(s, CellStatus::Unresolved)).count();
        if unresolved > 0 {
            return Err(DescentError::Unresolved(unresolved));
        }
        let survivors = self.group.len();
        if !survivors.is_power_of_two() || survivors < 4 {
            return Err(DescentError::Inconsistent(format!("{survivors} survivors")));
        }
        let b = &self.basis;
        let cells = self
            .status
            .iter()
            .map(|((b1, b2), s)| CellRecord {
                b1: b.label(*b1),
                b2: b.label(*b2),
                b1_value: b.value(*b1),
                b2_value: b.value(*b2),
                status: s.clone(),
            })
            .collect();
        Ok(DescentCertificate {
            a: a.clone(),
            mode,
            hypothesis: HypothesisRecord::of(a),
            basis: b
                .classes()
                .take(1)
                .chain((0..b.primes.len()).map(|i| SClass(1 << (i + 1))))
                .map(|c| if c == SClass::ONE { "-1".to_string() } else { b.label(c) })
                .collect(),
            cells,
            survivors,
            rank: survivors.trailing_zeros() - 2,
            generators: self.generators,
            status: self.status,
            basis_data: self.basis,
        })
    }

    fn seed(&mut self) -> Result<(), DescentError> {
        for t in torsion_subgroup(&self.curve).points {
            self.add_generator(&t)?;
        }
        let p0 = self.p0.clone();
        if !self.curve.is_torsion(&p0) {
            self.add_generator(&p0)?;
        }
        Ok(())
    }
}

/// Complete 2-descent under the hypothesis a^2 - 2, a^2 + 2 prime and 3 | a.
pub fn run_descent(a: &Int) -> Result<DescentCertificate, DescentError> {
    run_descent_with(a, &DescentOptions::default())
}

/// Errs with the first failing condition of the symbolic descent hypothesis.
pub fn check_hypothesis(a: &Int) -> Result<HypothesisRecord, DescentError> {
    let h = HypothesisRecord::of(a);
    if !a.is_positive() {
        return Err(DescentError::Hypothesis { a: a.clone(), reason: "a must be positive".into() });
    }
    let a2 = a * a;
    if h.minus_prime == Primality::Composite {
        return Err(DescentError::Hypothesis { a: a.clone(), reason: format!("a^2-2 = {} is not prime", &a2 - 2u32) });
    }
    if h.plus_prime == Primality::Composite {
        return Err(DescentError::Hypothesis { a: a.clone(), reason: format!("a^2+2 = {} is not prime", &a2 + 2u32) });
    }
    if !h.a_divisible_by_3 {
        return Err(DescentError::Hypothesis { a: a.clone(), reason: "a is not divisible by 3".into() });
    }
    Ok(h)
}

pub fn run_descent_with(a: &Int, opts: &DescentOptions) -> Result<DescentCertificate, DescentError> {
    let h = check_hypothesis(a)?;
    assert!(h.a_odd, "a^2 +- 2 prime forces a odd");
    let mut eng = Engine::new(a, Basis::hypothesis(a))?;
    for b1 in eng.basis.classes() {
        for b2 in eng.basis.classes() {
            if let Some(s) = classify_cell(&eng.basis, (b1, b2)) {
                eng.status.insert((b1, b2), s);
            }
        }
    }
    // known points: torsion, (-a^2, 2a), and the three sums with the 2-torsion
    eng.seed()?;
    eng.finish(a, DescentMode::Symbolic, opts)
}

/// 2-descent by local images at every place of S, for any a > 0 whose a^2 +- 2 factor.
pub fn run_descent_local(a: &Int, opts: &DescentOptions) -> Result<DescentCertificate, DescentError> {
    if !a.is_positive() {
        return Err(DescentError::Hypothesis { a: a.clone(), reason: "a must be positive".into() });
    }
    let basis = Basis::generic(a)?;
    let mut eng = Engine::new(a, basis)?;
    let e2 = &int(2) - a * a;
    let e3 = &e2 - 4u32;
    let mut places = vec![LocalPlace::Real];
    places.extend(eng.basis.primes.iter().cloned().map(LocalPlace::Prime));
    let mut images = vec![];
    for place in places {
        let img = local_image(&e2, &e3, &place);
        if !img.complete() {
            return Err(DescentError::Inconsistent(format!("incomplete local image at {place}")));
        }
        images.push(img);
    }
    let cells: Vec<Cell> = eng.status.keys().copied().collect();
    for (b1, b2) in cells {
        let (v1, v2) = (Rat::from_integer(eng.basis.value(b1)), Rat::from_integer(eng.basis.value(b2)));
        if let Some(img) = images.iter().find(|img| !img.contains(&v1, &v2)) {
            eng.status
                .insert((b1, b2), CellStatus::Obstruction { place: img.place.clone(), reason: Reason::LocalImage });
        }
    }
    eng.seed()?;
    eng.finish(a, DescentMode::LocalImages, opts)
}

/// The symbolic descent when its hypothesis holds, the local-image descent otherwise.
pub fn descend(a: &Int, opts: &DescentOptions) -> Result<DescentCertificate, DescentError> {
    if HypothesisRecord::of(a).holds() {
        run_descent_with(a, opts)
    } else {
        run_descent_local(a, opts)
    }
}

/// Confirms an obstruction independently: sign analysis at R, brute-force Q_p search otherwise.
pub fn confirm_obstruction(t: &TorsorSystem, place: &LocalPlace, max_lift: u32) -> Solubility {
    match place {
        LocalPlace::Real => {
            if real_soluble(&t.b1, &t.b2, &t.e2, &t.e3) {
                Solubility::Soluble
            } else {
                Solubility::Insoluble
            }
        }
        LocalPlace::Prime(p) => local_solubility_qp(t, p, max_lift),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::{rat, rat_int};

    fn labels(c: &DescentCertificate, cell: Cell) -> (String, String) {
        (c.basis_data.label(cell.0), c.basis_data.label(cell.1))
    }

    #[test]
    fn images_of_known_points() {
        let b = Basis::hypothesis(&int(3));
        let one = SClass::ONE;
        assert_eq!(image_of_point(&b, &EPoint::Inf).unwrap(), (one, one));
        let (u, v) = image_of_point(&b, &EPoint::from_ints(0, 0)).unwrap();
        assert_eq!((b.label(u), b.label(v)), ("(a^2-2)(a^2+2)".into(), "(a^2-2)".into()));
        let (u, v) = image_of_point(&b, &EPoint::from_ints(-9, 6)).unwrap();
        assert_eq!((b.value(u), b.value(v)), (int(-1), int(-2)));
        let (u, v) = image_of_point(&b, &EPoint::from_ints(-11, 0)).unwrap();
        assert_eq!((b.label(u), b.label(v)), ("-(a^2+2)".into(), "-1".into()));
        assert!(b.class_of(&rat_int(5)).is_err());
        assert_eq!(b.class_of(&rat(-63, 4)).unwrap(), SClass(0b0101));
    }

    #[test]
    fn sixteen_classes() {
        let b = Basis::hypothesis(&int(21));
        let vals: BTreeSet<Int> = b.classes().map(|c| b.value(c)).collect();
        assert_eq!(vals.len(), 16);
        assert!(vals.contains(&(int(-2) * int(439) * int(443))));
    }

    #[test]
    fn rank_one_for_family() {
        for a in [3i64, 21, 237] {
            let c = run_descent(&int(a)).unwrap();
            assert_eq!(c.survivors, 8, "a = {a}");
            assert_eq!(c.rank, 1);
            assert_eq!(c.cells.len(), 256);
            assert!(c.status.values().all(|s| !matches!(s, CellStatus::Unresolved)));
        }
    }

    #[test]
    fn survivors_match_known_list() {
        let c = run_descent(&int(3)).unwrap();
        let mut got: Vec<(String, String)> = c.survivor_cells().into_iter().map(|x| labels(&c, x)).collect();
        got.sort();
        let mut want: Vec<(String, String)> = [
            ("1", "1"),
            ("(a^2+2)", "2"),
            ("(a^2-2)", "2(a^2-2)"),
            ("(a^2-2)(a^2+2)", "(a^2-2)"),
            ("-1", "-2"),
            ("-(a^2+2)", "-1"),
            ("-(a^2-2)", "-(a^2-2)"),
            ("-(a^2-2)(a^2+2)", "-2(a^2-2)"),
        ]
        .iter()
        .map(|(x, y)| (x.to_string(), y.to_string()))
        .collect();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn named_cells() {
        let a = int(3);
        let c = run_descent(&a).unwrap();
        let b = &c.basis_data;
        let find = |v1: i64, v2: i64| {
            let s1 = b.class_of(&rat_int(v1)).unwrap();
            let s2 = b.class_of(&rat_int(v2)).unwrap();
            c.status[&(s1, s2)].clone()
        };
        match find(-1, -2) {
            CellStatus::Witness { z, .. } => assert_eq!(z.map(|v| v.abs()), [rat_int(3), rat_int(1), rat_int(1)]),
            s => panic!("{s:?}"),
        }
        assert!(matches!(find(1, 2), CellStatus::Obstruction { reason: Reason::Parity, .. }));
        assert!(matches!(find(77, 2), CellStatus::Obstruction { reason: Reason::DistinctPrimes, .. }));
        match find(-77, -14) {
            CellStatus::Witness { point, .. } => assert_eq!(point.x().unwrap(), &rat(-77, 9)),
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn hypothesis_failures() {
        assert!(matches!(run_descent(&int(4)), Err(DescentError::Hypothesis { .. })));
        assert!(matches!(run_descent(&int(5)), Err(DescentError::Hypothesis { .. })));
        assert!(matches!(run_descent(&int(0)), Err(DescentError::Hypothesis { .. })));
    }

    #[test]
    fn local_images_agree_with_symbolic() {
        for a in [3i64, 21, 237] {
            let s = run_descent(&int(a)).unwrap();
            let l = run_descent_local(&int(a), &DescentOptions::default()).unwrap();
            assert_eq!(s.survivor_cells(), l.survivor_cells(), "a = {a}");
        }
    }

    #[test]
    fn symbolic_obstructions_are_local() {
        for a in [3i64, 21, 237] {
            let a = int(a);
            let c = run_descent(&a).unwrap();
            let a2 = &a * &a;
            let (e2, e3) = (int(2) - &a2, int(-2) - &a2);
            let mut imgs = BTreeMap::new();
            for (cell, s) in &c.status {
                if let CellStatus::Obstruction { place, .. } = s {
                    let img = imgs.entry(place.clone()).or_insert_with(|| local_image(&e2, &e3, place));
                    let t = c.torsor(*cell);
                    assert!(img.complete());
                    assert!(!img.contains(&Rat::from_integer(t.b1), &Rat::from_integer(t.b2)), "{cell:?} at {place}");
                }
            }
        }
    }

    #[test]
    fn brute_force_confirms_every_obstruction_at_3() {
        let c = run_descent(&int(3)).unwrap();
        let mut n = 0;
        for (cell, s) in &c.status {
            if let CellStatus::Obstruction { place, .. } = s {
                assert_eq!(
                    confirm_obstruction(&c.torsor(*cell), place, 8),
                    Solubility::Insoluble,
                    "{cell:?} at {place}"
                );
                n += 1;
            }
        }
        assert_eq!(n, 248);
        for cell in c.survivor_cells() {
            for p in [2i64, 7, 11] {
                assert_eq!(local_solubility_qp(&c.torsor(cell), &int(p), 8), Solubility::Soluble);
            }
        }
    }

    #[test]
    fn outside_hypothesis() {
        for a in [2i64, 5] {
            let c = run_descent_local(&int(a), &DescentOptions::default()).unwrap();
            assert_eq!(c.rank, 1, "a = {a}");
        }
    }

    #[test]
    fn table_renders() {
        let c = run_descent(&int(3)).unwrap();
        let t = c.render_table();
        assert_eq!(t.lines().count(), 18);
        assert_eq!(t.matches(" W").count(), 8);
        let j = serde_json::to_value(&c).unwrap();
        assert_eq!(j["cells"].as_array().unwrap().len(), 256);
        assert_eq!(j["rank"], 1);
    }
}
