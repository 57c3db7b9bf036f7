//! Discrete dual groups with a fixed translation-invariant linear order.
//!
//! Elements are written additively. The dictionary to the multiplicative
//! notation for characters is `χξ ↔ x + y`, `χ⁻¹ ↔ −x`, `1 ↔ 0`.
//!
//! Three orders are supported:
//!
//! * `IntLex(n)`: `ℤⁿ` ordered lexicographically, most significant coordinate
//!   first. The least positive element is `(0, …, 0, 1)`.
//! * `IntQuadratic`: `ℤ²` ordered through the embedding `(a, b) ↦ a + b√2`.
//!   The order is dense and has no least positive element.
//! * `RatNatural`: `ℚ` with its natural order, also dense.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An element of the dual group.
///
/// The derived `Ord` is structural and only used for deterministic storage;
/// the group order is [`OrderSpec::compare`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Int(Vec<BigInt>),
    Rat(BigRational),
}

impl GroupElement {
    pub fn int(coords: &[i64]) -> Self {
        GroupElement::Int(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// A rational element, reduced to lowest terms with positive denominator.
    pub fn rat(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(GroupElement::Rat(BigRational::new(num.into(), den.into())))
    }

    pub fn rank(&self) -> usize {
        match self {
            GroupElement::Int(c) => c.len(),
            GroupElement::Rat(_) => 1,
        }
    }

    /// Coordinates as machine integers, if every coordinate fits.
    pub fn coords_i64(&self) -> Option<Vec<i64>> {
        match self {
            GroupElement::Int(c) => c.iter().map(|v| v.to_i64()).collect(),
            GroupElement::Rat(_) => None,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(c) => {
                write!(f, "(")?;
                for (i, v) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            GroupElement::Rat(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

impl IntRepr {
    fn from_big(v: &BigInt) -> Self {
        match v.to_i64() {
            Some(s) => IntRepr::Small(s),
            None => IntRepr::Big(v.to_string()),
        }
    }

    fn into_big(self) -> std::result::Result<BigInt, String> {
        match self {
            IntRepr::Small(s) => Ok(BigInt::from(s)),
            IntRepr::Big(s) => s.parse().map_err(|_| format!("bad integer {s:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ElementRepr {
    Coords(Vec<IntRepr>),
    Frac { num: IntRepr, den: IntRepr },
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            GroupElement::Int(c) => ElementRepr::Coords(c.iter().map(IntRepr::from_big).collect()),
            GroupElement::Rat(r) => {
                ElementRepr::Frac { num: IntRepr::from_big(r.numer()), den: IntRepr::from_big(r.denom()) }
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match ElementRepr::deserialize(d)? {
            ElementRepr::Coords(c) => c
                .into_iter()
                .map(IntRepr::into_big)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(GroupElement::Int)
                .map_err(D::Error::custom),
            ElementRepr::Frac { num, den } => {
                let num = num.into_big().map_err(D::Error::custom)?;
                let den = den.into_big().map_err(D::Error::custom)?;
                if den.is_zero() {
                    return Err(D::Error::custom("zero denominator"));
                }
                Ok(GroupElement::Rat(BigRational::new(num, den)))
            }
        }
    }
}

/// The ordered dual group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderSpec {
    IntLex { n: usize },
    IntQuadratic,
    RatNatural,
}

/// Truncation box: `[−M, M]ⁿ` for the integer groups, fractions `p/q` with
/// `|p| ≤ M`, `1 ≤ q ≤ M` for `ℚ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationBox {
    pub bound: u32,
}

impl TruncationBox {
    pub fn new(bound: u32) -> Self {
        TruncationBox { bound }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeSign {
    /// `X₊`, identity included, ascending.
    Nonneg,
    /// `X₋`, strictly negative, descending (closest to the identity first).
    Neg,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "size")]
pub enum IntervalSize {
    Finite(BigIntJson),
    Infinite,
}

/// `BigInt` wrapper with the JSON integer representation used for elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigIntJson(pub BigInt);

impl Serialize for BigIntJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IntRepr::from_big(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BigIntJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        IntRepr::deserialize(d)?.into_big().map(BigIntJson).map_err(D::Error::custom)
    }
}

/// Outcome of the ideal / translation checks over a box.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealReport {
    pub bound: u32,
    /// Pairs `(x, y)` with `x ∈ X₊∖Xⁱ`, `y ∈ X₊` that were tested.
    pub ideal_pairs: u64,
    /// Pairs `(x, k)` with `x + kχ₁` in the box that were tested.
    pub translate_pairs: u64,
    pub violations: Vec<String>,
}

impl IdealReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn sign_of_quadratic(a: &BigInt, b: &BigInt) -> Ordering {
    // sign of a + b·√2, decided over the integers
    let sa = a.sign();
    let sb = b.sign();
    use num_bigint::Sign::*;
    match (sa, sb) {
        (NoSign, NoSign) => Ordering::Equal,
        (Plus, Plus) | (Plus, NoSign) | (NoSign, Plus) => Ordering::Greater,
        (Minus, Minus) | (Minus, NoSign) | (NoSign, Minus) => Ordering::Less,
        (Plus, Minus) => {
            // a > 0 > b: positive iff a² > 2b²
            (a * a).cmp(&(BigInt::from(2) * b * b))
        }
        (Minus, Plus) => (BigInt::from(2) * b * b).cmp(&(a * a)),
    }
}

impl OrderSpec {
    pub fn rank(&self) -> usize {
        match self {
            OrderSpec::IntLex { n } => *n,
            OrderSpec::IntQuadratic => 2,
            OrderSpec::RatNatural => 1,
        }
    }

    pub fn dense(&self) -> bool {
        !matches!(self, OrderSpec::IntLex { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if let OrderSpec::IntLex { n: 0 } = self {
            return Err(Error::InvalidArgument("IntLex rank must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks that `x` is an element of this group.
    pub fn check(&self, x: &GroupElement) -> Result<()> {
        match (self, x) {
            (OrderSpec::RatNatural, GroupElement::Rat(_)) => Ok(()),
            (OrderSpec::RatNatural, GroupElement::Int(_)) => {
                Err(Error::KindMismatch("rational order, integer element"))
            }
            (_, GroupElement::Rat(_)) => Err(Error::KindMismatch("integer order, rational element")),
            (_, GroupElement::Int(c)) if c.len() != self.rank() => {
                Err(Error::RankMismatch { expected: self.rank(), found: c.len() })
            }
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            OrderSpec::RatNatural => GroupElement::Rat(BigRational::zero()),
            _ => GroupElement::Int(vec![BigInt::zero(); self.rank()]),
        }
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(match (x, y) {
            (GroupElement::Int(a), GroupElement::Int(b)) => {
                GroupElement::Int(a.iter().zip(b).map(|(p, q)| p + q).collect())
            }
            (GroupElement::Rat(a), GroupElement::Rat(b)) => GroupElement::Rat(a + b),
            _ => unreachable!("kinds checked above"),
        })
    }

    pub fn negate(&self, x: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(match x {
            GroupElement::Int(a) => GroupElement::Int(a.iter().map(|v| -v).collect()),
            GroupElement::Rat(r) => GroupElement::Rat(-r),
        })
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.add(x, &self.negate(y)?)
    }

    /// Integer multiple `k·x`.
    pub fn scale(&self, x: &GroupElement, k: i64) -> Result<GroupElement> {
        self.check(x)?;
        let k = BigInt::from(k);
        Ok(match x {
            GroupElement::Int(a) => GroupElement::Int(a.iter().map(|v| v * &k).collect()),
            GroupElement::Rat(r) => GroupElement::Rat(r * BigRational::from_integer(k)),
        })
    }

    fn sign(&self, x: &GroupElement) -> Ordering {
        match (self, x) {
            (OrderSpec::IntLex { .. }, GroupElement::Int(c)) => c
                .iter()
                .map(|v| v.sign())
                .find(|s| *s != num_bigint::Sign::NoSign)
                .map(|s| if s == num_bigint::Sign::Plus { Ordering::Greater } else { Ordering::Less })
                .unwrap_or(Ordering::Equal),
            (OrderSpec::IntQuadratic, GroupElement::Int(c)) => sign_of_quadratic(&c[0], &c[1]),
            (OrderSpec::RatNatural, GroupElement::Rat(r)) => r.cmp(&BigRational::zero()),
            _ => unreachable!("element validated against order"),
        }
    }

    pub fn compare(&self, x: &GroupElement, y: &GroupElement) -> Result<Ordering> {
        let d = self.sub(x, y)?;
        Ok(self.sign(&d))
    }

    pub fn is_positive(&self, x: &GroupElement) -> Result<bool> {
        self.check(x)?;
        Ok(self.sign(x) == Ordering::Greater)
    }

    /// `x ∈ X₊`, identity included.
    pub fn is_nonneg(&self, x: &GroupElement) -> Result<bool> {
        self.check(x)?;
        Ok(self.sign(x) != Ordering::Less)
    }

    pub fn least_positive(&self) -> Option<GroupElement> {
        match self {
            OrderSpec::IntLex { n } => {
                let mut c = vec![0i64; *n];
                c[n - 1] = 1;
                Some(GroupElement::int(&c))
            }
            OrderSpec::IntQuadratic | OrderSpec::RatNatural => None,
        }
    }

    /// `k` with `x = k·χ₁`, or `None` when `x ∉ Xⁱ`.
    pub fn cyclic_exponent(&self, x: &GroupElement) -> Result<Option<BigInt>> {
        self.check(x)?;
        match (self, x) {
            (OrderSpec::IntLex { .. }, GroupElement::Int(c)) => {
                let (last, head) = c.split_last().expect("rank ≥ 1");
                Ok(head.iter().all(Zero::is_zero).then(|| last.clone()))
            }
            _ => Err(Error::NoLeastPositive),
        }
    }

    /// Like [`cyclic_exponent`](Self::cyclic_exponent) but as a machine integer.
    pub fn cyclic_index(&self, x: &GroupElement) -> Result<Option<i64>> {
        Ok(self.cyclic_exponent(x)?.and_then(|k| k.to_i64()))
    }

    /// Cardinality of `[0, x)` for `x > 0`.
    pub fn interval_size(&self, x: &GroupElement) -> Result<IntervalSize> {
        if !self.is_positive(x)? {
            return Err(Error::NotPositive(x.to_string()));
        }
        if self.dense() {
            return Ok(IntervalSize::Infinite);
        }
        Ok(match self.cyclic_exponent(x)? {
            Some(k) => IntervalSize::Finite(BigIntJson(k)),
            None => IntervalSize::Infinite,
        })
    }

    /// All box elements, ascending in the group order.
    pub fn enumerate_box(&self, bx: TruncationBox) -> Vec<GroupElement> {
        let m = bx.bound as i64;
        let mut out: Vec<GroupElement> = match self {
            OrderSpec::IntLex { n } => {
                // lexicographic enumeration is already the group order
                let n = *n;
                let side = (2 * m + 1) as usize;
                let total = side.pow(n as u32);
                let mut v = Vec::with_capacity(total);
                let mut coords = vec![-m; n];
                for _ in 0..total {
                    v.push(GroupElement::int(&coords));
                    for i in (0..n).rev() {
                        if coords[i] < m {
                            coords[i] += 1;
                            break;
                        }
                        coords[i] = -m;
                    }
                }
                return v;
            }
            OrderSpec::IntQuadratic => {
                let mut v = Vec::new();
                for a in -m..=m {
                    for b in -m..=m {
                        v.push(GroupElement::int(&[a, b]));
                    }
                }
                v
            }
            OrderSpec::RatNatural => {
                let mut v = Vec::new();
                for q in 1..=m.max(1) {
                    for p in -m..=m {
                        v.push(GroupElement::Rat(BigRational::new(p.into(), q.into())));
                    }
                }
                v.sort();
                v.dedup();
                v
            }
        };
        out.sort_by(|x, y| self.compare(x, y).expect("box elements are valid"));
        out
    }

    pub fn enumerate_cone(&self, bx: TruncationBox, sign: ConeSign) -> Vec<GroupElement> {
        let all = self.enumerate_box(bx);
        match sign {
            ConeSign::Nonneg => all.into_iter().filter(|x| self.sign(x) != Ordering::Less).collect(),
            ConeSign::Neg => {
                let mut v: Vec<_> = all.into_iter().filter(|x| self.sign(x) == Ordering::Less).collect();
                v.reverse();
                v
            }
        }
    }

    /// `x ∈ X₊∖Xⁱ`.
    pub fn in_ideal(&self, x: &GroupElement) -> Result<bool> {
        Ok(self.is_nonneg(x)? && self.cyclic_exponent(x)?.is_none())
    }

    /// Checks on every element of the box that `X₊∖Xⁱ` is an ideal of `X₊`
    /// and that translation by any multiple of `χ₁` maps `X₊∖Xⁱ` onto itself
    /// (pairs whose translate stays inside the box).
    pub fn ideal_check(&self, bx: TruncationBox) -> Result<IdealReport> {
        let chi1 = self.least_positive().ok_or(Error::NoLeastPositive)?;
        let m = bx.bound as i64;
        let nonneg = self.enumerate_cone(bx, ConeSign::Nonneg);
        let ideal: Vec<&GroupElement> =
            nonneg.iter().filter(|x| self.cyclic_exponent(x).map(|k| k.is_none()).unwrap_or(false)).collect();
        let in_box = |x: &GroupElement| match x {
            GroupElement::Int(c) => c.iter().all(|v| v.abs() <= BigInt::from(m)),
            GroupElement::Rat(_) => false,
        };

        let first: Vec<(u64, Vec<String>)> = ideal
            .par_iter()
            .map(|x| {
                let mut count = 0u64;
                let mut bad = Vec::new();
                for y in &nonneg {
                    count += 1;
                    let s = self.add(x, y).expect("valid");
                    if !self.in_ideal(&s).expect("valid") {
                        bad.push(format!("ideal: {x} + {y} = {s} left X+ minus X^i"));
                    }
                }
                (count, bad)
            })
            .collect();

        let shifts: Vec<GroupElement> =
            (-2 * m..=2 * m).filter(|k| *k != 0).map(|k| self.scale(&chi1, k).expect("valid")).collect();
        let second: Vec<(u64, Vec<String>)> = ideal
            .par_iter()
            .map(|x| {
                let mut count = 0u64;
                let mut bad = Vec::new();
                for s in &shifts {
                    let t = self.add(x, s).expect("valid");
                    if !in_box(&t) {
                        continue;
                    }
                    count += 1;
                    if !self.in_ideal(&t).expect("valid") {
                        bad.push(format!("translate: {x} + {s} = {t} left X+ minus X^i"));
                    }
                }
                (count, bad)
            })
            .collect();

        let mut report = IdealReport { bound: bx.bound, ..Default::default() };
        for (c, b) in first {
            report.ideal_pairs += c;
            report.violations.extend(b);
        }
        for (c, b) in second {
            report.translate_pairs += c;
            report.violations.extend(b);
        }
        Ok(report)
    }
}
