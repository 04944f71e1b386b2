//! Signed sums of square roots.
//!
//! A [`RootSumExpr`] is `Σ εᵢ√aᵢ` with `εᵢ = ±1`. This module decides
//! exactly whether such a sum is an integer (by grouping terms on their
//! squarefree parts), bounds its distance to the integers from below with
//! a conjugate-product argument, and evaluates that distance in interval
//! arithmetic, raising precision until the enclosure is definitive.
//!
//! The bound works on the canonical form `c₁ + Σ c_d√d` over distinct
//! squarefree `d > 1` with every `c_d ≠ 0`. For an integer `m` the product
//! of `q(m + y) − q(c₁ + Σ ±c_d√d)` over all `2^t` sign patterns is an
//! integer, and it is nonzero because the radicals are linearly independent
//! over ℚ. So `|value − m − y| ≥ 1 / (q · M^(2^t − 1))`, where `M` bounds the
//! other conjugate factors and `y = p/q` is the target offset.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bigfix::{
    frac_nearest, parse_decimal, sqrt_enclosure, to_scientific, BigFixError, FixedPoint, Interval,
    Nearest, Rounding,
};
use crate::numbertheory::{squarefree_decompose, FactorError};

/// Working precision of the first evaluation attempt.
pub const INITIAL_PRECISION_BITS: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootSumError {
    #[error("expression has no terms")]
    Empty,
    #[error("radicand must be positive (term {term})")]
    ZeroRadicand { term: usize },
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    BigFix(#[from] BigFixError),
    #[error("expression is exactly an integer; no separation bound applies")]
    ExactInteger,
    #[error("expression value is rational; no separation bound applies")]
    Rational,
    #[error("offset must lie in [0, 1)")]
    OffsetRange,
    #[error("separation bound exceeded at {bits} bits without a decision")]
    BoundViolated { bits: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermSign {
    Plus,
    Minus,
}

impl TermSign {
    pub fn as_i64(self) -> i64 {
        match self {
            TermSign::Plus => 1,
            TermSign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub radicand: u64,
    pub sign: TermSign,
}

impl Term {
    pub fn plus(radicand: u64) -> Self {
        Term {
            radicand,
            sign: TermSign::Plus,
        }
    }

    pub fn minus(radicand: u64) -> Self {
        Term {
            radicand,
            sign: TermSign::Minus,
        }
    }
}

/// `Σ εᵢ√aᵢ`. Radicands may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootSumExpr {
    terms: Vec<Term>,
}

impl RootSumExpr {
    pub fn new(terms: Vec<Term>) -> Result<Self, RootSumError> {
        if terms.is_empty() {
            return Err(RootSumError::Empty);
        }
        if let Some(term) = terms.iter().position(|t| t.radicand == 0) {
            return Err(RootSumError::ZeroRadicand { term });
        }
        Ok(RootSumExpr { terms })
    }

    /// All signs positive: the near-integer problem proper.
    pub fn unsigned(radicands: &[u64]) -> Result<Self, RootSumError> {
        RootSumExpr::new(radicands.iter().map(|&a| Term::plus(a)).collect())
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn n_max(&self) -> u64 {
        self.terms.iter().map(|t| t.radicand).max().unwrap_or(0)
    }

    pub fn is_unsigned(&self) -> bool {
        self.terms.iter().all(|t| t.sign == TermSign::Plus)
    }

    /// Net integer multiplicity of each distinct radicand.
    fn multiplicities(&self) -> BTreeMap<u64, i64> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            *out.entry(t.radicand).or_insert(0) += t.sign.as_i64();
        }
        out
    }

    /// Sum of `|net multiplicity|`, the factor by which per-root widths add up.
    fn weight(&self) -> u64 {
        self.multiplicities().values().map(|c| c.unsigned_abs()).sum()
    }

    /// Enclosure of the value with per-root width `2^(−precision_bits)`;
    /// a precision of 0 is treated as 1.
    pub fn enclose(&self, precision_bits: u32) -> Interval {
        let precision_bits = precision_bits.max(1);
        let mut acc = Interval::from_integer(0);
        for (a, c) in self.multiplicities() {
            if c == 0 {
                continue;
            }
            let root = sqrt_enclosure(a, precision_bits).expect("radicands are positive");
            acc = acc.add(&root.mul_int(&BigInt::from(c)));
        }
        acc
    }

    /// Approximate value; not certified.
    pub fn approx(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.sign.as_i64() as f64 * (t.radicand as f64).sqrt())
            .sum()
    }
}

impl fmt::Display for RootSumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let s = if t.sign == TermSign::Plus { '+' } else { '-' };
            write!(f, "{s}{}", t.radicand)?;
        }
        Ok(())
    }
}

/// Parses whitespace- or comma-separated radicands with optional signs,
/// e.g. `"+3 +20 +23"` or `"29 1097 3153 -226 -2324 -987"`.
impl FromStr for RootSumExpr {
    type Err = RootSumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut terms = Vec::new();
        let mut chars = s.char_indices().peekable();
        while let Some(&(start, c)) = chars.peek() {
            if c.is_whitespace() || c == ',' {
                chars.next();
                continue;
            }
            let column = s[..start].chars().count() + 1;
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_whitespace() || c == ',' {
                    break;
                }
                end = i + c.len_utf8();
                chars.next();
            }
            let token = &s[start..end];
            let (sign, digits) = match token.as_bytes()[0] {
                b'+' => (TermSign::Plus, &token[1..]),
                b'-' => (TermSign::Minus, &token[1..]),
                _ => (TermSign::Plus, token),
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(RootSumError::Parse {
                    column,
                    message: format!("expected a signed integer radicand, found {token:?}"),
                });
            }
            let radicand: u64 = digits.parse().map_err(|_| RootSumError::Parse {
                column,
                message: format!("radicand {digits} does not fit in 64 bits"),
            })?;
            if radicand == 0 {
                return Err(RootSumError::Parse {
                    column,
                    message: "radicand 0 is not allowed".to_string(),
                });
            }
            terms.push(Term { radicand, sign });
        }
        RootSumExpr::new(terms)
    }
}

/// `c₁ + Σ c_d·√d` over distinct squarefree `d > 1`, all `c_d ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalRadicalForm {
    pub rational_part: BigInt,
    pub radical_terms: BTreeMap<u64, BigInt>,
}

impl CanonicalRadicalForm {
    pub fn is_rational(&self) -> bool {
        self.radical_terms.is_empty()
    }

    /// Number of distinct radicals `t`.
    pub fn radical_count(&self) -> usize {
        self.radical_terms.len()
    }

    pub fn enclose(&self, precision_bits: u32) -> Interval {
        let mut acc = Interval::from_integer(self.rational_part.clone());
        for (&d, c) in &self.radical_terms {
            let root = sqrt_enclosure(d, precision_bits.max(1)).expect("squarefree parts are positive");
            acc = acc.add(&root.mul_int(c));
        }
        acc
    }

    /// Certified upper bound on `Σ |c_d|·√d`.
    fn radical_magnitude_upper(&self, precision_bits: u32) -> FixedPoint {
        let mut acc = FixedPoint::zero();
        for (&d, c) in &self.radical_terms {
            let root = sqrt_enclosure(d, precision_bits).expect("squarefree parts are positive");
            acc = &acc + &root.hi().mul_int(&c.abs());
        }
        acc
    }
}

pub fn canonicalize(e: &RootSumExpr) -> Result<CanonicalRadicalForm, RootSumError> {
    let mut rational_part = BigInt::zero();
    let mut radical_terms: BTreeMap<u64, BigInt> = BTreeMap::new();
    for (a, c) in e.multiplicities() {
        if c == 0 {
            continue;
        }
        let dec = squarefree_decompose(a)?;
        let coeff = BigInt::from(c) * BigInt::from(dec.square_root);
        if dec.squarefree == 1 {
            rational_part += coeff;
        } else {
            *radical_terms.entry(dec.squarefree).or_insert_with(BigInt::zero) += coeff;
        }
    }
    radical_terms.retain(|_, c| !c.is_zero());
    Ok(CanonicalRadicalForm {
        rational_part,
        radical_terms,
    })
}

/// `Some(value)` iff the expression is exactly an integer.
pub fn is_integer(e: &RootSumExpr) -> Result<Option<BigInt>, RootSumError> {
    let form = canonicalize(e)?;
    Ok(form.is_rational().then_some(form.rational_part))
}

/// Target offset `y ∈ [0, 1)`: distances are measured to `ℤ + y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Offset(BigRational);

impl Offset {
    pub fn zero() -> Self {
        Offset(BigRational::zero())
    }

    pub fn new(y: BigRational) -> Result<Self, RootSumError> {
        if y.is_negative() || y >= BigRational::one() {
            return Err(RootSumError::OffsetRange);
        }
        Ok(Offset(y))
    }

    pub fn parse(text: &str) -> Result<Self, RootSumError> {
        Offset::new(parse_decimal(text)?)
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn shifted_half(&self) -> Offset {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut y = &self.0 + half;
        if y >= BigRational::one() {
            y -= BigRational::one();
        }
        Offset(y)
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn log2_upper(x: &FixedPoint) -> f64 {
    let v = x.to_f64();
    if v <= 1.0 {
        0.0
    } else {
        v.log2() * (1.0 + 1e-12) + 1e-9
    }
}

/// Lower bound on `|value − m − y|` over every integer `m` that can be
/// nearest to `value − y`, as `1 / (q · M^N)`, with `N = 2^t − 1`.
struct TargetBound {
    denominator: BigInt,
    factor_bound: FixedPoint,
    exponent: u64,
}

impl TargetBound {
    fn compute(form: &CanonicalRadicalForm, offset: &Offset, fixed_m: Option<&BigInt>) -> Self {
        let bits = 64;
        let p = offset.value().numer().clone();
        let q = offset.value().denom().clone();
        let magnitude = form.radical_magnitude_upper(bits);
        let candidates: Vec<BigInt> = match fixed_m {
            Some(m) => vec![m.clone()],
            None => {
                let approx = form.enclose(bits);
                let y = Interval::from_rational(offset.value(), bits);
                let shifted = approx.sub(&y);
                let half = FixedPoint::new(BigInt::one(), 1);
                let lo = (shifted.lo() - &half).floor();
                let hi = (shifted.hi() + &half).ceil();
                vec![lo, hi]
            }
        };
        // |q(c₁ − m) − p| is convex in m, so the extreme candidates suffice.
        let rational_gap = candidates
            .iter()
            .map(|m| (&q * (&form.rational_part - m) - &p).abs())
            .max()
            .unwrap_or_else(BigInt::zero);
        let factor_bound = &FixedPoint::from_integer(rational_gap) + &magnitude.mul_int(&q);
        let t = form.radical_count() as u32;
        let exponent = if t >= 64 { u64::MAX } else { (1u64 << t) - 1 };
        TargetBound {
            denominator: q,
            factor_bound,
            exponent,
        }
    }

    /// `−log₂` of the bound, rounded up.
    fn bits(&self) -> u64 {
        let q_bits = self.denominator.bits() as f64;
        let total = q_bits + self.exponent as f64 * log2_upper(&self.factor_bound);
        if total.is_finite() && total < 1e15 {
            total.ceil() as u64 + 1
        } else {
            u64::MAX
        }
    }

    fn as_rational(&self) -> BigRational {
        let m = self.factor_bound.to_rational().max(BigRational::one());
        let exponent = usize::try_from(self.exponent).expect("separation exponent fits in memory");
        let power = num_traits::pow(m, exponent);
        BigRational::one() / (power * BigRational::from_integer(self.denominator.clone()))
    }
}

/// Positive rational `B` with `‖value(e)‖ ≥ B`.
pub fn separation_bound(e: &RootSumExpr) -> Result<BigRational, RootSumError> {
    separation_bound_to(e, &Offset::zero())
}

/// Positive rational `B` with `|value(e) − m − y| ≥ B` for every integer `m`.
pub fn separation_bound_to(e: &RootSumExpr, offset: &Offset) -> Result<BigRational, RootSumError> {
    let form = canonicalize(e)?;
    if form.is_rational() {
        return Err(if offset.is_zero() {
            RootSumError::ExactInteger
        } else {
            RootSumError::Rational
        });
    }
    Ok(TargetBound::compute(&form, offset, None).as_rational())
}

/// `−log₂` of the separation bound, without forming the (possibly huge)
/// rational.
pub fn separation_bits(e: &RootSumExpr, offset: &Offset) -> Result<u64, RootSumError> {
    let form = canonicalize(e)?;
    if form.is_rational() {
        return Err(RootSumError::Rational);
    }
    Ok(TargetBound::compute(&form, offset, None).bits())
}

/// Certified answer to "how far is this sum from `ℤ + y`".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceCertificate {
    pub nearest_integer: BigInt,
    pub distance_enclosure: Interval,
    pub precision_bits: u32,
    pub exactly_integer: bool,
}

impl DistanceCertificate {
    /// Midpoint to `digits` significant digits and a certified radius
    /// covering the whole enclosure around that decimal.
    pub fn decimal(&self, digits: usize) -> (String, String) {
        enclosure_decimal(&self.distance_enclosure, digits)
    }

    pub fn distance_f64(&self) -> f64 {
        self.distance_enclosure.midpoint().to_f64()
    }
}

/// `value ± radius` rendering of an enclosure; the radius is rounded up.
pub fn enclosure_decimal(x: &Interval, digits: usize) -> (String, String) {
    let lo = x.lo().to_rational();
    let hi = x.hi().to_rational();
    if lo == hi && lo.is_zero() {
        return ("0".to_string(), "0".to_string());
    }
    let mid = x.midpoint().to_rational();
    let text = to_scientific(&mid, digits, Rounding::Nearest);
    let shown = parse_decimal(&text).expect("formatter emits valid decimals");
    let radius = (&hi - &shown).abs().max((&shown - &lo).abs());
    let radius_text = if radius.is_zero() {
        "0".to_string()
    } else {
        to_scientific(&radius, 3, Rounding::Up)
    };
    (text, radius_text)
}

fn guard_bits(weight: u64) -> u32 {
    64 - weight.max(1).leading_zeros() + 2
}

/// `‖value(e)‖` with a definitive enclosure, starting at 128 bits.
pub fn certified_distance(e: &RootSumExpr) -> Result<DistanceCertificate, RootSumError> {
    certified_distance_to(e, &Offset::zero(), INITIAL_PRECISION_BITS)
}

/// Distance from `value(e)` to `ℤ + y`.
///
/// Evaluates at `max(requested_bits, 128)` plus guard bits and doubles the
/// precision until the distance enclosure is bounded away from zero and the
/// nearest point of `ℤ + y` is unambiguous. The separation bounds for `y`
/// and `y + 1/2` cap the precision this can take.
pub fn certified_distance_to(
    e: &RootSumExpr,
    offset: &Offset,
    requested_bits: u32,
) -> Result<DistanceCertificate, RootSumError> {
    let form = canonicalize(e)?;
    let requested_bits = requested_bits.max(1);
    if form.is_rational() {
        return Ok(rational_distance(&form.rational_part, offset, requested_bits));
    }
    let guard = guard_bits(e.weight());
    let mut bits = requested_bits.max(INITIAL_PRECISION_BITS) + guard;
    let mut cap: Option<u64> = None;
    loop {
        let value = e.enclose(bits);
        let target = Interval::from_rational(offset.value(), bits + guard);
        let shifted = value.sub(&target);
        if let Nearest::Resolved { nearest, distance } = frac_nearest(&shifted)? {
            if distance.lo() > &FixedPoint::zero() {
                return Ok(DistanceCertificate {
                    nearest_integer: nearest,
                    distance_enclosure: distance,
                    precision_bits: bits,
                    exactly_integer: false,
                });
            }
        }
        let limit = *cap.get_or_insert_with(|| {
            let near = TargetBound::compute(&form, offset, None).bits();
            let half = TargetBound::compute(&form, &offset.shifted_half(), None).bits();
            near.max(half).saturating_add(guard as u64 + 2)
        });
        if bits as u64 > limit {
            return Err(RootSumError::BoundViolated { bits: bits as u64 });
        }
        bits = bits.checked_mul(2).ok_or(RootSumError::BoundViolated { bits: bits as u64 })?;
    }
}

/// The precision at which [`certified_distance_to`] is guaranteed to stop.
pub fn termination_bits(e: &RootSumExpr, offset: &Offset) -> Result<u64, RootSumError> {
    let form = canonicalize(e)?;
    if form.is_rational() {
        return Ok(0);
    }
    let guard = guard_bits(e.weight()) as u64;
    let near = TargetBound::compute(&form, offset, None).bits();
    let half = TargetBound::compute(&form, &offset.shifted_half(), None).bits();
    Ok(near.max(half).saturating_add(guard + 2))
}

fn rational_distance(c: &BigInt, offset: &Offset, requested_bits: u32) -> DistanceCertificate {
    let y = offset.value();
    let value = BigRational::from_integer(c.clone()) - y;
    let nearest = value.round().to_integer();
    let exact = (&value - BigRational::from_integer(nearest.clone())).abs();
    if exact.is_zero() {
        return DistanceCertificate {
            nearest_integer: nearest,
            distance_enclosure: Interval::from_integer(0),
            precision_bits: 0,
            exactly_integer: true,
        };
    }
    let mut bits = requested_bits.max(INITIAL_PRECISION_BITS);
    loop {
        let enclosure = Interval::from_rational(&exact, bits);
        if enclosure.lo() > &FixedPoint::zero() {
            return DistanceCertificate {
                nearest_integer: nearest,
                distance_enclosure: enclosure,
                precision_bits: bits,
                exactly_integer: false,
            };
        }
        bits *= 2;
    }
}

/// Exact sign of the expression.
pub fn certified_sign(e: &RootSumExpr) -> Result<Ordering, RootSumError> {
    let form = canonicalize(e)?;
    if form.is_rational() {
        return Ok(form.rational_part.cmp(&BigInt::zero()));
    }
    let zero = BigInt::zero();
    let cap = TargetBound::compute(&form, &Offset::zero(), Some(&zero))
        .bits()
        .saturating_add(guard_bits(e.weight()) as u64 + 2);
    let mut bits = INITIAL_PRECISION_BITS;
    loop {
        let value = e.enclose(bits);
        if value.lo() > &FixedPoint::zero() {
            return Ok(Ordering::Greater);
        }
        if value.hi() < &FixedPoint::zero() {
            return Ok(Ordering::Less);
        }
        if bits as u64 > cap {
            return Err(RootSumError::BoundViolated { bits: bits as u64 });
        }
        bits *= 2;
    }
}

/// Whether two certificates have exactly equal distances, decided without
/// numerics: `|u − m| = |v − n|` iff `u − m ∓ (v − n)` is exactly zero.
pub fn distances_equal(
    a: &RootSumExpr,
    a_nearest: &BigInt,
    b: &RootSumExpr,
    b_nearest: &BigInt,
) -> Result<bool, RootSumError> {
    let fa = canonicalize(a)?;
    let fb = canonicalize(b)?;
    let same = |sign: i32| -> bool {
        let mut radicals = fa.radical_terms.clone();
        for (d, c) in &fb.radical_terms {
            let entry = radicals.entry(*d).or_insert_with(BigInt::zero);
            *entry -= c * sign;
        }
        radicals.retain(|_, c| !c.is_zero());
        let rational =
            (&fa.rational_part - a_nearest) - (&fb.rational_part - b_nearest) * BigInt::from(sign);
        radicals.is_empty() && rational.is_zero()
    };
    Ok(same(1) || same(-1))
}
