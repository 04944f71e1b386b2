//! Dyadic fixed-point numbers and outward-rounded intervals.
//!
//! A [`FixedPoint`] is `mantissa · 2^(−scale)` with an arbitrary-size
//! mantissa, so every value it holds is represented exactly. An
//! [`Interval`] is a pair of such values that encloses some real number;
//! every operation here either is exact or rounds its endpoints outward.
//! Nothing in this module touches floating point except the explicit
//! `to_f64` conversions used for display and prefiltering.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BigFixError {
    #[error("square root of non-positive radicand {0}")]
    NonPositiveRadicand(BigInt),
    #[error("precision must be at least one bit")]
    ZeroPrecision,
    #[error("interval endpoints are inverted")]
    InvertedEndpoints,
    #[error("interval is too wide to locate a nearest integer (width must be below 1/4)")]
    TooWide,
    #[error("malformed decimal literal {0:?}")]
    BadDecimal(String),
}

/// `mantissa · 2^(−scale)`.
#[derive(Clone, Debug)]
pub struct FixedPoint {
    mantissa: BigInt,
    scale: u32,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

impl FixedPoint {
    pub fn new(mantissa: BigInt, scale: u32) -> Self {
        FixedPoint { mantissa, scale }
    }

    pub fn zero() -> Self {
        FixedPoint::new(BigInt::zero(), 0)
    }

    pub fn from_integer<T: Into<BigInt>>(value: T) -> Self {
        FixedPoint::new(value.into(), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Re-express at `scale`, exact when growing the scale, rounding toward
    /// −∞ when shrinking it.
    pub fn rescale_floor(&self, scale: u32) -> Self {
        if scale >= self.scale {
            FixedPoint::new(&self.mantissa << (scale - self.scale), scale)
        } else {
            let divisor = pow2(self.scale - scale);
            FixedPoint::new(self.mantissa.div_floor(&divisor), scale)
        }
    }

    /// Re-express at `scale`, rounding toward +∞ when shrinking it.
    pub fn rescale_ceil(&self, scale: u32) -> Self {
        if scale >= self.scale {
            FixedPoint::new(&self.mantissa << (scale - self.scale), scale)
        } else {
            let divisor = pow2(self.scale - scale);
            FixedPoint::new(self.mantissa.div_ceil(&divisor), scale)
        }
    }

    fn aligned(&self, other: &FixedPoint) -> (BigInt, BigInt, u32) {
        let scale = self.scale.max(other.scale);
        let a = &self.mantissa << (scale - self.scale);
        let b = &other.mantissa << (scale - other.scale);
        (a, b, scale)
    }

    pub fn mul_int(&self, factor: &BigInt) -> Self {
        FixedPoint::new(&self.mantissa * factor, self.scale)
    }

    pub fn mul(&self, other: &FixedPoint) -> Self {
        FixedPoint::new(&self.mantissa * &other.mantissa, self.scale + other.scale)
    }

    /// Multiply by `2^(−bits)`; exact.
    pub fn shr_exact(&self, bits: u32) -> Self {
        FixedPoint::new(self.mantissa.clone(), self.scale + bits)
    }

    pub fn abs(&self) -> Self {
        FixedPoint::new(self.mantissa.abs(), self.scale)
    }

    pub fn floor(&self) -> BigInt {
        self.mantissa.div_floor(&pow2(self.scale))
    }

    pub fn ceil(&self) -> BigInt {
        self.mantissa.div_ceil(&pow2(self.scale))
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), pow2(self.scale))
    }

    /// Largest value at `scale` that is ≤ `r`.
    pub fn from_rational_floor(r: &BigRational, scale: u32) -> Self {
        let num = r.numer() << scale;
        FixedPoint::new(num.div_floor(r.denom()), scale)
    }

    /// Smallest value at `scale` that is ≥ `r`.
    pub fn from_rational_ceil(r: &BigRational, scale: u32) -> Self {
        let num = r.numer() << scale;
        FixedPoint::new(num.div_ceil(r.denom()), scale)
    }

    /// Nearest double; used only for display and non-certified filters.
    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.bits();
        if bits <= 64 {
            let m = self.mantissa.to_f64().unwrap_or(f64::NAN);
            return ldexp(m, -(self.scale as i64));
        }
        let drop = bits - 64;
        let top = (&self.mantissa >> drop).to_f64().unwrap_or(f64::NAN);
        ldexp(top, drop as i64 - self.scale as i64)
    }
}

/// `x · 2^exp` without intermediate overflow for moderate exponents.
pub(crate) fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(exp as i32)
}

impl PartialEq for FixedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FixedPoint {}

impl PartialOrd for FixedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl Add for &FixedPoint {
    type Output = FixedPoint;
    fn add(self, rhs: &FixedPoint) -> FixedPoint {
        let (a, b, scale) = self.aligned(rhs);
        FixedPoint::new(a + b, scale)
    }
}

impl Sub for &FixedPoint {
    type Output = FixedPoint;
    fn sub(self, rhs: &FixedPoint) -> FixedPoint {
        let (a, b, scale) = self.aligned(rhs);
        FixedPoint::new(a - b, scale)
    }
}

impl Neg for &FixedPoint {
    type Output = FixedPoint;
    fn neg(self) -> FixedPoint {
        FixedPoint::new(-&self.mantissa, self.scale)
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_scientific(&self.to_rational(), 20, Rounding::Nearest))
    }
}

/// Closed interval `[lo, hi]` with fixed-point endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: FixedPoint,
    hi: FixedPoint,
}

impl Interval {
    pub fn new(lo: FixedPoint, hi: FixedPoint) -> Result<Self, BigFixError> {
        if lo > hi {
            return Err(BigFixError::InvertedEndpoints);
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(value: FixedPoint) -> Self {
        Interval {
            lo: value.clone(),
            hi: value,
        }
    }

    pub fn from_integer<T: Into<BigInt>>(value: T) -> Self {
        Interval::point(FixedPoint::from_integer(value))
    }

    /// Tightest dyadic enclosure of `r` at `scale` bits.
    pub fn from_rational(r: &BigRational, scale: u32) -> Self {
        Interval {
            lo: FixedPoint::from_rational_floor(r, scale),
            hi: FixedPoint::from_rational_ceil(r, scale),
        }
    }

    pub fn lo(&self) -> &FixedPoint {
        &self.lo
    }

    pub fn hi(&self) -> &FixedPoint {
        &self.hi
    }

    pub fn width(&self) -> FixedPoint {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &FixedPoint) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_rational(&self, x: &BigRational) -> bool {
        &self.lo.to_rational() <= x && x <= &self.hi.to_rational()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Exact midpoint.
    pub fn midpoint(&self) -> FixedPoint {
        (&self.lo + &self.hi).shr_exact(1)
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        interval_add(self, other)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn mul_int(&self, factor: &BigInt) -> Interval {
        let a = self.lo.mul_int(factor);
        let b = self.hi.mul_int(factor);
        if factor.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let products = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = products.iter().min().cloned().unwrap_or_else(FixedPoint::zero);
        let hi = products.iter().max().cloned().unwrap_or_else(FixedPoint::zero);
        Interval { lo, hi }
    }

    /// `{ |x| : x ∈ self }`.
    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if self.hi.is_negative() || self.hi.is_zero() {
            self.neg()
        } else {
            let hi = (-&self.lo).max(self.hi.clone());
            Interval {
                lo: FixedPoint::zero(),
                hi,
            }
        }
    }

    /// Round both endpoints outward to `scale` bits.
    pub fn round_outward(&self, scale: u32) -> Interval {
        Interval {
            lo: self.lo.rescale_floor(scale),
            hi: self.hi.rescale_ceil(scale),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            to_scientific(&self.lo.to_rational(), 20, Rounding::Down),
            to_scientific(&self.hi.to_rational(), 20, Rounding::Up)
        )
    }
}

/// Sum of two enclosures. Endpoints are added exactly after aligning
/// scales, so the width is exactly the sum of the widths.
pub fn interval_add(x: &Interval, y: &Interval) -> Interval {
    Interval {
        lo: &x.lo + &y.lo,
        hi: &x.hi + &y.hi,
    }
}

/// `⌊√n⌋` by integer Newton iteration.
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    // Start above the root; the iteration then decreases monotonically.
    let mut x = BigUint::one() << n.bits().div_ceil(2);
    loop {
        let next = (&x + n / &x) >> 1u32;
        if next >= x {
            return x;
        }
        x = next;
    }
}

pub fn isqrt_u64(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Enclosure of `√a` of width at most `2^(−precision_bits)`.
///
/// With `r = ⌊√(a·4^p)⌋` the result is `[r, r+1]·2^(−p)`, or the exact point
/// when `a·4^p` is a perfect square.
pub fn sqrt_enclosure<T: Into<BigInt>>(a: T, precision_bits: u32) -> Result<Interval, BigFixError> {
    let a = a.into();
    if a.sign() != Sign::Plus {
        return Err(BigFixError::NonPositiveRadicand(a));
    }
    if precision_bits == 0 {
        return Err(BigFixError::ZeroPrecision);
    }
    let scaled = a.magnitude() << (2 * precision_bits);
    let root = isqrt(&scaled);
    let exact = &root * &root == scaled;
    let lo = BigInt::from(root);
    let hi = if exact { lo.clone() } else { &lo + 1u32 };
    Ok(Interval {
        lo: FixedPoint::new(lo, precision_bits),
        hi: FixedPoint::new(hi, precision_bits),
    })
}

/// Result of locating the integer nearest to an enclosed value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nearest {
    Resolved { nearest: BigInt, distance: Interval },
    /// The enclosure touches or straddles a half-integer.
    Indeterminate,
}

/// Nearest integer `m` to the enclosed value and an enclosure of `|x − m|`.
pub fn frac_nearest(x: &Interval) -> Result<Nearest, BigFixError> {
    let quarter = FixedPoint::new(BigInt::one(), 2);
    if x.width() >= quarter {
        return Err(BigFixError::TooWide);
    }
    let half = FixedPoint::new(BigInt::one(), 1);
    let shifted = &x.lo + &half;
    let m = shifted.floor();
    let m_fp = FixedPoint::from_integer(m.clone());
    // lo + 1/2 an integer means lo sits on a half-integer.
    if shifted == m_fp || x.hi >= &m_fp + &half {
        return Ok(Nearest::Indeterminate);
    }
    let lo = &x.lo - &m_fp;
    let hi = &x.hi - &m_fp;
    let distance = Interval { lo, hi }.abs();
    Ok(Nearest::Resolved {
        nearest: m,
        distance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Toward −∞.
    Down,
    /// Toward +∞.
    Up,
    Nearest,
}

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), e as usize)
}

/// Scientific notation with `sig` significant digits, rounded as requested.
pub fn to_scientific(value: &BigRational, sig: usize, rounding: Rounding) -> String {
    let sig = sig.max(1);
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let mag = value.abs();
    // Decimal exponent estimate from bit lengths, then corrected exactly.
    let bits = mag.numer().bits() as f64 - mag.denom().bits() as f64;
    let mut exp = (bits * std::f64::consts::LOG10_2).floor() as i64;
    let pow = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(pow10(e as u32))
        } else {
            BigRational::new(BigInt::one(), pow10((-e) as u32))
        }
    };
    while pow(exp) > mag {
        exp -= 1;
    }
    while pow(exp + 1) <= mag {
        exp += 1;
    }
    let scaled = &mag * pow(sig as i64 - 1 - exp);
    // Rounding direction applies to the signed value.
    let mut digits = match (rounding, negative) {
        (Rounding::Nearest, _) => scaled.round().to_integer(),
        (Rounding::Down, false) | (Rounding::Up, true) => scaled.floor().to_integer(),
        (Rounding::Up, false) | (Rounding::Down, true) => scaled.ceil().to_integer(),
    };
    if digits >= pow10(sig as u32) {
        digits /= BigInt::from(10u32);
        exp += 1;
    }
    let text = digits.to_string();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&text[..1]);
    if text.len() > 1 {
        out.push('.');
        out.push_str(&text[1..]);
    }
    out.push_str(&format!("e{exp}"));
    out
}

/// Parse `"0.001"`, `"1e-4"`, `"-2.5E3"` and friends into an exact rational.
pub fn parse_decimal(text: &str) -> Result<BigRational, BigFixError> {
    let bad = || BigFixError::BadDecimal(text.to_string());
    let s = text.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0")
        .parse::<BigInt>()
        .map_err(|_| bad())?
        / BigInt::from(10u32);
    let exp10 = exponent - frac_part.len() as i64;
    if exp10.unsigned_abs() > 10_000 {
        return Err(bad());
    }
    let mut r = if exp10 >= 0 {
        BigRational::from_integer(digits * pow10(exp10 as u32))
    } else {
        BigRational::new(digits, pow10((-exp10) as u32))
    };
    if negative {
        r = -r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(m: i64, scale: u32) -> FixedPoint {
        FixedPoint::new(BigInt::from(m), scale)
    }

    fn iv(lo: f64, hi: f64) -> Interval {
        let s = 40;
        Interval::new(
            FixedPoint::new(BigInt::from((lo * (1u64 << s) as f64).floor() as i64), s),
            FixedPoint::new(BigInt::from((hi * (1u64 << s) as f64).ceil() as i64), s),
        )
        .unwrap()
    }

    #[test]
    fn perfect_square_is_point() {
        let e = sqrt_enclosure(4, 64).unwrap();
        assert!(e.is_point());
        assert_eq!(*e.lo(), FixedPoint::from_integer(2));
    }

    #[test]
    fn sqrt_rejects_nonpositive() {
        assert!(matches!(
            sqrt_enclosure(0, 10),
            Err(BigFixError::NonPositiveRadicand(_))
        ));
        assert!(sqrt_enclosure(-3, 10).is_err());
        assert_eq!(sqrt_enclosure(3, 0), Err(BigFixError::ZeroPrecision));
    }

    #[test]
    fn sqrt_two_and_twenty_three() {
        let e = sqrt_enclosure(2, 64).unwrap();
        assert!(e.width() <= fp(1, 64));
        assert!((e.midpoint().to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        let e = sqrt_enclosure(23, 30).unwrap();
        assert!(e.width() <= fp(1, 30));
        // 4.79583152331271954159743806416 truncated to 30 bits either side.
        let inside = parse_decimal("4.795831523312719541597438").unwrap();
        assert!(e.contains_rational(&inside));
    }

    #[test]
    fn add_points_and_widths() {
        let r = interval_add(&Interval::from_integer(1), &Interval::from_integer(2));
        assert_eq!(r, Interval::from_integer(3));
        let eps = Interval::new(fp(0, 10), fp(1, 10)).unwrap();
        let r = interval_add(&eps, &eps);
        assert_eq!(*r.lo(), fp(0, 0));
        assert_eq!(*r.hi(), fp(2, 10));
        let three_root_two = interval_add(
            &sqrt_enclosure(2, 64).unwrap(),
            &sqrt_enclosure(8, 64).unwrap(),
        );
        let oracle = parse_decimal("4.242640687119285146405066172629").unwrap();
        assert!(three_root_two.contains_rational(&oracle));
        assert!(three_root_two.width() <= fp(2, 64));
    }

    #[test]
    fn nearest_integer_cases() {
        match frac_nearest(&iv(2.9, 3.1)).unwrap() {
            Nearest::Resolved { nearest, distance } => {
                assert_eq!(nearest, BigInt::from(3));
                assert!(!distance.lo().is_negative());
                assert!(distance.hi().to_f64() <= 0.1 + 1e-9);
            }
            Nearest::Indeterminate => panic!("should resolve"),
        }
        assert_eq!(frac_nearest(&iv(3.49, 3.51)).unwrap(), Nearest::Indeterminate);
        // Touching a half-integer from either side is not enough.
        let touch = Interval::new(fp(5, 1), fp(21, 3)).unwrap();
        assert_eq!(frac_nearest(&touch).unwrap(), Nearest::Indeterminate);
        let touch = Interval::new(fp(19, 3), fp(5, 1)).unwrap();
        assert_eq!(frac_nearest(&touch).unwrap(), Nearest::Indeterminate);
        assert_eq!(frac_nearest(&iv(1.0, 1.3)), Err(BigFixError::TooWide));
    }

    #[test]
    fn nearest_for_negative_values() {
        match frac_nearest(&iv(-2.2, -2.1)).unwrap() {
            Nearest::Resolved { nearest, distance } => {
                assert_eq!(nearest, BigInt::from(-2));
                assert!((distance.lo().to_f64() - 0.1).abs() < 1e-9);
                assert!((distance.hi().to_f64() - 0.2).abs() < 1e-9);
            }
            Nearest::Indeterminate => panic!(),
        }
    }

    #[test]
    fn three_term_nearest_eleven() {
        let sum = [3, 20, 23]
            .iter()
            .map(|&a| sqrt_enclosure(a, 64).unwrap())
            .reduce(|acc, x| interval_add(&acc, &x))
            .unwrap();
        match frac_nearest(&sum).unwrap() {
            Nearest::Resolved { nearest, distance } => {
                assert_eq!(nearest, BigInt::from(11));
                let oracle = parse_decimal("1.828588117622794323e-5").unwrap();
                assert!(distance.contains_rational(&oracle));
            }
            Nearest::Indeterminate => panic!(),
        }
    }

    #[test]
    fn rescaling_rounds_in_the_requested_direction() {
        let x = fp(-7, 2); // -1.75
        assert_eq!(x.rescale_floor(0), fp(-2, 0));
        assert_eq!(x.rescale_ceil(0), fp(-1, 0));
        assert_eq!(x.floor(), BigInt::from(-2));
        assert_eq!(x.ceil(), BigInt::from(-1));
        assert_eq!(fp(3, 1).rescale_floor(4), fp(24, 4));
    }

    #[test]
    fn interval_abs_and_mul() {
        let x = Interval::new(fp(-1, 0), fp(3, 1)).unwrap();
        let a = x.abs();
        assert_eq!(*a.lo(), FixedPoint::zero());
        assert_eq!(*a.hi(), fp(3, 1));
        let p = x.mul(&x);
        assert_eq!(*p.lo(), fp(-3, 1));
        assert_eq!(*p.hi(), fp(9, 2));
    }

    #[test]
    fn scientific_formatting() {
        let r = parse_decimal("0.000018285881").unwrap();
        assert_eq!(to_scientific(&r, 5, Rounding::Nearest), "1.8286e-5");
        assert_eq!(to_scientific(&r, 5, Rounding::Down), "1.8285e-5");
        assert_eq!(to_scientific(&-r.clone(), 3, Rounding::Down), "-1.83e-5");
        let nine = parse_decimal("9.9996").unwrap();
        assert_eq!(to_scientific(&nine, 3, Rounding::Nearest), "1.00e1");
        assert_eq!(to_scientific(&BigRational::zero(), 3, Rounding::Up), "0");
        assert_eq!(to_scientific(&parse_decimal("531").unwrap(), 3, Rounding::Up), "5.31e2");
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(
            parse_decimal("1e-4").unwrap(),
            BigRational::new(BigInt::one(), BigInt::from(10_000))
        );
        assert_eq!(
            parse_decimal("-2.5E3").unwrap(),
            BigRational::from_integer(BigInt::from(-2500))
        );
        assert_eq!(
            parse_decimal(".5").unwrap(),
            BigRational::new(BigInt::one(), BigInt::from(2))
        );
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("1e").is_err());
    }

    #[test]
    fn to_f64_handles_wide_mantissas() {
        let e = sqrt_enclosure(2, 2000).unwrap();
        assert!((e.lo().to_f64() - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(fp(3, 1100).to_f64(), 0.0);
    }

    #[test]
    fn isqrt_small_exhaustive() {
        for n in 0u64..20_000 {
            let r = isqrt(&BigUint::from(n));
            let r = r.to_u64().unwrap();
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
            assert_eq!(isqrt_u64(n), r);
        }
        assert_eq!(isqrt_u64(u64::MAX), u32::MAX as u64);
    }
}
