//! Exponential sums `S(ℓ, n) = Σ_{a ≤ n} e(ℓ√a)`, the hat kernel and the
//! Fourier counting identity
//!
//! ```text
//! Σ_{a₁..a_k ≤ n} h(√a₁ + ⋯ + √a_k − y) = Σ_ℓ ĥ(ℓ) e(−ℓy) S(ℓ, n)^k
//! ```
//!
//! Phases are reduced in fixed point (`ℓ · ⌊frac(√a)·2^W⌋ mod 2^W`) before
//! the double-precision trig call, so large `ℓ` costs nothing in accuracy.
//! Each trig evaluation is charged `2^−48` in the error radius.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bigfix::isqrt;
use crate::frac::{arrangements, circ128, for_each_multiset_from, FracTable};
use crate::rootsum::{canonicalize, certified_distance_to, Offset, RootSumError, RootSumExpr};

pub const DEFAULT_PHASE_BITS: u32 = 64;
/// Largest `n^k` accepted by the direct side of the counting identity.
pub const MAX_DIRECT_TUPLES: u128 = 1_000_000_000;
/// Error charged per double-precision `sin`/`cos` evaluation.
pub const TRIG_ERROR: f64 = 1.0 / (1u64 << 48) as f64;

const EPS: f64 = f64::EPSILON;
const TABLE_BITS: u32 = 128;
const PHASE_GUARD_BITS: u32 = 20;
const CHUNK: i64 = 4096;

#[derive(Debug, Error)]
pub enum ExpSumError {
    #[error("kernel scale must be a finite real above 1, got {0}")]
    InvalidKernel(f64),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("direct enumeration of {tuples} tuples exceeds the limit of {limit}")]
    Infeasible { tuples: u128, limit: u128 },
    #[error(transparent)]
    RootSum(#[from] RootSumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpSumValue {
    pub ell: i64,
    pub n: u64,
    pub value: Complex64,
    /// Certified bound on `|value − S(ℓ, n)|`.
    pub radius: f64,
}

impl ExpSumValue {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

/// Convert a 128-bit phase to turns in `[0, 1)`, truncating below 2^−53.
#[inline]
fn turns(phase: u128) -> f64 {
    (phase >> 75) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Compensated sum of unit vectors, plus the per-term phase error in turns.
struct PhaseSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
    terms: u64,
}

impl PhaseSum {
    fn new() -> Self {
        PhaseSum { re: 0.0, re_c: 0.0, im: 0.0, im_c: 0.0, terms: 0 }
    }

    #[inline]
    fn push(&mut self, t: f64) {
        let (s, c) = (TAU * t).sin_cos();
        neumaier(&mut self.re, &mut self.re_c, c);
        neumaier(&mut self.im, &mut self.im_c, s);
        self.terms += 1;
    }

    fn finish(self, ell: i64, n: u64, phase_error: f64) -> ExpSumValue {
        let m = self.terms as f64;
        let per_term = TAU * (phase_error + 0.5f64.powi(53)) + TRIG_ERROR;
        ExpSumValue {
            ell,
            n,
            value: Complex64::new(self.re + self.re_c, self.im + self.im_c),
            radius: (m * (per_term + 4.0 * EPS)) * (1.0 + 4.0 * EPS),
        }
    }
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

fn bits_of(ell: i64) -> u32 {
    64 - ell.unsigned_abs().leading_zeros()
}

fn sum_from_table(table: &FracTable, radicands: impl Iterator<Item = u64>, ell: i64, n: u64) -> ExpSumValue {
    let mult = if ell >= 0 {
        ell as u128
    } else {
        (ell.unsigned_abs() as u128).wrapping_neg()
    };
    let mut acc = PhaseSum::new();
    for a in radicands {
        acc.push(turns(table.frac128(a).wrapping_mul(mult)));
    }
    let phase_error = ell.unsigned_abs() as f64 * 0.5f64.powi(TABLE_BITS as i32);
    acc.finish(ell, n, phase_error)
}

fn sum_from_bigint(radicands: &[u64], ell: i64, n: u64, width: u32) -> ExpSumValue {
    let modulus_mask = (BigUint::one() << width) - 1u32;
    let ell_big = BigInt::from(ell);
    let mut acc = PhaseSum::new();
    for &a in radicands {
        let root = BigInt::from(isqrt(&(BigUint::from(a) << (2 * width))));
        let phase = (root * &ell_big) & BigInt::from(modulus_mask.clone());
        let top = (phase >> (width - 53)).to_u64().expect("53-bit phase");
        acc.push(top as f64 * (1.0 / (1u64 << 53) as f64));
    }
    let phase_error = ell.unsigned_abs() as f64 * 0.5f64.powi(width as i32);
    acc.finish(ell, n, phase_error)
}

/// `Σ_{a=1}^{n} e(ℓ√a)` with phase error at most `2^−precision_bits` per
/// term before the double-precision trig call.
pub fn exp_sum(ell: i64, n: u64, precision_bits: u32) -> ExpSumValue {
    let radicands: Vec<u64> = (1..=n).collect();
    exp_sum_over(ell, &radicands, precision_bits).with_n(n)
}

impl ExpSumValue {
    fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }
}

/// The same sum over an arbitrary list of radicands.
pub fn exp_sum_over(ell: i64, radicands: &[u64], precision_bits: u32) -> ExpSumValue {
    let count = radicands.len() as u64;
    if ell == 0 {
        return ExpSumValue {
            ell,
            n: count,
            value: Complex64::new(count as f64, 0.0),
            radius: 0.0,
        };
    }
    let width = precision_bits.max(53) + bits_of(ell) + PHASE_GUARD_BITS;
    if width <= TABLE_BITS {
        let max = radicands.iter().copied().max().unwrap_or(0);
        let table = FracTable::new(max);
        sum_from_table(&table, radicands.iter().copied(), ell, count)
    } else {
        sum_from_bigint(radicands, ell, count, width)
    }
}

/// `h(x) = max(1 − s‖x‖, 0)` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HatKernel {
    s: f64,
}

impl HatKernel {
    pub fn new(s: f64) -> Result<Self, ExpSumError> {
        if !(s.is_finite() && s > 1.0) {
            return Err(ExpSumError::InvalidKernel(s));
        }
        Ok(HatKernel { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// The exact binary value of `1/s`.
    fn inverse(&self) -> BigRational {
        BigRational::from_float(self.s).expect("finite").recip()
    }
}

pub fn hat_eval(kernel: &HatKernel, x: f64) -> f64 {
    let r = x - x.round();
    (1.0 - kernel.s * r.abs()).max(0.0)
}

/// `ĥ(0) = 1/s`; `ĥ(ℓ) = s/(π²ℓ²) · sin²(πℓ/s)` otherwise.
pub fn hat_fourier(kernel: &HatKernel, ell: i64) -> f64 {
    if ell == 0 {
        return 1.0 / kernel.s;
    }
    let l = ell.unsigned_abs() as f64;
    // fmod is exact, so ℓ = s gives sin(0) exactly.
    let reduced = (l % kernel.s) / kernel.s;
    let sin = (PI * reduced).sin();
    kernel.s / (PI * PI * l * l) * sin * sin
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearCount {
    /// `Σ h(Σ√aᵢ − y)` over ordered tuples.
    pub direct_weighted: f64,
    /// Bound on the floating-point error of `direct_weighted`.
    pub direct_error: f64,
    /// Ordered tuples with `‖Σ√aᵢ − y‖ ≤ 1/s`, decided exactly.
    pub direct_cardinality: u128,
    /// `⌊√n⌋^k`, reported for `y = 0`.
    pub trivial_count: Option<u128>,
}

fn offset_fixed(offset: &Offset) -> u128 {
    (offset.value() * BigRational::from_integer(BigInt::one() << TABLE_BITS))
        .floor()
        .to_integer()
        .to_u128()
        .unwrap_or(0)
}

/// Exact `‖value(e) − y‖ ≤ threshold`.
fn distance_at_most(e: &RootSumExpr, offset: &Offset, threshold: &BigRational) -> Result<bool, ExpSumError> {
    let form = canonicalize(e)?;
    if form.is_rational() {
        let v = BigRational::from_integer(form.rational_part.clone()) - offset.value();
        let d = (&v - v.round()).abs();
        return Ok(&d <= threshold);
    }
    let mut bits = crate::rootsum::INITIAL_PRECISION_BITS;
    loop {
        let enclosure = certified_distance_to(e, offset, bits)?.distance_enclosure;
        if &enclosure.hi().to_rational() <= threshold {
            return Ok(true);
        }
        if &enclosure.lo().to_rational() > threshold {
            return Ok(false);
        }
        bits = bits.checked_mul(2).ok_or(RootSumError::BoundViolated { bits: bits as u64 })?;
    }
}

fn check_direct_size(k: usize, n: u64) -> Result<(), ExpSumError> {
    if k == 0 || n == 0 {
        return Err(ExpSumError::InvalidArgument("k and n must be positive".into()));
    }
    let tuples = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if tuples > MAX_DIRECT_TUPLES {
        return Err(ExpSumError::Infeasible {
            tuples,
            limit: MAX_DIRECT_TUPLES,
        });
    }
    Ok(())
}

/// Direct side of the counting identity, enumerated over multisets and
/// weighted by their number of orderings.
pub fn count_near(k: usize, n: u64, kernel: &HatKernel, offset: &Offset) -> Result<NearCount, ExpSumError> {
    check_direct_size(k, n)?;
    let table = FracTable::new(n);
    let target = offset_fixed(offset);
    let inverse = kernel.inverse();
    let threshold = (&inverse * BigRational::from_integer(BigInt::one() << TABLE_BITS))
        .floor()
        .to_integer()
        .to_u128()
        .unwrap_or(u128::MAX);
    let margin = k as u128 + 2;
    let scale = 0.5f64.powi(TABLE_BITS as i32);

    let partials: Vec<Result<(f64, u128), ExpSumError>> = (1..=n)
        .into_par_iter()
        .map(|first| {
            let (mut sum, mut comp, mut count) = (0.0f64, 0.0f64, 0u128);
            let mut failure = None;
            for_each_multiset_from(first, k, n, |tuple| {
                if failure.is_some() {
                    return;
                }
                let key = tuple
                    .iter()
                    .fold(0u128, |acc, &a| acc.wrapping_add(table.frac128(a)));
                let d = circ128(key.wrapping_sub(target));
                let weight = arrangements(tuple) as f64;
                let x = d as f64 * scale;
                neumaier(&mut sum, &mut comp, weight * (1.0 - kernel.s * x).max(0.0));
                let inside = if d + margin < threshold {
                    true
                } else if d > threshold.saturating_add(margin) {
                    false
                } else {
                    let expr = RootSumExpr::unsigned(tuple).expect("positive radicands");
                    match distance_at_most(&expr, offset, &inverse) {
                        Ok(v) => v,
                        Err(e) => {
                            failure = Some(e);
                            return;
                        }
                    }
                };
                if inside {
                    count += arrangements(tuple) as u128;
                }
            });
            match failure {
                Some(e) => Err(e),
                None => Ok((sum + comp, count)),
            }
        })
        .collect();
    let (mut weighted, mut comp, mut cardinality) = (0.0, 0.0, 0u128);
    for p in partials {
        let (w, c) = p?;
        neumaier(&mut weighted, &mut comp, w);
        cardinality += c;
    }
    let total = (n as f64).powi(k as i32);
    let per_tuple = 8.0 * EPS + kernel.s * (k as f64 + 2.0) * scale;
    Ok(NearCount {
        direct_weighted: weighted + comp,
        direct_error: total * per_tuple,
        direct_cardinality: cardinality,
        trivial_count: offset
            .is_zero()
            .then(|| (crate::bigfix::isqrt_u64(n) as u128).pow(k as u32)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierCount {
    /// `Σ_{|ℓ| ≤ L} ĥ(ℓ) e(−ℓy) S(ℓ, n)^k`.
    pub estimate: f64,
    /// `n^k · Σ_{|ℓ| > L} ĥ(ℓ) ≤ n^k · 2s/(π²L)`.
    pub tail_bound: f64,
    /// Certified bound on the error of `estimate` from phases, trig and
    /// floating-point accumulation.
    pub phase_error: f64,
}

/// `e(−ℓy)` for the rational offset `y`.
fn offset_phase(offset: &Offset, ell: i64) -> Complex64 {
    if offset.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    let y = offset.value();
    let (p, q) = (y.numer(), y.denom());
    let r = (BigInt::from(ell) * p) % q;
    let t = r.to_f64().unwrap_or(0.0) / q.to_f64().unwrap_or(1.0);
    let (s, c) = (-TAU * t).sin_cos();
    Complex64::new(c, s)
}

pub fn fourier_count(
    k: usize,
    n: u64,
    kernel: &HatKernel,
    cutoff: i64,
    offset: &Offset,
) -> Result<FourierCount, ExpSumError> {
    if k == 0 || n == 0 {
        return Err(ExpSumError::InvalidArgument("k and n must be positive".into()));
    }
    if (cutoff as f64) < kernel.s {
        return Err(ExpSumError::InvalidArgument(format!(
            "cutoff L = {cutoff} must be at least s = {}",
            kernel.s
        )));
    }
    let table = FracTable::new(n);
    let kk = k as i32;
    let nk = (n as f64).powi(kk);
    let chunks: Vec<(f64, f64)> = (0..(cutoff + CHUNK - 1) / CHUNK)
        .into_par_iter()
        .map(|c| {
            let (mut sum, mut comp, mut err) = (0.0f64, 0.0f64, 0.0f64);
            for ell in (c * CHUNK + 1)..=((c + 1) * CHUNK).min(cutoff) {
                let weight = hat_fourier(kernel, ell);
                if weight == 0.0 {
                    continue;
                }
                let s = sum_from_table(&table, 1..=n, ell, n);
                let term = s.value.powi(kk) * offset_phase(offset, ell);
                neumaier(&mut sum, &mut comp, 2.0 * weight * term.re);
                let m = s.abs();
                let upper = (m + s.radius).powi(kk);
                err += 2.0 * weight * ((upper - m.powi(kk)) + (16.0 + 8.0 * k as f64) * EPS * upper);
            }
            (sum + comp, err)
        })
        .collect();
    let (mut estimate, mut comp) = (hat_fourier(kernel, 0) * nk, 0.0);
    let mut phase_error = 4.0 * EPS * nk;
    for (s, e) in chunks {
        neumaier(&mut estimate, &mut comp, s);
        phase_error += e;
    }
    Ok(FourierCount {
        estimate: estimate + comp,
        tail_bound: nk * 2.0 * kernel.s / (PI * PI * cutoff as f64) * (1.0 + 1e-9),
        phase_error: phase_error * (1.0 + 1e-9),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub sum: ExpSumValue,
    /// `n^{59/60}`.
    pub vdc_shape: f64,
    /// `√n`.
    pub eph_shape: f64,
}

/// `|S(ℓ, n)|` over a grid of `ℓ`, next to the two bound shapes. Rows come
/// back in grid order.
pub fn bound_probe(n: u64, ell_grid: &[i64], precision_bits: u32) -> Result<Vec<ProbeRow>, ExpSumError> {
    if n == 0 {
        return Err(ExpSumError::InvalidArgument("n must be positive".into()));
    }
    if let Some(bad) = ell_grid.iter().find(|&&l| l < 0) {
        return Err(ExpSumError::InvalidArgument(format!("grid value {bad} is negative")));
    }
    let nf = n as f64;
    let rows = ell_grid
        .par_iter()
        .map(|&ell| ProbeRow {
            sum: exp_sum(ell, n, precision_bits),
            vdc_shape: nf.powf(59.0 / 60.0),
            eph_shape: nf.sqrt(),
        })
        .collect();
    Ok(rows)
}

pub const PROBE_CSV_HEADER: &str = "ell,n,re,im,abs,err_radius,vdc_shape,eph_shape";

pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from(PROBE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.sum.ell,
            r.sum.n,
            r.sum.value.re,
            r.sum.value.im,
            r.sum.abs(),
            r.sum.radius,
            r.vdc_shape,
            r.eph_shape
        );
    }
    out
}
