//! Gap structure of `A_k(n) = {frac(√a₁ + ⋯ + √a_k) : 1 ≤ aᵢ ≤ n}` on the
//! circle, and certified minimizers of `‖√a₁ + ⋯ + √a_k‖`.
//!
//! Points are 128-bit fixed-point fractional parts. Two points whose keys
//! lie within 2^−60 of each other are merged only when their radical parts
//! agree exactly (same squarefree kernels with the same coefficients), so
//! `A` is treated as a set of reals, never as a multiset of tuples.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::frac::{circ128, for_each_multiset_from, multiset_count, FracTable};
use crate::numbertheory::{squarefree_decompose, SquarefreeDecomposition};
use crate::rootsum::{
    certified_distance_to, distances_equal, DistanceCertificate, Offset, RootSumError, RootSumExpr,
};

/// Largest `n^k` accepted by [`gap_report`].
pub const MAX_GAP_POINTS: u128 = 100_000_000;
/// Largest multiset count accepted by [`min_nonzero_distance`].
pub const MAX_SCAN_TUPLES: u128 = 1_000_000_000;
/// Smallest histogram edge is `2^−HISTOGRAM_DEPTH`.
pub const HISTOGRAM_DEPTH: i32 = 60;
/// Multipliers `c` of the large-gap threshold `c·n^{−3/2}`.
pub const LARGE_GAP_FACTORS: [f64; 3] = [1.0, 10.0, 100.0];

const NEAR_WINDOW: u128 = 1 << 68;
const SCALE: f64 = 1.0 / 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

#[derive(Debug, Error)]
pub enum GapError {
    #[error("k and n must be positive")]
    Empty,
    #[error("enumeration of {tuples} tuples exceeds the limit of {limit}")]
    Infeasible { tuples: u128, limit: u128 },
    #[error("every tuple is an exact integer")]
    NoNonzero,
    #[error(transparent)]
    RootSum(#[from] RootSumError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBucket {
    /// Gaps in `[lower, upper)`; the last bucket also holds gaps equal to 1.
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargeGapCount {
    pub factor: f64,
    pub threshold: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub k: usize,
    pub n: u64,
    /// Distinct points on the circle.
    pub point_count: u64,
    pub largest_gap: f64,
    /// Points bounding the largest gap, in circle order.
    pub largest_gap_from: f64,
    pub largest_gap_to: f64,
    /// Smallest positive element of `A`; `None` when `A = {0}`.
    pub smallest_nonzero_element: Option<f64>,
    pub histogram: Vec<HistogramBucket>,
    pub large_gaps: Vec<LargeGapCount>,
    /// `Σ gaps`, which is 1 up to representation error.
    pub gap_sum: f64,
}

impl GapReport {
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("lower,upper,count\n");
        for b in &self.histogram {
            let _ = writeln!(out, "{:e},{:e},{}", b.lower, b.upper, b.count);
        }
        out
    }
}

fn decompositions(n: u64) -> Vec<SquarefreeDecomposition> {
    (1..=n)
        .map(|a| squarefree_decompose(a).expect("radicands below 2^63"))
        .collect()
}

/// Radical part of `Σ√aᵢ`: squarefree kernel → coefficient, kernel 1 dropped.
fn radical_signature(tuple: &[u32], table: &[SquarefreeDecomposition]) -> BTreeMap<u64, u64> {
    let mut sig = BTreeMap::new();
    for &a in tuple {
        let d = table[a as usize - 1];
        if d.squarefree != 1 {
            *sig.entry(d.squarefree).or_insert(0) += d.square_root;
        }
    }
    sig
}

fn bucket_of(gap: f64) -> usize {
    if gap < 0.5f64.powi(HISTOGRAM_DEPTH) {
        return 0;
    }
    // Bucket j ≥ 1 holds [2^(j−1−depth), 2^(j−depth)).
    let e = gap.log2().floor() as i32;
    ((e + HISTOGRAM_DEPTH + 1).clamp(1, HISTOGRAM_DEPTH)) as usize
}

fn empty_histogram() -> Vec<HistogramBucket> {
    let mut h = vec![HistogramBucket {
        lower: 0.0,
        upper: 0.5f64.powi(HISTOGRAM_DEPTH),
        count: 0,
    }];
    for j in 1..=HISTOGRAM_DEPTH {
        h.push(HistogramBucket {
            lower: 2f64.powi(j - 1 - HISTOGRAM_DEPTH),
            upper: 2f64.powi(j - HISTOGRAM_DEPTH),
            count: 0,
        });
    }
    h
}

pub fn gap_report(k: usize, n: u64) -> Result<GapReport, GapError> {
    if k == 0 || n == 0 {
        return Err(GapError::Empty);
    }
    let tuples = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if tuples > MAX_GAP_POINTS {
        return Err(GapError::Infeasible {
            tuples,
            limit: MAX_GAP_POINTS,
        });
    }
    let table = FracTable::new(n);
    let shards: Vec<(Vec<u128>, Vec<u32>)> = (1..=n)
        .into_par_iter()
        .map(|first| {
            let mut keys = Vec::new();
            let mut store = Vec::new();
            for_each_multiset_from(first, k, n, |t| {
                keys.push(t.iter().fold(0u128, |acc, &a| acc.wrapping_add(table.frac128(a))));
                store.extend(t.iter().map(|&a| a as u32));
            });
            (keys, store)
        })
        .collect();
    let mut keys = Vec::with_capacity(multiset_count(n, k) as usize);
    let mut store = Vec::with_capacity(keys.capacity() * k);
    for (kk, ss) in shards {
        keys.extend(kk);
        store.extend(ss);
    }
    let mut order: Vec<(u128, u32)> = keys.iter().enumerate().map(|(i, &key)| (key, i as u32)).collect();
    drop(keys);
    order.sort_unstable();

    let decomp = decompositions(n);
    let tuple = |i: u32| &store[i as usize * k..(i as usize + 1) * k];
    let mut points: Vec<(u128, u32)> = Vec::with_capacity(order.len());
    for &(key, idx) in &order {
        let mut duplicate = false;
        let mut sig = None;
        for &(prev_key, prev_idx) in points.iter().rev() {
            if key - prev_key > NEAR_WINDOW {
                break;
            }
            let mine = sig.get_or_insert_with(|| radical_signature(tuple(idx), &decomp));
            if *mine == radical_signature(tuple(prev_idx), &decomp) {
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            points.push((key, idx));
        }
    }

    let count = points.len();
    let mut histogram = empty_histogram();
    let mut large_gaps: Vec<LargeGapCount> = LARGE_GAP_FACTORS
        .iter()
        .map(|&c| LargeGapCount {
            factor: c,
            threshold: c * (n as f64).powf(-1.5),
            count: 0,
        })
        .collect();
    let (mut best, mut best_at) = (0u128, 0usize);
    let mut gap_sum = 0.0;
    for i in 0..count {
        let here = points[i].0;
        let next = points[(i + 1) % count].0;
        let (raw, gap) = if count == 1 {
            (u128::MAX, 1.0)
        } else {
            let d = next.wrapping_sub(here);
            (d, d as f64 * SCALE)
        };
        if raw > best || i == 0 {
            best = raw;
            best_at = i;
        }
        gap_sum += gap;
        histogram[bucket_of(gap)].count += 1;
        for lg in &mut large_gaps {
            if gap > lg.threshold {
                lg.count += 1;
            }
        }
    }
    let from = points[best_at].0;
    let to = points[(best_at + 1) % count].0;
    let smallest_nonzero = points.iter().find(|p| p.0 != 0).map(|p| p.0 as f64 * SCALE);
    Ok(GapReport {
        k,
        n,
        point_count: count as u64,
        largest_gap: if count == 1 { 1.0 } else { best as f64 * SCALE },
        largest_gap_from: from as f64 * SCALE,
        largest_gap_to: to as f64 * SCALE,
        smallest_nonzero_element: smallest_nonzero,
        histogram,
        large_gaps,
        gap_sum,
    })
}

/// `n` values (after the first) where the largest gap grew relative to the
/// previous report.
pub fn non_monotone_points(reports: &[GapReport]) -> Vec<u64> {
    reports
        .windows(2)
        .filter(|w| w[1].largest_gap > w[0].largest_gap)
        .map(|w| w[1].n)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinDistance {
    pub radicands: Vec<u64>,
    pub certificate: DistanceCertificate,
}

impl MinDistance {
    pub fn expr(&self) -> RootSumExpr {
        RootSumExpr::unsigned(&self.radicands).expect("positive radicands")
    }
}

/// Certified order of two distances; `Equal` only when exactly equal.
fn compare_distances(a: &MinDistance, b: &MinDistance) -> Result<Ordering, GapError> {
    let (ea, eb) = (a.expr(), b.expr());
    let mut ca = a.certificate.clone();
    let mut cb = b.certificate.clone();
    let mut checked_equal = false;
    loop {
        if ca.distance_enclosure.hi() < cb.distance_enclosure.lo() {
            return Ok(Ordering::Less);
        }
        if cb.distance_enclosure.hi() < ca.distance_enclosure.lo() {
            return Ok(Ordering::Greater);
        }
        if !checked_equal {
            if distances_equal(&ea, &ca.nearest_integer, &eb, &cb.nearest_integer)? {
                return Ok(Ordering::Equal);
            }
            checked_equal = true;
        }
        let bits = ca.precision_bits.max(cb.precision_bits) * 2;
        ca = certified_distance_to(&ea, &Offset::zero(), bits)?;
        cb = certified_distance_to(&eb, &Offset::zero(), bits)?;
    }
}

/// The non-integer multiset `a₁ ≤ ⋯ ≤ a_k ≤ n` minimizing `‖Σ√aᵢ‖`, with
/// ties broken towards the lexicographically smallest tuple.
pub fn min_nonzero_distance(k: usize, n: u64) -> Result<MinDistance, GapError> {
    if k == 0 || n == 0 {
        return Err(GapError::Empty);
    }
    let tuples = multiset_count(n, k);
    if tuples > MAX_SCAN_TUPLES {
        return Err(GapError::Infeasible {
            tuples,
            limit: MAX_SCAN_TUPLES,
        });
    }
    let table = FracTable::new(n);
    let margin = 2 * k as u128 + 4;
    let shards: Vec<(u128, Vec<(u128, Vec<u64>)>)> = (1..=n)
        .into_par_iter()
        .map(|first| {
            let mut best = u128::MAX;
            let mut near: Vec<(u128, Vec<u64>)> = Vec::new();
            for_each_multiset_from(first, k, n, |t| {
                if t.iter().all(|&a| table.is_square(a)) {
                    return;
                }
                let d = circ128(t.iter().fold(0u128, |acc, &a| acc.wrapping_add(table.frac128(a))));
                if d <= best.saturating_add(margin) {
                    if d < best {
                        best = d;
                        near.retain(|(x, _)| *x <= best.saturating_add(margin));
                    }
                    near.push((d, t.to_vec()));
                }
            });
            (best, near)
        })
        .collect();
    let best = shards.iter().map(|s| s.0).min().unwrap_or(u128::MAX);
    if best == u128::MAX {
        return Err(GapError::NoNonzero);
    }
    let mut candidates: Vec<Vec<u64>> = shards
        .into_iter()
        .flat_map(|(_, near)| near)
        .filter(|(d, _)| *d <= best.saturating_add(margin))
        .map(|(_, t)| t)
        .collect();
    candidates.sort();
    let mut winner: Option<MinDistance> = None;
    for radicands in candidates {
        let expr = RootSumExpr::unsigned(&radicands)?;
        let certificate = certified_distance_to(&expr, &Offset::zero(), crate::rootsum::INITIAL_PRECISION_BITS)?;
        let cand = MinDistance {
            radicands,
            certificate,
        };
        winner = match winner {
            None => Some(cand),
            Some(cur) => match compare_distances(&cand, &cur)? {
                Ordering::Less => Some(cand),
                _ => Some(cur),
            },
        };
    }
    winner.ok_or(GapError::NoNonzero)
}

/// `n^{e}·distance` as a double, for shape checks.
pub fn scaled_distance(m: &MinDistance, n: u64, exponent: f64) -> f64 {
    m.certificate.distance_f64() * (n as f64).powf(exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term_small() {
        let r = gap_report(1, 4).unwrap();
        assert_eq!(r.point_count, 3);
        assert!((r.largest_gap - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(r.largest_gap_from, 0.0);
        assert!((r.largest_gap_to - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((r.smallest_nonzero_element.unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let total: u64 = r.histogram.iter().map(|b| b.count).sum();
        assert_eq!(total, r.point_count);
        assert!((r.gap_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn only_squares() {
        let r = gap_report(2, 1).unwrap();
        assert_eq!(r.point_count, 1);
        assert_eq!(r.largest_gap, 1.0);
        assert_eq!(r.smallest_nonzero_element, None);
        assert_eq!(r.histogram.last().unwrap().count, 1);
    }

    #[test]
    fn equal_values_merge() {
        // √2 + √8 = 3√2 and √1 + √18 = 1 + 3√2 are one point of A.
        let r = gap_report(2, 18).unwrap();
        let mut distinct = std::collections::BTreeSet::new();
        for a in 1..=18u64 {
            for b in a..=18 {
                let mut sig = BTreeMap::new();
                for x in [a, b] {
                    let d = squarefree_decompose(x).unwrap();
                    if d.squarefree != 1 {
                        *sig.entry(d.squarefree).or_insert(0u64) += d.square_root;
                    }
                }
                distinct.insert(sig.into_iter().collect::<Vec<_>>());
            }
        }
        assert_eq!(r.point_count as usize, distinct.len());
    }

    #[test]
    fn invariants_k2() {
        for n in [10u64, 37, 100] {
            let r = gap_report(2, n).unwrap();
            let total: u64 = r.histogram.iter().map(|b| b.count).sum();
            assert_eq!(total, r.point_count);
            assert!(r.largest_gap >= 1.0 / r.point_count as f64);
            assert!((r.gap_sum - 1.0).abs() < 1e-12);
            assert!(r.large_gaps[0].count >= r.large_gaps[1].count);
        }
        assert!(gap_report(3, 1000).is_err());
        assert!(gap_report(0, 10).is_err());
    }

    #[test]
    fn minimizers() {
        let m = min_nonzero_distance(1, 100).unwrap();
        assert_eq!(m.radicands, vec![99]);
        let m = min_nonzero_distance(3, 25).unwrap();
        assert_eq!(m.radicands, vec![3, 20, 23]);
        assert!((m.certificate.distance_f64() - 1.828_588_117_62e-5).abs() < 1e-15);
        let m = min_nonzero_distance(2, 70).unwrap();
        assert_eq!(m.radicands, vec![44, 70]);
        assert!(matches!(min_nonzero_distance(2, 1), Err(GapError::NoNonzero)));
    }

    #[test]
    fn exact_ties_pick_smallest_tuple() {
        // {2, 8} and {1, 18}…: 3√2 and 1 + 3√2 are equally far from ℤ.
        let a = MinDistance {
            radicands: vec![2, 8],
            certificate: certified_distance_to(&RootSumExpr::unsigned(&[2, 8]).unwrap(), &Offset::zero(), 128)
                .unwrap(),
        };
        let b = MinDistance {
            radicands: vec![1, 18],
            certificate: certified_distance_to(&RootSumExpr::unsigned(&[1, 18]).unwrap(), &Offset::zero(), 128)
                .unwrap(),
        };
        assert_eq!(compare_distances(&a, &b).unwrap(), Ordering::Equal);
    }
}
