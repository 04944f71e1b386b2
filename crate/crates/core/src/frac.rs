//! Fixed-point tables of `frac(√a)` shared by the enumeration modules.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::bigfix::isqrt;

/// `⌊frac(√a)·2^128⌋` for `a = 1..=n`; each entry is below the true value
/// by less than one unit in the last place.
#[derive(Debug, Clone)]
pub(crate) struct FracTable {
    fracs: Vec<u128>,
    squares: Vec<bool>,
}

impl FracTable {
    pub fn new(n: u64) -> Self {
        let mut fracs = Vec::with_capacity(n as usize);
        let mut squares = Vec::with_capacity(n as usize);
        let mask = (BigUint::from(1u32) << 128u32) - 1u32;
        for a in 1..=n {
            let root = isqrt(&(BigUint::from(a) << 256u32));
            let low = (&root & &mask).to_u128().expect("masked to 128 bits");
            fracs.push(low);
            let whole = (&root >> 128u32).to_u64().expect("root of a u64 fits");
            squares.push(low == 0 && whole * whole == a);
        }
        FracTable { fracs, squares }
    }

    #[inline]
    pub fn frac128(&self, a: u64) -> u128 {
        self.fracs[(a - 1) as usize]
    }

    /// Truncated to 64 bits; still a lower bound within one 2^−64 ulp.
    #[inline]
    pub fn frac64(&self, a: u64) -> u64 {
        (self.fracs[(a - 1) as usize] >> 64) as u64
    }

    #[inline]
    pub fn is_square(&self, a: u64) -> bool {
        self.squares[(a - 1) as usize]
    }
}

/// Circular distance of a 64-bit phase to zero, in ulps.
#[inline]
pub(crate) fn circ64(x: u64) -> u64 {
    x.min(x.wrapping_neg())
}

#[inline]
pub(crate) fn circ128(x: u128) -> u128 {
    x.min(x.wrapping_neg())
}

/// Visit every non-decreasing tuple `lo ≤ a₁ ≤ ⋯ ≤ a_k ≤ n` whose first
/// entry is `first`. The callback sees the tuple.
pub(crate) fn for_each_multiset_from(first: u64, k: usize, n: u64, mut f: impl FnMut(&[u64])) {
    if k == 0 || first > n {
        return;
    }
    let mut tuple = vec![first; k];
    loop {
        f(&tuple);
        // Advance the rightmost entry that can still grow.
        let mut i = k;
        loop {
            if i == 1 {
                return;
            }
            i -= 1;
            if tuple[i] < n {
                break;
            }
        }
        tuple[i] += 1;
        let v = tuple[i];
        for slot in tuple.iter_mut().skip(i + 1) {
            *slot = v;
        }
    }
}

/// `C(n + k − 1, k)`, saturating.
pub(crate) fn multiset_count(n: u64, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for j in 0..k as u128 {
        acc = match acc.checked_mul(n as u128 + j) {
            Some(v) => v / (j + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of ordered tuples that sort to this multiset: `k! / Π mult!`.
pub(crate) fn arrangements(tuple: &[u64]) -> u64 {
    let mut total: u64 = 1;
    let mut run = 1u64;
    for (i, w) in tuple.windows(2).enumerate() {
        if w[0] == w[1] {
            run += 1;
        } else {
            run = 1;
        }
        // Multiply by (i+2)/run incrementally keeps the value integral.
        total = total * (i as u64 + 2) / run;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_float_roots() {
        let t = FracTable::new(1000);
        for a in 1..=1000u64 {
            let f = (a as f64).sqrt().fract();
            let got = t.frac64(a) as f64 / 2f64.powi(64);
            assert!((f - got).abs() < 1e-12, "{a}");
            assert_eq!(t.is_square(a), ((a as f64).sqrt().round() as u64).pow(2) == a);
        }
    }

    #[test]
    fn multiset_enumeration_counts() {
        for k in 1..=4 {
            for n in 1..=9u64 {
                let mut count = 0u128;
                let mut ordered = 0u64;
                for first in 1..=n {
                    for_each_multiset_from(first, k, n, |t| {
                        assert!(t.windows(2).all(|w| w[0] <= w[1]));
                        assert_eq!(t[0], first);
                        count += 1;
                        ordered += arrangements(t);
                    });
                }
                assert_eq!(count, multiset_count(n, k));
                assert_eq!(ordered, n.pow(k as u32));
            }
        }
    }

    #[test]
    fn circular_distance() {
        assert_eq!(circ64(0), 0);
        assert_eq!(circ64(u64::MAX), 1);
        assert_eq!(circ64(5), 5);
        assert_eq!(circ128(u128::MAX - 2), 3);
    }
}
