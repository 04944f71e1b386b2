//! Integer utilities: perfect squares, squarefree parts, 64-bit
//! factorization, double factorials and binomials.
//!
//! Factorization is trial division up to 10⁶ followed by Pollard's rho
//! (Brent's cycle detection) on the cofactor, with a deterministic
//! Miller–Rabin test deciding when a cofactor is prime. The witness set
//! {2, 3, …, 37} is exact for every 64-bit input.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bigfix::{isqrt, isqrt_u64};

/// Largest radicand accepted by [`squarefree_decompose`].
pub const MAX_FACTOR_INPUT: u64 = 1 << 63;

const TRIAL_LIMIT: u64 = 1_000_000;
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FactorError {
    #[error("zero has no squarefree decomposition")]
    Zero,
    #[error("{0} exceeds the supported factorization range (2^63)")]
    OutOfRange(u64),
    #[error("pollard rho failed to split {0}")]
    RhoFailed(u64),
}

/// `a = square_root² · squarefree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquarefreeDecomposition {
    pub square_root: u64,
    pub squarefree: u64,
}

impl SquarefreeDecomposition {
    pub fn reconstruct(&self) -> u128 {
        self.square_root as u128 * self.square_root as u128 * self.squarefree as u128
    }
}

/// `Some(s)` with `s² = a`, or `None`.
pub fn is_perfect_square(a: &BigUint) -> Option<BigUint> {
    // Quadratic residues mod 64 reject most non-squares cheaply.
    let low = (a % 64u32).iter_u32_digits().next().unwrap_or(0);
    if (0x0202_0212_0203_0213u64 >> low) & 1 == 0 {
        return None;
    }
    let r = isqrt(a);
    (&r * &r == *a).then_some(r)
}

pub fn is_perfect_square_u64(a: u64) -> Option<u64> {
    let r = isqrt_u64(a);
    (r * r == a).then_some(r)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Brent's variant: x ↦ x² + c, batching gcds over blocks of differences.
fn rho_brent(n: u64, c: u64) -> Option<u64> {
    const BLOCK: u64 = 128;
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
    let mut x = y;
    let mut ys = y;
    let mut g = 1;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BLOCK.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += BLOCK;
        }
        r *= 2;
        if r > 1 << 26 {
            return None;
        }
    }
    if g == n {
        // Batch overshot; replay one step at a time.
        loop {
            ys = f(ys);
            g = gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn split(n: u64) -> Result<u64, FactorError> {
    (1..64).find_map(|c| rho_brent(n, c)).ok_or(FactorError::RhoFailed(n))
}

fn factor_cofactor(n: u64, out: &mut Vec<u64>) -> Result<(), FactorError> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n);
        return Ok(());
    }
    if let Some(r) = is_perfect_square_u64(n) {
        factor_cofactor(r, out)?;
        return factor_cofactor(r, out);
    }
    let d = split(n)?;
    factor_cofactor(d, out)?;
    factor_cofactor(n / d, out)
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>, FactorError> {
    if n == 0 {
        return Err(FactorError::Zero);
    }
    let mut primes = Vec::new();
    let mut rest = n;
    let mut push = |p: u64, rest: &mut u64| {
        while *rest % p == 0 {
            *rest /= p;
            primes.push(p);
        }
    };
    push(2, &mut rest);
    let mut p = 3;
    while p <= TRIAL_LIMIT && p * p <= rest {
        push(p, &mut rest);
        p += 2;
    }
    if rest > 1 {
        if p * p > rest {
            primes.push(rest);
        } else {
            factor_cofactor(rest, &mut primes)?;
        }
    }
    primes.sort_unstable();
    let mut grouped: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match grouped.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => grouped.push((q, 1)),
        }
    }
    Ok(grouped)
}

/// Write `a = s²·d` with `d` squarefree.
pub fn squarefree_decompose(a: u64) -> Result<SquarefreeDecomposition, FactorError> {
    if a == 0 {
        return Err(FactorError::Zero);
    }
    if a > MAX_FACTOR_INPUT {
        return Err(FactorError::OutOfRange(a));
    }
    let mut square_root = 1u64;
    let mut squarefree = 1u64;
    for (p, e) in factorize(a)? {
        square_root *= p.pow(e / 2);
        if e % 2 == 1 {
            squarefree *= p;
        }
    }
    Ok(SquarefreeDecomposition {
        square_root,
        squarefree,
    })
}

/// `m!! = m·(m−2)·(m−4)⋯`, with `m!! = 1` for `m ≤ 0` (so `(−1)!! = 1`).
pub fn double_factorial(m: i64) -> BigUint {
    let mut acc = BigUint::one();
    let mut k = m;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    acc
}

pub fn binomial(m: u64, i: u64) -> BigUint {
    if i > m {
        return BigUint::zero();
    }
    let i = i.min(m - i);
    let mut acc = BigUint::one();
    for j in 0..i {
        acc = acc * (m - j) / (j + 1);
    }
    acc
}

/// Signed binomial `(−1)^i·C(m, i)` as a big integer.
pub fn signed_binomial(m: u64, i: u64) -> BigInt {
    let c = BigInt::from(binomial(m, i));
    if i % 2 == 0 {
        c
    } else {
        -c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn squarefree_by_trial(d: u64) -> bool {
        let mut p = 2;
        while p * p <= d {
            if d % (p * p) == 0 {
                return false;
            }
            p += 1;
        }
        true
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(is_perfect_square(&BigUint::from(49u32)), Some(BigUint::from(7u32)));
        assert_eq!(is_perfect_square(&BigUint::from(48u32)), None);
        let s: BigUint = "123456789012345678901234567890".parse().unwrap();
        assert_eq!(is_perfect_square(&(&s * &s)), Some(s.clone()));
        assert_eq!(is_perfect_square(&(&s * &s + 1u32)), None);
        let big = num_traits::pow(BigUint::from(10u32), 60);
        assert_eq!(
            is_perfect_square(&big),
            Some(num_traits::pow(BigUint::from(10u32), 30))
        );
        assert_eq!(is_perfect_square_u64(1), Some(1));
        assert_eq!(is_perfect_square_u64(u32::MAX as u64 * u32::MAX as u64), Some(u32::MAX as u64));
    }

    #[test]
    fn squarefree_examples() {
        let d = squarefree_decompose(8).unwrap();
        assert_eq!((d.square_root, d.squarefree), (2, 2));
        let d = squarefree_decompose(1).unwrap();
        assert_eq!((d.square_root, d.squarefree), (1, 1));
        let d = squarefree_decompose(11075).unwrap();
        assert_eq!((d.square_root, d.squarefree), (5, 443));
        assert!(squarefree_by_trial(443) && is_prime(443));
        assert_eq!(squarefree_decompose(0), Err(FactorError::Zero));
        assert_eq!(
            squarefree_decompose(MAX_FACTOR_INPUT + 1),
            Err(FactorError::OutOfRange(MAX_FACTOR_INPUT + 1))
        );
    }

    #[test]
    fn squarefree_round_trip_to_a_million() {
        for a in 1..=1_000_000u64 {
            let d = squarefree_decompose(a).unwrap();
            assert_eq!(d.reconstruct(), a as u128);
            if a % 97 == 0 {
                assert!(squarefree_by_trial(d.squarefree), "{a}");
            }
        }
    }

    #[test]
    fn factorization_beyond_trial_range() {
        // Three primes just above 10⁶: the cofactor after trial division is
        // a product of three large primes.
        let (p, q, r) = (1_000_003u64, 1_000_033u64, 1_000_037u64);
        assert!(is_prime(p) && is_prime(q) && is_prime(r));
        assert_eq!(factorize(p * q * r).unwrap(), vec![(p, 1), (q, 1), (r, 1)]);
        let d = squarefree_decompose(p * p * q * 8).unwrap();
        assert_eq!((d.square_root, d.squarefree), (p * 2, q * 2));
        // Large prime square.
        let big = 2_147_483_647u64;
        assert_eq!(factorize(big * big).unwrap(), vec![(big, 2)]);
        let d = squarefree_decompose(big * big * 2).unwrap();
        assert_eq!((d.square_root, d.squarefree), (big, 2));
        // Semiprime of two ~31-bit primes.
        let (u, v) = (2_147_483_629u64, 2_147_483_587u64);
        assert_eq!(factorize(u * v).unwrap(), vec![(v, 1), (u, 1)]);
    }

    #[test]
    fn miller_rabin_against_sieve() {
        let limit = 100_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (n, &p) in sieve.iter().enumerate() {
            assert_eq!(is_prime(n as u64), p, "{n}");
        }
        // Strong pseudoprime to bases 2..=11.
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn double_factorial_and_binomial() {
        assert_eq!(double_factorial(5).to_u64(), Some(15));
        assert_eq!(double_factorial(-1).to_u64(), Some(1));
        assert_eq!(double_factorial(0).to_u64(), Some(1));
        assert_eq!(double_factorial(9).to_u64(), Some(945));
        assert_eq!(binomial(4, 2).to_u64(), Some(6));
        assert_eq!(binomial(4, 5).to_u64(), Some(0));
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
        assert_eq!(signed_binomial(3, 1), BigInt::from(-3));
    }
}
