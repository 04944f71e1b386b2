use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use sqrtsum::bigfix::{
    frac_nearest, isqrt, parse_decimal, sqrt_enclosure, to_scientific, FixedPoint, Interval, Nearest, Rounding,
};
use sqrtsum::expsum::{exp_sum, hat_eval, hat_fourier, HatKernel};
use sqrtsum::numbertheory::{factorize, is_prime, squarefree_decompose};
use sqrtsum::rootsum::{
    canonicalize, certified_distance, certified_distance_to, certified_sign, is_integer, separation_bound, Offset,
    RootSumExpr, Term,
};
use sqrtsum::search::{exhaustive_search, meet_in_the_middle, NearIntegerRecord, SearchConfig};

fn term() -> impl Strategy<Value = Term> {
    (1u64..=2000, any::<bool>()).prop_map(|(a, plus)| if plus { Term::plus(a) } else { Term::minus(a) })
}

fn expr() -> impl Strategy<Value = RootSumExpr> {
    prop::collection::vec(term(), 1..=5).prop_map(|t| RootSumExpr::new(t).unwrap())
}

fn interval() -> impl Strategy<Value = Interval> {
    (-1_000_000i64..1_000_000, 0i64..1000, 0u32..40).prop_map(|(lo, w, scale)| {
        Interval::new(FixedPoint::new(lo.into(), scale), FixedPoint::new((lo + w).into(), scale)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sqrt_enclosure_brackets_root(a in 1u64..u64::MAX / 2, p in 1u32..300) {
        let x = sqrt_enclosure(a, p).unwrap();
        let a = BigRational::from_integer(a.into());
        let lo = x.lo().to_rational();
        let hi = x.hi().to_rational();
        prop_assert!(&lo * &lo <= a && a <= &hi * &hi);
        prop_assert!(x.width().to_rational() <= BigRational::new(BigInt::one(), BigInt::one() << p));
    }

    #[test]
    fn isqrt_is_floor(n in any::<u128>()) {
        let n = BigUint::from(n);
        let r = isqrt(&n);
        prop_assert!(&r * &r <= n && (&r + 1u32) * (&r + 1u32) > n);
    }

    #[test]
    fn interval_ops_contain_pointwise(x in interval(), y in interval(), t in 0.0f64..=1.0, u in 0.0f64..=1.0) {
        let pick = |i: &Interval, f: f64| {
            let w = i.hi().to_rational() - i.lo().to_rational();
            i.lo().to_rational() + w * BigRational::from_float(f).unwrap()
        };
        let (a, b) = (pick(&x, t), pick(&y, u));
        prop_assert!(x.add(&y).contains_rational(&(&a + &b)));
        prop_assert!(x.sub(&y).contains_rational(&(&a - &b)));
        prop_assert!(x.mul(&y).contains_rational(&(&a * &b)));
        prop_assert!(x.neg().contains_rational(&-a.clone()));
        prop_assert!(x.abs().contains_rational(&num_traits::Signed::abs(&a)));
        prop_assert!(x.contains_rational(&x.midpoint().to_rational()));
    }

    #[test]
    fn nearest_integer_is_consistent(m in -1000i64..1000, off in 0u64..1 << 20, scale in 22u32..60) {
        let lo = FixedPoint::new((BigInt::from(m) << scale) + BigInt::from(off), scale);
        let hi = FixedPoint::new(lo.mantissa() + BigInt::from(1 << 10), scale);
        let x = Interval::new(lo, hi).unwrap();
        if let Nearest::Resolved { nearest, distance } = frac_nearest(&x).unwrap() {
            let shifted = x.sub(&Interval::from_integer(nearest));
            prop_assert!(shifted.abs().contains_interval(&distance) || distance.contains_interval(&shifted.abs()));
            prop_assert!(distance.hi().to_rational() <= BigRational::new(1.into(), 2.into()));
        }
    }

    #[test]
    fn decimal_round_trip(m in any::<i64>(), e in -30i32..30) {
        let r = BigRational::from_integer(m.into())
            * if e >= 0 {
                BigRational::from_integer(BigInt::from(10).pow(e as u32))
            } else {
                BigRational::new(BigInt::one(), BigInt::from(10).pow((-e) as u32))
            };
        let text = to_scientific(&r, 25, Rounding::Nearest);
        prop_assert_eq!(parse_decimal(&text).unwrap(), r);
    }

    #[test]
    fn factorization_multiplies_back(n in 1u64..1 << 62) {
        let f = factorize(n).unwrap();
        let mut product = 1u128;
        for &(p, e) in &f {
            prop_assert!(is_prime(p));
            product *= (p as u128).pow(e);
        }
        prop_assert_eq!(product, n as u128);
        let d = squarefree_decompose(n).unwrap();
        prop_assert_eq!(d.reconstruct(), n as u128);
        prop_assert!(factorize(d.squarefree).unwrap().iter().all(|&(_, e)| e == 1) || d.squarefree == 1);
    }

    #[test]
    fn enclosure_matches_float(e in expr()) {
        let x = e.enclose(128);
        let approx = e.approx();
        prop_assert!((x.midpoint().to_f64() - approx).abs() <= 1e-9 * (1.0 + approx.abs()));
        prop_assert!(canonicalize(&e).unwrap().enclose(128).intersects(&x));
    }

    #[test]
    fn distance_certificate_is_sound(e in expr()) {
        let c = certified_distance(&e).unwrap();
        let d = c.distance_enclosure.clone();
        prop_assert!(d.hi().to_rational() <= BigRational::new(1.into(), 2.into()));
        let shifted = e.enclose(c.precision_bits).sub(&Interval::from_integer(c.nearest_integer.clone()));
        prop_assert!(shifted.abs().intersects(&d));
        match is_integer(&e).unwrap() {
            Some(v) => {
                prop_assert!(c.exactly_integer);
                prop_assert_eq!(v, c.nearest_integer);
            }
            None => {
                prop_assert!(!c.exactly_integer && d.lo() > &FixedPoint::zero());
                prop_assert!(separation_bound(&e).unwrap() <= d.hi().to_rational());
            }
        }
    }

    #[test]
    fn integrality_ignores_order_and_sign_flips(mut terms in prop::collection::vec(term(), 1..=6), seed in any::<u64>()) {
        let a = RootSumExpr::new(terms.clone()).unwrap();
        let n = terms.len();
        terms.rotate_left(seed as usize % n);
        let b = RootSumExpr::new(terms.clone()).unwrap();
        prop_assert_eq!(is_integer(&a).unwrap(), is_integer(&b).unwrap());
        let flipped: Vec<Term> = terms
            .iter()
            .map(|t| if t.sign.as_i64() > 0 { Term::minus(t.radicand) } else { Term::plus(t.radicand) })
            .collect();
        let c = RootSumExpr::new(flipped).unwrap();
        prop_assert_eq!(certified_sign(&a).unwrap(), certified_sign(&c).unwrap().reverse());
    }

    #[test]
    fn display_parse_round_trip(e in expr()) {
        let again: RootSumExpr = e.to_string().parse().unwrap();
        prop_assert_eq!(again, e);
    }

    #[test]
    fn offset_distance_matches_float(a in 1u64..5000, b in 1u64..5000, num in 0u32..64) {
        let y = Offset::new(BigRational::new(num.into(), 64.into())).unwrap();
        let e = RootSumExpr::unsigned(&[a, b]).unwrap();
        let c = certified_distance_to(&e, &y, 128).unwrap();
        let v = e.approx() - num as f64 / 64.0;
        let want = (v - v.round()).abs();
        prop_assert!((c.distance_f64() - want).abs() < 1e-9);
    }

    #[test]
    fn exp_sum_bounds_and_symmetry(ell in 1i64..1 << 40, n in 1u64..300) {
        let v = exp_sum(ell, n, 64);
        prop_assert!(v.abs() <= n as f64 + v.radius);
        prop_assert!(v.radius <= n as f64 * 0.5f64.powi(40));
        let w = exp_sum(-ell, n, 64);
        prop_assert!((v.value.conj() - w.value).norm() <= v.radius + w.radius);
    }

    #[test]
    fn hat_kernel_facts(s in 1.5f64..2000.0, ell in -100_000i64..100_000, x in -3.0f64..3.0) {
        let h = HatKernel::new(s).unwrap();
        let f = hat_fourier(&h, ell);
        prop_assert!(f >= 0.0);
        prop_assert_eq!(f, hat_fourier(&h, -ell));
        let v = hat_eval(&h, x);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v - hat_eval(&h, x + 1.0)).abs() <= 8.0 * s * f64::EPSILON);
    }
}

fn keyed(records: &[NearIntegerRecord]) -> Vec<(Vec<u64>, String)> {
    records.iter().map(|r| (r.radicands.clone(), r.distance.clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engines_agree(k in 2usize..=4, n in 2u64..30, exp in 2i32..5, shards in 1usize..6, half in any::<bool>()) {
        let threshold = format!("1e-{exp}");
        let mut cfg = SearchConfig::new(k, n, &threshold).unwrap().with_shards(shards);
        if half {
            cfg = cfg.with_offset(Offset::parse("0.5").unwrap());
        }
        let ex = exhaustive_search(&cfg).unwrap();
        let mm = meet_in_the_middle(&cfg).unwrap();
        prop_assert_eq!(keyed(&ex), keyed(&mm));
        let limit = parse_decimal(&threshold).unwrap();
        for r in &ex {
            prop_assert!(r.distance_value() <= limit && r.distance_value() > BigRational::zero());
            prop_assert!(r.reverify().unwrap());
            prop_assert_eq!(&NearIntegerRecord::from_json_line(&r.to_json_line()).unwrap(), r);
        }
    }
}
