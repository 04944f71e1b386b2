//! Regression over published numerical examples of near-integer root sums.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::bigfix::{parse_decimal, to_scientific, Interval, Rounding};
use crate::rootsum::{certified_distance, certified_sign, enclosure_decimal, RootSumExpr};
use crate::search::{binomial_cancellation, family_k2, family_k3, SearchError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KnownCheck {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

fn dec(s: &str) -> BigRational {
    parse_decimal(s).expect("literal decimal")
}

fn expr(s: &str) -> RootSumExpr {
    s.parse().expect("literal expression")
}

/// `[lo, hi] ⊆ [target·(1 − tol), target·(1 + tol)]`.
fn within_relative(x: &Interval, target: &BigRational, tol: &BigRational) -> bool {
    let one = BigRational::one();
    let lo = target * (&one - tol);
    let hi = target * (&one + tol);
    x.lo().to_rational() >= lo && x.hi().to_rational() <= hi
}

fn show(x: &Interval) -> String {
    let (v, r) = enclosure_decimal(x, 6);
    format!("{v} ± {r}")
}

fn relative_check(name: &str, x: &Interval, target: &str, tol: &str) -> KnownCheck {
    KnownCheck {
        name: name.to_string(),
        expected: format!("{target} within {tol} relative"),
        observed: show(x),
        passed: within_relative(x, &dec(target), &dec(tol)),
    }
}

fn range_check(name: &str, x: &Interval, lo: &str, hi: &str) -> KnownCheck {
    KnownCheck {
        name: name.to_string(),
        expected: format!("in [{lo}, {hi}]"),
        observed: show(x),
        passed: x.lo().to_rational() >= dec(lo) && x.hi().to_rational() <= dec(hi),
    }
}

fn three_term() -> Result<KnownCheck, SearchError> {
    let e = expr("3 20 23");
    let cert = certified_distance(&e)?;
    let value = e.enclose(cert.precision_bits);
    let digits = to_scientific(&value.midpoint().to_rational(), 20, Rounding::Down);
    let radius_ok = value.width().to_rational() <= dec("2e-10");
    let passed = cert.nearest_integer == BigInt::from(11)
        && digits.starts_with("1.1000018")
        && value.lo().to_rational() >= dec("11.000018")
        && value.hi().to_rational() < dec("11.000019")
        && radius_ok;
    Ok(KnownCheck {
        name: "sqrt(3)+sqrt(20)+sqrt(23)".to_string(),
        expected: "nearest 11, value 11.000018..., radius <= 1e-10".to_string(),
        observed: format!("nearest {}, value {}", cert.nearest_integer, show(&value)),
        passed,
    })
}

fn comparison() -> Result<KnownCheck, SearchError> {
    let e = expr("10 11 -5 -18");
    let sign = certified_sign(&e)?;
    let value = e.enclose(128);
    // One significant digit: 2e-4 means [1.5e-4, 2.5e-4).
    let passed = sign == Ordering::Greater
        && value.lo().to_rational() >= dec("1.5e-4")
        && value.hi().to_rational() < dec("2.5e-4");
    Ok(KnownCheck {
        name: "sqrt(10)+sqrt(11) vs sqrt(5)+sqrt(18)".to_string(),
        expected: "left larger, difference 2e-4 to one digit".to_string(),
        observed: format!("{sign:?}, difference {}", show(&value)),
        passed,
    })
}

/// Every check, in a fixed order.
pub fn verify_known() -> Result<Vec<KnownCheck>, SearchError> {
    let mut out = vec![three_term()?];

    let six = expr("29 1097 3153 -226 -2324 -987");
    let cert = certified_distance(&six)?;
    let mut check = relative_check(
        "sqrt(29)+sqrt(1097)+sqrt(3153)-sqrt(226)-sqrt(2324)-sqrt(987)",
        &cert.distance_enclosure,
        "2.84e-20",
        "0.01",
    );
    check.passed &= cert.nearest_integer == BigInt::from(0);
    out.push(check);

    let oes = expr("11075 27187 68057");
    let cert = certified_distance(&oes)?;
    out.push(relative_check(
        "||sqrt(11075)+sqrt(27187)+sqrt(68057)||",
        &cert.distance_enclosure,
        "1.26e-15",
        "0.01",
    ));
    let scaled = cert.distance_enclosure.mul_int(&BigInt::from(68057u64).pow(3));
    out.push(relative_check("||sqrt(11075)+sqrt(27187)+sqrt(68057)|| * 68057^3", &scaled, "0.4", "0.01"));

    out.push(comparison()?);

    let a = 100u64;
    let r = family_k2(a)?;
    let d = r.expr();
    let cert = certified_distance(&d)?;
    let ratio = cert.distance_enclosure.mul_int(&BigInt::from(4 * a * a * a));
    out.push(range_check("k=2 family a=100: distance * 4a^3", &ratio, "0.99", "1.01"));

    let t = 100u64;
    let r = family_k3(t)?;
    let cert = certified_distance(&r.expr())?;
    let scaled = cert.distance_enclosure.mul_int(&BigInt::from(t.pow(5)));
    // distance · t⁵ / 4 ∈ [0.9, 1.1]
    out.push(range_check("k=3 family t=100: distance * t^5 / 4", &scaled, "3.6", "4.4"));

    for (m, n) in [(2u64, 100u64), (3, 1000), (6, 10)] {
        let c = binomial_cancellation(m, n)?;
        out.push(KnownCheck {
            name: format!("binomial cancellation m={m} n={n}"),
            expected: "lhs <= (2m-3)!!/(2^m n^(m-1/2))".to_string(),
            observed: format!(
                "{} <= {}",
                show(&c.lhs),
                to_scientific(&c.rhs_lo, 6, Rounding::Down)
            ),
            passed: c.holds && !c.lhs.lo().to_rational().is_negative(),
        });
    }
    Ok(out)
}

pub fn render_table(checks: &[KnownCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{}  {}\n      expected {}\n      observed {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.expected,
            c.observed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_known_examples_pass() {
        let checks = verify_known().unwrap();
        assert_eq!(checks.len(), 10);
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(render_table(&checks).starts_with("PASS  sqrt(3)"));
    }
}
