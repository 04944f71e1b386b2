//! Searches for tuples whose root sums land close to `ℤ + y`.
//!
//! Both the exhaustive and the meet-in-the-middle engines prefilter with
//! 64-bit fixed-point fractional parts and then hand each surviving tuple to
//! [`certified_distance_to`]: a record is emitted only when its certified
//! distance is positive and at most the threshold. The prefilter window is
//! widened by the accumulated truncation error, so nothing that belongs in
//! the output can be dropped by it.
//!
//! Work is split into `shard_count` static shards by the smallest radicand
//! of the (right half of the) tuple. Shards share nothing; their outputs are
//! merged and sorted, so the result does not depend on the shard count or
//! on how many threads run the shards.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bigfix::{parse_decimal, sqrt_enclosure, FixedPoint, Interval};
use crate::frac::{circ64, for_each_multiset_from, multiset_count, FracTable};
use crate::numbertheory::{double_factorial, signed_binomial};
use crate::rootsum::{
    certified_distance_to, DistanceCertificate, Offset, RootSumError, RootSumExpr, Term, TermSign,
};

/// Largest enumeration the exhaustive engine accepts.
pub const MAX_EXHAUSTIVE_TUPLES: u128 = 1_000_000_000;
/// Default cap on the meet-in-the-middle half-sum table.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;
/// Significant digits of serialized distances.
pub const DISTANCE_DIGITS: usize = 15;

const MAX_CERTIFY_BITS: u32 = 1 << 16;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("search space of {tuples} tuples exceeds the limit of {limit}")]
    Infeasible { tuples: u128, limit: u128 },
    #[error("half-sum table needs ~{required} bytes, budget is {budget}")]
    MemoryBudget { required: u128, budget: usize },
    #[error("could not decide distance against threshold for {0}")]
    Undecided(String),
    #[error(transparent)]
    RootSum(#[from] RootSumError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Mitm,
    FamilyK2,
    FamilyK3,
    Binomial,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::Mitm => "mitm",
            Method::FamilyK2 => "family_k2",
            Method::FamilyK3 => "family_k3",
            Method::Binomial => "binomial",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "exhaustive" => Ok(Method::Exhaustive),
            "mitm" => Ok(Method::Mitm),
            "family_k2" => Ok(Method::FamilyK2),
            "family_k3" => Ok(Method::FamilyK3),
            "binomial" => Ok(Method::Binomial),
            other => Err(SearchError::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub k: usize,
    pub n_max: u64,
    /// Report tuples with distance ≤ threshold; `0 < threshold < 1/2`.
    pub threshold: BigRational,
    pub offset: Offset,
    pub shard_count: usize,
    /// Keep only this many records, best distance first.
    pub record_limit: Option<usize>,
    pub memory_budget: usize,
}

impl SearchConfig {
    pub fn new(k: usize, n_max: u64, threshold: &str) -> Result<Self, SearchError> {
        let threshold = parse_decimal(threshold)
            .map_err(|e| SearchError::InvalidConfig(e.to_string()))?;
        let cfg = SearchConfig {
            k,
            n_max,
            threshold,
            offset: Offset::zero(),
            shard_count: 1,
            record_limit: None,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_offset(mut self, offset: Offset) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_shards(mut self, shard_count: usize) -> Self {
        self.shard_count = shard_count;
        self
    }

    pub fn with_record_limit(mut self, limit: usize) -> Self {
        self.record_limit = Some(limit);
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.n_max == 0 {
            return bad("n_max must be at least 1");
        }
        if self.n_max > u32::MAX as u64 {
            return bad("n_max must fit in 32 bits");
        }
        if !self.threshold.is_positive() {
            return bad("threshold must be positive");
        }
        if self.threshold >= BigRational::new(BigInt::one(), BigInt::from(2)) {
            return bad("threshold must be below 1/2");
        }
        if self.shard_count == 0 {
            return bad("shard_count must be positive");
        }
        Ok(())
    }

    fn fingerprint(&self, method: Method) -> String {
        format!(
            "{method}:k={}:n={}:threshold={}:y={}:shards={}",
            self.k, self.n_max, self.threshold, self.offset, self.shard_count
        )
    }

    /// Prefilter half-window in 2^−64 ulps around the target.
    fn window(&self) -> u64 {
        let t = (&self.threshold * BigRational::from_integer(BigInt::one() << 64u32))
            .ceil()
            .to_integer()
            .to_u64()
            .unwrap_or(u64::MAX / 2);
        t.saturating_add(self.k as u64 + 2)
    }

    /// `⌊y·2^64⌋`.
    fn target(&self) -> u64 {
        (self.offset.value() * BigRational::from_integer(BigInt::one() << 64u32))
            .floor()
            .to_integer()
            .to_u64()
            .unwrap_or(0)
    }
}

/// A certified near-integer (or near-`ℤ + y`) tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearIntegerRecord {
    pub radicands: Vec<u64>,
    pub signs: Vec<TermSign>,
    pub k: usize,
    pub n_max: u64,
    pub nearest_integer: BigInt,
    /// Decimal midpoint of the certified distance enclosure.
    pub distance: String,
    /// Certified radius around `distance`.
    pub radius: String,
    pub precision_bits: u32,
    pub method: Method,
    pub offset: Offset,
}

impl NearIntegerRecord {
    fn from_certificate(
        terms: &[Term],
        n_max: u64,
        cert: &DistanceCertificate,
        method: Method,
        offset: &Offset,
    ) -> Self {
        let mut terms = terms.to_vec();
        terms.sort();
        let (distance, radius) = cert.decimal(DISTANCE_DIGITS);
        NearIntegerRecord {
            radicands: terms.iter().map(|t| t.radicand).collect(),
            signs: terms.iter().map(|t| t.sign).collect(),
            k: terms.len(),
            n_max,
            nearest_integer: cert.nearest_integer.clone(),
            distance,
            radius,
            precision_bits: cert.precision_bits,
            method,
            offset: offset.clone(),
        }
    }

    pub fn expr(&self) -> RootSumExpr {
        let terms = self
            .radicands
            .iter()
            .zip(&self.signs)
            .map(|(&radicand, &sign)| Term { radicand, sign })
            .collect();
        RootSumExpr::new(terms).expect("records hold valid expressions")
    }

    /// Exact value of the printed distance.
    pub fn distance_value(&self) -> BigRational {
        parse_decimal(&self.distance).expect("records hold valid decimals")
    }

    pub fn distance_f64(&self) -> f64 {
        self.distance.parse().unwrap_or(f64::NAN)
    }

    /// Re-certify and check that the stored `distance ± radius` still
    /// encloses the certified distance.
    pub fn reverify(&self) -> Result<bool, SearchError> {
        let cert = certified_distance_to(&self.expr(), &self.offset, self.precision_bits)?;
        let radius = parse_decimal(&self.radius).map_err(|e| SearchError::InvalidConfig(e.to_string()))?;
        let mid = self.distance_value();
        let enclosure = &cert.distance_enclosure;
        Ok(!cert.exactly_integer
            && enclosure.lo() > &FixedPoint::zero()
            && cert.nearest_integer == self.nearest_integer
            && enclosure.lo().to_rational() >= &mid - &radius
            && enclosure.hi().to_rational() <= &mid + &radius)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&RecordJson::from(self)).expect("records serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self, SearchError> {
        let raw: RecordJson = serde_json::from_str(line)?;
        raw.try_into()
    }
}

/// Wire form: every number is a string.
#[derive(Debug, Serialize, Deserialize)]
struct RecordJson {
    radicands: Vec<String>,
    signs: Vec<String>,
    k: String,
    n_max: String,
    nearest_integer: String,
    distance: String,
    radius: String,
    precision_bits: String,
    method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<String>,
}

impl From<&NearIntegerRecord> for RecordJson {
    fn from(r: &NearIntegerRecord) -> Self {
        RecordJson {
            radicands: r.radicands.iter().map(u64::to_string).collect(),
            signs: r
                .signs
                .iter()
                .map(|s| if *s == TermSign::Plus { "+1" } else { "-1" }.to_string())
                .collect(),
            k: r.k.to_string(),
            n_max: r.n_max.to_string(),
            nearest_integer: r.nearest_integer.to_string(),
            distance: r.distance.clone(),
            radius: r.radius.clone(),
            precision_bits: r.precision_bits.to_string(),
            method: r.method,
            offset: (!r.offset.is_zero()).then(|| r.offset.to_string()),
        }
    }
}

impl TryFrom<RecordJson> for NearIntegerRecord {
    type Error = SearchError;

    fn try_from(raw: RecordJson) -> Result<Self, Self::Error> {
        let bad = |what: &str| SearchError::InvalidConfig(format!("malformed record field {what}"));
        let radicands = raw
            .radicands
            .iter()
            .map(|s| s.parse::<u64>().map_err(|_| bad("radicands")))
            .collect::<Result<Vec<_>, _>>()?;
        let signs = raw
            .signs
            .iter()
            .map(|s| match s.as_str() {
                "+1" | "1" => Ok(TermSign::Plus),
                "-1" => Ok(TermSign::Minus),
                _ => Err(bad("signs")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if signs.len() != radicands.len() {
            return Err(bad("signs"));
        }
        let offset = match raw.offset {
            Some(text) => {
                let (n, d) = text.split_once('/').unwrap_or((&text, "1"));
                let n: BigInt = n.parse().map_err(|_| bad("offset"))?;
                let d: BigInt = d.parse().map_err(|_| bad("offset"))?;
                Offset::new(BigRational::new(n, d))?
            }
            None => Offset::zero(),
        };
        parse_decimal(&raw.distance).map_err(|_| bad("distance"))?;
        parse_decimal(&raw.radius).map_err(|_| bad("radius"))?;
        Ok(NearIntegerRecord {
            radicands,
            signs,
            k: raw.k.parse().map_err(|_| bad("k"))?,
            n_max: raw.n_max.parse().map_err(|_| bad("n_max"))?,
            nearest_integer: raw.nearest_integer.parse().map_err(|_| bad("nearest_integer"))?,
            distance: raw.distance,
            radius: raw.radius,
            precision_bits: raw.precision_bits.parse().map_err(|_| bad("precision_bits"))?,
            method: raw.method,
            offset,
        })
    }
}

pub fn write_jsonl<W: Write>(records: &[NearIntegerRecord], mut out: W) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}

enum Verdict {
    Inside(DistanceCertificate),
    Outside,
}

/// Certify one candidate against the threshold, raising precision while the
/// enclosure straddles it.
fn certify_against(
    expr: &RootSumExpr,
    offset: &Offset,
    threshold: &BigRational,
) -> Result<Verdict, SearchError> {
    let mut bits = crate::rootsum::INITIAL_PRECISION_BITS;
    loop {
        let cert = certified_distance_to(expr, offset, bits)?;
        if cert.exactly_integer {
            return Ok(Verdict::Outside);
        }
        let enclosure = &cert.distance_enclosure;
        if &enclosure.hi().to_rational() <= threshold {
            return Ok(Verdict::Inside(cert));
        }
        if &enclosure.lo().to_rational() > threshold {
            return Ok(Verdict::Outside);
        }
        if bits >= MAX_CERTIFY_BITS {
            return Err(SearchError::Undecided(expr.to_string()));
        }
        bits *= 2;
    }
}

fn certify_candidates(
    cfg: &SearchConfig,
    candidates: Vec<Vec<u64>>,
    method: Method,
) -> Result<Vec<NearIntegerRecord>, SearchError> {
    let mut out = Vec::new();
    for tuple in candidates {
        let expr = RootSumExpr::unsigned(&tuple)?;
        if let Verdict::Inside(cert) = certify_against(&expr, &cfg.offset, &cfg.threshold)? {
            out.push(NearIntegerRecord::from_certificate(
                expr.terms(),
                cfg.n_max,
                &cert,
                method,
                &cfg.offset,
            ));
        }
    }
    Ok(out)
}

fn finish(cfg: &SearchConfig, mut records: Vec<NearIntegerRecord>) -> Vec<NearIntegerRecord> {
    if let Some(limit) = cfg.record_limit {
        records.sort_by(|a, b| {
            a.distance_value()
                .cmp(&b.distance_value())
                .then_with(|| a.radicands.cmp(&b.radicands))
        });
        records.truncate(limit);
    }
    records.sort_by(|a, b| a.radicands.cmp(&b.radicands).then_with(|| a.signs.cmp(&b.signs)));
    records
}

/// Shard-completion log that lets an interrupted search resume.
#[derive(Debug, Default, Serialize, Deserialize)]
struct ShardProgress {
    fingerprint: String,
    completed: BTreeMap<usize, Vec<String>>,
}

impl ShardProgress {
    fn load(path: &Path, fingerprint: &str) -> Result<Self, SearchError> {
        if !path.exists() {
            return Ok(ShardProgress {
                fingerprint: fingerprint.to_string(),
                completed: BTreeMap::new(),
            });
        }
        let progress: ShardProgress = serde_json::from_str(&fs::read_to_string(path)?)?;
        if progress.fingerprint != fingerprint {
            return Err(SearchError::InvalidConfig(format!(
                "progress file {} belongs to a different search ({})",
                path.display(),
                progress.fingerprint
            )));
        }
        Ok(progress)
    }

    fn store(&self, path: &Path) -> Result<(), SearchError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}

/// Run `shard_fn` over every shard, in parallel, consulting and updating the
/// progress file when one is given.
fn run_shards<F>(
    cfg: &SearchConfig,
    method: Method,
    progress_path: Option<&Path>,
    shard_fn: F,
) -> Result<Vec<NearIntegerRecord>, SearchError>
where
    F: Fn(usize) -> Result<Vec<NearIntegerRecord>, SearchError> + Sync,
{
    let fingerprint = cfg.fingerprint(method);
    let progress = match progress_path {
        Some(path) => Some(Mutex::new(ShardProgress::load(path, &fingerprint)?)),
        None => None,
    };
    let results: Vec<Result<Vec<NearIntegerRecord>, SearchError>> = (0..cfg.shard_count)
        .into_par_iter()
        .map(|shard| {
            if let Some(p) = &progress {
                let done = p.lock().expect("progress lock").completed.get(&shard).cloned();
                if let Some(lines) = done {
                    return lines.iter().map(|l| NearIntegerRecord::from_json_line(l)).collect();
                }
            }
            let records = shard_fn(shard)?;
            if let (Some(p), Some(path)) = (&progress, progress_path) {
                let mut guard = p.lock().expect("progress lock");
                guard
                    .completed
                    .insert(shard, records.iter().map(NearIntegerRecord::to_json_line).collect());
                guard.store(path)?;
            }
            Ok(records)
        })
        .collect();
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    Ok(all)
}

fn is_trivial(table: &FracTable, tuple: &[u64]) -> bool {
    tuple.iter().all(|&a| table.is_square(a))
}

pub fn exhaustive_search(cfg: &SearchConfig) -> Result<Vec<NearIntegerRecord>, SearchError> {
    exhaustive_search_resumable(cfg, None)
}

/// Every non-integer multiset `a₁ ≤ ⋯ ≤ a_k ≤ n_max` within the threshold.
pub fn exhaustive_search_resumable(
    cfg: &SearchConfig,
    progress: Option<&Path>,
) -> Result<Vec<NearIntegerRecord>, SearchError> {
    cfg.validate()?;
    let tuples = multiset_count(cfg.n_max, cfg.k);
    if tuples > MAX_EXHAUSTIVE_TUPLES {
        return Err(SearchError::Infeasible {
            tuples,
            limit: MAX_EXHAUSTIVE_TUPLES,
        });
    }
    let table = FracTable::new(cfg.n_max);
    let (target, window) = (cfg.target(), cfg.window());
    let shards = cfg.shard_count as u64;
    let records = run_shards(cfg, Method::Exhaustive, progress, |shard| {
        let mut candidates = Vec::new();
        for first in (1 + shard as u64..=cfg.n_max).step_by(shards as usize) {
            for_each_multiset_from(first, cfg.k, cfg.n_max, |tuple| {
                let sum = tuple
                    .iter()
                    .fold(0u64, |acc, &a| acc.wrapping_add(table.frac64(a)));
                if circ64(sum.wrapping_sub(target)) <= window && !is_trivial(&table, tuple) {
                    candidates.push(tuple.to_vec());
                }
            });
        }
        certify_candidates(cfg, candidates, Method::Exhaustive)
    })?;
    Ok(finish(cfg, records))
}

/// Bytes used by a half-sum table with `entries` rows of `half`-tuples.
fn table_bytes(entries: u128, half: usize) -> u128 {
    entries.saturating_mul(16 + 4 * half as u128)
}

pub fn meet_in_the_middle(cfg: &SearchConfig) -> Result<Vec<NearIntegerRecord>, SearchError> {
    meet_in_the_middle_resumable(cfg, None)
}

/// Same output as [`exhaustive_search`], found by matching the fractional
/// parts of left half-sums (sorted table) against right half-sums.
pub fn meet_in_the_middle_resumable(
    cfg: &SearchConfig,
    progress: Option<&Path>,
) -> Result<Vec<NearIntegerRecord>, SearchError> {
    cfg.validate()?;
    if cfg.k < 2 {
        return Err(SearchError::InvalidConfig("meet-in-the-middle needs k ≥ 2".into()));
    }
    let left_k = cfg.k.div_ceil(2);
    let right_k = cfg.k - left_k;
    let entries = multiset_count(cfg.n_max, left_k);
    let required = table_bytes(entries, left_k);
    if required > cfg.memory_budget as u128 {
        return Err(SearchError::MemoryBudget {
            required,
            budget: cfg.memory_budget,
        });
    }
    let table = FracTable::new(cfg.n_max);
    // Left half-sums: (key, max element, offset into the flat tuple store).
    let mut store: Vec<u32> = Vec::with_capacity(entries as usize * left_k);
    let mut rows: Vec<(u64, u32, u32)> = Vec::with_capacity(entries as usize);
    for first in 1..=cfg.n_max {
        for_each_multiset_from(first, left_k, cfg.n_max, |tuple| {
            let key = tuple
                .iter()
                .fold(0u64, |acc, &a| acc.wrapping_add(table.frac64(a)));
            let at = (store.len() / left_k) as u32;
            store.extend(tuple.iter().map(|&a| a as u32));
            rows.push((key, tuple[left_k - 1] as u32, at));
        });
    }
    rows.sort_unstable();
    let keys: Vec<u64> = rows.iter().map(|r| r.0).collect();
    let (target, window) = (cfg.target(), cfg.window());
    let shards = cfg.shard_count as u64;

    let records = run_shards(cfg, Method::Mitm, progress, |shard| {
        let mut candidates = Vec::new();
        let mut visit = |lo: usize, hi: usize, right: &[u64]| {
            for row in &rows[lo..hi] {
                if row.1 as u64 > right[0] {
                    continue;
                }
                let at = row.2 as usize * left_k;
                let mut tuple: Vec<u64> = store[at..at + left_k].iter().map(|&a| a as u64).collect();
                tuple.extend_from_slice(right);
                if !is_trivial(&table, &tuple) {
                    candidates.push(tuple);
                }
            }
        };
        for first in (1 + shard as u64..=cfg.n_max).step_by(shards as usize) {
            for_each_multiset_from(first, right_k, cfg.n_max, |right| {
                let right_key = right
                    .iter()
                    .fold(0u64, |acc, &a| acc.wrapping_add(table.frac64(a)));
                // Left keys in [want − window, want + window] mod 2^64.
                let want = target.wrapping_sub(right_key);
                let start = want.wrapping_sub(window);
                let end = want.wrapping_add(window);
                if start <= end {
                    let lo = keys.partition_point(|&x| x < start);
                    let hi = keys.partition_point(|&x| x <= end);
                    visit(lo, hi, right);
                } else {
                    let hi = keys.partition_point(|&x| x <= end);
                    visit(0, hi, right);
                    let lo = keys.partition_point(|&x| x < start);
                    visit(lo, keys.len(), right);
                }
            });
        }
        certify_candidates(cfg, candidates, Method::Mitm)
    })?;
    Ok(finish(cfg, records))
}

fn family_record(radicands: &[u64], method: Method) -> Result<NearIntegerRecord, SearchError> {
    let expr = RootSumExpr::unsigned(radicands)?;
    let cert = certified_distance_to(&expr, &Offset::zero(), crate::rootsum::INITIAL_PRECISION_BITS)?;
    let n_max = expr.n_max();
    Ok(NearIntegerRecord::from_certificate(
        expr.terms(),
        n_max,
        &cert,
        method,
        &Offset::zero(),
    ))
}

/// `√(a²−1) + √(a²+1) = 2a − 1/(4a³) + o(a⁻³)`.
pub fn family_k2(a: u64) -> Result<NearIntegerRecord, SearchError> {
    if !(2..=u32::MAX as u64 / 2).contains(&a) {
        return Err(SearchError::InvalidConfig(format!("family_k2 needs 2 ≤ a < 2^31, got {a}")));
    }
    family_record(&[a * a - 1, a * a + 1], Method::FamilyK2)
}

/// `√((t−1)²+2) + √((t+1)²+2) + √((2t)²−8)`, within `~4/t⁵` of `4t`.
pub fn family_k3(t: u64) -> Result<NearIntegerRecord, SearchError> {
    if !(3..=u32::MAX as u64 / 4).contains(&t) {
        return Err(SearchError::InvalidConfig(format!("family_k3 needs 3 ≤ t < 2^30, got {t}")));
    }
    family_record(
        &[(t - 1) * (t - 1) + 2, (t + 1) * (t + 1) + 2, 4 * t * t - 8],
        Method::FamilyK3,
    )
}

/// Outcome of checking `|Σᵢ C(m,i)(−1)^i √(n+i)| ≤ (2m−3)!!/(2^m n^(m−1/2))`.
#[derive(Debug, Clone)]
pub struct BinomialCheck {
    pub m: u64,
    pub n: u64,
    /// Enclosure of the left-hand side.
    pub lhs: Interval,
    /// Certified lower and upper enclosure of the right-hand side.
    pub rhs_lo: BigRational,
    pub rhs_hi: BigRational,
    /// `lhs.hi ≤ rhs_lo`: the inequality is certified.
    pub holds: bool,
    pub precision_bits: u32,
}

/// Largest `m` for [`binomial_cancellation`]; the expression has `2^m` terms.
pub const MAX_BINOMIAL_ORDER: u64 = 16;

pub fn binomial_expr(m: u64, n: u64) -> Result<RootSumExpr, SearchError> {
    if m == 0 || m > MAX_BINOMIAL_ORDER {
        return Err(SearchError::InvalidConfig(format!(
            "binomial order must be in 1..={MAX_BINOMIAL_ORDER}"
        )));
    }
    if n == 0 {
        return Err(SearchError::InvalidConfig("n must be positive".into()));
    }
    let mut terms = Vec::new();
    for i in 0..=m {
        let c = signed_binomial(m, i);
        let sign = if c.is_negative() { TermSign::Minus } else { TermSign::Plus };
        let count = c.abs().to_u64().expect("binomials of order ≤ 16 are small");
        terms.extend(std::iter::repeat_n(Term { radicand: n + i, sign }, count as usize));
    }
    Ok(RootSumExpr::new(terms)?)
}

pub fn binomial_cancellation(m: u64, n: u64) -> Result<BinomialCheck, SearchError> {
    let expr = binomial_expr(m, n)?;
    let numerator = BigInt::from(double_factorial(2 * m as i64 - 3));
    // rhs = (2m−3)!! / (2^m · n^(m−1) · √n)
    let base = BigInt::from(n).pow(m as u32 - 1) << (m as u32);
    let mut bits = crate::rootsum::INITIAL_PRECISION_BITS;
    loop {
        let lhs = expr.enclose(bits).abs();
        let root = sqrt_enclosure(n, bits).map_err(RootSumError::from)?;
        let lo_den = root.hi().to_rational() * BigRational::from_integer(base.clone());
        let hi_den = root.lo().to_rational() * BigRational::from_integer(base.clone());
        let rhs_lo = BigRational::from_integer(numerator.clone()) / lo_den;
        let rhs_hi = BigRational::from_integer(numerator.clone()) / hi_den;
        let lhs_hi = lhs.hi().to_rational();
        let decided_true = lhs_hi <= rhs_lo;
        let decided_false = lhs.lo().to_rational() > rhs_hi;
        if decided_true || decided_false || bits >= MAX_CERTIFY_BITS {
            return Ok(BinomialCheck {
                m,
                n,
                lhs,
                rhs_lo,
                rhs_hi,
                holds: decided_true,
                precision_bits: bits,
            });
        }
        bits *= 2;
    }
}

/// The binomial combination as a search record (nearest integer is 0).
pub fn binomial_record(m: u64, n: u64) -> Result<NearIntegerRecord, SearchError> {
    let expr = binomial_expr(m, n)?;
    let cert = certified_distance_to(&expr, &Offset::zero(), crate::rootsum::INITIAL_PRECISION_BITS)?;
    Ok(NearIntegerRecord::from_certificate(
        expr.terms(),
        n + m,
        &cert,
        Method::Binomial,
        &Offset::zero(),
    ))
}
