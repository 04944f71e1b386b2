use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use sqrtsum::expsum::{
    bound_probe, count_near, fourier_count, probe_csv, ExpSumError, HatKernel, DEFAULT_PHASE_BITS,
};
use sqrtsum::gaps::{gap_report, GapError};
use sqrtsum::known::{render_table, verify_known};
use sqrtsum::rootsum::{
    certified_distance_to, certified_sign, enclosure_decimal, is_integer, Offset, RootSumError, RootSumExpr,
};
use sqrtsum::search::{
    binomial_record, exhaustive_search_resumable, family_k2, family_k3, meet_in_the_middle_resumable,
    write_jsonl, NearIntegerRecord, SearchConfig, SearchError,
};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "sqrtsum", version, about = "Certified arithmetic for sums of square roots near integers")]
struct Cli {
    /// Working precision in bits for evaluation.
    #[arg(long, global = true, default_value_t = 128, value_parser = clap::value_parser!(u32).range(32..))]
    precision: u32,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "SQRTSUM_PARALLELISM", value_parser = clap::value_parser!(u32).range(1..))]
    parallelism: Option<u32>,
    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified distance of a signed root sum to the nearest integer.
    Eval(TermsArg),
    /// Exact integrality and sign of a signed root sum.
    Decide(TermsArg),
    /// Search for near-integer tuples.
    Search(SearchArgs),
    /// Exponential sums over a grid of frequencies.
    Expsum(ExpsumArgs),
    /// Both sides of the Fourier counting identity.
    Count(CountArgs),
    /// Gap statistics of the fractional parts.
    Gaps(GapsArgs),
    /// Re-derive the published numerical examples.
    VerifyKnown,
}

#[derive(Debug, Args)]
struct TermsArg {
    /// Signed radicands, e.g. `+3 +20 +23` or `29 1097 3153 -226 -2324 -987`.
    #[arg(required = true, num_args = 1.., allow_hyphen_values = true)]
    terms: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Mitm,
    FamilyK2,
    FamilyK3,
    Binomial,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Exhaustive)]
    method: MethodArg,
    /// Number of terms (the order `m` for `binomial`).
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Largest radicand (largest family parameter for the family methods).
    #[arg(long)]
    n: u64,
    #[arg(long, default_value = "1e-4")]
    threshold: String,
    /// Search near `ℤ + y` instead of `ℤ`.
    #[arg(long = "offset-y", default_value = "0")]
    offset_y: String,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Keep only the best records.
    #[arg(long)]
    limit: Option<usize>,
    /// Shard progress file; an interrupted search resumes from it.
    #[arg(long)]
    progress: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExpsumArgs {
    /// Comma-separated frequencies.
    #[arg(long = "ell-grid", value_delimiter = ',', required = true)]
    ell_grid: Vec<i64>,
    #[arg(long)]
    n: u64,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    s: f64,
    /// Frequency cutoff.
    #[arg(long = "L", alias = "cutoff")]
    cutoff: i64,
    #[arg(long = "offset-y", default_value = "0")]
    offset_y: String,
}

#[derive(Debug, Args)]
struct GapsArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: u64,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{0}")]
    Runtime(String),
}

impl From<RootSumError> for CliError {
    fn from(e: RootSumError) -> Self {
        match e {
            RootSumError::BoundViolated { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::RootSum(inner) => inner.into(),
            SearchError::Io(inner) => CliError::Io(inner),
            SearchError::Undecided(_) | SearchError::Json(_) => CliError::Runtime(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<ExpSumError> for CliError {
    fn from(e: ExpSumError) -> Self {
        match e {
            ExpSumError::RootSum(inner) => inner.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<GapError> for CliError {
    fn from(e: GapError) -> Self {
        match e {
            GapError::RootSum(inner) => inner.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

/// Rendered output plus whether every check it reports passed.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

fn parse_terms(arg: &TermsArg) -> Result<RootSumExpr, CliError> {
    Ok(arg.terms.join(" ").parse::<RootSumExpr>()?)
}

fn parse_offset(text: &str) -> Result<Offset, CliError> {
    Offset::parse(text).map_err(|e| CliError::Invalid(format!("--offset-y: {e}")))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn cmd_eval(arg: &TermsArg, precision: u32, format: Format) -> Result<Outcome, CliError> {
    let e = parse_terms(arg)?;
    let cert = certified_distance_to(&e, &Offset::zero(), precision)?;
    let value = e.enclose(cert.precision_bits.max(precision));
    let (value_text, value_radius) = enclosure_decimal(&value, 25);
    let (distance, radius) = cert.decimal(15);
    let text = match format {
        Format::Json => pretty(&json!({
            "expression": e.to_string(),
            "value": value_text,
            "value_radius": value_radius,
            "nearest_integer": cert.nearest_integer.to_string(),
            "distance": distance,
            "radius": radius,
            "precision_bits": cert.precision_bits.to_string(),
            "exactly_integer": cert.exactly_integer.to_string(),
        })),
        Format::Csv => format!(
            "expression,value,value_radius,nearest_integer,distance,radius,precision_bits,exactly_integer\n\
             {},{},{},{},{},{},{},{}\n",
            e, value_text, value_radius, cert.nearest_integer, distance, radius, cert.precision_bits, cert.exactly_integer
        ),
        Format::Text if cert.exactly_integer => format!("{e}\nEXACT INTEGER {}\n", cert.nearest_integer),
        Format::Text => format!(
            "{e}\nvalue     {value_text} ± {value_radius}\nnearest   {}\ndistance  {distance} ± {radius}\nprecision {} bits\n",
            cert.nearest_integer, cert.precision_bits
        ),
    };
    Ok(Outcome::ok(text))
}

fn cmd_decide(arg: &TermsArg, format: Format) -> Result<Outcome, CliError> {
    let e = parse_terms(arg)?;
    let integer = is_integer(&e)?;
    let sign = match certified_sign(&e)? {
        std::cmp::Ordering::Less => "negative",
        std::cmp::Ordering::Equal => "zero",
        std::cmp::Ordering::Greater => "positive",
    };
    let integer_text = integer.as_ref().map(|v| v.to_string());
    let text = match format {
        Format::Json => pretty(&json!({
            "expression": e.to_string(),
            "is_integer": integer.is_some().to_string(),
            "integer_value": integer_text,
            "sign": sign,
        })),
        Format::Csv => format!(
            "expression,is_integer,integer_value,sign\n{},{},{},{}\n",
            e,
            integer.is_some(),
            integer_text.clone().unwrap_or_default(),
            sign
        ),
        Format::Text => match integer_text {
            Some(v) => format!("{e}\ninteger   yes ({v})\nsign      {sign}\n"),
            None => format!("{e}\ninteger   no\nsign      {sign}\n"),
        },
    };
    Ok(Outcome::ok(text))
}

fn records_csv(records: &[NearIntegerRecord]) -> String {
    let mut out = String::from("radicands,signs,k,n_max,nearest_integer,distance,radius,precision_bits,method\n");
    for r in records {
        let radicands: Vec<String> = r.radicands.iter().map(u64::to_string).collect();
        let signs: Vec<&str> = r
            .signs
            .iter()
            .map(|s| if s.as_i64() > 0 { "+1" } else { "-1" })
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            radicands.join(";"),
            signs.join(";"),
            r.k,
            r.n_max,
            r.nearest_integer,
            r.distance,
            r.radius,
            r.precision_bits,
            r.method
        ));
    }
    out
}

fn cmd_search(args: &SearchArgs, format: Format) -> Result<Outcome, CliError> {
    let records = match args.method {
        MethodArg::Exhaustive | MethodArg::Mitm => {
            let mut cfg = SearchConfig::new(args.k, args.n, &args.threshold)?
                .with_offset(parse_offset(&args.offset_y)?)
                .with_shards(args.shards);
            if let Some(limit) = args.limit {
                cfg = cfg.with_record_limit(limit);
            }
            cfg.validate()?;
            let progress = args.progress.as_deref();
            if args.method == MethodArg::Exhaustive {
                exhaustive_search_resumable(&cfg, progress)?
            } else {
                meet_in_the_middle_resumable(&cfg, progress)?
            }
        }
        MethodArg::FamilyK2 => (2..=args.n).map(family_k2).collect::<Result<Vec<_>, _>>()?,
        MethodArg::FamilyK3 => (3..=args.n).map(family_k3).collect::<Result<Vec<_>, _>>()?,
        MethodArg::Binomial => vec![binomial_record(args.k as u64, args.n)?],
    };
    let text = match format {
        Format::Csv => records_csv(&records),
        Format::Json | Format::Text => {
            let mut buf = Vec::new();
            write_jsonl(&records, &mut buf)?;
            String::from_utf8(buf).expect("json is utf-8")
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_expsum(args: &ExpsumArgs, format: Format) -> Result<Outcome, CliError> {
    let rows = bound_probe(args.n, &args.ell_grid, DEFAULT_PHASE_BITS)?;
    let text = match format {
        Format::Csv | Format::Text => probe_csv(&rows),
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "ell": r.sum.ell.to_string(),
                        "n": r.sum.n.to_string(),
                        "re": format!("{:e}", r.sum.value.re),
                        "im": format!("{:e}", r.sum.value.im),
                        "abs": format!("{:e}", r.sum.abs()),
                        "err_radius": format!("{:e}", r.sum.radius),
                        "vdc_shape": format!("{:e}", r.vdc_shape),
                        "eph_shape": format!("{:e}", r.eph_shape),
                    })
                })
                .collect();
            pretty(&serde_json::Value::Array(items))
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_count(args: &CountArgs, format: Format) -> Result<Outcome, CliError> {
    let kernel = HatKernel::new(args.s)?;
    let offset = parse_offset(&args.offset_y)?;
    let direct = count_near(args.k, args.n, &kernel, &offset)?;
    let fourier = fourier_count(args.k, args.n, &kernel, args.cutoff, &offset)?;
    let difference = (direct.direct_weighted - fourier.estimate).abs();
    let budget = fourier.tail_bound + fourier.phase_error + direct.direct_error;
    let holds = difference <= budget;
    let trivial = direct.trivial_count.map(|c| c.to_string());
    let text = match format {
        Format::Json => pretty(&json!({
            "k": args.k.to_string(),
            "n": args.n.to_string(),
            "s": format!("{:e}", args.s),
            "L": args.cutoff.to_string(),
            "offset": offset.to_string(),
            "direct_weighted": format!("{:e}", direct.direct_weighted),
            "direct_cardinality": direct.direct_cardinality.to_string(),
            "trivial_count": trivial,
            "fourier_estimate": format!("{:e}", fourier.estimate),
            "tail_bound": format!("{:e}", fourier.tail_bound),
            "phase_error": format!("{:e}", fourier.phase_error + direct.direct_error),
            "difference": format!("{:e}", difference),
            "identity_holds": holds.to_string(),
        })),
        Format::Csv => format!(
            "k,n,s,L,direct_weighted,direct_cardinality,trivial_count,fourier_estimate,tail_bound,phase_error,difference,identity_holds\n\
             {},{},{:e},{},{:e},{},{},{:e},{:e},{:e},{:e},{}\n",
            args.k,
            args.n,
            args.s,
            args.cutoff,
            direct.direct_weighted,
            direct.direct_cardinality,
            trivial.clone().unwrap_or_default(),
            fourier.estimate,
            fourier.tail_bound,
            fourier.phase_error + direct.direct_error,
            difference,
            holds
        ),
        Format::Text => format!(
            "direct weighted    {:e}\ndirect cardinality {}\ntrivial count      {}\nfourier estimate   {:e}\n\
             tail bound         {:e}\nphase error        {:e}\ndifference         {:e}\nidentity           {}\n",
            direct.direct_weighted,
            direct.direct_cardinality,
            trivial.unwrap_or_else(|| "-".to_string()),
            fourier.estimate,
            fourier.tail_bound,
            fourier.phase_error + direct.direct_error,
            difference,
            if holds { "holds" } else { "VIOLATED" }
        ),
    };
    Ok(Outcome { text, ok: holds })
}

fn cmd_gaps(args: &GapsArgs, format: Format) -> Result<Outcome, CliError> {
    let r = gap_report(args.k, args.n)?;
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&r).map_err(|e| CliError::Runtime(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => r.histogram_csv(),
        Format::Text => {
            let mut s = format!(
                "k {} n {}\npoints            {}\nlargest gap       {:e} between {:e} and {:e}\nsmallest nonzero  {}\n",
                r.k,
                r.n,
                r.point_count,
                r.largest_gap,
                r.largest_gap_from,
                r.largest_gap_to,
                r.smallest_nonzero_element
                    .map(|v| format!("{v:e}"))
                    .unwrap_or_else(|| "-".to_string())
            );
            for lg in &r.large_gaps {
                s.push_str(&format!("gaps > {:e}  {}\n", lg.threshold, lg.count));
            }
            s
        }
    };
    Ok(Outcome::ok(text))
}

fn cmd_verify_known(format: Format) -> Result<Outcome, CliError> {
    let checks = verify_known()?;
    let ok = checks.iter().all(|c| c.passed);
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&checks).map_err(|e| CliError::Runtime(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("name,expected,observed,passed\n");
            for c in &checks {
                s.push_str(&format!("\"{}\",\"{}\",\"{}\",{}\n", c.name, c.expected, c.observed, c.passed));
            }
            s
        }
        Format::Text => render_table(&checks),
    };
    Ok(Outcome { text, ok })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(threads) = cli.parallelism {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Eval(arg) => cmd_eval(arg, cli.precision, cli.format),
        Command::Decide(arg) => cmd_decide(arg, cli.format),
        Command::Search(args) => cmd_search(args, cli.format),
        Command::Expsum(args) => cmd_expsum(args, cli.format),
        Command::Count(args) => cmd_count(args, cli.format),
        Command::Gaps(args) => cmd_gaps(args, cli.format),
        Command::VerifyKnown => cmd_verify_known(cli.format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                CliError::Invalid(_) => EXIT_INVALID,
                _ => EXIT_RUNTIME,
            });
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, &outcome.text),
        None => io::stdout().lock().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
