//! Batch driver for the `lpdi` library.
//!
//! Four subcommands cover the library surface: `constants` prints the named
//! quantities at an exponent, `classify` runs the digit-pattern verdict,
//! `flow` scans the diagonal flow and reports collision estimates, and
//! `construct` emits witness digit streams. All JSON output is deterministic:
//! keys are sorted and every float is printed at 15 significant digits, so
//! reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::{json, Value};

use lpdi::cf::ContinuedFraction;
use lpdi::classifier;
use lpdi::error::Error as LibError;
use lpdi::flow::{self, TraceRow};
use lpdi::geometry;
use lpdi::witness::{self, WitnessStream};

#[derive(Parser)]
#[command(
    name = "lpdi",
    version,
    about = "Dirichlet-improvability toolkit: constants, classification, flow scans, witnesses"
)]
struct Cli {
    /// JSON file supplying defaults for any long flag (explicit flags win).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Print sigma, the critical determinant, and the Dirichlet bound at an exponent.
    Constants(ConstantsArgs),
    /// Decide or estimate improvability of a number at an exponent.
    Classify(ClassifyArgs),
    /// Scan the diagonal flow and report critical times and distance estimates.
    Flow(FlowArgs),
    /// Emit a witness digit stream for one of the separation presets.
    Construct(ConstructArgs),
}

/// Number-selection flags shared by `classify`, `flow`, and `construct`.
#[derive(Args, Default)]
struct NumberArgs {
    /// Named constant; only `e` is recognized.
    #[arg(long, value_name = "NAME", conflicts_with_all = ["rational", "periodic"])]
    number: Option<String>,

    /// Rational input written as P/Q (a bare integer means P/1).
    #[arg(long, value_name = "P/Q", conflicts_with = "periodic")]
    rational: Option<String>,

    /// Quadratic irrational given by its repeating digits, comma-separated;
    /// use `pre;per` to put a preperiod in front. The integer part is 0.
    #[arg(long, value_name = "DIGITS")]
    periodic: Option<String>,
}

/// Exponent-selection flags shared by every subcommand that needs a norm.
#[derive(Args, Default)]
struct ExponentArgs {
    /// Norm exponent, at least 1; accepts `inf`.
    #[arg(long, value_name = "P")]
    p: Option<String>,

    /// Use the bifurcation exponent (where the critical lattice family
    /// changes shape) as the norm exponent.
    #[arg(long, conflicts_with = "p")]
    p0: bool,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    exponent: ExponentArgs,

    /// Working precision in bits for the bifurcation-exponent solve.
    #[arg(long, value_name = "BITS")]
    precision: Option<usize>,

    /// Write the JSON here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    number: NumberArgs,

    /// Classify digits from a file instead of a closed-form number. Accepts
    /// the JSON emitted by `construct` (reading its `digits_prefix`) or a
    /// plain list of digits separated by commas or whitespace.
    #[arg(long, value_name = "PATH",
          conflicts_with_all = ["number", "rational", "periodic"])]
    digit_file: Option<PathBuf>,

    #[command(flatten)]
    exponent: ExponentArgs,

    /// Scan horizon in digits (clamped to the file length for digit files).
    #[arg(long, value_name = "N")]
    digits: Option<usize>,

    /// Write the JSON here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    number: NumberArgs,

    #[command(flatten)]
    exponent: ExponentArgs,

    /// Scan the flow over [1, TMAX].
    #[arg(long, value_name = "TMAX")]
    tmax: Option<f64>,

    /// Worker threads for the scan; the result is identical for any count.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,

    /// `json` prints the collision summary; `csv` prints the full trace.
    #[arg(long, value_name = "FMT")]
    format: Option<String>,

    /// Write the output here instead of stdout. With `--format csv` the
    /// trace goes to the file and the JSON summary still prints to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    /// Preset to emit: di-minus-ba, di1-minus-di2, di2-minus-di1, or ba-w.
    #[arg(long, value_name = "NAME")]
    label: Option<String>,

    /// Digits to materialize.
    #[arg(long, value_name = "N")]
    digits: Option<usize>,

    /// Density parameter for the ba-w preset, strictly between 0 and 1.
    #[arg(long, value_name = "EPS")]
    epsilon: Option<f64>,

    /// Word for the ba-w preset as comma-separated digits; repeat the flag
    /// to cycle through several words.
    #[arg(long, value_name = "DIGITS")]
    word: Vec<String>,

    /// Seed for the free digits of the ba-w preset.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    #[command(flatten)]
    number: NumberArgs,

    #[command(flatten)]
    exponent: ExponentArgs,

    /// Write the JSON here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Map an error chain to the documented exit codes: 2 for bad input, 3 for
/// horizons and resource limits. Anything the library did not classify is a
/// usage problem.
fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|cause| cause.downcast_ref::<LibError>().map(LibError::exit_code))
        .unwrap_or(2)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Commands::Constants(args) => cmd_constants(args, &cfg),
        Commands::Classify(args) => cmd_classify(args, &cfg),
        Commands::Flow(args) => cmd_flow(args, &cfg),
        Commands::Construct(args) => cmd_construct(args, &cfg),
    }
}

// ---------------------------------------------------------------------------
// Config file and flag merging
// ---------------------------------------------------------------------------

fn load_config(path: Option<&Path>) -> Result<Value> {
    let Some(path) = path else {
        return Ok(Value::Null);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| LibError::domain(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| LibError::domain(format!("config {} is not JSON: {e}", path.display())))?;
    if !value.is_object() {
        return Err(LibError::domain("config must be a JSON object").into());
    }
    Ok(value)
}

fn cfg_string(cfg: &Value, key: &str) -> Option<String> {
    match cfg.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn cfg_f64(cfg: &Value, key: &str) -> Option<f64> {
    match cfg.get(key)? {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn cfg_usize(cfg: &Value, key: &str) -> Option<usize> {
    cfg.get(key)?.as_u64().map(|n| n as usize)
}

fn cfg_u64(cfg: &Value, key: &str) -> Option<u64> {
    cfg.get(key)?.as_u64()
}

fn cfg_bool(cfg: &Value, key: &str) -> Option<bool> {
    cfg.get(key)?.as_bool()
}

/// Words may appear in a config as one string or a list of strings.
fn cfg_words(cfg: &Value) -> Vec<String> {
    match cfg.get("word") {
        Some(Value::String(s)) => vec![s.clone()],
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|v| v.as_str().map(str::to_owned))
            .collect(),
        _ => Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Input parsing
// ---------------------------------------------------------------------------

fn parse_p(text: &str) -> Result<f64> {
    let trimmed = text.trim();
    if trimmed.eq_ignore_ascii_case("inf") || trimmed.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    trimmed
        .parse::<f64>()
        .map_err(|_| LibError::domain(format!("cannot parse exponent `{trimmed}`")).into())
}

/// Resolve the norm exponent: flags first, then the config file. `--p0`
/// resolves through the cached bifurcation solve.
fn resolve_p(exp: &ExponentArgs, cfg: &Value) -> Result<f64> {
    if let Some(text) = &exp.p {
        return parse_p(text);
    }
    if exp.p0 {
        return Ok(geometry::p_zero(1e-12)?);
    }
    if let Some(text) = cfg_string(cfg, "p") {
        return parse_p(&text);
    }
    if cfg_bool(cfg, "p0").unwrap_or(false) {
        return Ok(geometry::p_zero(1e-12)?);
    }
    Err(LibError::domain("no exponent given; pass --p or --p0").into())
}

fn parse_digit_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| LibError::domain(format!("cannot parse digit `{s}`")).into())
        })
        .collect()
}

fn parse_periodic(text: &str) -> Result<ContinuedFraction> {
    let (pre_text, per_text) = match text.split_once(';') {
        Some((pre, per)) => (pre, per),
        None => ("", text),
    };
    let preperiod = parse_digit_list(pre_text)?;
    let period = parse_digit_list(per_text)?;
    Ok(ContinuedFraction::periodic(0, preperiod, period)?)
}

fn parse_rational(text: &str) -> Result<ContinuedFraction> {
    let (num_text, den_text) = text.split_once('/').unwrap_or((text, "1"));
    let parse = |s: &str| {
        BigInt::from_str(s.trim())
            .map_err(|_| LibError::domain(format!("cannot parse integer `{s}`")))
    };
    Ok(ContinuedFraction::from_rational(
        &parse(num_text)?,
        &parse(den_text)?,
    )?)
}

fn number_from(name: Option<&str>, rational: Option<&str>, periodic: Option<&str>) -> Result<Option<ContinuedFraction>> {
    let given = [name.is_some(), rational.is_some(), periodic.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if given > 1 {
        return Err(LibError::domain("pass only one of --number, --rational, --periodic").into());
    }
    if let Some(name) = name {
        return match name.trim() {
            "e" | "E" => Ok(Some(ContinuedFraction::E)),
            other => Err(LibError::domain(format!("unknown named constant `{other}`")).into()),
        };
    }
    if let Some(text) = rational {
        return Ok(Some(parse_rational(text)?));
    }
    if let Some(text) = periodic {
        return Ok(Some(parse_periodic(text)?));
    }
    Ok(None)
}

/// Resolve the input number, falling back to the config file when no
/// selection flag is present.
fn resolve_number(num: &NumberArgs, cfg: &Value) -> Result<ContinuedFraction> {
    maybe_number(num, cfg)?
        .ok_or_else(|| LibError::domain("no input; pass --number, --rational, or --periodic").into())
}

fn maybe_number(num: &NumberArgs, cfg: &Value) -> Result<Option<ContinuedFraction>> {
    let any_flag = num.number.is_some() || num.rational.is_some() || num.periodic.is_some();
    if any_flag {
        number_from(
            num.number.as_deref(),
            num.rational.as_deref(),
            num.periodic.as_deref(),
        )
    } else {
        let name = cfg_string(cfg, "number");
        let rational = cfg_string(cfg, "rational");
        let periodic = cfg_string(cfg, "periodic");
        number_from(name.as_deref(), rational.as_deref(), periodic.as_deref())
    }
}

/// Digit files are either the JSON a `construct` run emits or a bare list.
fn read_digit_file(path: &Path) -> Result<Vec<u64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| LibError::domain(format!("cannot read {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| LibError::domain(format!("{} is not JSON: {e}", path.display())))?;
        let digits = value
            .get("digits_prefix")
            .or_else(|| value.get("digits"))
            .and_then(Value::as_array)
            .ok_or_else(|| {
                LibError::domain(format!(
                    "{} has no digits_prefix or digits array",
                    path.display()
                ))
            })?;
        return digits
            .iter()
            .map(|v| {
                v.as_u64()
                    .ok_or_else(|| LibError::domain("digit entries must be positive integers").into())
            })
            .collect();
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| LibError::domain(format!("cannot parse digit `{s}`")).into())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Deterministic rendering
// ---------------------------------------------------------------------------

/// Render JSON with sorted keys and every float at 15 significant digits.
fn render_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(n, out),
        Value::String(s) => write_quoted(s, out),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(is_scalar) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(item, indent, out);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(",\n");
                    }
                    push_indent(indent + 1, out);
                    write_value(item, indent + 1, out);
                }
                out.push('\n');
                push_indent(indent, out);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (key, val)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(",\n");
                }
                push_indent(indent + 1, out);
                write_quoted(key, out);
                out.push_str(": ");
                write_value(val, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn is_scalar(value: &Value) -> bool {
    !matches!(value, Value::Array(_) | Value::Object(_))
}

fn push_indent(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn write_quoted(text: &str, out: &mut String) {
    // serde_json handles the escaping rules; strings never carry floats.
    out.push_str(&serde_json::to_string(text).expect("string serialization is infallible"));
}

/// Integers print verbatim; everything serde marked as floating prints in
/// scientific notation with 15 significant digits.
fn write_number(n: &serde_json::Number, out: &mut String) {
    if let Some(u) = n.as_u64() {
        let _ = write!(out, "{u}");
    } else if let Some(i) = n.as_i64() {
        let _ = write!(out, "{i}");
    } else {
        let _ = write!(out, "{}", fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.14e}")
}

/// An exponent as a JSON value: a number when finite, the string `inf`
/// otherwise (JSON has no infinity literal).
fn p_json(p: f64) -> Value {
    if p.is_infinite() {
        json!("inf")
    } else {
        json!(p)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| LibError::internal(format!("cannot write {}: {e}", path.display())).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_constants(args: ConstantsArgs, cfg: &Value) -> Result<()> {
    let p = resolve_p(&args.exponent, cfg)?;
    let precision = args.precision.or_else(|| cfg_usize(cfg, "precision"));
    let constants = geometry::constants(p)?;
    let regime = classifier::regime_of(p)?;

    // Higher working precision re-derives the bifurcation exponent from
    // scratch; at double precision the two solvers agree to far below 1e-9,
    // so the printed value only certifies, never changes.
    let p_zero = match precision {
        Some(bits) => geometry::p_zero_refined(bits.max(64), 1e-14)?.to_f64(),
        None => constants.p0,
    };

    let value = json!({
        "p": p_json(p),
        "sigma": constants.sigma,
        "delta": constants.delta,
        "dirichlet_bound": constants.dirichlet_bound,
        "p0": p_zero,
        "regime": serde_json::to_value(regime.tag)?,
    });
    emit(&render_json(&value), args.out.as_deref())
}

fn cmd_classify(args: ClassifyArgs, cfg: &Value) -> Result<()> {
    let p = resolve_p(&args.exponent, cfg)?;
    let horizon = args.digits.or_else(|| cfg_usize(cfg, "digits")).unwrap_or(200);

    let digit_file = args
        .digit_file
        .or_else(|| cfg_string(cfg, "digit_file").map(PathBuf::from));
    let verdict = match digit_file {
        Some(path) => {
            let digits = read_digit_file(&path)?;
            let horizon = horizon.min(digits.len());
            classifier::classify_digits(&digits, p, horizon)?
        }
        None => {
            let x = resolve_number(&args.number, cfg)?;
            classifier::classify(&x, p, horizon)?
        }
    };

    let value = serde_json::to_value(&verdict)?;
    emit(&render_json(&value), args.out.as_deref())
}

fn cmd_flow(args: FlowArgs, cfg: &Value) -> Result<()> {
    let p = resolve_p(&args.exponent, cfg)?;
    let x = resolve_number(&args.number, cfg)?;
    let t_max = args.tmax.or_else(|| cfg_f64(cfg, "tmax")).unwrap_or(1e4);
    let workers = args
        .workers
        .or_else(|| cfg_usize(cfg, "workers"))
        .unwrap_or(1)
        .max(1);
    let format = args
        .format
        .or_else(|| cfg_string(cfg, "format"))
        .unwrap_or_else(|| "json".to_owned());

    match format.as_str() {
        "json" => {
            let estimate = flow::critical_times_parallel(&x, p, t_max, workers)?;
            let value = summary_value(p, &estimate)?;
            emit(&render_json(&value), args.out.as_deref())
        }
        "csv" => {
            let (estimate, trace) = flow::flow_trace(&x, p, t_max, workers)?;
            let csv = render_csv(&trace);
            if let Some(path) = args.out.as_deref() {
                emit(&csv, Some(path))?;
                let value = summary_value(p, &estimate)?;
                emit(&render_json(&value), None)
            } else {
                emit(&csv, None)
            }
        }
        other => Err(LibError::domain(format!(
            "unknown format `{other}`; expected json or csv"
        ))
        .into()),
    }
}

fn summary_value(p: f64, estimate: &flow::FlowEstimate) -> Result<Value> {
    let mut value = serde_json::to_value(estimate)?;
    let map = value
        .as_object_mut()
        .expect("flow summaries serialize to objects");
    map.insert("p".to_owned(), p_json(p));
    Ok(value)
}

fn render_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("t,lambda1,lambda2,is_crossing,locus_distance\n");
    for row in trace {
        let locus = row.locus_distance.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(row.t),
            fmt_f64(row.lambda1),
            fmt_f64(row.lambda2),
            row.is_crossing,
            locus
        );
    }
    out
}

fn cmd_construct(args: ConstructArgs, cfg: &Value) -> Result<()> {
    let label = args
        .label
        .or_else(|| cfg_string(cfg, "label"))
        .ok_or_else(|| LibError::domain("no preset given; pass --label"))?;
    let digits = args.digits.or_else(|| cfg_usize(cfg, "digits")).unwrap_or(4096);

    let value = match label.as_str() {
        "di-minus-ba" => {
            let p = resolve_p(&args.exponent, cfg)?;
            let base = base_number(&args.number, cfg)?;
            let stream = witness::witness_di_minus_ba(p, &base, digits)?;
            construct_value(&stream, digits, &[p, f64::INFINITY])?
        }
        "di1-minus-di2" => {
            let base = base_number(&args.number, cfg)?;
            let stream = witness::witness_di1_minus_di2(&base, digits)?;
            construct_value(&stream, digits, &[1.0, 2.0])?
        }
        "di2-minus-di1" => {
            let base = base_number(&args.number, cfg)?;
            let stream = witness::witness_di2_minus_di1(&base, digits)?;
            construct_value(&stream, digits, &[1.0, 2.0])?
        }
        "ba-w" => {
            let epsilon = args
                .epsilon
                .or_else(|| cfg_f64(cfg, "epsilon"))
                .ok_or_else(|| LibError::domain("the ba-w preset needs --epsilon"))?;
            let word_texts = if args.word.is_empty() {
                cfg_words(cfg)
            } else {
                args.word.clone()
            };
            if word_texts.is_empty() {
                return Err(LibError::domain("the ba-w preset needs at least one --word").into());
            }
            let words = word_texts
                .iter()
                .map(|w| parse_digit_list(w))
                .collect::<Result<Vec<_>>>()?;
            let seed = args.seed.or_else(|| cfg_u64(cfg, "seed")).unwrap_or(7);
            let built = witness::ba_w(epsilon, &words, digits, seed)?;
            let balance = witness::good_condition_check(epsilon, &words, digits)?;
            let mut value = serde_json::to_value(&built)?;
            let map = value
                .as_object_mut()
                .expect("witness records serialize to objects");
            map.insert("balance".to_owned(), serde_json::to_value(&balance)?);
            value
        }
        other => {
            return Err(LibError::domain(format!(
                "unknown preset `{other}`; expected di-minus-ba, di1-minus-di2, \
                 di2-minus-di1, or ba-w"
            ))
            .into())
        }
    };

    emit(&render_json(&value), args.out.as_deref())
}

/// Insertion presets default to the all-ones base when no number is given.
fn base_number(num: &NumberArgs, cfg: &Value) -> Result<ContinuedFraction> {
    match maybe_number(num, cfg)? {
        Some(x) => Ok(x),
        None => Ok(ContinuedFraction::periodic(0, vec![], vec![1])?),
    }
}

/// The emitted stream plus one classification claim per decisive exponent,
/// so a consumer can re-run `classify` on the digits and compare.
fn construct_value(stream: &WitnessStream, digits: usize, targets: &[f64]) -> Result<Value> {
    let mut value = stream.to_json(digits);
    let claims = targets
        .iter()
        .map(|&target| {
            let verdict = witness::classify_witness(stream, target)?;
            let rendered = serde_json::to_value(&verdict)?;
            Ok(json!({
                "p": p_json(target),
                "status": rendered.get("status").cloned().unwrap_or(Value::Null),
                "justification": rendered.get("justification").cloned().unwrap_or(Value::Null),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let map = value
        .as_object_mut()
        .expect("witness streams serialize to objects");
    map.insert("claims".to_owned(), Value::Array(claims));
    Ok(value)
}
