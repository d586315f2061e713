//! Command-line front end.
//!
//! Every command writes one table, as CSV (header row, `,` separator, `.`
//! decimal point, LF line endings, 17 significant digits) or, with `--json`,
//! as a JSON document using the same field names.
//!
//! Exit status: 0 success, 1 usage or parse error, 2 model-validation failure,
//! 3 numerical failure, 4 out-of-domain request.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exactdist;
use crate::model::{self, LinearRepresentation};
use crate::ratefn::{self, RateFunction};
use crate::sampler;
use crate::spectral;

/// Options of one invocation.
#[derive(Debug, Parser)]
#[command(name = "wfa-ldp", version, about = "Symbol-count large deviations for weighted automata over {a, b}")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Emit a JSON document instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the output to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check primitivity, the support condition and the spectral radii of A and B.
    Validate {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
    },
    /// Perron data, drift, variance coefficient and rate-function domain.
    Analyze {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// Also evaluate the spectral curve at these tilts.
        #[arg(long, value_name = "T[,T...]", value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
    },
    /// Tabulate x, tau_x, I(x), I'(x) over a grid.
    RateCurve {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// MIN:MAX:POINTS; defaults to 99 points spanning the domain.
        #[arg(long, value_name = "MIN:MAX:POINTS", allow_hyphen_values = true)]
        grid: Option<GridSpec>,
    },
    /// Exact law of the number of a's in a word of length N.
    Distribution {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, value_name = "N")]
        n: usize,
    },
    /// Compare -(1/n) log Pr(tail) with I(x) for each n.
    VerifyLdp {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, value_name = "X", allow_hyphen_values = true)]
        x: f64,
        #[arg(long, value_name = "N[,N...]", value_delimiter = ',', required = true)]
        n: Vec<usize>,
    },
    /// Histogram of the number of a's over seeded random words.
    Sample {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, value_name = "N")]
        n: usize,
        #[arg(long, value_name = "N")]
        samples: usize,
        #[arg(long, value_name = "S", default_value_t = 0)]
        seed: u64,
        /// Also write the sampled words, one per line, to PATH.
        #[arg(long, value_name = "PATH")]
        dump_words: Option<PathBuf>,
    },
}

/// `MIN:MAX:POINTS` with `MIN < MAX` and `POINTS >= 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        ratefn::linspace(self.min, self.max, self.points)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts[..] else {
            return Err(format!("expected MIN:MAX:POINTS, got {s:?}"));
        };
        let min: f64 = min.trim().parse().map_err(|e| format!("bad MIN: {e}"))?;
        let max: f64 = max.trim().parse().map_err(|e| format!("bad MAX: {e}"))?;
        let points: usize = points.trim().parse().map_err(|e| format!("bad POINTS: {e}"))?;
        if min.is_nan() || max.is_nan() || min >= max {
            return Err(format!("grid needs MIN < MAX, got {min} and {max}"));
        }
        if points < 2 {
            return Err(format!("grid needs at least 2 points, got {points}"));
        }
        Ok(GridSpec { min, max, points })
    }
}

/// One output cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Real(x) => format_real(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Missing => "NA".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(x) if x.is_finite() => json!(x),
            Cell::Real(x) => json!(format_real(*x)),
            Cell::Int(n) => json!(n),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) if s.is_empty() => Value::Null,
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Column names plus rows of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Array of objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Key/value record; CSV columns `quantity,value`, JSON an object.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    pub entries: Vec<(String, Cell)>,
}

impl Record {
    fn put(&mut self, key: impl Into<String>, value: Cell) {
        self.entries.push((key.into(), value));
    }

    fn put_vec(&mut self, key: &str, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self.put(format!("{key}.{i}"), Cell::Real(v));
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,value\n");
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k},{}", v.csv());
        }
        out
    }

    /// Dotted keys `u.0`, `curve.1.beta` become nested arrays and objects.
    pub fn to_json(&self) -> Value {
        let mut root = Value::Object(Map::new());
        for (key, cell) in &self.entries {
            insert_path(&mut root, &key.split('.').collect::<Vec<_>>(), cell.json());
        }
        root
    }
}

fn insert_path(node: &mut Value, path: &[&str], value: Value) {
    let (head, rest) = path.split_first().expect("non-empty key");
    if let Ok(index) = head.parse::<usize>() {
        let arr = node.as_array_mut().expect("array node");
        if arr.len() <= index {
            arr.resize(index + 1, Value::Null);
        }
        descend(&mut arr[index], rest, value);
    } else {
        let obj = node.as_object_mut().expect("object node");
        descend(obj.entry(head.to_string()).or_insert(Value::Null), rest, value);
    }
}

fn descend(slot: &mut Value, rest: &[&str], value: Value) {
    match rest.first() {
        None => *slot = value,
        Some(next) => {
            if slot.is_null() {
                *slot =
                    if next.parse::<usize>().is_ok() { Value::Array(Vec::new()) } else { Value::Object(Map::new()) };
            }
            insert_path(slot, rest, value);
        }
    }
}

/// What a command produces.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Table(Table),
    Record(Record),
}

impl Output {
    pub fn render(&self, json: bool) -> String {
        match (self, json) {
            (Output::Table(t), false) => t.to_csv(),
            (Output::Record(r), false) => r.to_csv(),
            (Output::Table(t), true) => to_json_text(&t.to_json()),
            (Output::Record(r), true) => to_json_text(&r.to_json()),
        }
    }
}

fn to_json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json");
    s.push('\n');
    s
}

fn load_valid(path: &PathBuf) -> Result<LinearRepresentation> {
    let rep = model::load_model(path)?;
    let report = model::validate(&rep);
    if !report.primitive {
        return Err(Error::NotPrimitive("A+B"));
    }
    if !report.support_ok {
        return Err(Error::InvalidArgument(report.messages.join("; ")));
    }
    Ok(rep)
}

/// Validation report and whether the model passed.
pub fn cmd_validate(model_path: &PathBuf) -> Result<(Output, bool)> {
    let rep = model::load_model(model_path)?;
    let report = model::validate(&rep);
    let mut rec = Record::default();
    rec.put("dimension", Cell::Int(rep.dim() as u64));
    rec.put("primitive", Cell::Bool(report.primitive));
    rec.put("support_ok", Cell::Bool(report.support_ok));
    rec.put("lambda_a_positive", Cell::Bool(report.lambda_a_positive));
    rec.put("lambda_b_positive", Cell::Bool(report.lambda_b_positive));
    rec.put("lambda_a", Cell::Real(report.lambda_a));
    rec.put("lambda_b", Cell::Real(report.lambda_b));
    for (i, msg) in report.messages.iter().enumerate() {
        rec.put(format!("messages.{i}"), Cell::Text(msg.clone()));
    }
    Ok((Output::Record(rec), report.is_valid()))
}

pub fn cmd_analyze(model_path: &PathBuf, ts: &[f64]) -> Result<Output> {
    let rep = load_valid(model_path)?;
    let perron = spectral::perron(&rep.combined(), spectral::DEFAULT_TOLERANCE)?;
    let at_zero = spectral::curve_point(&rep, 0.0)?;
    let domain = ratefn::domain(&rep)?;
    let mut rec = Record::default();
    rec.put("lambda", Cell::Real(perron.lambda));
    rec.put_vec("u", &perron.u);
    rec.put_vec("v", &perron.v);
    rec.put("beta", Cell::Real(at_zero.beta));
    rec.put("gamma", Cell::Real(at_zero.gamma));
    rec.put("lambda_a", Cell::Real(domain.lambda_a));
    rec.put("lambda_b", Cell::Real(domain.lambda_b));
    rec.put("u_limit", Cell::Real(domain.u_limit));
    rec.put("v_limit", Cell::Real(domain.v_limit));
    rec.put("open01", Cell::Bool(domain.open01));
    rec.put("endpoint_left", Cell::Real(domain.endpoint_left));
    rec.put("endpoint_right", Cell::Real(domain.endpoint_right));
    rec.put("left_estimated", Cell::Bool(domain.left_estimated));
    rec.put("right_estimated", Cell::Bool(domain.right_estimated));
    let points = ts.par_iter().map(|&t| spectral::curve_point(&rep, t)).collect::<Result<Vec<_>>>()?;
    for (i, p) in points.iter().enumerate() {
        rec.put(format!("curve.{i}.t"), Cell::Real(p.t));
        rec.put(format!("curve.{i}.y"), Cell::Real(p.y));
        rec.put(format!("curve.{i}.y_prime"), Cell::Real(p.y_prime));
        rec.put(format!("curve.{i}.beta"), Cell::Real(p.beta));
        rec.put(format!("curve.{i}.gamma"), Cell::Real(p.gamma));
    }
    Ok(Output::Record(rec))
}

pub fn cmd_rate_curve(model_path: &PathBuf, grid: Option<GridSpec>) -> Result<Output> {
    let rep = load_valid(model_path)?;
    let f = RateFunction::new(&rep)?;
    let xs = match grid {
        Some(g) => g.values(),
        None => f.domain()?.grid(99),
    };
    let mut table = Table::new(vec!["x", "tau", "I", "Iprime", "reason"]);
    for (x, point) in xs.iter().zip(f.curve(&xs)) {
        match point {
            Ok(p) => table.push(vec![
                Cell::Real(p.x),
                Cell::Real(p.tau),
                Cell::Real(p.rate),
                Cell::Real(p.derivative),
                Cell::Text(String::new()),
            ]),
            Err(e @ Error::OutOfDomain { .. }) => {
                table.push(vec![Cell::Real(*x), Cell::Missing, Cell::Missing, Cell::Missing, Cell::Text(e.to_string())])
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Output::Table(table))
}

pub fn cmd_distribution(model_path: &PathBuf, n: usize) -> Result<Output> {
    let rep = model::load_model(model_path)?;
    let dist = exactdist::exact_distribution(&rep, n)?;
    let mut table = Table::new(vec!["k", "log_weight", "probability"]);
    for (k, &lw) in dist.log_weights().iter().enumerate() {
        table.push(vec![Cell::Int(k as u64), Cell::Real(lw), Cell::Real(dist.probability(k))]);
    }
    Ok(Output::Table(table))
}

pub fn cmd_verify_ldp(model_path: &PathBuf, x: f64, ns: &[usize]) -> Result<Output> {
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns.contains(&0) {
        return Err(Error::InvalidArgument("--n must be a strictly ascending list of positive integers".into()));
    }
    let rep = load_valid(model_path)?;
    let f = RateFunction::new(&rep)?;
    let theoretical = f.rate(x)?.rate;
    let beta = f.beta();
    let empirical = ns
        .par_iter()
        .map(|&n| exactdist::exact_distribution(&rep, n).map(|d| exactdist::empirical_rate_of(&d, x, beta)))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(vec!["n", "empirical_rate", "I", "abs_error"]);
    for (&n, e) in ns.iter().zip(empirical) {
        table.push(vec![
            Cell::Int(n as u64),
            Cell::Real(e),
            Cell::Real(theoretical),
            Cell::Real((e - theoretical).abs()),
        ]);
    }
    Ok(Output::Table(table))
}

pub fn cmd_sample(
    model_path: &PathBuf,
    n: usize,
    num_samples: usize,
    seed: u64,
    dump_words: Option<&PathBuf>,
) -> Result<Output> {
    let rep = model::load_model(model_path)?;
    let summary = sampler::sample_counts(&rep, n, num_samples, seed)?;
    if let Some(path) = dump_words {
        let words = sampler::sample_words(&rep, n, num_samples, seed)?;
        let mut text = String::with_capacity(words.len() * (n + 1));
        for w in &words {
            let _ = writeln!(text, "{w}");
        }
        write_file(path, &text)?;
    }
    let mut table = Table::new(vec!["k", "count"]);
    for (k, &c) in summary.counts.iter().enumerate() {
        table.push(vec![Cell::Int(k as u64), Cell::Int(c)]);
    }
    Ok(Output::Table(table))
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Runs one invocation and returns its exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };
    match execute(&config) {
        Ok((output, status)) => {
            let text = output.render(config.json);
            let written = match &config.out {
                Some(path) => write_file(path, &text),
                None => {
                    stdout.write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
                }
            };
            match written {
                Ok(()) => status,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(config: &RunConfig) -> Result<(Output, i32)> {
    let ok = |o: Output| Ok((o, 0));
    match &config.command {
        Command::Validate { model } => {
            let (out, valid) = cmd_validate(model)?;
            Ok((out, if valid { 0 } else { 2 }))
        }
        Command::Analyze { model, t } => ok(cmd_analyze(model, t)?),
        Command::RateCurve { model, grid } => ok(cmd_rate_curve(model, *grid)?),
        Command::Distribution { model, n } => ok(cmd_distribution(model, *n)?),
        Command::VerifyLdp { model, x, n } => ok(cmd_verify_ldp(model, *x, n)?),
        Command::Sample { model, n, samples, seed, dump_words } => {
            ok(cmd_sample(model, *n, *samples, *seed, dump_words.as_ref())?)
        }
    }
}
