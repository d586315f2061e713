//! Linear representations `(xi, A, B, eta)` and the operations that act on
//! them directly: parsing, validation, primitivity, tilting and word weights.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::linalg::{self, SquareMatrix};
use crate::spectral;

/// Default bound on `|t|` accepted by [`tilt`] and the spectral curve.
pub const DEFAULT_TILT_BOUND: f64 = 50.0;

/// Spectral radii at or below this value are treated as zero.
pub const RADIUS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("malformed model file at line {line}, column {column}: {message}")]
    Format { line: usize, column: usize, message: String },

    #[error("dimension must be positive")]
    EmptyDimension,

    #[error("dimension mismatch at {location}: expected length {expected}, found {found}")]
    DimensionMismatch { location: String, expected: usize, found: usize },

    #[error("negative entry {value} at {location}")]
    NegativeEntry { location: String, value: f64 },

    #[error("non-finite entry at {location}")]
    NonFinite { location: String },

    #[error("{0} is the zero matrix")]
    ZeroMatrix(&'static str),

    #[error("{0} is the zero vector")]
    ZeroVector(&'static str),

    #[error("probability {0} is outside (0, 1)")]
    BadProbability(f64),
}

/// The 4-tuple `(xi, A, B, eta)` of a rational stochastic model over `{a, b}`.
///
/// Construction checks that every entry is finite and non-negative and that
/// none of `xi`, `A`, `B`, `eta` is zero. The support condition and
/// primitivity are reported by [`validate`] instead, so that a model which
/// fails them can still be loaded and diagnosed.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRepresentation {
    xi: Vec<f64>,
    a: SquareMatrix,
    b: SquareMatrix,
    eta: Vec<f64>,
}

impl LinearRepresentation {
    pub fn new(xi: Vec<f64>, a: SquareMatrix, b: SquareMatrix, eta: Vec<f64>) -> Result<Self, ModelError> {
        let m = a.dim();
        if m == 0 {
            return Err(ModelError::EmptyDimension);
        }
        for (name, len) in [("xi", xi.len()), ("B", b.dim()), ("eta", eta.len())] {
            if len != m {
                return Err(ModelError::DimensionMismatch { location: name.into(), expected: m, found: len });
            }
        }
        check_entries("xi", None, &xi)?;
        for i in 0..m {
            check_entries("A", Some(i), a.row(i))?;
            check_entries("B", Some(i), b.row(i))?;
        }
        check_entries("eta", None, &eta)?;
        if xi.iter().all(|&x| x == 0.0) {
            return Err(ModelError::ZeroVector("xi"));
        }
        if eta.iter().all(|&x| x == 0.0) {
            return Err(ModelError::ZeroVector("eta"));
        }
        if a.is_zero() {
            return Err(ModelError::ZeroMatrix("A"));
        }
        if b.is_zero() {
            return Err(ModelError::ZeroMatrix("B"));
        }
        Ok(LinearRepresentation { xi, a, b, eta })
    }

    /// One-state model: every position is `a` independently with probability `p`.
    pub fn bernoulli(p: f64) -> Result<Self, ModelError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ModelError::BadProbability(p));
        }
        Self::new(vec![1.0], SquareMatrix::from_fn(1, |_, _| p), SquareMatrix::from_fn(1, |_, _| 1.0 - p), vec![1.0])
    }

    /// Two states, `A = [[1,1],[0,0]]`, `B = [[0,0],[1,1]]`, `xi = eta = (1,1)`.
    /// Every word has the same weight, so `Y_n` is Binomial(n, 1/2) and
    /// `y(t) = e^t + 1`.
    pub fn uniform_two_state() -> Self {
        Self::new(
            vec![1.0, 1.0],
            SquareMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).unwrap(),
            SquareMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap(),
            vec![1.0, 1.0],
        )
        .expect("valid model")
    }

    /// `A = [[0,1],[1,0]]`, `B = [[1,0],[0,0]]`, `xi = (1,0)`, `eta = (1,1)`.
    /// `A + B` is the Fibonacci matrix and `y(t) = (1 + sqrt(1 + 4 e^{2t})) / 2`.
    pub fn golden_ratio() -> Self {
        Self::new(
            vec![1.0, 0.0],
            SquareMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap(),
            SquareMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap(),
            vec![1.0, 1.0],
        )
        .expect("valid model")
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn matrix_a(&self) -> &SquareMatrix {
        &self.a
    }

    pub fn matrix_b(&self) -> &SquareMatrix {
        &self.b
    }

    pub fn matrix(&self, symbol: Symbol) -> &SquareMatrix {
        match symbol {
            Symbol::A => &self.a,
            Symbol::B => &self.b,
        }
    }

    /// `A + B`.
    pub fn combined(&self) -> SquareMatrix {
        self.a.add(&self.b)
    }

    /// `A e^t + B`.
    pub fn tilted_matrix(&self, t: f64) -> SquareMatrix {
        self.a.scale_add(t.exp(), &self.b)
    }

    /// Serializes to the model file format.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            m: self.dim(),
            xi: self.xi.clone(),
            a: self.a.to_rows(),
            b: self.b.to_rows(),
            eta: self.eta.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }
}

fn check_entries(name: &str, row: Option<usize>, values: &[f64]) -> Result<(), ModelError> {
    for (j, &v) in values.iter().enumerate() {
        let location = || match row {
            Some(i) => format!("{name}[{i}][{j}]"),
            None => format!("{name}[{j}]"),
        };
        if !v.is_finite() {
            return Err(ModelError::NonFinite { location: location() });
        }
        if v < 0.0 {
            return Err(ModelError::NegativeEntry { location: location(), value: v });
        }
    }
    Ok(())
}

/// On-disk layout of a model file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    m: usize,
    xi: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    eta: Vec<f64>,
}

/// Parses a JSON model file:
///
/// ```json
/// { "m": 1, "xi": [1], "A": [[0.3]], "B": [[0.7]], "eta": [1] }
/// ```
///
/// Duplicate keys, unknown keys and missing fields are errors.
pub fn parse_model(text: &str) -> Result<LinearRepresentation, ModelError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Format {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let m = file.m;
    if m == 0 {
        return Err(ModelError::EmptyDimension);
    }
    let check_len = |location: String, found: usize| {
        if found == m {
            Ok(())
        } else {
            Err(ModelError::DimensionMismatch { location, expected: m, found })
        }
    };
    check_len("xi".into(), file.xi.len())?;
    check_len("eta".into(), file.eta.len())?;
    for (name, rows) in [("A", &file.a), ("B", &file.b)] {
        check_len(name.into(), rows.len())?;
        for (i, row) in rows.iter().enumerate() {
            check_len(format!("{name}[{i}]"), row.len())?;
        }
    }
    let a = SquareMatrix::from_rows(&file.a).expect("checked square");
    let b = SquareMatrix::from_rows(&file.b).expect("checked square");
    LinearRepresentation::new(file.xi, a, b, file.eta)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LinearRepresentation> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    Ok(parse_model(&text)?)
}

/// Whether the non-negative square matrix `m` is primitive: its graph of
/// nonzero entries is strongly connected and the gcd of its cycle lengths is 1.
pub fn is_primitive(m: &SquareMatrix) -> bool {
    let n = m.dim();
    if n == 0 {
        return false;
    }
    let support = &m.support();
    let forward = bfs_levels(n, |i| (0..n).filter(move |&j| support[i][j]));
    let backward = bfs_levels(n, |i| (0..n).filter(move |&j| support[j][i]));
    if forward.iter().chain(&backward).any(Option::is_none) {
        return false;
    }
    // For a strongly connected graph the period is the gcd of
    // level(i) + 1 - level(j) over all edges i -> j.
    let mut period = 0usize;
    for i in 0..n {
        for j in 0..n {
            if support[i][j] {
                let li = forward[i].unwrap() as i64;
                let lj = forward[j].unwrap() as i64;
                period = gcd(period, (li + 1 - lj).unsigned_abs() as usize);
            }
        }
    }
    period == 1
}

fn bfs_levels<I: Iterator<Item = usize>>(n: usize, successors: impl Fn(usize) -> I) -> Vec<Option<usize>> {
    let mut level = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    level[0] = Some(0);
    queue.push_back(0);
    while let Some(i) = queue.pop_front() {
        let next = level[i].unwrap() + 1;
        for j in successors(i) {
            if level[j].is_none() {
                level[j] = Some(next);
                queue.push_back(j);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Hypotheses of the large-deviation theorems, evaluated on one model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `A + B` is primitive.
    pub primitive: bool,
    /// `xi' (A+B)^n eta > 0` for `n = 1 ..= (m-1)^2 + 1`.
    pub support_ok: bool,
    pub lambda_a_positive: bool,
    pub lambda_b_positive: bool,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub messages: Vec<String>,
}

impl ValidationReport {
    /// The model is usable by the spectral and rate-function operations.
    pub fn is_valid(&self) -> bool {
        self.primitive && self.support_ok
    }

    /// Both `A` and `B` have a nonzero eigenvalue, so the rate function lives
    /// on all of `(0, 1)`.
    pub fn open_unit_interval(&self) -> bool {
        self.lambda_a_positive && self.lambda_b_positive
    }
}

pub fn validate(rep: &LinearRepresentation) -> ValidationReport {
    let mut messages = Vec::new();
    let primitive = is_primitive(&rep.combined());
    if !primitive {
        messages.push("A+B not primitive".to_string());
    }
    let support_ok = support_condition(rep);
    if !support_ok {
        messages.push(format!(
            "support condition fails: xi'(A+B)^n eta = 0 for some n <= {}",
            wielandt_exponent(rep.dim())
        ));
    }
    let lambda_a = spectral::spectral_radius(rep.matrix_a());
    let lambda_b = spectral::spectral_radius(rep.matrix_b());
    let lambda_a_positive = lambda_a > RADIUS_TOLERANCE;
    let lambda_b_positive = lambda_b > RADIUS_TOLERANCE;
    if !lambda_a_positive {
        messages.push("A has spectral radius 0: the upper limit V is estimated numerically".into());
    }
    if !lambda_b_positive {
        messages.push("B has spectral radius 0: the lower limit U is estimated numerically".into());
    }
    ValidationReport { primitive, support_ok, lambda_a_positive, lambda_b_positive, lambda_a, lambda_b, messages }
}

/// `(m-1)^2 + 1`.
pub fn wielandt_exponent(m: usize) -> usize {
    (m - 1) * (m - 1) + 1
}

/// Decides `xi' (A+B)^n eta > 0` for each `n` up to the Wielandt exponent
/// with boolean reachability, which is exact for non-negative data.
fn support_condition(rep: &LinearRepresentation) -> bool {
    let m = rep.dim();
    let support = rep.combined().support();
    let mut reach: Vec<bool> = rep.xi().iter().map(|&x| x > 0.0).collect();
    let accepting: Vec<bool> = rep.eta().iter().map(|&x| x > 0.0).collect();
    for _ in 0..wielandt_exponent(m) {
        reach = (0..m).map(|j| (0..m).any(|i| reach[i] && support[i][j])).collect();
        if !reach.iter().zip(&accepting).any(|(&r, &f)| r && f) {
            return false;
        }
    }
    true
}

/// `(xi, A e^t, B, eta)`, rejecting `|t| > DEFAULT_TILT_BOUND`.
pub fn tilt(rep: &LinearRepresentation, t: f64) -> Result<LinearRepresentation> {
    tilt_within(rep, t, DEFAULT_TILT_BOUND)
}

pub fn tilt_within(rep: &LinearRepresentation, t: f64, bound: f64) -> Result<LinearRepresentation> {
    check_tilt(t, bound)?;
    Ok(LinearRepresentation { a: rep.a.scale(t.exp()), ..rep.clone() })
}

pub(crate) fn check_tilt(t: f64, bound: f64) -> Result<()> {
    if t.is_finite() && t.abs() <= bound {
        Ok(())
    } else {
        Err(Error::TiltOutOfRange { t, bound })
    }
}

/// `xi' M(w_1) ... M(w_n) eta`.
pub fn weight_of_word(rep: &LinearRepresentation, word: &Word) -> f64 {
    let mut state = rep.xi().to_vec();
    let mut scratch = vec![0.0; state.len()];
    for &symbol in word.symbols() {
        rep.matrix(symbol).vec_mul_into(&state, &mut scratch);
        std::mem::swap(&mut state, &mut scratch);
    }
    linalg::dot(&state, rep.eta())
}

/// `log(xi' (A+B)^n eta)`.
pub fn total_weight(rep: &LinearRepresentation, n: usize) -> f64 {
    linalg::log_bilinear_power(rep.xi(), &rep.combined(), rep.eta(), n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    A,
    B,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::A => 'a',
            Symbol::B => 'b',
        }
    }
}

/// A word over `{a, b}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|w|_a`.
    pub fn count_a(&self) -> usize {
        self.0.iter().filter(|&&s| s == Symbol::A).count()
    }

    /// The word whose `i`-th symbol is `a` iff bit `i` of `bits` is set.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        Word((0..len).map(|i| if bits >> i & 1 == 1 { Symbol::A } else { Symbol::B }).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{}", s.as_char()))
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'a' => Ok(Symbol::A),
                'b' => Ok(Symbol::B),
                other => Err(Error::InvalidArgument(format!("symbol {other:?} is not in {{a, b}}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}
