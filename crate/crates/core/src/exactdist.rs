//! Exact law of `Y_n`, the number of `a`s in a random word of length `n`.
//!
//! The weight of `{Y_n = k}` is the coefficient of `x^k` in
//! `xi' (A x + B)^n eta`. Row vectors `W[j][k] = sum over words of length j
//! with k letters a of xi' M(w)` satisfy
//!
//! ```text
//! W[j+1][k] = W[j][k] B + W[j][k-1] A,    W[0][0] = xi',
//! ```
//!
//! and `[x^k] = W[n][k] eta`. Each `W[j][k]` is stored scaled by a power of
//! two into sup-norm `[1, 2)` together with the integer exponent, so weights
//! far outside the `f64` range (tails of order `1e-400`) stay representable
//! and rescaling loses no precision.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, SquareMatrix};
use crate::logspace::{log_sum_exp, CompensatedSum};
use crate::model::{self, LinearRepresentation, Word};
use crate::spectral;

/// Default cost guard for [`exact_distribution`] (`O(n^2 m^2)` work).
pub const DEFAULT_MAX_N: usize = 10_000;

/// Largest `n` accepted by [`brute_force_distribution`].
pub const MAX_BRUTE_FORCE_N: usize = 16;

/// Largest `n` accepted by [`moment_generating`].
pub const MAX_MGF_N: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolCountDistribution {
    n: usize,
    log_weights: Vec<f64>,
    log_total: f64,
}

impl SymbolCountDistribution {
    /// Builds a distribution from unnormalized log-weights for `k = 0..=n`.
    pub fn from_log_weights(log_weights: Vec<f64>) -> Self {
        assert!(!log_weights.is_empty(), "need at least the k = 0 entry");
        let log_total = log_sum_exp(&log_weights);
        SymbolCountDistribution { n: log_weights.len() - 1, log_weights, log_total }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `log [x^k] xi'(Ax+B)^n eta`, `-inf` for zero weight.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `log xi'(A+B)^n eta`.
    pub fn log_total(&self) -> f64 {
        self.log_total
    }

    pub fn log_probability(&self, k: usize) -> f64 {
        self.log_weights.get(k).map_or(f64::NEG_INFINITY, |w| w - self.log_total)
    }

    pub fn probability(&self, k: usize) -> f64 {
        self.log_probability(k).exp()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.probability(k)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// `mean - beta(0) n`, once a reference drift is supplied.
    pub mean_drift: Option<f64>,
    pub variance_per_n: f64,
}

impl MomentSummary {
    pub fn with_reference_drift(mut self, beta: f64) -> Self {
        self.mean_drift = Some(self.mean - beta * self.n as f64);
        self
    }
}

pub fn exact_distribution(rep: &LinearRepresentation, n: usize) -> Result<SymbolCountDistribution> {
    exact_distribution_with_limit(rep, n, DEFAULT_MAX_N)
}

pub fn exact_distribution_with_limit(
    rep: &LinearRepresentation,
    n: usize,
    max_n: usize,
) -> Result<SymbolCountDistribution> {
    if n > max_n {
        return Err(Error::TooLarge { n, max: max_n });
    }
    let m = rep.dim();
    // row i of the transpose is column i of the matrix: x'M = M'x
    let (at, bt) = (rep.matrix_a().transpose(), rep.matrix_b().transpose());

    // layer j holds W[j][0..=j], flattened with stride m; W[j][k] is the
    // stored vector times 2^exps[k], and ZERO marks a zero vector
    let mut vecs = vec![0.0; (n + 1) * m];
    let mut exps = vec![ZERO; n + 1];
    let mut next_vecs = vecs.clone();
    let mut next_exps = exps.clone();
    vecs[..m].copy_from_slice(rep.xi());
    exps[0] = linalg::normalize_pow2(&mut vecs[..m]).unwrap_or(ZERO);

    let mut via_b = vec![0.0; m];
    let mut via_a = vec![0.0; m];
    for j in 0..n {
        for k in 0..=j + 1 {
            let exp_b = if k <= j { product(&bt, &vecs[k * m..(k + 1) * m], exps[k], &mut via_b) } else { ZERO };
            let exp_a = if k > 0 { product(&at, &vecs[(k - 1) * m..k * m], exps[k - 1], &mut via_a) } else { ZERO };
            let out = &mut next_vecs[k * m..(k + 1) * m];
            next_exps[k] = combine(exp_b, &via_b, exp_a, &via_a, out);
        }
        std::mem::swap(&mut vecs, &mut next_vecs);
        std::mem::swap(&mut exps, &mut next_exps);
    }

    let log_weights = (0..=n)
        .map(|k| {
            let w = linalg::dot(&vecs[k * m..(k + 1) * m], rep.eta());
            if w > 0.0 && exps[k] != ZERO {
                w.ln() + exps[k] as f64 * std::f64::consts::LN_2
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    Ok(SymbolCountDistribution::from_log_weights(log_weights))
}

/// Binary exponent standing for a zero vector.
const ZERO: i64 = i64::MIN;

/// Writes `mt x` into `out`, rescaled to sup-norm in `[1, 2)`, and returns the
/// binary exponent of the true product, `x` itself carrying exponent `e`.
#[inline]
fn product(mt: &SquareMatrix, x: &[f64], e: i64, out: &mut [f64]) -> i64 {
    if e == ZERO {
        return ZERO;
    }
    mt.mul_vec_into(x, out);
    linalg::normalize_pow2(out).map_or(ZERO, |s| e + s)
}

/// Writes the normalized `2^exp_b via_b + 2^exp_a via_a` into `out` and
/// returns its binary exponent.
#[inline]
fn combine(exp_b: i64, via_b: &[f64], exp_a: i64, via_a: &[f64], out: &mut [f64]) -> i64 {
    let top = exp_a.max(exp_b);
    if top == ZERO {
        out.iter_mut().for_each(|o| *o = 0.0);
        return ZERO;
    }
    // parts more than 2^-1022 below the other only add subnormal noise
    let weight = |e: i64| if e == ZERO || e - top < -1022 { 0.0 } else { linalg::pow2(e - top) };
    let (wb, wa) = (weight(exp_b), weight(exp_a));
    for ((o, &vb), &va) in out.iter_mut().zip(via_b).zip(via_a) {
        *o = wb * vb + wa * va;
    }
    // the larger part has sup-norm in [1, 2), so the sum is not zero
    top + linalg::normalize_pow2(out).unwrap_or(0)
}

/// Sums `weight_of_word` over all `2^n` words, grouped by number of `a`s.
pub fn brute_force_distribution(rep: &LinearRepresentation, n: usize) -> Result<SymbolCountDistribution> {
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::TooLarge { n, max: MAX_BRUTE_FORCE_N });
    }
    let mut sums = vec![0.0; n + 1];
    for bits in 0..(1u64 << n) {
        let word = Word::from_bits(bits, n);
        sums[word.count_a()] += model::weight_of_word(rep, &word);
    }
    Ok(SymbolCountDistribution::from_log_weights(sums.into_iter().map(f64::ln).collect()))
}

pub fn moments(dist: &SymbolCountDistribution) -> MomentSummary {
    let probs = dist.probabilities();
    let mean = probs.iter().enumerate().map(|(k, p)| k as f64 * p).collect::<CompensatedSum>().value();
    let variance = probs
        .iter()
        .enumerate()
        .map(|(k, p)| (k as f64 - mean).powi(2) * p)
        .collect::<CompensatedSum>()
        .value()
        .max(0.0);
    let n = dist.n();
    let variance_per_n = if n == 0 { 0.0 } else { variance / n as f64 };
    MomentSummary { n, mean, variance, mean_drift: None, variance_per_n }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `Pr(Y_n <= x n)`
    Left,
    /// `Pr(Y_n >= x n)`
    Right,
}

/// `log Pr(Y_n >= xn)` or `log Pr(Y_n <= xn)`.
///
/// The threshold counts as integral when `xn` is within `1e-9` of an integer,
/// so that equality is included in both tails.
pub fn tail(dist: &SymbolCountDistribution, x: f64, side: Side) -> f64 {
    let n = dist.n();
    let xn = x * n as f64;
    let nearest = xn.round();
    let integral = (xn - nearest).abs() <= 1e-9 * xn.abs().max(1.0);
    let range = match side {
        Side::Right => {
            let start = if integral { nearest } else { xn.ceil() };
            if start > n as f64 {
                return f64::NEG_INFINITY;
            }
            start.max(0.0) as usize..=n
        }
        Side::Left => {
            let end = if integral { nearest } else { xn.floor() };
            if end < 0.0 {
                return f64::NEG_INFINITY;
            }
            0..=(end.min(n as f64) as usize)
        }
    };
    log_sum_exp(&dist.log_weights()[range]) - dist.log_total()
}

/// `-(1/n) log Pr(Y_n >= xn)` if `x >= beta(0)`, otherwise
/// `-(1/n) log Pr(Y_n <= xn)`.
pub fn empirical_rate(rep: &LinearRepresentation, n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("empirical rate needs n >= 1".into()));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!("x = {x} must lie in (0, 1)")));
    }
    spectral::require_primitive(rep)?;
    let beta = spectral::beta_at(rep, 0.0)?;
    let dist = exact_distribution(rep, n)?;
    Ok(empirical_rate_of(&dist, x, beta))
}

pub(crate) fn empirical_rate_of(dist: &SymbolCountDistribution, x: f64, beta: f64) -> f64 {
    let side = if x >= beta { Side::Right } else { Side::Left };
    -tail(dist, x, side) / dist.n() as f64
}

/// `log Psi_n(t) = log xi'(Ae^t+B)^n eta - log xi'(A+B)^n eta`.
pub fn moment_generating(rep: &LinearRepresentation, n: usize, t: f64) -> Result<f64> {
    if n > MAX_MGF_N {
        return Err(Error::TooLarge { n, max: MAX_MGF_N });
    }
    model::check_tilt(t, model::DEFAULT_TILT_BOUND)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let tilted = linalg::log_bilinear_power(rep.xi(), &rep.tilted_matrix(t), rep.eta(), n);
    Ok(tilted - model::total_weight(rep, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
        let mut log_c = 0.0;
        for i in 0..k {
            log_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        (log_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
    }

    #[test]
    fn n_zero_is_point_mass() {
        let d = exact_distribution(&LinearRepresentation::golden_ratio(), 0).unwrap();
        assert_eq!(d.n(), 0);
        assert!((d.probability(0) - 1.0).abs() < 1e-15);
        let s = moments(&d);
        assert_eq!((s.mean, s.variance), (0.0, 0.0));
    }

    #[test]
    fn bernoulli_is_binomial() {
        let p = 0.3;
        let rep = LinearRepresentation::bernoulli(p).unwrap();
        for n in [1, 7, 60, 300] {
            let d = exact_distribution(&rep, n).unwrap();
            for k in 0..=n {
                let expected = binomial_pmf(n, k, p);
                assert!((d.probability(k) - expected).abs() <= 1e-10 * expected + 1e-300, "n={n} k={k}");
            }
            let s = moments(&d);
            assert!((s.mean - p * n as f64).abs() < 1e-10 * n as f64);
            assert!((s.variance - p * (1.0 - p) * n as f64).abs() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn brute_force_small_cases() {
        let d = brute_force_distribution(&LinearRepresentation::bernoulli(0.3).unwrap(), 1).unwrap();
        assert!((d.probability(0) - 0.7).abs() < 1e-15 && (d.probability(1) - 0.3).abs() < 1e-15);
        let d = brute_force_distribution(&LinearRepresentation::uniform_two_state(), 2).unwrap();
        let probs = d.probabilities();
        for (got, want) in probs.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(matches!(
            brute_force_distribution(&LinearRepresentation::golden_ratio(), 17),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn cost_guard() {
        let rep = LinearRepresentation::golden_ratio();
        assert!(matches!(exact_distribution(&rep, DEFAULT_MAX_N + 1), Err(Error::TooLarge { .. })));
        assert!(exact_distribution_with_limit(&rep, 20, 10).is_err());
        assert!(moment_generating(&rep, MAX_MGF_N + 1, 0.5).is_err());
    }

    #[test]
    fn zero_weights_are_neg_infinity() {
        // state 0 only emits a (to state 1), state 1 only emits b
        let rep = LinearRepresentation::new(
            vec![1.0, 1.0],
            SquareMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
            SquareMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap(),
            vec![1.0, 1.0],
        )
        .unwrap();
        // no two consecutive a's: Y_6 <= 3
        let d = exact_distribution(&rep, 6).unwrap();
        assert_eq!(d.log_weights()[4], f64::NEG_INFINITY);
        let bf = brute_force_distribution(&rep, 6).unwrap();
        for k in 0..=6 {
            assert!((d.probability(k) - bf.probability(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn tails() {
        let p = 0.3;
        let rep = LinearRepresentation::bernoulli(p).unwrap();
        let n = 10;
        let d = exact_distribution(&rep, n).unwrap();
        assert!(tail(&d, 0.0, Side::Right).abs() < 1e-14);
        assert!((tail(&d, 1.0, Side::Right) - n as f64 * p.ln()).abs() < 1e-12);
        // xn = 3 exactly: both tails include k = 3
        let right: f64 = (3..=n).map(|k| binomial_pmf(n, k, p)).sum();
        let left: f64 = (0..=3).map(|k| binomial_pmf(n, k, p)).sum();
        assert!((tail(&d, 0.3, Side::Right).exp() - right).abs() < 1e-14);
        assert!((tail(&d, 0.3, Side::Left).exp() - left).abs() < 1e-14);
        // xn = 3.5: right from 4, left to 3
        let right: f64 = (4..=n).map(|k| binomial_pmf(n, k, p)).sum();
        assert!((tail(&d, 0.35, Side::Right).exp() - right).abs() < 1e-14);
        assert!((tail(&d, 0.35, Side::Left).exp() - left).abs() < 1e-14);
    }

    #[test]
    fn mgf_cases() {
        let rep = LinearRepresentation::bernoulli(0.3).unwrap();
        assert_eq!(moment_generating(&rep, 50, 0.0).unwrap(), 0.0);
        for (n, t) in [(1usize, 0.5), (40, -1.3), (1000, 2.0)] {
            let expected = n as f64 * (0.3 * f64::exp(t) + 0.7).ln();
            assert!((moment_generating(&rep, n, t).unwrap() - expected).abs() < 1e-10 * expected.abs().max(1.0));
        }
        assert!(moment_generating(&rep, 10, 60.0).is_err());
    }

    #[test]
    fn empirical_rate_guards() {
        let rep = LinearRepresentation::golden_ratio();
        assert!(empirical_rate(&rep, 0, 0.5).is_err());
        assert!(empirical_rate(&rep, 10, 1.0).is_err());
        let beta = spectral::beta_at(&rep, 0.0).unwrap();
        let n = 1000;
        let r = empirical_rate(&rep, n, beta).unwrap();
        assert!(r >= 0.0 && r <= 2f64.ln() / n as f64 + 1e-3);
    }
}
