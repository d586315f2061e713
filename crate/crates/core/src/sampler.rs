//! Exact random generation of words under `Pr(w) ∝ xi' M(w) eta`.
//!
//! With backward vectors `g_j = (A+B)^{n-j} eta`, a word is produced left to
//! right from the row state `s = xi' M(w_1) ... M(w_j)`: position `j+1` is
//! `a` with probability `s A g_{j+1} / s (A+B) g_{j+1}`. The product of these
//! step probabilities telescopes to `xi' M(w) eta / xi' (A+B)^n eta`.
//!
//! # Random streams
//!
//! Sample `i` of a run with seed `S` draws from ChaCha20 in Bernstein's
//! original layout (20 rounds, 64-bit block counter starting at 0, 64-bit
//! nonce used as the stream id), keyed with the 8-byte little-endian encoding
//! of `S` followed by 24 zero bytes, with stream id `i`. Each uniform variate takes the next
//! 64-bit output `r` (two consecutive 32-bit keystream words, low word first)
//! and is `(r >> 11) * 2^-53`; the position is `a` iff the variate is below
//! the step probability. One variate is consumed per position.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{LinearRepresentation, Symbol, Word};

/// Largest word length accepted by the sampler.
pub const MAX_WORD_LENGTH: usize = 1_000_000;

/// Generator for sample `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Uniform variate in `[0, 1)` with 53 random bits.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Backward vectors `g_0, ..., g_n` for one `(model, n)`, each stored divided
/// by its sup-norm next to the log of that norm. Shared read-only by all
/// samples of a run.
#[derive(Clone, Debug)]
pub struct BackwardTable {
    rep: LinearRepresentation,
    n: usize,
    vecs: Vec<f64>,
    log_scales: Vec<f64>,
}

impl BackwardTable {
    pub fn new(rep: &LinearRepresentation, n: usize) -> Result<Self> {
        if n > MAX_WORD_LENGTH {
            return Err(Error::TooLarge { n, max: MAX_WORD_LENGTH });
        }
        let m = rep.dim();
        let sum = rep.combined();
        let mut vecs = vec![0.0; (n + 1) * m];
        let mut log_scales = vec![0.0; n + 1];
        vecs[n * m..].copy_from_slice(rep.eta());
        log_scales[n] = linalg::normalize_sup(&mut vecs[n * m..]);
        for j in (0..n).rev() {
            let (head, tail) = vecs.split_at_mut((j + 1) * m);
            let out = &mut head[j * m..];
            sum.mul_vec_into(&tail[..m], out);
            log_scales[j] = log_scales[j + 1] + linalg::normalize_sup(out);
        }
        if !log_scales[0].is_finite() || linalg::dot(rep.xi(), &vecs[..m]) <= 0.0 {
            return Err(Error::InvalidArgument(format!("model assigns zero total weight to length {n}")));
        }
        Ok(BackwardTable { rep: rep.clone(), n, vecs, log_scales })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn g(&self, j: usize) -> &[f64] {
        let m = self.rep.dim();
        &self.vecs[j * m..(j + 1) * m]
    }

    /// `log xi' (A+B)^n eta`, recovered from the table.
    pub fn log_total(&self) -> f64 {
        linalg::dot(self.rep.xi(), self.g(0)).ln() + self.log_scales[0]
    }

    /// Probability that position `j + 1` is `a` given row state `state` after
    /// `j` symbols.
    pub fn step_probability_a(&self, state: &[f64], j: usize) -> f64 {
        let g = self.g(j + 1);
        let via_a = linalg::bilinear(state, self.rep.matrix_a(), g);
        let via_b = linalg::bilinear(state, self.rep.matrix_b(), g);
        let total = via_a + via_b;
        if total > 0.0 {
            via_a / total
        } else {
            0.0
        }
    }

    fn advance(&self, state: &mut Vec<f64>, symbol: Symbol) {
        *state = self.rep.matrix(symbol).vec_mul(state);
        linalg::normalize_sup(state);
    }

    pub fn sample(&self, rng: &mut impl RngCore) -> Word {
        let mut state = self.rep.xi().to_vec();
        linalg::normalize_sup(&mut state);
        let mut symbols = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let p_a = self.step_probability_a(&state, j);
            let symbol = if uniform(rng) < p_a { Symbol::A } else { Symbol::B };
            self.advance(&mut state, symbol);
            symbols.push(symbol);
        }
        Word::new(symbols)
    }

    /// Probability with which [`BackwardTable::sample`] emits `word`: the
    /// product of the step probabilities along it.
    pub fn word_probability(&self, word: &Word) -> f64 {
        assert_eq!(word.len(), self.n, "word length must match the table");
        let mut state = self.rep.xi().to_vec();
        linalg::normalize_sup(&mut state);
        let mut prob = 1.0;
        for (j, &symbol) in word.symbols().iter().enumerate() {
            let p_a = self.step_probability_a(&state, j);
            prob *= if symbol == Symbol::A { p_a } else { 1.0 - p_a };
            if prob == 0.0 {
                return 0.0;
            }
            self.advance(&mut state, symbol);
        }
        prob
    }
}

pub fn sample_word(rep: &LinearRepresentation, n: usize, rng: &mut impl RngCore) -> Result<Word> {
    Ok(BackwardTable::new(rep, n)?.sample(rng))
}

/// `num_samples` words, sample `i` drawn from `stream_rng(seed, i)`.
pub fn sample_words(rep: &LinearRepresentation, n: usize, num_samples: usize, seed: u64) -> Result<Vec<Word>> {
    let table = BackwardTable::new(rep, n)?;
    Ok((0..num_samples as u64).into_par_iter().map(|i| table.sample(&mut stream_rng(seed, i))).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleSummary {
    pub n: usize,
    pub num_samples: usize,
    /// `counts[k]` = number of sampled words with `k` letters `a`.
    pub counts: Vec<u64>,
    pub seed: u64,
}

impl SampleSummary {
    pub fn mean(&self) -> f64 {
        let total: u64 = self.counts.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
        total as f64 / self.num_samples as f64
    }

    /// Total-variation distance between the empirical histogram and `probs`.
    pub fn total_variation(&self, probs: &[f64]) -> f64 {
        let ns = self.num_samples as f64;
        let len = self.counts.len().max(probs.len());
        0.5 * (0..len)
            .map(|k| {
                let emp = self.counts.get(k).map_or(0.0, |&c| c as f64 / ns);
                (emp - probs.get(k).copied().unwrap_or(0.0)).abs()
            })
            .sum::<f64>()
    }
}

pub fn sample_counts(rep: &LinearRepresentation, n: usize, num_samples: usize, seed: u64) -> Result<SampleSummary> {
    if num_samples == 0 {
        return Err(Error::InvalidArgument("num_samples must be positive".into()));
    }
    let table = BackwardTable::new(rep, n)?;
    let counts = (0..num_samples as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; n + 1],
            |mut hist, i| {
                hist[table.sample(&mut stream_rng(seed, i)).count_a()] += 1;
                hist
            },
        )
        .reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(SampleSummary { n, num_samples, counts, seed })
}
