//! Symbol-count statistics for rational stochastic models over the binary
//! alphabet `{a, b}`.
//!
//! A model is a linear representation `(xi, A, B, eta)` of non-negative
//! weights. A word `w` of length `n` is drawn with probability proportional to
//! `xi' M(w_1) ... M(w_n) eta`, where `M(a) = A` and `M(b) = B`, and the
//! statistic of interest is `Y_n`, the number of `a`s in `w`.
//!
//! The crate covers:
//!
//! - [`model`]: parsing, validation, primitivity, exponential tilting.
//! - [`spectral`]: Perron-Frobenius data of `A e^t + B`, the drift
//!   `beta(t)` and variance coefficient `gamma(t)`.
//! - [`ratefn`]: the large-deviation rate function `I(x)` and its domain.
//! - [`exactdist`]: the exact law of `Y_n`, tails, moments and moment
//!   generating function.
//! - [`sampler`]: exact random generation of words.
//! - [`cli`]: the `wfa-ldp` command-line front end.
//!
//! ```
//! use wfa_ldp::model::LinearRepresentation;
//! use wfa_ldp::ratefn;
//!
//! let rep = LinearRepresentation::bernoulli(0.3).unwrap();
//! let point = ratefn::rate(&rep, 0.5).unwrap();
//! let closed_form = ratefn::binomial_rate(0.3, 0.5).unwrap();
//! assert!((point.rate - closed_form).abs() < 1e-10);
//! ```

pub mod cli;
pub mod error;
pub mod exactdist;
pub mod linalg;
pub mod logspace;
pub mod model;
pub mod ratefn;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{LinearRepresentation, ModelError, Symbol, Word};
