//! The large-deviation rate function
//!
//! ```text
//! I(x) = x tau_x + log lambda - log y(tau_x),   beta(tau_x) = x,
//! ```
//!
//! defined for `x` strictly between the limits `U` and `V` of `beta`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, LinearRepresentation};
use crate::spectral::{self, SATURATION_BOUND};

/// Target for `|beta(tau) - x|`.
pub const TAU_TOLERANCE: f64 = 1e-12;

/// Distance kept from the domain endpoints by [`RateDomain::grid`].
pub const GRID_MARGIN: f64 = 1e-6;

const MAX_SOLVER_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub x: f64,
    pub tau: f64,
    pub rate: f64,
    /// `I'(x)`, equal to `tau`.
    pub derivative: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateDomain {
    pub u_limit: f64,
    pub v_limit: f64,
    pub open01: bool,
    /// Perron eigenvalue of `A + B`.
    pub lambda: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    /// `beta(0)`, where `I` vanishes.
    pub beta: f64,
    /// `lim I(x)` as `x -> U+`: `log(lambda / lambda_B)` when `lambda_B > 0`.
    pub endpoint_left: f64,
    /// `lim I(x)` as `x -> V-`: `log(lambda / lambda_A)` when `lambda_A > 0`.
    pub endpoint_right: f64,
    /// `u_limit` and `endpoint_left` are evaluated at `t = -SATURATION_BOUND`.
    pub left_estimated: bool,
    /// `v_limit` and `endpoint_right` are evaluated at `t = SATURATION_BOUND`.
    pub right_estimated: bool,
}

impl RateDomain {
    pub fn contains(&self, x: f64) -> bool {
        x > self.u_limit && x < self.v_limit
    }

    /// `points` equally spaced values covering `[U + eps, V - eps]`.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        linspace(self.u_limit + GRID_MARGIN, self.v_limit - GRID_MARGIN, points)
    }
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect()
        }
    }
}

/// Rate function of one model, with `lambda` and `beta(0)` computed once.
#[derive(Clone, Debug)]
pub struct RateFunction<'a> {
    rep: &'a LinearRepresentation,
    lambda: f64,
    beta: f64,
}

impl<'a> RateFunction<'a> {
    pub fn new(rep: &'a LinearRepresentation) -> Result<Self> {
        spectral::require_primitive(rep)?;
        let (lambda, _, beta, _) = spectral::drift_at(rep, 0.0)?;
        Ok(RateFunction { rep, lambda, beta })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `beta(0)`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The unique `tau` with `beta(tau) = x`.
    ///
    /// The bracket `[-1, 1]` is doubled until `beta` straddles `x`, then a
    /// Newton iteration on `beta(t) - x` with derivative `gamma(t)` runs inside
    /// the bracket, bisecting whenever the Newton step leaves it.
    pub fn solve_tau(&self, x: f64) -> Result<f64> {
        let out_of_domain = || Error::OutOfDomain { x, bound: SATURATION_BOUND };
        if !x.is_finite() {
            return Err(out_of_domain());
        }
        if x == self.beta {
            return Ok(0.0);
        }
        let beta = |t: f64| spectral::beta_at(self.rep, t);

        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        while beta(lo)? >= x {
            if lo <= -SATURATION_BOUND {
                return Err(out_of_domain());
            }
            lo = (2.0 * lo).max(-SATURATION_BOUND);
        }
        while beta(hi)? <= x {
            if hi >= SATURATION_BOUND {
                return Err(out_of_domain());
            }
            hi = (2.0 * hi).min(SATURATION_BOUND);
        }

        let mut t = 0.0_f64.clamp(lo, hi);
        for _ in 0..MAX_SOLVER_STEPS {
            let f = beta(t)? - x;
            if f.abs() <= TAU_TOLERANCE {
                return Ok(t);
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                return Ok(t);
            }
            let newton = t - f / spectral::gamma_at(self.rep, t)?;
            t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        Ok(t)
    }

    pub fn rate(&self, x: f64) -> Result<RatePoint> {
        let tau = self.solve_tau(x)?;
        let (y, _, _, _) = spectral::drift_at(self.rep, tau)?;
        let rate = (x * tau + self.lambda.ln() - y.ln()).max(0.0);
        Ok(RatePoint { x, tau, rate, derivative: tau })
    }

    /// `phi_x(t) = log(y(t) / (lambda e^{x t}))`, minimized at `t = tau_x`
    /// with minimum `-I(x)`.
    pub fn objective(&self, x: f64, t: f64) -> Result<f64> {
        model::check_tilt(t, model::DEFAULT_TILT_BOUND)?;
        let (y, _, _, _) = spectral::drift_at(self.rep, t)?;
        Ok(y.ln() - self.lambda.ln() - x * t)
    }

    pub fn domain(&self) -> Result<RateDomain> {
        let lambda_a = spectral::spectral_radius(self.rep.matrix_a());
        let lambda_b = spectral::spectral_radius(self.rep.matrix_b());
        let limits = spectral::limits_uv(self.rep)?;
        let saturated = |t: f64| -> Result<f64> {
            let (y, _, beta, _) = spectral::drift_at(self.rep, t)?;
            Ok(beta * t + self.lambda.ln() - y.ln())
        };
        let endpoint_left =
            if limits.u_estimated { saturated(-SATURATION_BOUND)? } else { (self.lambda / lambda_b).ln() };
        let endpoint_right =
            if limits.v_estimated { saturated(SATURATION_BOUND)? } else { (self.lambda / lambda_a).ln() };
        Ok(RateDomain {
            u_limit: limits.u,
            v_limit: limits.v,
            open01: limits.open01,
            lambda: self.lambda,
            lambda_a,
            lambda_b,
            beta: self.beta,
            endpoint_left,
            endpoint_right,
            left_estimated: limits.u_estimated,
            right_estimated: limits.v_estimated,
        })
    }

    /// One entry per grid value, in grid order; points outside the domain
    /// carry their own error instead of failing the batch.
    pub fn curve(&self, grid: &[f64]) -> Vec<Result<RatePoint>> {
        grid.par_iter().map(|&x| self.rate(x)).collect()
    }
}

pub fn solve_tau(rep: &LinearRepresentation, x: f64) -> Result<f64> {
    RateFunction::new(rep)?.solve_tau(x)
}

pub fn rate(rep: &LinearRepresentation, x: f64) -> Result<RatePoint> {
    RateFunction::new(rep)?.rate(x)
}

pub fn domain(rep: &LinearRepresentation) -> Result<RateDomain> {
    RateFunction::new(rep)?.domain()
}

pub fn rate_curve(rep: &LinearRepresentation, grid: &[f64]) -> Result<Vec<Result<RatePoint>>> {
    Ok(RateFunction::new(rep)?.curve(grid))
}

/// `B(x) = x log(x/p) + (1-x) log((1-x)/(1-p))`, the rate function of the
/// proportion of successes in Bernoulli(p) trials.
pub fn binomial_rate(p: f64, x: f64) -> Result<f64> {
    check_unit("p", p)?;
    check_unit("x", x)?;
    Ok(x * (x / p).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - p)).ln())
}

/// `(B(0+), B(1-)) = (log(1/(1-p)), log(1/p))`.
pub fn binomial_endpoints(p: f64) -> Result<(f64, f64)> {
    check_unit("p", p)?;
    Ok((-(1.0 - p).ln(), -p.ln()))
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {value} must lie in (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;

    fn nilpotent_b() -> LinearRepresentation {
        LinearRepresentation::new(
            vec![1.0, 1.0],
            SquareMatrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]).unwrap(),
            SquareMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn tau_at_beta_is_zero() {
        for rep in [LinearRepresentation::golden_ratio(), LinearRepresentation::bernoulli(0.3).unwrap()] {
            let f = RateFunction::new(&rep).unwrap();
            assert_eq!(f.solve_tau(f.beta()).unwrap(), 0.0);
            let p = f.rate(f.beta()).unwrap();
            assert_eq!((p.tau, p.rate), (0.0, 0.0));
        }
    }

    #[test]
    fn uniform_tau_is_logit() {
        let rep = LinearRepresentation::uniform_two_state();
        for x in [0.01, 0.2, 0.5, 0.77, 0.99] {
            let tau = solve_tau(&rep, x).unwrap();
            assert!((tau - (x / (1.0 - x)).ln()).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn nilpotent_b_rejects_small_x() {
        let rep = nilpotent_b();
        assert!(matches!(solve_tau(&rep, 0.001), Err(Error::OutOfDomain { .. })));
        assert!(solve_tau(&rep, 0.6).is_ok());
        assert!(matches!(solve_tau(&rep, 1.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(solve_tau(&rep, f64::NAN), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn bernoulli_matches_binomial() {
        for p in [0.2, 0.5, 0.7] {
            let rep = LinearRepresentation::bernoulli(p).unwrap();
            let f = RateFunction::new(&rep).unwrap();
            for x in [0.05, 0.3, 0.6, 0.95] {
                let got = f.rate(x).unwrap();
                assert!((got.rate - binomial_rate(p, x).unwrap()).abs() < 1e-10);
                assert_eq!(got.derivative, got.tau);
                assert_eq!(got.tau.signum(), (x - p).signum());
            }
        }
    }

    #[test]
    fn binomial_closed_form() {
        assert_eq!(binomial_rate(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(binomial_rate(0.5, 0.5).unwrap(), 0.0);
        let (l, r) = binomial_endpoints(0.3).unwrap();
        assert!((l - (1.0 / 0.7f64).ln()).abs() < 1e-15);
        assert!((r - (1.0 / 0.3f64).ln()).abs() < 1e-15);
        assert!(binomial_rate(0.0, 0.5).is_err());
        assert!(binomial_rate(0.5, 1.0).is_err());
        assert!(binomial_endpoints(1.2).is_err());
        // continuity at the endpoints
        assert!((binomial_rate(0.3, 1e-12).unwrap() - l).abs() < 1e-9);
    }

    #[test]
    fn domains() {
        let d = domain(&LinearRepresentation::golden_ratio()).unwrap();
        let log_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!(d.open01);
        assert!((d.endpoint_left - log_phi).abs() < 1e-12);
        assert!((d.endpoint_right - log_phi).abs() < 1e-12);

        let d = domain(&LinearRepresentation::bernoulli(0.3).unwrap()).unwrap();
        let (l, r) = binomial_endpoints(0.3).unwrap();
        assert!((d.endpoint_left - l).abs() < 1e-12 && (d.endpoint_right - r).abs() < 1e-12);

        let d = domain(&nilpotent_b()).unwrap();
        assert!(!d.open01 && d.left_estimated && !d.right_estimated);
        assert!(d.u_limit > 0.5 && d.u_limit < 0.5 + 1e-6);
        assert!(d.u_limit < d.beta && d.beta < d.v_limit);
        assert!(d.endpoint_left.is_finite() && d.endpoint_left > 0.0);
    }

    #[test]
    fn curve_keeps_order_and_marks_failures() {
        let rep = nilpotent_b();
        let grid = [0.7, 0.1, 0.75, 0.9];
        let curve = rate_curve(&rep, &grid).unwrap();
        assert_eq!(curve.len(), 4);
        assert!(matches!(curve[1], Err(Error::OutOfDomain { .. })));
        for (i, entry) in curve.iter().enumerate() {
            if let Ok(p) = entry {
                assert_eq!(p.x, grid[i]);
            }
        }
        // beta(0) = 3/4 for this model
        assert!(curve[2].as_ref().unwrap().rate < 1e-20);
    }

    #[test]
    fn grid_helpers() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(0.2, 0.4, 1), vec![0.2]);
        let d = domain(&LinearRepresentation::golden_ratio()).unwrap();
        let g = d.grid(99);
        assert_eq!(g.len(), 99);
        assert!(g.iter().all(|&x| d.contains(x)));
    }
}
