//! Perron-Frobenius data and the spectral curve of the tilted family
//! `A e^t + B`.
//!
//! For a primitive `M` the dominant eigenvalue is found by power iteration on
//! the all-ones vector. The iteration matrix is squared at every step
//! (`M, M^2, M^4, ...`), so `k` steps cost `O(k m^3)` but apply `M^(2^k)`.
//! This matters for the tilted matrices at large `|t|`, whose subdominant
//! eigenvalue can be within `e^{-30}` of the dominant one in modulus.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, SquareMatrix};
use crate::model::{self, LinearRepresentation};

/// Default relative backward-error target for [`perron`].
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// `|t|` at which `beta(t)` is treated as saturated.
pub const SATURATION_BOUND: f64 = 30.0;

const MAX_SQUARINGS: usize = 256;
const MAX_POLISH_STEPS: usize = 3;

/// Dominant eigen-triple of a primitive matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerronData {
    pub lambda: f64,
    /// Right eigenvector, scaled to unit sum.
    pub u: Vec<f64>,
    /// Left eigenvector, scaled so that `v'u = 1`.
    pub v: Vec<f64>,
    /// `max(|Mu - lambda u|_inf / |u|_inf, |v'M - lambda v'|_inf / |v|_inf) / |M|_inf`.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralCurvePoint {
    pub t: f64,
    /// Perron eigenvalue of `A e^t + B`.
    pub y: f64,
    /// `v_t' A e^t u_t`.
    pub y_prime: f64,
    /// `y_prime / y`.
    pub beta: f64,
    /// `d beta / dt`.
    pub gamma: f64,
}

/// Perron eigenvalue and normalized eigenvectors of a primitive matrix.
pub fn perron(m: &SquareMatrix, tol: f64) -> Result<PerronData> {
    if !model::is_primitive(m) {
        return Err(Error::NotPrimitive("matrix"));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    perron_unchecked(m, tol)
}

pub(crate) fn perron_unchecked(m: &SquareMatrix, tol: f64) -> Result<PerronData> {
    // Iterate on the balanced matrix D^-1 M D: its norm is comparable to the
    // eigenvalue, so the residual test is meaningful even when M is far from
    // normal (e.g. [[s, 1], [s, s]] with tiny s).
    let (balanced, d) = balance(m);
    let norm = balanced.norm_inf();
    let (ub, iters_u) = dominant_vector(&balanced, norm, tol)?;
    let bt = balanced.transpose();
    let (vb, iters_v) = dominant_vector(&bt, norm, tol)?;

    let lambda = linalg::bilinear(&vb, &balanced, &ub) / linalg::dot(&vb, &ub);
    let balanced_residual =
        relative_residual(&balanced, &ub, lambda, norm).max(relative_residual(&bt, &vb, lambda, norm));
    if balanced_residual > tol {
        return Err(Error::NonConvergence { iterations: iters_u.max(iters_v), residual: balanced_residual });
    }

    let mut u: Vec<f64> = ub.iter().zip(&d).map(|(x, di)| x * di).collect();
    let mut v: Vec<f64> = vb.iter().zip(&d).map(|(x, di)| x / di).collect();
    let sum: f64 = u.iter().sum();
    u.iter_mut().for_each(|x| *x /= sum);
    let vu = linalg::dot(&v, &u);
    v.iter_mut().for_each(|x| *x /= vu);

    let norm = m.norm_inf();
    let residual = relative_residual(m, &u, lambda, norm).max(relative_residual(&m.transpose(), &v, lambda, norm));
    Ok(PerronData { lambda, u, v, residual })
}

/// Osborne balancing: a diagonal `d` such that `D^-1 M D` has matching
/// off-diagonal row and column sums. Returns `(D^-1 M D, d)`.
fn balance(m: &SquareMatrix) -> (SquareMatrix, Vec<f64>) {
    let n = m.dim();
    let mut d = vec![1.0; n];
    let scaled = |d: &[f64]| SquareMatrix::from_fn(n, |i, j| m.get(i, j) * d[j] / d[i]);
    for _ in 0..100 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (mut row, mut col) = (0.0, 0.0);
            for j in (0..n).filter(|&j| j != i) {
                row += m.get(i, j) * d[j] / d[i];
                col += m.get(j, i) * d[i] / d[j];
            }
            if row > 0.0 && col > 0.0 {
                let f = (row / col).sqrt();
                d[i] *= f;
                worst = worst.max(f.ln().abs());
            }
        }
        if worst < 1e-3 {
            break;
        }
    }
    (scaled(&d), d)
}

fn relative_residual(m: &SquareMatrix, x: &[f64], lambda: f64, norm: f64) -> f64 {
    let mx = m.mul_vec(x);
    let r = mx.iter().zip(x).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
    r / (norm * linalg::sup_norm(x))
}

/// Residual of `x` as an eigenvector of `m` with the least-squares eigenvalue.
fn best_residual(m: &SquareMatrix, x: &[f64], norm: f64) -> f64 {
    let mx = m.mul_vec(x);
    let rho = linalg::dot(x, &mx) / linalg::dot(x, x);
    relative_residual(m, x, rho, norm)
}

/// Right Perron vector of `m` by power iteration with repeated squaring,
/// then a few steps of inverse iteration shifted by the Rayleigh quotient.
/// Squaring separates the Perron vector even when another eigenvalue has
/// nearly the same modulus; the inverse steps remove the rounding left over
/// from the squared matrices.
fn dominant_vector(m: &SquareMatrix, norm: f64, tol: f64) -> Result<(Vec<f64>, usize)> {
    let dim = m.dim();
    let ones = vec![1.0; dim];
    let mut power = m.scale(1.0 / norm);
    let mut x = power.mul_vec(&ones);
    linalg::normalize_sup(&mut x);
    let mut residual = best_residual(m, &x, norm);
    let mut iterations = 0;
    while residual > tol && iterations < MAX_SQUARINGS {
        power = power.matmul(&power);
        let scale = power.max_abs();
        power = power.scale(1.0 / scale);
        x = power.mul_vec(&ones);
        linalg::normalize_sup(&mut x);
        residual = best_residual(m, &x, norm);
        iterations += 1;
    }
    for _ in 0..MAX_POLISH_STEPS {
        let mx = m.mul_vec(&x);
        let shift = linalg::dot(&x, &mx) / linalg::dot(&x, &x);
        let shifted = SquareMatrix::from_fn(dim, |i, j| m.get(i, j) - if i == j { shift } else { 0.0 });
        let mut next = linalg::solve(&shifted, &x, f64::EPSILON * norm);
        let top = next.iter().copied().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
        if !top.is_finite() || top == 0.0 {
            break;
        }
        next.iter_mut().for_each(|v| *v /= top);
        if next.iter().any(|&v| v < 0.0) {
            break;
        }
        let r = best_residual(m, &next, norm);
        if r.is_nan() || r >= residual {
            break;
        }
        x = next;
        residual = r;
        iterations += 1;
    }
    if residual > tol {
        return Err(Error::NonConvergence { iterations, residual });
    }
    Ok((x, iterations))
}

/// Spectral radius of a non-negative square matrix.
///
/// The radius is the largest radius among the diagonal blocks of the strongly
/// connected components. A component without an edge contributes 0; any
/// other component `C` is irreducible, `C + cI` (`c = |C|_inf`) is primitive
/// and its Perron eigenvalue is `rho(C) + c`.
pub fn spectral_radius(m: &SquareMatrix) -> f64 {
    let support = m.support();
    let mut radius: f64 = 0.0;
    for component in strongly_connected_components(&support) {
        let has_edge = component.iter().any(|&i| component.iter().any(|&j| support[i][j]));
        if !has_edge {
            continue;
        }
        let block = SquareMatrix::from_fn(component.len(), |i, j| m.get(component[i], component[j]));
        let shift = block.norm_inf();
        let shifted = block.scale_add(1.0, &SquareMatrix::identity(component.len()).scale(shift));
        // The shifted block is primitive, so this only fails if the
        // tolerance cannot be met in floating point; loosen it then.
        let lambda = [DEFAULT_TOLERANCE, 1e-9, 1e-6]
            .iter()
            .find_map(|&tol| perron_unchecked(&shifted, tol).ok())
            .map(|p| p.lambda)
            .unwrap_or_else(|| power_estimate(&shifted));
        radius = radius.max((lambda - shift).max(0.0));
    }
    radius
}

fn power_estimate(m: &SquareMatrix) -> f64 {
    let mut x = vec![1.0; m.dim()];
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let next = m.mul_vec(&x);
        lambda = linalg::sup_norm(&next) / linalg::sup_norm(&x);
        x = next;
        linalg::normalize_sup(&mut x);
    }
    lambda
}

/// Tarjan's algorithm on a dense adjacency pattern.
fn strongly_connected_components(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adj: &'a [Vec<bool>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(s: &mut State, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for w in 0..s.adj.len() {
            if !s.adj[v][w] {
                continue;
            }
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut component = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack[w] = false;
                component.push(w);
                if w == v {
                    break;
                }
            }
            component.sort_unstable();
            s.out.push(component);
        }
    }

    let n = adj.len();
    let mut s = State {
        adj,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

pub(crate) fn require_primitive(rep: &LinearRepresentation) -> Result<()> {
    if model::is_primitive(&rep.combined()) {
        Ok(())
    } else {
        Err(Error::NotPrimitive("A+B"))
    }
}

/// `(y(t), y'(t), beta(t))` from one eigen-solve.
pub(crate) fn drift_at(rep: &LinearRepresentation, t: f64) -> Result<(f64, f64, f64, PerronData)> {
    let scale = t.exp();
    let p = perron_unchecked(&rep.tilted_matrix(t), DEFAULT_TOLERANCE)?;
    let au = rep.matrix_a().mul_vec(&p.u);
    let y_prime = scale * linalg::dot(&p.v, &au);
    Ok((p.lambda, y_prime, y_prime / p.lambda, p))
}

pub(crate) fn beta_at(rep: &LinearRepresentation, t: f64) -> Result<f64> {
    drift_at(rep, t).map(|(_, _, beta, _)| beta)
}

/// `beta'(t)` by a once-Richardson-extrapolated central difference with
/// step `1e-4 max(1, |t|)`, clamped to stay positive.
pub(crate) fn gamma_at(rep: &LinearRepresentation, t: f64) -> Result<f64> {
    let h = 1e-4 * t.abs().max(1.0);
    let central = |h: f64| -> Result<f64> { Ok((beta_at(rep, t + h)? - beta_at(rep, t - h)?) / (2.0 * h)) };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok(((4.0 * fine - coarse) / 3.0).max(f64::MIN_POSITIVE))
}

/// Spectral quantities of `A e^t + B`.
pub fn curve_point(rep: &LinearRepresentation, t: f64) -> Result<SpectralCurvePoint> {
    require_primitive(rep)?;
    model::check_tilt(t, model::DEFAULT_TILT_BOUND)?;
    let (y, y_prime, beta, _) = drift_at(rep, t)?;
    let gamma = gamma_at(rep, t)?;
    Ok(SpectralCurvePoint { t, y, y_prime, beta, gamma })
}

/// `r(t) = (xi'u_t v_t'eta) / (xi'u_0 v_0'eta)`, the limit of
/// `Psi_n(t) (lambda / y(t))^n`.
pub fn quasi_power_factor(rep: &LinearRepresentation, t: f64) -> Result<f64> {
    require_primitive(rep)?;
    model::check_tilt(t, model::DEFAULT_TILT_BOUND)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let projection = |p: &PerronData| linalg::dot(rep.xi(), &p.u) * linalg::dot(&p.v, rep.eta());
    let at_t = perron_unchecked(&rep.tilted_matrix(t), DEFAULT_TOLERANCE)?;
    let at_0 = perron_unchecked(&rep.combined(), DEFAULT_TOLERANCE)?;
    Ok(projection(&at_t) / projection(&at_0))
}

/// Limits `U = beta(-inf)`, `V = beta(+inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Limits {
    pub u: f64,
    pub v: f64,
    /// Both `A` and `B` have positive spectral radius, so `(U, V) = (0, 1)`.
    pub open01: bool,
    /// `u` is `beta(-SATURATION_BOUND)` rather than the exact value 0.
    pub u_estimated: bool,
    /// `v` is `beta(SATURATION_BOUND)` rather than the exact value 1.
    pub v_estimated: bool,
}

/// `U = 0` when `B` has a nonzero eigenvalue and `V = 1` when `A` does;
/// otherwise the limit is estimated at the saturation bound.
pub fn limits_uv(rep: &LinearRepresentation) -> Result<Limits> {
    require_primitive(rep)?;
    let lambda_a = spectral_radius(rep.matrix_a());
    let lambda_b = spectral_radius(rep.matrix_b());
    let u_estimated = lambda_b <= model::RADIUS_TOLERANCE;
    let v_estimated = lambda_a <= model::RADIUS_TOLERANCE;
    let u = if u_estimated { beta_at(rep, -SATURATION_BOUND)? } else { 0.0 };
    let v = if v_estimated { beta_at(rep, SATURATION_BOUND)? } else { 1.0 };
    Ok(Limits { u, v, open01: !u_estimated && !v_estimated, u_estimated, v_estimated })
}
