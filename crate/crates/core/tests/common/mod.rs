//! Shared models and independent oracles for the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use wfa_ldp::linalg::SquareMatrix;
use wfa_ldp::model::{self, LinearRepresentation};

pub fn model_path(name: &str) -> String {
    format!("{}/models/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load(name: &str) -> LinearRepresentation {
    model::load_model(model_path(name)).unwrap()
}

pub fn bernoulli(p: f64) -> LinearRepresentation {
    LinearRepresentation::bernoulli(p).unwrap()
}

pub fn golden() -> LinearRepresentation {
    LinearRepresentation::golden_ratio()
}

pub fn uniform() -> LinearRepresentation {
    LinearRepresentation::uniform_two_state()
}

pub fn nilpotent_b() -> LinearRepresentation {
    load("nilpotent_b.json")
}

pub fn three_state() -> LinearRepresentation {
    load("three_state.json")
}

/// Bernoulli(0.3), uniform two-state, golden-ratio.
pub fn example_models() -> Vec<(&'static str, LinearRepresentation)> {
    vec![("bernoulli(0.3)", bernoulli(0.3)), ("uniform", uniform()), ("golden", golden())]
}

/// The example models plus a model with nilpotent B and a 3-state model.
pub fn all_models() -> Vec<(&'static str, LinearRepresentation)> {
    let mut v = example_models();
    v.push(("nilpotent-b", nilpotent_b()));
    v.push(("three-state", three_state()));
    v
}

pub const PHI: f64 = 1.618_033_988_749_895;

/// Golden-ratio model: y(t) = (1 + sqrt(1 + 4 e^{2t})) / 2.
pub fn golden_y(t: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * (2.0 * t).exp()).sqrt()) / 2.0
}

/// Golden-ratio model: y'(t) = 2 e^{2t} / sqrt(1 + 4 e^{2t}).
pub fn golden_beta(t: f64) -> f64 {
    let s2 = (2.0 * t).exp();
    2.0 * s2 / (1.0 + 4.0 * s2).sqrt() / golden_y(t)
}

/// Coefficients `c_0 = 1, c_1, ..., c_n` of `det(zI - M) = sum c_k z^{n-k}`
/// by the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(m: &SquareMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut coeffs = vec![1.0];
    let mut mk = SquareMatrix::zeros(n);
    for k in 1..=n {
        // M_k = M (M_{k-1} + c_{k-1} I)
        let shifted = mk.add(&SquareMatrix::identity(n).scale(coeffs[k - 1]));
        mk = m.matmul(&shifted);
        let trace: f64 = (0..n).map(|i| mk.get(i, i)).sum();
        coeffs.push(-trace / k as f64);
    }
    coeffs
}

/// All roots of the monic polynomial by Durand-Kerner.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32) * bound).collect();
    for _ in 0..2000 {
        let prev = roots.clone();
        for i in 0..n {
            let denom = (0..n).filter(|&j| j != i).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
        if roots.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15 * bound) {
            break;
        }
    }
    roots
}

pub fn eigenvalues(m: &SquareMatrix) -> Vec<Complex64> {
    polynomial_roots(&characteristic_polynomial(m))
}

/// Primitive iff some boolean power `M^k`, `k <= (m-1)^2 + 1`, is all true.
pub fn boolean_power_primitive(m: &SquareMatrix) -> bool {
    let n = m.dim();
    let base = m.support();
    let mut power = base.clone();
    for _ in 0..model::wielandt_exponent(n) {
        if power.iter().all(|row| row.iter().all(|&x| x)) {
            return true;
        }
        power = (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| power[i][k] && base[k][j])).collect()).collect();
    }
    false
}

pub fn matrix(rows: &[&[f64]]) -> SquareMatrix {
    SquareMatrix::from_rows(rows).unwrap()
}

pub mod strategies {
    use proptest::prelude::*;
    use wfa_ldp::linalg::SquareMatrix;
    use wfa_ldp::model::{self, LinearRepresentation};

    /// Non-negative entry, zero about a third of the time.
    fn entry() -> impl Strategy<Value = f64> {
        prop_oneof![1 => Just(0.0), 2 => 0.1f64..2.0]
    }

    fn square(dim: usize) -> impl Strategy<Value = SquareMatrix> {
        proptest::collection::vec(entry(), dim * dim)
            .prop_map(move |v| SquareMatrix::from_fn(dim, |i, j| v[i * dim + j]))
    }

    /// Valid representation with primitive `A+B` and positive boundary vectors.
    pub fn primitive_model(max_dim: usize) -> impl Strategy<Value = LinearRepresentation> {
        (1..=max_dim)
            .prop_flat_map(|dim| {
                (
                    proptest::collection::vec(0.1f64..1.0, dim),
                    square(dim),
                    square(dim),
                    proptest::collection::vec(0.1f64..1.0, dim),
                )
            })
            .prop_filter_map("A+B must be primitive with A, B nonzero", |(xi, a, b, eta)| {
                let rep = LinearRepresentation::new(xi, a, b, eta).ok()?;
                model::validate(&rep).is_valid().then_some(rep)
            })
    }

    /// Random 0/1 pattern of dimension `1..=max_dim`.
    pub fn pattern(max_dim: usize) -> impl Strategy<Value = SquareMatrix> {
        (1..=max_dim).prop_flat_map(|dim| {
            proptest::collection::vec(proptest::bool::weighted(0.35), dim * dim)
                .prop_map(move |v| SquareMatrix::from_fn(dim, |i, j| if v[i * dim + j] { 1.0 } else { 0.0 }))
        })
    }
}
