//! Small dense linear algebra for the handful of states a model carries.

use std::fmt;

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        SquareMatrix { dim, data }
    }

    /// Builds a matrix from rows; `None` unless the rows form a square.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Option<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.as_ref().len() != dim) {
            return None;
        }
        Some(Self::from_fn(dim, |i, j| rows[i].as_ref()[j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn scale(&self, c: f64) -> Self {
        SquareMatrix { dim: self.dim, data: self.data.iter().map(|x| x * c).collect() }
    }

    /// `self * c + other`.
    pub fn scale_add(&self, c: f64, other: &SquareMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x * c + y).collect();
        SquareMatrix { dim: self.dim, data }
    }

    pub fn add(&self, other: &SquareMatrix) -> Self {
        self.scale_add(1.0, other)
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    /// `x' M`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.vec_mul_into(x, &mut out);
        out
    }

    pub fn vec_mul_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o += xi * m;
            }
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim).map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        sup_norm(&self.data)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    /// Adjacency pattern of the nonzero entries.
    pub fn support(&self) -> Vec<Vec<bool>> {
        (0..self.dim).map(|i| self.row(i).iter().map(|&x| x != 0.0).collect()).collect()
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.dim).map(|i| self.row(i))).finish()
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `x' M y`.
pub fn bilinear(x: &[f64], m: &SquareMatrix, y: &[f64]) -> f64 {
    x.iter().enumerate().filter(|(_, &xi)| xi != 0.0).map(|(i, &xi)| xi * dot(m.row(i), y)).sum()
}

pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Divides `x` by its sup-norm and returns the log of the divisor, or `-inf`
/// (leaving `x` untouched) when `x` is zero.
pub fn normalize_sup(x: &mut [f64]) -> f64 {
    let norm = sup_norm(x);
    if norm == 0.0 {
        return f64::NEG_INFINITY;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    norm.ln()
}

/// `2^k` as a double, flushing to 0 or infinity outside the representable range.
pub fn pow2(k: i64) -> f64 {
    if k > 1023 {
        f64::INFINITY
    } else if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else if k >= -1074 {
        f64::from_bits(1u64 << (k + 1074))
    } else {
        0.0
    }
}

/// Binary exponent `e` with `2^e <= |x| < 2^(e+1)`, for finite nonzero `x`.
fn binary_exponent(x: f64) -> i64 {
    let biased = ((x.to_bits() >> 52) & 0x7ff) as i64;
    if biased == 0 {
        // subnormal
        let scaled = x * pow2(64);
        ((scaled.to_bits() >> 52) & 0x7ff) as i64 - 1023 - 64
    } else {
        biased - 1023
    }
}

/// Multiplies `x` by a power of two bringing its sup-norm into `[1, 2)` and
/// returns that power's negated exponent, or `None` (leaving `x` untouched)
/// when `x` is zero. The rescaling is exact apart from underflow of entries
/// far below the maximum.
pub fn normalize_pow2(x: &mut [f64]) -> Option<i64> {
    let norm = sup_norm(x);
    if norm == 0.0 {
        return None;
    }
    let e = binary_exponent(norm);
    if (-1022..=1022).contains(&e) {
        let f = pow2(-e);
        x.iter_mut().for_each(|v| *v *= f);
    } else {
        // two steps so that the factor itself never overflows
        let half = e / 2;
        let (f1, f2) = (pow2(-half), pow2(half - e));
        x.iter_mut().for_each(|v| *v = *v * f1 * f2);
    }
    Some(e)
}

/// `log(x' M^n y)` for non-negative data, renormalizing the iterate at every
/// step so that the result stays finite for large `n`.
pub fn log_bilinear_power(x: &[f64], m: &SquareMatrix, y: &[f64], n: usize) -> f64 {
    let mut v = y.to_vec();
    let mut scratch = vec![0.0; v.len()];
    let mut log_scale = normalize_sup(&mut v);
    for _ in 0..n {
        if log_scale == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        m.mul_vec_into(&v, &mut scratch);
        std::mem::swap(&mut v, &mut scratch);
        log_scale += normalize_sup(&mut v);
    }
    let head = dot(x, &v);
    if head <= 0.0 || log_scale == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    head.ln() + log_scale
}

/// Solves `M x = rhs` by Gaussian elimination with partial pivoting. Pivots
/// smaller in magnitude than `min_pivot` are replaced by `min_pivot`, which
/// keeps nearly singular systems (as in inverse iteration) solvable.
pub fn solve(m: &SquareMatrix, rhs: &[f64], min_pivot: f64) -> Vec<f64> {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut x = rhs.to_vec();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs())).unwrap();
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            x.swap(col, pivot_row);
        }
        if a[col * n + col].abs() < min_pivot {
            a[col * n + col] = if a[col * n + col] < 0.0 { -min_pivot } else { min_pivot };
        }
        let pivot = a[col * n + col];
        for i in col + 1..n {
            let f = a[i * n + col] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[i * n + j] -= f * a[col * n + j];
            }
            x[i] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (x[i] - tail) / a[i * n + i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_and_transpose() {
        let m = SquareMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![3.0, 7.0]);
        assert_eq!(m.vec_mul(&[1.0, 1.0]), vec![4.0, 6.0]);
        assert_eq!(m.transpose().mul_vec(&[1.0, 1.0]), m.vec_mul(&[1.0, 1.0]));
        assert_eq!(m.matmul(&SquareMatrix::identity(2)), m);
        assert_eq!(m.norm_inf(), 7.0);
    }

    #[test]
    fn from_rows_rejects_ragged() {
        assert!(SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_none());
        assert!(SquareMatrix::from_rows(&[vec![1.0, 2.0]]).is_none());
    }

    #[test]
    fn powers_of_two() {
        assert_eq!(pow2(0), 1.0);
        assert_eq!(pow2(-3), 0.125);
        assert_eq!(pow2(-1074), f64::from_bits(1));
        assert_eq!(pow2(-1075), 0.0);
        assert_eq!(pow2(1024), f64::INFINITY);
        let mut x = [3.0e-310, 1.0e-320];
        let e = normalize_pow2(&mut x).unwrap();
        assert!((1.0..2.0).contains(&sup_norm(&x)));
        assert!((x[0] * pow2(e) - 3.0e-310).abs() < 1e-323);
        let mut y = [5.0, -12.0, 0.0];
        assert_eq!(normalize_pow2(&mut y), Some(3));
        assert_eq!(y, [0.625, -1.5, 0.0]);
        assert_eq!(normalize_pow2(&mut [0.0, 0.0]), None);
    }

    #[test]
    fn solve_small_systems() {
        let m = SquareMatrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]]).unwrap();
        let x = [1.0, -2.0, 0.5];
        let rhs = m.mul_vec(&x);
        let got = solve(&m, &rhs, 1e-300);
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
        // singular: still returns a finite vector in the null direction
        let singular = SquareMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        let y = solve(&singular, &[1.0, 1.0], 1e-12);
        assert!(y.iter().all(|v| v.is_finite()));
        assert!((y[0] / y[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bilinear_power_matches_direct_product() {
        let m = SquareMatrix::from_rows(&[[1.0, 1.0], [1.0, 0.0]]).unwrap();
        // Fibonacci: (1,0) M^n (1,0)' = F(n+1)
        let fib = [1.0, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0];
        for (n, f) in fib.iter().enumerate() {
            let got = log_bilinear_power(&[1.0, 0.0], &m, &[1.0, 0.0], n).exp();
            assert!((got - f).abs() < 1e-12 * f, "n={n}");
        }
        // far beyond f64 range
        let big = log_bilinear_power(&[1.0, 0.0], &m, &[1.0, 0.0], 100_000);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((big / 100_000.0 - phi.ln()).abs() < 1e-4);
    }
}
