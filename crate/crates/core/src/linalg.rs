//! Small dense symmetric-matrix numerics: storage, Jacobi eigensolver,
//! and the shifted-square-root log-determinant the 2SED measure needs.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scalar::Scalar;

/// Maximum Jacobi sweeps before reporting a convergence failure.
const MAX_SWEEPS: usize = 100;

/// Dense symmetric matrix stored as the packed lower triangle, so
/// `get(i, j) == get(j, i)` holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    dim: usize,
    // packed lower triangle, row-major: data[i*(i+1)/2 + j] for j <= i
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            dim,
            data: vec![T::zero(); dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, T::one());
        }
        m
    }

    /// Diagonal matrix with the given entries.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Rank-one outer product g ⊗ g.
    pub fn from_outer(g: &[T]) -> Self {
        let mut m = Self::zeros(g.len());
        for i in 0..g.len() {
            for j in 0..=i {
                m.set(i, j, g[i] * g[j]);
            }
        }
        m
    }

    /// Builds G Gᵀ from a dense (not necessarily symmetric) factor given in
    /// row-major order. Handy for constructing PSD test matrices.
    pub fn from_gram(rows: usize, cols: usize, factor: &[T]) -> Self {
        assert_eq!(rows * cols, factor.len());
        let mut m = Self::zeros(rows);
        for i in 0..rows {
            for j in 0..=i {
                let mut acc = T::zero();
                for k in 0..cols {
                    acc += factor[i * cols + k] * factor[j * cols + k];
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(i: usize, j: usize) -> usize {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        hi * (hi + 1) / 2 + lo
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[Self::idx(i, j)]
    }

    /// Sets entry (i, j) and, through the packed storage, (j, i).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[Self::idx(i, j)] = value;
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                acc += v * v;
            }
        }
        acc.sqrt()
    }

    /// self ← scale · self
    pub fn scale_in_place(&mut self, scale: T) {
        for v in &mut self.data {
            *v *= scale;
        }
    }

    /// self ← a · self + b · other (shapes must match).
    pub fn combine_in_place(&mut self, a: T, b: T, other: &Self) -> Result<()> {
        if other.dim != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        for (v, &o) in self.data.iter_mut().zip(other.data.iter()) {
            *v = a * *v + b * o;
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    eigenvalues: Vec<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn new(mut eigenvalues: Vec<T>) -> Self {
        assert!(!eigenvalues.is_empty());
        eigenvalues.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues must be ordered"));
        Self { eigenvalues }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Clamps everything below `tol` (nearly-zero and slightly-negative
    /// values from floating-point noise on PSD inputs) to exactly zero.
    pub fn clamped(&self, tol: T) -> Self {
        Self {
            eigenvalues: self
                .eigenvalues
                .iter()
                .map(|&l| if l < tol { T::zero() } else { l })
                .collect(),
        }
    }

    pub fn min(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn sum(&self) -> T {
        self.eigenvalues.iter().copied().sum()
    }

    /// log det(I + scale · M^{1/2}) = Σᵢ log(1 + scale · √λᵢ), with the
    /// eigenvalues clamped nonnegative first. Always ≥ 0 for scale ≥ 0.
    pub fn logdet_shifted_sqrt(&self, scale: T) -> T {
        debug_assert!(scale > T::zero(), "scale must be positive");
        self.eigenvalues
            .iter()
            .map(|&l| (T::one() + scale * l.max(T::zero()).sqrt()).ln())
            .sum()
    }
}

/// Eigenvalue-clamping tolerance for matrices that are PSD in exact
/// arithmetic: 1e-12 · max(1, trace).
pub fn psd_clamp_tol<T: Scalar>(m: &SymMatrix<T>) -> T {
    T::from_f64_c(1e-12) * T::one().max(m.trace())
}

/// Eigenvalues of a symmetric matrix (dense cyclic-Jacobi path, ascending).
pub fn eigen_sym<T: Scalar>(m: &SymMatrix<T>) -> Result<Spectrum<T>> {
    Ok(eigen_sym_full(m)?.0)
}

/// Eigenvalues (ascending) plus matching eigenvectors as columns:
/// `vectors[i][k]` is component i of the eigenvector for eigenvalue k.
pub fn eigen_sym_full<T: Scalar>(m: &SymMatrix<T>) -> Result<(Spectrum<T>, Vec<Vec<T>>)> {
    let n = m.dim();
    let mut a = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = m.get(i, j);
        }
    }
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }

    if n > 1 {
        let tol = T::epsilon() * T::from_f64_c(n as f64) * T::one().max(m.frobenius_norm());
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if (off + off).sqrt() <= tol {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, n, p, q);
                }
            }
        }
        if !converged {
            // one final check after the last sweep
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if (off + off).sqrt() > tol {
                return Err(CoreError::EigenConvergence {
                    dim: n,
                    sweeps: MAX_SWEEPS,
                });
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .partial_cmp(&a[j * n + j])
            .expect("eigenvalues must be ordered")
    });
    let eigenvalues: Vec<T> = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors: Vec<Vec<T>> = (0..n)
        .map(|i| order.iter().map(|&k| v[i * n + k]).collect())
        .collect();
    Ok((Spectrum { eigenvalues }, vectors))
}

fn jacobi_rotate<T: Scalar>(a: &mut [T], v: &mut [T], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == T::zero() {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (T::from_f64_c(2.0) * apq);
    // t = sign(theta) / (|theta| + sqrt(theta^2 + 1)), the smaller-angle root
    let t = {
        let denom = theta.abs() + (theta * theta + T::one()).sqrt();
        if theta >= T::zero() {
            (denom).recip()
        } else {
            -(denom).recip()
        }
    };
    let c = (t * t + T::one()).sqrt().recip();
    let s = t * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    // symmetrize the rotated pair against rounding drift
    a[p * n + q] = T::zero();
    a[q * n + p] = T::zero();

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}
