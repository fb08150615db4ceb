//! Dense square matrices over ℝ or ℂ, row norms, the operator 2-norm and
//! membership in the extremal set of scaled permutation matrices.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Scalar = Complex64;

pub const ZERO: Scalar = Complex64::new(0.0, 0.0);
pub const ONE: Scalar = Complex64::new(1.0, 0.0);

/// Default relative tolerance for [`op_norm`].
pub const OP_NORM_TOL: f64 = 1e-10;
/// Default iteration cap for [`op_norm`].
pub const OP_NORM_MAX_ITER: usize = 10_000;

const MAX_SQUARINGS: usize = 64;

const RESTART_SEED: u64 = 0x0b5e_55ed_0f0f_1234;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// The field containing both `self` and `other`.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Complex || other == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// An `n × n` matrix stored row-major.
///
/// Entries are always finite, and a `Real` matrix has every imaginary part
/// exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    field: Field,
    n: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn new(field: Field, n: usize, entries: Vec<Scalar>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("matrix dimension must be at least 1"));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: entries.len(),
            });
        }
        if let Some(k) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::param(format!(
                "entry ({}, {}) is not finite",
                k / n,
                k % n
            )));
        }
        if field == Field::Real {
            if let Some(k) = entries.iter().position(|z| z.im != 0.0) {
                return Err(Error::Field(format!(
                    "real matrix has nonzero imaginary part at ({}, {})",
                    k / n,
                    k % n
                )));
            }
        }
        Ok(Matrix { field, n, entries })
    }

    pub fn from_real(n: usize, values: &[f64]) -> Result<Self> {
        Matrix::new(
            Field::Real,
            n,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Matrix::from_real(n, &flat)
    }

    pub fn zeros(field: Field, n: usize) -> Result<Self> {
        Matrix::new(field, n, vec![ZERO; n * n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Matrix::diagonal_real(&vec![1.0; n])
    }

    pub fn diagonal_real(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![ZERO; n * n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * n + i] = Complex64::new(d, 0.0);
        }
        Matrix::new(Field::Real, n, entries)
    }

    pub fn diagonal(field: Field, diag: &[Scalar]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![ZERO; n * n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * n + i] = d;
        }
        Matrix::new(field, n, entries)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Scalar]> {
        self.entries.chunks_exact(self.n)
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Scalar> {
        self.entries
    }

    /// `alpha · A`, promoting to the complex field when `alpha` is not real.
    pub fn scaled(&self, alpha: Scalar) -> Matrix {
        let field = if alpha.im == 0.0 {
            self.field
        } else {
            Field::Complex
        };
        Matrix {
            field,
            n: self.n,
            entries: self.entries.iter().map(|&z| z * alpha).collect(),
        }
    }

    pub fn scaled_real(&self, alpha: f64) -> Matrix {
        self.scaled(Complex64::new(alpha, 0.0))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik == ZERO {
                    continue;
                }
                for (o, &bkj) in out_row.iter_mut().zip(other.row(k)) {
                    *o += aik * bkj;
                }
            }
        }
        Ok(Matrix {
            field: self.field.join(other.field),
            n,
            entries: out,
        })
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.n;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.get(i, j).conj();
            }
        }
        Matrix {
            field: self.field,
            n,
            entries,
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(self
            .rows()
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// `y = A* x`.
    pub fn adjoint_matvec(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        let mut out = vec![ZERO; self.n];
        for (row, &xi) in self.rows().zip(x) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a.conj() * xi;
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Matrix) -> Option<f64> {
        (self.n == other.n).then(|| {
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| *z == ZERO)
    }

    /// True when every entry strictly below, or every entry strictly above,
    /// the diagonal is zero.
    pub fn is_triangular(&self) -> bool {
        let n = self.n;
        let lower_zero = (0..n).all(|i| (0..i).all(|j| self.get(i, j) == ZERO));
        let upper_zero = (0..n).all(|i| (i + 1..n).all(|j| self.get(i, j) == ZERO));
        lower_zero || upper_zero
    }
}

/// Per-row ℓ₂ and ℓ∞ norms with their means `h₂` and `h∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowStats {
    pub row_l2: Vec<f64>,
    pub row_linf: Vec<f64>,
    pub h2: f64,
    pub hinf: f64,
}

pub fn row_stats(a: &Matrix) -> RowStats {
    let row_linf: Vec<f64> = a
        .rows()
        .map(|r| r.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .collect();
    // `sqrt(|z|²)` can round one ulp below `|z|`; keep ℓ₂ ≥ ℓ∞ exact
    let row_l2: Vec<f64> = a
        .rows()
        .zip(&row_linf)
        .map(|(r, &m)| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(m))
        .collect();
    let n = a.n() as f64;
    let h2 = row_l2.iter().sum::<f64>() / n;
    let hinf = row_linf.iter().sum::<f64>() / n;
    RowStats {
        row_l2,
        row_linf,
        h2,
        hinf,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralInfo {
    pub op_norm: f64,
    pub iterations: usize,
    pub residual: f64,
}

struct PowerRun {
    sigma: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn normalize(v: &mut [Scalar]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}

/// Power iteration on `A* A` from `start`. Convergence is declared when the
/// relative eigen-residual `‖A*Av − ρv‖ / ρ` drops to `tol`.
fn power_iterate(a: &Matrix, start: Vec<Scalar>, tol: f64, max_iter: usize) -> Result<PowerRun> {
    let mut v = start;
    if normalize(&mut v) == 0.0 {
        return Ok(PowerRun {
            sigma: 0.0,
            iterations: 0,
            residual: f64::INFINITY,
            converged: false,
        });
    }
    let mut best = PowerRun {
        sigma: 0.0,
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
    };
    for it in 1..=max_iter {
        let w = a.matvec(&v)?;
        let rho: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        let mut z = a.adjoint_matvec(&w)?;
        if rho == 0.0 {
            // start vector lies in the kernel
            best.iterations = it;
            return Ok(best);
        }
        let residual = z
            .iter()
            .zip(&v)
            .map(|(zi, vi)| (zi - vi * rho).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / rho;
        best = PowerRun {
            sigma: rho.sqrt(),
            iterations: it,
            residual,
            converged: residual <= tol,
        };
        if best.converged {
            break;
        }
        normalize(&mut z);
        v = z;
    }
    Ok(best)
}

/// Largest-norm column of `(A*A)^(2^k)`, with `k` grown until the
/// normalized power stops changing. Repeated squaring separates the top
/// singular value from a close second doubly exponentially fast.
fn squared_gram_start(a: &Matrix) -> Result<Vec<Scalar>> {
    let mut w = a.adjoint().matmul(a)?;
    for _ in 0..MAX_SQUARINGS {
        let next = w.matmul(&w)?;
        let scale = next.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            break;
        }
        let next = next.scaled_real(1.0 / scale);
        let settled = next.max_abs_diff(&w).is_some_and(|d| d <= 1e-15);
        w = next;
        if settled {
            break;
        }
    }
    let n = a.n();
    let col = (0..n)
        .max_by(|&i, &j| {
            let ci: f64 = (0..n).map(|r| w.get(r, i).norm_sqr()).sum();
            let cj: f64 = (0..n).map(|r| w.get(r, j).norm_sqr()).sum();
            ci.total_cmp(&cj)
        })
        .unwrap_or(0);
    Ok((0..n).map(|r| w.get(r, col)).collect())
}

/// Operator 2-norm (largest singular value) by power iteration on `A* A`.
///
/// Two runs are made: one from the all-ones vector and one from a fixed
/// seeded Gaussian vector, and the larger estimate is reported. If neither
/// converges, a third run starts from a repeated-squaring estimate of the
/// top singular vector. The result is a deterministic function of `A`.
pub fn op_norm(a: &Matrix, tol: f64, max_iter: usize) -> Result<SpectralInfo> {
    if !(tol > 0.0) {
        return Err(Error::param("op_norm tolerance must be positive"));
    }
    if max_iter == 0 {
        return Err(Error::param("op_norm max_iter must be at least 1"));
    }
    if a.is_zero() {
        return Ok(SpectralInfo {
            op_norm: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }
    let n = a.n();
    let ones = vec![ONE; n];
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let restart: Vec<Scalar> = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = match a.field() {
                Field::Real => 0.0,
                Field::Complex => StandardNormal.sample(&mut rng),
            };
            Complex64::new(re, im)
        })
        .collect();

    let first = power_iterate(a, ones, tol, max_iter)?;
    let second = power_iterate(a, restart, tol, max_iter)?;
    let mut iterations = first.iterations + second.iterations;
    let mut best = if second.sigma > first.sigma {
        second
    } else {
        first
    };
    if !best.converged {
        // clustered top singular values: restart from a column of (A*A)^(2^k)
        let third = power_iterate(a, squared_gram_start(a)?, tol, max_iter)?;
        iterations += third.iterations;
        if third.converged || third.sigma > best.sigma {
            best = third;
        }
    }
    if !best.converged {
        return Err(Error::NonConvergence {
            estimate: best.sigma,
            residual: best.residual,
            iterations,
        });
    }
    Ok(SpectralInfo {
        op_norm: best.sigma,
        iterations,
        residual: best.residual,
    })
}

/// [`op_norm`] with the default tolerance and iteration cap.
pub fn op_norm_default(a: &Matrix) -> Result<f64> {
    op_norm(a, OP_NORM_TOL, OP_NORM_MAX_ITER).map(|s| s.op_norm)
}

/// Membership in the extremal set: exactly one entry of modulus within `tol`
/// of 1 in every row and every column, all other entries of modulus at most
/// `tol`.
#[allow(clippy::needless_range_loop)]
pub fn is_in_p(a: &Matrix, tol: f64) -> bool {
    let n = a.n();
    let mut row_units = vec![0usize; n];
    let mut col_units = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            let m = a.get(i, j).norm();
            if (m - 1.0).abs() <= tol {
                row_units[i] += 1;
                col_units[j] += 1;
            } else if m > tol {
                return false;
            }
        }
    }
    row_units.iter().chain(&col_units).all(|&c| c == 1)
}
