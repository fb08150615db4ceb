//! The Glynn estimator and the sampling diagnostics built on `y = AX`.
//!
//! `X` has independent unit-modulus coordinates: uniform signs for real
//! matrices, uniform phases for complex ones. Sample `k` of a run always
//! draws from the counter-based stream `(seed, k)`, and per-sample values are
//! reduced sequentially in index order, so results are bitwise reproducible
//! whatever the worker count.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::LAMBDA_REAL;
use crate::error::{Error, Result};
use crate::linalg::{op_norm_default, row_stats, Field, Matrix, Scalar, ONE};
use crate::rng::{uniform_angle, SampleStreams};

/// Relative per-factor slack when comparing `|Gly|` with `Tⁿ`.
pub const GLY_SLACK: f64 = 1e-9;

/// Largest dimension accepted by the full-enumeration routines.
pub const ENUMERATION_MAX_N: usize = 20;

/// A point on the torus `{|z| = 1}ⁿ` (or on `{±1}ⁿ` for the real field).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    field: Field,
    coords: Vec<Scalar>,
}

impl SampleVector {
    pub fn new(field: Field, coords: Vec<Scalar>) -> Result<Self> {
        for (i, z) in coords.iter().enumerate() {
            if (z.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::param(format!(
                    "coordinate {i} = {z} is not unit-modulus"
                )));
            }
            if field == Field::Real && z.im != 0.0 {
                return Err(Error::Field(format!("coordinate {i} = {z} is not real")));
            }
        }
        Ok(SampleVector { field, coords })
    }

    pub fn signs(signs: &[f64]) -> Result<Self> {
        SampleVector::new(
            Field::Real,
            signs.iter().map(|&s| Complex64::new(s, 0.0)).collect(),
        )
    }

    pub fn draw<R: Rng + ?Sized>(field: Field, n: usize, rng: &mut R) -> Self {
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        draw_into(field, rng, &mut re, &mut im);
        SampleVector {
            field,
            coords: re
                .iter()
                .zip(&im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect(),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }
}

fn draw_into<R: Rng + ?Sized>(field: Field, rng: &mut R, re: &mut [f64], im: &mut [f64]) {
    match field {
        Field::Real => {
            for chunk in re.chunks_mut(64) {
                let bits: u64 = rng.random();
                for (k, v) in chunk.iter_mut().enumerate() {
                    *v = if (bits >> k) & 1 == 1 { 1.0 } else { -1.0 };
                }
            }
            im.fill(0.0);
        }
        Field::Complex => {
            for (r, i) in re.iter_mut().zip(im.iter_mut()) {
                let (s, c) = uniform_angle(rng).sin_cos();
                *r = c;
                *i = s;
            }
        }
    }
}

/// Column-major split storage of `A` so that `y = Ax` is a sequence of
/// vectorizable axpy updates.
struct Kernel {
    n: usize,
    complex: bool,
    col_re: Vec<f64>,
    col_im: Vec<f64>,
}

impl Kernel {
    fn new(a: &Matrix) -> Self {
        let n = a.n();
        let mut col_re = vec![0.0; n * n];
        let mut col_im = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let z = a.get(i, j);
                col_re[j * n + i] = z.re;
                col_im[j * n + i] = z.im;
            }
        }
        Kernel {
            n,
            complex: a.field() == Field::Complex,
            col_re,
            col_im,
        }
    }

    fn apply(
        &self,
        x_complex: bool,
        x_re: &[f64],
        x_im: &[f64],
        y_re: &mut [f64],
        y_im: &mut [f64],
    ) {
        let n = self.n;
        y_re.fill(0.0);
        y_im.fill(0.0);
        for j in 0..n {
            let cr = &self.col_re[j * n..(j + 1) * n];
            let ci = &self.col_im[j * n..(j + 1) * n];
            let (xr, xi) = (x_re[j], x_im[j]);
            match (self.complex, x_complex) {
                (false, false) => {
                    for (y, &a) in y_re.iter_mut().zip(cr) {
                        *y += a * xr;
                    }
                }
                (false, true) => {
                    for ((yr, yi), &a) in y_re.iter_mut().zip(y_im.iter_mut()).zip(cr) {
                        *yr += a * xr;
                        *yi += a * xi;
                    }
                }
                (true, false) => {
                    for ((yr, yi), (&a, &b)) in
                        y_re.iter_mut().zip(y_im.iter_mut()).zip(cr.iter().zip(ci))
                    {
                        *yr += a * xr;
                        *yi += b * xr;
                    }
                }
                (true, true) => {
                    for ((yr, yi), (&a, &b)) in
                        y_re.iter_mut().zip(y_im.iter_mut()).zip(cr.iter().zip(ci))
                    {
                        *yr += a * xr - b * xi;
                        *yi += a * xi + b * xr;
                    }
                }
            }
        }
    }
}

struct Buffers {
    x_re: Vec<f64>,
    x_im: Vec<f64>,
    y_re: Vec<f64>,
    y_im: Vec<f64>,
}

impl Buffers {
    fn new(n: usize) -> Self {
        Buffers {
            x_re: vec![0.0; n],
            x_im: vec![0.0; n],
            y_re: vec![0.0; n],
            y_im: vec![0.0; n],
        }
    }

    fn gly(&self) -> Scalar {
        let conj_x = self
            .x_re
            .iter()
            .zip(&self.x_im)
            .fold(ONE, |acc, (&r, &i)| acc * Complex64::new(r, -i));
        let prod_y = self
            .y_re
            .iter()
            .zip(&self.y_im)
            .fold(ONE, |acc, (&r, &i)| acc * Complex64::new(r, i));
        conj_x * prod_y
    }

    fn l1(&self) -> f64 {
        self.y_re
            .iter()
            .zip(&self.y_im)
            .map(|(&r, &i)| r.hypot(i))
            .sum()
    }
}

/// `Gly_x(A) = (∏ x̄_i)(∏ (Ax)_i)`.
pub fn glynn_value(a: &Matrix, x: &SampleVector) -> Result<Scalar> {
    if x.coords.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            actual: x.coords.len(),
        });
    }
    let y = a.matvec(&x.coords)?;
    let conj_x = x.coords.iter().fold(ONE, |acc, z| acc * z.conj());
    Ok(conj_x * y.iter().fold(ONE, |acc, &z| acc * z))
}

/// Run `f` on every sample index with a fresh draw of `X` and `y = AX`
/// already computed; results come back in index order.
fn map_samples<T, F>(a: &Matrix, samples: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Buffers) -> T + Sync,
{
    let n = a.n();
    let field = a.field();
    let kernel = Kernel::new(a);
    let streams = SampleStreams::new(seed);
    (0..samples)
        .into_par_iter()
        .map_init(
            || Buffers::new(n),
            |buf, k| {
                let mut rng = streams.stream(k as u64);
                draw_into(field, &mut rng, &mut buf.x_re, &mut buf.x_im);
                kernel.apply(
                    field == Field::Complex,
                    &buf.x_re,
                    &buf.x_im,
                    &mut buf.y_re,
                    &mut buf.y_im,
                );
                f(buf)
            },
        )
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mean: Scalar,
    /// `√((s²_re + s²_im)/N)`: the standard error of the complex mean, i.e.
    /// the root of the summed componentwise squared standard errors.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: f64,
    pub max_abs_gly: f64,
    /// Samples with `|Gly| > Tⁿ(1 + GLY_SLACK)ⁿ`.
    pub exceeded_tn: usize,
}

/// Monte Carlo estimate of `perm A` as the sample mean of `Gly_X(A)`.
pub fn estimate_perm(a: &Matrix, t: f64, samples: usize, seed: u64) -> Result<EstimateReport> {
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(format!(
            "T must be finite and non-negative, got {t}"
        )));
    }
    let norm = op_norm_default(a)?;
    if t < norm * (1.0 - 1e-8) {
        return Err(Error::param(format!(
            "T = {t} is below the operator norm {norm}"
        )));
    }
    let values = map_samples(a, samples, seed, Buffers::gly);

    let count = samples as f64;
    let mean = values.iter().sum::<Scalar>() / count;
    let stderr = if samples > 1 {
        let (ss_re, ss_im) = values.iter().fold((0.0, 0.0), |(r, i), v| {
            let d = v - mean;
            (r + d.re * d.re, i + d.im * d.im)
        });
        ((ss_re + ss_im) / (count - 1.0) / count).sqrt()
    } else {
        0.0
    };
    let ln_cap = a.n() as f64 * (t.ln() + GLY_SLACK.ln_1p());
    let max_abs_gly = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let exceeded_tn = values
        .iter()
        .filter(|v| {
            let m = v.norm();
            m > 0.0 && m.ln() > ln_cap
        })
        .count();
    Ok(EstimateReport {
        mean,
        stderr,
        samples,
        seed,
        t,
        max_abs_gly,
        exceeded_tn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFrequency {
    pub t: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub field: Field,
    pub samples: usize,
    pub seed: u64,
    /// Empirical `E[‖AX‖₁/n]`.
    pub mean_l1_over_n: f64,
    pub stderr_l1_over_n: f64,
    pub max_l1_over_n: f64,
    /// `ln` of the empirical `E[(‖AX‖₁/n)ⁿ]`.
    pub log_nth_moment: f64,
    /// Frequency of `‖AX‖₁ > (empirical mean) + t·n` per threshold.
    pub tail_freqs: Vec<TailFrequency>,
    /// Frequency of `‖BX‖₁ ≠ ⟨X, B̃X⟩`, when a row partition was sampled.
    pub sign_disagreement_freq: Option<f64>,
}

fn log_mean_exp(logs: impl Iterator<Item = f64> + Clone, count: f64) -> f64 {
    let m = logs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (logs.map(|x| (x - m).exp()).sum::<f64>() / count).ln()
}

/// Empirical distribution of `‖AX‖₁/n`: mean, `n`-th moment and upper tails.
pub fn sample_l1(
    a: &Matrix,
    samples: usize,
    seed: u64,
    thresholds: &[f64],
) -> Result<ConcentrationReport> {
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    if let Some(t) = thresholds.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::param(format!(
            "tail threshold {t} must be finite and >= 0"
        )));
    }
    let n = a.n();
    let nf = n as f64;
    let values = map_samples(a, samples, seed, |b| b.l1() / nf);
    let count = samples as f64;
    let mean = values.iter().sum::<f64>() / count;
    let stderr = if samples > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (count - 1.0) / count).sqrt()
    } else {
        0.0
    };
    let log_nth_moment = log_mean_exp(values.iter().map(|&v| nf * v.ln()), count);
    let tail_freqs = thresholds
        .iter()
        .map(|&t| TailFrequency {
            t,
            frequency: values.iter().filter(|&&v| v > mean + t).count() as f64 / count,
        })
        .collect();
    Ok(ConcentrationReport {
        n,
        field: a.field(),
        samples,
        seed,
        mean_l1_over_n: mean,
        stderr_l1_over_n: stderr,
        max_l1_over_n: values.iter().copied().fold(0.0, f64::max),
        log_nth_moment,
        tail_freqs,
        sign_disagreement_freq: None,
    })
}

fn sign_vector_coords(bits: u64, n: usize) -> Vec<Scalar> {
    (0..n)
        .map(|i| if (bits >> i) & 1 == 1 { -ONE } else { ONE })
        .collect()
}

/// Mean of [`glynn_value`] over all `2ⁿ` sign vectors, each evaluated from
/// scratch (no incremental updates).
pub fn enumerate_glynn_mean(a: &Matrix) -> Result<Scalar> {
    let n = a.n();
    if n > ENUMERATION_MAX_N {
        return Err(Error::Size {
            algorithm: "enumerate_glynn_mean",
            n,
            cap: ENUMERATION_MAX_N,
        });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for bits in 0..(1u64 << n) {
        let x = SampleVector {
            field: Field::Real,
            coords: sign_vector_coords(bits, n),
        };
        total += glynn_value(a, &x)?;
    }
    Ok(total / (1u64 << n) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Moments {
    pub mean_l1_over_n: f64,
    pub log_nth_moment: f64,
}

/// Exact `E[‖AX‖₁/n]` and `ln E[(‖AX‖₁/n)ⁿ]` for uniform `X ∈ {±1}ⁿ`.
pub fn enumerate_l1(a: &Matrix) -> Result<L1Moments> {
    let n = a.n();
    if n > ENUMERATION_MAX_N {
        return Err(Error::Size {
            algorithm: "enumerate_l1",
            n,
            cap: ENUMERATION_MAX_N,
        });
    }
    let nf = n as f64;
    let values: Vec<f64> = (0..(1u64 << n))
        .map(|bits| {
            let y = a
                .matvec(&sign_vector_coords(bits, n))
                .expect("dimension matches");
            y.iter().map(|z| z.norm()).sum::<f64>() / nf
        })
        .collect();
    let count = values.len() as f64;
    Ok(L1Moments {
        mean_l1_over_n: values.iter().sum::<f64>() / count,
        log_nth_moment: log_mean_exp(values.iter().map(|&v| nf * v.ln()), count),
    })
}

/// A real row-major block with `ncols` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealRows {
    pub ncols: usize,
    pub data: Vec<f64>,
}

impl RealRows {
    pub fn nrows(&self) -> usize {
        self.data.len().checked_div(self.ncols).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.ncols.max(1))
    }
}

/// Split of a real matrix of norm at most 1 into big rows (an entry of
/// modulus `≥ 1 - λ`) and small rows, after permuting rows and columns and
/// flipping row signs so the big entries sit positive on the diagonal of
/// the top block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub lambda: f64,
    pub n: usize,
    pub b: usize,
    pub l: usize,
    /// `b × n` block of big rows, `(i, i)` entry positive and `≥ 1 - λ`.
    pub big: RealRows,
    /// `l × n` block of small rows.
    pub small: RealRows,
    /// New row `k` is old row `row_perm[k]`.
    pub row_perm: Vec<usize>,
    /// New column `k` is old column `col_perm[k]`.
    pub col_perm: Vec<usize>,
    /// Sign applied to each new row.
    pub sign_diag: Vec<f64>,
    /// `1 - h∞(A)` at the normalization `‖A‖₂ ≤ 1`.
    pub t_param: f64,
    /// `‖r_i‖∞` of each new row.
    pub row_linf: Vec<f64>,
}

impl PartitionResult {
    /// `(μ̃_B, μ̃_L)`: `Σ [1 - (1 - √(2/π))(1 - ‖r_i‖∞)]` over big and small rows.
    pub fn mu_tilde(&self) -> (f64, f64) {
        let term = |linf: f64| 1.0 - (1.0 - LAMBDA_REAL) * (1.0 - linf);
        let big = self.row_linf[..self.b].iter().map(|&v| term(v)).sum();
        let small = self.row_linf[self.b..].iter().map(|&v| term(v)).sum();
        (big, small)
    }

    /// The permuted, sign-adjusted matrix `[B; L]`.
    pub fn permuted(&self) -> Result<Matrix> {
        let mut flat = self.big.data.clone();
        flat.extend_from_slice(&self.small.data);
        Matrix::from_real(self.n, &flat)
    }
}

pub fn partition_rows(a: &Matrix, lambda: f64) -> Result<PartitionResult> {
    if a.field() != Field::Real {
        return Err(Error::Field("row partition requires a real matrix".into()));
    }
    if !(lambda > 0.0 && lambda < 0.1) {
        return Err(Error::param(format!("lambda = {lambda} outside (0, 0.1)")));
    }
    let norm = op_norm_default(a)?;
    if norm > 1.0 + 1e-8 {
        return Err(Error::param(format!("operator norm {norm} exceeds 1")));
    }
    let n = a.n();
    let threshold = 1.0 - lambda;
    let mut big_rows = Vec::new();
    let mut small_rows = Vec::new();
    let mut big_cols = Vec::new();
    let mut col_taken = vec![false; n];
    for i in 0..n {
        let large: Vec<usize> = (0..n)
            .filter(|&j| a.get(i, j).re.abs() >= threshold)
            .collect();
        match large.as_slice() {
            [] => small_rows.push(i),
            [j] => {
                if col_taken[*j] {
                    return Err(Error::Structural(format!(
                        "column {j} holds more than one entry of modulus >= {threshold}"
                    )));
                }
                col_taken[*j] = true;
                big_rows.push(i);
                big_cols.push(*j);
            }
            _ => {
                return Err(Error::Structural(format!(
                    "row {i} holds more than one entry of modulus >= {threshold}"
                )));
            }
        }
    }
    let b = big_rows.len();
    let row_perm: Vec<usize> = big_rows.iter().chain(&small_rows).copied().collect();
    let col_perm: Vec<usize> = big_cols
        .iter()
        .copied()
        .chain((0..n).filter(|j| !col_taken[*j]))
        .collect();
    let sign_diag: Vec<f64> = (0..n)
        .map(|k| {
            if k < b {
                a.get(row_perm[k], col_perm[k]).re.signum()
            } else {
                1.0
            }
        })
        .collect();
    let mut data = Vec::with_capacity(n * n);
    for k in 0..n {
        for &j in &col_perm {
            data.push(sign_diag[k] * a.get(row_perm[k], j).re);
        }
    }
    let small = data.split_off(b * n);
    let stats = row_stats(a);
    let row_linf = row_perm.iter().map(|&i| stats.row_linf[i]).collect();
    Ok(PartitionResult {
        lambda,
        n,
        b,
        l: n - b,
        big: RealRows { ncols: n, data },
        small: RealRows {
            ncols: n,
            data: small,
        },
        row_perm,
        col_perm,
        sign_diag,
        t_param: 1.0 - stats.hinf,
        row_linf,
    })
}

/// Empirical frequencies of the events controlled by the real-case tail
/// lemmas, all measured on the same sign vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionTails {
    pub samples: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// `‖BX‖₁ ≠ ⟨X, B̃X⟩`, i.e. some `X_i (BX)_i < 0`.
    pub sign_disagreement: f64,
    /// `‖LX‖₁ ≥ μ̃_L + εn`
    pub lx_tail: f64,
    /// `‖BX‖₁ ≥ μ̃_B + εn`
    pub bx_tail: f64,
    /// `⟨X, B̃X⟩ ≥ μ̃_B + εn`
    pub inner_product_tail: f64,
}

pub fn sample_partition_tails(
    part: &PartitionResult,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<PartitionTails> {
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    let n = part.n;
    let nf = n as f64;
    let (mu_big, mu_small) = part.mu_tilde();
    let streams = SampleStreams::new(seed);
    let events: Vec<[bool; 4]> = (0..samples)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(x, scratch), k| {
                let mut rng = streams.stream(k as u64);
                draw_into(Field::Real, &mut rng, x, scratch);
                let mut disagree = false;
                let mut bx_l1 = 0.0;
                let mut inner = 0.0;
                for (i, row) in part.big.rows().enumerate().take(part.b) {
                    let y: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                    disagree |= x[i] * y < 0.0;
                    bx_l1 += y.abs();
                    inner += x[i] * y;
                }
                let lx_l1: f64 = part
                    .small
                    .rows()
                    .take(part.l)
                    .map(|row| {
                        row.iter()
                            .zip(x.iter())
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                            .abs()
                    })
                    .sum();
                [
                    disagree,
                    lx_l1 >= mu_small + epsilon * nf,
                    bx_l1 >= mu_big + epsilon * nf,
                    inner >= mu_big + epsilon * nf,
                ]
            },
        )
        .collect();
    let freq = |k: usize| events.iter().filter(|e| e[k]).count() as f64 / samples as f64;
    Ok(PartitionTails {
        samples,
        seed,
        epsilon,
        sign_disagreement: freq(0),
        lx_tail: freq(1),
        bx_tail: freq(2),
        inner_product_tail: freq(3),
    })
}

/// Frequency over sign vectors of `‖BX‖₁ ≠ ⟨X, B̃X⟩`; ties count as agreement.
pub fn quadratic_form_diag(part: &PartitionResult, samples: usize, seed: u64) -> Result<f64> {
    sample_partition_tails(part, 1.0, samples, seed).map(|t| t.sign_disagreement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{gen_ensemble, EnsembleKind, EnsembleParams};
    use crate::permanent::perm_ryser;
    use crate::rng::seeded;

    fn two_by_two() -> Matrix {
        Matrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()
    }

    #[test]
    fn glynn_value_examples() {
        let i2 = Matrix::identity(2).unwrap();
        let x = SampleVector::signs(&[1.0, -1.0]).unwrap();
        assert_eq!(glynn_value(&i2, &x).unwrap(), ONE);

        let a = two_by_two();
        let x = SampleVector::signs(&[1.0, 1.0]).unwrap();
        assert_eq!(glynn_value(&a, &x).unwrap(), Complex64::new(21.0, 0.0));

        let all: Vec<f64> = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
            .iter()
            .map(|s| {
                glynn_value(&a, &SampleVector::signs(s).unwrap())
                    .unwrap()
                    .re
            })
            .collect();
        assert_eq!(all, vec![21.0, -1.0, -1.0, 21.0]);
        assert_eq!(enumerate_glynn_mean(&a).unwrap(), Complex64::new(10.0, 0.0));
    }

    #[test]
    fn glynn_value_rejects_bad_input() {
        let a = two_by_two();
        let x = SampleVector::signs(&[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            glynn_value(&a, &x),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(SampleVector::signs(&[0.5]).is_err());
        assert!(SampleVector::new(Field::Real, vec![Complex64::new(0.0, 1.0)]).is_err());
    }

    #[test]
    fn drawn_vectors_are_unit_modulus() {
        let mut rng = seeded(4);
        for field in [Field::Real, Field::Complex] {
            let x = SampleVector::draw(field, 130, &mut rng);
            assert!(x.coords().iter().all(|z| (z.norm() - 1.0).abs() <= 1e-15));
            if field == Field::Real {
                assert!(x.coords().iter().all(|z| z.im == 0.0));
            }
        }
    }

    #[test]
    fn estimate_identity_and_zero() {
        let r = estimate_perm(&Matrix::identity(5).unwrap(), 1.0, 100, 3).unwrap();
        assert_eq!(r.mean, ONE);
        assert_eq!(r.stderr, 0.0);
        assert_eq!(r.exceeded_tn, 0);

        let z = Matrix::zeros(Field::Real, 4).unwrap();
        let r = estimate_perm(&z, 0.0, 50, 3).unwrap();
        assert_eq!(r.mean, Complex64::new(0.0, 0.0));
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn estimate_rejects_small_t() {
        let a = two_by_two();
        assert!(estimate_perm(&a, 1.0, 10, 0).is_err());
        assert!(estimate_perm(&a, 10.0, 0, 0).is_err());
    }

    #[test]
    fn estimate_tracks_exact_value() {
        let a = gen_ensemble(
            EnsembleKind::HaarOrthogonal,
            6,
            &EnsembleParams::default(),
            21,
        )
        .unwrap();
        let exact = perm_ryser(&a).unwrap();
        let r = estimate_perm(&a, 1.0 + 1e-9, 20_000, 5).unwrap();
        assert!(
            (r.mean - exact).norm() <= 5.0 * r.stderr,
            "{} vs {exact}",
            r.mean
        );
        assert_eq!(r.exceeded_tn, 0);
    }

    #[test]
    fn estimate_is_reproducible() {
        let a = gen_ensemble(EnsembleKind::HaarUnitary, 5, &EnsembleParams::default(), 2).unwrap();
        let r1 = estimate_perm(&a, 1.0, 1000, 77).unwrap();
        let r2 = estimate_perm(&a, 1.0, 1000, 77).unwrap();
        assert_eq!(r1, r2);
        let r3 = estimate_perm(&a, 1.0, 1000, 78).unwrap();
        assert_ne!(r1.mean, r3.mean);
    }

    #[test]
    fn l1_identity() {
        let r = sample_l1(&Matrix::identity(9).unwrap(), 500, 1, &[0.0, 0.1, 0.5]).unwrap();
        assert_eq!(r.mean_l1_over_n, 1.0);
        assert_eq!(r.log_nth_moment, 0.0);
        assert!(r.tail_freqs.iter().all(|t| t.frequency == 0.0));
    }

    #[test]
    fn l1_hadamard_enumeration() {
        let h = Matrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]])
            .unwrap()
            .scaled_real(std::f64::consts::FRAC_1_SQRT_2);
        let m = enumerate_l1(&h).unwrap();
        assert!((m.mean_l1_over_n - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let r = sample_l1(&h, 1000, 9, &[0.1, 0.5]).unwrap();
        assert!((r.mean_l1_over_n - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(r.tail_freqs.iter().all(|t| t.frequency == 0.0));
    }

    #[test]
    fn l1_rejects_negative_threshold() {
        assert!(sample_l1(&Matrix::identity(2).unwrap(), 10, 0, &[-0.1]).is_err());
    }

    #[test]
    fn partition_examples() {
        let d = Matrix::diagonal_real(&[0.99, 0.5]).unwrap();
        let p = partition_rows(&d, 0.05).unwrap();
        assert_eq!((p.b, p.l), (1, 1));
        assert_eq!(p.big.row(0), &[0.99, 0.0]);
        assert_eq!(p.small.row(0), &[0.0, 0.5]);

        let p = partition_rows(&Matrix::identity(6).unwrap(), 0.05).unwrap();
        assert_eq!((p.b, p.l), (6, 0));

        let q = gen_ensemble(
            EnsembleKind::HaarOrthogonal,
            8,
            &EnsembleParams::default(),
            1,
        )
        .unwrap()
        .scaled_real(0.5);
        assert!(q.entries().iter().all(|z| z.norm() <= 0.5));
        let p = partition_rows(&q, 0.05).unwrap();
        assert_eq!((p.b, p.l), (0, 8));
        assert_eq!(quadratic_form_diag(&p, 100, 0).unwrap(), 0.0);
    }

    #[test]
    fn partition_puts_positive_big_entries_on_diagonal() {
        let a = gen_ensemble(
            EnsembleKind::PerturbedPermutation,
            10,
            &EnsembleParams::field(Field::Real).with_weight(0.03),
            8,
        )
        .unwrap();
        let p = partition_rows(&a, 0.09).unwrap();
        assert_eq!(p.b, 10);
        for i in 0..p.b {
            assert!(p.big.row(i)[i] >= 1.0 - p.lambda);
        }
        let m = p.permuted().unwrap();
        for i in 0..10 {
            for j in 0..10 {
                if !(i == j && i < p.b) {
                    assert!(m.get(i, j).re.abs() < 1.0 - p.lambda);
                }
            }
        }
        assert!(p.l as f64 * p.lambda <= 10.0 * p.t_param + 1e-12);
    }

    #[test]
    fn partition_errors() {
        let c = Matrix::new(Field::Complex, 1, vec![ONE]).unwrap();
        assert!(matches!(partition_rows(&c, 0.05), Err(Error::Field(_))));
        let i = Matrix::identity(2).unwrap();
        assert!(partition_rows(&i, 0.1).is_err());
        assert!(partition_rows(&i, 0.0).is_err());
        assert!(partition_rows(&i.scaled_real(2.0), 0.05).is_err());
    }

    #[test]
    fn quadratic_form_identity_never_disagrees() {
        let p = partition_rows(&Matrix::identity(12).unwrap(), 0.05).unwrap();
        assert_eq!(quadratic_form_diag(&p, 2000, 4).unwrap(), 0.0);
    }

    #[test]
    fn mu_tilde_identity() {
        let a = gen_ensemble(
            EnsembleKind::RowNormalizedRandom,
            9,
            &EnsembleParams::field(Field::Real).normalized(),
            3,
        )
        .unwrap();
        let p = partition_rows(&a, 0.05).unwrap();
        let (mb, ml) = p.mu_tilde();
        let lhs = (mb + ml) / 9.0;
        let rhs = crate::bounds::template_mean(p.t_param);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
