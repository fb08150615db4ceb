//! Seeded matrix ensembles used by the tests and the experiment harness.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{op_norm_default, Field, Matrix, Scalar, ONE, ZERO};
use crate::rng::{seeded, uniform_angle};

/// Normalized ensembles are divided by `op_norm · (1 + NORMALIZE_MARGIN)` so
/// that rounding in the norm estimate cannot push the result above 1.
pub const NORMALIZE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EnsembleKind {
    ExtremalP,
    HaarOrthogonal,
    HaarUnitary,
    ScaledIdentity,
    Circulant,
    PerturbedPermutation,
    RowNormalizedRandom,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 7] = [
        EnsembleKind::ExtremalP,
        EnsembleKind::HaarOrthogonal,
        EnsembleKind::HaarUnitary,
        EnsembleKind::ScaledIdentity,
        EnsembleKind::Circulant,
        EnsembleKind::PerturbedPermutation,
        EnsembleKind::RowNormalizedRandom,
    ];

    fn default_field(self) -> Field {
        match self {
            EnsembleKind::HaarUnitary => Field::Complex,
            _ => Field::Real,
        }
    }
}

/// Optional knobs for [`gen_ensemble`].
///
/// `delta` is required by `ScaledIdentity`, `weight` by
/// `PerturbedPermutation`; supplying either to another kind is an error.
/// `scale` multiplies the final matrix (after normalization).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleParams {
    pub field: Option<Field>,
    pub delta: Option<f64>,
    pub weight: Option<f64>,
    pub normalize: bool,
    pub scale: Option<f64>,
}

impl EnsembleParams {
    pub fn field(field: Field) -> Self {
        EnsembleParams {
            field: Some(field),
            ..Default::default()
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = Some(weight);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn normalized(mut self) -> Self {
        self.normalize = true;
        self
    }
}

/// Standard Gaussian entry: `N(0,1)` for real, `N(0,1/2) + i N(0,1/2)` for complex.
pub fn gaussian_scalar<R: Rng + ?Sized>(field: Field, rng: &mut R) -> Scalar {
    match field {
        Field::Real => Complex64::new(StandardNormal.sample(rng), 0.0),
        Field::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * s, im * s)
        }
    }
}

/// i.i.d. Gaussian matrix.
pub fn gaussian<R: Rng + ?Sized>(field: Field, n: usize, rng: &mut R) -> Result<Matrix> {
    let entries = (0..n * n).map(|_| gaussian_scalar(field, rng)).collect();
    Matrix::new(field, n, entries)
}

/// Uniform unit-modulus scalar: `±1` for real, `e^{iθ}` for complex.
pub fn unit_scalar<R: Rng + ?Sized>(field: Field, rng: &mut R) -> Scalar {
    match field {
        Field::Real => {
            if rng.random::<bool>() {
                ONE
            } else {
                -ONE
            }
        }
        Field::Complex => Complex64::from_polar(1.0, uniform_angle(rng)),
    }
}

/// Random permutation matrix times a random unit diagonal.
pub fn extremal<R: Rng + ?Sized>(field: Field, n: usize, rng: &mut R) -> Result<Matrix> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut entries = vec![ZERO; n * n];
    for (i, &j) in perm.iter().enumerate() {
        entries[i * n + j] = unit_scalar(field, rng);
    }
    Matrix::new(field, n, entries)
}

/// Q factor of the QR decomposition of `g`, with `R` having a positive
/// diagonal. Classical Gram–Schmidt applied twice per column.
pub fn qr_q(g: &Matrix) -> Result<Matrix> {
    let n = g.n();
    let mut cols: Vec<Vec<Scalar>> = (0..n)
        .map(|j| (0..n).map(|i| g.get(i, j)).collect())
        .collect();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let q = &done[k];
                let v = &mut rest[0];
                let proj: Scalar = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= qi * proj;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Structural("QR of a singular matrix".into()));
        }
        cols[j].iter_mut().for_each(|z| *z /= norm);
    }
    let mut entries = vec![ZERO; n * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            entries[i * n + j] = z;
        }
    }
    Matrix::new(g.field(), n, entries)
}

fn check_unit_interval(name: &str, value: Option<f64>, open_at_zero: bool) -> Result<f64> {
    let v = value.ok_or_else(|| Error::param(format!("parameter `{name}` is required")))?;
    let ok = if open_at_zero {
        v > 0.0 && v <= 1.0
    } else {
        (0.0..=1.0).contains(&v)
    };
    if !ok {
        return Err(Error::param(format!(
            "parameter `{name}` = {v} out of range"
        )));
    }
    Ok(v)
}

/// Generate a deterministic matrix for `(kind, n, params, seed)`.
pub fn gen_ensemble(
    kind: EnsembleKind,
    n: usize,
    params: &EnsembleParams,
    seed: u64,
) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::param("ensemble dimension must be at least 1"));
    }
    let field = params.field.unwrap_or(kind.default_field());
    match kind {
        EnsembleKind::HaarOrthogonal if field != Field::Real => {
            return Err(Error::param("HaarOrthogonal is real-only"));
        }
        EnsembleKind::HaarUnitary if field != Field::Complex => {
            return Err(Error::param("HaarUnitary is complex-only"));
        }
        _ => {}
    }
    if params.delta.is_some() && kind != EnsembleKind::ScaledIdentity {
        return Err(Error::param("`delta` only applies to ScaledIdentity"));
    }
    if params.weight.is_some() && kind != EnsembleKind::PerturbedPermutation {
        return Err(Error::param(
            "`weight` only applies to PerturbedPermutation",
        ));
    }
    if let Some(s) = params.scale {
        if !s.is_finite() {
            return Err(Error::param("`scale` must be finite"));
        }
    }

    let mut rng = seeded(seed);
    let mut a = match kind {
        EnsembleKind::ExtremalP => extremal(field, n, &mut rng)?,
        EnsembleKind::HaarOrthogonal | EnsembleKind::HaarUnitary => {
            qr_q(&gaussian(field, n, &mut rng)?)?
        }
        EnsembleKind::ScaledIdentity => {
            let delta = check_unit_interval("delta", params.delta, true)?;
            let mut m = Matrix::diagonal_real(&vec![delta; n])?;
            if field == Field::Complex {
                m = Matrix::new(Field::Complex, n, m.into_entries())?;
            }
            m
        }
        EnsembleKind::Circulant => {
            let first: Vec<Scalar> = (0..n).map(|_| gaussian_scalar(field, &mut rng)).collect();
            let mut entries = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    entries.push(first[(j + n - i) % n]);
                }
            }
            Matrix::new(field, n, entries)?
        }
        EnsembleKind::PerturbedPermutation => {
            let w = check_unit_interval("weight", params.weight, false)?;
            let p = extremal(field, n, &mut rng)?;
            let g = gaussian(field, n, &mut rng)?;
            let g_norm = op_norm_default(&g)?;
            let entries = p
                .entries()
                .iter()
                .zip(g.entries())
                .map(|(&pe, &ge)| pe * (1.0 - w) + ge * (w / g_norm))
                .collect();
            Matrix::new(field, n, entries)?
        }
        EnsembleKind::RowNormalizedRandom => {
            let g = gaussian(field, n, &mut rng)?;
            let mut entries = Vec::with_capacity(n * n);
            for row in g.rows() {
                let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                entries.extend(row.iter().map(|z| z / norm));
            }
            Matrix::new(field, n, entries)?
        }
    };
    if params.normalize {
        let t = op_norm_default(&a)?;
        if t > 0.0 {
            a = a.scaled_real(1.0 / (t * (1.0 + NORMALIZE_MARGIN)));
        }
    }
    if let Some(s) = params.scale {
        a = a.scaled_real(s);
    }
    Ok(a)
}
