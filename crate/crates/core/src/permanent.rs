//! Exact permanents: direct expansion over `S_n`, Ryser inclusion–exclusion,
//! and full enumeration of the Glynn average over `{±1}ⁿ`.
//!
//! The three routes share nothing beyond the matrix type and serve as
//! oracles for each other. Summation is sequential in a fixed Gray-code
//! order, so every result is bitwise deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar, ONE, ZERO};

pub const NAIVE_MAX_N: usize = 10;
pub const RYSER_MAX_N: usize = 30;
pub const GLYNN_EXACT_MAX_N: usize = 26;

/// A permanent together with its log-modulus and phase.
///
/// `ln_abs` is `-inf` and `phase` is 0 when the value is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermValue {
    pub value: Scalar,
    pub ln_abs: f64,
    pub phase: f64,
}

impl PermValue {
    pub fn new(value: Scalar) -> Self {
        let abs = value.norm();
        if abs == 0.0 {
            PermValue {
                value,
                ln_abs: f64::NEG_INFINITY,
                phase: 0.0,
            }
        } else {
            PermValue {
                value,
                ln_abs: abs.ln(),
                phase: value.arg(),
            }
        }
    }
}

fn check_cap(algorithm: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::Size { algorithm, n, cap })
    } else {
        Ok(())
    }
}

fn columns(a: &Matrix) -> Vec<Vec<Scalar>> {
    let n = a.n();
    (0..n)
        .map(|j| (0..n).map(|i| a.get(i, j)).collect())
        .collect()
}

pub fn perm_naive(a: &Matrix) -> Result<Scalar> {
    perm_naive_capped(a, NAIVE_MAX_N)
}

/// `Σ_σ ∏_i a_{i,σ(i)}` over all `n!` permutations, generated by Heap's
/// algorithm.
pub fn perm_naive_capped(a: &Matrix, cap: usize) -> Result<Scalar> {
    let n = a.n();
    check_cap("perm_naive", n, cap)?;
    let term = |sigma: &[usize]| -> Scalar {
        sigma
            .iter()
            .enumerate()
            .map(|(i, &j)| a.get(i, j))
            .fold(ONE, |acc, z| acc * z)
    };
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut total = term(&sigma);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(counters[i], i);
            }
            total += term(&sigma);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

pub fn perm_ryser(a: &Matrix) -> Result<Scalar> {
    perm_ryser_capped(a, RYSER_MAX_N)
}

/// Ryser's formula `(-1)ⁿ Σ_S (-1)^{|S|} ∏_i Σ_{j∈S} a_ij` over all column
/// subsets, visiting subsets in Gray-code order so each step adds or removes
/// a single column from the running row sums.
pub fn perm_ryser_capped(a: &Matrix, cap: usize) -> Result<Scalar> {
    let n = a.n();
    check_cap("perm_ryser", n, cap)?;
    let cols = columns(a);
    let mut row_sums = vec![ZERO; n];
    let mut subset: u64 = 0;
    let mut total = ZERO;
    for k in 1..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u64 << j;
        subset ^= bit;
        if subset & bit != 0 {
            row_sums
                .iter_mut()
                .zip(&cols[j])
                .for_each(|(s, &c)| *s += c);
        } else {
            row_sums
                .iter_mut()
                .zip(&cols[j])
                .for_each(|(s, &c)| *s -= c);
        }
        let prod = row_sums.iter().fold(ONE, |acc, &s| acc * s);
        if subset.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(if n.is_multiple_of(2) { total } else { -total })
}

pub fn perm_glynn_exact(a: &Matrix) -> Result<Scalar> {
    perm_glynn_exact_capped(a, GLYNN_EXACT_MAX_N)
}

/// Average of `(∏ x_i) · ∏ (Ax)_i` over every `x ∈ {±1}ⁿ`. The sign vectors
/// are walked in Gray-code order, so `y = Ax` changes by `±2·a_{·j}` per step.
pub fn perm_glynn_exact_capped(a: &Matrix, cap: usize) -> Result<Scalar> {
    let n = a.n();
    check_cap("perm_glynn_exact", n, cap)?;
    let cols = columns(a);
    let mut y: Vec<Scalar> = a.rows().map(|r| r.iter().sum()).collect();
    let mut x = vec![true; n]; // true = +1
    let mut sign_positive = true;
    let mut total = y.iter().fold(ONE, |acc, &v| acc * v);
    for k in 1..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        if x[j] {
            y.iter_mut().zip(&cols[j]).for_each(|(v, &c)| *v -= c * 2.0);
        } else {
            y.iter_mut().zip(&cols[j]).for_each(|(v, &c)| *v += c * 2.0);
        }
        x[j] = !x[j];
        sign_positive = !sign_positive;
        let prod = y.iter().fold(ONE, |acc, &v| acc * v);
        if sign_positive {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total / (1u64 << n) as f64)
}

/// Exact permanent for reporting: product of the diagonal for triangular
/// matrices (only the identity permutation survives), Ryser otherwise.
pub fn perm_exact(a: &Matrix, ryser_cap: usize) -> Result<PermValue> {
    if a.is_triangular() {
        // accumulate in log space so large diagonal matrices do not underflow
        let mut ln_abs = 0.0;
        let mut phase = 0.0;
        let mut value = ONE;
        for i in 0..a.n() {
            let d = a.get(i, i);
            if d == ZERO {
                return Ok(PermValue::new(ZERO));
            }
            ln_abs += d.norm().ln();
            phase += d.arg();
            value *= d;
        }
        let phase = Scalar::from_polar(1.0, phase).arg();
        return Ok(PermValue {
            value,
            ln_abs,
            phase,
        });
    }
    perm_ryser_capped(a, ryser_cap).map(PermValue::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::gaussian;
    use crate::linalg::Field;
    use crate::rng::seeded;

    fn rel_close(a: Scalar, b: Scalar, rel: f64) -> bool {
        (a - b).norm() <= rel * a.norm().max(b.norm())
    }

    fn two_by_two() -> Matrix {
        Matrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap()
    }

    #[test]
    fn naive_examples() {
        assert_eq!(perm_naive(&two_by_two()).unwrap(), Scalar::new(10.0, 0.0));
        for n in 1..=10 {
            assert_eq!(perm_naive(&Matrix::identity(n).unwrap()).unwrap(), ONE);
        }
        let ones = Matrix::from_real(3, &[1.0; 9]).unwrap();
        assert_eq!(perm_naive(&ones).unwrap(), Scalar::new(6.0, 0.0));
        let ones4 = Matrix::from_real(4, &[1.0; 16]).unwrap();
        assert_eq!(perm_naive(&ones4).unwrap(), Scalar::new(24.0, 0.0));
    }

    #[test]
    fn ryser_examples() {
        assert_eq!(perm_ryser(&two_by_two()).unwrap(), Scalar::new(10.0, 0.0));
        let d = Matrix::diagonal_real(&[0.9; 20]).unwrap();
        let p = perm_ryser(&d).unwrap();
        assert!(
            rel_close(p, Scalar::new(0.9f64.powi(20), 0.0), 1e-12),
            "{p}"
        );
    }

    #[test]
    fn ryser_matches_naive_on_complex() {
        let a = gaussian(Field::Complex, 8, &mut seeded(8)).unwrap();
        let naive = perm_naive(&a).unwrap();
        let ryser = perm_ryser(&a).unwrap();
        assert!(rel_close(naive, ryser, 1e-10), "{naive} vs {ryser}");
    }

    #[test]
    fn glynn_exact_examples() {
        assert_eq!(
            perm_glynn_exact(&Matrix::identity(2).unwrap()).unwrap(),
            ONE
        );
        assert_eq!(
            perm_glynn_exact(&two_by_two()).unwrap(),
            Scalar::new(10.0, 0.0)
        );
        let a = gaussian(Field::Real, 10, &mut seeded(10)).unwrap();
        let g = perm_glynn_exact(&a).unwrap();
        let r = perm_ryser(&a).unwrap();
        assert!(rel_close(g, r, 1e-9), "{g} vs {r}");
    }

    #[test]
    fn one_by_one() {
        let a = Matrix::new(Field::Complex, 1, vec![Scalar::new(0.3, -0.4)]).unwrap();
        for p in [
            perm_naive(&a).unwrap(),
            perm_ryser(&a).unwrap(),
            perm_glynn_exact(&a).unwrap(),
        ] {
            assert!((p - a.get(0, 0)).norm() < 1e-15);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let a = Matrix::identity(11).unwrap();
        assert!(matches!(
            perm_naive(&a),
            Err(Error::Size { n: 11, cap: 10, .. })
        ));
        assert!(perm_ryser_capped(&a, 10).is_err());
        assert!(perm_glynn_exact_capped(&a, 10).is_err());
        assert!(perm_ryser(&Matrix::identity(31).unwrap()).is_err());
        assert!(perm_glynn_exact(&Matrix::identity(27).unwrap()).is_err());
    }

    #[test]
    fn exact_uses_diagonal_shortcut() {
        let d = Matrix::diagonal_real(&[0.99; 100]).unwrap();
        let p = perm_exact(&d, RYSER_MAX_N).unwrap();
        assert!((p.ln_abs - 100.0 * 0.99f64.ln()).abs() < 1e-12);
        assert_eq!(p.phase, 0.0);

        let neg = Matrix::diagonal_real(&[-0.5, 2.0, 1.0]).unwrap();
        let p = perm_exact(&neg, RYSER_MAX_N).unwrap();
        assert_eq!(p.value, Scalar::new(-1.0, 0.0));
        assert!((p.phase.abs() - std::f64::consts::PI).abs() < 1e-15);

        let sing = Matrix::diagonal_real(&[1.0, 0.0]).unwrap();
        assert_eq!(
            perm_exact(&sing, RYSER_MAX_N).unwrap().ln_abs,
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn log_form() {
        let v = PermValue::new(Scalar::new(10.0, 0.0));
        assert!((v.ln_abs - 10f64.ln()).abs() < 1e-15);
        assert_eq!(v.phase, 0.0);
        assert_eq!(PermValue::new(ZERO).ln_abs, f64::NEG_INFINITY);
    }
}
