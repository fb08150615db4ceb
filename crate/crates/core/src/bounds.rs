//! Upper bounds on `|perm(A)|` and the tail formulas they are assembled from.
//!
//! Every bound is carried as a natural logarithm: `Tⁿ` leaves the range of
//! `f64` as soon as `n·ln T` passes about 709.

use std::collections::BTreeMap;
use std::f64::consts::{E, FRAC_1_SQRT_2, FRAC_2_SQRT_PI, LN_2, PI};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    op_norm, row_stats, Field, Matrix, RowStats, Scalar, OP_NORM_MAX_ITER, OP_NORM_TOL,
};
use crate::permanent::perm_exact;

/// `Λ_ℝ = √(2/π)`.
pub const LAMBDA_REAL: f64 = FRAC_2_SQRT_PI * FRAC_1_SQRT_2;
/// `Λ_ℂ = √π / 2`.
pub const LAMBDA_COMPLEX: f64 = 1.0 / FRAC_2_SQRT_PI;
pub const PI_CUBED: f64 = PI * PI * PI;

/// Relative slack allowed when a caller-supplied `T` or a row parameter sits
/// just above the computed operator norm.
pub const NORM_SLACK: f64 = 1e-8;

/// Out-of-range excursions of the clamped exponent base larger than this are
/// counted by [`clamp_excursions`].
pub const CLAMP_EPS: f64 = 1e-12;

static LARGE_CLAMPS: AtomicUsize = AtomicUsize::new(0);

/// Number of times [`bound_complex_i`] clamped its exponent base by more
/// than [`CLAMP_EPS`] since process start.
pub fn clamp_excursions() -> usize {
    LARGE_CLAMPS.load(Ordering::Relaxed)
}

pub mod names {
    pub const NORM: &str = "norm";
    pub const MAIN_COMPLEX_I: &str = "main_complex_i";
    pub const MAIN_COMPLEX_II: &str = "main_complex_ii";
    pub const MAIN_REAL: &str = "main_real";
    pub const MOMENT: &str = "moment";
    pub const COMPOSITE_REAL: &str = "composite_real";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub satisfied: bool,
}

/// A named upper bound on `|perm|`, stored as its natural log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogBound {
    pub name: String,
    pub log_value: f64,
    pub applicable: bool,
    pub conditions: Vec<Condition>,
    pub params: BTreeMap<String, f64>,
}

impl LogBound {
    fn new(name: &str, log_value: f64) -> Self {
        LogBound {
            name: name.to_string(),
            log_value,
            applicable: true,
            conditions: Vec::new(),
            params: BTreeMap::new(),
        }
    }

    fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Record a condition; an unsatisfied one makes the bound inapplicable.
    fn condition(mut self, name: &str, satisfied: bool) -> Self {
        self.conditions.push(Condition {
            name: name.to_string(),
            satisfied,
        });
        self.applicable &= satisfied;
        self
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "T must be positive and finite, got {t}"
        )))
    }
}

fn check_hinf(t: f64, hinf: f64) -> Result<()> {
    if !(hinf >= 0.0) || hinf > t * (1.0 + NORM_SLACK) {
        return Err(Error::param(format!(
            "h_inf = {hinf} outside [0, T] for T = {t}"
        )));
    }
    Ok(())
}

pub fn lambda_k(field: Field) -> f64 {
    match field {
        Field::Real => LAMBDA_REAL,
        Field::Complex => LAMBDA_COMPLEX,
    }
}

/// `|perm A| ≤ Tⁿ`.
pub fn bound_trivial(n: usize, t: f64) -> Result<LogBound> {
    check_t(t)?;
    Ok(LogBound::new(names::NORM, n as f64 * t.ln())
        .param("n", n as f64)
        .param("T", t))
}

/// `2Tⁿ exp[-3n s²/100]` with `s = 1 - Λ_ℂ h₂/T - (1 - Λ_ℂ) h∞/T`.
pub fn bound_complex_i(n: usize, t: f64, h2: f64, hinf: f64) -> Result<LogBound> {
    check_t(t)?;
    check_hinf(t, hinf)?;
    if h2 < hinf * (1.0 - 1e-12) || h2 > t * (1.0 + NORM_SLACK) {
        return Err(Error::param(format!(
            "need h_inf <= h2 <= T, got h_inf = {hinf}, h2 = {h2}, T = {t}"
        )));
    }
    let s_raw = 1.0 - LAMBDA_COMPLEX * h2 / t - (1.0 - LAMBDA_COMPLEX) * hinf / t;
    let s = s_raw.clamp(0.0, 1.0);
    if (s - s_raw).abs() > CLAMP_EPS {
        LARGE_CLAMPS.fetch_add(1, Ordering::Relaxed);
    }
    let nf = n as f64;
    Ok(LogBound::new(
        names::MAIN_COMPLEX_I,
        LN_2 + nf * t.ln() - 3.0 * nf * s * s / 100.0,
    )
    .param("n", nf)
    .param("T", t)
    .param("h2", h2)
    .param("hinf", hinf)
    .param("s", s)
    .param("s_unclamped", s_raw))
}

/// `2Tⁿ exp[-n(1 - h∞/T)²/10⁵]`.
pub fn bound_complex_ii(n: usize, t: f64, hinf: f64) -> Result<LogBound> {
    check_t(t)?;
    check_hinf(t, hinf)?;
    let nf = n as f64;
    let gap = 1.0 - hinf / t;
    Ok(LogBound::new(
        names::MAIN_COMPLEX_II,
        LN_2 + nf * t.ln() - nf * gap * gap / 1e5,
    )
    .param("n", nf)
    .param("T", t)
    .param("hinf", hinf))
}

/// `Tⁿ (n+6) exp[-√(n(1 - h∞/T))/400]`; real matrices only.
pub fn bound_real(n: usize, t: f64, hinf: f64, field: Field) -> Result<LogBound> {
    check_t(t)?;
    check_hinf(t, hinf)?;
    let nf = n as f64;
    let gap = (1.0 - hinf / t).max(0.0);
    Ok(LogBound::new(
        names::MAIN_REAL,
        nf * t.ln() + (nf + 6.0).ln() - (nf * gap).sqrt() / 400.0,
    )
    .param("n", nf)
    .param("T", t)
    .param("hinf", hinf)
    .param("t", gap)
    .condition("real_field", field == Field::Real))
}

/// Upper bound on `E[‖AX‖₁/n]`: `Λ_K h₂ + (1 - Λ_K) h∞`.
pub fn mean_upper(stats: &RowStats, field: Field) -> f64 {
    let lambda = lambda_k(field);
    lambda * stats.h2 + (1.0 - lambda) * stats.hinf
}

/// `E[(‖AX‖₁/n)ⁿ] ≤ 2 exp[-3n(1-μ)²/100]` for `‖A‖₂ ≤ 1`.
pub fn moment_bound(n: usize, mu: f64) -> Result<LogBound> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::param(format!("mu = {mu} outside [0, 1]")));
    }
    let nf = n as f64;
    Ok(
        LogBound::new(names::MOMENT, LN_2 - 3.0 * nf * (1.0 - mu).powi(2) / 100.0)
            .param("n", nf)
            .param("mu", mu),
    )
}

/// `P(‖AX‖₁ > E‖AX‖₁ + tn) ≤ exp(-n t²/π³)` for complex `X` and `‖A‖₂ ≤ 1`.
pub fn tail_bound_complex(n: usize, t: f64) -> f64 {
    (-(n as f64) * t * t / PI_CUBED).exp()
}

/// The three tail terms of the real-case argument together with the
/// hypotheses under which each holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealTailBounds {
    /// `4 exp[-ε²nλ/(32t)]`, valid under `cond_lx_deviation`.
    pub lx_deviation: f64,
    /// `n e^{-1/(5λ)}`, valid under `cond_lambda`.
    pub sign_disagreement: f64,
    /// `exp(-εn / (2e√(nt)))`, valid under `cond_inner_product`.
    pub inner_product: f64,
    /// `εn ≥ 16 √(nt ln n / λ)`
    pub cond_lx_deviation: bool,
    /// `λ < 0.1`
    pub cond_lambda: bool,
    /// `εn ≥ 4e √(nt)`
    pub cond_inner_product: bool,
}

pub fn tail_bounds_real(n: usize, t: f64, epsilon: f64, lambda: f64) -> Result<RealTailBounds> {
    if n == 0 || !(t > 0.0) || !(epsilon > 0.0) || !(lambda > 0.0) {
        return Err(Error::param(format!(
            "tail_bounds_real needs n >= 1 and positive t, epsilon, lambda \
             (n = {n}, t = {t}, epsilon = {epsilon}, lambda = {lambda})"
        )));
    }
    let nf = n as f64;
    let sqrt_nt = (nf * t).sqrt();
    Ok(RealTailBounds {
        lx_deviation: 4.0 * (-epsilon * epsilon * nf * lambda / (32.0 * t)).exp(),
        sign_disagreement: nf * (-1.0 / (5.0 * lambda)).exp(),
        inner_product: (-epsilon * nf / (2.0 * E * sqrt_nt)).exp(),
        cond_lx_deviation: epsilon * nf >= 16.0 * (nf * t * nf.ln() / lambda).sqrt(),
        cond_lambda: lambda < 0.1,
        cond_inner_product: epsilon * nf >= 4.0 * E * sqrt_nt,
    })
}

/// `(μ̃_L + μ̃_B)/n` as a function of `t = 1 - h∞`: `1 - (1 - √(2/π)) t`.
pub fn template_mean(t: f64) -> f64 {
    1.0 - (1.0 - LAMBDA_REAL) * t
}

/// Parameter choices of the real-case argument.
pub fn real_case_parameters(n: f64, t: f64) -> (f64, f64) {
    (t / 10.0, 64.0 / (n * t).sqrt())
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// The four-term chain closing the real-case argument, evaluated at
/// `ε = t/10`, `λ = 64/√(nt)`, next to the closed form it is bounded by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeRealBound {
    pub n: u64,
    pub t: f64,
    pub epsilon: f64,
    pub lambda: f64,
    /// Natural logs of `exp[-nt(1-√(2/π)-0.2)]`, `4exp[-√(nt)/50]`,
    /// `n exp[-√(nt)/320]`, `exp[-√(nt)/(20e)]`.
    pub ln_terms: [f64; 4],
    pub log_four_term: f64,
    /// `ln(n+6) - √(nt)/400`
    pub log_theorem: f64,
    /// `√(nt) > 640` (λ < 0.1)
    pub cond_lambda: bool,
    /// `√(nt) ≥ 400 ln n`
    pub cond_lx_deviation: bool,
    /// `√(nt) ≥ 40e`
    pub cond_inner_product: bool,
    pub dominated: bool,
}

impl CompositeRealBound {
    pub fn valid(&self) -> bool {
        self.cond_lambda && self.cond_lx_deviation && self.cond_inner_product
    }

    /// The four-term value as a bound on `|perm A|` for `‖A‖₂ ≤ 1`.
    pub fn to_log_bound(&self) -> LogBound {
        LogBound::new(names::COMPOSITE_REAL, self.log_four_term)
            .param("n", self.n as f64)
            .param("t", self.t)
            .param("epsilon", self.epsilon)
            .param("lambda", self.lambda)
            .param("log_theorem", self.log_theorem)
            .condition("lambda_below_0.1", self.cond_lambda)
            .condition("lx_deviation_hypothesis", self.cond_lx_deviation)
            .condition("inner_product_hypothesis", self.cond_inner_product)
    }
}

pub fn composite_real_bound(n: u64, t: f64) -> Result<CompositeRealBound> {
    if n == 0 || !(t > 0.0 && t <= 1.0) {
        return Err(Error::param(format!(
            "composite_real_bound needs n >= 1 and t in (0, 1], got n = {n}, t = {t}"
        )));
    }
    let nf = n as f64;
    let (epsilon, lambda) = real_case_parameters(nf, t);
    let sqrt_nt = (nf * t).sqrt();
    let ln_terms = [
        -nf * t * (1.0 - LAMBDA_REAL - 0.2),
        4f64.ln() - sqrt_nt / 50.0,
        nf.ln() - sqrt_nt / 320.0,
        -sqrt_nt / (20.0 * E),
    ];
    let log_four_term = log_sum_exp(&ln_terms);
    let log_theorem = (nf + 6.0).ln() - sqrt_nt / 400.0;
    Ok(CompositeRealBound {
        n,
        t,
        epsilon,
        lambda,
        ln_terms,
        log_four_term,
        log_theorem,
        cond_lambda: sqrt_nt > 640.0,
        cond_lx_deviation: sqrt_nt >= 400.0 * nf.ln(),
        cond_inner_product: sqrt_nt >= 40.0 * E,
        dominated: log_four_term <= log_theorem,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    /// Use this `T` instead of the computed operator norm; must not be below it.
    pub t_override: Option<f64>,
    /// Largest `n` for which an exact permanent is computed (triangular
    /// matrices are always handled exactly).
    pub exact_cap: usize,
    pub op_norm_tol: f64,
    pub op_norm_max_iter: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            t_override: None,
            exact_cap: 20,
            op_norm_tol: OP_NORM_TOL,
            op_norm_max_iter: OP_NORM_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub field: Field,
    pub op_norm: f64,
    /// The `T` the bounds were evaluated at.
    pub t: f64,
    pub h2: f64,
    pub hinf: f64,
    pub bounds: Vec<LogBound>,
    pub best: Option<String>,
    pub perm_exact: Option<Scalar>,
    pub perm_is_zero: bool,
    pub log_perm_exact: Option<f64>,
    pub slack: Option<f64>,
}

impl BoundReport {
    pub fn bound(&self, name: &str) -> Option<&LogBound> {
        self.bounds.iter().find(|b| b.name == name)
    }

    pub fn best_bound(&self) -> Option<&LogBound> {
        self.best.as_deref().and_then(|name| self.bound(name))
    }
}

/// Every theorem bound for `A`, the best applicable one, and (when feasible)
/// the exact `ln|perm A|` with the slack of the best bound.
pub fn bound_report(a: &Matrix, opts: &BoundOptions) -> Result<BoundReport> {
    let n = a.n();
    let field = a.field();
    let spectral = op_norm(a, opts.op_norm_tol, opts.op_norm_max_iter)?;
    let norm = spectral.op_norm;
    let stats = row_stats(a);
    let zero = norm == 0.0;

    let t = match opts.t_override {
        Some(t) => {
            check_t(t)?;
            if t < norm * (1.0 - NORM_SLACK) {
                return Err(Error::param(format!(
                    "T = {t} is below the operator norm {norm}"
                )));
            }
            t
        }
        None if zero => 1.0,
        None => norm,
    };
    let (h2, hinf) = (stats.h2, stats.hinf);

    let mut bounds = vec![
        bound_trivial(n, t)?,
        bound_complex_i(n, t, h2, hinf)?,
        bound_complex_ii(n, t, hinf)?,
        bound_real(n, t, hinf, field)?,
    ];
    let gap = 1.0 - hinf / t;
    if gap > 0.0 {
        let composite = composite_real_bound(n as u64, gap.min(1.0))?;
        let mut b = composite.to_log_bound();
        b.log_value += n as f64 * t.ln();
        b.params.insert("T".into(), t);
        bounds.push(b.condition("real_field", field == Field::Real));
    }
    if zero {
        for b in &mut bounds {
            b.conditions.push(Condition {
                name: "nonzero_matrix".into(),
                satisfied: false,
            });
            b.applicable = false;
        }
    }

    let best = bounds
        .iter()
        .filter(|b| b.applicable)
        .min_by(|x, y| x.log_value.total_cmp(&y.log_value))
        .map(|b| b.name.clone());

    let exact = if zero {
        Some(crate::permanent::PermValue::new(crate::linalg::ZERO))
    } else if n <= opts.exact_cap || a.is_triangular() {
        Some(perm_exact(a, opts.exact_cap.max(1))?)
    } else {
        None
    };
    let perm_is_zero = exact.is_some_and(|p| p.ln_abs == f64::NEG_INFINITY);
    let log_perm_exact = exact.and_then(|p| p.ln_abs.is_finite().then_some(p.ln_abs));
    let slack = match (&best, log_perm_exact) {
        (Some(name), Some(lp)) => bounds
            .iter()
            .find(|b| &b.name == name)
            .map(|b| b.log_value - lp),
        _ => None,
    };

    Ok(BoundReport {
        n,
        field,
        op_norm: norm,
        t,
        h2,
        hinf,
        bounds,
        best,
        perm_exact: exact.map(|p| p.value),
        perm_is_zero,
        log_perm_exact,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_closed_forms() {
        assert!((LAMBDA_REAL - (2.0 / PI).sqrt()).abs() < 1e-16);
        assert!((LAMBDA_COMPLEX - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((LAMBDA_REAL - 0.7978845608).abs() < 1e-10);
        assert!((LAMBDA_COMPLEX - 0.8862269255).abs() < 1e-10);
        assert!((PI_CUBED - 31.00627668).abs() < 1e-8);
    }

    #[test]
    fn trivial_examples() {
        assert_eq!(bound_trivial(5, 1.0).unwrap().log_value, 0.0);
        assert!((bound_trivial(10, 2.0).unwrap().log_value - 6.931471805599453).abs() < 1e-12);
        assert!((bound_trivial(3, 0.5).unwrap().log_value + 2.0794415416798357).abs() < 1e-12);
        assert!(bound_trivial(3, 0.0).is_err());
        assert!(bound_trivial(3, -1.0).is_err());
    }

    #[test]
    fn complex_i_examples() {
        let b = bound_complex_i(7, 0.8, 0.8, 0.8).unwrap();
        assert!((b.log_value - (LN_2 + 7.0 * 0.8f64.ln())).abs() < 1e-14);

        let b = bound_complex_i(100, 1.0, 0.0, 0.0).unwrap();
        assert!((b.log_value - (LN_2 - 3.0)).abs() < 1e-14);
        assert!((b.log_value + 2.306852819440055).abs() < 1e-12);

        let b = bound_complex_i(100, 1.0, 1.0, 0.8).unwrap();
        let s = b.params["s"];
        assert!((s - 0.022754615).abs() < 1e-8, "{s}");
        assert!((b.log_value - 0.6916).abs() < 1e-4);
        assert!((b.log_value - (LN_2 - 3.0 * s * s)).abs() < 1e-14);

        assert!(bound_complex_i(5, 1.0, 0.5, 0.6).is_err());
        assert!(bound_complex_i(5, 1.0, 1.1, 0.6).is_err());
        assert!(bound_complex_i(5, 1.0, 0.5, -0.1).is_err());
    }

    #[test]
    fn complex_ii_examples() {
        let b = bound_complex_ii(9, 1.5, 1.5).unwrap();
        assert!((b.log_value - (LN_2 + 9.0 * 1.5f64.ln())).abs() < 1e-14);
        let b = bound_complex_ii(100, 1.0, 0.5).unwrap();
        assert!((b.log_value - (LN_2 - 2.5e-4)).abs() < 1e-15);
        assert!((b.log_value - 0.69290).abs() < 1e-5);
        let b = bound_complex_ii(10_000_000, 1.0, 0.5).unwrap();
        assert!((b.log_value - (LN_2 - 25.0)).abs() < 1e-9);
        assert!((b.log_value + 24.307).abs() < 1e-3);
        assert!(bound_complex_ii(5, 1.0, 1.5).is_err());
    }

    #[test]
    fn real_examples() {
        let b = bound_real(12, 2.0, 2.0, Field::Real).unwrap();
        assert!((b.log_value - (12.0 * 2f64.ln() + 18f64.ln())).abs() < 1e-13);
        assert!(b.applicable);

        let b = bound_real(400, 1.0, 0.0, Field::Real).unwrap();
        assert!((b.log_value - (406f64.ln() - 0.05)).abs() < 1e-13);
        assert!((b.log_value - 5.9564).abs() < 1e-4);

        let b = bound_real(100_000_000, 1.0, 0.75, Field::Real).unwrap();
        assert!((b.log_value - 5.9207).abs() < 1e-4);

        assert!(!bound_real(4, 1.0, 0.5, Field::Complex).unwrap().applicable);
    }

    #[test]
    fn mean_upper_examples() {
        let stats = |h2, hinf| RowStats {
            row_l2: vec![],
            row_linf: vec![],
            h2,
            hinf,
        };
        assert_eq!(mean_upper(&stats(1.0, 1.0), Field::Real), 1.0);
        assert!((mean_upper(&stats(1.0, 1.0), Field::Complex) - 1.0).abs() < 1e-16);
        assert!((mean_upper(&stats(1.0, 0.0), Field::Real) - 0.79788456).abs() < 1e-8);
        let v = mean_upper(&stats(0.5, 0.25), Field::Complex);
        assert!((v - 0.47155673).abs() < 1e-8, "{v}");
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moment_bound(10, 1.0).unwrap().log_value, LN_2);
        assert!((moment_bound(100, 0.0).unwrap().log_value - (LN_2 - 3.0)).abs() < 1e-14);
        let b = moment_bound(50, 0.9).unwrap();
        assert!((b.log_value - (LN_2 - 0.015)).abs() < 1e-14);
        assert!((b.log_value - 0.67815).abs() < 1e-5);
        assert!(moment_bound(5, 1.01).is_err());
        assert!(moment_bound(5, -0.01).is_err());
    }

    #[test]
    fn complex_tail_examples() {
        assert_eq!(tail_bound_complex(17, 0.0), 1.0);
        assert!((tail_bound_complex(200, 0.5) - 0.19937).abs() < 1e-5);
        let v = tail_bound_complex(10_000, 0.2);
        assert!((v.ln() + 12.900613).abs() < 1e-5);
        assert!((v - 2.49e-6).abs() < 1e-8);
    }

    #[test]
    fn real_tail_examples() {
        let r = tail_bounds_real(100, 0.5, 0.05, 0.01).unwrap();
        assert!((r.sign_disagreement - 100.0 * (-20f64).exp()).abs() < 1e-20);
        assert!((r.sign_disagreement - 2.06e-7).abs() < 1e-9);

        let (eps, lambda) = real_case_parameters(1e6, 0.25);
        assert!((lambda - 0.128).abs() < 1e-15);
        let r = tail_bounds_real(1_000_000, 0.25, eps, lambda).unwrap();
        assert!(!r.cond_lambda);

        let r = tail_bounds_real(100_000_000, 1.0, 0.1, 0.0064).unwrap();
        let expected = -1e7 / (2.0 * E * 1e4);
        assert!((r.inner_product.ln() - expected).abs() < 1e-9);
        assert!((expected + 183.94).abs() < 1e-2);
        assert!(r.cond_inner_product && r.cond_lambda);

        assert!(tail_bounds_real(10, 0.0, 0.1, 0.05).is_err());
        assert!(tail_bounds_real(10, 0.1, -0.1, 0.05).is_err());
        assert!(tail_bounds_real(10, 0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn composite_examples() {
        // √(nt) = 10⁶ with n = 10¹², t = 1
        let c = composite_real_bound(1_000_000_000_000, 1.0).unwrap();
        assert!(c.valid() && c.dominated);
        let n_term = (1e12f64).ln() - 1e6 / 320.0;
        assert!((c.log_four_term - n_term).abs() < 1e-9);

        let c = composite_real_bound(10_000, 1.0).unwrap();
        assert!(!c.cond_lambda && !c.valid());
        assert!(c.log_four_term.is_finite() && c.log_theorem.is_finite());
        assert!(!c.to_log_bound().applicable);

        assert!(composite_real_bound(10, 0.0).is_err());
        assert!(composite_real_bound(10, 1.5).is_err());
        assert!(composite_real_bound(0, 0.5).is_err());
    }

    #[test]
    fn template_mean_at_endpoints() {
        assert_eq!(template_mean(0.0), 1.0);
        assert!((template_mean(1.0) - LAMBDA_REAL).abs() < 1e-16);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert!((log_sum_exp(&[0.0, 0.0]) - LN_2).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[-5000.0, -3.0]), -3.0);
    }
}
