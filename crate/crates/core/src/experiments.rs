//! The three standard experiments: a soundness sweep of every bound against
//! exact permanents, empirical concentration tails, and the `δI` tightness
//! table.
//!
//! Each run is a pure function of its config. Matrices are processed in
//! parallel but merged in input order, so reports are byte-identical across
//! runs.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_complex_i, bound_complex_ii, bound_real, bound_report, bound_trivial,
    composite_real_bound, names, real_case_parameters, tail_bound_complex, tail_bounds_real,
    BoundOptions, LogBound,
};
use crate::ensemble::{gen_ensemble, EnsembleKind, EnsembleParams};
use crate::error::{Error, Result};
use crate::glynn::{
    partition_rows, quadratic_form_diag, sample_l1, sample_partition_tails, ConcentrationReport,
};
use crate::linalg::{op_norm_default, row_stats, Field};
use crate::rng::derive_seed;

/// Sample count below which empirical tails are reported but not asserted.
pub const MIN_ASSERT_SAMPLES: usize = 10_000;

/// A matrix ensemble: a kind plus its generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    #[serde(default)]
    pub params: EnsembleParams,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, params: EnsembleParams) -> Self {
        EnsembleSpec { kind, params }
    }

    pub fn field(&self) -> Field {
        self.params.field.unwrap_or(match self.kind {
            EnsembleKind::HaarUnitary => Field::Complex,
            _ => Field::Real,
        })
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}/{}", self.kind, self.field())?;
        if let Some(d) = self.params.delta {
            write!(f, "/delta={d}")?;
        }
        if let Some(w) = self.params.weight {
            write!(f, "/weight={w}")?;
        }
        if self.params.normalize {
            write!(f, "/normalized")?;
        }
        if let Some(s) = self.params.scale {
            write!(f, "/scale={s}")?;
        }
        Ok(())
    }
}

fn default_verify_ensembles() -> Vec<EnsembleSpec> {
    use EnsembleKind::*;
    let mut out = Vec::new();
    for field in [Field::Real, Field::Complex] {
        let p = || EnsembleParams::field(field);
        out.push(EnsembleSpec::new(ExtremalP, p()));
        out.push(EnsembleSpec::new(
            if field == Field::Real {
                HaarOrthogonal
            } else {
                HaarUnitary
            },
            p(),
        ));
        for delta in [0.5, 0.9, 0.99] {
            out.push(EnsembleSpec::new(ScaledIdentity, p().with_delta(delta)));
        }
        out.push(EnsembleSpec::new(Circulant, p()));
        out.push(EnsembleSpec::new(Circulant, p().normalized()));
        for weight in [0.05, 0.3] {
            out.push(EnsembleSpec::new(
                PerturbedPermutation,
                p().with_weight(weight),
            ));
        }
        out.push(EnsembleSpec::new(RowNormalizedRandom, p()));
        out.push(EnsembleSpec::new(
            RowNormalizedRandom,
            p().normalized().with_scale(0.7),
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub matrices: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Matrix `i` is drawn from `ensembles[i % len]`.
    pub ensembles: Vec<EnsembleSpec>,
    /// A violation is `ln|perm| > log bound + tol_per_n · n`.
    pub tol_per_n: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 20_240_601,
            matrices: 1000,
            n_min: 2,
            n_max: 12,
            ensembles: default_verify_ensembles(),
            tol_per_n: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub matrix_id: usize,
    pub ensemble: String,
    pub n: usize,
    pub bound: String,
    pub log_perm: f64,
    pub log_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackStats {
    pub matrices: usize,
    pub zero_permanents: usize,
    /// Slack of the best applicable bound, `log bound - ln|perm|`.
    pub best_min: Option<f64>,
    pub best_median: Option<f64>,
    /// Slack of the norm bound `n ln T`.
    pub norm_min: Option<f64>,
    pub norm_median: Option<f64>,
    /// Median slack of every applicable bound, by bound name.
    pub bound_median: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub matrices_tested: usize,
    pub bounds_checked: usize,
    pub violations: Vec<Violation>,
    /// Keyed by ensemble label.
    pub slack: BTreeMap<String, SlackStats>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

struct VerifyRow {
    ensemble: usize,
    best_slack: Option<f64>,
    norm_slack: Option<f64>,
    zero: bool,
    bound_slacks: Vec<(String, f64)>,
    checked: usize,
    violations: Vec<Violation>,
}

fn min_median(mut xs: Vec<f64>) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    let median = if m % 2 == 1 {
        xs[m / 2]
    } else {
        0.5 * (xs[m / 2 - 1] + xs[m / 2])
    };
    (Some(xs[0]), Some(median))
}

/// The seed and dimension of sweep matrix `index`.
pub fn verify_matrix_params(config: &VerifyConfig, index: usize) -> (u64, usize) {
    let span = (config.n_max - config.n_min + 1) as u64;
    let n = config.n_min + (derive_seed(config.seed, index as u64, 1) % span) as usize;
    (derive_seed(config.seed, index as u64, 0), n)
}

pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.ensembles.is_empty() {
        return Err(Error::param("verify needs at least one ensemble"));
    }
    if config.n_min == 0 || config.n_min > config.n_max || config.n_max > 12 {
        return Err(Error::param(format!(
            "n range [{}, {}] must satisfy 1 <= n_min <= n_max <= 12",
            config.n_min, config.n_max
        )));
    }
    let opts = BoundOptions {
        exact_cap: config.n_max,
        ..Default::default()
    };
    let rows = (0..config.matrices)
        .into_par_iter()
        .map(|id| -> Result<VerifyRow> {
            let ensemble = id % config.ensembles.len();
            let spec = &config.ensembles[ensemble];
            let (seed, n) = verify_matrix_params(config, id);
            let a = gen_ensemble(spec.kind, n, &spec.params, seed)?;
            let report = bound_report(&a, &opts)?;
            let mut row = VerifyRow {
                ensemble,
                best_slack: report.slack,
                norm_slack: None,
                zero: report.perm_is_zero,
                bound_slacks: Vec::new(),
                checked: 0,
                violations: Vec::new(),
            };
            let Some(lp) = report.log_perm_exact else {
                return Ok(row);
            };
            for b in report.bounds.iter().filter(|b| b.applicable) {
                row.checked += 1;
                row.bound_slacks.push((b.name.clone(), b.log_value - lp));
                if b.name == names::NORM {
                    row.norm_slack = Some(b.log_value - lp);
                }
                if lp > b.log_value + config.tol_per_n * n as f64 {
                    row.violations.push(Violation {
                        matrix_id: id,
                        ensemble: spec.to_string(),
                        n,
                        bound: b.name.clone(),
                        log_perm: lp,
                        log_value: b.log_value,
                    });
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut slack = BTreeMap::new();
    for (k, spec) in config.ensembles.iter().enumerate() {
        let mine: Vec<&VerifyRow> = rows.iter().filter(|r| r.ensemble == k).collect();
        let (best_min, best_median) =
            min_median(mine.iter().filter_map(|r| r.best_slack).collect());
        let (norm_min, norm_median) =
            min_median(mine.iter().filter_map(|r| r.norm_slack).collect());
        let mut by_bound: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (name, v) in mine.iter().flat_map(|r| &r.bound_slacks) {
            by_bound.entry(name.clone()).or_default().push(*v);
        }
        let bound_median = by_bound
            .into_iter()
            .filter_map(|(name, xs)| min_median(xs).1.map(|m| (name, m)))
            .collect();
        slack.insert(
            spec.to_string(),
            SlackStats {
                matrices: mine.len(),
                zero_permanents: mine.iter().filter(|r| r.zero).count(),
                best_min,
                best_median,
                norm_min,
                norm_median,
                bound_median,
            },
        );
    }
    Ok(VerifyReport {
        config: config.clone(),
        matrices_tested: rows.len(),
        bounds_checked: rows.iter().map(|r| r.checked).sum(),
        violations: rows.into_iter().flat_map(|r| r.violations).collect(),
        slack,
    })
}

/// One matrix of a concentration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationMatrix {
    pub label: String,
    pub ensemble: EnsembleSpec,
    pub n: usize,
    pub seed: u64,
    /// Thresholds `t` for `P(‖AX‖₁ > E‖AX‖₁ + tn)`.
    #[serde(default)]
    pub thresholds: Vec<f64>,
    /// Partition parameter for real matrices. Without it the real-case
    /// choice `64/√(nt)` is used when that is below 0.1.
    #[serde(default)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationConfig {
    pub seed: u64,
    pub samples: usize,
    /// Allowed excess of an empirical frequency over the bound.
    pub slack: f64,
    /// Slack for the sign-disagreement frequency.
    pub sign_slack: f64,
    pub matrices: Vec<ConcentrationMatrix>,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        use EnsembleKind::*;
        let m = |label: &str, ensemble, n, seed, thresholds: &[f64], lambda| ConcentrationMatrix {
            label: label.to_string(),
            ensemble,
            n,
            seed,
            thresholds: thresholds.to_vec(),
            lambda,
        };
        ConcentrationConfig {
            seed: 7,
            samples: 100_000,
            slack: 0.005,
            sign_slack: 0.002,
            matrices: vec![
                m(
                    "identity_complex",
                    EnsembleSpec::new(
                        ScaledIdentity,
                        EnsembleParams::field(Field::Complex).with_delta(1.0),
                    ),
                    50,
                    1,
                    &[0.05, 0.1, 0.3],
                    None,
                ),
                m(
                    "haar_unitary_200",
                    EnsembleSpec::new(HaarUnitary, EnsembleParams::default().normalized()),
                    200,
                    2,
                    &[0.4, 0.5, 0.6],
                    None,
                ),
                m(
                    "circulant_complex_64",
                    EnsembleSpec::new(
                        Circulant,
                        EnsembleParams::field(Field::Complex).normalized(),
                    ),
                    64,
                    3,
                    &[0.2, 0.4, 0.6],
                    None,
                ),
                m(
                    "identity_real",
                    EnsembleSpec::new(
                        ScaledIdentity,
                        EnsembleParams::field(Field::Real).with_delta(1.0),
                    ),
                    20,
                    4,
                    &[],
                    Some(0.05),
                ),
                m(
                    "near_identity_real",
                    EnsembleSpec::new(
                        PerturbedPermutation,
                        EnsembleParams::field(Field::Real)
                            .with_weight(0.02)
                            .normalized(),
                    ),
                    20,
                    5,
                    &[],
                    Some(0.05),
                ),
                m(
                    "near_identity_real_wide",
                    EnsembleSpec::new(
                        PerturbedPermutation,
                        EnsembleParams::field(Field::Real)
                            .with_weight(0.05)
                            .normalized(),
                    ),
                    40,
                    6,
                    &[],
                    Some(0.08),
                ),
            ],
        }
    }
}

/// One CSV line: an empirical frequency against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub matrix: String,
    pub field: Field,
    pub n: usize,
    /// `l1_tail`, `sign_disagreement`, `lx_deviation` or `inner_product`.
    pub statistic: String,
    /// The threshold `t` for `l1_tail`, `λ` for `sign_disagreement`, `ε`
    /// for the other two.
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
    /// Whether the row counts towards pass/fail: the bound is below 1, its
    /// hypotheses hold and enough samples were drawn.
    pub asserted: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConcentration {
    pub label: String,
    pub op_norm: f64,
    pub h2: f64,
    pub hinf: f64,
    pub l1: ConcentrationReport,
    /// Real matrices: `t = 1 - h∞` and the `λ` used for the partition.
    pub t_param: Option<f64>,
    pub lambda: Option<f64>,
    pub big_rows: Option<usize>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub config: ConcentrationConfig,
    pub matrices: Vec<MatrixConcentration>,
    pub rows: Vec<TailRow>,
}

impl ConcentrationSummary {
    pub fn failures(&self) -> Vec<&TailRow> {
        self.rows.iter().filter(|r| r.asserted && !r.pass).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

#[allow(clippy::too_many_arguments)]
fn tail_row(
    m: &ConcentrationMatrix,
    field: Field,
    statistic: &str,
    t: f64,
    empirical: f64,
    bound: f64,
    hypotheses: bool,
    samples: usize,
    slack: f64,
) -> TailRow {
    TailRow {
        matrix: m.label.clone(),
        field,
        n: m.n,
        statistic: statistic.to_string(),
        t,
        empirical,
        bound,
        asserted: hypotheses && bound < 1.0 && samples >= MIN_ASSERT_SAMPLES,
        pass: empirical <= bound + slack,
    }
}

fn run_one_concentration(
    config: &ConcentrationConfig,
    index: usize,
    m: &ConcentrationMatrix,
) -> Result<(MatrixConcentration, Vec<TailRow>)> {
    let a = gen_ensemble(m.ensemble.kind, m.n, &m.ensemble.params, m.seed)?;
    let field = a.field();
    let norm = op_norm_default(&a)?;
    let stats = row_stats(&a);
    let sample_seed = derive_seed(config.seed, index as u64, 0);
    let l1 = sample_l1(&a, config.samples, sample_seed, &m.thresholds)?;
    let unit_norm = norm <= 1.0 + 1e-8;
    let mut notes = Vec::new();
    if !unit_norm {
        notes.push(format!(
            "operator norm {norm} exceeds 1; tails not asserted"
        ));
    }
    let mut rows = Vec::new();
    if field == Field::Complex {
        for tf in &l1.tail_freqs {
            let bound = tail_bound_complex(m.n, tf.t);
            rows.push(tail_row(
                m,
                field,
                "l1_tail",
                tf.t,
                tf.frequency,
                bound,
                unit_norm,
                config.samples,
                config.slack,
            ));
        }
    } else if !m.thresholds.is_empty() {
        notes.push("no closed-form l1 tail for real matrices; thresholds ignored".into());
    }

    let mut result = MatrixConcentration {
        label: m.label.clone(),
        op_norm: norm,
        h2: stats.h2,
        hinf: stats.hinf,
        l1,
        t_param: None,
        lambda: None,
        big_rows: None,
        notes,
    };
    if field == Field::Real && unit_norm {
        let t = 1.0 - stats.hinf;
        result.t_param = Some(t);
        let nf = m.n as f64;
        let lambda = match m.lambda {
            Some(l) => Some(l),
            None if t > 0.0 => {
                let (_, l) = real_case_parameters(nf, t);
                if l < 0.1 {
                    Some(l)
                } else {
                    result.notes.push(format!(
                        "64/sqrt(nt) = {l:.4} is not below 0.1; no partition"
                    ));
                    None
                }
            }
            None => None,
        };
        if let Some(lambda) = lambda {
            let part = partition_rows(&a, lambda)?;
            result.lambda = Some(lambda);
            result.big_rows = Some(part.b);
            let sign_seed = derive_seed(config.seed, index as u64, 1);
            if t > 0.0 {
                let eps = t / 10.0;
                let tails = sample_partition_tails(&part, eps, config.samples, sign_seed)?;
                let bounds = tail_bounds_real(m.n, t, eps, lambda)?;
                let stats = [
                    (
                        "sign_disagreement",
                        lambda,
                        tails.sign_disagreement,
                        bounds.sign_disagreement,
                        bounds.cond_lambda,
                        config.sign_slack,
                    ),
                    (
                        "lx_deviation",
                        eps,
                        tails.lx_tail,
                        bounds.lx_deviation,
                        bounds.cond_lx_deviation,
                        config.slack,
                    ),
                    (
                        "inner_product",
                        eps,
                        tails.inner_product_tail,
                        bounds.inner_product,
                        bounds.cond_inner_product,
                        config.slack,
                    ),
                ];
                for (name, param, empirical, bound, hyp, slack) in stats {
                    rows.push(tail_row(
                        m,
                        field,
                        name,
                        param,
                        empirical,
                        bound,
                        hyp,
                        config.samples,
                        slack,
                    ));
                }
            } else {
                // every row attains h_inf = 1: only the sign event is defined
                let freq = quadratic_form_diag(&part, config.samples, sign_seed)?;
                let bound = m.n as f64 * (-1.0 / (5.0 * lambda)).exp();
                rows.push(tail_row(
                    m,
                    field,
                    "sign_disagreement",
                    lambda,
                    freq,
                    bound,
                    lambda < 0.1,
                    config.samples,
                    config.sign_slack,
                ));
            }
        }
    }
    Ok((result, rows))
}

pub fn run_concentration(config: &ConcentrationConfig) -> Result<ConcentrationSummary> {
    if config.samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    let mut matrices = Vec::new();
    let mut rows = Vec::new();
    for (k, m) in config.matrices.iter().enumerate() {
        let (mc, r) = run_one_concentration(config, k, m)?;
        matrices.push(mc);
        rows.extend(r);
    }
    Ok(ConcentrationSummary {
        config: config.clone(),
        matrices,
        rows,
    })
}

pub fn tail_rows_csv(rows: &[TailRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .map_err(|e| Error::Consistency(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TightnessConfig {
    pub deltas: Vec<f64>,
    pub ns: Vec<usize>,
}

impl Default for TightnessConfig {
    fn default() -> Self {
        TightnessConfig {
            deltas: vec![0.5, 0.9, 0.99, 1.0],
            ns: vec![10, 100, 1000],
        }
    }
}

/// One line of the `δI` table. Bounds are evaluated at `T = 1`; gaps are
/// `log bound - ln perm` and are recorded, never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub n: usize,
    pub delta: f64,
    pub ln_perm: f64,
    /// `-n(1 - δ)`
    pub first_order: f64,
    /// `-n(1 - δ)(1 + (1 - δ))`
    pub envelope_lower: f64,
    /// Only asserted for `δ ≥ 0.5`.
    pub envelope_holds: bool,
    pub log_norm: f64,
    pub log_complex_i: f64,
    pub log_complex_ii: f64,
    pub log_real: f64,
    /// Absent when the composite hypotheses fail or `δ = 1`.
    pub log_composite: Option<f64>,
    pub gap_norm: f64,
    pub gap_complex_i: f64,
    pub gap_complex_ii: f64,
    pub gap_real: f64,
    pub gap_composite: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub config: TightnessConfig,
    pub rows: Vec<TightnessRow>,
}

impl TightnessReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.delta < 0.5 || r.envelope_holds)
    }
}

pub fn tightness_row(n: usize, delta: f64) -> Result<TightnessRow> {
    if n == 0 || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param(format!(
            "tightness grid needs n >= 1 and delta in (0, 1], got n = {n}, delta = {delta}"
        )));
    }
    let nf = n as f64;
    let ln_perm = nf * delta.ln();
    let first_order = -nf * (1.0 - delta);
    let envelope_lower = first_order * (1.0 + (1.0 - delta));
    let t = 1.0;
    let get = |b: Result<LogBound>| b.map(|b| b.log_value);
    let log_norm = get(bound_trivial(n, t))?;
    let log_complex_i = get(bound_complex_i(n, t, delta, delta))?;
    let log_complex_ii = get(bound_complex_ii(n, t, delta))?;
    let log_real = get(bound_real(n, t, delta, Field::Real))?;
    let log_composite = if delta < 1.0 {
        let c = composite_real_bound(n as u64, 1.0 - delta)?;
        c.valid().then_some(c.log_four_term)
    } else {
        None
    };
    Ok(TightnessRow {
        n,
        delta,
        ln_perm,
        first_order,
        envelope_lower,
        envelope_holds: envelope_lower <= ln_perm && ln_perm <= first_order,
        log_norm,
        log_complex_i,
        log_complex_ii,
        log_real,
        log_composite,
        gap_norm: log_norm - ln_perm,
        gap_complex_i: log_complex_i - ln_perm,
        gap_complex_ii: log_complex_ii - ln_perm,
        gap_real: log_real - ln_perm,
        gap_composite: log_composite.map(|c| c - ln_perm),
    })
}

pub fn run_tightness(config: &TightnessConfig) -> Result<TightnessReport> {
    if config.deltas.is_empty() || config.ns.is_empty() {
        return Err(Error::param("tightness grid is empty"));
    }
    let mut rows = Vec::new();
    for &n in &config.ns {
        for &delta in &config.deltas {
            rows.push(tightness_row(n, delta)?);
        }
    }
    Ok(TightnessReport {
        config: config.clone(),
        rows,
    })
}

pub fn tightness_csv(rows: &[TightnessRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .map_err(|e| Error::Consistency(e.to_string()))
}
