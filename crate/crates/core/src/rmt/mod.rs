//! Finite-matrix Monte Carlo oracle for the exponent pipeline.
//!
//! The ensemble is a product of iid factors `X_k = U_k · D`, where `U_k` is
//! Haar orthogonal and `D` is a fixed diagonal of singular values read off a
//! spectral law. Growth exponents of the product, volume growth of random
//! frames, corners of conjugated projections, and ranks of column blocks are
//! all measured empirically and compared against the analytic predictions of
//! the transform pipeline.
//!
//! Runs are reproducible bit-for-bit: every random draw has a fixed stream
//! address derived from `(seed, purpose, trial, step)`, so results do not
//! depend on scheduling or on the number of worker threads.

mod linalg;
mod rng;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::{exponent_cdf, integrated_exponent, marginal_exponent};
use crate::measure::SpectralMeasure;
use crate::par::try_map_indices;
use rng::{
    draw_uniforms, gaussian_stride, rng_at, uniform_stride, PURPOSE_COMPRESS, PURPOSE_HAAR_PROJ,
    PURPOSE_HAAR_STEP, PURPOSE_RANK, PURPOSE_SAMPLE_D,
};

/// Current on-disk schema for [`EnsembleConfig`] and [`McReport`].
pub const SCHEMA_VERSION: u32 = 1;

/// Spectral law of the squared singular values of one factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SingularLaw {
    /// Squared singular values follow the Marchenko–Pastur law with the
    /// given shape parameter.
    Mp { lambda: f64 },
    /// All squared singular values equal `value`.
    PointMass { value: f64 },
    /// Explicit squared singular values, one per matrix dimension.
    Quantiles { values: Vec<f64> },
}

impl SingularLaw {
    /// The analytic spectral measure backing this law, when one exists.
    pub fn analytic_measure(&self) -> Result<Option<SpectralMeasure>> {
        match self {
            SingularLaw::Mp { lambda } => Ok(Some(SpectralMeasure::mp(*lambda)?)),
            SingularLaw::PointMass { value } => Ok(Some(SpectralMeasure::point_mass(*value)?)),
            SingularLaw::Quantiles { .. } => Ok(None),
        }
    }

    /// Whether the exponent distribution of this law is continuous enough
    /// for the order-statistic Kolmogorov–Smirnov bound to be meaningful.
    fn continuous_reference(&self) -> bool {
        matches!(self, SingularLaw::Mp { .. })
    }
}

/// How the diagonal factor is generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Deterministic quantile discretization: entry `i` of the squared
    /// diagonal is the `(i + 1/2)/n` quantile of the law, and the same
    /// diagonal is reused at every step.
    #[default]
    Quantile,
    /// Fresh iid draws from the law at every step.
    Iid,
}

/// Optional hard thresholds; exceeding one marks the run as failed without
/// discarding the report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct McGates {
    /// Cap on the Kolmogorov–Smirnov distance between the empirical
    /// exponent distribution and the analytic one.
    #[serde(default)]
    pub max_ks: Option<f64>,
    /// Cap on `|rate − analytic|` for every projected growth rate.
    #[serde(default)]
    pub max_growth_error: Option<f64>,
    /// Cap on the Kolmogorov–Smirnov distance of every compression check.
    #[serde(default)]
    pub max_compression_ks: Option<f64>,
}

/// A complete description of one Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    /// Free-form tag echoed into the report.
    #[serde(default)]
    pub label: String,
    /// Matrix dimension.
    pub n: usize,
    /// Number of product factors.
    pub steps: usize,
    /// Independent repetitions averaged in the report.
    pub trials: usize,
    /// Master seed; all stream addresses derive from it.
    pub seed: u64,
    /// Law of the squared singular values of one factor.
    pub singular_law: SingularLaw,
    /// Diagonal generation mode.
    #[serde(default)]
    pub mode: SampleMode,
    /// Fractions `t` at which projected `⌈tn⌉`-frame growth is measured.
    #[serde(default)]
    pub t_list: Vec<f64>,
    /// Fractions `t` at which `⌈tn⌉ × ⌈tn⌉` corners of a conjugated
    /// projection are diagonalized.
    #[serde(default)]
    pub compress_t_list: Vec<f64>,
    /// Pass/fail thresholds, if any.
    #[serde(default)]
    pub gates: Option<McGates>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl EnsembleConfig {
    /// Checks ranges and cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if !(2..=4096).contains(&self.n) {
            return fail(format!("n = {} outside 2..=4096", self.n));
        }
        if self.steps > 200_000 {
            return fail(format!("steps = {} exceeds 200000", self.steps));
        }
        if self.steps == 0 && (self.compress_t_list.is_empty() || !self.t_list.is_empty()) {
            return fail("steps = 0 is only valid for compression-only runs".into());
        }
        if !(1..=4096).contains(&self.trials) {
            return fail(format!("trials = {} outside 1..=4096", self.trials));
        }
        match &self.singular_law {
            SingularLaw::Mp { lambda } => {
                if !lambda.is_finite() || *lambda <= 0.0 || *lambda > 64.0 {
                    return fail(format!("mp lambda = {lambda} outside (0, 64]"));
                }
            }
            SingularLaw::PointMass { value } => {
                if !value.is_finite() || *value <= 0.0 {
                    return fail(format!("point mass value = {value} must be positive"));
                }
            }
            SingularLaw::Quantiles { values } => {
                if values.len() != self.n {
                    return fail(format!(
                        "quantile list has {} entries for n = {}",
                        values.len(),
                        self.n
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return fail("quantile entries must be finite and nonnegative".into());
                }
                if self.mode == SampleMode::Iid {
                    return fail("iid sampling requires a parametric law".into());
                }
            }
        }
        for &t in self.t_list.iter().chain(self.compress_t_list.iter()) {
            if !(t > 0.0 && t <= 1.0) {
                return fail(format!("fraction t = {t} outside (0, 1]"));
            }
        }
        Ok(())
    }

    /// Parses and validates a JSON configuration document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EnsembleConfig =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes the configuration as pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization")
    }

    fn block_size(&self, t: f64) -> usize {
        ((t * self.n as f64).round() as usize).clamp(1, self.n)
    }
}

/// Growth of a random `k`-frame, empirical vs analytic.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthRate {
    /// Requested fraction.
    pub t: f64,
    /// Realized frame size `k = round(t·n)`.
    pub k: usize,
    /// Mean over trials of the per-step, per-dimension log-volume growth.
    pub rate: f64,
    /// Integrated exponent at `k/n`, when the law is analytic.
    pub analytic: Option<f64>,
    /// `|rate − analytic|`.
    pub abs_error: Option<f64>,
}

/// Eigenvalue statistics of one corner-compression check.
#[derive(Clone, Debug, Serialize)]
pub struct CompressionResult {
    /// Requested fraction.
    pub t: f64,
    /// Corner size `k = round(t·n)`.
    pub k: usize,
    /// Pooled eigenvalue count (`k · trials`).
    pub samples: usize,
    /// Kolmogorov–Smirnov distance to the analytic corner law, when known.
    pub ks: Option<f64>,
    /// Smallest pooled eigenvalue.
    pub support_min: f64,
    /// Largest pooled eigenvalue.
    pub support_max: f64,
}

/// Everything a Monte Carlo run produces.
#[derive(Clone, Debug, Serialize)]
pub struct McReport {
    pub schema_version: u32,
    pub label: String,
    pub n: usize,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    /// Trial-averaged growth exponents, one per direction, decreasing.
    pub empirical_exponents: Vec<f64>,
    /// Standard error of each averaged exponent across trials.
    pub exponent_stderr: Vec<f64>,
    /// Analytic exponent at fraction `(i + 1/2)/n` for direction `i`, when
    /// the law is analytic; entries inside the rank boundary layer are NaN.
    pub exponent_analytic: Option<Vec<f64>>,
    /// Kolmogorov–Smirnov distance between the empirical exponent
    /// distribution and the analytic one, when the latter is continuous.
    pub ks_distance: Option<f64>,
    pub growth_rates: Vec<GrowthRate>,
    pub compression: Vec<CompressionResult>,
    /// Human-readable description of every gate that failed.
    pub gate_failures: Vec<String>,
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

/// Squared singular values of the diagonal factor in decreasing order.
///
/// In quantile mode entry `i` is the `(i + 1/2)/n` quantile of the law;
/// decreasing order puts the nonzero directions first, so column blocks of
/// `U·D` have generic rank.
pub fn squared_quantiles(cfg: &EnsembleConfig) -> Result<Vec<f64>> {
    let mut q = match &cfg.singular_law {
        SingularLaw::Mp { .. } | SingularLaw::PointMass { .. } => {
            let mu = cfg
                .singular_law
                .analytic_measure()?
                .expect("parametric law has a measure");
            let n = cfg.n;
            try_map_indices(n, |i| mu.quantile((i as f64 + 0.5) / n as f64))?
        }
        SingularLaw::Quantiles { values } => values.clone(),
    };
    q.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(q)
}

/// Source of the per-step diagonal (square roots of squared singular
/// values).
enum DSource<'a> {
    Fixed(&'a [f64]),
    Sampled {
        measure: &'a SpectralMeasure,
        seed: u64,
        trial: u64,
        n: usize,
    },
}

impl DSource<'_> {
    fn for_step(&self, step: usize) -> Vec<f64> {
        match self {
            DSource::Fixed(d) => d.to_vec(),
            DSource::Sampled {
                measure,
                seed,
                trial,
                n,
            } => {
                let mut rng = rng_at(
                    *seed,
                    PURPOSE_SAMPLE_D,
                    *trial,
                    uniform_stride(*n) * step as u128,
                );
                draw_uniforms(&mut rng, *n)
                    .iter()
                    .map(|&u| {
                        measure
                            .quantile(u)
                            .expect("quantile of an open-interval draw")
                            .sqrt()
                    })
                    .collect()
            }
        }
    }
}

fn one_trial_exponents(
    cfg: &EnsembleConfig,
    d_sqrt: &[f64],
    analytic: Option<&SpectralMeasure>,
    trial: usize,
    order: Option<&[usize]>,
) -> Vec<f64> {
    let n = cfg.n;
    let source = match cfg.mode {
        SampleMode::Quantile => DSource::Fixed(d_sqrt),
        SampleMode::Iid => DSource::Sampled {
            measure: analytic.expect("iid mode requires a parametric law"),
            seed: cfg.seed,
            trial: trial as u64,
            n,
        },
    };
    let stride = gaussian_stride(n * n);
    linalg::spectrum_trial(
        n,
        cfg.steps,
        &mut |step| source.for_step(step),
        &mut |step| rng_at(cfg.seed, PURPOSE_HAAR_STEP, trial as u64, stride * step as u128),
        order,
    )
}

/// Growth exponents of a single trial, decreasing; exposed for determinism
/// and invariance tests.
pub fn trial_exponents(cfg: &EnsembleConfig, trial: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    let d_sqrt: Vec<f64> = squared_quantiles(cfg)?.iter().map(|q| q.sqrt()).collect();
    let mu = cfg.singular_law.analytic_measure()?;
    Ok(one_trial_exponents(cfg, &d_sqrt, mu.as_ref(), trial, None))
}

/// Like [`trial_exponents`] but applying the per-step factors in the given
/// order. Factors are iid, so any permutation of `0..steps` leaves the
/// exponent distribution unchanged; the realized values differ because the
/// QR frames differ.
pub fn trial_exponents_with_order(
    cfg: &EnsembleConfig,
    trial: usize,
    order: &[usize],
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if order.len() != cfg.steps {
        return Err(Error::InvalidConfig(format!(
            "step order has {} entries for {} steps",
            order.len(),
            cfg.steps
        )));
    }
    let d_sqrt: Vec<f64> = squared_quantiles(cfg)?.iter().map(|q| q.sqrt()).collect();
    let mu = cfg.singular_law.analytic_measure()?;
    Ok(one_trial_exponents(cfg, &d_sqrt, mu.as_ref(), trial, Some(order)))
}

/// Pooled corner eigenvalues for one compression trial, ascending; exposed
/// for structural tests.
pub fn compression_eigenvalues(cfg: &EnsembleConfig, t: f64, trial: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidConfig(format!("fraction t = {t} outside (0, 1]")));
    }
    let quantiles = squared_quantiles(cfg)?;
    let k = cfg.block_size(t);
    let mut rng = rng_at(cfg.seed, PURPOSE_COMPRESS, trial as u64, 0);
    Ok(linalg::compression_trial(&mut rng, &quantiles, k))
}

/// Numerical rank of the first `round(t·n)` columns of one sampled factor
/// `U·D`.
pub fn projected_rank(cfg: &EnsembleConfig, t: f64) -> Result<usize> {
    cfg.validate()?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidConfig(format!("fraction t = {t} outside (0, 1]")));
    }
    let d_sqrt: Vec<f64> = squared_quantiles(cfg)?.iter().map(|q| q.sqrt()).collect();
    let k = cfg.block_size(t);
    let mut rng = rng_at(cfg.seed, PURPOSE_RANK, 0, 0);
    Ok(linalg::projected_rank_trial(&mut rng, &d_sqrt, k))
}

/// A Haar-distributed orthogonal matrix at a fixed stream address; exposed
/// so tests can probe the sampler directly.
pub fn haar_orthogonal(seed: u64, n: usize) -> nalgebra::DMatrix<f64> {
    let mut rng = rng_at(seed, PURPOSE_HAAR_PROJ, 0, 0);
    linalg::haar_orthogonal_from(&mut rng, n)
}

/// Kolmogorov–Smirnov distance between a sorted sample and a reference CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let reference: Vec<f64> = sorted.iter().map(|&x| cdf(x)).collect();
    ks_from_reference(&reference)
}

fn ks_from_reference(reference: &[f64]) -> f64 {
    let n = reference.len() as f64;
    reference
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let lo = (f - i as f64 / n).abs();
            let hi = ((i as f64 + 1.0) / n - f).abs();
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Runs the configured Monte Carlo experiment and assembles the report.
///
/// Trials run in parallel when the `parallel` feature is active; output is
/// bit-identical either way.
pub fn run_mc(cfg: &EnsembleConfig) -> Result<McReport> {
    let start = Instant::now();
    cfg.validate()?;
    let n = cfg.n;
    let analytic = cfg.singular_law.analytic_measure()?;
    let squared = squared_quantiles(cfg)?;
    let d_sqrt: Vec<f64> = squared.iter().map(|q| q.sqrt()).collect();

    let mut empirical = Vec::new();
    let mut stderr = Vec::new();
    let mut analytic_exps = None;
    let mut ks = None;
    if cfg.steps > 0 {
        let per_trial: Vec<Vec<f64>> = crate::par::map_indices(cfg.trials, |trial| {
            one_trial_exponents(cfg, &d_sqrt, analytic.as_ref(), trial, None)
        });
        empirical = (0..n)
            .map(|i| per_trial.iter().map(|t| t[i]).sum::<f64>() / cfg.trials as f64)
            .collect();
        stderr = (0..n)
            .map(|i| {
                if cfg.trials < 2 {
                    return 0.0;
                }
                let mean = empirical[i];
                let var = per_trial
                    .iter()
                    .map(|t| (t[i] - mean).powi(2))
                    .sum::<f64>()
                    / (cfg.trials - 1) as f64;
                (var / cfg.trials as f64).sqrt()
            })
            .collect();
        if let Some(mu) = analytic.as_ref() {
            analytic_exps = Some(
                (0..n)
                    .map(|i| {
                        let t = (i as f64 + 0.5) / n as f64;
                        marginal_exponent(mu, t).unwrap_or(f64::NAN)
                    })
                    .collect::<Vec<f64>>(),
            );
            if cfg.singular_law.continuous_reference() {
                let mut ascending = empirical.clone();
                ascending.reverse();
                let reference = try_map_indices(ascending.len(), |i| {
                    exponent_cdf(mu, ascending[i])
                })?;
                ks = Some(ks_from_reference(&reference));
            }
        }
    }

    let mut growth_rates = Vec::new();
    for &t in &cfg.t_list {
        let k = cfg.block_size(t);
        let rates: Vec<f64> = crate::par::map_indices(cfg.trials, |trial| {
            let source = match cfg.mode {
                SampleMode::Quantile => DSource::Fixed(&d_sqrt),
                SampleMode::Iid => DSource::Sampled {
                    measure: analytic.as_ref().expect("iid mode requires a parametric law"),
                    seed: cfg.seed,
                    trial: trial as u64,
                    n,
                },
            };
            let stride = gaussian_stride(n * n);
            let mut frame_rng = rng_at(cfg.seed, PURPOSE_HAAR_PROJ, trial as u64, 0);
            linalg::projected_growth_trial(
                n,
                k,
                cfg.steps,
                &mut |step| source.for_step(step),
                &mut |step| {
                    rng_at(cfg.seed, PURPOSE_HAAR_STEP, trial as u64, stride * step as u128)
                },
                &mut frame_rng,
            )
        });
        let rate = rates.iter().sum::<f64>() / cfg.trials as f64;
        let analytic_rate = match analytic.as_ref() {
            Some(mu) => integrated_exponent(mu, k as f64 / n as f64).ok(),
            None => None,
        };
        growth_rates.push(GrowthRate {
            t,
            k,
            rate,
            analytic: analytic_rate,
            abs_error: analytic_rate.map(|a| (rate - a).abs()),
        });
    }

    let mut compression = Vec::new();
    for &t in &cfg.compress_t_list {
        let k = cfg.block_size(t);
        let per_trial: Vec<Vec<f64>> = crate::par::map_indices(cfg.trials, |trial| {
            let mut rng = rng_at(cfg.seed, PURPOSE_COMPRESS, trial as u64, 0);
            linalg::compression_trial(&mut rng, &squared, k)
        });
        let mut pooled: Vec<f64> = per_trial.into_iter().flatten().collect();
        pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let corner_ks = match &cfg.singular_law {
            SingularLaw::Mp { lambda } => {
                let corner_law = SpectralMeasure::compressed_mp(t, *lambda)?;
                let excess = 1.0 - t;
                let reference: Vec<f64> = crate::par::map_indices(pooled.len(), |i| {
                    ((corner_law.cdf(pooled[i]) - excess) / t).clamp(0.0, 1.0)
                });
                Some(ks_from_reference(&reference))
            }
            _ => None,
        };
        compression.push(CompressionResult {
            t,
            k,
            samples: pooled.len(),
            ks: corner_ks,
            support_min: pooled.first().copied().unwrap_or(f64::NAN),
            support_max: pooled.last().copied().unwrap_or(f64::NAN),
        });
    }

    let mut gate_failures = Vec::new();
    if let Some(gates) = &cfg.gates {
        if let (Some(cap), Some(value)) = (gates.max_ks, ks) {
            if value.is_nan() || value > cap {
                gate_failures.push(format!(
                    "exponent distribution ks {value:.6} exceeds gate {cap:.6}"
                ));
            }
        }
        if let Some(cap) = gates.max_growth_error {
            for g in &growth_rates {
                if let Some(err) = g.abs_error {
                    if err.is_nan() || err > cap {
                        gate_failures.push(format!(
                            "growth error {err:.6} at t = {} exceeds gate {cap:.6}",
                            g.t
                        ));
                    }
                }
            }
        }
        if let Some(cap) = gates.max_compression_ks {
            for c in &compression {
                if let Some(value) = c.ks {
                    if value.is_nan() || value > cap {
                        gate_failures.push(format!(
                            "compression ks {value:.6} at t = {} exceeds gate {cap:.6}",
                            c.t
                        ));
                    }
                }
            }
        }
    }

    Ok(McReport {
        schema_version: SCHEMA_VERSION,
        label: cfg.label.clone(),
        n,
        steps: cfg.steps,
        trials: cfg.trials,
        seed: cfg.seed,
        empirical_exponents: empirical,
        exponent_stderr: stderr,
        exponent_analytic: analytic_exps,
        ks_distance: ks,
        growth_rates,
        compression,
        gate_failures,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}
