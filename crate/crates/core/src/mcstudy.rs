//! Monte Carlo studies of the estimators.
//!
//! Replication `r` of a study draws its path from stream `offset + r` of the
//! master seed, and results are reduced in replication order, so a study is
//! a pure function of its configuration whatever the number of workers.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{
    estimate_hurst, quadratic_functional, theta_known_h, theta_unknown_h, Filter,
};
use crate::model::{psi, sigma2, sigma_theta2, ModelParams};
use crate::numerics::{ks_statistic_std_normal, QuadratureSpec, RngStream};
use crate::simulate::{
    format_f64, IntegratedSampler, ObservedPath, SamplingScheme, StationarySampler, DEFAULT_REFINE,
};

/// Largest tolerated fraction of failed replications.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;
/// Stream-id spacing between rows of a convergence table.
pub const ROW_STREAM_STRIDE: u64 = 1 << 32;
/// Grid spacing of the paths used by [`variance_calibration`].
pub const CALIBRATION_MESH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    ThetaKnownH,
    ThetaUnknownH,
    HurstOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    Stationary,
    Integrated,
}

fn default_refine() -> usize {
    DEFAULT_REFINE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub params: ModelParams,
    pub scheme: SamplingScheme,
    pub estimator: EstimatorKind,
    pub replications: usize,
    /// Filter for Ĥ; defaults to (1, −2, 1) for the estimators that need it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<Filter>,
    #[serde(default)]
    pub sampler: SamplerKind,
    #[serde(default = "default_refine")]
    pub refine: usize,
    pub master_seed: u64,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Config(format!(
                "a study needs at least 2 replications, got {}",
                self.replications
            )));
        }
        if self.refine == 0 {
            return Err(Error::Config("refine must be at least 1".into()));
        }
        match (self.estimator, &self.filter) {
            (EstimatorKind::ThetaKnownH, Some(_)) => Err(Error::Config(
                "estimator theta_known_h does not use a filter".into(),
            )),
            (_, Some(f)) if f.order() < 2 => Err(Error::Config(format!(
                "the Hurst estimator needs a filter of order at least 2, got {}",
                f.order()
            ))),
            _ => Ok(()),
        }
    }

    fn filter_or_default(&self) -> Filter {
        self.filter.clone().unwrap_or_default()
    }

    fn true_value(&self) -> f64 {
        match self.estimator {
            EstimatorKind::HurstOnly => self.params.hurst(),
            _ => self.params.theta(),
        }
    }
}

/// Outcome of one replication. `estimate` is `None` when it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: u64,
    pub estimate: Option<f64>,
    pub normalized_error: Option<f64>,
    pub flags: Vec<String>,
}

/// Aggregates over the successful replications. `runtime_seconds` is not
/// serialized so that summaries are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    /// Successful replications (the length of `normalized_errors`).
    pub replications: usize,
    pub failed_replications: usize,
    pub estimate_mean: f64,
    pub estimate_sd: f64,
    pub bias: f64,
    pub normalized_errors: Vec<f64>,
    pub ks_statistic: f64,
    pub ks_p: f64,
    /// √(σ_θ²/T_N) at the true parameters, for θ estimators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory_sd: Option<f64>,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub summary: McSummary,
    pub records: Vec<ReplicationRecord>,
}

impl StudyResult {
    /// Writes the `rep,estimate,normalized_error,flags` table; failed
    /// replications have empty numeric fields, flags are `;`-separated.
    pub fn write_records_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["rep", "estimate", "normalized_error", "flags"])
            .map_err(err)?;
        for r in &self.records {
            let opt = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
            w.write_record([
                r.rep.to_string(),
                opt(r.estimate),
                opt(r.normalized_error),
                r.flags.join(";"),
            ])
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }
}

enum Sampler {
    Stationary(StationarySampler),
    Integrated(IntegratedSampler),
}

impl Sampler {
    fn new(config: &StudyConfig, scheme: SamplingScheme) -> Result<Self> {
        Ok(match config.sampler {
            SamplerKind::Stationary => {
                Sampler::Stationary(StationarySampler::new(config.params, scheme)?)
            }
            SamplerKind::Integrated => Sampler::Integrated(IntegratedSampler::new(
                config.params,
                scheme,
                config.refine,
            )?),
        })
    }

    fn sample(&self, stream: RngStream) -> ObservedPath {
        match self {
            Sampler::Stationary(s) => s.sample(stream),
            Sampler::Integrated(s) => s.sample(stream),
        }
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    run_study_with(config, None)
}

/// [`run_study`] on `workers` threads (`None`: the global pool).
pub fn run_study_with(config: &StudyConfig, workers: Option<usize>) -> Result<StudyResult> {
    run_study_at(config, config.scheme, 0, workers)
}

fn run_study_at(
    config: &StudyConfig,
    scheme: SamplingScheme,
    stream_offset: u64,
    workers: Option<usize>,
) -> Result<StudyResult> {
    config.validate()?;
    let start = Instant::now();
    let sampler = Sampler::new(config, scheme)?;
    let filter = config.filter_or_default();
    let horizon = scheme.horizon();
    let theory = match config.estimator {
        EstimatorKind::HurstOnly => None,
        _ => Some(sigma_theta2(config.params, &QuadratureSpec::default())?.sigma_theta2),
    };
    let stream = RngStream::new(config.master_seed, stream_offset);
    let hurst = config.params.hurst();

    let run_one = |r: u64| -> ReplicationRecord {
        let path = sampler.sample(stream.offset(r));
        let mut flags = Vec::new();
        let estimate = match config.estimator {
            EstimatorKind::ThetaKnownH => theta_known_h(&path, hurst),
            EstimatorKind::ThetaUnknownH => theta_unknown_h(&path, &filter).map(|(t, h)| {
                if h.clamped().1 {
                    flags.push("hurst_clamped".to_string());
                }
                t
            }),
            EstimatorKind::HurstOnly => estimate_hurst(&path, &filter).map(|h| {
                if !h.in_range {
                    flags.push("hurst_out_of_range".to_string());
                }
                h.value
            }),
        };
        let estimate = match estimate {
            Ok(x) => Some(x),
            Err(e) => {
                flags.push(format!("failed: {e}"));
                None
            }
        };
        ReplicationRecord {
            rep: r,
            estimate,
            normalized_error: None,
            flags,
        }
    };
    let m = config.replications as u64;
    let mut records: Vec<ReplicationRecord> =
        in_pool(workers, || (0..m).into_par_iter().map(run_one).collect())?;

    let failed = records.iter().filter(|r| r.estimate.is_none()).count();
    if failed as f64 > MAX_FAILURE_FRACTION * config.replications as f64 {
        let first = records
            .iter()
            .find(|r| r.estimate.is_none())
            .map(|r| r.flags.join("; "))
            .unwrap_or_default();
        return Err(Error::Study(format!(
            "{failed} of {} replications failed (first: {first})",
            config.replications
        )));
    }
    let estimates: Vec<f64> = records.iter().filter_map(|r| r.estimate).collect();
    if estimates.len() < 2 {
        return Err(Error::Study(
            "fewer than two successful replications".into(),
        ));
    }
    let (mean, sd) = mean_sd(&estimates);
    let truth = config.true_value();
    let scale = match theory {
        Some(s2) => horizon.sqrt() / s2.sqrt(),
        None => 1.0 / sd,
    };
    for r in &mut records {
        r.normalized_error = r.estimate.map(|e| scale * (e - truth));
    }
    let normalized_errors: Vec<f64> = records.iter().filter_map(|r| r.normalized_error).collect();
    let ks = ks_statistic_std_normal(&normalized_errors)?;
    Ok(StudyResult {
        summary: McSummary {
            replications: estimates.len(),
            failed_replications: failed,
            estimate_mean: mean,
            estimate_sd: sd,
            bias: mean - truth,
            normalized_errors,
            ks_statistic: ks.statistic,
            ks_p: ks.p_value,
            theory_sd: theory.map(|s2| (s2 / horizon).sqrt()),
            runtime_seconds: start.elapsed().as_secs_f64(),
        },
        records,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub mesh: f64,
    pub horizon: f64,
    pub summary: McSummary,
    #[serde(skip)]
    pub records: Vec<ReplicationRecord>,
}

/// Runs the study once per N with the config's spacing rule. Row i uses
/// stream ids starting at i·2³².
pub fn convergence_table(
    config: &StudyConfig,
    n_values: &[usize],
    workers: Option<usize>,
) -> Result<Vec<ConvergenceRow>> {
    if n_values.is_empty() {
        return Err(Error::Config(
            "convergence table needs at least one N".into(),
        ));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("N values must be strictly increasing".into()));
    }
    n_values
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let scheme = config.scheme.with_n(n)?;
            let result = run_study_at(config, scheme, i as u64 * ROW_STREAM_STRIDE, workers)?;
            Ok(ConvergenceRow {
                n,
                mesh: scheme.mesh(),
                horizon: scheme.horizon(),
                summary: result.summary,
                records: result.records,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub mc_variance: f64,
    pub quadrature_sigma2: f64,
    pub ratio: f64,
}

/// Sample variance of √T(μ̂ − Ψ) over stationary paths on `[0, horizon]`
/// with spacing [`CALIBRATION_MESH`], against the quadrature σ².
/// Replication r uses `stream.offset(r)`.
pub fn variance_calibration(
    params: ModelParams,
    horizon: f64,
    replications: usize,
    stream: RngStream,
    workers: Option<usize>,
) -> Result<Calibration> {
    if replications < 2 {
        return Err(Error::Config(
            "calibration needs at least 2 replications".into(),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let n = (horizon / CALIBRATION_MESH).round().max(1.0) as usize;
    let scheme = SamplingScheme::with_mesh(n, horizon / n as f64)?;
    let sampler = StationarySampler::new(params, scheme)?;
    let target = psi(params);
    let scaled: Vec<f64> = in_pool(workers, || {
        (0..replications as u64)
            .into_par_iter()
            .map(|r| {
                quadratic_functional(&sampler.sample(stream.offset(r)))
                    .map(|mu| horizon.sqrt() * (mu - target))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let (_, sd) = mean_sd(&scaled);
    let s2 = sigma2(params, &QuadratureSpec::default())?.value;
    Ok(Calibration {
        mc_variance: sd * sd,
        quadrature_sigma2: s2,
        ratio: sd * sd / s2,
    })
}
