//! Exact and approximate path samplers.
//!
//! * [`StationarySampler`]: the stationary process U on a uniform grid,
//!   exact by Cholesky factorization of `c(|i − j|Δ)`.
//! * [`IntegratedSampler`]: X with X₀ = 0 through left-point
//!   Riemann–Stieltjes sums over an exactly sampled fBm.
//! * [`FbmSampler`]: fractional Brownian motion at arbitrary times.
//!
//! Dense factorizations are computed once per sampler and reused for every
//! draw, so Monte Carlo loops should build a sampler and call `sample`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{stationary_covariance, ModelParams};
use crate::numerics::{cholesky, gaussian_vector, LowerTriangular, RngStream, SymmetricMatrix};

/// Largest N for the dense stationary sampler.
pub const STATIONARY_MAX_N: usize = 1 << 14;
/// Largest fine-grid size m·N (integrated sampler) and fBm vector length.
pub const FINE_GRID_MAX: usize = 1 << 13;
pub const DEFAULT_REFINE: usize = 8;
/// The integrated sampler refuses horizons with T/H above this.
pub const MAX_HORIZON_OVER_H: f64 = 700.0;

/// Relative tolerance for treating a time grid as uniform.
pub const UNIFORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Spacing {
    Mesh(f64),
    Exponent(f64),
}

/// Observation grid t_k = kΔ_N, k = 1..N, with Δ_N given directly or as
/// N^{−α}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub struct SamplingScheme {
    n: usize,
    spacing: Spacing,
}

#[derive(Serialize, Deserialize)]
struct RawScheme {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mesh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mesh_exponent: Option<f64>,
}

impl TryFrom<RawScheme> for SamplingScheme {
    type Error = Error;
    fn try_from(raw: RawScheme) -> Result<Self> {
        match (raw.mesh, raw.mesh_exponent) {
            (Some(mesh), None) => Self::with_mesh(raw.n, mesh),
            (None, Some(alpha)) => Self::with_mesh_exponent(raw.n, alpha),
            _ => Err(Error::Config(
                "exactly one of mesh and mesh_exponent must be set".into(),
            )),
        }
    }
}

impl From<SamplingScheme> for RawScheme {
    fn from(s: SamplingScheme) -> Self {
        let (mesh, mesh_exponent) = match s.spacing {
            Spacing::Mesh(m) => (Some(m), None),
            Spacing::Exponent(a) => (None, Some(a)),
        };
        RawScheme {
            n: s.n,
            mesh,
            mesh_exponent,
        }
    }
}

impl SamplingScheme {
    pub fn with_mesh(n: usize, mesh: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config(
                "number of observations must be positive".into(),
            ));
        }
        if !(mesh > 0.0 && mesh.is_finite()) {
            return Err(Error::Config(format!("mesh must be positive, got {mesh}")));
        }
        Ok(Self {
            n,
            spacing: Spacing::Mesh(mesh),
        })
    }

    /// Δ_N = N^{−α}.
    pub fn with_mesh_exponent(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config(
                "number of observations must be positive".into(),
            ));
        }
        if !alpha.is_finite() {
            return Err(Error::Config(format!(
                "mesh exponent must be finite, got {alpha}"
            )));
        }
        let s = Self {
            n,
            spacing: Spacing::Exponent(alpha),
        };
        if !(s.mesh() > 0.0 && s.mesh().is_finite()) {
            return Err(Error::Config(format!(
                "mesh exponent {alpha} gives an invalid mesh"
            )));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mesh(&self) -> f64 {
        match self.spacing {
            Spacing::Mesh(m) => m,
            Spacing::Exponent(a) => (self.n as f64).powf(-a),
        }
    }

    pub fn mesh_exponent(&self) -> Option<f64> {
        match self.spacing {
            Spacing::Mesh(_) => None,
            Spacing::Exponent(a) => Some(a),
        }
    }

    /// Same spacing rule with a different N.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        match self.spacing {
            Spacing::Mesh(m) => Self::with_mesh(n, m),
            Spacing::Exponent(a) => Self::with_mesh_exponent(n, a),
        }
    }

    /// T_N = N Δ_N.
    pub fn horizon(&self) -> f64 {
        self.n as f64 * self.mesh()
    }

    /// Observation times kΔ_N, k = 1..N.
    pub fn times(&self) -> Vec<f64> {
        let d = self.mesh();
        (1..=self.n).map(|k| k as f64 * d).collect()
    }
}

/// Observation times with process values.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPath {
    times: Vec<f64>,
    values: Vec<f64>,
    uniform: bool,
    meta: Option<ModelParams>,
}

impl ObservedPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Empty("path has no observations".into()));
        }
        if times.len() != values.len() {
            return Err(Error::Format(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::Format("path contains non-finite numbers".into()));
        }
        if times[0] < 0.0 {
            return Err(Error::Format(
                "observation times must be non-negative".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Format(
                "observation times must be strictly increasing".into(),
            ));
        }
        let uniform = is_uniform_grid(&times);
        Ok(Self {
            times,
            values,
            uniform,
            meta: None,
        })
    }

    pub fn with_meta(mut self, params: ModelParams) -> Self {
        self.meta = Some(params);
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn meta(&self) -> Option<ModelParams> {
        self.meta
    }

    /// Last observation time.
    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("paths are non-empty")
    }

    /// Grid spacing of a uniform path with at least two points.
    pub fn mesh(&self) -> Option<f64> {
        if self.uniform && self.len() >= 2 {
            Some((self.horizon() - self.times[0]) / (self.len() - 1) as f64)
        } else {
            None
        }
    }

    /// The path with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// Writes `time,value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "value"]).map_err(csv_error)?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([format_f64(*t), format_f64(*v)])
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = r.headers().map_err(csv_error)?;
        if header.len() != 2 || &header[0] != "time" || &header[1] != "value" {
            return Err(Error::Format(format!(
                "expected header `time,value`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            let parse = |field: &str| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: `{field}` is not a number", i + 1)))
            };
            if rec.len() != 2 {
                return Err(Error::Format(format!("row {}: expected two fields", i + 1)));
            }
            times.push(parse(&rec[0])?);
            values.push(parse(&rec[1])?);
        }
        Self::new(times, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(BufReader::new(File::open(path)?))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Round-trip exact decimal form with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn is_uniform_grid(times: &[f64]) -> bool {
    if times.len() < 2 {
        return true;
    }
    let last = *times.last().unwrap();
    let mean = (last - times[0]) / (times.len() - 1) as f64;
    let tol = UNIFORM_TOL * mean.max(last.abs());
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - mean).abs() <= tol)
}

/// c(kΔ) for k = 0..n.
pub fn covariance_lags(params: ModelParams, mesh: f64, n: usize) -> Result<Vec<f64>> {
    (0..n)
        .map(|k| stationary_covariance(params, k as f64 * mesh))
        .collect()
}

/// Exact sampler of the stationary process U at t_k = kΔ, k = 1..N.
#[derive(Debug, Clone)]
pub struct StationarySampler {
    params: ModelParams,
    scheme: SamplingScheme,
    factor: LowerTriangular,
}

impl StationarySampler {
    pub fn new(params: ModelParams, scheme: SamplingScheme) -> Result<Self> {
        let n = scheme.n();
        if n > STATIONARY_MAX_N {
            return Err(Error::Size(format!(
                "stationary sampler supports N <= {STATIONARY_MAX_N}, got {n}"
            )));
        }
        let lags = covariance_lags(params, scheme.mesh(), n)?;
        let factor = cholesky(&SymmetricMatrix::from_fn(n, |i, j| lags[i - j]))?;
        Ok(Self {
            params,
            scheme,
            factor,
        })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn scheme(&self) -> SamplingScheme {
        self.scheme
    }

    pub fn factor(&self) -> &LowerTriangular {
        &self.factor
    }

    pub fn sample(&self, stream: RngStream) -> ObservedPath {
        let z = gaussian_vector(stream, self.scheme.n());
        let values = self
            .factor
            .mul_vec(&z)
            .expect("dimensions agree by construction");
        ObservedPath::new(self.scheme.times(), values)
            .expect("grid is valid by construction")
            .with_meta(self.params)
    }
}

pub fn sample_stationary(
    params: ModelParams,
    scheme: SamplingScheme,
    stream: RngStream,
) -> Result<ObservedPath> {
    Ok(StationarySampler::new(params, scheme)?.sample(stream))
}

/// Approximate sampler of X_t = e^{−θt} ∫₀ᵗ e^{(θ−1)s} dB_{a_s}, X₀ = 0.
///
/// On the fine grid s_j = jΔ/m the scaled increments
/// dY_j = e^{−s_j}(B_{a_{s_{j+1}}} − B_{a_{s_j}}) form a stationary Gaussian
/// sequence; they are sampled exactly and summed by
/// `S_{j+1} = e^{−θδ}(S_j + dY_j)`, which is the left-point
/// Riemann–Stieltjes sum for X at every fine node.
#[derive(Debug, Clone)]
pub struct IntegratedSampler {
    params: ModelParams,
    scheme: SamplingScheme,
    refine: usize,
    factor: LowerTriangular,
}

/// Covariance of dY_i and dY_{i+g} for fine step `delta`.
fn increment_covariance(hurst: f64, delta: f64, g: usize) -> f64 {
    let gamma = 2.0 * hurst;
    let hg = hurst.powf(gamma);
    let e1 = (delta / hurst).exp_m1();
    match g {
        0 => hg * e1.powf(gamma),
        1 => {
            let e2 = (2.0 * delta / hurst).exp_m1();
            0.5 * hg
                * (-delta).exp()
                * (e2.powf(gamma) - e1.powf(gamma) * (1.0 + (2.0 * delta).exp()))
        }
        _ => {
            // gap of j = g − 1 fine intervals between the two increments
            let j = (g - 1) as f64;
            let ej = (j * delta / hurst).exp_m1();
            let pref = 0.5 * hg * ej.powf(gamma) * ((1.0 - j) * delta).exp();
            let x_small = e1 * (-delta / hurst).exp() / ej;
            let x_large = e1 * (j * delta / hurst).exp() / ej;
            let (big, small) = if x_large >= x_small {
                (x_large, x_small)
            } else {
                (x_small, x_large)
            };
            let e = |z: f64| (gamma * z.ln_1p()).exp_m1();
            pref * ((1.0 + big).powf(gamma) * e(small / (1.0 + big)) - e(small))
        }
    }
}

impl IntegratedSampler {
    pub fn new(params: ModelParams, scheme: SamplingScheme, refine: usize) -> Result<Self> {
        if refine == 0 {
            return Err(Error::Config("refine must be at least 1".into()));
        }
        let fine = scheme.n().checked_mul(refine).unwrap_or(usize::MAX);
        if fine > FINE_GRID_MAX {
            return Err(Error::Size(format!(
                "fine grid m·N = {fine} exceeds {FINE_GRID_MAX}"
            )));
        }
        if scheme.horizon() / params.hurst() > MAX_HORIZON_OVER_H {
            return Err(Error::Size(format!(
                "horizon T/H = {} exceeds {MAX_HORIZON_OVER_H}; use the stationary sampler",
                scheme.horizon() / params.hurst()
            )));
        }
        let delta = scheme.mesh() / refine as f64;
        let lags: Vec<f64> = (0..fine)
            .map(|g| increment_covariance(params.hurst(), delta, g))
            .collect();
        let factor = cholesky(&SymmetricMatrix::from_fn(fine, |i, j| lags[i - j]))?;
        Ok(Self {
            params,
            scheme,
            refine,
            factor,
        })
    }

    pub fn refine(&self) -> usize {
        self.refine
    }

    fn increments(&self, stream: RngStream) -> Vec<f64> {
        let z = gaussian_vector(stream, self.factor.dim());
        self.factor
            .mul_vec(&z)
            .expect("dimensions agree by construction")
    }

    fn path_from_increments(&self, dy: &[f64], level: usize) -> ObservedPath {
        let n = self.scheme.n();
        let mesh = self.scheme.mesh();
        let delta = mesh / level as f64;
        let decay = (-self.params.theta() * delta).exp();
        let mut times = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        times.push(0.0);
        values.push(0.0);
        let mut s = 0.0;
        for (j, d) in dy.iter().enumerate() {
            s = decay * (s + d);
            if (j + 1) % level == 0 {
                times.push(((j + 1) / level) as f64 * mesh);
                values.push(s);
            }
        }
        ObservedPath::new(times, values)
            .expect("grid is valid by construction")
            .with_meta(self.params)
    }

    /// X at t_k = kΔ, k = 0..N (the first value is exactly 0).
    pub fn sample(&self, stream: RngStream) -> ObservedPath {
        let dy = self.increments(stream);
        self.path_from_increments(&dy, self.refine)
    }

    /// Paths at several refinement levels driven by the same fBm draw.
    /// Every level must divide the sampler's own `refine`.
    pub fn sample_refinements(
        &self,
        stream: RngStream,
        levels: &[usize],
    ) -> Result<Vec<ObservedPath>> {
        if let Some(&bad) = levels.iter().find(|&&l| l == 0 || self.refine % l != 0) {
            return Err(Error::Config(format!(
                "refinement level {bad} does not divide {}",
                self.refine
            )));
        }
        let fine = self.increments(stream);
        let delta = self.scheme.mesh() / self.refine as f64;
        Ok(levels
            .iter()
            .map(|&level| {
                let r = self.refine / level;
                let w: Vec<f64> = (0..r).map(|q| (q as f64 * delta).exp()).collect();
                let coarse: Vec<f64> = fine
                    .chunks(r)
                    .map(|c| c.iter().zip(&w).map(|(d, w)| d * w).sum())
                    .collect();
                self.path_from_increments(&coarse, level)
            })
            .collect())
    }
}

pub fn sample_integrated(
    params: ModelParams,
    scheme: SamplingScheme,
    refine: usize,
    stream: RngStream,
) -> Result<ObservedPath> {
    Ok(IntegratedSampler::new(params, scheme, refine)?.sample(stream))
}

/// Exact sampler of fractional Brownian motion at fixed times.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    times: Vec<f64>,
    /// Indices of strictly positive times (B_0 = 0 is not sampled).
    first_positive: usize,
    factor: Option<LowerTriangular>,
}

impl FbmSampler {
    pub fn new(hurst: f64, times: &[f64]) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Parameter(format!(
                "fBm needs 0 < H < 1, got {hurst}"
            )));
        }
        if times.is_empty() {
            return Err(Error::Empty("no sampling times".into()));
        }
        if times.len() > FINE_GRID_MAX {
            return Err(Error::Size(format!(
                "fBm sampler supports at most {FINE_GRID_MAX} times, got {}",
                times.len()
            )));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0))
            || times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Domain(
                "times must be non-negative and strictly increasing".into(),
            ));
        }
        let first_positive = usize::from(times[0] == 0.0);
        let pos = &times[first_positive..];
        let gamma = 2.0 * hurst;
        let factor = if pos.is_empty() {
            None
        } else {
            let m = SymmetricMatrix::from_fn(pos.len(), |i, j| {
                let (s, t) = (pos[i], pos[j]);
                0.5 * (s.powf(gamma) + t.powf(gamma) - (s - t).abs().powf(gamma))
            });
            Some(cholesky(&m)?)
        };
        Ok(Self {
            times: times.to_vec(),
            first_positive,
            factor,
        })
    }

    pub fn sample(&self, stream: RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.first_positive];
        if let Some(l) = &self.factor {
            let z = gaussian_vector(stream, l.dim());
            out.extend(l.mul_vec(&z).expect("dimensions agree by construction"));
        }
        debug_assert_eq!(out.len(), self.times.len());
        out
    }
}

pub fn sample_fbm(hurst: f64, times: &[f64], stream: RngStream) -> Result<Vec<f64>> {
    Ok(FbmSampler::new(hurst, times)?.sample(stream))
}
