//! One-sample Kolmogorov–Smirnov test against the standard normal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    const TERM_TOL: f64 = 1e-10;
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series, fast for small lambda
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 0..1000 {
            let m = (2 * k + 1) as f64;
            let term = (-m * m * c).exp();
            cdf += term;
            if term < TERM_TOL {
                break;
            }
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..1000 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < TERM_TOL {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// KS distance between the empirical CDF of `sample` and Φ, with the
/// asymptotic p-value at `sqrt(n) * D`.
pub fn ks_statistic_std_normal(sample: &[f64]) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::Empty(
            "KS test needs at least one observation".into(),
        ));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("KS sample contains NaN".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = std_normal_cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(n.sqrt() * d),
    })
}
