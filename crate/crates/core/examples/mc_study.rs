//! Monte Carlo studies: a θ̂ study, a convergence table and a variance
//! calibration. Pass a StudyConfig JSON path (such as
//! `examples/thm31_study.json`) to run that study instead of the small one.

use fou2::mcstudy::{
    convergence_table, run_study, variance_calibration, EstimatorKind, SamplerKind, StudyConfig,
};
use fou2::model::ModelParams;
use fou2::numerics::RngStream;
use fou2::simulate::SamplingScheme;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = match std::env::args().nth(1) {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => StudyConfig {
            params: ModelParams::new(1.0, 0.7)?,
            scheme: SamplingScheme::with_mesh(2000, 0.1)?,
            estimator: EstimatorKind::ThetaKnownH,
            replications: 100,
            filter: None,
            sampler: SamplerKind::Stationary,
            refine: 8,
            master_seed: 1,
        },
    };
    let s = run_study(&config)?.summary;
    println!(
        "{} replications: mean {:.4}, sd {:.4} (theory {:.4}), bias {:.4}, KS p {:.3}, {:.1} s",
        s.replications,
        s.estimate_mean,
        s.estimate_sd,
        s.theory_sd.unwrap_or(f64::NAN),
        s.bias,
        s.ks_p,
        s.runtime_seconds
    );

    let hurst = StudyConfig {
        estimator: EstimatorKind::HurstOnly,
        scheme: SamplingScheme::with_mesh_exponent(256, 0.6)?,
        replications: 50,
        ..config.clone()
    };
    println!("\n    N   mean Ĥ    sd");
    for row in convergence_table(&hurst, &[256, 1024], None)? {
        println!(
            "{:5}  {:.4}  {:.4}",
            row.n, row.summary.estimate_mean, row.summary.estimate_sd
        );
    }

    let c = variance_calibration(
        ModelParams::new(1.0, 0.7)?,
        50.0,
        100,
        RngStream::new(2, 0),
        None,
    )?;
    println!(
        "\nvariance of √T(μ̂ − Ψ) at T = 50: {:.4}, σ² = {:.4}, ratio {:.3}",
        c.mc_variance, c.quadrature_sigma2, c.ratio
    );
    Ok(())
}
