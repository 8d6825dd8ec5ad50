//! θ̂ = Ψ⁻¹(μ̂) with its asymptotic confidence interval on one long path.

use fou2::estimate::{estimate_theta_known_h, quadratic_functional};
use fou2::model::ModelParams;
use fou2::numerics::RngStream;
use fou2::simulate::{sample_stationary, SamplingScheme};

fn main() -> fou2::Result<()> {
    let params = ModelParams::new(1.0, 0.7)?;
    let scheme = SamplingScheme::with_mesh(4000, 0.1)?;
    let path = sample_stationary(params, scheme, RngStream::new(7, 0))?;
    println!("μ̂ = {:.6}", quadratic_functional(&path)?);
    let report = estimate_theta_known_h(&path, 0.7)?;
    println!("{}", fou2::json::to_canonical_string(&report)?);
    if let (Some(t), Some([lo, hi])) = (report.theta_hat, report.ci95) {
        println!(
            "θ̂ = {t:.4}, 95% CI [{lo:.4}, {hi:.4}], T = {}",
            report.horizon
        );
    }
    Ok(())
}
