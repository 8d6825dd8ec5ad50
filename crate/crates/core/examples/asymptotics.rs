//! Ψ and its inverse, the stationary covariance and variogram, and the
//! asymptotic variances σ² and σ_θ².

use fou2::model::{psi, psi_inverse, sigma_theta2, stationary_covariance, variogram, ModelParams};
use fou2::numerics::QuadratureSpec;

fn main() -> fou2::Result<()> {
    let p = ModelParams::new(1.0, 0.7)?;
    let mu = psi(p);
    println!("Ψ(1; 0.7) = {mu:.15} (H^2H = {:.15})", 0.7f64.powf(1.4));
    println!("Ψ⁻¹(Ψ(1)) = {:.12}", psi_inverse(mu, 0.7)?);

    println!("\n   t      c(t)              v(t)/(t^2H/2)");
    for t in [1e-4, 1e-2, 0.5, 2.0, 10.0] {
        let c = stationary_covariance(p, t)?;
        let v = variogram(p, t)?;
        println!("{t:7.0e}  {c:.12e}  {:.6}", v / (0.5 * t.powf(1.4)));
    }

    for (theta, h) in [(1.0, 0.7), (2.0, 0.55), (0.5, 0.9)] {
        let p = ModelParams::new(theta, h)?;
        let start = std::time::Instant::now();
        let r = sigma_theta2(p, &QuadratureSpec::default())?;
        println!(
            "\nθ={theta}, H={h}: Ψ′={:.9} σ²={:.9} σ_θ²={:.9} (quadrature error {:.1e}, {:.2?})",
            r.psi_prime,
            r.sigma2,
            r.sigma_theta2,
            r.quadrature_error,
            start.elapsed()
        );
    }
    Ok(())
}
