//! Filters, dilation, the generalized quadratic variations, Ĥ and the
//! plug-in θ̃ for unknown H.

use fou2::estimate::{
    check_assumption_a, dilate, estimate_hurst, estimate_theta_unknown_h,
    generalized_quadratic_variation, Filter,
};
use fou2::model::ModelParams;
use fou2::numerics::RngStream;
use fou2::simulate::{SamplingScheme, StationarySampler};

fn main() -> fou2::Result<()> {
    let a = Filter::parse("1,-2,1", 2)?;
    let a2 = dilate(&a);
    println!("filter {:?}, dilated {:?}", a.coeffs(), a2.coeffs());
    let grid: Vec<f64> = (1..40)
        .filter(|&k| k != 20)
        .map(|k| k as f64 * 0.1)
        .collect();
    println!(
        "non-vanishing check on (0, 4) \\ {{2}}: {}",
        check_assumption_a(a.coeffs(), &grid)
    );

    let params = ModelParams::new(1.0, 0.7)?;
    let scheme = SamplingScheme::with_mesh_exponent(4096, 0.6)?;
    let sampler = StationarySampler::new(params, scheme)?;
    let path = sampler.sample(RngStream::new(3, 0));
    let v1 = generalized_quadratic_variation(&path, &a)?;
    let v2 = generalized_quadratic_variation(&path, &a2)?;
    println!(
        "V_a = {v1:.4e}, V_a² = {v2:.4e}, ratio {:.4} (2^1.4 = {:.4})",
        v2 / v1,
        2f64.powf(1.4)
    );
    let h = estimate_hurst(&path, &a)?;
    println!("Ĥ = {:.4} (in range: {})", h.value, h.in_range);

    let report = estimate_theta_unknown_h(&path, &a)?;
    println!("{}", fou2::json::to_canonical_string(&report)?);
    Ok(())
}
