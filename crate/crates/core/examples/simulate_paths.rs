//! Exact stationary paths, integrated paths at coupled refinement levels,
//! fBm, and path CSV files.

use fou2::model::{psi, ModelParams};
use fou2::numerics::RngStream;
use fou2::simulate::{
    sample_fbm, IntegratedSampler, ObservedPath, SamplingScheme, StationarySampler,
};

fn main() -> fou2::Result<()> {
    let params = ModelParams::new(1.0, 0.7)?;
    let scheme = SamplingScheme::with_mesh(1000, 0.05)?;

    let sampler = StationarySampler::new(params, scheme)?;
    let path = sampler.sample(RngStream::new(42, 0));
    let mean_sq = path.values().iter().map(|x| x * x).sum::<f64>() / path.len() as f64;
    println!(
        "stationary: {} points up to t = {}, mean X² = {mean_sq:.4} (Ψ = {:.4})",
        path.len(),
        path.horizon(),
        psi(params)
    );

    let coarse = SamplingScheme::with_mesh(100, 0.1)?;
    let integrated = IntegratedSampler::new(ModelParams::new(2.0, 0.7)?, coarse, 16)?;
    let levels = [1, 2, 4, 8, 16];
    let paths = integrated.sample_refinements(RngStream::new(42, 1), &levels)?;
    for (w, pair) in levels.windows(2).zip(paths.windows(2)) {
        let gap = pair[0]
            .values()
            .iter()
            .zip(pair[1].values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("refine {:>2} vs {:>2}: max |ΔX| = {gap:.2e}", w[0], w[1]);
    }

    let times: Vec<f64> = (0..=4).map(|k| k as f64 * 0.25).collect();
    let b = sample_fbm(0.7, &times, RngStream::new(42, 2))?;
    println!("fBm at {times:?}: {b:.4?}");

    let file = std::env::temp_dir().join("fou2_example_path.csv");
    path.save(&file)?;
    let back = ObservedPath::load(&file)?;
    println!(
        "CSV round trip exact: {} ({})",
        back.values() == path.values(),
        file.display()
    );
    Ok(())
}
