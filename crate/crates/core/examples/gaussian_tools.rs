//! Seeded Gaussian streams, Cholesky with jitter, root finding and the
//! Kolmogorov–Smirnov normality test.

use fou2::numerics::{
    cholesky, find_root_decreasing, gaussian_vector, ks_statistic_std_normal, RngStream,
    SymmetricMatrix,
};

fn main() -> fou2::Result<()> {
    let stream = RngStream::new(2024, 0);
    let z = gaussian_vector(stream, 5);
    println!("stream (2024, 0): {z:.4?}");
    println!(
        "same stream again equal: {}",
        gaussian_vector(stream, 5) == z
    );
    println!(
        "stream (2024, 1) differs: {}",
        gaussian_vector(stream.offset(1), 5) != z
    );

    // fBm covariance at t = 1..4, H = 0.7
    let g = 1.4;
    let m = SymmetricMatrix::from_fn(4, |i, j| {
        let (s, t) = ((i + 1) as f64, (j + 1) as f64);
        0.5 * (s.powf(g) + t.powf(g) - (s - t).abs().powf(g))
    });
    let l = cholesky(&m)?;
    println!("L row 3: {:.4?}, jitter {}", l.row(3), l.jitter());

    let root = find_root_decreasing(|x| (-x).exp(), 0.25, 0.1, 1.0, 1e-14)?;
    println!("e^(−x) = 1/4 at x = {root:.15} (ln 4 = {:.15})", 4f64.ln());

    let x = gaussian_vector(RngStream::new(1, 0), 10_000);
    let ks = ks_statistic_std_normal(&x)?;
    println!(
        "KS on 10 000 normals: D = {:.4}, p = {:.3}",
        ks.statistic, ks.p_value
    );
    Ok(())
}
