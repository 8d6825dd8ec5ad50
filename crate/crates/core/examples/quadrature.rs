//! Adaptive Gauss–Kronrod quadrature with declared singularities, and the
//! nested unit-cube integrator.

use fou2::numerics::{
    integrate_1d, integrate_1d_singular, integrate_unit_cube_3d_with, CubeSingularities,
    EndpointSingularity, QuadratureSpec,
};

fn main() -> fou2::Result<()> {
    let spec = QuadratureSpec::new(1e-13, 1e-12, 5000)?;

    let r = integrate_1d(|x| (-x * x).exp(), 0.0, 3.0, &spec)?;
    println!(
        "∫₀³ e^(−x²) dx = {:.15} ± {:.1e} ({} panels)",
        r.value, r.abs_error, r.subdivisions
    );

    // the integrand sees exact distances to both ends
    let r = integrate_1d_singular(
        |p| p.to_lo.powf(-0.3) * p.to_hi.powf(-0.6),
        0.0,
        1.0,
        EndpointSingularity::both(-0.3, -0.6),
        &spec,
    )?;
    println!("B(0.7, 0.4)    = {:.15} ± {:.1e}", r.value, r.abs_error);

    let sing = CubeSingularities {
        u_lo: None,
        diag: Some(-0.4),
        w_lo: None,
        w_hi: None,
        v_lo: None,
        split_w_at_v: false,
        log_scale_above_v: false,
    };
    let r = integrate_unit_cube_3d_with(
        |p| p.abs_u_minus_v.powf(-0.4),
        &sing,
        &QuadratureSpec::default(),
    )?;
    let exact = 2.0 / (0.6 * 1.6);
    println!("∫∫∫ |u − v|^(−0.4) = {:.10} (exact {exact:.10})", r.value);
    Ok(())
}
