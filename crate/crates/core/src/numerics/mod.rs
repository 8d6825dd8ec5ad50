//! Generic numerical building blocks.

pub mod cholesky;
pub mod ks;
pub mod quadrature;
pub mod rng;
pub mod roots;

pub use cholesky::{cholesky, LowerTriangular, SymmetricMatrix};
pub use ks::{kolmogorov_survival, ks_statistic_std_normal, std_normal_cdf, KsResult};
pub use quadrature::{
    integrate_1d, integrate_1d_singular, integrate_unit_cube_3d, integrate_unit_cube_3d_log,
    integrate_unit_cube_3d_with, Abscissa, CubePoint, CubeSingularities, EndpointSingularity,
    QuadResult, QuadratureSpec,
};
pub use rng::{gaussian_vector, RngStream};
pub use roots::find_root_decreasing;
