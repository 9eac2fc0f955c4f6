//! Gauge transformations of the brackets `P_{g,f}` and their reduction to the
//! Lie-Poisson bracket of `e(3)`.

mod curl;
mod reduction;
pub mod spectral;
mod transform;

pub use curl::{
    calibrated_sign, curl_target_f, fd_residual, solve_curl_equation, CurlSolution, SpectralCurlField,
    DEFAULT_BAND_LIMIT,
};
pub use reduction::{reduce_to_e3, reduction_report, Reduction, ReductionReport, ReportProbes};
pub use spectral::{sphere_quadrature, SphereGrid, SphereSpectralField};
pub use transform::{
    apply_gauge_state, compose, constant_gauge, inverse, p_gf, pushforward_bivector, pushforward_params,
    zero_level_bivector, zero_level_reduce, GFParams, GaugeTransform,
};
