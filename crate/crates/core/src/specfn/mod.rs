//! Numerical special functions used by the estimators.

pub mod lambert;
pub mod normal;
pub mod root;

pub use lambert::{lambert_w0, lambert_wm1, r_lambert, r_lambert_critical_points, RLambertSolutions};
pub use normal::{
    erf, erfc, std_normal_cdf, std_normal_interval_mass, std_normal_pdf, std_normal_quantile,
    std_normal_sf,
};
