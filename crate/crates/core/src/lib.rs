//! Constrained anomaly maximum-likelihood estimation.
//!
//! A univariate dataset is modeled as a mixture of a Gaussian normal-data
//! component and an unknown anomaly density that puts no mass inside an
//! anomaly-free region (AFR) `[a, b]`. The Gaussian parameters and anomaly
//! fraction are fitted under the requirement that the model's probability of
//! landing outside the AFR agrees with the observed fraction, within a Wilson
//! score interval. Points are scored by how far their density falls below the
//! fitted mode.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases
//! below fix the common case.
//!
//! ```
//! use camle::{camle_score, AfrSpec, CamleConfig};
//!
//! let mut column: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.37).sin()).collect();
//! column.push(25.0);
//! let config = CamleConfig::default();
//! let scores = camle_score(&[column], &[AfrSpec::Quantiles(0.24, 0.75)], &config).unwrap();
//! let top = scores.argmax().unwrap();
//! assert_eq!(top, 200);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camle;
pub mod cmle;
pub mod error;
pub mod eval;
pub mod mixture;
pub mod scalar;
pub mod specfn;

pub use camle::{
    camle_score, camle_score_1d, estimate_afr, mle_score, AfrSpec, CamleConfig, DimensionReport, Method, ScoreReport,
    ScoreVector,
};
pub use cmle::{constrained_mle, standard_mle};
pub use error::{CamleError, Result};
pub use mixture::{Afr, GaussianParams, KktCase, LabelEstimate, MixtureEstimate, WilsonInterval};
pub use scalar::Scalar;

pub type Afr64 = Afr<f64>;
pub type GaussianParams64 = GaussianParams<f64>;
pub type MixtureEstimate64 = MixtureEstimate<f64>;
pub type WilsonInterval64 = WilsonInterval<f64>;
pub type ScoreVector64 = ScoreVector<f64>;
pub type CamleConfig64 = CamleConfig<f64>;
