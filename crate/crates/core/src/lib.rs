//! Bagging estimators and the exact finite-sample theory of the bagged
//! sample variance.
//!
//! * [`bagging`]: generic bag-and-average driver plus the kurtosis-gated
//!   variance algorithm ([`algorithm1_variance`]).
//! * [`closed_form`]: mean, variance decomposition and MSE of the bagged
//!   unbiased variance, the plain-estimator MSE, and the bag count needed
//!   for bagging to win.
//! * [`exact_oracle`]: brute-force enumeration over all bags, used to check
//!   the closed forms in exact rational arithmetic.
//! * [`moments`], [`distributions`], [`regressors`], [`experiments`]:
//!   supporting pieces and the drivers behind the `bagcheck` binary.
//!
//! The arithmetic core is generic over [`Scalar`], implemented for `f32`,
//! `f64` and [`Exact`] (arbitrary-precision rationals).
//!
//! ```
//! use bagcheck::{closed_form, DistributionSpec};
//!
//! let mom = DistributionSpec::Gaussian { sigma: 1.0 }.population_moments().unwrap();
//! assert_eq!(closed_form::min_iterations(100, 100, &mom).unwrap(), Some(67));
//! ```

pub mod bagging;
pub mod closed_form;
pub mod distributions;
pub mod error;
pub mod exact_oracle;
pub mod experiments;
pub mod moments;
pub mod regressors;
pub mod rng;
pub mod scalar;

pub use bagging::{
    algorithm1_variance, bag_estimate, bagged_unbiased_variance, BagConfig, Estimator,
    IterationCap, VarianceEstimate,
};
pub use closed_form::{MseBreakdown, MseGap};
pub use distributions::DistributionSpec;
pub use error::{Error, Result};
pub use exact_oracle::EnumerationLimit;
pub use moments::{unbiased_variance, Dataset, Moments};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type ExactDataset = Dataset<Exact>;
pub type Moments64 = Moments<f64>;
pub type ExactMoments = Moments<Exact>;
pub type MseBreakdown64 = MseBreakdown<f64>;
