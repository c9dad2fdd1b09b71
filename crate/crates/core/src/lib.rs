//! Fuzzy jump models for soft and hard temporal clustering of mixed-type
//! multivariate time series.
//!
//! A fit alternates between per-time-step membership updates (projected
//! gradient descent on the probability simplex, coupled to the neighbouring
//! time points through a squared-L1 jump penalty) and prototype updates
//! (weighted medians and modes under Gower distance, or weighted means under
//! squared Euclidean distance).

pub mod error;
pub mod eval;
pub mod fit;
pub mod io;
pub mod model;
pub mod simplex;
pub mod simulate;

pub use error::{Error, ErrorCategory, Result};
pub use model::{
    feature_ranges, gower_distance, objective, squared_euclidean, DataMatrix, DistanceMode,
    Feature, FeatureKind, FeatureRanges, FeatureSchema, FitConfig, MembershipMatrix,
    PrototypeSet, Value,
};
pub use fit::{fit, fit_from, map_labels, FitResult};
