//! Domain types shared by every stage of the estimator: the feature schema,
//! the mixed-type data matrix, memberships, prototypes, distances and the
//! penalized objective.

mod config;
mod data;
mod distance;
mod membership;
pub(crate) mod objective;
mod schema;

pub use config::FitConfig;
pub use data::{DataMatrix, Value};
pub use distance::{
    feature_ranges, gower_distance, squared_euclidean, DistanceMode, FeatureRanges, Metric,
};
pub use membership::{MembershipMatrix, PrototypeSet};
pub use objective::{distance_table, objective, objective_with_distances};
pub use schema::{Feature, FeatureKind, FeatureSchema};
