//! Batch ensembles: bagging and boosting baselines plus their cost-sensitive variants.

mod bagging;
mod boosting;
pub mod sampling;
pub mod smote;

pub use bagging::{
    bagging_train, smotebagging_positive_split, smotebagging_train, smotebagging_training_set, underoverbagging_train,
    uob_replica_sizes, uob_training_set, ResampleRateSchedule,
};
pub use boosting::{
    adaboost_train, adac2_train, boosting_update, csb2_train, modified_training_set, rusboost_train,
    smoteboost_train, BoostScheme, BoostStep, WeightVector,
};
pub use smote::{smote, SmoteSampler};

use crate::data::Dataset;
use crate::ensemble::{Algorithm, Ensemble, EnsembleConfig};
use crate::error::Result;
use crate::rng::RngStream;

/// Trains the batch form of `algorithm`.
pub fn train(algorithm: Algorithm, data: &Dataset, cfg: &EnsembleConfig, rng: &RngStream) -> Result<Ensemble> {
    match algorithm {
        Algorithm::Bagging => bagging_train(data, cfg, rng),
        Algorithm::Boosting => adaboost_train(data, cfg, rng),
        Algorithm::UnderOverBagging => underoverbagging_train(data, cfg, rng),
        Algorithm::SmoteBagging => smotebagging_train(data, cfg, rng),
        Algorithm::AdaC2 => adac2_train(data, cfg, rng),
        Algorithm::Csb2 => csb2_train(data, cfg, rng),
        Algorithm::RusBoost(v) => rusboost_train(data, cfg, v, rng),
        Algorithm::SmoteBoost(v) => smoteboost_train(data, cfg, v, rng),
    }
}
