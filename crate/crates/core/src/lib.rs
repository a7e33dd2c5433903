//! Batch and online cost-sensitive ensembles for imbalanced and drifting data.

pub mod batch;
pub mod cost;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod learners;
pub mod rng;
pub mod online;
pub mod drift;
pub mod eval;
pub mod cli;
