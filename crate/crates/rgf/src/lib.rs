//! Regularized greedy forest (RGF) learning.
//!
//! This crate trains decision forests by greedily growing tree structure
//! against the *regularized* training objective and periodically running
//! fully-corrective optimization of all leaf weights. It provides:
//!
//! * dense/sparse tabular data loading and a synthetic regression benchmark
//!   generator ([`dataset`]),
//! * five differentiable training losses, including a pairwise ranking loss
//!   ([`loss`]),
//! * three tree-structured regularizers — plain leaf `L2` and two
//!   minimum-equivalent-model penalties defined over all nodes ([`reg`]),
//! * the greedy structure search ([`growth`]) and the fully-corrective
//!   coordinate-descent weight optimizer ([`correction`]),
//! * the training driver, evaluation and cross-validation ([`trainer`]),
//! * gradient-boosting baselines sharing the same model type ([`boosting`]),
//! * a synthetic head-to-head benchmark harness ([`bench`]).
//!
//! Everything is deterministic: all randomness flows from explicit `u64`
//! seeds through the portable generator in [`rng`], and training itself
//! uses no randomness at all.

pub mod bench;
pub mod boosting;
pub mod correction;
pub mod dataset;
pub mod error;
pub mod growth;
pub mod loss;
pub mod model;
pub mod reg;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
