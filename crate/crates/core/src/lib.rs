//! Untangling trivial braids with a learned policy.
//!
//! Braid words have a fixed number of slots; `0` is an empty slot, `+i` the
//! crossing σ_i and `-i` its inverse. [`artin`] decides triviality exactly,
//! [`moves`] rewrites words without changing the braid, [`scramble`] builds
//! trivial words to learn from, and [`trainer`] fits a [`policy::PolicyNet`]
//! that picks moves until the word is empty.

pub mod agent;
pub mod artin;
pub mod benchmark;
pub mod braid;
pub mod dataset;
pub mod env;
pub mod error;
pub mod moves;
pub mod policy;
pub mod scramble;
pub mod trainer;

pub use agent::{EpisodeTrace, Rollout, Solver};
pub use artin::{braid_image, is_trivial, Oracle};
pub use braid::{BraidWord, Encoding, FeatureVector};
pub use dataset::Dataset;
pub use env::{BraidEnv, DoneReason, EnvConfig};
pub use error::{Error, Result};
pub use moves::{ActionTable, MoveAction, MoveKind};
pub use policy::{ActionDistribution, Checkpoint, ModelConfig, NetDims, PolicyNet};
pub use scramble::GenParams;
pub use trainer::{evaluate, train, Metrics, TrainConfig};
