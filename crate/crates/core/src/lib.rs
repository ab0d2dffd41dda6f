//! Probing frozen image encoders for global-context sensitivity.
//!
//! The pipeline: [`synth`] renders normal/distorted composites, an external
//! extractor (or [`stub`]) turns them into [`dataio`] embedding files, [`probe`]
//! trains a two-logit linear head on those features, [`score`] turns the head's
//! predictions into entropy, accuracy and equivariance numbers, and [`filter`]
//! selects hard samples from a panel of probes.

pub mod cli;
pub mod dataio;
pub mod filter;
pub mod probe;
pub mod rng;
pub mod score;
pub mod stub;
pub mod synth;
