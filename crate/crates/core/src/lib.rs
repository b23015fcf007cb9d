//! Causal edge inference on memory-less transition networks.
//!
//! The pipeline turns per-entity event sequences into a weighted directed
//! transition network, derives a per-edge feature hierarchy from the
//! distributions of transition probabilities around each node (the
//! "composition of transitions"), and trains edge classifiers whose predicted
//! probability serves as a causality measure. A planted-causality generator
//! provides synthetic datasets with verifiable ground truth.
//!
//! Modules follow the pipeline order:
//!
//! * [`ingest`] — event parsing and transition extraction
//! * [`graph`] — transition network aggregation
//! * [`stats`] — distribution statistics, tests, and projections
//! * [`features`] — per-edge feature vectors and zone summaries
//! * [`matrix`] — the named-column feature matrix and label joins
//! * [`model`] — random forest and logistic edge classifiers
//! * [`eval`] — discrimination, calibration, clustering metrics
//! * [`synth`] — planted-causality dataset generation

pub mod eval;
pub mod features;
pub mod graph;
pub mod ingest;
pub mod matrix;
pub mod model;
pub mod rng;
pub mod stats;
pub mod synth;

pub use graph::TransitionNetwork;
pub use ingest::{SequenceDataset, Transition};
pub use matrix::{EdgeLabel, FeatureMatrix, LabeledEdgeSet};
pub use model::{RandomForest, TrainConfig};
