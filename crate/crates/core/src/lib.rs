//! Semi-supervised text categorization by recursive K-means.
//!
//! A small labeled seed set and a large unlabeled pool are embedded into a
//! K-dimensional space (one axis per class) and partitioned with K-means.
//! Any partition whose labeled members disagree beyond a relative-percentage
//! threshold is clustered again with K set to the number of classes it
//! contains. The surviving clusters, their centroids and majority labels form
//! a knowledgebase; unseen documents take the label of the nearest centroid.
//!
//! Modules follow the pipeline order:
//!
//! - [`corpus`]: loading, tokenization, stratified splits and label masking
//! - [`representation`]: term-class weights and K-dimensional embedding
//! - [`rkmeans`]: Lloyd's K-means and the recursive semi-supervised clustering
//! - [`classifier`]: nearest-centroid labeling
//! - [`eval`]: confusion matrices, accuracy and micro/macro P/R/F
//! - [`harness`]: label-ratio sweeps over repeated random trials
//!
//! [`pipeline`] ties representation, clustering and classification into one
//! persistable object, and [`synthetic`] generates reproducible toy data.

pub mod classifier;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod harness;
pub mod pipeline;
pub mod representation;
pub mod rkmeans;
pub mod seeding;
pub mod synthetic;

pub use classifier::{classify, classify_batch, classify_points, Nearest, Prediction};
pub use corpus::{ClassId, Corpus, DocId, Document, GroundTruth, SplitSpec, TokenizerConfig};
pub use error::{Error, Result};
pub use eval::{confusion, score, ConfusionMatrix, EvalReport};
pub use pipeline::Pipeline;
pub use representation::{embed, embed_corpus, fit_term_weights, DocVector, TermClassWeights};
pub use rkmeans::{build_model, kmeans, ClusterModel, Distance, KMeansConfig, Point, RkmConfig};
