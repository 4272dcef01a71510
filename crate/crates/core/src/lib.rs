//! Chapter-level text similarity toolkit for a small corpus of sacred books.
//!
//! The pipeline runs in stages, each with its own module:
//!
//! * [`corpus`] loads book texts and segments them into labeled chapters,
//! * [`textprep`] cleans and tokenizes chapters into bags of words,
//! * [`dtm`] builds the sparse document-term matrix,
//! * [`similarity`] computes chapter distances and book-level aggregates,
//! * [`cluster`] runs k-means and derives book graphs and dendrograms,
//! * [`classify`] benchmarks KNN, linear SVM and random forest classifiers,
//! * [`pipeline`] wires the stages together behind a config file.

pub mod classify;
pub mod cluster;
pub mod corpus;
pub mod dtm;
pub mod label;
pub mod pipeline;
pub mod rng;
pub mod similarity;
pub mod sparse;
pub mod textprep;

pub use label::BookLabel;
pub use sparse::SparseVec;
