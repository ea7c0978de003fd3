//! Betti number estimation for noisy 2D binary images.
//!
//! The pipeline turns a binary image into a signed squared Euclidean distance
//! field ([`sedt`]), runs a sublevel-set filtration of that field on a cubical
//! complex ([`persistence`]), and reads discrete Betti numbers off the
//! resulting diagrams with a three-parameter window calibrated by exhaustive
//! grid search ([`estimator`]).
//!
//! Around that core live the pieces needed to benchmark it: a synthetic
//! Voronoi dataset generator ([`synth`]), a seeded noise protocol
//! ([`noise`]), grayscale ingestion ([`preprocess`]) and the manifest /
//! evaluation / report machinery ([`harness`]).
//!
//! Interchangeable algorithms sit behind small traits and are looked up by
//! name at runtime: persistence engines via [`persistence::engine`] and
//! corruption models via [`noise::model`].

pub mod error;
pub mod estimator;
pub mod harness;
pub mod noise;
pub mod persistence;
pub mod preprocess;
pub mod raster;
pub mod sedt;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use raster::{BinaryImage, LabelPair};
pub use sedt::ScalarField;
