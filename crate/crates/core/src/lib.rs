//! Forecasting the next-year conference output of research institutions.
//!
//! The pipeline runs [`corpus`] → [`scimetrics`] → [`featureset`] →
//! [`boost`] → [`select`] / [`rankeval`]. [`synth`] generates corpora with a
//! planted author-driven signal for end-to-end checks.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar used by the experiment pipeline.

pub mod boost;
pub mod corpus;
pub mod featureset;
pub mod rankeval;
pub mod scalar;
pub mod scimetrics;
pub mod select;
pub mod synth;

pub use scalar::Scalar;

/// Scalar used by the experiment pipeline.
pub type Real = f64;

pub type Model = boost::BoostedModel<Real>;
pub type Tree = boost::TreeNode<Real>;
pub type Matrix = boost::FeatureMatrix<Real>;
pub type ModelF32 = boost::BoostedModel<f32>;
pub type TreeF32 = boost::TreeNode<f32>;
pub type MatrixF32 = boost::FeatureMatrix<f32>;
pub type Sweep = select::SelectionSweep<Real>;
