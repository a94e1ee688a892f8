//! Reconstruction of solids as unions of convex polytopes from oriented point clouds.
//!
//! Planes are extracted from the cloud, the cloud is resampled onto them, split into
//! weakly convex clusters, and an evolutionary search picks plane subsets whose
//! halfspace intersections fit each cluster.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar type for the common cases.

// `!(x > 0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloud;
pub mod clustering;
pub mod error;
pub mod extraction;
pub mod geometry;
pub mod linalg;
pub mod pipeline;
pub mod polytope_gen;
pub mod rng;
pub mod scalar;
pub mod spatial;
pub mod structuring;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point = geometry::Point3<f64>;
pub type Plane = geometry::Plane<f64>;
pub type HalfSpace = geometry::HalfSpace<f64>;
pub type ConvexPolytope = geometry::ConvexPolytope<f64>;
pub type OrientedCloud = cloud::OrientedCloud<f64>;
pub type StructuredCloud = structuring::StructuredCloud<f64>;
pub type PipelineConfig = pipeline::PipelineConfig<f64>;
pub type PipelineOutput = pipeline::PipelineOutput<f64>;
pub type ScoredPolytope = polytope_gen::ScoredPolytope<f64>;

pub type Point32 = geometry::Point3<f32>;
pub type Plane32 = geometry::Plane<f32>;
pub type ConvexPolytope32 = geometry::ConvexPolytope<f32>;
pub type OrientedCloud32 = cloud::OrientedCloud<f32>;
pub type PipelineConfig32 = pipeline::PipelineConfig<f32>;
