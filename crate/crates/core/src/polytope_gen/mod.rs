//! Target volumes, the evolutionary polytope search and polytope filtering.

pub mod config;
pub mod evolve;
pub mod filter;
pub mod individual;
pub mod operators;
pub mod volume;

pub use config::{EaConfig, EaParams};
pub use evolve::{evolve, EvolveResult, EvolveSummary};
pub use filter::{filter_polytopes, ScoredPolytope};
pub use individual::{dedup_polytopes, orient_planes, ClusterProblem, EvaluatedPolytope, Individual, ScoreBreakdown};
pub use operators::{crossover, mutate, mutate_with, random_plane_walk, random_polytope, Mutation};
pub use volume::{build_target_volume, OrientedDistance, SignedDistanceGrid};

#[cfg(test)]
mod tests;
