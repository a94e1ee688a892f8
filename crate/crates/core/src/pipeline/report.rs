use serde::{Deserialize, Serialize};

use crate::clustering::ClusteringMethod;
use crate::polytope_gen::EvolveSummary;

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub plane_extraction: f64,
    pub structuring: f64,
    pub clustering: f64,
    pub polytope_generation: f64,
    pub filtering: f64,
}

impl StageTimings {
    pub fn sum(&self) -> f64 {
        self.plane_extraction + self.structuring + self.clustering + self.polytope_generation + self.filtering
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport {
    pub points: usize,
    pub planes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ea: Option<EvolveSummary>,
    /// Why no polytope was searched for this cluster.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolytopeReport {
    pub cluster: usize,
    pub planes: Vec<usize>,
    pub score: f64,
    pub vertices: usize,
    /// Voxel count times cell volume, on a lattice four times finer than the EA's.
    pub volume: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub input_points: usize,
    pub plane_count: usize,
    pub structured_points: usize,
    pub crease_points: usize,
    pub corner_points: usize,
    pub graph_edges: usize,
    pub method: ClusteringMethod,
    pub cluster_count: usize,
    /// Cluster count chosen by the quality score (line-of-sight method only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_k: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub quality_scores: Vec<(usize, f64)>,
    pub clusters: Vec<ClusterReport>,
    pub polytope_count: usize,
    pub polytopes: Vec<PolytopeReport>,
    /// Fraction of structured points near the boundary of some output polytope.
    pub union_fg: f64,
    pub timings: StageTimings,
    pub total_seconds: f64,
}
