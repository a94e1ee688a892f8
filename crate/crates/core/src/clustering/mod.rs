//! Weakly convex clustering of the structured cloud (line-of-sight spectral
//! clustering or WCSEG) and redistribution of all points to the clusters.

pub mod assign;
pub mod config;
pub mod fps;
pub mod kmeans;
pub mod spectral;
pub mod visibility;
pub mod wcseg;

pub use assign::{assign_structured_points, ConvexCluster};
pub use config::{ClusteringConfig, ClusteringMethod};
pub use fps::{farthest_point_sampling, proportional_fps, FpsResult};
pub use spectral::{clustering_quality, estimate_cluster_count, spectral_cluster, CountEstimate, LaplacianKind, SpectralEmbedding};
pub use visibility::{build_surface_patches, build_visibility_graph, Affinity, InteriorCheck, VisibilityContext, VisibilityGraph};
pub use wcseg::{absorb_small_clusters, shape_diameter, wcseg_merge_visible, wcseg_oversegment, wcseg_volumetric_merge, WcsegParams};
