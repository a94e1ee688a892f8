//! Configuration, file formats, synthetic models and the end-to-end run.

pub mod config;
pub mod io;
pub mod report;
pub mod run;
pub mod synth;

pub use config::{OutputConfig, PipelineConfig, StructuringConfig, VolumeConfig};
pub use io::{export_polytopes, import_polytopes_json, load_pointcloud, write_xyz, ExportFormat, LoadedCloud, PolytopeDocument};
pub use report::{ClusterReport, PolytopeReport, RunReport, StageTimings};
pub use run::{cluster_structured, generate_cluster_polytopes, run_pipeline, ClusteringOutcome, PipelineOutput};
pub use synth::{density_for_points, generate_synthetic, ground_truth, GroundTruth, SyntheticModel};
