//! End-to-end orchestration.

use std::time::Instant;

use rayon::prelude::*;

use crate::cloud::OrientedCloud;
use crate::clustering::{
    assign_structured_points, build_surface_patches, build_visibility_graph, estimate_cluster_count, proportional_fps,
    absorb_small_clusters, wcseg_merge_visible, wcseg_oversegment, wcseg_volumetric_merge, ClusteringConfig, ClusteringMethod, ConvexCluster,
    InteriorCheck, VisibilityContext,
};
use crate::error::{Error, Result};
use crate::extraction::extract_planes;
use crate::geometry::{Plane, Point3, TrianglePatch, Vector3};
use crate::pipeline::config::PipelineConfig;
use crate::pipeline::report::{ClusterReport, PolytopeReport, RunReport, StageTimings};
use crate::polytope_gen::{
    build_target_volume, evolve, filter_polytopes, ClusterProblem, EaParams, EvolveResult, ScoredPolytope,
    SignedDistanceGrid,
};
use crate::rng::derive_seed;
use crate::scalar::Real;
use crate::spatial::knn_adjacency;
use crate::structuring::{structure, NeighborhoodGraph, PointLabel, StructuredCloud};

const TAG_CLUSTER: u64 = 0x434c_5553;
const TAG_EA: u64 = 0x4541;
/// The reported polytope volumes use a lattice this many times finer than the EA's.
const REPORT_REFINEMENT: f64 = 4.0;

/// Everything the pipeline produced.
#[derive(Debug, Clone)]
pub struct PipelineOutput<T> {
    pub polytopes: Vec<ScoredPolytope<T>>,
    pub report: RunReport,
    pub planes: Vec<Plane<T>>,
    pub structured: StructuredCloud<T>,
    pub graph: NeighborhoodGraph,
    pub clusters: Vec<ConvexCluster>,
}

/// Result of the clustering stage.
#[derive(Debug, Clone)]
pub struct ClusteringOutcome {
    pub clusters: Vec<ConvexCluster>,
    pub selected_k: Option<usize>,
    pub quality_scores: Vec<(usize, f64)>,
    /// Structured point indices used as line-of-sight samples.
    pub samples: Vec<usize>,
}

/// Unit normal of a structured point: the mean of its planes' normals.
fn point_normal<T: Real>(planes: &[Plane<T>], ids: &[usize]) -> Option<Vector3<T>> {
    ids.iter().fold(Vector3::zero(), |a, &k| a + planes[k].normal).try_normalize()
}

/// Signed distance estimate of the whole structured solid, used to reject
/// visibility segments that leave it.
fn global_volume<T: Real>(structured: &StructuredCloud<T>, planes: &[Plane<T>], eps: T) -> Option<SignedDistanceGrid<T>> {
    let (pts, nrm): (Vec<Point3<T>>, Vec<Vector3<T>>) = structured
        .points
        .iter()
        .filter(|p| p.label == PointLabel::Planar)
        .filter_map(|p| point_normal(planes, &p.planes).map(|n| (p.position, n)))
        .unzip();
    let cell = T::lit(2.0) * eps;
    build_target_volume(&pts, &nrm, cell, T::lit(2.0) * cell).ok()
}

/// Runs the configured clustering method and redistributes all structured points.
pub fn cluster_structured<T: Real>(
    structured: &StructuredCloud<T>,
    planes: &[Plane<T>],
    cfg: &ClusteringConfig<T>,
    eps: T,
    seed: u64,
) -> Result<ClusteringOutcome> {
    cfg.validate()?;
    if structured.is_empty() {
        return Err(Error::Clustering("structured cloud is empty".into()));
    }
    let patches: Vec<TrianglePatch<T>> = build_surface_patches(structured, planes, cfg.alpha_factor * eps);
    let volume = if cfg.interior_check { global_volume(structured, planes, eps) } else { None };
    let ctx = VisibilityContext {
        patches: &patches,
        guard: cfg.guard_factor * eps,
        interior: volume.as_ref().map(|v| InteriorCheck { volume: v, threshold: T::lit(2.0) * eps }),
    };
    let positions = structured.positions();
    let seed = derive_seed(seed, TAG_CLUSTER, 0);
    match cfg.method {
        ClusteringMethod::Los => {
            let fps = proportional_fps(structured, cfg.k_total.min(structured.len()));
            if !fps.below_minimum.is_empty() {
                log::warn!("{} planes have fewer than 3 structured points", fps.below_minimum.len());
            }
            let samples = fps.samples;
            let graph = build_visibility_graph(samples.iter().map(|&i| positions[i]).collect(), &ctx);
            log::info!("visibility graph: {} samples, density {:.3}", samples.len(), graph.affinity.density());
            let est = estimate_cluster_count(&graph, (cfg.k_min, cfg.k_max), cfg.alpha_q, cfg.laplacian, seed)?;
            let mut groups = vec![Vec::new(); est.k];
            for (&s, &l) in samples.iter().zip(&est.labels) {
                groups[l].push(s);
            }
            groups.retain(|g| !g.is_empty());
            Ok(ClusteringOutcome {
                clusters: assign_structured_points(&groups, structured),
                selected_k: Some(est.k),
                quality_scores: est.scores,
                samples,
            })
        }
        ClusteringMethod::Wcseg => {
            let params = cfg.wcseg_params();
            let adjacency = knn_adjacency(&positions, params.knn);
            let patches_over = {
                let radius = cfg.wcseg_patch_radius * eps;
                wcseg_oversegment(structured, planes, &adjacency, params.angle_deg, (radius > T::zero()).then_some(radius))
            };
            log::info!("wcseg: {} initial patches", patches_over.len());
            let merged = wcseg_merge_visible(patches_over, &adjacency, &positions, &ctx, params.visibility_threshold, params.max_pairs, seed);
            log::info!("wcseg: {} clusters after visibility merge, sizes {:?}", merged.len(), merged.iter().map(Vec::len).collect::<Vec<_>>());
            let min_size = (params.min_cluster_fraction * structured.len() as f64).ceil() as usize;
            let merged = absorb_small_clusters(merged, &adjacency, min_size);
            let merged = wcseg_volumetric_merge(merged, &adjacency, structured, planes, &patches, &params, &ctx, seed);
            log::info!("wcseg: {} clusters after volumetric merge", merged.len());
            Ok(ClusteringOutcome {
                clusters: assign_structured_points(&merged, structured),
                selected_k: None,
                quality_scores: Vec::new(),
                samples: Vec::new(),
            })
        }
    }
}

/// Target volume and evolutionary search for one cluster.
#[allow(clippy::too_many_arguments)]
pub fn generate_cluster_polytopes<T: Real>(
    cluster: &ConvexCluster,
    structured: &StructuredCloud<T>,
    planes: &[Plane<T>],
    graph: &NeighborhoodGraph,
    params: &EaParams<T>,
    volume_cell: T,
    volume_pad: T,
    seed: u64,
) -> Result<EvolveResult<T>> {
    let points: Vec<Point3<T>> = cluster.points.iter().map(|&i| structured.points[i].position).collect();
    let (vp, vn): (Vec<Point3<T>>, Vec<Vector3<T>>) = cluster
        .points
        .iter()
        .filter_map(|&i| {
            let p = &structured.points[i];
            point_normal(planes, &p.planes).map(|n| (p.position, n))
        })
        .unzip();
    let volume = build_target_volume(&vp, &vn, volume_cell, volume_pad)?;
    let candidates = if params.use_all_planes { (0..planes.len()).collect() } else { cluster.planes.clone() };
    let problem = ClusterProblem::new(planes, graph, &volume, params, candidates, points);
    evolve(&problem, seed)
}

fn union_fg<T: Real>(polytopes: &[ScoredPolytope<T>], structured: &StructuredCloud<T>, eps_geo: T) -> f64 {
    if structured.is_empty() || polytopes.is_empty() {
        return 0.0;
    }
    let near = structured
        .points
        .par_iter()
        .filter(|p| polytopes.iter().any(|s| s.polytope.signed_distance(&p.position).abs() < eps_geo))
        .count();
    near as f64 / structured.len() as f64
}

/// Plane extraction, structuring, clustering, per-cluster polytope search and filtering.
pub fn run_pipeline<T: Real>(cloud: &OrientedCloud<T>, cfg: &PipelineConfig<T>) -> Result<PipelineOutput<T>> {
    cfg.validate()?;
    let start = Instant::now();
    let mut timings = StageTimings::default();
    let diagonal = cloud.diagonal();
    if cloud.len() < 10 || !(diagonal > T::zero()) {
        return Err(Error::TooFewPoints(cloud.len()).in_stage("plane_extraction"));
    }

    let t = Instant::now();
    let ext_params = cfg.extraction.resolve(diagonal).map_err(|e| e.in_stage("plane_extraction"))?;
    let planes = extract_planes(cloud, &ext_params, cfg.rng_seed).map_err(|e| e.in_stage("plane_extraction"))?.planes;
    if planes.is_empty() {
        return Err(Error::NoPlanes.in_stage("plane_extraction"));
    }
    timings.plane_extraction = t.elapsed().as_secs_f64();
    log::info!("{} planes", planes.len());

    let t = Instant::now();
    let eps = cfg.structuring.eps.unwrap_or(T::lit(0.01) * diagonal);
    let (structured, graph) = structure(&planes, cloud, eps, cfg.structuring.knn);
    timings.structuring = t.elapsed().as_secs_f64();
    log::info!("{} structured points, {} graph edges", structured.len(), graph.edges.len());

    let t = Instant::now();
    let outcome = cluster_structured(&structured, &planes, &cfg.clustering, eps, cfg.rng_seed).map_err(|e| e.in_stage("clustering"))?;
    timings.clustering = t.elapsed().as_secs_f64();
    log::info!("{} clusters", outcome.clusters.len());

    let t = Instant::now();
    let params = cfg.ea.resolve(diagonal, eps).map_err(|e| e.in_stage("polytope_generation"))?;
    let cell = cfg.volume.cell.unwrap_or(params.voxel_cell);
    let pad = cfg.volume.pad_cells * cell;
    let results: Vec<Result<EvolveResult<T>>> = outcome
        .clusters
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let seed = derive_seed(cfg.rng_seed, TAG_EA, i as u64);
            generate_cluster_polytopes(c, &structured, &planes, &graph, &params, cell, pad, seed)
        })
        .collect();
    let mut cluster_reports = Vec::with_capacity(results.len());
    let mut candidates = Vec::new();
    let mut first_error = None;
    for (i, (c, r)) in outcome.clusters.iter().zip(results).enumerate() {
        let mut report = ClusterReport { points: c.points.len(), planes: c.planes.clone(), ea: None, skipped: None };
        match r {
            Ok(res) => {
                report.ea = Some(res.summary());
                candidates.extend(res.best.polytopes.iter().map(|p| ScoredPolytope { cluster: i, score: p.fp, polytope: p.polytope.clone() }));
            }
            Err(e @ (Error::InsufficientSupport(_) | Error::NoBoundedPolytope)) => {
                log::warn!("cluster {i} skipped: {e}");
                report.skipped = Some(e.to_string());
                first_error.get_or_insert(e);
            }
            Err(e) => return Err(e.in_stage("polytope_generation")),
        }
        cluster_reports.push(report);
    }
    if candidates.is_empty() {
        return Err(first_error.unwrap_or(Error::NoBoundedPolytope).in_stage("polytope_generation"));
    }
    timings.polytope_generation = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let polytopes = filter_polytopes(candidates, params.filter_threshold);
    let fg = union_fg(&polytopes, &structured, params.eps_geo);
    let polytope_reports = polytopes
        .iter()
        .map(|s| PolytopeReport {
            cluster: s.cluster,
            planes: s.polytope.plane_ids().to_vec(),
            score: s.score.as_f64(),
            vertices: s.polytope.vertices().len(),
            volume: s.polytope.voxelize(params.voxel_cell / T::lit(REPORT_REFINEMENT)).map(|v| v.volume().as_f64()).unwrap_or(0.0),
        })
        .collect();
    timings.filtering = t.elapsed().as_secs_f64();

    let report = RunReport {
        input_points: cloud.len(),
        plane_count: planes.len(),
        structured_points: structured.len(),
        crease_points: structured.count(PointLabel::Crease),
        corner_points: structured.count(PointLabel::Corner),
        graph_edges: graph.edges.len(),
        method: cfg.clustering.method,
        cluster_count: outcome.clusters.len(),
        selected_k: outcome.selected_k,
        quality_scores: outcome.quality_scores,
        clusters: cluster_reports,
        polytope_count: polytopes.len(),
        polytopes: polytope_reports,
        union_fg: fg,
        timings,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(PipelineOutput { polytopes, report, planes, structured, graph, clusters: outcome.clusters })
}
