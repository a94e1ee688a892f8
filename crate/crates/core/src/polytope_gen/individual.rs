//! Cluster-level search problem, polytope evaluation cache and individuals.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::geometry::{Aabb, ConvexPolytope, HalfSpace, Plane, Point3};

/// Allowed overhang of a polytope beyond the cluster's bounding box, relative to its diagonal.
const EXTENT_MARGIN: f64 = 0.5;
use crate::polytope_gen::config::EaParams;
use crate::polytope_gen::volume::SignedDistanceGrid;
use crate::scalar::Real;
use crate::structuring::NeighborhoodGraph;

/// A bounded polytope with everything the objective needs, computed once.
#[derive(Debug, Clone)]
pub struct EvaluatedPolytope<T> {
    pub polytope: ConvexPolytope<T>,
    pub voxel_count: usize,
    /// Fraction of voxels inside (or within `eps_vol` of) the target volume.
    pub fp: T,
    /// Bitset over cluster points within `eps_geo` of the polytope boundary.
    near: Vec<u64>,
}

impl<T: Real> EvaluatedPolytope<T> {
    pub fn key(&self) -> &[usize] {
        self.polytope.plane_ids()
    }

    pub fn near_count(&self) -> usize {
        self.near.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Polytope set `I` with its cached objective value.
#[derive(Debug, Clone)]
pub struct Individual<T> {
    pub polytopes: Vec<Arc<EvaluatedPolytope<T>>>,
    pub score: T,
}

impl<T: Real> Individual<T> {
    pub fn len(&self) -> usize {
        self.polytopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polytopes.is_empty()
    }

    /// Per-polytope volume terms.
    pub fn polytope_scores(&self) -> Vec<T> {
        self.polytopes.iter().map(|p| p.fp).collect()
    }

    pub fn plane_sets(&self) -> Vec<Vec<usize>> {
        self.polytopes.iter().map(|p| p.key().to_vec()).collect()
    }
}

/// Objective terms of a polytope set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBreakdown<T> {
    pub fg: T,
    pub fp: T,
    pub total: T,
}

type EvaluationCache<T> = HashMap<Vec<usize>, Option<Arc<EvaluatedPolytope<T>>>>;

/// Per-cluster search problem: oriented candidate planes, target volume and evaluation cache.
pub struct ClusterProblem<'a, T: Real> {
    pub planes: &'a [Plane<T>],
    pub graph: &'a NeighborhoodGraph,
    pub volume: &'a SignedDistanceGrid<T>,
    pub params: &'a EaParams<T>,
    /// Planes of this cluster, sorted. Walks start here.
    pub candidates: Vec<usize>,
    /// Candidates plus their neighbors in the neighborhood graph, sorted.
    pub pool: Vec<usize>,
    /// Outward halfspace per model plane, oriented for this cluster.
    pub oriented: Vec<HalfSpace<T>>,
    pub points: Vec<Point3<T>>,
    /// Polytopes reaching outside this box are rejected.
    extent: Option<Aabb<T>>,
    cache: Mutex<EvaluationCache<T>>,
}

impl<'a, T: Real> ClusterProblem<'a, T> {
    pub fn new(
        planes: &'a [Plane<T>],
        graph: &'a NeighborhoodGraph,
        volume: &'a SignedDistanceGrid<T>,
        params: &'a EaParams<T>,
        candidates: Vec<usize>,
        points: Vec<Point3<T>>,
    ) -> Self {
        let mut candidates = candidates;
        candidates.sort_unstable();
        candidates.dedup();
        let mut pool: Vec<usize> = candidates.iter().flat_map(|&i| graph.neighbors(i)).chain(candidates.iter().copied()).collect();
        pool.sort_unstable();
        pool.dedup();
        let oriented = orient_planes(planes, &points);
        let extent = Aabb::from_points(&points).map(|b| b.expanded(b.diagonal() * T::lit(EXTENT_MARGIN)));
        Self { planes, graph, volume, params, candidates, pool, oriented, points, extent, cache: Mutex::new(HashMap::new()) }
    }

    /// Evaluates the polytope bounded by the given planes; `None` if unbounded, empty,
    /// flat or reaching far beyond the cluster.
    pub fn evaluate(&self, plane_ids: &[usize]) -> Option<Arc<EvaluatedPolytope<T>>> {
        let mut key = plane_ids.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return hit.clone();
        }
        let value = self.compute(&key).map(Arc::new);
        self.cache.lock().expect("cache lock").insert(key, value.clone());
        value
    }

    pub fn evaluations(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    fn compute(&self, key: &[usize]) -> Option<EvaluatedPolytope<T>> {
        let labelled = key.iter().map(|&i| (i, self.oriented[i])).collect();
        let polytope = ConvexPolytope::from_halfspaces(labelled).ok()?;
        // Nearly parallel opposing planes can close far away; such wedges are not candidates.
        if let Some(ext) = &self.extent {
            let bb = polytope.bounding_box();
            if (0..3).any(|i| bb.min[i] < ext.min[i] || bb.max[i] > ext.max[i]) {
                return None;
            }
        }
        self.measure(polytope)
    }

    /// Objective terms of an arbitrary bounded polytope against this cluster.
    pub fn measure(&self, polytope: ConvexPolytope<T>) -> Option<EvaluatedPolytope<T>> {
        let voxels = polytope.voxelize(self.params.voxel_cell).ok()?;
        let inside = voxels.centers.iter().filter(|c| self.volume.value(c) < self.params.eps_vol).count();
        let fp = if voxels.is_empty() { T::zero() } else { T::from_usize_lossy(inside) / T::from_usize_lossy(voxels.len()) };
        let mut near = vec![0u64; self.points.len().div_ceil(64)];
        for (i, p) in self.points.iter().enumerate() {
            if polytope.signed_distance(p).abs() < self.params.eps_geo {
                near[i / 64] |= 1 << (i % 64);
            }
        }
        Some(EvaluatedPolytope { polytope, voxel_count: voxels.len(), fp, near })
    }

    /// `α F_g + β F_p − γ |I| / n_I_max`.
    pub fn score_terms(&self, polytopes: &[Arc<EvaluatedPolytope<T>>]) -> ScoreBreakdown<T> {
        let p = self.params;
        let n = self.points.len();
        let fg = if n == 0 || polytopes.is_empty() {
            T::zero()
        } else {
            let mut acc = vec![0u64; n.div_ceil(64)];
            for poly in polytopes {
                for (a, w) in acc.iter_mut().zip(&poly.near) {
                    *a |= *w;
                }
            }
            let covered: usize = acc.iter().map(|w| w.count_ones() as usize).sum();
            T::from_usize_lossy(covered) / T::from_usize_lossy(n)
        };
        let mut fp: T = polytopes.iter().map(|q| q.fp).sum();
        if p.normalize_fp && !polytopes.is_empty() {
            fp /= T::from_usize_lossy(polytopes.len());
        }
        let size = T::from_usize_lossy(polytopes.len()) / T::from_usize_lossy(p.n_i_max);
        ScoreBreakdown { fg, fp, total: p.alpha * fg + p.beta * fp - p.gamma * size }
    }

    pub fn individual(&self, polytopes: Vec<Arc<EvaluatedPolytope<T>>>) -> Individual<T> {
        let polytopes = dedup_polytopes(polytopes);
        let score = self.score_terms(&polytopes).total;
        Individual { polytopes, score }
    }
}

/// Drops repeated polytopes (same facet planes), keeping first occurrences.
pub fn dedup_polytopes<T: Real>(polytopes: Vec<Arc<EvaluatedPolytope<T>>>) -> Vec<Arc<EvaluatedPolytope<T>>> {
    let mut seen = std::collections::HashSet::new();
    polytopes.into_iter().filter(|p| seen.insert(p.key().to_vec())).collect()
}

/// Orients every plane so that nearby cluster points lie on its inner side.
///
/// The sign of the mean of `dot(n, p - o)` over points within a quarter of the
/// cluster's bounding-box diagonal decides; all points are used if none is that close.
pub fn orient_planes<T: Real>(planes: &[Plane<T>], points: &[Point3<T>]) -> Vec<HalfSpace<T>> {
    let band = crate::geometry::Aabb::from_points(points).map(|b| b.diagonal() * T::lit(0.25)).unwrap_or_else(T::infinity);
    planes
        .iter()
        .map(|pl| {
            let offsets: Vec<T> = points.iter().map(|p| pl.signed_offset(p)).collect();
            let near: Vec<T> = offsets.iter().copied().filter(|d| d.abs() <= band).collect();
            let used = if near.is_empty() { &offsets } else { &near };
            let mean = if used.is_empty() { T::zero() } else { used.iter().copied().sum::<T>() / T::from_usize_lossy(used.len()) };
            let h = HalfSpace::from_plane(pl);
            if mean > T::zero() {
                h.flipped()
            } else {
                h
            }
        })
        .collect()
}
