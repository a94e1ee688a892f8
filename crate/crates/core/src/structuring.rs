//! Denoised structured cloud: per-plane occupancy grids, plane adjacency, creases and corners.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::OrientedCloud;
use crate::geometry::{centroid, plane_basis, Plane, Point3, Vector3};
use crate::linalg::{condition_number3, solve3};
use crate::scalar::Real;
use crate::spatial::PointIndex;

const MAX_CORNER_CONDITION: f64 = 1e4;
const MIN_CREASE_ANGLE_DEG: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    Planar,
    Crease,
    Corner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredPoint<T> {
    pub position: Point3<T>,
    pub label: PointLabel,
    /// One plane for planar points, two for creases, three or more for corners.
    pub planes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredCloud<T> {
    pub points: Vec<StructuredPoint<T>>,
    pub eps: T,
}

impl<T: Real> StructuredCloud<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Point3<T>> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Normals inherited from the planes a point lies on.
    pub fn normals_of(&self, i: usize, planes: &[Plane<T>]) -> Vec<Vector3<T>> {
        self.points[i].planes.iter().map(|&k| planes[k].normal).collect()
    }

    pub fn count(&self, label: PointLabel) -> usize {
        self.points.iter().filter(|p| p.label == label).count()
    }
}

/// Undirected plane adjacency.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NeighborhoodGraph {
    pub plane_count: usize,
    /// Pairs `(i, j)` with `i < j`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl NeighborhoodGraph {
    pub fn new(plane_count: usize) -> Self {
        Self { plane_count, edges: BTreeSet::new() }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Sorted neighbours of plane `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
            .collect();
        out.sort_unstable();
        out
    }

    /// Complete graph, used when the detected adjacency is known to be incomplete.
    pub fn complete(plane_count: usize) -> Self {
        let mut g = Self::new(plane_count);
        for i in 0..plane_count {
            for j in i + 1..plane_count {
                g.add_edge(i, j);
            }
        }
        g
    }
}

/// Occupied cell centres of the plane's inliers on a grid of cell size `√2 ε`.
pub fn project_occupancy<T: Real>(plane: &Plane<T>, cloud: &OrientedCloud<T>, eps: T) -> Vec<Point3<T>> {
    let pts: Vec<Point3<T>> = plane.inliers.iter().map(|&i| plane.project(&cloud.positions[i])).collect();
    let Some(anchor) = centroid(&pts) else {
        return Vec::new();
    };
    let anchor = plane.project(&anchor);
    let cell = T::SQRT_2() * eps;
    let (u, v) = plane_basis(&plane.normal);
    let mut cells = BTreeSet::new();
    for p in &pts {
        let d = *p - anchor;
        let a = (d.dot(&u) / cell).floor().to_i64().unwrap_or(0);
        let b = (d.dot(&v) / cell).floor().to_i64().unwrap_or(0);
        cells.insert((a, b));
    }
    let half = T::lit(0.5);
    cells
        .into_iter()
        .map(|(a, b)| {
            let c = anchor + u * ((T::lit(a as f64) + half) * cell) + v * ((T::lit(b as f64) + half) * cell);
            plane.project(&c)
        })
        .collect()
}

/// Edge `(i, j)` iff at least two k-NN edges of the raw cloud join an inlier of `i` and one of `j`.
pub fn build_neighborhood_graph<T: Real>(planes: &[Plane<T>], cloud: &OrientedCloud<T>, k: usize) -> NeighborhoodGraph {
    let mut owner = vec![usize::MAX; cloud.len()];
    for (pi, p) in planes.iter().enumerate() {
        for &i in &p.inliers {
            owner[i] = pi;
        }
    }
    let index = PointIndex::new(&cloud.positions);
    let knn: Vec<Vec<usize>> = cloud
        .positions
        .par_iter()
        .enumerate()
        .map(|(i, p)| index.knn(p, k + 1).into_iter().map(|n| n.index).filter(|&j| j != i).take(k).collect())
        .collect();
    let mut point_edges: HashSet<(usize, usize)> = HashSet::new();
    for (i, nb) in knn.iter().enumerate() {
        for &j in nb {
            point_edges.insert((i.min(j), i.max(j)));
        }
    }
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(i, j) in &point_edges {
        let (a, b) = (owner[i], owner[j]);
        if a != usize::MAX && b != usize::MAX && a != b {
            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut g = NeighborhoodGraph::new(planes.len());
    for ((a, b), c) in counts {
        if c >= 2 {
            g.add_edge(a, b);
        }
    }
    g
}

/// Planar occupancy points plus crease samples every `2ε` and corner points.
pub fn extract_features<T: Real>(
    planes: &[Plane<T>],
    graph: &NeighborhoodGraph,
    occupied: &[Vec<Point3<T>>],
    eps: T,
) -> StructuredCloud<T> {
    let mut points: Vec<StructuredPoint<T>> = Vec::new();
    for (pi, occ) in occupied.iter().enumerate() {
        points.extend(occ.iter().map(|p| StructuredPoint { position: *p, label: PointLabel::Planar, planes: vec![pi] }));
    }
    let indices: Vec<Option<PointIndex<T>>> =
        occupied.iter().map(|o| if o.is_empty() { None } else { Some(PointIndex::new(o)) }).collect();
    let reach = T::lit(2.0) * T::SQRT_2() * eps;
    let near = |plane: usize, x: &Point3<T>| {
        indices[plane].as_ref().and_then(|idx| idx.nearest(x)).is_some_and(|n| n.distance_squared <= reach * reach)
    };

    let cos_parallel = T::lit(MIN_CREASE_ANGLE_DEG).to_radians().cos();
    for &(i, j) in &graph.edges {
        let (a, b) = (&planes[i], &planes[j]);
        if a.normal.dot(&b.normal).abs() > cos_parallel {
            log::warn!("planes {i} and {j} are nearly parallel; crease skipped");
            continue;
        }
        for x in crease_samples(a, b, &occupied[i], &occupied[j], eps) {
            if near(i, &x) && near(j, &x) {
                points.push(StructuredPoint { position: x, label: PointLabel::Crease, planes: vec![i, j] });
            }
        }
    }

    let mut corners: Vec<StructuredPoint<T>> = Vec::new();
    for &(i, j) in &graph.edges {
        for k in graph.neighbors(j) {
            if k <= j || !graph.has_edge(i, k) {
                continue;
            }
            let rows = [planes[i].normal.to_array(), planes[j].normal.to_array(), planes[k].normal.to_array()];
            if condition_number3(rows) > T::lit(MAX_CORNER_CONDITION) {
                continue;
            }
            let rhs = [
                planes[i].normal.dot(&planes[i].origin),
                planes[j].normal.dot(&planes[j].origin),
                planes[k].normal.dot(&planes[k].origin),
            ];
            let Some(x) = solve3(rows, rhs) else { continue };
            let x = Point3::from_array(x);
            if !(near(i, &x) && near(j, &x) && near(k, &x)) {
                continue;
            }
            let merge = T::tol();
            if let Some(c) = corners.iter_mut().find(|c| c.position.distance(&x) <= merge) {
                for p in [i, j, k] {
                    if !c.planes.contains(&p) {
                        c.planes.push(p);
                    }
                }
                c.planes.sort_unstable();
            } else {
                corners.push(StructuredPoint { position: x, label: PointLabel::Corner, planes: vec![i, j, k] });
            }
        }
    }
    points.extend(corners);
    StructuredCloud { points, eps }
}

/// Samples spaced `2ε` along the intersection line of `a` and `b`, centred on the
/// overlap of the planes' occupied extents along the line.
fn crease_samples<T: Real>(a: &Plane<T>, b: &Plane<T>, occ_a: &[Point3<T>], occ_b: &[Point3<T>], eps: T) -> Vec<Point3<T>> {
    let Some(dir) = a.normal.cross(&b.normal).try_normalize() else {
        return Vec::new();
    };
    let mut all: Vec<Point3<T>> = occ_a.to_vec();
    all.extend_from_slice(occ_b);
    let Some(mid) = centroid(&all) else {
        return Vec::new();
    };
    let rows = [a.normal.to_array(), b.normal.to_array(), dir.to_array()];
    let Some(x0) = solve3(rows, [a.normal.dot(&a.origin), b.normal.dot(&b.origin), dir.dot(&mid)]) else {
        return Vec::new();
    };
    let x0 = Point3::from_array(x0);
    let reach = T::lit(2.0) * T::SQRT_2() * eps;
    let range = |occ: &[Point3<T>]| {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for p in occ {
            let d = *p - x0;
            let t = d.dot(&dir);
            if (d - dir * t).norm() <= reach {
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
        (lo, hi)
    };
    let (lo_a, hi_a) = range(occ_a);
    let (lo_b, hi_b) = range(occ_b);
    let half_cell = T::SQRT_2() * eps * T::lit(0.5);
    let lo = lo_a.max(lo_b) - half_cell;
    let hi = hi_a.min(hi_b) + half_cell;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Vec::new();
    }
    let step = T::lit(2.0) * eps;
    let len = hi - lo;
    let n = (len / step).floor().to_usize().unwrap_or(0) + 1;
    let start = lo + (len - step * T::from_usize_lossy(n - 1)) * T::lit(0.5);
    (0..n).map(|s| x0 + dir * (start + step * T::from_usize_lossy(s))).collect()
}

/// Full structuring stage: occupancy, adjacency and features.
pub fn structure<T: Real>(planes: &[Plane<T>], cloud: &OrientedCloud<T>, eps: T, k: usize) -> (StructuredCloud<T>, NeighborhoodGraph) {
    let occupied: Vec<Vec<Point3<T>>> = planes.par_iter().map(|p| project_occupancy(p, cloud, eps)).collect();
    let graph = build_neighborhood_graph(planes, cloud, k);
    let structured = extract_features(planes, &graph, &occupied, eps);
    (structured, graph)
}
