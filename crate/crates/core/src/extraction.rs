//! Plane detection: DBSCAN pre-clustering, per-cluster RANSAC and coplanar merging.

use std::collections::VecDeque;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::OrientedCloud;
use crate::error::{Error, Result};
use crate::geometry::{Plane, Point3};
use crate::rng::{seeded, Rng};
use crate::scalar::Real;
use crate::spatial::KdIndex;

const RANSAC_SUCCESS_PROBABILITY: f64 = 0.999;
const RANSAC_MAX_ITERATIONS: usize = 10_000;

/// Plane extraction parameters. Lengths left as `None` are derived from the
/// bounding-box diagonal by [`ExtractionConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ExtractionConfig<T> {
    pub eps_fit: Option<T>,
    pub theta_fit_deg: T,
    pub dbscan_radius: Option<T>,
    pub dbscan_min_pts: usize,
    pub feature_normal_weight: Option<T>,
    pub min_inliers: usize,
    pub merge_angle_deg: T,
    pub merge_offset: Option<T>,
}

impl<T: Real> Default for ExtractionConfig<T> {
    fn default() -> Self {
        Self {
            eps_fit: None,
            theta_fit_deg: T::lit(20.0),
            dbscan_radius: None,
            dbscan_min_pts: 10,
            feature_normal_weight: None,
            min_inliers: 50,
            merge_angle_deg: T::lit(5.0),
            merge_offset: None,
        }
    }
}

/// Extraction parameters with every length made concrete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionParams<T> {
    pub eps_fit: T,
    pub theta_fit_deg: T,
    pub dbscan_radius: T,
    pub dbscan_min_pts: usize,
    pub feature_normal_weight: T,
    pub min_inliers: usize,
    pub merge_angle_deg: T,
    pub merge_offset: T,
}

impl<T: Real> ExtractionConfig<T> {
    pub fn resolve(&self, diagonal: T) -> Result<ExtractionParams<T>> {
        let eps_fit = self.eps_fit.unwrap_or(T::lit(0.01) * diagonal);
        let dbscan_radius = self.dbscan_radius.unwrap_or(T::lit(0.03) * diagonal);
        let theta = self.theta_fit_deg;
        let w = self
            .feature_normal_weight
            .unwrap_or_else(|| T::lit(0.5) * dbscan_radius / theta.to_radians().sin());
        let p = ExtractionParams {
            eps_fit,
            theta_fit_deg: theta,
            dbscan_radius,
            dbscan_min_pts: self.dbscan_min_pts,
            feature_normal_weight: w,
            min_inliers: self.min_inliers,
            merge_angle_deg: self.merge_angle_deg,
            merge_offset: self.merge_offset.unwrap_or(T::lit(2.0) * eps_fit),
        };
        p.validate()?;
        Ok(p)
    }
}

impl<T: Real> ExtractionParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.eps_fit, self.theta_fit_deg, self.dbscan_radius, self.feature_normal_weight, self.merge_angle_deg, self.merge_offset];
        if positive.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) || self.dbscan_min_pts == 0 || self.min_inliers == 0 {
            return Err(Error::Config("extraction parameters must be positive".into()));
        }
        if self.theta_fit_deg >= T::lit(90.0) {
            return Err(Error::Config("extraction.theta_fit_deg must be below 90".into()));
        }
        if self.merge_angle_deg >= T::lit(45.0) {
            return Err(Error::Config("extraction.merge_angle_deg must be below 45".into()));
        }
        Ok(())
    }

    fn cos_theta(&self) -> T {
        self.theta_fit_deg.to_radians().cos()
    }
}

/// DBSCAN clustering result.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DbscanResult {
    /// Clusters of point indices, each sorted, ordered by smallest member.
    pub clusters: Vec<Vec<usize>>,
    pub noise: Vec<usize>,
}

/// DBSCAN in the 6-D space `position ⊕ w · normal`.
pub fn dbscan_cluster<T: Real>(cloud: &OrientedCloud<T>, params: &ExtractionParams<T>) -> DbscanResult {
    let n = cloud.len();
    if n == 0 {
        return DbscanResult::default();
    }
    let w = params.feature_normal_weight;
    let features: Vec<[T; 6]> = cloud
        .positions
        .iter()
        .zip(&cloud.normals)
        .map(|(p, m)| [p.x, p.y, p.z, m.x * w, m.y * w, m.z * w])
        .collect();
    let index = KdIndex::<T, 6>::from_coords(features.clone());
    let neighbours: Vec<Vec<usize>> = features
        .par_iter()
        .map(|f| index.within_coords(*f, params.dbscan_radius))
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= params.dbscan_min_pts).collect();

    const UNVISITED: usize = usize::MAX;
    let mut label = vec![UNVISITED; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for seed in 0..n {
        if label[seed] != UNVISITED || !core[seed] {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![seed];
        label[seed] = id;
        let mut queue = VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            if !core[p] {
                continue;
            }
            for &q in &neighbours[p] {
                if label[q] == UNVISITED {
                    label[q] = id;
                    members.push(q);
                    queue.push_back(q);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    let noise = (0..n).filter(|&i| label[i] == UNVISITED).collect();
    DbscanResult { clusters, noise }
}

/// RANSAC plane fit over `indices` followed by a least-squares refit.
pub fn ransac_fit_plane<T: Real>(
    indices: &[usize],
    cloud: &OrientedCloud<T>,
    params: &ExtractionParams<T>,
    rng_seed: u64,
) -> Option<Plane<T>> {
    ransac_with_rng(indices, cloud, params, &mut seeded(rng_seed))
}

fn ransac_with_rng<T: Real>(
    indices: &[usize],
    cloud: &OrientedCloud<T>,
    params: &ExtractionParams<T>,
    rng: &mut Rng,
) -> Option<Plane<T>> {
    let n = indices.len();
    if n < 3 || n < params.min_inliers {
        return None;
    }
    let cos_theta = params.cos_theta();
    let count = |plane: &Plane<T>| {
        indices
            .iter()
            .filter(|&&i| is_inlier(plane, cloud, i, params.eps_fit, cos_theta))
            .count()
    };

    let mut best: Option<(Plane<T>, usize)> = None;
    let mut needed = RANSAC_MAX_ITERATIONS;
    let mut iter = 0;
    while iter < needed.min(RANSAC_MAX_ITERATIONS) {
        iter += 1;
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let mut c = rng.gen_range(0..n - 2);
        for lo in [a.min(b), a.max(b)] {
            if c >= lo {
                c += 1;
            }
        }
        let Some(plane) = Plane::through(
            &cloud.positions[indices[a]],
            &cloud.positions[indices[b]],
            &cloud.positions[indices[c]],
        ) else {
            continue;
        };
        let k = count(&plane);
        if best.as_ref().is_none_or(|(_, bk)| k > *bk) {
            best = Some((plane, k));
            let ratio = k as f64 / n as f64;
            needed = adaptive_iterations(ratio);
        }
    }
    let (plane, _) = best?;
    let inliers: Vec<usize> = indices
        .iter()
        .copied()
        .filter(|&i| is_inlier(&plane, cloud, i, params.eps_fit, cos_theta))
        .collect();
    let refit = refit_plane(&inliers, cloud).unwrap_or(plane);
    let mut inliers: Vec<usize> = indices
        .iter()
        .copied()
        .filter(|&i| is_inlier(&refit, cloud, i, params.eps_fit, cos_theta))
        .collect();
    if inliers.len() < params.min_inliers.max(3) {
        return None;
    }
    inliers.sort_unstable();
    Some(orient_to_normals(refit, cloud, &inliers).with_inliers(inliers))
}

fn adaptive_iterations(inlier_ratio: f64) -> usize {
    let w3 = inlier_ratio.powi(3);
    if w3 >= 1.0 - 1e-12 {
        return 1;
    }
    if w3 <= 0.0 {
        return RANSAC_MAX_ITERATIONS;
    }
    let k = (1.0 - RANSAC_SUCCESS_PROBABILITY).ln() / (1.0 - w3).ln();
    (k.ceil() as usize).clamp(1, RANSAC_MAX_ITERATIONS)
}

#[inline]
fn is_inlier<T: Real>(plane: &Plane<T>, cloud: &OrientedCloud<T>, i: usize, eps: T, cos_theta: T) -> bool {
    plane.distance(&cloud.positions[i]) <= eps && plane.normal.dot(&cloud.normals[i]).abs() >= cos_theta
}

fn refit_plane<T: Real>(indices: &[usize], cloud: &OrientedCloud<T>) -> Option<Plane<T>> {
    let pts: Vec<Point3<T>> = indices.iter().map(|&i| cloud.positions[i]).collect();
    Plane::fit(&pts)
}

/// Flips the plane so that its normal agrees with the majority of point normals.
fn orient_to_normals<T: Real>(plane: Plane<T>, cloud: &OrientedCloud<T>, inliers: &[usize]) -> Plane<T> {
    let s: T = inliers.iter().map(|&i| plane.normal.dot(&cloud.normals[i])).sum();
    if s < T::zero() {
        plane.flipped()
    } else {
        plane
    }
}

/// Greedy merge of nearly coplanar planes with least-squares refits.
///
/// A merge is kept only if the refit plane still holds every union inlier within `eps_fit`.
pub fn merge_coplanar<T: Real>(planes: Vec<Plane<T>>, cloud: &OrientedCloud<T>, params: &ExtractionParams<T>) -> Vec<Plane<T>> {
    let cos_merge = params.merge_angle_deg.to_radians().cos();
    let mut planes = planes;
    let mut i = 0;
    while i < planes.len() {
        let mut j = i + 1;
        while j < planes.len() {
            let (a, b) = (&planes[i], &planes[j]);
            if a.normal.dot(&b.normal) >= cos_merge && a.mutual_offset(b) <= params.merge_offset {
                let mut union: Vec<usize> = a.inliers.iter().chain(&b.inliers).copied().collect();
                union.sort_unstable();
                union.dedup();
                if let Some(fit) = refit_plane(&union, cloud) {
                    if union.iter().all(|&k| fit.distance(&cloud.positions[k]) <= params.eps_fit) {
                        let fit = if fit.normal.dot(&a.normal) < T::zero() { fit.flipped() } else { fit };
                        planes[i] = fit.with_inliers(union);
                        planes.remove(j);
                        j = i + 1;
                        continue;
                    }
                }
            }
            j += 1;
        }
        i += 1;
    }
    // Make inlier sets disjoint, first plane wins.
    let mut owner = std::collections::HashSet::new();
    for p in &mut planes {
        p.inliers.retain(|k| owner.insert(*k));
    }
    planes.retain(|p| !p.inliers.is_empty());
    planes
}

/// Planes with their inlier lists, and the indices explained by no plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction<T> {
    pub planes: Vec<Plane<T>>,
    pub residual: Vec<usize>,
}

/// DBSCAN, repeated per-cluster RANSAC, then coplanar merging.
pub fn extract_planes<T: Real>(cloud: &OrientedCloud<T>, params: &ExtractionParams<T>, rng_seed: u64) -> Result<Extraction<T>> {
    if cloud.is_empty() {
        return Err(Error::NoPlanes);
    }
    let db = dbscan_cluster(cloud, params);
    let per_cluster: Vec<Vec<Plane<T>>> = db
        .clusters
        .par_iter()
        .enumerate()
        .map(|(ci, members)| {
            let mut rng = seeded(rng_seed.wrapping_add(ci as u64));
            let mut remaining = members.clone();
            let mut found = Vec::new();
            while remaining.len() >= params.min_inliers {
                let Some(plane) = ransac_with_rng(&remaining, cloud, params, &mut rng) else {
                    break;
                };
                remaining.retain(|i| plane.inliers.binary_search(i).is_err());
                found.push(plane);
            }
            found
        })
        .collect();
    let planes = merge_coplanar(per_cluster.into_iter().flatten().collect(), cloud, params);
    if planes.is_empty() {
        return Err(Error::NoPlanes);
    }
    let mut assigned = vec![false; cloud.len()];
    for p in &planes {
        for &i in &p.inliers {
            assigned[i] = true;
        }
    }
    let residual = (0..cloud.len()).filter(|&i| !assigned[i]).collect();
    Ok(Extraction { planes, residual })
}
