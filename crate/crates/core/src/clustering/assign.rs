use serde::{Deserialize, Serialize};

use crate::geometry::Point3;
use crate::scalar::Real;
use crate::spatial::PointIndex;
use crate::structuring::StructuredCloud;

/// Weakly convex point subset `O_c` with its plane subset `P_c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexCluster {
    /// Sorted indices into the structured cloud.
    pub points: Vec<usize>,
    /// Sorted plane indices owning at least one point of the cluster.
    pub planes: Vec<usize>,
}

impl ConvexCluster {
    pub fn from_points<T: Real>(mut points: Vec<usize>, structured: &StructuredCloud<T>) -> Self {
        points.sort_unstable();
        points.dedup();
        let mut planes: Vec<usize> = points.iter().flat_map(|&i| structured.points[i].planes.iter().copied()).collect();
        planes.sort_unstable();
        planes.dedup();
        Self { points, planes }
    }
}

/// Every structured point joins the cluster of its nearest clustered point;
/// equidistant candidates resolve to the lowest cluster index.
pub fn assign_structured_points<T: Real>(clusters: &[Vec<usize>], structured: &StructuredCloud<T>) -> Vec<ConvexCluster> {
    let mut seeds: Vec<Point3<T>> = Vec::new();
    let mut seed_label: Vec<usize> = Vec::new();
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            seeds.push(structured.points[i].position);
            seed_label.push(c);
        }
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
    if seeds.is_empty() {
        return Vec::new();
    }
    let index = PointIndex::new(&seeds);
    for (i, p) in structured.points.iter().enumerate() {
        let nb = index.knn(&p.position, 8);
        let best = nb[0].distance_squared;
        let label = nb
            .iter()
            .filter(|n| n.distance_squared == best)
            .map(|n| seed_label[n.index])
            .min()
            .expect("non-empty neighbour list");
        out[label].push(i);
    }
    out.into_iter()
        .filter(|m| !m.is_empty())
        .map(|m| ConvexCluster::from_points(m, structured))
        .collect()
}
