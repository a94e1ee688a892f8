use std::collections::BTreeMap;

use crate::geometry::Point3;
use crate::scalar::{cmp_real, Real};
use crate::structuring::StructuredCloud;

/// Samples per plane never drop below this, unless the plane has fewer points.
pub const MIN_SAMPLES_PER_PLANE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FpsResult {
    /// Indices into the structured cloud, grouped by plane in ascending plane order.
    pub samples: Vec<usize>,
    /// Planes that had fewer points than the per-plane minimum and were kept whole.
    pub below_minimum: Vec<usize>,
}

/// Greedy farthest point sampling starting from the first point.
/// Ties pick the lowest index. Returns local indices in selection order.
pub fn farthest_point_sampling<T: Real>(points: &[Point3<T>], k: usize) -> Vec<usize> {
    let k = k.min(points.len());
    if k == 0 {
        return Vec::new();
    }
    let mut chosen = vec![0usize];
    let mut dist: Vec<T> = points.iter().map(|p| p.distance_squared(&points[0])).collect();
    while chosen.len() < k {
        let (next, _) = dist
            .iter()
            .enumerate()
            .fold((0usize, T::neg_infinity()), |(bi, bd), (i, d)| if *d > bd { (i, *d) } else { (bi, bd) });
        chosen.push(next);
        let c = points[next];
        for (d, p) in dist.iter_mut().zip(points) {
            let nd = p.distance_squared(&c);
            if cmp_real(&nd, d).is_lt() {
                *d = nd;
            }
        }
    }
    chosen
}

/// Farthest point sampling per primary plane with budget proportional to plane size.
pub fn proportional_fps<T: Real>(structured: &StructuredCloud<T>, k_total: usize) -> FpsResult {
    let total = structured.len();
    if total == 0 {
        return FpsResult::default();
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in structured.points.iter().enumerate() {
        if let Some(&primary) = p.planes.first() {
            groups.entry(primary).or_default().push(i);
        }
    }
    let mut out = FpsResult::default();
    for (plane, members) in groups {
        if members.len() < MIN_SAMPLES_PER_PLANE {
            out.below_minimum.push(plane);
            out.samples.extend(&members);
            continue;
        }
        let share = (k_total as f64 * members.len() as f64 / total as f64).round() as usize;
        let k = share.max(MIN_SAMPLES_PER_PLANE).min(members.len());
        let pts: Vec<Point3<T>> = members.iter().map(|&i| structured.points[i].position).collect();
        out.samples.extend(farthest_point_sampling(&pts, k).into_iter().map(|l| members[l]));
    }
    out
}
