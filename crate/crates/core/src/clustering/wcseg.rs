//! Weakly convex segmentation: region growing, visibility merging and SDF merging.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::index::sample;
use rand::Rng as _;

use crate::clustering::visibility::VisibilityContext;
use crate::geometry::{plane_basis, ray_hit, Plane, Point3, TrianglePatch, Vector3};
use crate::rng::substream;
use crate::scalar::{cmp_real, Real};
use crate::structuring::StructuredCloud;

/// WCSEG parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcsegParams<T> {
    pub angle_deg: T,
    pub knn: usize,
    /// Minimum fraction of mutually visible pairs for a visibility merge.
    pub visibility_threshold: f64,
    /// Pairs tested per cluster pair.
    pub max_pairs: usize,
    pub sdf_rays: usize,
    pub sdf_half_angle_deg: T,
    pub sdf_threshold: T,
    /// Points per cluster whose SDF is evaluated.
    pub sdf_samples: usize,
    /// Clusters must also reach this visibility fraction to merge on SDF; 0 disables the check.
    pub sdf_visibility_floor: f64,
    /// Clusters below this fraction of all points are absorbed by a neighbor.
    pub min_cluster_fraction: f64,
}

/// Point normals inherited from the planes (one per plane the point lies on).
fn point_normals<T: Real>(structured: &StructuredCloud<T>, planes: &[Plane<T>]) -> Vec<Vec<Vector3<T>>> {
    (0..structured.len()).map(|i| structured.normals_of(i, planes)).collect()
}

/// Region growing over the k-NN graph: a point joins a region if one of its
/// normals is within `angle_deg` of the region's mean normal and, when
/// `max_radius` is set, it lies within that distance of the region's seed.
pub fn wcseg_oversegment<T: Real>(
    structured: &StructuredCloud<T>,
    planes: &[Plane<T>],
    adjacency: &[Vec<usize>],
    angle_deg: T,
    max_radius: Option<T>,
) -> Vec<Vec<usize>> {
    let normals = point_normals(structured, planes);
    let cos_limit = angle_deg.to_radians().cos();
    let n = structured.len();
    let mut region = vec![usize::MAX; n];
    let mut patches = Vec::new();
    for seed in 0..n {
        if region[seed] != usize::MAX {
            continue;
        }
        let id = patches.len();
        let mut sum = normals[seed].first().copied().unwrap_or_else(Vector3::zero);
        let mut members = vec![seed];
        region[seed] = id;
        let mut queue = VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            for &q in &adjacency[p] {
                if region[q] != usize::MAX {
                    continue;
                }
                if max_radius.is_some_and(|r| structured.points[q].position.distance(&structured.points[seed].position) > r) {
                    continue;
                }
                let mean = sum.normalized();
                if let Some(nq) = normals[q].iter().find(|m| m.dot(&mean) >= cos_limit) {
                    sum += *nq;
                    region[q] = id;
                    members.push(q);
                    queue.push_back(q);
                }
            }
        }
        members.sort_unstable();
        patches.push(members);
    }
    patches
}

/// Labels per point from a partition.
fn labels_of(n: usize, clusters: &[Vec<usize>]) -> Vec<usize> {
    let mut l = vec![usize::MAX; n];
    for (c, m) in clusters.iter().enumerate() {
        for &i in m {
            l[i] = c;
        }
    }
    l
}

/// Cluster pairs joined by at least one k-NN edge.
fn cluster_adjacency(labels: &[usize], adjacency: &[Vec<usize>]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (i, nb) in adjacency.iter().enumerate() {
        for &j in nb {
            let (a, b) = (labels[i], labels[j]);
            if a != b && a != usize::MAX && b != usize::MAX {
                out.insert((a.min(b), a.max(b)));
            }
        }
    }
    out
}

/// Fraction of sampled cross pairs that see each other.
fn visible_fraction<T: Real>(
    a: &[usize],
    b: &[usize],
    positions: &[Point3<T>],
    ctx: &VisibilityContext<'_, T>,
    max_pairs: usize,
    seed: u64,
) -> f64 {
    let total = a.len() * b.len();
    if total == 0 {
        return 0.0;
    }
    let mut visible = 0usize;
    let tested;
    if total <= max_pairs {
        tested = total;
        for &i in a {
            for &j in b {
                visible += ctx.visible(&positions[i], &positions[j]) as usize;
            }
        }
    } else {
        tested = max_pairs;
        let mut rng = substream(seed, a[0] as u64, b[0] as u64);
        for _ in 0..max_pairs {
            let i = a[rng.gen_range(0..a.len())];
            let j = b[rng.gen_range(0..b.len())];
            visible += ctx.visible(&positions[i], &positions[j]) as usize;
        }
    }
    visible as f64 / tested as f64
}

fn sorted_partition(mut clusters: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.retain(|c| !c.is_empty());
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Best-first merging of adjacent clusters whose mutual visibility fraction is at least `threshold`.
pub fn wcseg_merge_visible<T: Real>(
    patches: Vec<Vec<usize>>,
    adjacency: &[Vec<usize>],
    positions: &[Point3<T>],
    ctx: &VisibilityContext<'_, T>,
    threshold: f64,
    max_pairs: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = sorted_partition(patches);
    let mut pairs = cluster_adjacency(&labels_of(positions.len(), &clusters), adjacency);
    let mut cache: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for &(a, b) in &pairs {
            let f = *cache
                .entry((a, b))
                .or_insert_with(|| visible_fraction(&clusters[a], &clusters[b], positions, ctx, max_pairs, seed));
            if f >= threshold && best.is_none_or(|(bf, _, _)| f > bf) {
                best = Some((f, a, b));
            }
        }
        let Some((f, a, b)) = best else { break };
        log::debug!("visibility merge {} + {} points at {f:.3}", clusters[a].len(), clusters[b].len());
        let moved = std::mem::take(&mut clusters[b]);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        cache.retain(|&(x, y), _| x != a && y != a && x != b && y != b);
        pairs = pairs
            .into_iter()
            .filter_map(|(x, y)| {
                let (x, y) = (if x == b { a } else { x }, if y == b { a } else { y });
                (x != y).then(|| (x.min(y), x.max(y)))
            })
            .collect();
    }
    sorted_partition(clusters)
}

/// Moves every cluster with fewer than `min_size` points into the adjacent
/// cluster sharing the most k-NN edges with it, smallest first.
pub fn absorb_small_clusters(clusters: Vec<Vec<usize>>, adjacency: &[Vec<usize>], min_size: usize) -> Vec<Vec<usize>> {
    let mut clusters = sorted_partition(clusters);
    // First indices of small clusters without neighbors; they stay as they are.
    let mut isolated = BTreeSet::new();
    loop {
        let labels = labels_of(adjacency.len(), &clusters);
        let Some(small) = (0..clusters.len())
            .filter(|&c| clusters[c].len() < min_size && !isolated.contains(&clusters[c][0]))
            .min_by_key(|&c| (clusters[c].len(), c))
        else {
            break;
        };
        let mut links: BTreeMap<usize, usize> = BTreeMap::new();
        for &i in &clusters[small] {
            for &j in &adjacency[i] {
                if labels[j] != small && labels[j] != usize::MAX {
                    *links.entry(labels[j]).or_default() += 1;
                }
            }
        }
        match links.iter().max_by_key(|&(&c, &n)| (n, std::cmp::Reverse(c))) {
            Some((&target, _)) => {
                let moved = std::mem::take(&mut clusters[small]);
                clusters[target].extend(moved);
                clusters = sorted_partition(clusters);
            }
            None => {
                isolated.insert(clusters[small][0]);
            }
        }
    }
    clusters
}

/// Shape diameter at `p`: median distance to the first surface hit over rays in a
/// cone around the inward normal. `None` if no ray hits.
pub fn shape_diameter<T: Real>(
    p: &Point3<T>,
    inward: &Vector3<T>,
    patches: &[TrianglePatch<T>],
    rays: usize,
    half_angle_deg: T,
    min_t: T,
    rng: &mut crate::rng::Rng,
) -> Option<T> {
    let (u, v) = plane_basis(inward);
    let cos_max = half_angle_deg.to_radians().cos();
    let mut hits: Vec<T> = Vec::with_capacity(rays);
    for _ in 0..rays {
        let cos_t = T::one() - T::lit(rng.gen::<f64>()) * (T::one() - cos_max);
        let sin_t = (T::one() - cos_t * cos_t).max(T::zero()).sqrt();
        let phi = T::lit(rng.gen::<f64>()) * T::TAU();
        let dir = *inward * cos_t + u * (sin_t * phi.cos()) + v * (sin_t * phi.sin());
        if let Some(t) = ray_hit(p, &dir, patches, min_t, T::infinity()) {
            hits.push(t);
        }
    }
    median(&mut hits)
}

fn median<T: Real>(v: &mut [T]) -> Option<T> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(cmp_real);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) * T::lit(0.5) })
}

/// Merges adjacent clusters whose median shape diameters differ by at most
/// `params.sdf_threshold` relative to the larger one.
#[allow(clippy::too_many_arguments)]
pub fn wcseg_volumetric_merge<T: Real>(
    clusters: Vec<Vec<usize>>,
    adjacency: &[Vec<usize>],
    structured: &StructuredCloud<T>,
    planes: &[Plane<T>],
    patches: &[TrianglePatch<T>],
    params: &WcsegParams<T>,
    ctx: &VisibilityContext<'_, T>,
    seed: u64,
) -> Vec<Vec<usize>> {
    let guard = ctx.guard;
    let positions: Vec<Point3<T>> = structured.points.iter().map(|p| p.position).collect();
    let mut clusters = sorted_partition(clusters);
    let normals = point_normals(structured, planes);
    let sdf_of = |i: usize| -> Option<T> {
        let inward = -normals[i].iter().fold(Vector3::zero(), |a, n| a + *n).try_normalize()?;
        let mut rng = substream(seed, 0x5df, i as u64);
        shape_diameter(&structured.points[i].position, &inward, patches, params.sdf_rays, params.sdf_half_angle_deg, guard, &mut rng)
    };
    let mut values: Vec<Vec<T>> = clusters
        .iter()
        .map(|c| {
            let picks: Vec<usize> = if c.len() <= params.sdf_samples {
                c.clone()
            } else {
                let mut rng = substream(seed, 0x5e1, c[0] as u64);
                let mut s: Vec<usize> = sample(&mut rng, c.len(), params.sdf_samples).into_iter().map(|k| c[k]).collect();
                s.sort_unstable();
                s
            };
            picks.into_iter().filter_map(sdf_of).collect()
        })
        .collect();
    loop {
        let labels = labels_of(structured.len(), &clusters);
        let medians: Vec<Option<T>> = values.iter().map(|v| median(&mut v.clone())).collect();
        let mut best: Option<(T, usize, usize)> = None;
        for (a, b) in cluster_adjacency(&labels, adjacency) {
            let (Some(ma), Some(mb)) = (medians[a], medians[b]) else { continue };
            let denom = ma.max(mb);
            if !(denom > T::zero()) {
                continue;
            }
            let rel = (ma - mb).abs() / denom;
            if rel > params.sdf_threshold || best.is_some_and(|(br, _, _)| rel >= br) {
                continue;
            }
            if params.sdf_visibility_floor > 0.0 {
                let f = visible_fraction(&clusters[a], &clusters[b], &positions, ctx, params.max_pairs, seed);
                log::debug!("sdf merge candidate {} + {} points: relative sdf {:.3}, visibility {f:.3}", clusters[a].len(), clusters[b].len(), rel.as_f64());
                if f < params.sdf_visibility_floor {
                    continue;
                }
            }
            best = Some((rel, a, b));
        }
        let Some((_, a, b)) = best else { break };
        let moved = std::mem::take(&mut clusters[b]);
        clusters[a].extend(moved);
        let mv = std::mem::take(&mut values[b]);
        values[a].extend(mv);
        // Keep values aligned with the re-sorted partition.
        let mut paired: Vec<(Vec<usize>, Vec<T>)> = clusters.into_iter().zip(values).filter(|(c, _)| !c.is_empty()).collect();
        for (c, _) in &mut paired {
            c.sort_unstable();
        }
        paired.sort_by_key(|(c, _)| c[0]);
        (clusters, values) = paired.into_iter().unzip();
    }
    clusters
}
