use rand::Rng as _;

use crate::rng::substream;
use crate::scalar::Real;

const MAX_LLOYD_ITERATIONS: usize = 100;

fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum()
}

/// k-means with k-means++ seeding; the best of `restarts` runs by inertia.
/// Labels are renumbered by first appearance.
pub fn kmeans<T: Real>(data: &[Vec<T>], k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    let n = data.len();
    if n == 0 || k == 0 {
        return vec![0; n];
    }
    if k == 1 {
        return vec![0; n];
    }
    let mut best: Option<(T, Vec<usize>)> = None;
    for r in 0..restarts.max(1) {
        let (inertia, labels) = lloyd(data, k, seed, r as u64);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    canonical_labels(&best.expect("at least one restart").1)
}

fn lloyd<T: Real>(data: &[Vec<T>], k: usize, seed: u64, restart: u64) -> (T, Vec<usize>) {
    let n = data.len();
    let mut rng = substream(seed, 0x6b6d, restart);
    let mut centers: Vec<Vec<T>> = vec![data[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<T> = data.iter().map(|x| sq_dist(x, &centers[0])).collect();
    while centers.len() < k {
        let total: T = d2.iter().copied().sum();
        let pick = if total > T::zero() {
            let mut target = T::lit(rng.gen::<f64>()) * total;
            let mut idx = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if target < *d {
                    idx = i;
                    break;
                }
                target -= *d;
            }
            idx
        } else {
            rng.gen_range(0..n)
        };
        centers.push(data[pick].clone());
        for (d, x) in d2.iter_mut().zip(data) {
            *d = d.min(sq_dist(x, &centers[centers.len() - 1]));
        }
    }

    let dim = data[0].len();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut changed = false;
        for (i, x) in data.iter().enumerate() {
            let mut bc = 0;
            let mut bd = T::infinity();
            for (c, ctr) in centers.iter().enumerate() {
                let d = sq_dist(x, ctr);
                if d < bd {
                    bd = d;
                    bc = c;
                }
            }
            if labels[i] != bc {
                labels[i] = bc;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![T::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &l) in data.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(x) {
                *s += *v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed an empty cluster at the point farthest from its centre.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(&data[a], &centers[labels[a]]);
                        let db = sq_dist(&data[b], &centers[labels[b]]);
                        da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                centers[c] = data[far].clone();
            } else {
                let inv = T::one() / T::from_usize_lossy(counts[c]);
                centers[c] = sums[c].iter().map(|s| *s * inv).collect();
            }
        }
    }
    let inertia = data.iter().zip(&labels).map(|(x, &l)| sq_dist(x, &centers[l])).sum();
    (inertia, labels)
}

/// Renumbers labels in order of first appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}
