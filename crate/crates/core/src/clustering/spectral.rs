//! Spectral clustering of visibility graphs and Q-based selection of the cluster count.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::clustering::kmeans::{canonical_labels, kmeans};
use crate::clustering::visibility::{Affinity, VisibilityGraph};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::linalg::{smallest_eigenpairs, SymmetricMatrix};
use crate::rng::substream;
use crate::scalar::Real;

const KMEANS_RESTARTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    Symmetric,
    RandomWalk,
}

impl std::str::FromStr for LaplacianKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "symmetric" | "sym" => Ok(Self::Symmetric),
            "random_walk" | "rw" => Ok(Self::RandomWalk),
            other => Err(format!("unknown laplacian kind {other:?}")),
        }
    }
}

impl std::fmt::Display for LaplacianKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Symmetric => "symmetric",
            Self::RandomWalk => "random_walk",
        })
    }
}

/// Eigenvectors of `L_sym = I - D^-1/2 A D^-1/2` over the non-isolated vertices,
/// computed once for the largest cluster count of interest.
pub struct SpectralEmbedding<T> {
    active: Vec<usize>,
    inv_sqrt_degree: Vec<T>,
    vectors: Vec<Vec<T>>,
}

impl<T: Real> SpectralEmbedding<T> {
    pub fn new(affinity: &Affinity, k_max: usize) -> Result<Self> {
        let active: Vec<usize> = (0..affinity.len()).filter(|&i| affinity.degree(i) > 0).collect();
        let m = active.len();
        let inv_sqrt_degree: Vec<T> = active
            .iter()
            .map(|&i| T::one() / T::from_usize_lossy(affinity.degree(i)).sqrt())
            .collect();
        let k = k_max.min(m);
        if k == 0 {
            return Ok(Self { active, inv_sqrt_degree, vectors: Vec::new() });
        }
        let mut data = vec![T::zero(); m * m];
        for (a, &i) in active.iter().enumerate() {
            data[a * m + a] = T::one();
            for (b, &j) in active.iter().enumerate() {
                if a != b && affinity.get(i, j) {
                    data[a * m + b] = -inv_sqrt_degree[a] * inv_sqrt_degree[b];
                }
            }
        }
        let lap = SymmetricMatrix::from_row_major(m, data)?;
        let pairs = smallest_eigenpairs(&lap, k)?;
        Ok(Self { active, inv_sqrt_degree, vectors: pairs.vectors })
    }

    pub fn available(&self) -> usize {
        self.vectors.len()
    }

    /// Labels for all vertices; isolated vertices take the label of the nearest
    /// non-isolated sample in `positions`.
    pub fn cluster(&self, k: usize, kind: LaplacianKind, seed: u64, positions: &[Point3<T>]) -> Result<Vec<usize>> {
        let n = positions.len();
        if k == 0 {
            return Err(Error::Clustering("cluster count must be at least 1".into()));
        }
        let m = self.active.len();
        if m == 0 {
            if k == 1 {
                return Ok(vec![0; n]);
            }
            return Err(Error::Clustering(format!("affinity is empty, cannot form {k} clusters")));
        }
        if k > m || k > self.available() {
            return Err(Error::Clustering(format!("{k} clusters requested but only {m} connected samples")));
        }
        let rows: Vec<Vec<T>> = (0..m)
            .map(|a| {
                let mut r: Vec<T> = (0..k).map(|c| self.vectors[c][a]).collect();
                match kind {
                    LaplacianKind::Symmetric => {
                        let norm = r.iter().map(|v| *v * *v).sum::<T>().sqrt();
                        if norm > T::zero() {
                            r.iter_mut().for_each(|v| *v /= norm);
                        }
                    }
                    LaplacianKind::RandomWalk => r.iter_mut().for_each(|v| *v *= self.inv_sqrt_degree[a]),
                }
                r
            })
            .collect();
        let active_labels = kmeans(&rows, k, KMEANS_RESTARTS, seed);
        let mut labels = vec![usize::MAX; n];
        for (a, &i) in self.active.iter().enumerate() {
            labels[i] = active_labels[a];
        }
        for i in 0..n {
            if labels[i] == usize::MAX {
                let nearest = self
                    .active
                    .iter()
                    .copied()
                    .min_by(|&x, &y| {
                        let dx = positions[x].distance_squared(&positions[i]);
                        let dy = positions[y].distance_squared(&positions[i]);
                        dx.partial_cmp(&dy).unwrap_or(std::cmp::Ordering::Equal).then(x.cmp(&y))
                    })
                    .expect("active set is non-empty");
                labels[i] = labels[nearest];
            }
        }
        Ok(canonical_labels(&labels))
    }
}

/// Spectral clustering of a visibility graph into `k` clusters.
pub fn spectral_cluster<T: Real>(graph: &VisibilityGraph<T>, k: usize, kind: LaplacianKind, rng_seed: u64) -> Result<Vec<usize>> {
    SpectralEmbedding::new(&graph.affinity, k)?.cluster(k, kind, rng_seed, &graph.samples)
}

/// `Q = (1/n²) [ Σ visible intra-cluster pairs + α Σ invisible cross-cluster pairs ]`,
/// counting unordered pairs once.
pub fn clustering_quality(affinity: &Affinity, labels: &[usize], alpha: f64) -> f64 {
    let n = affinity.len();
    if n == 0 {
        return 0.0;
    }
    let mut intra = 0usize;
    let mut cross_hidden = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let v = affinity.get(i, j);
            if labels[i] == labels[j] {
                intra += v as usize;
            } else {
                cross_hidden += (!v) as usize;
            }
        }
    }
    (intra as f64 + alpha * cross_hidden as f64) / (n * n) as f64
}

/// Result of the cluster-count search.
#[derive(Debug, Clone, PartialEq)]
pub struct CountEstimate {
    pub k: usize,
    pub labels: Vec<usize>,
    /// `(k, Q)` for every evaluated count.
    pub scores: Vec<(usize, f64)>,
}

/// Spectral clustering for each `k` in `k_range` and selection by maximal `Q`;
/// ties go to the smaller `k`.
pub fn estimate_cluster_count<T: Real>(
    graph: &VisibilityGraph<T>,
    k_range: (usize, usize),
    alpha_q: f64,
    kind: LaplacianKind,
    rng_seed: u64,
) -> Result<CountEstimate> {
    let n = graph.samples.len();
    if n == 0 {
        return Err(Error::Clustering("no samples".into()));
    }
    let lo = k_range.0.max(1);
    let hi = k_range.1.min(n);
    if lo > hi {
        return Err(Error::Clustering(format!("empty cluster-count range [{}, {}]", k_range.0, k_range.1)));
    }
    let embedding = SpectralEmbedding::new(&graph.affinity, hi)?;
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    let mut scores = Vec::new();
    for k in lo..=hi {
        let seed = substream(rng_seed, 0x5350, k as u64).gen::<u64>();
        let Ok(labels) = embedding.cluster(k, kind, seed, &graph.samples) else {
            continue;
        };
        let q = clustering_quality(&graph.affinity, &labels, alpha_q);
        scores.push((k, q));
        if best.as_ref().is_none_or(|(_, bq, _)| q > *bq) {
            best = Some((k, q, labels));
        }
    }
    let (k, _, labels) = best.ok_or_else(|| Error::Clustering("no cluster count in range is feasible".into()))?;
    Ok(CountEstimate { k, labels, scores })
}
