//! Removal of weak, duplicate and contained polytopes.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::geometry::ConvexPolytope;
use crate::scalar::Real;

/// A polytope with the cluster it came from and its volume term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScoredPolytope<T> {
    pub cluster: usize,
    pub score: T,
    pub polytope: ConvexPolytope<T>,
}

fn order<T: Real>(a: &ScoredPolytope<T>, b: &ScoredPolytope<T>) -> Ordering {
    a.cluster
        .cmp(&b.cluster)
        .then_with(|| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal))
        .then_with(|| a.polytope.plane_ids().cmp(b.polytope.plane_ids()))
}

/// Drops polytopes scoring below `threshold`, keeps one polytope per plane set and
/// removes polytopes contained in another. Output is ordered by cluster, then score.
///
/// Of two mutually contained polytopes the one ordered first survives.
pub fn filter_polytopes<T: Real>(polytopes: Vec<ScoredPolytope<T>>, threshold: T) -> Vec<ScoredPolytope<T>> {
    let mut kept: Vec<ScoredPolytope<T>> = polytopes.into_iter().filter(|p| p.score >= threshold).collect();
    kept.sort_by(order);
    let mut seen = std::collections::HashSet::new();
    kept.retain(|p| seen.insert(p.polytope.plane_ids().to_vec()));
    let removed: Vec<bool> = (0..kept.len())
        .map(|i| {
            let p = &kept[i].polytope;
            kept.iter().enumerate().any(|(j, q)| {
                j != i && q.polytope.contains_polytope(p) && (j < i || !p.contains_polytope(&q.polytope))
            })
        })
        .collect();
    kept.into_iter().zip(removed).filter(|(_, r)| !r).map(|(p, _)| p).collect()
}
