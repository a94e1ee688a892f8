//! Line-of-sight visibility between surface samples.

use rayon::prelude::*;

use crate::geometry::{segment_blocked, triangulate_patch, Plane, Point3, TrianglePatch};
use crate::polytope_gen::SignedDistanceGrid;
use crate::scalar::Real;
use crate::structuring::StructuredCloud;

/// Alpha-shape patch per plane from every structured point lying on it.
pub fn build_surface_patches<T: Real>(structured: &StructuredCloud<T>, planes: &[Plane<T>], alpha: T) -> Vec<TrianglePatch<T>> {
    let mut per_plane: Vec<Vec<Point3<T>>> = vec![Vec::new(); planes.len()];
    for p in &structured.points {
        for &k in &p.planes {
            per_plane[k].push(p.position);
        }
    }
    per_plane
        .par_iter()
        .enumerate()
        .map(|(k, pts)| triangulate_patch(k, &planes[k], pts, alpha))
        .collect()
}

/// Optional solid-interior check applied to the segment midpoint.
#[derive(Debug, Clone, Copy)]
pub struct InteriorCheck<'a, T> {
    pub volume: &'a SignedDistanceGrid<T>,
    /// Midpoints with volume value above this count as outside the solid.
    pub threshold: T,
}

/// Everything needed to decide whether two samples see each other.
#[derive(Debug, Clone, Copy)]
pub struct VisibilityContext<'a, T> {
    pub patches: &'a [TrianglePatch<T>],
    /// Distance trimmed from both segment ends.
    pub guard: T,
    pub interior: Option<InteriorCheck<'a, T>>,
}

impl<'a, T: Real> VisibilityContext<'a, T> {
    pub fn visible(&self, a: &Point3<T>, b: &Point3<T>) -> bool {
        if let Some(check) = &self.interior {
            let mid = (*a + *b) * T::lit(0.5);
            if check.volume.value(&mid) > check.threshold {
                return false;
            }
        }
        !segment_blocked(a, b, self.patches, self.guard)
    }
}

/// Symmetric binary matrix stored as row bitsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affinity {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Affinity {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self { n, words, bits: vec![0; n * words] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut a = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if f(i, j) {
                    a.set(i, j);
                }
            }
        }
        a
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Sets `(i, j)` and `(j, i)`; the diagonal is never set.
    pub fn set(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
    }

    pub fn degree(&self, i: usize) -> usize {
        self.bits[i * self.words..(i + 1) * self.words].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    /// Fraction of off-diagonal entries that are set.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 1.0;
        }
        self.edge_count() as f64 / (self.n * (self.n - 1) / 2) as f64
    }
}

/// Visibility graph over sample points.
#[derive(Debug, Clone)]
pub struct VisibilityGraph<T> {
    pub samples: Vec<Point3<T>>,
    pub affinity: Affinity,
}

/// `A_ij = 1` iff samples `i` and `j` see each other.
pub fn build_visibility_graph<T: Real>(samples: Vec<Point3<T>>, ctx: &VisibilityContext<'_, T>) -> VisibilityGraph<T> {
    let n = samples.len();
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).filter(|&j| ctx.visible(&samples[i], &samples[j])).collect())
        .collect();
    let mut affinity = Affinity::new(n);
    for (i, row) in rows.into_iter().enumerate() {
        for j in row {
            affinity.set(i, j);
        }
    }
    VisibilityGraph { samples, affinity }
}
