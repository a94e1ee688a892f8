//! k-d tree wrappers for nearest-neighbour queries in 3 and 6 dimensions.

use kd_tree::{KdPoint, KdTreeN};
use typenum::{U3, U6};

use crate::geometry::Point3;
use crate::scalar::{cmp_real, Real};

#[derive(Debug, Clone, Copy)]
pub struct Entry<T, const D: usize> {
    coords: [T; D],
    index: usize,
}

impl<T: Real> KdPoint for Entry<T, 3> {
    type Scalar = T;
    type Dim = U3;
    fn at(&self, i: usize) -> T {
        self.coords[i]
    }
}

impl<T: Real> KdPoint for Entry<T, 6> {
    type Scalar = T;
    type Dim = U6;
    fn at(&self, i: usize) -> T {
        self.coords[i]
    }
}

/// Static k-d tree over `D`-dimensional points addressed by their input index.
pub struct KdIndex<T: Real, const D: usize>
where
    Entry<T, D>: KdPoint<Scalar = T>,
{
    tree: KdTreeN<Entry<T, D>, <Entry<T, D> as KdPoint>::Dim>,
}

pub type PointIndex<T> = KdIndex<T, 3>;

/// A neighbour and its squared distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub index: usize,
    pub distance_squared: T,
}

impl<T: Real, const D: usize> KdIndex<T, D>
where
    Entry<T, D>: KdPoint<Scalar = T>,
{
    pub fn from_coords(coords: Vec<[T; D]>) -> Self {
        let items = coords.into_iter().enumerate().map(|(index, coords)| Entry { coords, index }).collect();
        let tree = KdTreeN::build_by(items, |a: &Entry<T, D>, b: &Entry<T, D>, k| cmp_real(&a.coords[k], &b.coords[k]));
        Self { tree }
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// The `k` nearest entries, ordered by distance then index.
    pub fn knn_coords(&self, q: [T; D], k: usize) -> Vec<Neighbor<T>> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let query = Entry { coords: q, index: usize::MAX };
        let mut out: Vec<Neighbor<T>> = self
            .tree
            .nearests(&query, k)
            .into_iter()
            .map(|n| Neighbor { index: n.item.index, distance_squared: n.squared_distance })
            .collect();
        sort_neighbors(&mut out);
        out
    }

    /// Entries within distance `r` (inclusive), ordered by index.
    pub fn within_coords(&self, q: [T; D], r: T) -> Vec<usize> {
        let query = Entry { coords: q, index: usize::MAX };
        // The tree's radius test is strict; widen slightly and filter exactly.
        let widened = r + r.abs() * T::lit(1e-9) + T::min_positive_value();
        let r2 = r * r;
        let mut out: Vec<usize> = self
            .tree
            .within_radius(&query, widened)
            .into_iter()
            .filter(|e| {
                let d2: T = e.coords.iter().zip(&q).map(|(a, b)| (*a - *b) * (*a - *b)).sum();
                d2 <= r2
            })
            .map(|e| e.index)
            .collect();
        out.sort_unstable();
        out
    }
}

impl<T: Real> KdIndex<T, 3> {
    pub fn new(points: &[Point3<T>]) -> Self {
        Self::from_coords(points.iter().map(|p| p.to_array()).collect())
    }

    pub fn knn(&self, q: &Point3<T>, k: usize) -> Vec<Neighbor<T>> {
        self.knn_coords(q.to_array(), k)
    }

    pub fn nearest(&self, q: &Point3<T>) -> Option<Neighbor<T>> {
        self.knn(q, 1).into_iter().next()
    }

    pub fn within(&self, q: &Point3<T>, r: T) -> Vec<usize> {
        self.within_coords(q.to_array(), r)
    }
}

fn sort_neighbors<T: Real>(v: &mut [Neighbor<T>]) {
    v.sort_by(|a, b| cmp_real(&a.distance_squared, &b.distance_squared).then(a.index.cmp(&b.index)));
}

/// Symmetric k-nearest-neighbour adjacency (excluding self) over a point set.
pub fn knn_adjacency<T: Real>(points: &[Point3<T>], k: usize) -> Vec<Vec<usize>> {
    let index = PointIndex::new(points);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
    for (i, p) in points.iter().enumerate() {
        for n in index.knn(p, k + 1) {
            if n.index != i {
                adj[i].push(n.index);
                adj[n.index].push(i);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}
