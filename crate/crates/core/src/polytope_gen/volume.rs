//! Signed distance target volume estimated from oriented points.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, Vector3};
use crate::scalar::Real;
use crate::spatial::PointIndex;

/// Number of oriented neighbours blended by the estimator.
pub const ESTIMATOR_NEIGHBOURS: usize = 6;
/// Smallest cluster accepted by [`build_target_volume`].
pub const MIN_SUPPORT: usize = 10;

/// Regular lattice of signed distances, negative inside, trilinearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDistanceGrid<T> {
    pub origin: Point3<T>,
    pub cell_size: T,
    pub dims: [usize; 3],
    values: Vec<T>,
}

impl<T: Real> SignedDistanceGrid<T> {
    /// Samples `f` at every node of the lattice.
    pub fn from_fn(origin: Point3<T>, cell_size: T, dims: [usize; 3], f: impl Fn(&Point3<T>) -> T + Sync) -> Self {
        let n = dims[0] * dims[1] * dims[2];
        let values = (0..n)
            .into_par_iter()
            .map(|flat| {
                let k = flat % dims[2];
                let j = (flat / dims[2]) % dims[1];
                let i = flat / (dims[1] * dims[2]);
                f(&node_position(origin, cell_size, [i, j, k]))
            })
            .collect();
        Self { origin, cell_size, dims, values }
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> Point3<T> {
        node_position(self.origin, self.cell_size, [i, j, k])
    }

    #[inline]
    pub fn value_at_node(&self, i: usize, j: usize, k: usize) -> T {
        self.values[(i * self.dims[1] + j) * self.dims[2] + k]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn bounds(&self) -> Aabb<T> {
        let max = self.node(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1);
        Aabb { min: self.origin, max }
    }

    /// Trilinear interpolation; outside the lattice the clamped value plus the
    /// distance to the lattice box is returned.
    pub fn value(&self, x: &Point3<T>) -> T {
        let bounds = self.bounds();
        let outside = bounds.distance_to(x);
        let q = x.max_components(&bounds.min).min_components(&bounds.max);
        let rel = [(q.x - self.origin.x) / self.cell_size, (q.y - self.origin.y) / self.cell_size, (q.z - self.origin.z) / self.cell_size];
        let mut base = [0usize; 3];
        let mut frac = [T::zero(); 3];
        for a in 0..3 {
            let max_base = self.dims[a] - 2;
            let f = rel[a].floor().max(T::zero());
            let b = f.to_usize().unwrap_or(0).min(max_base);
            base[a] = b;
            frac[a] = (rel[a] - T::from_usize_lossy(b)).max(T::zero()).min(T::one());
        }
        let mut acc = T::zero();
        for corner in 0..8 {
            let di = corner >> 2 & 1;
            let dj = corner >> 1 & 1;
            let dk = corner & 1;
            let w = weight(frac[0], di) * weight(frac[1], dj) * weight(frac[2], dk);
            if w != T::zero() {
                acc += w * self.value_at_node(base[0] + di, base[1] + dj, base[2] + dk);
            }
        }
        acc + outside
    }
}

#[inline]
fn weight<T: Real>(f: T, side: usize) -> T {
    if side == 1 {
        f
    } else {
        T::one() - f
    }
}

#[inline]
fn node_position<T: Real>(origin: Point3<T>, cell: T, ijk: [usize; 3]) -> Point3<T> {
    origin + Point3::new(T::from_usize_lossy(ijk[0]), T::from_usize_lossy(ijk[1]), T::from_usize_lossy(ijk[2])) * cell
}

/// Oriented-point signed distance estimate: inverse-distance weighted mean of
/// `dot(n_i, x - p_i)` over the nearest oriented points.
pub struct OrientedDistance<'a, T: Real> {
    points: &'a [Point3<T>],
    normals: &'a [Vector3<T>],
    index: PointIndex<T>,
    bbox: Aabb<T>,
}

impl<'a, T: Real> OrientedDistance<'a, T> {
    pub fn new(points: &'a [Point3<T>], normals: &'a [Vector3<T>]) -> Result<Self> {
        if points.len() < MIN_SUPPORT || normals.len() != points.len() {
            return Err(Error::InsufficientSupport(points.len()));
        }
        let bbox = Aabb::from_points(points).ok_or(Error::InsufficientSupport(0))?;
        Ok(Self { points, normals, index: PointIndex::new(points), bbox })
    }

    pub fn estimate(&self, x: &Point3<T>) -> T {
        let nb = self.index.knn(x, ESTIMATOR_NEIGHBOURS);
        let tiny = T::lit(1e-12);
        let mut num = T::zero();
        let mut den = T::zero();
        for n in &nb {
            let w = T::one() / (n.distance_squared.sqrt() + tiny);
            num += w * self.normals[n.index].dot(&(*x - self.points[n.index]));
            den += w;
        }
        let s = num / den;
        // Away from the samples the estimate must not claim "inside".
        s.max(self.bbox.distance_to(x))
    }
}

/// Signed distance grid over the points' bounding box expanded by `pad`.
pub fn build_target_volume<T: Real>(
    points: &[Point3<T>],
    normals: &[Vector3<T>],
    cell_size: T,
    pad: T,
) -> Result<SignedDistanceGrid<T>> {
    if !(cell_size > T::zero()) || !(pad > T::zero()) {
        return Err(Error::Config("target volume cell size and padding must be positive".into()));
    }
    let est = OrientedDistance::new(points, normals)?;
    let bb = est.bbox.expanded(pad);
    let ext = bb.extent();
    let dims = [ext.x, ext.y, ext.z].map(|e| ((e / cell_size).ceil().to_usize().unwrap_or(1) + 1).max(2));
    Ok(SignedDistanceGrid::from_fn(bb.min, cell_size, dims, |x| est.estimate(x)))
}
