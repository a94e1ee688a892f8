use serde::{Deserialize, Serialize};

use crate::geometry::vector::{centroid, Point3, Vec3, Vector3};
use crate::linalg::{symmetric_eigen, SymmetricMatrix};
use crate::scalar::Real;

/// Infinite oriented plane `{x : dot(normal, x - origin) = 0}` with the indices
/// of the cloud points it explains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Plane<T> {
    pub origin: Point3<T>,
    pub normal: Vector3<T>,
    #[serde(default)]
    pub inliers: Vec<usize>,
}

impl<T: Real> Plane<T> {
    /// Plane through `origin` with the given normal; `None` if the normal has zero length.
    pub fn new(origin: Point3<T>, normal: Vector3<T>) -> Option<Self> {
        Some(Self { origin, normal: normal.try_normalize()?, inliers: Vec::new() })
    }

    pub fn with_inliers(mut self, inliers: Vec<usize>) -> Self {
        self.inliers = inliers;
        self
    }

    /// Plane through three points, `None` if they are collinear.
    pub fn through(a: &Point3<T>, b: &Point3<T>, c: &Point3<T>) -> Option<Self> {
        let n = (*b - *a).cross(&(*c - *a));
        let scale = (*b - *a).norm() * (*c - *a).norm();
        if n.norm() <= T::epsilon() * T::lit(64.0) * scale {
            return None;
        }
        Self::new(*a, n)
    }

    /// Least-squares plane: centroid plus the covariance eigenvector of the smallest eigenvalue.
    pub fn fit(points: &[Point3<T>]) -> Option<Self> {
        if points.len() < 3 {
            return None;
        }
        let c = centroid(points)?;
        let mut cov = [[T::zero(); 3]; 3];
        for p in points {
            let d = (*p - c).to_array();
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += d[i] * d[j];
                }
            }
        }
        let m = SymmetricMatrix::from_fn(3, |i, j| cov[i][j]);
        let pairs = symmetric_eigen(&m).ok()?;
        // Collinear or coincident samples leave two vanishing eigenvalues.
        if pairs.values[1] <= T::epsilon() * T::lit(1e3) * pairs.values[2].max(T::min_positive_value()) {
            return None;
        }
        let v = &pairs.vectors[0];
        Self::new(c, Vec3::new(v[0], v[1], v[2]))
    }

    /// Signed offset `dot(normal, x - origin)`, positive on the normal side.
    #[inline]
    pub fn signed_offset(&self, x: &Point3<T>) -> T {
        self.normal.dot(&(*x - self.origin))
    }

    #[inline]
    pub fn distance(&self, x: &Point3<T>) -> T {
        self.signed_offset(x).abs()
    }

    #[inline]
    pub fn project(&self, x: &Point3<T>) -> Point3<T> {
        *x - self.normal * self.signed_offset(x)
    }

    pub fn flipped(&self) -> Self {
        Self { origin: self.origin, normal: -self.normal, inliers: self.inliers.clone() }
    }

    /// In-plane orthonormal basis `(u, v)` with `u = normalize(n x a)` for the coordinate
    /// axis `a` least aligned with `n`, and `v = n x u`.
    pub fn basis(&self) -> (Vector3<T>, Vector3<T>) {
        plane_basis(&self.normal)
    }

    /// Distance between the planes' origins measured along the other plane's normal,
    /// maximised over both directions.
    pub fn mutual_offset(&self, other: &Self) -> T {
        self.distance(&other.origin).max(other.distance(&self.origin))
    }
}

pub fn plane_basis<T: Real>(n: &Vector3<T>) -> (Vector3<T>, Vector3<T>) {
    let comps = [n.x.abs(), n.y.abs(), n.z.abs()];
    let mut axis = 0;
    for i in 1..3 {
        if comps[i] < comps[axis] {
            axis = i;
        }
    }
    let u = n.cross(&Vec3::axis(axis)).normalized();
    let v = n.cross(&u);
    (u, v)
}
