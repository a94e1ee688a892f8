use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::halfspace::{feasibility_tol, halfspaces_to_vertices, HalfSpace, HullStatus};
use crate::geometry::plane::plane_basis;
use crate::geometry::vector::{centroid, Aabb, Point3};
use crate::scalar::{cmp_real, Real};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("degenerate polytope: no planes")]
    DegeneratePolytope,
    #[error("halfspace intersection is unbounded")]
    Unbounded,
    #[error("halfspace intersection is empty")]
    Empty,
    #[error("halfspace intersection has no volume")]
    Flat,
    #[error("cell size must be positive and finite")]
    InvalidCellSize,
}

/// `min_i dot(n_i, o_i - x)`: positive inside, zero on the boundary, negative outside.
pub fn signed_distance<T: Real>(faces: &[HalfSpace<T>], x: &Point3<T>) -> Result<T, GeometryError> {
    faces
        .iter()
        .map(|h| h.depth(x))
        .reduce(|a, b| a.min(b))
        .ok_or(GeometryError::DegeneratePolytope)
}

/// Bounded convex polytope in H-representation with its cached vertex set.
///
/// Only facet-supporting planes are kept, so two plane sets describing the same
/// solid produce the same polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConvexPolytope<T> {
    plane_ids: Vec<usize>,
    faces: Vec<HalfSpace<T>>,
    vertices: Vec<Point3<T>>,
}

/// Cell centres of a polytope's voxelization.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelSet<T> {
    pub cell_size: T,
    pub centers: Vec<Point3<T>>,
}

impl<T: Real> VoxelSet<T> {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn volume(&self) -> T {
        T::from_usize_lossy(self.centers.len()) * self.cell_size.powi(3)
    }
}

impl<T: Real> ConvexPolytope<T> {
    /// Builds the polytope from labelled halfspaces. Duplicate ids keep their first face.
    pub fn from_halfspaces(labelled: Vec<(usize, HalfSpace<T>)>) -> Result<Self, GeometryError> {
        if labelled.is_empty() {
            return Err(GeometryError::DegeneratePolytope);
        }
        let mut labelled = labelled;
        labelled.sort_by_key(|(id, _)| *id);
        labelled.dedup_by_key(|(id, _)| *id);
        let faces: Vec<HalfSpace<T>> = labelled.iter().map(|(_, h)| *h).collect();
        let hull = halfspaces_to_vertices(&faces);
        match hull.status {
            HullStatus::Unbounded => return Err(GeometryError::Unbounded),
            HullStatus::Empty => return Err(GeometryError::Empty),
            HullStatus::Bounded => {}
        }
        let vertices = hull.vertices;
        if !spans_volume(&vertices) {
            return Err(GeometryError::Flat);
        }
        let keep: Vec<bool> = faces
            .iter()
            .map(|h| vertices.iter().filter(|v| h.depth(v).abs() <= feasibility_tol(v) * T::lit(10.0)).count() >= 3)
            .collect();
        let (plane_ids, faces) = labelled
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(f, _)| f)
            .unzip();
        Ok(Self { plane_ids, faces, vertices })
    }

    /// Sorted ids of the facet-supporting planes.
    pub fn plane_ids(&self) -> &[usize] {
        &self.plane_ids
    }

    /// Outward-oriented faces, parallel to [`Self::plane_ids`].
    pub fn faces(&self) -> &[HalfSpace<T>] {
        &self.faces
    }

    pub fn vertices(&self) -> &[Point3<T>] {
        &self.vertices
    }

    pub fn signed_distance(&self, x: &Point3<T>) -> T {
        signed_distance(&self.faces, x).expect("valid polytope has faces")
    }

    pub fn bounding_box(&self) -> Aabb<T> {
        Aabb::from_points(&self.vertices).expect("valid polytope has vertices")
    }

    pub fn vertex_centroid(&self) -> Point3<T> {
        centroid(&self.vertices).expect("valid polytope has vertices")
    }

    /// True if every vertex of `other` lies inside or on `self`.
    pub fn contains_polytope(&self, other: &Self) -> bool {
        other.vertices.iter().all(|v| self.signed_distance(v) >= -feasibility_tol(v))
    }

    /// Lattice voxelization anchored at the bounding-box minimum.
    pub fn voxelize(&self, cell_size: T) -> Result<VoxelSet<T>, GeometryError> {
        if !(cell_size > T::zero()) || !cell_size.is_finite() {
            return Err(GeometryError::InvalidCellSize);
        }
        let bb = self.bounding_box();
        let ext = bb.extent().to_array();
        let single = || VoxelSet { cell_size, centers: vec![self.vertex_centroid()] };
        if ext.iter().any(|e| *e < cell_size) {
            return Ok(single());
        }
        let counts: Vec<usize> = ext
            .iter()
            .map(|e| {
                let n = (*e / cell_size - T::lit(1e-9)).ceil();
                n.to_usize().unwrap_or(1).max(1)
            })
            .collect();
        let half = T::lit(0.5);
        let mut centers = Vec::new();
        for i in 0..counts[0] {
            let x = bb.min.x + (T::from_usize_lossy(i) + half) * cell_size;
            for j in 0..counts[1] {
                let y = bb.min.y + (T::from_usize_lossy(j) + half) * cell_size;
                for k in 0..counts[2] {
                    let z = bb.min.z + (T::from_usize_lossy(k) + half) * cell_size;
                    let c = Point3::new(x, y, z);
                    if self.signed_distance(&c) >= -feasibility_tol(&c) {
                        centers.push(c);
                    }
                }
            }
        }
        if centers.is_empty() {
            return Ok(single());
        }
        Ok(VoxelSet { cell_size, centers })
    }

    /// Vertex indices of each face, ordered counter-clockwise seen from outside.
    pub fn face_loops(&self) -> Vec<Vec<usize>> {
        self.faces
            .iter()
            .map(|h| {
                let mut idx: Vec<usize> = (0..self.vertices.len())
                    .filter(|&i| {
                        let v = &self.vertices[i];
                        h.depth(v).abs() <= feasibility_tol(v) * T::lit(10.0)
                    })
                    .collect();
                let pts: Vec<Point3<T>> = idx.iter().map(|&i| self.vertices[i]).collect();
                let c = centroid(&pts).unwrap_or(h.origin);
                let (u, v) = plane_basis(&h.normal);
                let angle = |i: &usize| {
                    let d = self.vertices[*i] - c;
                    d.dot(&v).atan2(d.dot(&u))
                };
                idx.sort_by(|a, b| cmp_real(&angle(a), &angle(b)));
                idx
            })
            .collect()
    }

    /// Closed triangle mesh of the boundary (fan per face), outward winding.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut tris = Vec::new();
        for lp in self.face_loops() {
            for w in 1..lp.len().saturating_sub(1) {
                tris.push([lp[0], lp[w], lp[w + 1]]);
            }
        }
        tris
    }

    /// Exact volume from the boundary mesh.
    pub fn volume(&self) -> T {
        let c = self.vertex_centroid();
        let six = T::lit(6.0);
        self.triangles()
            .iter()
            .map(|t| {
                let a = self.vertices[t[0]] - c;
                let b = self.vertices[t[1]] - c;
                let d = self.vertices[t[2]] - c;
                a.dot(&b.cross(&d)) / six
            })
            .sum::<T>()
    }
}

fn spans_volume<T: Real>(vertices: &[Point3<T>]) -> bool {
    if vertices.len() < 4 {
        return false;
    }
    let Some(bb) = Aabb::from_points(vertices) else {
        return false;
    };
    let scale = bb.diagonal().max(T::min_positive_value());
    let a = vertices[0];
    let Some((b, _)) = vertices
        .iter()
        .map(|v| (*v, v.distance(&a)))
        .max_by(|x, y| cmp_real(&x.1, &y.1))
    else {
        return false;
    };
    let ab = b - a;
    let Some((c, area)) = vertices
        .iter()
        .map(|v| (*v, ab.cross(&(*v - a)).norm()))
        .max_by(|x, y| cmp_real(&x.1, &y.1))
    else {
        return false;
    };
    if area <= T::tol() * scale * scale {
        return false;
    }
    let n = ab.cross(&(c - a));
    let vol = vertices.iter().map(|v| n.dot(&(*v - a)).abs()).fold(T::zero(), |m, x| m.max(x));
    vol > T::tol() * scale * scale * scale
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff<T: Real>(a: &[Point3<T>], b: &[Point3<T>]) -> T {
    let directed = |p: &[Point3<T>], q: &[Point3<T>]| {
        p.iter()
            .map(|x| q.iter().map(|y| x.distance(y)).fold(T::infinity(), |m, d| m.min(d)))
            .fold(T::zero(), |m, d| m.max(d))
    };
    directed(a, b).max(directed(b, a))
}
