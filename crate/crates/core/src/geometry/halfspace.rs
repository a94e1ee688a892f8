//! Halfspace intersections and their vertex enumeration.

use serde::{Deserialize, Serialize};

use crate::geometry::plane::Plane;
use crate::geometry::vector::{Point3, Vector3};
use crate::linalg::solve3;
use crate::scalar::Real;

/// Closed halfspace `{x : dot(normal, x - origin) <= 0}`; the normal points outward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HalfSpace<T> {
    pub origin: Point3<T>,
    pub normal: Vector3<T>,
}

impl<T: Real> HalfSpace<T> {
    pub fn new(origin: Point3<T>, normal: Vector3<T>) -> Self {
        Self { origin, normal }
    }

    pub fn from_plane(p: &Plane<T>) -> Self {
        Self { origin: p.origin, normal: p.normal }
    }

    /// `dot(normal, origin - x)`: positive inside, negative outside.
    #[inline]
    pub fn depth(&self, x: &Point3<T>) -> T {
        self.normal.dot(&(self.origin - *x))
    }

    /// Offset `c` in the form `dot(normal, x) <= c`.
    #[inline]
    pub fn offset(&self) -> T {
        self.normal.dot(&self.origin)
    }

    pub fn flipped(&self) -> Self {
        Self { origin: self.origin, normal: -self.normal }
    }
}

/// Outcome classification of a halfspace intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullStatus {
    Bounded,
    Unbounded,
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexEnumeration<T> {
    pub status: HullStatus,
    /// Extreme points; empty unless `status` is `Bounded`.
    pub vertices: Vec<Point3<T>>,
}

/// Feasibility slack for a vertex at position `v`.
#[inline]
pub(crate) fn feasibility_tol<T: Real>(v: &Point3<T>) -> T {
    T::tol() * (T::one() + v.x.abs().max(v.y.abs()).max(v.z.abs()))
}

/// Extreme points of `∩ {x : dot(n_i, x - o_i) <= 0}` by enumerating all plane triples.
pub fn halfspaces_to_vertices<T: Real>(hs: &[HalfSpace<T>]) -> VertexEnumeration<T> {
    let unbounded = VertexEnumeration { status: HullStatus::Unbounded, vertices: Vec::new() };
    if hs.len() < 4 || !recession_cone_is_trivial(hs) {
        return unbounded;
    }
    let vertices = feasible_triple_points(hs);
    if vertices.is_empty() {
        // A non-empty pointed polyhedron always has a vertex.
        return VertexEnumeration { status: HullStatus::Empty, vertices };
    }
    VertexEnumeration { status: HullStatus::Bounded, vertices }
}

/// True if no direction `d != 0` satisfies `dot(n_i, d) <= 0` for all `i`.
///
/// The normals must span space (no lineality); then a non-trivial recession cone
/// is pointed and has an extreme ray on two independent constraint planes, i.e.
/// parallel to some `± n_i x n_j`.
pub(crate) fn recession_cone_is_trivial<T: Real>(hs: &[HalfSpace<T>]) -> bool {
    if !normals_span_space(hs) {
        return false;
    }
    let tol = T::lit(1e-9).max(T::tol() * T::lit(1e-2));
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let Some(d) = hs[i].normal.cross(&hs[j].normal).try_normalize() else {
                continue;
            };
            if d.norm() < T::lit(0.5) {
                continue;
            }
            for dir in [d, -d] {
                if hs.iter().all(|h| h.normal.dot(&dir) <= tol) {
                    return false;
                }
            }
        }
    }
    true
}

fn normals_span_space<T: Real>(hs: &[HalfSpace<T>]) -> bool {
    let limit = T::lit(1e-9).max(T::tol() * T::lit(1e-2));
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let c = hs[i].normal.cross(&hs[j].normal);
            if c.norm() < limit {
                continue;
            }
            if hs[j + 1..].iter().any(|h| c.dot(&h.normal).abs() > limit) {
                return true;
            }
        }
    }
    false
}

fn feasible_triple_points<T: Real>(hs: &[HalfSpace<T>]) -> Vec<Point3<T>> {
    let mut out: Vec<Point3<T>> = Vec::new();
    let m = hs.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let rows = [hs[i].normal.to_array(), hs[j].normal.to_array(), hs[k].normal.to_array()];
                let Some(x) = solve3(rows, [hs[i].offset(), hs[j].offset(), hs[k].offset()]) else {
                    continue;
                };
                let v = Point3::from_array(x);
                if !v.is_finite() {
                    continue;
                }
                let tol = feasibility_tol(&v);
                if hs.iter().all(|h| h.depth(&v) >= -tol) {
                    let merge = tol * T::lit(10.0);
                    if !out.iter().any(|w| w.distance(&v) <= merge) {
                        out.push(v);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cube_halfspaces() -> Vec<HalfSpace<f64>> {
        let mut hs = Vec::new();
        for a in 0..3 {
            hs.push(HalfSpace::new(Point3::zero(), -Vector3::axis(a)));
            hs.push(HalfSpace::new(Vector3::axis(a), Vector3::axis(a)));
        }
        hs
    }

    #[test]
    fn cube_has_eight_corners() {
        let r = halfspaces_to_vertices(&cube_halfspaces());
        assert_eq!(r.status, HullStatus::Bounded);
        assert_eq!(r.vertices.len(), 8);
        for v in &r.vertices {
            for c in v.to_array() {
                assert!(c.abs() < 1e-12 || (c - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tetrahedron_vertices() {
        // Regular tetrahedron with vertices at alternating cube corners.
        let verts = [
            Point3::<f64>::from_f64(1.0, 1.0, 1.0),
            Point3::from_f64(1.0, -1.0, -1.0),
            Point3::from_f64(-1.0, 1.0, -1.0),
            Point3::from_f64(-1.0, -1.0, 1.0),
        ];
        let hs: Vec<_> = (0..4)
            .map(|skip| {
                let f: Vec<_> = (0..4).filter(|&i| i != skip).map(|i| verts[i]).collect();
                // Face opposite vertex `skip`; outward points away from it.
                let n = -verts[skip].normalized();
                HalfSpace::new(f[0], n)
            })
            .collect();
        let r = halfspaces_to_vertices(&hs);
        assert_eq!(r.status, HullStatus::Bounded);
        assert_eq!(r.vertices.len(), 4);
        for v in &verts {
            assert!(r.vertices.iter().any(|w| w.distance(v) < 1e-12));
        }
    }

    #[test]
    fn three_planes_are_unbounded() {
        let hs = &cube_halfspaces()[..3];
        assert_eq!(halfspaces_to_vertices(hs).status, HullStatus::Unbounded);
    }

    #[test]
    fn open_box_is_unbounded() {
        let mut hs = cube_halfspaces();
        hs.pop();
        let r = halfspaces_to_vertices(&hs);
        assert_eq!(r.status, HullStatus::Unbounded);
        assert!(r.vertices.is_empty());
    }

    #[test]
    fn contradictory_slab_is_empty() {
        let mut hs = cube_halfspaces();
        // x <= -1 contradicts x >= 0.
        hs.push(HalfSpace::new(Point3::from_f64(-1.0, 0.0, 0.0), Vector3::axis(0)));
        assert_eq!(halfspaces_to_vertices(&hs).status, HullStatus::Empty);
    }
}
