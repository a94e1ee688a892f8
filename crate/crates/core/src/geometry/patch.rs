//! Per-plane alpha-shape surface patches and segment/ray queries against them.

use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::geometry::plane::{plane_basis, Plane};
use crate::geometry::vector::{Point3, Vector3};
use crate::scalar::Real;

/// Triangles smaller than this (square units) are dropped by the alpha filter.
const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Triangulated region of one plane covered by samples.
#[derive(Debug, Clone)]
pub struct TrianglePatch<T> {
    pub plane_id: usize,
    pub origin: Point3<T>,
    pub normal: Vector3<T>,
    pub triangles: Vec<[Point3<T>; 3]>,
    u: Vector3<T>,
    v: Vector3<T>,
    tris2d: Vec<[[T; 2]; 3]>,
    grid: TriangleGrid<T>,
}

impl<T: Real> TrianglePatch<T> {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    /// Total area of the kept triangles.
    pub fn area(&self) -> T {
        self.tris2d.iter().map(|t| triangle_area(t)).sum()
    }

    #[inline]
    fn to_2d(&self, p: &Point3<T>) -> [T; 2] {
        let d = *p - self.origin;
        [d.dot(&self.u), d.dot(&self.v)]
    }

    /// True if the projection of `p` onto the plane falls in a triangle.
    pub fn covers(&self, p: &Point3<T>) -> bool {
        let q = self.to_2d(p);
        self.grid.candidates(q).iter().any(|&i| point_in_triangle(q, &self.tris2d[i as usize]))
    }

    /// Parameter `t` in `[0, 1]` where the segment `a + t (b - a)` crosses this patch.
    fn segment_crossing(&self, a: &Point3<T>, b: &Point3<T>) -> Option<T> {
        if self.is_empty() {
            return None;
        }
        let sa = self.normal.dot(&(*a - self.origin));
        let sb = self.normal.dot(&(*b - self.origin));
        let zero = T::zero();
        if (sa > zero && sb > zero) || (sa < zero && sb < zero) || (sa == zero && sb == zero) {
            return None;
        }
        let t = sa / (sa - sb);
        let p = *a + (*b - *a) * t;
        self.covers(&p).then_some(t)
    }

    /// Distance along the unit direction `dir` to this patch, if it lies in `[min_t, max_t]`.
    fn ray_distance(&self, origin: &Point3<T>, dir: &Vector3<T>, min_t: T, max_t: T) -> Option<T> {
        if self.is_empty() {
            return None;
        }
        let denom = self.normal.dot(dir);
        if denom.abs() < T::lit(1e-12) {
            return None;
        }
        let t = self.normal.dot(&(self.origin - *origin)) / denom;
        if t < min_t || t > max_t {
            return None;
        }
        self.covers(&(*origin + *dir * t)).then_some(t)
    }
}

/// Alpha-shape patch of `points` on `plane`: Delaunay triangulation of the projected
/// points keeping triangles with circumradius `<= alpha`.
///
/// Fewer than three distinct or only collinear points give an empty patch.
pub fn triangulate_patch<T: Real>(plane_id: usize, plane: &Plane<T>, points: &[Point3<T>], alpha: T) -> TrianglePatch<T> {
    let (u, v) = plane_basis(&plane.normal);
    let origin = plane.origin;
    let projected: Vec<Point2<f64>> = points
        .iter()
        .filter(|p| p.is_finite())
        .map(|p| {
            let d = *p - origin;
            Point2::new(d.dot(&u).as_f64(), d.dot(&v).as_f64())
        })
        .collect();
    let mut tris2d = Vec::new();
    if projected.len() >= 3 {
        if let Ok(dt) = DelaunayTriangulation::<Point2<f64>>::bulk_load_stable(projected) {
            let alpha2 = alpha.as_f64() * alpha.as_f64();
            for face in dt.inner_faces() {
                let (_, r2) = face.circumcircle();
                let area = face.area().abs();
                if area <= MIN_TRIANGLE_AREA || !(r2 <= alpha2) {
                    continue;
                }
                let pos = face.positions();
                tris2d.push(pos.map(|p| [T::lit(p.x), T::lit(p.y)]));
            }
        }
    }
    let triangles = tris2d
        .iter()
        .map(|t| t.map(|q| origin + u * q[0] + v * q[1]))
        .collect();
    let grid = TriangleGrid::build(&tris2d);
    TrianglePatch { plane_id, origin, normal: plane.normal, triangles, u, v, tris2d, grid }
}

/// True iff the segment `(a, b)`, shortened by `guard` at both ends, crosses any patch.
///
/// The endpoints are put in a canonical order first so the predicate is exactly symmetric.
pub fn segment_blocked<T: Real>(a: &Point3<T>, b: &Point3<T>, patches: &[TrianglePatch<T>], guard: T) -> bool {
    let (a, b) = if lex_less(b, a) { (b, a) } else { (a, b) };
    let d = *b - *a;
    let len = d.norm();
    if len <= guard * T::lit(2.0) || len == T::zero() {
        return false;
    }
    let step = d * (guard / len);
    let a2 = *a + step;
    let b2 = *b - step;
    patches.iter().any(|p| p.segment_crossing(&a2, &b2).is_some())
}

/// Distance to the first patch hit by the ray `origin + t dir`, `t` in `[min_t, max_t]`.
pub fn ray_hit<T: Real>(
    origin: &Point3<T>,
    dir: &Vector3<T>,
    patches: &[TrianglePatch<T>],
    min_t: T,
    max_t: T,
) -> Option<T> {
    let mut best: Option<T> = None;
    for p in patches {
        let limit = best.unwrap_or(max_t);
        if let Some(t) = p.ray_distance(origin, dir, min_t, limit) {
            best = Some(t);
        }
    }
    best
}

fn lex_less<T: Real>(a: &Point3<T>, b: &Point3<T>) -> bool {
    (a.x, a.y, a.z).partial_cmp(&(b.x, b.y, b.z)) == Some(std::cmp::Ordering::Less)
}

fn triangle_area<T: Real>(t: &[[T; 2]; 3]) -> T {
    let cross = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]);
    cross.abs() * T::lit(0.5)
}

fn point_in_triangle<T: Real>(q: [T; 2], t: &[[T; 2]; 3]) -> bool {
    let edge = |a: [T; 2], b: [T; 2]| (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
    let d0 = edge(t[0], t[1]);
    let d1 = edge(t[1], t[2]);
    let d2 = edge(t[2], t[0]);
    let scale = (t[1][0] - t[0][0]).abs() + (t[1][1] - t[0][1]).abs() + (t[2][0] - t[0][0]).abs() + (t[2][1] - t[0][1]).abs();
    let eps = T::epsilon() * T::lit(64.0) * scale * scale;
    let has_neg = d0 < -eps || d1 < -eps || d2 < -eps;
    let has_pos = d0 > eps || d1 > eps || d2 > eps;
    !(has_neg && has_pos)
}

/// Uniform bucket grid over the triangles' 2D bounding boxes.
#[derive(Debug, Clone)]
struct TriangleGrid<T> {
    min: [T; 2],
    cell: T,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl<T: Real> TriangleGrid<T> {
    fn build(tris: &[[[T; 2]; 3]]) -> Self {
        let empty = Self { min: [T::zero(); 2], cell: T::one(), nx: 0, ny: 0, cells: Vec::new() };
        if tris.is_empty() {
            return empty;
        }
        let mut lo = [T::infinity(); 2];
        let mut hi = [T::neg_infinity(); 2];
        for t in tris {
            for p in t {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        let w = (hi[0] - lo[0]).max(T::min_positive_value());
        let h = (hi[1] - lo[1]).max(T::min_positive_value());
        let target = T::from_usize_lossy(tris.len()).sqrt().max(T::one());
        let cell = (w.max(h) / target).max((w * h / T::from_usize_lossy(tris.len())).sqrt()).max(T::min_positive_value());
        let nx = ((w / cell).ceil().to_usize().unwrap_or(1)).clamp(1, 512);
        let ny = ((h / cell).ceil().to_usize().unwrap_or(1)).clamp(1, 512);
        let cell = (w / T::from_usize_lossy(nx)).max(h / T::from_usize_lossy(ny));
        let mut grid = Self { min: lo, cell, nx, ny, cells: vec![Vec::new(); nx * ny] };
        for (i, t) in tris.iter().enumerate() {
            let tlo = [t[0][0].min(t[1][0]).min(t[2][0]), t[0][1].min(t[1][1]).min(t[2][1])];
            let thi = [t[0][0].max(t[1][0]).max(t[2][0]), t[0][1].max(t[1][1]).max(t[2][1])];
            let (x0, y0) = grid.cell_of(tlo);
            let (x1, y1) = grid.cell_of(thi);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    grid.cells[y * nx + x].push(i as u32);
                }
            }
        }
        grid
    }

    fn cell_of(&self, q: [T; 2]) -> (usize, usize) {
        let fx = ((q[0] - self.min[0]) / self.cell).floor();
        let fy = ((q[1] - self.min[1]) / self.cell).floor();
        let cx = fx.to_isize().unwrap_or(0).clamp(0, self.nx as isize - 1) as usize;
        let cy = fy.to_isize().unwrap_or(0).clamp(0, self.ny as isize - 1) as usize;
        (cx, cy)
    }

    fn candidates(&self, q: [T; 2]) -> &[u32] {
        if self.cells.is_empty() {
            return &[];
        }
        let slack = self.cell * T::lit(1e-9);
        let w = self.cell * T::from_usize_lossy(self.nx);
        let h = self.cell * T::from_usize_lossy(self.ny);
        if q[0] < self.min[0] - slack
            || q[1] < self.min[1] - slack
            || q[0] > self.min[0] + w + slack
            || q[1] > self.min[1] + h + slack
        {
            return &[];
        }
        let (x, y) = self.cell_of(q);
        &self.cells[y * self.nx + x]
    }
}
