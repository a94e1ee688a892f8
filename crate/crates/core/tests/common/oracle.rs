//! Independent reference computations shared by the integration tests.

use polyfit::geometry::{ConvexPolytope, HalfSpace, Plane, Point3};
use polyfit::polytope_gen::{ClusterProblem, EaParams, SignedDistanceGrid};
use polyfit::structuring::NeighborhoodGraph;

use super::{box_scene, Box3};

/// Exact signed distance to a union of boxes, negative inside.
pub fn union_sdf(boxes: &[Box3], p: &Point3<f64>) -> f64 {
    boxes
        .iter()
        .map(|(lo, hi)| {
            let q = [p.x, p.y, p.z];
            let d: Vec<f64> = (0..3).map(|i| (lo[i] - q[i]).max(q[i] - hi[i])).collect();
            let outside = d.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
            outside + d.iter().cloned().fold(f64::MIN, f64::max).min(0.0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Sampled `union_sdf` with cell 0.05 covering the boxes plus half a unit of margin.
pub fn union_grid(boxes: &[Box3]) -> SignedDistanceGrid<f64> {
    let cell = 0.05;
    let hi = boxes.iter().fold([0.0f64; 3], |m, (_, h)| [m[0].max(h[0]), m[1].max(h[1]), m[2].max(h[2])]);
    let dims = [0, 1, 2].map(|i| ((hi[i] + 1.0) / cell).ceil() as usize + 1);
    SignedDistanceGrid::from_fn(Point3::new(-0.5, -0.5, -0.5), cell, dims, |p| union_sdf(boxes, p))
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Every feasible intersection point of three planes `n · x = d`, by Cramer's rule.
pub fn brute_force_vertices(normals: &[[f64; 3]], offsets: &[f64]) -> Vec<[f64; 3]> {
    let n = normals.len();
    let mut out: Vec<[f64; 3]> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = [normals[i], normals[j], normals[k]];
                let d = det3(m);
                if d.abs() < 1e-9 {
                    continue;
                }
                let rhs = [offsets[i], offsets[j], offsets[k]];
                let mut x = [0.0; 3];
                for (c, xc) in x.iter_mut().enumerate() {
                    let mut mc = m;
                    for r in 0..3 {
                        mc[r][c] = rhs[r];
                    }
                    *xc = det3(mc) / d;
                }
                let feasible = (0..n).all(|l| normals[l].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() <= offsets[l] + 1e-9);
                if feasible && !out.iter().any(|v| (0..3).all(|c| (v[c] - x[c]).abs() < 1e-7)) {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Planes, neighborhood graph, target volume and samples of a box union.
pub struct Scene {
    pub planes: Vec<Plane<f64>>,
    pub graph: NeighborhoodGraph,
    pub volume: SignedDistanceGrid<f64>,
    pub points: Vec<Point3<f64>>,
}

/// Planes are adjacent when their samples come within 1.5 spacings.
pub fn scene(boxes: &[Box3], h: f64) -> Scene {
    let (planes, structured) = box_scene(boxes, h);
    let mut graph = NeighborhoodGraph::new(planes.len());
    for a in &structured.points {
        for b in &structured.points {
            if a.planes[0] < b.planes[0] && a.position.distance(&b.position) < 1.5 * h {
                graph.add_edge(a.planes[0], b.planes[0]);
            }
        }
    }
    Scene { planes, graph, volume: union_grid(boxes), points: structured.positions() }
}

impl Scene {
    pub fn problem<'a>(&'a self, p: &'a EaParams<f64>) -> ClusterProblem<'a, f64> {
        ClusterProblem::new(&self.planes, &self.graph, &self.volume, p, (0..self.planes.len()).collect(), self.points.clone())
    }
}

/// Objective of a single polytope computed from scratch: coverage of the cluster
/// points plus the share of voxel centres inside the target solid, minus the size penalty.
pub fn single_score(problem: &ClusterProblem<'_, f64>, poly: &ConvexPolytope<f64>) -> f64 {
    let p = problem.params;
    let near = problem.points.iter().filter(|x| poly.signed_distance(x).abs() < p.eps_geo).count();
    let fg = near as f64 / problem.points.len() as f64;
    let voxels = poly.voxelize(p.voxel_cell).unwrap();
    let inside = voxels.centers.iter().filter(|c| problem.volume.value(c) < p.eps_vol).count();
    let fp = inside as f64 / voxels.len() as f64;
    p.alpha * fg + p.beta * fp - p.gamma / p.n_i_max as f64
}

/// Best single polytope over every subset of at least four planes.
pub fn exhaustive_optimum(problem: &ClusterProblem<'_, f64>) -> f64 {
    let n = problem.planes.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << n) {
        if mask.count_ones() < 4 {
            continue;
        }
        let labelled: Vec<(usize, HalfSpace<f64>)> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| (i, problem.oriented[i])).collect();
        if let Ok(poly) = ConvexPolytope::from_halfspaces(labelled) {
            best = best.max(single_score(problem, &poly));
        }
    }
    best
}
