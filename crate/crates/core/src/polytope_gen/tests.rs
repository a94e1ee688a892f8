use super::*;
use crate::geometry::{ConvexPolytope, HalfSpace, Plane, Point3, Vector3};
use crate::rng::seeded;
use crate::structuring::NeighborhoodGraph;

fn box_planes(min: [f64; 3], max: [f64; 3]) -> Vec<Plane<f64>> {
    let mut out = Vec::new();
    for axis in 0..3 {
        let n = Vector3::<f64>::axis(axis);
        let (lo, hi) = (Point3::from_array(min), Point3::from_array(max));
        out.push(Plane::new(lo, -n).unwrap());
        out.push(Plane::new(hi, n).unwrap());
    }
    out
}

fn box_surface(min: [f64; 3], max: [f64; 3], steps: usize) -> Vec<Point3<f64>> {
    let mut out = Vec::new();
    for axis in 0..3 {
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [min[axis], max[axis]] {
            for i in 0..=steps {
                for j in 0..=steps {
                    let mut p = [0.0; 3];
                    p[axis] = side;
                    p[a] = min[a] + (max[a] - min[a]) * i as f64 / steps as f64;
                    p[b] = min[b] + (max[b] - min[b]) * j as f64 / steps as f64;
                    out.push(Point3::from_array(p));
                }
            }
        }
    }
    out
}

/// Exact signed distance to a box, negative inside.
fn box_sdf(min: [f64; 3], max: [f64; 3], x: &Point3<f64>) -> f64 {
    let q: Vec<f64> = (0..3).map(|i| (min[i] - x[i]).max(x[i] - max[i])).collect();
    let outside = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
    let inside = q.iter().copied().fold(f64::NEG_INFINITY, f64::max).min(0.0);
    outside + inside
}

fn exact_volume(min: [f64; 3], max: [f64; 3]) -> SignedDistanceGrid<f64> {
    let origin = Point3::from_f64(min[0] - 0.5, min[1] - 0.5, min[2] - 0.5);
    let dims = [0, 1, 2].map(|i| ((max[i] - min[i] + 1.0) / 0.05).round() as usize + 1);
    SignedDistanceGrid::from_fn(origin, 0.05, dims, |x| box_sdf(min, max, x))
}

fn params() -> EaParams<f64> {
    let cfg = EaConfig::<f64> { voxel_cell: Some(0.1), eps_geo: Some(0.02), population_size: 50, max_iterations: 50, ..Default::default() };
    cfg.resolve(3f64.sqrt(), 0.01).unwrap()
}

struct Cube {
    planes: Vec<Plane<f64>>,
    graph: NeighborhoodGraph,
    volume: SignedDistanceGrid<f64>,
    points: Vec<Point3<f64>>,
}

fn cube() -> Cube {
    let (min, max) = ([0.0; 3], [1.0; 3]);
    Cube {
        planes: box_planes(min, max),
        graph: NeighborhoodGraph::complete(6),
        volume: exact_volume(min, max),
        points: box_surface(min, max, 10),
    }
}

impl Cube {
    fn problem<'a>(&'a self, p: &'a EaParams<f64>) -> ClusterProblem<'a, f64> {
        ClusterProblem::new(&self.planes, &self.graph, &self.volume, p, (0..self.planes.len()).collect(), self.points.clone())
    }
}

#[test]
fn exact_cube_scores_one_point_nine_nine() {
    let c = cube();
    let p = params();
    let prob = c.problem(&p);
    let poly = prob.evaluate(&[0, 1, 2, 3, 4, 5]).unwrap();
    let terms = prob.score_terms(&[poly]);
    assert_eq!(terms.fg, 1.0);
    assert_eq!(terms.fp, 1.0);
    assert!((terms.total - 1.99).abs() < 1e-12);
}

#[test]
fn translated_cube_scores_only_the_penalty() {
    let c = cube();
    let p = params();
    let shifted: Vec<Plane<f64>> = c
        .planes
        .iter()
        .map(|pl| Plane::new(pl.origin + Vector3::from_f64(10.0, 0.0, 0.0), pl.normal).unwrap())
        .collect();
    let prob = c.problem(&p);
    let labelled = shifted.iter().enumerate().map(|(i, pl)| (i, HalfSpace::from_plane(pl))).collect();
    let far = prob.measure(ConvexPolytope::from_halfspaces(labelled).unwrap()).unwrap();
    assert!(prob.evaluate(&[0, 1, 2, 3, 4, 5]).is_some());
    let terms = prob.score_terms(&[std::sync::Arc::new(far)]);
    assert_eq!(terms.fg, 0.0);
    assert_eq!(terms.fp, 0.0);
    assert!((terms.total + 0.01).abs() < 1e-12);
}

#[test]
fn inward_normals_are_flipped_outward() {
    let c = cube();
    let flipped: Vec<Plane<f64>> = c.planes.iter().map(|p| p.flipped()).collect();
    let oriented = orient_planes(&flipped, &c.points);
    for (h, p) in oriented.iter().zip(&c.planes) {
        assert!(h.normal.dot(&p.normal) > 0.99);
    }
}

#[test]
fn full_walk_gives_the_cube() {
    let c = cube();
    let mut p = params();
    p.min_walk = 5;
    p.max_walk = 5;
    let prob = c.problem(&p);
    let poly = random_polytope(&prob, &mut seeded(3)).unwrap();
    assert_eq!(poly.polytope.vertices().len(), 8);
    assert_eq!(poly.key(), &[0, 1, 2, 3, 4, 5]);
}

#[test]
fn three_planes_do_not_bound() {
    let c = cube();
    let p = params();
    assert!(c.problem(&p).evaluate(&[0, 2, 4]).is_none());
    assert!(c.problem(&p).evaluate(&[0, 1, 2, 3, 4]).is_none());
}

#[test]
fn walk_stays_in_the_seed_component() {
    let mut planes = box_planes([0.0; 3], [1.0; 3]);
    planes.extend(box_planes([3.0, 0.0, 0.0], [4.0, 1.0, 1.0]));
    let mut graph = NeighborhoodGraph::new(12);
    for base in [0, 6] {
        for i in 0..6 {
            for j in i + 1..6 {
                if i / 2 != j / 2 {
                    graph.add_edge(base + i, base + j);
                }
            }
        }
    }
    let mut points = box_surface([0.0; 3], [1.0; 3], 6);
    points.extend(box_surface([3.0, 0.0, 0.0], [4.0, 1.0, 1.0], 6));
    let volume = exact_volume([0.0; 3], [4.0, 1.0, 1.0]);
    let p = params();
    let prob = ClusterProblem::new(&planes, &graph, &volume, &p, (0..12).collect(), points);
    let mut rng = seeded(11);
    for _ in 0..50 {
        let ids = random_plane_walk(&prob, &mut rng);
        assert!(ids.iter().all(|&i| i < 6) || ids.iter().all(|&i| i >= 6), "{ids:?}");
    }
}

#[test]
fn crossover_swaps_ranges() {
    let (a, b) = (vec!["p1", "p2"], vec!["q1"]);
    let mut found = false;
    for seed in 0..64 {
        let (ca, cb) = crossover(&a, &b, &mut seeded(seed));
        if cb == ["p2"] {
            assert_eq!(ca, ["p1", "q1"]);
            found = true;
        }
        assert!(!ca.is_empty() && !cb.is_empty());
    }
    assert!(found);
    let (ca, cb) = crossover(&a, &a, &mut seeded(1));
    let mut all: Vec<_> = ca.iter().chain(&cb).collect();
    all.sort();
    assert_eq!(all, [&"p1", &"p1", &"p2", &"p2"]);
}

#[test]
fn mutation_respects_size_bounds() {
    let c = cube();
    let mut p = params();
    p.n_i_max = 1;
    let prob = c.problem(&p);
    let ind = prob.individual(vec![prob.evaluate(&[0, 1, 2, 3, 4, 5]).unwrap()]);
    for kind in [Mutation::Remove, Mutation::Add, Mutation::Extend] {
        let m = mutate_with(&prob, &ind, kind, &mut seeded(5));
        assert_eq!(m.plane_sets(), ind.plane_sets());
        assert_eq!(m.score, ind.score);
    }
}

#[test]
fn extend_closes_an_open_plane_set() {
    // Five cube faces are open; a sixth plane closing the box is accepted.
    let c = cube();
    let p = params();
    let prob = c.problem(&p);
    assert!(prob.evaluate(&[0, 1, 2, 3, 4]).is_none());
    let closed = prob.evaluate(&[0, 1, 2, 3, 4, 5]).unwrap();
    assert_eq!(closed.polytope.vertices().len(), 8);
}

#[test]
fn evolve_finds_the_cube() {
    let c = cube();
    let p = params();
    for seed in 0..10 {
        let prob = c.problem(&p);
        let r = evolve(&prob, seed).unwrap();
        assert!(r.best.score >= 1.9, "seed {seed}: {}", r.best.score);
        assert!(r.generations <= 50);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(r.best.plane_sets(), vec![vec![0, 1, 2, 3, 4, 5]]);
    }
}

#[test]
fn stall_limit_one_stops_after_two_generations() {
    let c = cube();
    let mut p = params();
    p.stall_limit = 1;
    p.crossover_rate = 0.0;
    p.mutation_rate = 0.0;
    p.elite_individual = false;
    let r = evolve(&c.problem(&p), 9).unwrap();
    assert_eq!(r.generations, 2);
    assert_eq!(r.trace.len(), 2);
}

#[test]
fn pool_adds_graph_neighbors() {
    let c = cube();
    let p = params();
    let mut graph = NeighborhoodGraph::new(6);
    graph.add_edge(0, 5);
    let prob = ClusterProblem::new(&c.planes, &graph, &c.volume, &p, vec![0, 1], c.points.clone());
    assert_eq!(prob.pool, vec![0, 1, 5]);
}

#[test]
fn unbounded_cluster_is_an_error() {
    let c = cube();
    let p = params();
    // Four planes linked only to each other can never close a box.
    let mut graph = NeighborhoodGraph::new(6);
    for i in 0..4 {
        for j in i + 1..4 {
            graph.add_edge(i, j);
        }
    }
    let prob = ClusterProblem::new(&c.planes, &graph, &c.volume, &p, vec![0, 1, 2, 3], c.points.clone());
    assert!(matches!(evolve(&prob, 0), Err(crate::error::Error::NoBoundedPolytope)));
}

fn scored(cluster: usize, score: f64, ids: [usize; 6], min: f64, max: f64) -> ScoredPolytope<f64> {
    let planes = box_planes([min; 3], [max; 3]);
    let labelled = ids.iter().zip(&planes).map(|(&i, p)| (i, HalfSpace::from_plane(p))).collect();
    ScoredPolytope { cluster, score, polytope: ConvexPolytope::from_halfspaces(labelled).unwrap() }
}

#[test]
fn filter_examples() {
    let a = scored(0, 0.9, [0, 1, 2, 3, 4, 5], 0.0, 1.0);
    let same = scored(1, 0.8, [0, 1, 2, 3, 4, 5], 0.0, 1.0);
    assert_eq!(filter_polytopes(vec![a.clone(), same], 0.5).len(), 1);

    let small = scored(0, 0.95, [6, 7, 8, 9, 10, 11], 0.25, 0.75);
    let out = filter_polytopes(vec![small, a.clone()], 0.5);
    assert_eq!(out, vec![a.clone()]);

    let weak = scored(0, 0.1, [6, 7, 8, 9, 10, 11], 3.0, 4.0);
    assert_eq!(filter_polytopes(vec![weak, a.clone()], 0.5), vec![a]);
}
