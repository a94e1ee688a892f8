//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::oracle::{brute_force_vertices, exhaustive_optimum, scene};
use common::{adjusted_rand_index, box_scene, Box3, L_SHAPE, UNIT_CUBE};
use polyfit::clustering::{
    build_surface_patches, build_visibility_graph, estimate_cluster_count, spectral_cluster, Affinity, ClusteringMethod, LaplacianKind,
    VisibilityContext, VisibilityGraph,
};
use polyfit::geometry::{halfspaces_to_vertices, hausdorff, HullStatus, Point3, Vector3};
use polyfit::pipeline::{density_for_points, generate_synthetic, run_pipeline, GroundTruth, SyntheticModel};
use polyfit::polytope_gen::{evolve, filter_polytopes, EaConfig, EaParams};
use polyfit::rng::seeded;
use polyfit::{ConvexPolytope, HalfSpace, PipelineConfig, PipelineOutput, ScoredPolytope};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn synthetic(model: SyntheticModel, seed: u64) -> (polyfit::OrientedCloud, GroundTruth) {
    generate_synthetic(model, density_for_points(model, 10_000), 0.002, seed).unwrap()
}

fn run(model: SyntheticModel, method: ClusteringMethod, seed: u64) -> (PipelineOutput, GroundTruth, f64) {
    let (cloud, truth) = synthetic(model, seed);
    let mut cfg = PipelineConfig::default();
    cfg.clustering.method = method;
    cfg.rng_seed = seed;
    let start = Instant::now();
    let out = run_pipeline(&cloud, &cfg).unwrap();
    (out, truth, start.elapsed().as_secs_f64())
}

fn corners(b: &[[f64; 3]; 2]) -> Vec<Point3<f64>> {
    (0..8).map(|c| Point3::new(b[c & 1][0], b[c >> 1 & 1][1], b[c >> 2 & 1][2])).collect()
}

/// Largest distance from an output polytope to its closest box, matching polytopes to boxes one to one.
fn match_boxes(polytopes: &[ScoredPolytope], boxes: &[[[f64; 3]; 2]]) -> Option<f64> {
    if polytopes.len() != boxes.len() {
        return None;
    }
    let mut used = vec![false; boxes.len()];
    let mut worst: f64 = 0.0;
    for p in polytopes {
        let (k, d) = boxes
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, b)| (k, hausdorff(p.polytope.vertices(), &corners(b))))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        used[k] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

fn cube_end_to_end() -> Verdict {
    let mut failures = Vec::new();
    let mut slowest: f64 = 0.0;
    for seed in 1..=10 {
        let (out, truth, secs) = run(SyntheticModel::Cube, ClusteringMethod::Wcseg, seed);
        slowest = slowest.max(secs);
        let r = &out.report;
        let ok = r.polytope_count == 1
            && r.polytopes[0].planes.len() == 6
            && r.union_fg >= 0.98
            && (r.polytopes[0].volume - truth.volume).abs() <= 0.05 * truth.volume
            && secs < 60.0;
        if !ok {
            let vol = r.polytopes.first().map_or(0.0, |p| p.volume);
            failures.push(format!("seed {seed}: {} polytopes, fg {:.3}, volume {vol:.3}, {secs:.1}s", r.polytope_count, r.union_fg));
        }
    }
    if failures.is_empty() {
        verdict(true, format!("10/10 seeds, slowest {slowest:.1}s"))
    } else {
        verdict(false, failures.join("; "))
    }
}

fn two_cuboids() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for method in [ClusteringMethod::Wcseg, ClusteringMethod::Los] {
        let (out, truth, _) = run(SyntheticModel::TwoCuboids, method, 1);
        let worst = match_boxes(&out.polytopes, &truth.boxes);
        let ok = out.report.cluster_count == 2 && worst.is_some_and(|d| d <= 0.05);
        pass &= ok;
        notes.push(format!(
            "{method}: {} clusters, {} polytopes, hausdorff {}",
            out.report.cluster_count,
            out.polytopes.len(),
            worst.map_or("-".into(), |d| format!("{d:.4}"))
        ));
    }
    verdict(pass, notes.join("; "))
}

fn l_shape() -> Verdict {
    let (out, truth, _) = run(SyntheticModel::LShape, ClusteringMethod::Wcseg, 1);
    let splits = [truth.boxes.clone(), vec![[[0.0; 3], [1.0, 2.0, 1.0]], [[1.0, 0.0, 0.0], [2.0, 1.0, 1.0]]]];
    let worst = splits.iter().filter_map(|s| match_boxes(&out.polytopes, s)).fold(f64::INFINITY, f64::min);
    let r = &out.report;
    let pass = r.cluster_count == 2 && out.polytopes.len() == 2 && worst <= 0.05 && r.union_fg >= 0.95;
    verdict(pass, format!("{} clusters, {} polytopes, fg {:.3}, hausdorff to decomposition {worst:.4}", r.cluster_count, out.polytopes.len(), r.union_fg))
}

fn visibility() -> Verdict {
    let h = 0.05;
    let alpha = 2.0 * std::f64::consts::SQRT_2 * h;
    let mut convex = f64::INFINITY;
    for boxes in [vec![([0.0, 0.0, 0.0], [1.0, 1.0, 1.0])], vec![([0.0, 0.0, 0.0], [2.0, 1.0, 0.5])]] {
        let (planes, structured) = box_scene(&boxes, h);
        let patches = build_surface_patches(&structured, &planes, alpha);
        let ctx = VisibilityContext { patches: &patches, guard: 1.5 * h, interior: None };
        let samples = structured.points.iter().step_by(structured.len() / 300).map(|p| p.position).collect();
        convex = convex.min(build_visibility_graph(samples, &ctx).affinity.density());
    }

    let cubes: [Box3; 2] = [([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), ([3.0, 0.0, 0.0], [4.0, 1.0, 1.0])];
    let slab: Box3 = ([1.8, -1.0, -1.0], [2.2, 2.0, 2.0]);
    let (planes, structured) = box_scene(&[cubes[0], cubes[1], slab], h);
    let patches = build_surface_patches(&structured, &planes, alpha);
    let ctx = VisibilityContext { patches: &patches, guard: 1.5 * h, interior: None };
    let side = |p: &Point3<f64>| if p.x <= 1.0 + 1e-9 { Some(0) } else if p.x >= 3.0 - 1e-9 { Some(1) } else { None };
    let on_cubes: Vec<Point3<f64>> = structured.points.iter().map(|p| p.position).filter(|p| side(p).is_some()).collect();
    let samples: Vec<Point3<f64>> = on_cubes.iter().step_by(on_cubes.len() / 200).copied().collect();
    let graph = build_visibility_graph(samples.clone(), &ctx);
    let (mut pairs, mut seen) = (0usize, 0usize);
    for i in 0..samples.len() {
        for j in 0..samples.len() {
            if side(&samples[i]) == Some(0) && side(&samples[j]) == Some(1) {
                pairs += 1;
                seen += graph.affinity.get(i, j) as usize;
            }
        }
    }
    let cross = seen as f64 / pairs as f64;
    verdict(convex >= 0.99 && cross <= 0.02, format!("convex density {convex:.4}, blocked cross density {cross:.4}"))
}

fn blocks(sizes: &[usize], bridge: Option<(usize, usize)>) -> (VisibilityGraph<f64>, Vec<usize>) {
    let n: usize = sizes.iter().sum();
    let truth: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let mut affinity = Affinity::from_fn(n, |i, j| truth[i] == truth[j]);
    if let Some((i, j)) = bridge {
        affinity.set(i, j);
    }
    let samples = (0..n).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
    (VisibilityGraph { samples, affinity }, truth)
}

const KINDS: [LaplacianKind; 2] = [LaplacianKind::Symmetric, LaplacianKind::RandomWalk];

fn spectral() -> Verdict {
    let cases = [(vec![20, 30], None), (vec![20, 30], Some((0, 25))), (vec![15, 20, 25], None), (vec![15, 20, 25], Some((3, 40)))];
    let mut worst: f64 = 1.0;
    for (sizes, bridge) in &cases {
        let (graph, truth) = blocks(sizes, *bridge);
        for kind in KINDS {
            for seed in 0..3 {
                let ari = spectral_cluster(&graph, sizes.len(), kind, seed).map_or(f64::NEG_INFINITY, |l| adjusted_rand_index(&l, &truth));
                worst = worst.min(ari);
            }
        }
    }
    verdict(worst == 1.0, format!("minimum ARI {worst} over 24 runs"))
}

fn model_selection() -> Verdict {
    let (two, _) = blocks(&[20, 30], Some((0, 25)));
    let (complete, _) = blocks(&[40], None);
    let mut wrong = Vec::new();
    for range in [(1, 2), (1, 3), (1, 5), (1, 10), (1, 15)] {
        for kind in KINDS {
            let k2 = estimate_cluster_count(&two, range, 1.0, kind, 7).map(|e| e.k).ok();
            let k1 = estimate_cluster_count(&complete, range, 1.0, kind, 7).map(|e| e.k).ok();
            if k2 != Some(2) || k1 != Some(1) {
                wrong.push(format!("{range:?} {kind}: {k2:?}/{k1:?}"));
            }
        }
    }
    verdict(wrong.is_empty(), if wrong.is_empty() { "k = 2 and k = 1 for 5 ranges, both kinds".into() } else { wrong.join("; ") })
}

fn ea_params(n_i_max: usize) -> EaParams<f64> {
    let cfg = EaConfig::<f64> { voxel_cell: Some(0.1), eps_geo: Some(0.02), n_i_max, ..Default::default() };
    cfg.resolve(3f64.sqrt(), 0.01).unwrap()
}

fn ea_oracle(traces: &mut Vec<Vec<f64>>) -> Verdict {
    let p = ea_params(1);
    let apart: [Box3; 2] = [([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), ([2.0, 0.0, 0.0], [3.0, 1.0, 1.0])];
    let mut worst_gap: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for boxes in [&UNIT_CUBE[..], &L_SHAPE[..], &apart[..]] {
        let s = scene(boxes, 0.1);
        if s.planes.len() > 8 {
            return verdict(false, format!("{} planes in a test cluster", s.planes.len()));
        }
        let oracle = exhaustive_optimum(&s.problem(&p));
        for seed in 0..10 {
            let start = Instant::now();
            let result = evolve(&s.problem(&p), seed).unwrap();
            slowest = slowest.max(start.elapsed().as_secs_f64());
            worst_gap = worst_gap.max((result.best.score - oracle).abs());
            traces.push(result.trace);
        }
    }
    verdict(worst_gap < 1e-9 && slowest < 30.0, format!("3 clusters x 10 seeds, max |F - F*| {worst_gap:.2e}, slowest {slowest:.2}s"))
}

fn elitism(mut traces: Vec<Vec<f64>>) -> Verdict {
    let s = scene(&L_SHAPE, 0.1);
    for n_i_max in [1, 3, 10] {
        let mut p = ea_params(n_i_max);
        p.population_size = 60;
        p.max_iterations = 150;
        for seed in 0..10 {
            traces.push(evolve(&s.problem(&p), seed).unwrap().trace);
        }
    }
    let bad = traces.iter().filter(|t| t.windows(2).any(|w| w[1] < w[0])).count();
    verdict(bad == 0, format!("{} traces, {bad} with a decrease", traces.len()))
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / l, v[1] / l, v[2] / l]
}

fn h_to_v() -> Verdict {
    let mut rng = seeded(2024);
    let tetra = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let mut mismatches = 0;
    for _ in 0..200 {
        let mut normals: Vec<[f64; 3]> = tetra.iter().map(|t| unit(t.map(|c: f64| c + rng.gen_range(-0.2..0.2)))).collect();
        for _ in 0..rng.gen_range(0..=6) {
            let d = loop {
                let d = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
                if d.iter().map(|x| x * x).sum::<f64>() > 0.01 {
                    break d;
                }
            };
            normals.push(unit(d));
        }
        let offsets: Vec<f64> = normals.iter().map(|_| rng.gen_range(0.3..1.5)).collect();
        let hs: Vec<HalfSpace> = normals
            .iter()
            .zip(&offsets)
            .map(|(n, d)| {
                let n = Vector3::new(n[0], n[1], n[2]);
                HalfSpace::new(Point3::zero() + n * *d, n)
            })
            .collect();
        let got = halfspaces_to_vertices(&hs);
        let expected = brute_force_vertices(&normals, &offsets);
        let same = got.status == HullStatus::Bounded
            && got.vertices.len() == expected.len()
            && got.vertices.iter().all(|v| expected.iter().any(|e| (e[0] - v.x).abs() < 1e-7 && (e[1] - v.y).abs() < 1e-7 && (e[2] - v.z).abs() < 1e-7));
        mismatches += usize::from(!same);
    }
    verdict(mismatches == 0, format!("200 instances, {mismatches} mismatches"))
}

fn axis_box(base: usize, lo: [f64; 3], hi: [f64; 3]) -> ConvexPolytope {
    let mut labelled = Vec::new();
    for axis in 0..3 {
        let n = Vector3::<f64>::axis(axis);
        labelled.push((base + 2 * axis, HalfSpace::new(Point3::from_array(lo), -n)));
        labelled.push((base + 2 * axis + 1, HalfSpace::new(Point3::from_array(hi), n)));
    }
    ConvexPolytope::from_halfspaces(labelled).unwrap()
}

fn scored(cluster: usize, score: f64, polytope: ConvexPolytope) -> ScoredPolytope {
    ScoredPolytope { cluster, score, polytope }
}

fn filtering() -> Verdict {
    let big = axis_box(0, [0.0; 3], [2.0; 3]);
    let small = axis_box(6, [0.5; 3], [1.0; 3]);
    let apart = axis_box(12, [5.0; 3], [6.0; 3]);
    let dedup = filter_polytopes(vec![scored(0, 0.4, big.clone()), scored(1, 0.9, big.clone())], 0.0);
    let contained = filter_polytopes(vec![scored(0, 0.9, small.clone()), scored(0, 0.5, big.clone())], 0.0);
    let threshold = filter_polytopes(vec![scored(0, 0.1, apart.clone()), scored(0, 0.8, big.clone())], 0.5);
    let examples = dedup.len() == 1
        && contained.len() == 1
        && contained[0].polytope == big
        && threshold.len() == 1
        && threshold[0].score == 0.8;

    let mut rng = seeded(99);
    let mut not_idempotent = 0;
    for _ in 0..200 {
        let items: Vec<ScoredPolytope> = (0..rng.gen_range(0..10))
            .map(|_| {
                let lo = [0; 3].map(|_| f64::from(rng.gen_range(0u8..3)));
                let hi = lo.map(|c| c + f64::from(rng.gen_range(1u8..3)));
                scored(rng.gen_range(0..2), rng.gen_range(0.0..1.0), axis_box(6 * rng.gen_range(0..4), lo, hi))
            })
            .collect();
        let threshold = rng.gen_range(0.0..0.6);
        let once = filter_polytopes(items, threshold);
        not_idempotent += usize::from(filter_polytopes(once.clone(), threshold) != once);
    }
    verdict(examples && not_idempotent == 0, format!("examples {}, {not_idempotent}/200 random sets changed on reapplication", if examples { "ok" } else { "wrong" }))
}

fn polyfit_bin(args: &[&str], cwd: &Path, threads: &str) -> bool {
    Command::new(env!("CARGO_BIN_EXE_polyfit"))
        .args(args)
        .current_dir(cwd)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .is_ok_and(|o| o.status.success())
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    if !polyfit_bin(&["synth", "l_shape", "--seed", "3", "--out", "l.xyz"], d, "1") {
        return verdict(false, "synth failed");
    }
    let mut outputs = Vec::new();
    for (threads, out) in [("1", "a"), ("4", "b")] {
        if !polyfit_bin(&["reconstruct", "l.xyz", "--seed", "11", "--out", out, "--report", "r.json"], d, threads) {
            return verdict(false, format!("reconstruct with {threads} threads failed"));
        }
        outputs.push(std::fs::read(d.join(out).join("polytopes.json")).unwrap());
    }
    verdict(outputs[0] == outputs[1], format!("1 vs 4 threads, {} bytes, identical {}", outputs[0].len(), outputs[0] == outputs[1]))
}

fn timing_shape() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for model in [SyntheticModel::Cube, SyntheticModel::TwoCuboids, SyntheticModel::LShape, SyntheticModel::CuboidStack] {
        let (out, _, _) = run(model, ClusteringMethod::Wcseg, 1);
        let t = &out.report.timings;
        let total = t.sum();
        let stages = [t.plane_extraction, t.structuring, t.clustering, t.polytope_generation, t.filtering];
        let dominant = stages.iter().all(|&s| t.polytope_generation >= s);
        let extraction = t.plane_extraction / total;
        pass &= dominant && extraction < 0.1;
        notes.push(format!(
            "{model}: extraction {:.0}%, clustering {:.0}%, generation {:.0}%",
            100.0 * extraction,
            100.0 * t.clustering / total,
            100.0 * t.polytope_generation / total
        ));
    }
    verdict(pass, notes.join("; "))
}

fn main() {
    let mut traces = Vec::new();
    let verdicts = [
        ("cube end-to-end", cube_end_to_end()),
        ("two separated cuboids", two_cuboids()),
        ("L-shape split", l_shape()),
        ("visibility completeness", visibility()),
        ("spectral exactness", spectral()),
        ("model selection", model_selection()),
        ("EA oracle equivalence", ea_oracle(&mut traces)),
        ("elitism", elitism(traces)),
        ("H-to-V oracle", h_to_v()),
        ("filter idempotence", filtering()),
        ("determinism", determinism()),
        ("timing shape", timing_shape()),
    ];

    let mut failed = 0;
    for (i, (name, v)) in verdicts.iter().enumerate() {
        println!("criterion {}: {} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {}/{} criteria pass", verdicts.len() - failed, verdicts.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
