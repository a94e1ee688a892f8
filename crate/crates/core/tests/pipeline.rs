use std::collections::HashMap;
use std::io::Cursor;

use polyfit::clustering::ClusteringMethod;
use polyfit::geometry::{ConvexPolytope, HalfSpace, Point3, Vector3};
use polyfit::pipeline::io::{read_ply, read_xyz};
use polyfit::pipeline::{
    export_polytopes, generate_synthetic, ground_truth, import_polytopes_json, load_pointcloud, run_pipeline, ExportFormat,
    SyntheticModel,
};
use polyfit::{Error, PipelineConfig, ScoredPolytope};

fn unit_cube(cluster: usize, offset: f64) -> ScoredPolytope {
    let mut labelled = Vec::new();
    for axis in 0..3 {
        let n = Vector3::<f64>::axis(axis);
        let lo = Point3::new(offset, offset, offset);
        labelled.push((2 * axis, HalfSpace::new(lo, -n)));
        labelled.push((2 * axis + 1, HalfSpace::new(lo + Vector3::new(1.0, 1.0, 1.0), n)));
    }
    ScoredPolytope { cluster, score: 0.9, polytope: ConvexPolytope::from_halfspaces(labelled).unwrap() }
}

#[test]
fn config_dump_round_trips() {
    let mut cfg = PipelineConfig::default();
    cfg.set("seed", "42").unwrap();
    cfg.set("clustering.method", "los").unwrap();
    cfg.set("ea.population_size", "77").unwrap();
    cfg.set("structuring.eps", "0.015").unwrap();
    let back = PipelineConfig::parse(&cfg.dump()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.rng_seed, 42);
    assert_eq!(back.clustering.method, ClusteringMethod::Los);
    assert_eq!(back.structuring.eps, Some(0.015));
}

#[test]
fn config_rejects_bad_input() {
    let mut cfg = PipelineConfig::default();
    assert!(matches!(cfg.set("ea.no_such_key", "1"), Err(Error::Config(_))));
    assert!(matches!(cfg.set("ea.population_size", "many"), Err(Error::Config(_))));
    assert!(matches!(PipelineConfig::parse("clustering.method = spectral"), Err(Error::Config(_))));
    cfg.set("ea.population_size", "2").unwrap();
    assert!(cfg.validate().is_err());
}

#[test]
fn config_file_sections_and_comments() {
    let text = "# run settings\nseed = 3\n\n[ea]\nn_i_max = 4 # fewer polytopes\n[clustering]\nmethod = wcseg\n";
    let cfg = PipelineConfig::parse(text).unwrap();
    assert_eq!(cfg.rng_seed, 3);
    assert_eq!(cfg.ea.n_i_max, 4);
    assert_eq!(cfg.clustering.method, ClusteringMethod::Wcseg);
}

#[test]
fn xyz_reading() {
    let three = "0 0 0 0 0 1\n1 0 0 0 0 1\n0 1 0 0 0 2\n";
    let loaded = read_xyz::<f64, _>(Cursor::new(three)).unwrap();
    assert_eq!(loaded.cloud.len(), 3);
    assert!((loaded.cloud.normals[2].norm() - 1.0).abs() < 1e-12);

    let with_nan = "0 0 0 0 0 1\nnan 0 0 0 0 1\n1 1 1 1 0 0\n";
    let loaded = read_xyz::<f64, _>(Cursor::new(with_nan)).unwrap();
    assert_eq!((loaded.cloud.len(), loaded.skipped), (2, 1));

    assert!(matches!(read_xyz::<f64, _>(Cursor::new("0 0 0 1\n")), Err(Error::Malformed { line: 1, .. })));
}

#[test]
fn ply_without_normals_is_rejected() {
    let ply = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 1 1\n";
    let err = read_ply::<f64, _>(Cursor::new(ply)).unwrap_err();
    assert!(matches!(err, Error::NormalsRequired));
    assert_eq!(err.to_string(), "normals required");
}

#[test]
fn ply_with_normals_is_read() {
    let mut ply = String::from("ply\nformat ascii 1.0\nelement vertex 12\nproperty float x\nproperty float y\nproperty float z\n");
    ply.push_str("property float nx\nproperty float ny\nproperty float nz\nend_header\n");
    for i in 0..12 {
        ply.push_str(&format!("{i} 0 0 0 0 1\n"));
    }
    let loaded = read_ply::<f32, _>(Cursor::new(ply)).unwrap();
    assert_eq!(loaded.cloud.len(), 12);
}

#[test]
fn loading_checks_extension_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.xyz");
    std::fs::write(&small, "0 0 0 0 0 1\n1 0 0 0 0 1\n0 1 0 0 0 1\n").unwrap();
    assert!(matches!(load_pointcloud::<f64>(&small), Err(Error::TooFewPoints(3))));
    let other = dir.path().join("cloud.pcd");
    std::fs::write(&other, "").unwrap();
    assert!(matches!(load_pointcloud::<f64>(&other), Err(Error::UnknownFormat(_))));
    assert!(matches!(load_pointcloud::<f64>(&dir.path().join("missing.xyz")), Err(Error::Io { .. })));
}

fn obj_counts(text: &str) -> (usize, Vec<[usize; 3]>) {
    let verts = text.lines().filter(|l| l.starts_with("v ")).count();
    let faces = text
        .lines()
        .filter(|l| l.starts_with("f "))
        .map(|l| {
            let ids: Vec<usize> = l[2..].split_whitespace().map(|t| t.parse().unwrap()).collect();
            [ids[0], ids[1], ids[2]]
        })
        .collect();
    (verts, faces)
}

#[test]
fn cube_exports_as_closed_obj() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.obj");
    export_polytopes(&[unit_cube(0, 0.0)], &path, ExportFormat::Obj).unwrap();
    let (verts, faces) = obj_counts(&std::fs::read_to_string(&path).unwrap());
    assert_eq!((verts, faces.len()), (8, 12));
    assert!(dir.path().join("cube.mtl").exists());
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for f in &faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    assert!(edges.values().all(|&c| c == 2));
}

#[test]
fn json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let polys = vec![unit_cube(0, 0.0), unit_cube(1, 2.5)];
    export_polytopes(&polys, &path, ExportFormat::Json).unwrap();
    let back = import_polytopes_json::<f64>(&path).unwrap();
    assert_eq!(back.len(), 2);
    for (a, b) in polys.iter().zip(&back) {
        assert_eq!(a.cluster, b.cluster);
        assert_eq!(a.polytope.plane_ids(), b.polytope.plane_ids());
        for (u, v) in a.polytope.vertices().iter().zip(b.polytope.vertices()) {
            assert!(u.distance(v) < 1e-9);
        }
    }
}

#[test]
fn empty_export_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    for format in [ExportFormat::Obj, ExportFormat::Ply, ExportFormat::Json] {
        let path = dir.path().join(format!("empty.{}", format.extension()));
        export_polytopes::<f64>(&[], &path, format).unwrap();
        assert!(path.exists());
    }
    assert!(import_polytopes_json::<f64>(&dir.path().join("empty.json")).unwrap().is_empty());
}

#[test]
fn ground_truth_descriptors() {
    let expect = [
        (SyntheticModel::Cube, 6, 1),
        (SyntheticModel::TwoCuboids, 12, 2),
        (SyntheticModel::LShape, 8, 2),
        (SyntheticModel::CuboidStack, 11, 2),
    ];
    for (model, planes, clusters) in expect {
        let truth = ground_truth(model);
        assert_eq!((truth.plane_count, truth.cluster_count, truth.polytopes.len()), (planes, clusters, clusters), "{model}");
    }
    assert!((ground_truth(SyntheticModel::Cube).surface_area - 6.0).abs() < 1e-9);
    assert!((ground_truth(SyntheticModel::LShape).volume - 3.0).abs() < 1e-12);
}

#[test]
fn synthetic_samples_lie_on_the_surface() {
    let (cloud, truth) = generate_synthetic::<f64>(SyntheticModel::Cube, 2000.0, 0.0, 1).unwrap();
    assert!((cloud.len() as f64 - 12_000.0).abs() < 10.0);
    assert_eq!(truth.plane_count, 6);
    for (p, n) in cloud.positions.iter().zip(&cloud.normals) {
        let on_face = [p.x, p.y, p.z].iter().any(|c| c.abs() < 1e-12 || (c - 1.0).abs() < 1e-12);
        assert!(on_face);
        assert!((n.norm() - 1.0).abs() < 1e-12);
    }
    assert!(generate_synthetic::<f64>(SyntheticModel::Cube, -1.0, 0.0, 1).is_err());
}

#[test]
fn cube_pipeline_end_to_end() {
    let (cloud, _) = generate_synthetic::<f64>(SyntheticModel::Cube, 1700.0, 0.002, 3).unwrap();
    for method in [ClusteringMethod::Wcseg, ClusteringMethod::Los] {
        let mut cfg = PipelineConfig::default();
        cfg.clustering.method = method;
        let out = run_pipeline(&cloud, &cfg).unwrap();
        assert_eq!(out.polytopes.len(), 1, "{method}");
        assert_eq!(out.polytopes[0].polytope.plane_ids().len(), 6);
        assert!(out.report.union_fg >= 0.98);
        let t = &out.report.timings;
        assert!(t.sum() <= out.report.total_seconds * 1.1 && t.sum() >= out.report.total_seconds * 0.9);
    }
}

#[test]
fn f32_pipeline_runs() {
    let (cloud, _) = generate_synthetic::<f32>(SyntheticModel::Cube, 1700.0, 0.002, 5).unwrap();
    let out = run_pipeline(&cloud, &polyfit::PipelineConfig32::default()).unwrap();
    assert_eq!(out.polytopes.len(), 1);
}

#[test]
fn empty_cloud_fails() {
    assert!(polyfit::OrientedCloud::new(Vec::new(), Vec::new()).map_or(true, |c| run_pipeline(&c, &PipelineConfig::default()).is_err()));
}

