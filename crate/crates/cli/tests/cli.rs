use std::path::Path;
use std::process::{Command, Output};

fn polyfit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyfit")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn dump_config_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyfit(&["reconstruct", "--dump-config", "--method", "los", "--seed", "9", "--set", "ea.n_i_max=4"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    let cfg = polyfit::PipelineConfig::parse(&text).unwrap();
    assert_eq!(cfg.rng_seed, 9);
    assert_eq!(cfg.ea.n_i_max, 4);
    assert_eq!(cfg.clustering.method, polyfit::clustering::ClusteringMethod::Los);
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "seed = 5\n[ea]\npopulation_size = 40\n").unwrap();
    let out = polyfit(&["reconstruct", "--dump-config", "--config", "run.cfg"], dir.path());
    let cfg = polyfit::PipelineConfig::parse(&stdout(&out)).unwrap();
    assert_eq!((cfg.rng_seed, cfg.ea.population_size), (5, 40));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(polyfit(&["reconstruct", "missing.xyz"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.xyz"), "0 0 zero 0 0 1\n").unwrap();
    assert_eq!(polyfit(&["reconstruct", "bad.xyz"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("cloud.pcd"), "").unwrap();
    assert_eq!(polyfit(&["inspect", "cloud.pcd"], dir.path()).status.code(), Some(2));
    let out = polyfit(&["reconstruct", "--dump-config", "--set", "ea.population_size=1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // Scattered points with random normals contain no plane.
    let mut text = String::new();
    for i in 0..200u32 {
        let f = |k: u32| ((i * 7919 + k * 104_729) % 1000) as f64 / 1000.0;
        text.push_str(&format!("{} {} {} {} {} {}\n", f(1), f(2), f(3), f(4) - 0.5, f(5) - 0.5, f(6) + 0.1));
    }
    std::fs::write(dir.path().join("noise.xyz"), text).unwrap();
    let out = polyfit(&["reconstruct", "noise.xyz"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_inspect_and_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyfit(&["synth", "cube", "--points", "10000", "--seed", "2", "--out", "cube.xyz", "--truth", "truth.json"], dir.path());
    assert!(out.status.success());
    let truth: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["plane_count"], 6);

    let info = stdout(&polyfit(&["inspect", "cube.xyz"], dir.path()));
    let count: usize = info.lines().next().unwrap().split_whitespace().last().unwrap().parse().unwrap();
    assert!(count.abs_diff(10_000) < 20, "{info}");

    let out = polyfit(&["reconstruct", "cube.xyz", "--out", "res", "--debug-dir", "dbg"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["polytope_count"], 1);
    for name in ["res/polytopes.obj", "res/polytopes.json", "dbg/planes.ply", "dbg/clusters.ply"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}
