use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polyfit::clustering::ClusteringMethod;
use polyfit::pipeline::io::{write_colored_points, write_structured_ply};
use polyfit::pipeline::{
    density_for_points, export_polytopes, generate_synthetic, load_pointcloud, run_pipeline, write_xyz,
    SyntheticModel,
};
use polyfit::{Error, PipelineConfig, PipelineOutput};

#[derive(Parser)]
#[command(name = "polyfit", version, about = "Fit unions of convex polytopes to oriented point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct polytopes from an XYZ or PLY cloud with normals.
    Reconstruct {
        input: Option<PathBuf>,
        #[arg(long)]
        method: Option<ClusteringMethod>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override one option, e.g. `--set ea.population_size=80`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Write the run report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write intermediate point sets as coloured PLY files.
        #[arg(long)]
        debug_dir: Option<PathBuf>,
        /// Print the effective configuration and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Sample a synthetic model and write it as XYZ.
    Synth {
        model: SyntheticModel,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, default_value_t = 0.002)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the ground truth as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Print statistics of a point cloud.
    Inspect { input: PathBuf },
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Json(e)
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn build_config(
    config: Option<&Path>,
    method: Option<ClusteringMethod>,
    seed: Option<u64>,
    out: Option<&Path>,
    overrides: &[String],
) -> Result<PipelineConfig, Error> {
    let mut cfg = match config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Config(format!("override {o:?} is not KEY=VALUE")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(m) = method {
        cfg.clustering.method = m;
    }
    if let Some(s) = seed {
        cfg.rng_seed = s;
    }
    if let Some(o) = out {
        cfg.output.dir = o.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_debug(dir: &Path, input: &polyfit::OrientedCloud, out: &PipelineOutput) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    let mut plane_of = vec![usize::MAX; input.len()];
    for (k, p) in out.planes.iter().enumerate() {
        for &i in &p.inliers {
            plane_of[i] = k;
        }
    }
    write_colored_points(&input.positions, &plane_of, &dir.join("planes.ply"))?;
    write_structured_ply(&out.structured, &dir.join("structured.ply"))?;
    let mut cluster_of = vec![usize::MAX; out.structured.len()];
    for (c, cl) in out.clusters.iter().enumerate() {
        for &i in &cl.points {
            cluster_of[i] = c;
        }
    }
    write_colored_points(&out.structured.positions(), &cluster_of, &dir.join("clusters.ply"))
}

#[allow(clippy::too_many_arguments)]
fn reconstruct(
    input: Option<PathBuf>,
    method: Option<ClusteringMethod>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    overrides: Vec<String>,
    report: Option<PathBuf>,
    debug_dir: Option<PathBuf>,
    dump_config: bool,
) -> Result<(), Error> {
    let cfg = build_config(config.as_deref(), method, seed, out.as_deref(), &overrides)?;
    if dump_config {
        print!("{}", cfg.dump());
        return Ok(());
    }
    let input = input.ok_or_else(|| Error::Config("an input file is required".into()))?;
    let loaded = load_pointcloud::<f64>(&input)?;
    if loaded.skipped > 0 {
        log::warn!("{} invalid records skipped", loaded.skipped);
    }
    let result = run_pipeline(&loaded.cloud, &cfg)?;
    if let Some(dir) = &debug_dir {
        write_debug(dir, &loaded.cloud, &result)?;
    }
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    for format in &cfg.output.formats {
        export_polytopes(&result.polytopes, &dir.join(format!("polytopes.{}", format.extension())), *format)?;
    }
    let text = serde_json::to_string_pretty(&result.report).map_err(json_error)?;
    match report {
        Some(path) => write_file(&path, &(text + "\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn synth(model: SyntheticModel, points: usize, noise: f64, seed: u64, out: Option<PathBuf>, truth: Option<PathBuf>) -> Result<(), Error> {
    let density = density_for_points(model, points);
    let (cloud, gt) = generate_synthetic::<f64>(model, density, noise, seed)?;
    let out = out.unwrap_or_else(|| PathBuf::from(format!("{model}.xyz")));
    write_xyz(&cloud, &out)?;
    if let Some(path) = truth {
        write_file(&path, &(serde_json::to_string_pretty(&gt).map_err(json_error)? + "\n"))?;
    }
    eprintln!("wrote {} points to {}", cloud.len(), out.display());
    Ok(())
}

fn inspect(input: &Path) -> Result<(), Error> {
    let loaded = load_pointcloud::<f64>(input)?;
    let cloud = &loaded.cloud;
    let bb = cloud.bounding_box().expect("loaded clouds are non-empty");
    println!("points:   {}", cloud.len());
    println!("skipped:  {}", loaded.skipped);
    println!("min:      {:.6} {:.6} {:.6}", bb.min.x, bb.min.y, bb.min.z);
    println!("max:      {:.6} {:.6} {:.6}", bb.max.x, bb.max.y, bb.max.z);
    println!("diagonal: {:.6}", bb.diagonal());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reconstruct { input, method, config, seed, out, overrides, report, debug_dir, dump_config } => {
            reconstruct(input, method, config, seed, out, overrides, report, debug_dir, dump_config)
        }
        Command::Synth { model, points, noise, seed, out, truth } => synth(model, points, noise, seed, out, truth),
        Command::Inspect { input } => inspect(&input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
