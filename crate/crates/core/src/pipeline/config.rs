//! Pipeline configuration and its flat `section.key = value` text form.

use std::fmt::Write as _;
use std::path::Path;

use crate::clustering::{ClusteringConfig, ClusteringMethod, LaplacianKind};
use crate::error::{Error, Result};
use crate::extraction::ExtractionConfig;
use crate::pipeline::io::ExportFormat;
use crate::polytope_gen::EaConfig;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct StructuringConfig<T> {
    /// Occupancy cell size; `None` means 1% of the bounding-box diagonal.
    pub eps: Option<T>,
    pub knn: usize,
}

impl<T: Real> Default for StructuringConfig<T> {
    fn default() -> Self {
        Self { eps: None, knn: 10 }
    }
}

/// Target volume grid settings.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeConfig<T> {
    /// Grid spacing; `None` uses the EA voxel cell.
    pub cell: Option<T>,
    /// Padding around the cluster, in grid cells.
    pub pad_cells: T,
}

impl<T: Real> Default for VolumeConfig<T> {
    fn default() -> Self {
        Self { cell: None, pad_cells: T::lit(2.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<ExportFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), formats: vec![ExportFormat::Json, ExportFormat::Obj] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig<T> {
    pub rng_seed: u64,
    pub extraction: ExtractionConfig<T>,
    pub structuring: StructuringConfig<T>,
    pub clustering: ClusteringConfig<T>,
    pub volume: VolumeConfig<T>,
    pub ea: EaConfig<T>,
    pub output: OutputConfig,
}

impl<T: Real> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            rng_seed: 0,
            extraction: ExtractionConfig::default(),
            structuring: StructuringConfig::default(),
            clustering: ClusteringConfig::default(),
            volume: VolumeConfig::default(),
            ea: EaConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

mod parse {
    use super::*;

    fn fail(key: &str, value: &str, what: &str) -> Error {
        Error::Config(format!("{key}: cannot parse {value:?} as {what}"))
    }

    pub fn real<T: Real>(key: &str, v: &str) -> Result<T> {
        v.parse::<f64>().ok().filter(|x| x.is_finite()).map(T::lit).ok_or_else(|| fail(key, v, "a number"))
    }

    pub fn opt_real<T: Real>(key: &str, v: &str) -> Result<Option<T>> {
        if v == "auto" {
            Ok(None)
        } else {
            real(key, v).map(Some)
        }
    }

    pub fn float(key: &str, v: &str) -> Result<f64> {
        real::<f64>(key, v)
    }

    pub fn count(key: &str, v: &str) -> Result<usize> {
        v.parse().map_err(|_| fail(key, v, "a non-negative integer"))
    }

    pub fn seed(key: &str, v: &str) -> Result<u64> {
        v.parse().map_err(|_| fail(key, v, "a non-negative integer"))
    }

    pub fn flag(key: &str, v: &str) -> Result<bool> {
        v.parse().map_err(|_| fail(key, v, "true or false"))
    }

    pub fn method(_: &str, v: &str) -> Result<ClusteringMethod> {
        v.parse()
    }

    pub fn laplacian(key: &str, v: &str) -> Result<LaplacianKind> {
        v.parse().map_err(|_| fail(key, v, "symmetric or random_walk"))
    }

    pub fn text(_: &str, v: &str) -> Result<String> {
        Ok(v.to_string())
    }

    pub fn formats(_: &str, v: &str) -> Result<Vec<ExportFormat>> {
        v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
    }
}

mod show {
    use super::*;

    pub fn real<T: Real>(v: &T) -> String {
        format!("{}", v.as_f64())
    }

    pub fn opt_real<T: Real>(v: &Option<T>) -> String {
        v.as_ref().map_or_else(|| "auto".to_string(), real)
    }

    pub fn float(v: &f64) -> String {
        format!("{v}")
    }

    pub fn count(v: &usize) -> String {
        v.to_string()
    }

    pub fn seed(v: &u64) -> String {
        v.to_string()
    }

    pub fn flag(v: &bool) -> String {
        v.to_string()
    }

    pub fn method(v: &ClusteringMethod) -> String {
        v.to_string()
    }

    pub fn laplacian(v: &LaplacianKind) -> String {
        v.to_string()
    }

    pub fn text(v: &str) -> String {
        v.to_owned()
    }

    pub fn formats(v: &[ExportFormat]) -> String {
        v.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",")
    }
}

macro_rules! config_keys {
    ($($key:literal => $($field:ident).+ : $kind:ident),* $(,)?) => {
        impl<T: Real> PipelineConfig<T> {
            /// Sets one option from its text form.
            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $($key => self.$($field).+ = parse::$kind(key, value)?,)*
                    _ => return Err(Error::Config(format!("unknown key {key:?}"))),
                }
                Ok(())
            }

            /// Every option with its current value, in file order.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$(($key, show::$kind(&self.$($field).+))),*]
            }
        }
    };
}

config_keys! {
    "seed" => rng_seed: seed,
    "extraction.eps_fit" => extraction.eps_fit: opt_real,
    "extraction.theta_fit_deg" => extraction.theta_fit_deg: real,
    "extraction.dbscan_radius" => extraction.dbscan_radius: opt_real,
    "extraction.dbscan_min_pts" => extraction.dbscan_min_pts: count,
    "extraction.feature_normal_weight" => extraction.feature_normal_weight: opt_real,
    "extraction.min_inliers" => extraction.min_inliers: count,
    "extraction.merge_angle_deg" => extraction.merge_angle_deg: real,
    "extraction.merge_offset" => extraction.merge_offset: opt_real,
    "structuring.eps" => structuring.eps: opt_real,
    "structuring.knn" => structuring.knn: count,
    "clustering.method" => clustering.method: method,
    "clustering.k_total" => clustering.k_total: count,
    "clustering.k_min" => clustering.k_min: count,
    "clustering.k_max" => clustering.k_max: count,
    "clustering.alpha_q" => clustering.alpha_q: float,
    "clustering.laplacian" => clustering.laplacian: laplacian,
    "clustering.wcseg_angle_deg" => clustering.wcseg_angle_deg: real,
    "clustering.wcseg_knn" => clustering.wcseg_knn: count,
    "clustering.wcseg_patch_radius" => clustering.wcseg_patch_radius: real,
    "clustering.visibility_threshold" => clustering.visibility_threshold: float,
    "clustering.max_pairs" => clustering.max_pairs: count,
    "clustering.sdf_rays" => clustering.sdf_rays: count,
    "clustering.sdf_half_angle_deg" => clustering.sdf_half_angle_deg: real,
    "clustering.sdf_merge_threshold" => clustering.sdf_merge_threshold: real,
    "clustering.sdf_samples" => clustering.sdf_samples: count,
    "clustering.sdf_visibility_floor" => clustering.sdf_visibility_floor: float,
    "clustering.min_cluster_fraction" => clustering.min_cluster_fraction: float,
    "clustering.alpha_factor" => clustering.alpha_factor: real,
    "clustering.guard_factor" => clustering.guard_factor: real,
    "clustering.interior_check" => clustering.interior_check: flag,
    "volume.cell" => volume.cell: opt_real,
    "volume.pad_cells" => volume.pad_cells: real,
    "ea.population_size" => ea.population_size: count,
    "ea.max_iterations" => ea.max_iterations: count,
    "ea.stall_limit" => ea.stall_limit: count,
    "ea.crossover_rate" => ea.crossover_rate: float,
    "ea.mutation_rate" => ea.mutation_rate: float,
    "ea.alpha" => ea.alpha: real,
    "ea.beta" => ea.beta: real,
    "ea.gamma" => ea.gamma: real,
    "ea.n_i_max" => ea.n_i_max: count,
    "ea.eps_geo" => ea.eps_geo: opt_real,
    "ea.eps_vol" => ea.eps_vol: opt_real,
    "ea.voxel_cell" => ea.voxel_cell: opt_real,
    "ea.tournament_size" => ea.tournament_size: count,
    "ea.filter_threshold" => ea.filter_threshold: real,
    "ea.normalize_fp" => ea.normalize_fp: flag,
    "ea.use_all_planes" => ea.use_all_planes: flag,
    "ea.elite_individual" => ea.elite_individual: flag,
    "ea.max_retries" => ea.max_retries: count,
    "ea.min_walk" => ea.min_walk: count,
    "ea.max_walk" => ea.max_walk: count,
    "output.dir" => output.dir: text,
    "output.formats" => output.formats: formats,
}

impl<T: Real> PipelineConfig<T> {
    /// Parses `key = value` lines on top of the defaults. `#` starts a comment;
    /// `[section]` headers prefix the following keys.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let key = key.trim();
            let full = if section.is_empty() || key.contains('.') { key.to_string() } else { format!("{section}.{key}") };
            self.set(&full, value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// The effective configuration in the format read by [`Self::parse`].
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut last = "";
        for (key, value) in self.entries() {
            let section = key.split_once('.').map_or("", |(s, _)| s);
            if section != last && !out.is_empty() {
                out.push('\n');
            }
            last = section;
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.clustering.validate()?;
        self.ea.validate()?;
        self.extraction.resolve(T::one())?;
        if self.structuring.knn == 0 {
            return Err(Error::Config("structuring.knn must be positive".into()));
        }
        if self.structuring.eps.is_some_and(|e| !(e > T::zero())) {
            return Err(Error::Config("structuring.eps must be positive".into()));
        }
        if self.volume.cell.is_some_and(|c| !(c > T::zero())) || !(self.volume.pad_cells > T::zero()) {
            return Err(Error::Config("volume settings must be positive".into()));
        }
        Ok(())
    }
}
