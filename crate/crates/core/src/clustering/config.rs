use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::spectral::LaplacianKind;
use crate::clustering::wcseg::WcsegParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusteringMethod {
    Los,
    Wcseg,
}

impl FromStr for ClusteringMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "los" => Ok(Self::Los),
            "wcseg" => Ok(Self::Wcseg),
            other => Err(Error::Config(format!("unknown clustering method {other:?}, expected los or wcseg"))),
        }
    }
}

impl fmt::Display for ClusteringMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Los => "los",
            Self::Wcseg => "wcseg",
        })
    }
}

/// Parameters of both clustering methods. Lengths are multiples of the structuring `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ClusteringConfig<T> {
    pub method: ClusteringMethod,
    pub k_total: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub alpha_q: f64,
    pub laplacian: LaplacianKind,
    pub wcseg_angle_deg: T,
    pub wcseg_knn: usize,
    /// Largest patch radius during over-segmentation, in units of `ε`; 0 disables the cap.
    pub wcseg_patch_radius: T,
    pub visibility_threshold: f64,
    pub max_pairs: usize,
    pub sdf_rays: usize,
    pub sdf_half_angle_deg: T,
    pub sdf_merge_threshold: T,
    pub sdf_samples: usize,
    /// Visibility fraction also required for an SDF merge; 0 disables the check.
    pub sdf_visibility_floor: f64,
    /// Clusters smaller than this fraction of the points are absorbed by a neighbor.
    pub min_cluster_fraction: f64,
    /// Alpha-shape radius of the surface patches, in units of `ε`.
    pub alpha_factor: T,
    /// Distance trimmed from both ends of a visibility segment, in units of `ε`.
    pub guard_factor: T,
    /// Also require segment midpoints to lie inside the estimated solid.
    pub interior_check: bool,
}

impl<T: Real> Default for ClusteringConfig<T> {
    fn default() -> Self {
        Self {
            method: ClusteringMethod::Wcseg,
            k_total: 3000,
            k_min: 1,
            k_max: 15,
            alpha_q: 1.0,
            laplacian: LaplacianKind::Symmetric,
            wcseg_angle_deg: T::lit(20.0),
            wcseg_knn: 10,
            wcseg_patch_radius: T::lit(10.0),
            visibility_threshold: 0.8,
            max_pairs: 200,
            sdf_rays: 30,
            sdf_half_angle_deg: T::lit(30.0),
            sdf_merge_threshold: T::lit(0.35),
            sdf_samples: 300,
            sdf_visibility_floor: 0.7,
            min_cluster_fraction: 0.01,
            alpha_factor: T::lit(2.0 * std::f64::consts::SQRT_2),
            guard_factor: T::lit(1.5),
            interior_check: true,
        }
    }
}

impl<T: Real> ClusteringConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.k_total < 100 {
            return bad("clustering.k_total must be at least 100");
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return bad("clustering.k_min..k_max must be a non-empty range starting at 1 or more");
        }
        if !(self.alpha_q >= 0.0) {
            return bad("clustering.alpha_q must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.visibility_threshold) {
            return bad("clustering.visibility_threshold must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.sdf_visibility_floor) || !(0.0..1.0).contains(&self.min_cluster_fraction) {
            return bad("clustering.sdf_visibility_floor and clustering.min_cluster_fraction must be fractions");
        }
        if self.wcseg_knn == 0 || self.max_pairs == 0 || self.sdf_rays == 0 || self.sdf_samples == 0 {
            return bad("clustering counts must be positive");
        }
        if !(self.alpha_factor > T::zero()) || !(self.guard_factor >= T::zero()) || !(self.wcseg_angle_deg > T::zero()) || !(self.wcseg_patch_radius >= T::zero()) {
            return bad("clustering lengths and angles must be positive");
        }
        if !(self.sdf_half_angle_deg > T::zero() && self.sdf_half_angle_deg < T::lit(90.0)) {
            return bad("clustering.sdf_half_angle_deg must lie in (0, 90)");
        }
        Ok(())
    }

    pub fn wcseg_params(&self) -> WcsegParams<T> {
        WcsegParams {
            angle_deg: self.wcseg_angle_deg,
            knn: self.wcseg_knn,
            visibility_threshold: self.visibility_threshold,
            max_pairs: self.max_pairs,
            sdf_rays: self.sdf_rays,
            sdf_half_angle_deg: self.sdf_half_angle_deg,
            sdf_threshold: self.sdf_merge_threshold,
            sdf_samples: self.sdf_samples,
            sdf_visibility_floor: self.sdf_visibility_floor,
            min_cluster_fraction: self.min_cluster_fraction,
        }
    }
}
