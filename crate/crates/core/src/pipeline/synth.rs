//! Synthetic box-union benchmark models with ground truth.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cloud::OrientedCloud;
use crate::error::{Error, Result};
use crate::geometry::{Point3, Vector3};
use crate::rng::seeded;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticModel {
    Cube,
    LShape,
    TwoCuboids,
    CuboidStack,
}

impl SyntheticModel {
    pub const ALL: [SyntheticModel; 4] = [Self::Cube, Self::LShape, Self::TwoCuboids, Self::CuboidStack];

    /// The boxes, each `[min, max]`, whose union is the solid. Each box is one convex part.
    pub fn boxes(self) -> Vec<[[f64; 3]; 2]> {
        match self {
            Self::Cube => vec![[[0.0; 3], [1.0; 3]]],
            Self::LShape => vec![[[0.0; 3], [2.0, 1.0, 1.0]], [[0.0, 1.0, 0.0], [1.0, 2.0, 1.0]]],
            Self::TwoCuboids => vec![[[0.0; 3], [1.0; 3]], [[3.0, 0.0, 0.0], [4.0, 1.0, 1.0]]],
            Self::CuboidStack => vec![[[0.0; 3], [2.0, 2.0, 1.0]], [[0.5, 0.5, 1.0], [1.5, 1.5, 2.0]]],
        }
    }
}

impl FromStr for SyntheticModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "cube" => Ok(Self::Cube),
            "l_shape" => Ok(Self::LShape),
            "two_cuboids" => Ok(Self::TwoCuboids),
            "cuboid_stack" => Ok(Self::CuboidStack),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

impl fmt::Display for SyntheticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cube => "cube",
            Self::LShape => "l_shape",
            Self::TwoCuboids => "two_cuboids",
            Self::CuboidStack => "cuboid_stack",
        })
    }
}

/// What a reconstruction of a synthetic model should recover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub model: SyntheticModel,
    pub plane_count: usize,
    pub cluster_count: usize,
    pub boxes: Vec<[[f64; 3]; 2]>,
    /// Corner points of each convex part.
    pub polytopes: Vec<Vec<[f64; 3]>>,
    pub volume: f64,
    pub surface_area: f64,
}

struct Face {
    axis: usize,
    sign: f64,
    coord: f64,
    min: [f64; 3],
    max: [f64; 3],
}

impl Face {
    fn area(&self) -> f64 {
        let (a, b) = ((self.axis + 1) % 3, (self.axis + 2) % 3);
        (self.max[a] - self.min[a]) * (self.max[b] - self.min[b])
    }

    fn at(&self, s: f64, t: f64) -> [f64; 3] {
        let (a, b) = ((self.axis + 1) % 3, (self.axis + 2) % 3);
        let mut p = [0.0; 3];
        p[self.axis] = self.coord;
        p[a] = self.min[a] + s * (self.max[a] - self.min[a]);
        p[b] = self.min[b] + t * (self.max[b] - self.min[b]);
        p
    }
}

fn faces(boxes: &[[[f64; 3]; 2]]) -> Vec<Face> {
    let mut out = Vec::new();
    for [min, max] in boxes {
        for axis in 0..3 {
            for (sign, coord) in [(-1.0, min[axis]), (1.0, max[axis])] {
                out.push(Face { axis, sign, coord, min: *min, max: *max });
            }
        }
    }
    out
}

fn inside_any(boxes: &[[[f64; 3]; 2]], p: &[f64; 3]) -> bool {
    boxes.iter().any(|[lo, hi]| (0..3).all(|i| p[i] > lo[i] && p[i] < hi[i]))
}

const PROBE: f64 = 1e-6;

/// True if the surface point is on the boundary of the union.
fn exposed(boxes: &[[[f64; 3]; 2]], face: &Face, p: &[f64; 3]) -> bool {
    let mut q = *p;
    q[face.axis] += face.sign * PROBE;
    !inside_any(boxes, &q)
}

const AREA_GRID: usize = 200;

/// Exposed fraction of each face, by midpoint rule on a regular grid.
fn exposed_fractions(boxes: &[[[f64; 3]; 2]], faces: &[Face]) -> Vec<f64> {
    faces
        .iter()
        .map(|f| {
            let mut hit = 0usize;
            for i in 0..AREA_GRID {
                for j in 0..AREA_GRID {
                    let s = (i as f64 + 0.5) / AREA_GRID as f64;
                    let t = (j as f64 + 0.5) / AREA_GRID as f64;
                    hit += exposed(boxes, f, &f.at(s, t)) as usize;
                }
            }
            hit as f64 / (AREA_GRID * AREA_GRID) as f64
        })
        .collect()
}

/// Exposed surface area of the model.
pub fn surface_area(model: SyntheticModel) -> f64 {
    let boxes = model.boxes();
    let fs = faces(&boxes);
    exposed_fractions(&boxes, &fs).iter().zip(&fs).map(|(e, f)| e * f.area()).sum()
}

/// Sampling density giving about `points` samples on the model.
pub fn density_for_points(model: SyntheticModel, points: usize) -> f64 {
    points as f64 / surface_area(model)
}

/// Number of connected regions formed by coplanar, equally oriented faces that touch.
fn coplanar_regions(faces: &[&Face]) -> usize {
    let n = faces.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let (f, g) = (faces[i], faces[j]);
            if f.axis != g.axis || f.sign != g.sign || (f.coord - g.coord).abs() > 1e-9 {
                continue;
            }
            let (a, b) = ((f.axis + 1) % 3, (f.axis + 2) % 3);
            let touch = [a, b].iter().all(|&k| f.min[k] <= g.max[k] + 1e-9 && g.min[k] <= f.max[k] + 1e-9);
            if touch {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    (0..n).filter(|&i| root(&mut parent, i) == i).count()
}

pub fn ground_truth(model: SyntheticModel) -> GroundTruth {
    let boxes = model.boxes();
    let fs = faces(&boxes);
    let exposure = exposed_fractions(&boxes, &fs);
    let exposed_faces: Vec<&Face> = fs.iter().zip(&exposure).filter(|(_, e)| **e > 0.0).map(|(f, _)| f).collect();
    let plane_count = coplanar_regions(&exposed_faces);
    let polytopes = boxes
        .iter()
        .map(|[lo, hi]| {
            (0..8)
                .map(|c| [0, 1, 2].map(|i| if c >> i & 1 == 1 { hi[i] } else { lo[i] }))
                .collect()
        })
        .collect();
    let volume = boxes.iter().map(|[lo, hi]| (0..3).map(|i| hi[i] - lo[i]).product::<f64>()).sum();
    let surface_area = exposure.iter().zip(&fs).map(|(e, f)| e * f.area()).sum();
    GroundTruth { model, plane_count, cluster_count: boxes.len(), boxes, polytopes, volume, surface_area }
}

/// Area-uniform samples of the model surface with exact outward normals and
/// Gaussian position noise of standard deviation `noise_sigma`.
pub fn generate_synthetic<T: Real>(
    model: SyntheticModel,
    samples_per_unit_area: f64,
    noise_sigma: f64,
    rng_seed: u64,
) -> Result<(OrientedCloud<T>, GroundTruth)> {
    if !(samples_per_unit_area > 0.0) || !(noise_sigma >= 0.0) {
        return Err(Error::Config("sampling density must be positive and noise non-negative".into()));
    }
    let boxes = model.boxes();
    let fs = faces(&boxes);
    let mut rng = seeded(rng_seed);
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let (mut pos, mut nrm) = (Vec::new(), Vec::new());
    for f in &fs {
        let count = (f.area() * samples_per_unit_area).round() as usize;
        let normal = Vector3::<f64>::axis(f.axis) * f.sign;
        for _ in 0..count {
            let p = f.at(rng.gen::<f64>(), rng.gen::<f64>());
            if !exposed(&boxes, f, &p) {
                continue;
            }
            let jitter = [noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng)];
            let q = Point3::<T>::from_f64(p[0] + jitter[0], p[1] + jitter[1], p[2] + jitter[2]);
            pos.push(q);
            nrm.push(normal.cast::<T>());
        }
    }
    Ok((OrientedCloud::new(pos, nrm)?, ground_truth(model)))
}
