//! Point cloud loading and polytope export.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ply_rs::parser::Parser;
use ply_rs::ply::{DefaultElement, Property};
use serde::{Deserialize, Serialize};

use crate::cloud::OrientedCloud;
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolytope, HalfSpace, Point3, Vector3};
use crate::polytope_gen::ScoredPolytope;
use crate::scalar::Real;
use crate::structuring::{PointLabel, StructuredCloud};

const MIN_POINTS: usize = 10;
const NORMAL_KEYS: [&str; 3] = ["nx", "ny", "nz"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

/// A loaded cloud and the number of records dropped for non-finite values or zero normals.
#[derive(Debug, Clone)]
pub struct LoadedCloud<T> {
    pub cloud: OrientedCloud<T>,
    pub skipped: usize,
}

/// Keeps rows with finite coordinates and a non-zero normal.
fn assemble<T: Real>(rows: Vec<[f64; 6]>) -> Result<LoadedCloud<T>> {
    let total = rows.len();
    let (mut pos, mut nrm) = (Vec::with_capacity(total), Vec::with_capacity(total));
    for r in rows {
        let p = Point3::<T>::from_f64(r[0], r[1], r[2]);
        let n = Vector3::<T>::from_f64(r[3], r[4], r[5]);
        if r.iter().all(|v| v.is_finite()) && n.try_normalize().is_some() {
            pos.push(p);
            nrm.push(n);
        }
    }
    let skipped = total - pos.len();
    if skipped > 0 {
        log::warn!("skipped {skipped} records with non-finite values or zero-length normals");
    }
    Ok(LoadedCloud { cloud: OrientedCloud::new(pos, nrm)?, skipped })
}

/// `x y z nx ny nz` per line. Blank lines and `#` comments are ignored.
pub fn read_xyz<T: Real, R: BufRead>(reader: R) -> Result<LoadedCloud<T>> {
    let mut rows = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io { path: "<xyz>".into(), source })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::Malformed { line: no + 1, reason: format!("expected 6 fields, found {}", fields.len()) });
        }
        let mut row = [0.0; 6];
        for (slot, f) in row.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .map_err(|_| Error::Malformed { line: no + 1, reason: format!("not a number: {f:?}") })?;
        }
        rows.push(row);
    }
    assemble(rows)
}

fn scalar(p: &Property) -> Option<f64> {
    Some(match *p {
        Property::Float(v) => v as f64,
        Property::Double(v) => v,
        Property::Char(v) => v as f64,
        Property::UChar(v) => v as f64,
        Property::Short(v) => v as f64,
        Property::UShort(v) => v as f64,
        Property::Int(v) => v as f64,
        Property::UInt(v) => v as f64,
        _ => return None,
    })
}

/// ASCII or binary PLY with `x y z nx ny nz` vertex properties.
pub fn read_ply<T: Real, R: BufRead>(mut reader: R) -> Result<LoadedCloud<T>> {
    let parser = Parser::<DefaultElement>::new();
    let header = parser.read_header(&mut reader).map_err(|e| Error::Ply(e.to_string()))?;
    let vertex = header.elements.get("vertex").ok_or_else(|| Error::Ply("no vertex element".into()))?;
    for key in ["x", "y", "z"] {
        if !vertex.properties.contains_key(key) {
            return Err(Error::Ply(format!("vertex property {key} missing")));
        }
    }
    if NORMAL_KEYS.iter().any(|k| !vertex.properties.contains_key(*k)) {
        return Err(Error::NormalsRequired);
    }
    let payload = parser.read_payload(&mut reader, &header).map_err(|e| Error::Ply(e.to_string()))?;
    let elements = payload.get("vertex").map(Vec::as_slice).unwrap_or(&[]);
    let mut rows = Vec::with_capacity(elements.len());
    for (i, el) in elements.iter().enumerate() {
        let mut row = [0.0; 6];
        for (slot, key) in row.iter_mut().zip(["x", "y", "z", "nx", "ny", "nz"]) {
            *slot = el
                .get(key)
                .and_then(scalar)
                .ok_or_else(|| Error::Malformed { line: i + 1, reason: format!("vertex property {key} is not a scalar") })?;
        }
        rows.push(row);
    }
    assemble(rows)
}

/// Loads `.xyz` or `.ply` by extension; fewer than ten valid points is an error.
pub fn load_pointcloud<T: Real>(path: &Path) -> Result<LoadedCloud<T>> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    if ext != "xyz" && ext != "ply" {
        return Err(Error::UnknownFormat(ext));
    }
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let tag = |e: Error| match e {
        Error::Io { source, .. } => Error::Io { path: path.display().to_string(), source },
        other => other,
    };
    let loaded = if ext == "xyz" { read_xyz(reader) } else { read_ply(reader) }.map_err(tag)?;
    if loaded.cloud.len() < MIN_POINTS {
        return Err(Error::TooFewPoints(loaded.cloud.len()));
    }
    Ok(loaded)
}

pub fn write_xyz<T: Real>(cloud: &OrientedCloud<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for (p, n) in cloud.positions.iter().zip(&cloud.normals) {
        writeln!(w, "{} {} {} {} {} {}", p.x.as_f64(), p.y.as_f64(), p.z.as_f64(), n.x.as_f64(), n.y.as_f64(), n.z.as_f64())
            .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Obj,
    Ply,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Obj => "obj",
            Self::Ply => "ply",
            Self::Json => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(Self::Obj),
            "ply" => Ok(Self::Ply),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown export format {other:?}"))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Distinct, stable colour for index `i` (golden-ratio hue walk).
pub fn palette(i: usize) -> [u8; 3] {
    let h = (i as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r, g, b].map(|c| (55.0 + 200.0 * c) as u8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRecord {
    pub id: usize,
    pub origin: [f64; 3],
    /// Outward normal.
    pub normal: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeRecord {
    pub cluster: usize,
    pub score: f64,
    pub planes: Vec<PlaneRecord>,
    pub vertices: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeDocument {
    pub polytopes: Vec<PolytopeRecord>,
}

impl PolytopeDocument {
    pub fn from_polytopes<T: Real>(polytopes: &[ScoredPolytope<T>]) -> Self {
        let polytopes = polytopes
            .iter()
            .map(|s| PolytopeRecord {
                cluster: s.cluster,
                score: s.score.as_f64(),
                planes: s
                    .polytope
                    .plane_ids()
                    .iter()
                    .zip(s.polytope.faces())
                    .map(|(&id, h)| PlaneRecord { id, origin: h.origin.cast::<f64>().to_array(), normal: h.normal.cast::<f64>().to_array() })
                    .collect(),
                vertices: s.polytope.vertices().iter().map(|v| v.cast::<f64>().to_array()).collect(),
            })
            .collect();
        Self { polytopes }
    }

    /// Rebuilds the polytopes from their planes.
    pub fn to_polytopes<T: Real>(&self) -> Result<Vec<ScoredPolytope<T>>> {
        self.polytopes
            .iter()
            .map(|r| {
                let labelled = r
                    .planes
                    .iter()
                    .map(|p| (p.id, HalfSpace::new(Vector3::from_array(p.origin).cast(), Vector3::from_array(p.normal).cast())))
                    .collect();
                Ok(ScoredPolytope { cluster: r.cluster, score: T::lit(r.score), polytope: ConvexPolytope::from_halfspaces(labelled)? })
            })
            .collect()
    }
}

pub fn import_polytopes_json<T: Real>(path: &Path) -> Result<Vec<ScoredPolytope<T>>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let doc: PolytopeDocument = serde_json::from_str(&text)?;
    doc.to_polytopes()
}

fn write_obj<T: Real, W: Write>(polytopes: &[ScoredPolytope<T>], mtl_name: &str, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "mtllib {mtl_name}")?;
    let mut base = 1;
    for (i, s) in polytopes.iter().enumerate() {
        writeln!(w, "o polytope_{i}")?;
        writeln!(w, "usemtl polytope_{i}")?;
        let verts = s.polytope.vertices();
        for v in verts {
            writeln!(w, "v {} {} {}", v.x.as_f64(), v.y.as_f64(), v.z.as_f64())?;
        }
        for t in s.polytope.triangles() {
            writeln!(w, "f {} {} {}", base + t[0], base + t[1], base + t[2])?;
        }
        base += verts.len();
    }
    Ok(())
}

fn write_mtl<W: Write>(count: usize, w: &mut W) -> std::io::Result<()> {
    for i in 0..count {
        let c = palette(i).map(|v| v as f64 / 255.0);
        writeln!(w, "newmtl polytope_{i}\nKd {} {} {}\n", c[0], c[1], c[2])?;
    }
    Ok(())
}

fn write_mesh_ply<T: Real, W: Write>(polytopes: &[ScoredPolytope<T>], w: &mut W) -> std::io::Result<()> {
    let nv: usize = polytopes.iter().map(|s| s.polytope.vertices().len()).sum();
    let tris: Vec<Vec<[usize; 3]>> = polytopes.iter().map(|s| s.polytope.triangles()).collect();
    let nf: usize = tris.iter().map(Vec::len).sum();
    writeln!(w, "ply\nformat ascii 1.0\nelement vertex {nv}\nproperty double x\nproperty double y\nproperty double z")?;
    writeln!(w, "property uchar red\nproperty uchar green\nproperty uchar blue")?;
    writeln!(w, "element face {nf}\nproperty list uchar int vertex_indices\nend_header")?;
    for (i, s) in polytopes.iter().enumerate() {
        let c = palette(i);
        for v in s.polytope.vertices() {
            writeln!(w, "{} {} {} {} {} {}", v.x.as_f64(), v.y.as_f64(), v.z.as_f64(), c[0], c[1], c[2])?;
        }
    }
    let mut base = 0;
    for (s, ts) in polytopes.iter().zip(&tris) {
        for t in ts {
            writeln!(w, "3 {} {} {}", base + t[0], base + t[1], base + t[2])?;
        }
        base += s.polytope.vertices().len();
    }
    Ok(())
}

/// Writes the polytopes; OBJ output also writes a sibling `.mtl` file.
pub fn export_polytopes<T: Real>(polytopes: &[ScoredPolytope<T>], path: &Path, format: ExportFormat) -> Result<()> {
    if polytopes.is_empty() {
        log::warn!("exporting an empty polytope set to {}", path.display());
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    match format {
        ExportFormat::Obj => {
            let mtl = path.with_extension("mtl");
            let mtl_name = mtl.file_name().and_then(|n| n.to_str()).unwrap_or("polytopes.mtl").to_string();
            write_obj(polytopes, &mtl_name, &mut w).map_err(io_err(path))?;
            let mut m = BufWriter::new(File::create(&mtl).map_err(io_err(&mtl))?);
            write_mtl(polytopes.len(), &mut m).and_then(|_| m.flush()).map_err(io_err(&mtl))?;
        }
        ExportFormat::Ply => write_mesh_ply(polytopes, &mut w).map_err(io_err(path))?,
        ExportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &PolytopeDocument::from_polytopes(polytopes))?;
            writeln!(w).map_err(io_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Coloured point PLY: one colour per group, grey for points outside every group.
pub fn write_colored_points<T: Real>(points: &[Point3<T>], groups: &[usize], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "ply\nformat ascii 1.0\nelement vertex {}", points.len())?;
        writeln!(w, "property double x\nproperty double y\nproperty double z")?;
        writeln!(w, "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header")?;
        for (p, &g) in points.iter().zip(groups) {
            let c = if g == usize::MAX { [128, 128, 128] } else { palette(g) };
            writeln!(w, "{} {} {} {} {} {}", p.x.as_f64(), p.y.as_f64(), p.z.as_f64(), c[0], c[1], c[2])?;
        }
        w.flush()
    })();
    body.map_err(io_err(path))
}

/// Structured cloud coloured by label: planar, crease, corner.
pub fn write_structured_ply<T: Real>(structured: &StructuredCloud<T>, path: &Path) -> Result<()> {
    let groups: Vec<usize> = structured
        .points
        .iter()
        .map(|p| match p.label {
            PointLabel::Planar => 0,
            PointLabel::Crease => 1,
            PointLabel::Corner => 2,
        })
        .collect();
    write_colored_points(&structured.positions(), &groups, path)
}
