#![allow(dead_code)]

pub mod oracle;

use polyfit::geometry::{Plane, Point3, Vector3};
use polyfit::structuring::{PointLabel, StructuredCloud, StructuredPoint};

pub type Box3 = ([f64; 3], [f64; 3]);

pub const L_SHAPE: [Box3; 2] = [([0.0, 0.0, 0.0], [2.0, 1.0, 1.0]), ([0.0, 1.0, 0.0], [1.0, 2.0, 1.0])];
pub const UNIT_CUBE: [Box3; 1] = [([0.0, 0.0, 0.0], [1.0, 1.0, 1.0])];

fn inside_any(boxes: &[Box3], p: [f64; 3]) -> bool {
    boxes.iter().any(|(lo, hi)| (0..3).all(|i| p[i] > lo[i] && p[i] < hi[i]))
}

/// Grid samples with spacing `h` on the exposed faces of a union of boxes.
/// Coplanar faces with the same orientation share one plane.
pub fn box_scene(boxes: &[Box3], h: f64) -> (Vec<Plane<f64>>, StructuredCloud<f64>) {
    let mut planes: Vec<Plane<f64>> = Vec::new();
    let mut keys: Vec<(usize, i32, i64)> = Vec::new();
    let mut points = Vec::new();
    for (lo, hi) in boxes {
        for axis in 0..3 {
            for (sign, coord) in [(-1.0, lo[axis]), (1.0, hi[axis])] {
                let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
                let na = ((hi[a] - lo[a]) / h).round() as usize;
                let nb = ((hi[b] - lo[b]) / h).round() as usize;
                let mut face = Vec::new();
                for i in 0..na {
                    for j in 0..nb {
                        let mut p = [0.0; 3];
                        p[axis] = coord;
                        p[a] = lo[a] + (i as f64 + 0.5) * h;
                        p[b] = lo[b] + (j as f64 + 0.5) * h;
                        let mut probe = p;
                        probe[axis] += sign * 1e-6;
                        if !inside_any(boxes, probe) {
                            face.push(Point3::new(p[0], p[1], p[2]));
                        }
                    }
                }
                if face.is_empty() {
                    continue;
                }
                let key = (axis, sign as i32, (coord * 1e6).round() as i64);
                let id = match keys.iter().position(|k| *k == key) {
                    Some(id) => id,
                    None => {
                        let mut origin = [0.0; 3];
                        origin[axis] = coord;
                        let normal = Vector3::<f64>::axis(axis) * sign;
                        planes.push(Plane::new(Point3::new(origin[0], origin[1], origin[2]), normal).unwrap());
                        keys.push(key);
                        keys.len() - 1
                    }
                };
                points.extend(face.into_iter().map(|position| StructuredPoint { position, label: PointLabel::Planar, planes: vec![id] }));
            }
        }
    }
    (planes, StructuredCloud { points, eps: h })
}

/// Adjusted Rand index of two labelings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    use std::collections::HashMap;
    let n = a.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut ra: HashMap<usize, f64> = HashMap::new();
    let mut rb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *ra.entry(x).or_default() += 1.0;
        *rb.entry(y).or_default() += 1.0;
    }
    let c2 = |v: f64| v * (v - 1.0) / 2.0;
    let index: f64 = joint.values().map(|&v| c2(v)).sum();
    let sa: f64 = ra.values().map(|&v| c2(v)).sum();
    let sb: f64 = rb.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(n);
    let max = (sa + sb) / 2.0;
    if (max - expected).abs() < 1e-12 {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
