use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point3, Vector3};
use crate::scalar::Real;

/// Points with unit normals, index-aligned.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OrientedCloud<T> {
    pub positions: Vec<Point3<T>>,
    pub normals: Vec<Vector3<T>>,
}

impl<T: Real> OrientedCloud<T> {
    /// Validates lengths and finiteness and renormalizes the normals.
    pub fn new(positions: Vec<Point3<T>>, normals: Vec<Vector3<T>>) -> Result<Self> {
        if positions.len() != normals.len() {
            return Err(Error::InvalidCloud(format!(
                "{} positions but {} normals",
                positions.len(),
                normals.len()
            )));
        }
        let mut unit = Vec::with_capacity(normals.len());
        for (i, (p, n)) in positions.iter().zip(&normals).enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidCloud(format!("point {i} is not finite")));
            }
            unit.push(
                n.try_normalize()
                    .ok_or_else(|| Error::InvalidCloud(format!("point {i} has a zero-length normal")))?,
            );
        }
        Ok(Self { positions, normals: unit })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn bounding_box(&self) -> Option<Aabb<T>> {
        Aabb::from_points(&self.positions)
    }

    /// Bounding-box diagonal, zero for an empty cloud.
    pub fn diagonal(&self) -> T {
        self.bounding_box().map(|b| b.diagonal()).unwrap_or_else(T::zero)
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            normals: indices.iter().map(|&i| self.normals[i]).collect(),
        }
    }
}
