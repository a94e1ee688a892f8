use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Three-component vector used for both points and directions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

pub type Point3<T> = Vec3<T>;
pub type Vector3<T> = Vec3<T>;

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Builds a vector from `f64` components.
    #[inline]
    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Self::new(T::lit(x), T::lit(y), T::lit(z))
    }

    #[inline]
    pub fn axis(i: usize) -> Self {
        let mut v = Self::zero();
        match i {
            0 => v.x = T::one(),
            1 => v.y = T::one(),
            _ => v.z = T::one(),
        }
        v
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    #[inline]
    pub fn distance_squared(&self, o: &Self) -> T {
        (*self - *o).norm_squared()
    }

    /// Unit vector in the same direction, `None` for (near) zero length.
    pub fn try_normalize(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::epsilon() * T::lit(16.0) && n.is_finite() {
            Some(*self / n)
        } else {
            None
        }
    }

    pub fn normalized(&self) -> Self {
        self.try_normalize().unwrap_or_else(Self::zero)
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn min_components(&self, o: &Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max_components(&self, o: &Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    #[inline]
    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Angle to `o` in radians, both assumed unit length.
    pub fn angle_to(&self, o: &Self) -> T {
        self.dot(o).max(-T::one()).min(T::one()).acos()
    }

    /// Converts between scalar types.
    pub fn cast<U: Real>(&self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }
}

impl<T: Real> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Point3<T>,
    pub max: Point3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn from_points<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Point3<T>>,
    {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Self { min: first, max: first };
        for p in it {
            b.min = b.min.min_components(p);
            b.max = b.max.max_components(p);
        }
        Some(b)
    }

    pub fn extent(&self) -> Vector3<T> {
        self.max - self.min
    }

    pub fn diagonal(&self) -> T {
        self.extent().norm()
    }

    pub fn center(&self) -> Point3<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn expanded(&self, pad: T) -> Self {
        let d = Vec3::new(pad, pad, pad);
        Self { min: self.min - d, max: self.max + d }
    }

    /// Euclidean distance from `p` to the box, zero inside.
    pub fn distance_to(&self, p: &Point3<T>) -> T {
        let dx = (self.min.x - p.x).max(p.x - self.max.x).max(T::zero());
        let dy = (self.min.y - p.y).max(p.y - self.max.y).max(T::zero());
        let dz = (self.min.z - p.z).max(p.z - self.max.z).max(T::zero());
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Mean of a point set, `None` when empty.
pub fn centroid<T: Real>(points: &[Point3<T>]) -> Option<Point3<T>> {
    if points.is_empty() {
        return None;
    }
    let sum = points.iter().fold(Vec3::zero(), |acc, p| acc + *p);
    Some(sum / T::from_usize_lossy(points.len()))
}
