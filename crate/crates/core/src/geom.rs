//! Vector algebra, moment representation of lines, and point-to-cylinder
//! distances.
//!
//! A line is stored as a unit direction `a` together with its moment
//! `b = r0 × a` about the origin. Every point `r` on the line satisfies
//! `r × a = b`, and `b ⊥ a`. The pair carries no choice of a base point.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the orthogonality of `a` and `b`.
const ORTHO_TOL: f64 = 1e-12;

// ── Vec3 ───────────────────────────────────────────────────────────────────

/// A 3D vector or point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Like [`Vec3::new`], rejecting NaN and infinite components.
    pub fn try_new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self::new(x, y, z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidInput(format!("non-finite vector {v}")))
        }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Vector product `[self, o]`.
    #[inline]
    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Largest absolute component.
    #[inline]
    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Index of the largest-magnitude component, first index on ties.
    fn dominant_index(&self) -> usize {
        let c = self.to_array();
        let mut best = 0;
        for i in 1..3 {
            if c[i].abs() > c[best].abs() {
                best = i;
            }
        }
        best
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

// ── UnitVec3 ───────────────────────────────────────────────────────────────

/// A direction, renormalized to unit length on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "[f64; 3]")]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Normalizes `v`. Fails on zero-length or non-finite input.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !v.is_finite() || !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidInput(format!(
                "cannot normalize direction {v}"
            )));
        }
        let u = v / n;
        // one more pass brings |u| to within an ulp or two of 1
        Ok(Self(u / u.norm()))
    }

    #[inline]
    pub fn get(&self) -> Vec3 {
        self.0
    }

    /// Returns `±self` such that the largest-magnitude component is positive.
    pub fn canonical(self) -> Self {
        if self.is_canonical() {
            self
        } else {
            Self(-self.0)
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.0[self.0.dominant_index()] >= 0.0
    }
}

impl std::ops::Deref for UnitVec3 {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl From<UnitVec3> for [f64; 3] {
    fn from(u: UnitVec3) -> Self {
        u.0.to_array()
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

// ── AxisLine ───────────────────────────────────────────────────────────────

/// An oriented line `[r, a] = b` with unit `a`, `b ⊥ a`, and `a` canonical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLine {
    a: UnitVec3,
    b: Vec3,
}

impl AxisLine {
    /// Builds a line from a direction and a moment.
    ///
    /// `b` is re-orthogonalized against `a` (its component along `a` is
    /// dropped) and the pair is canonicalized.
    pub fn new(a: UnitVec3, b: Vec3) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite moment {b}")));
        }
        let along = a.dot(&b);
        let b = if along.abs() > 0.0 {
            b - a.get() * along
        } else {
            b
        };
        Ok(canonicalize_axis(AxisLine { a, b }))
    }

    /// Line through `r0` along `dir`.
    pub fn from_point_direction(r0: Vec3, dir: Vec3) -> Result<Self> {
        if !r0.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite point {r0}")));
        }
        if dir.norm_squared() == 0.0 {
            return Err(Error::InvalidInput("zero-length axis direction".into()));
        }
        let a = UnitVec3::new(dir)?;
        AxisLine::new(a, r0.cross(&a))
    }

    #[inline]
    pub fn direction(&self) -> UnitVec3 {
        self.a
    }

    #[inline]
    pub fn moment(&self) -> Vec3 {
        self.b
    }

    /// The point of the line closest to the origin, `c = [a, b]`.
    pub fn point_nearest_origin(&self) -> Vec3 {
        axis_point_nearest_origin(self)
    }

    /// Whether `b ⊥ a` holds to the relative tolerance.
    pub fn is_orthogonal(&self) -> bool {
        self.a.dot(&self.b).abs() <= ORTHO_TOL * self.b.norm().max(1.0)
    }
}

/// Line through `r0` along `dir`; see [`AxisLine::from_point_direction`].
pub fn line_from_point_direction(r0: Vec3, dir: Vec3) -> Result<AxisLine> {
    AxisLine::from_point_direction(r0, dir)
}

/// `c = [a, b]`. Because `b ⊥ a`, this point lies on the line and `(c, a) = 0`.
pub fn axis_point_nearest_origin(axis: &AxisLine) -> Vec3 {
    axis.a.cross(&axis.b)
}

/// Distance from `r` to the axis line: `|[r, a] − b|`.
#[inline]
pub fn distance_to_axis(axis: &AxisLine, r: &Vec3) -> f64 {
    (r.cross(&axis.a) - axis.b).norm()
}

/// Squared distance to the axis, without the square root.
#[inline]
pub fn distance_to_axis_squared(axis: &AxisLine, r: &Vec3) -> f64 {
    (r.cross(&axis.a) - axis.b).norm_squared()
}

/// Inverse of `c = [a, b]` on the plane `c ⊥ a`: `b = −[a, c]`.
pub fn moment_from_c(a: UnitVec3, c: Vec3) -> Vec3 {
    -(a.cross(&c)) / a.norm_squared()
}

/// Flips `(a, b) → (−a, −b)` when needed so that `a` is canonical.
pub fn canonicalize_axis(axis: AxisLine) -> AxisLine {
    if axis.a.is_canonical() {
        axis
    } else {
        AxisLine {
            a: -axis.a,
            b: -axis.b,
        }
    }
}

// ── Cylinder ───────────────────────────────────────────────────────────────

/// A circular cylinder of radius `rho` around `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub axis: AxisLine,
    rho: f64,
}

impl Cylinder {
    pub fn new(axis: AxisLine, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cylinder radius must be positive and finite, got {rho}"
            )));
        }
        Ok(Self { axis, rho })
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.rho
    }
}

/// `d = |ρ_i − ρ|`, the distance from `r` to the cylinder surface.
pub fn surface_distance(cyl: &Cylinder, r: &Vec3) -> f64 {
    (distance_to_axis(&cyl.axis, r) - cyl.rho).abs()
}

// ── PointCloud ─────────────────────────────────────────────────────────────

/// A non-empty ordered list of finite points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| !p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "point {i} has non-finite coordinates {p}"
            )));
        }
        Ok(Self { points })
    }

    #[inline]
    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec3> {
        self.points.iter()
    }

    /// Largest distance of a point from the center of mass.
    pub fn spread(&self) -> f64 {
        let cm = crate::moments::center_of_mass(self);
        self.points
            .iter()
            .map(|p| (*p - cm).norm())
            .fold(0.0, f64::max)
    }

    /// Largest distance of a point from the origin.
    pub fn extent(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<PointCloud> {
        PointCloud::new(self.points.iter().map(f).collect())
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a Vec3;
    type IntoIter = std::slice::Iter<'a, Vec3>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}
