//! CSV point files, the synthetic cylinder generator, and JSON reports.
//!
//! # CSV
//!
//! One point per line as `x,y,z`. Blank lines and lines starting with `#`
//! are skipped. Written values use 17 significant digits, which round-trip
//! every `f64` exactly.
//!
//! # Generator
//!
//! The PRNG is xoshiro256** whose 256-bit state is expanded from the 64-bit
//! seed with SplitMix64. Uniform doubles are `(x >> 11) · 2⁻⁵³`. For each
//! point, in order: one uniform for the axial coordinate, one for the
//! angle, then three standard normals for the x, y, z noise. Normals come
//! from the Marsaglia polar method: draw `u, v` uniform on `(−1, 1)`
//! (u first), reject while `s = u² + v²` is `0` or `≥ 1`, return
//! `u·√(−2 ln s / s)` and keep `v·√(−2 ln s / s)` as the next normal. The
//! noise draws happen even when `noise_sigma` is zero.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitter::{CylinderFit, FitDiagnostics};
use crate::geom::{AxisLine, PointCloud, UnitVec3, Vec3};
use crate::moments::DegeneracyClass;

// ── CSV ────────────────────────────────────────────────────────────────────

pub fn parse_points_csv(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |message: &str| Error::Parse {
            line: idx + 1,
            content: raw.to_string(),
            message: message.to_string(),
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(fail(&format!("expected 3 fields, found {}", fields.len())));
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .map_err(|_| fail(&format!("cannot parse {field:?} as a number")))?;
            if !slot.is_finite() {
                return Err(fail("coordinate is not finite"));
            }
        }
        points.push(Vec3::from(xyz));
    }
    PointCloud::new(points)
}

pub fn write_points_csv(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 72);
    for p in cloud {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.x, p.y, p.z));
    }
    out
}

// ── Generator ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub axis_point: Vec3,
    pub axis_dir: Vec3,
    pub radius: f64,
    /// Extent along the axis, centered on `axis_point`.
    pub height: f64,
    /// Standard deviation of the isotropic Gaussian displacement.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n < 1 {
            return bad("point count must be at least 1".into());
        }
        if !self.axis_point.is_finite() {
            return bad(format!("non-finite axis point {}", self.axis_point));
        }
        if !(self.axis_dir.is_finite() && self.axis_dir.norm() > 0.0) {
            return bad(format!("invalid axis direction {}", self.axis_dir));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return bad(format!("height must be positive, got {}", self.height));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!(
                "noise must be non-negative, got {}",
                self.noise_sigma
            ));
        }
        Ok(())
    }
}

/// Seeded uniform and normal draws with the documented ordering.
pub struct SampleStream {
    rng: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Unit vectors `u, v` with `(u, v, a)` right-handed and orthonormal.
fn perpendicular_pair(a: &Vec3) -> (Vec3, Vec3) {
    let helper = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Vec3::X
    } else if a.y.abs() <= a.z.abs() {
        Vec3::Y
    } else {
        Vec3::Z
    };
    let u = helper.cross(a);
    let u = u / u.norm();
    (u, a.cross(&u))
}

/// Samples `spec.n` points on the cylinder surface, then adds noise.
/// Identical specs give bit-identical clouds.
pub fn generate_cylinder_cloud(spec: &GeneratorSpec) -> Result<PointCloud> {
    spec.validate()?;
    let a = UnitVec3::new(spec.axis_dir)?.get();
    let (u, v) = perpendicular_pair(&a);
    let mut rng = SampleStream::new(spec.seed);
    let points = (0..spec.n)
        .map(|_| {
            let t = (rng.uniform() - 0.5) * spec.height;
            let theta = std::f64::consts::TAU * rng.uniform();
            let noise = Vec3::new(rng.normal(), rng.normal(), rng.normal()) * spec.noise_sigma;
            spec.axis_point + a * t + (u * theta.cos() + v * theta.sin()) * spec.radius + noise
        })
        .collect();
    PointCloud::new(points)
}

// ── Reports ────────────────────────────────────────────────────────────────

/// JSON output of `cylfit fit`. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub axis_direction: [f64; 3],
    /// Axis point nearest the origin.
    pub axis_point: [f64; 3],
    pub axis_moment: [f64; 3],
    pub radius: f64,
    pub dbar2: f64,
    pub rms_distance: f64,
    pub degeneracy: DegeneracyClass,
    pub diagnostics: FitDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Vec<f64>>,
}

impl From<&CylinderFit> for FitReport {
    fn from(fit: &CylinderFit) -> Self {
        let axis = &fit.cylinder.axis;
        FitReport {
            axis_direction: axis.direction().get().to_array(),
            axis_point: axis.point_nearest_origin().to_array(),
            axis_moment: axis.moment().to_array(),
            radius: fit.cylinder.radius(),
            dbar2: fit.dbar2,
            rms_distance: fit.rms_distance,
            degeneracy: fit.degeneracy,
            diagnostics: fit.diagnostics.clone(),
            residuals: fit.residuals.clone(),
        }
    }
}

/// JSON output when a degenerate cloud is refused.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefusalReport {
    pub refused: bool,
    pub degeneracy: DegeneracyClass,
    pub reason: String,
}

/// JSON output of `cylfit eval`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub axis_direction: [f64; 3],
    pub axis_point: [f64; 3],
    pub axis_moment: [f64; 3],
    pub radius: f64,
    /// `(1/n) Σ ρ_i⁴ − 2ρ² (1/n) Σ ρ_i² + ρ⁴`.
    pub dbar2: f64,
    /// `(1/n) Σ d_i² (2ρ ± d_i)²`.
    pub biquadratic_by_definition: f64,
    pub rms_distance: f64,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyFitSide {
    pub axis_direction: [f64; 3],
    pub objective: f64,
    pub stationarity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOracleSide {
    pub best_direction: [f64; 3],
    pub best_value: f64,
    pub resolution: usize,
}

/// JSON output of `cylfit verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub fit: VerifyFitSide,
    pub oracle: VerifyOracleSide,
    /// Angle between the two axes, in degrees.
    pub angle_deg: f64,
    /// `fit.objective − oracle.best_value`; non-positive when the fit is at
    /// least as good as the grid.
    pub objective_gap: f64,
}

/// Angle between two lines in degrees, ignoring orientation.
pub fn line_angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    let c = a.dot(b).abs() / (a.norm() * b.norm());
    c.min(1.0).acos().to_degrees()
}

pub fn axis_fields(axis: &AxisLine) -> ([f64; 3], [f64; 3], [f64; 3]) {
    (
        axis.direction().get().to_array(),
        axis.point_nearest_origin().to_array(),
        axis.moment().to_array(),
    )
}
