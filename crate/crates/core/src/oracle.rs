//! Brute-force and finite-difference verifiers.
//!
//! Nothing here shares evaluation code with the fitter's tensor path: the
//! objective is recomputed from raw points with uncentered sums and an
//! explicit inverse of `Q`, and errors are computed from their definitions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{distance_to_axis, Cylinder, PointCloud, UnitVec3, Vec3};
use crate::moments::{
    classify_degeneracy, nonflatness_operator, DegeneracyClass, QuarticObjective, DEFAULT_RANK_EPS,
};
use crate::par;

/// Plastic number; its reciprocal powers drive the R2 low-discrepancy
/// sequence used for the grid.
const PLASTIC: f64 = 1.324_717_957_244_746;

/// `(1/n) Σ d_i² (2ρ ± d_i)²`, plus for points outside the surface and
/// minus for points inside.
pub fn biquadratic_error_by_definition(cloud: &PointCloud, cyl: &Cylinder) -> f64 {
    let rho = cyl.radius();
    let total: f64 = cloud
        .iter()
        .map(|p| {
            let rho_i = distance_to_axis(&cyl.axis, p);
            let d = (rho_i - rho).abs();
            let w = if rho_i >= rho {
                2.0 * rho + d
            } else {
                2.0 * rho - d
            };
            d * d * w * w
        })
        .sum();
    total / cloud.len() as f64
}

/// Root-mean-square surface distance `sqrt((1/n) Σ d_i²)`.
pub fn rms_error(cloud: &PointCloud, cyl: &Cylinder) -> f64 {
    let total: f64 = cloud
        .iter()
        .map(|p| {
            let d = distance_to_axis(&cyl.axis, p) - cyl.radius();
            d * d
        })
        .sum();
    (total / cloud.len() as f64).sqrt()
}

/// `F(a) = M(a) − L(a)ᵀ Q⁻¹ L(a)` from uncentered sums over the raw points.
#[derive(Debug, Clone)]
pub struct DirectObjective {
    points: Vec<Vec3>,
    q_inv: [[f64; 3]; 3],
}

impl DirectObjective {
    pub fn new(cloud: &PointCloud) -> Result<Self> {
        let class = classify_degeneracy(&nonflatness_operator(cloud), DEFAULT_RANK_EPS);
        if class != DegeneracyClass::NonDegenerate {
            return Err(Error::degenerate(
                class,
                "grid oracle needs a non-degenerate cloud",
            ));
        }
        let n = cloud.len() as f64;
        let mut mean = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for p in cloud {
            let r = p.to_array();
            for i in 0..3 {
                mean[i] += r[i] / n;
                for j in 0..3 {
                    second[i][j] += r[i] * r[j] / n;
                }
            }
        }
        let q: [[f64; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| second[i][j] - mean[i] * mean[j]));
        let cof = |i: usize, j: usize| {
            let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
            let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
            q[r0][c0] * q[r1][c1] - q[r0][c1] * q[r1][c0]
        };
        let det = q[0][0] * cof(0, 0) + q[0][1] * cof(0, 1) + q[0][2] * cof(0, 2);
        if !(det.is_finite() && det != 0.0) {
            return Err(Error::NumericFailure("Q is not invertible".into()));
        }
        let q_inv = std::array::from_fn(|i| std::array::from_fn(|j| cof(j, i) / det));
        Ok(Self {
            points: cloud.points().to_vec(),
            q_inv,
        })
    }

    pub fn value(&self, a: &Vec3) -> f64 {
        let n = self.points.len() as f64;
        let (mut sy, mut sy2) = (0.0, 0.0);
        let (mut sr, mut sry) = ([0.0; 3], [0.0; 3]);
        for p in &self.points {
            let y = p.cross(a).norm_squared();
            sy += y;
            sy2 += y * y;
            let r = p.to_array();
            for k in 0..3 {
                sr[k] += r[k];
                sry[k] += r[k] * y;
            }
        }
        let m = sy2 / n - (sy / n) * (sy / n);
        let l: [f64; 3] = std::array::from_fn(|k| sry[k] / n - (sr[k] / n) * (sy / n));
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += l[i] * self.q_inv[i][j] * l[j];
            }
        }
        m - quad
    }
}

/// First `count` points of an R2 sequence mapped area-uniformly onto the
/// upper hemisphere. Grids are nested: a smaller grid is a prefix of a
/// larger one.
pub fn hemisphere_grid(count: usize) -> Vec<UnitVec3> {
    let g1 = 1.0 / PLASTIC;
    let g2 = g1 * g1;
    (0..count)
        .map(|i| {
            let z = (0.5 + g1 * i as f64).fract();
            let phi = std::f64::consts::TAU * (0.5 + g2 * i as f64).fract();
            let r = (1.0 - z * z).max(0.0).sqrt();
            UnitVec3::new(Vec3::new(r * phi.cos(), r * phi.sin(), z))
                .expect("grid directions are nonzero")
                .canonical()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSearchResult {
    pub best_direction: UnitVec3,
    pub best_value: f64,
    pub resolution: usize,
}

/// Minimizes `F` by exhaustive evaluation over [`hemisphere_grid`].
pub fn grid_best_axis(cloud: &PointCloud, resolution: usize) -> Result<GridSearchResult> {
    grid_best_axis_with(cloud, resolution, true)
}

pub fn grid_best_axis_with(
    cloud: &PointCloud,
    resolution: usize,
    parallel: bool,
) -> Result<GridSearchResult> {
    if resolution < 100 {
        return Err(Error::InvalidInput(format!(
            "grid resolution must be at least 100, got {resolution}"
        )));
    }
    let objective = DirectObjective::new(cloud)?;
    let grid = hemisphere_grid(resolution);
    let values = par::map(&grid, parallel, |a| objective.value(a));
    // first minimum in grid order
    let (best, best_value) = values.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bv), (i, &v)| {
            if v < bv {
                (i, v)
            } else {
                (bi, bv)
            }
        },
    );
    if !best_value.is_finite() {
        return Err(Error::NumericFailure("grid objective is not finite".into()));
    }
    Ok(GridSearchResult {
        best_direction: grid[best],
        best_value,
        resolution,
    })
}

/// Central differences of the tensor contraction, one axis at a time.
pub fn finite_difference_gradient(q: &QuarticObjective, a: Vec3, h: f64) -> Vec3 {
    let mut g = [0.0; 3];
    for (k, gk) in g.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[k] = h;
        let e = Vec3::from(e);
        *gk = (q.value(&(a + e)) - q.value(&(a - e))) / (2.0 * h);
    }
    Vec3::from(g)
}

/// Default finite-difference step for direction `a`.
pub fn default_fd_step(a: &Vec3) -> f64 {
    1e-5 * a.norm().max(1.0)
}
