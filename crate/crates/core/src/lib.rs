//! Cylindrical regression for 3D point clouds.
//!
//! The best-fitting cylinder minimizes the biquadratic deflection
//! `(1/n) Σ (ρ_i² − ρ²)²`, where `ρ_i` is the distance of point `i` from the
//! axis. The radius and the axis position have closed forms once the axis
//! direction `a` is known, which leaves a homogeneous quartic `F(a)` to
//! minimize over the unit sphere.
//!
//! ```
//! use cylfit::{fit_cylinder, generate_cylinder_cloud, FitConfig, GeneratorSpec, Vec3};
//!
//! let cloud = generate_cylinder_cloud(&GeneratorSpec {
//!     n: 200,
//!     axis_point: Vec3::new(1.0, 2.0, 3.0),
//!     axis_dir: Vec3::new(0.0, 1.0, 1.0),
//!     radius: 0.5,
//!     height: 2.0,
//!     noise_sigma: 0.0,
//!     seed: 7,
//! })
//! .unwrap();
//! let fit = fit_cylinder(&cloud, &FitConfig::default()).unwrap();
//! assert!((fit.cylinder.radius() - 0.5).abs() < 1e-9);
//! ```

pub mod cli;
pub mod eigen;
pub mod error;
pub mod fitter;
pub mod geom;
pub mod io;
pub mod moments;
pub mod oracle;
pub mod par;
mod sum;

pub use error::{Error, Result};
pub use fitter::{
    dbar2_direct, fit_cylinder, objective_gradient, optimal_c, optimal_radius, reduced_objective,
    refine_on_sphere, sphere_seeds, stationarity_residual, CylinderFit, FitConfig, FitDiagnostics,
};
pub use geom::{
    axis_point_nearest_origin, canonicalize_axis, distance_to_axis, line_from_point_direction,
    moment_from_c, surface_distance, AxisLine, Cylinder, PointCloud, UnitVec3, Vec3,
};
pub use io::{
    generate_cylinder_cloud, parse_points_csv, write_points_csv, FitReport, GeneratorSpec,
};
pub use moments::{
    center_of_mass, classify_degeneracy, l_vector, m_scalar, nonflatness_operator, quartic_tensor,
    DegeneracyClass, NonFlatnessForm, QuarticObjective,
};
pub use oracle::{
    biquadratic_error_by_definition, finite_difference_gradient, grid_best_axis, rms_error,
    GridSearchResult,
};

/// Default number of directions probed by the grid oracle.
pub const DEFAULT_ORACLE_RESOLUTION: usize = 10_000;
