//! Minimization of the reduced deflection `F(a)` over the unit sphere and
//! back-substitution to a full cylinder.
//!
//! The pipeline is `a → c → b → ρ_i → ρ`:
//!
//! 1. `a` minimizes `F(a) = M(a) − Σ_k (e_k, L(a))² / λ_k` on the sphere,
//!    found by evaluating `F` on a hemisphere grid and refining the best
//!    seeds with a projected line search.
//! 2. `c = ½ Q⁻¹ L(a)`.
//! 3. `b = −[a, c]`.
//! 4. `ρ² = (1/n) Σ |[r_i, a] − b|²`.
//!
//! `F` minimizes over `c` without the constraint `c ⊥ a` that a real axis
//! imposes, so it is a lower bound on the deflection of the recovered
//! cylinder. The bound is tight when the optimal `c` has no component along
//! `a`, which holds for points lying exactly on a cylinder. The gap is
//! reported in [`FitDiagnostics`].

use serde::Serialize;

use crate::eigen::Sym3;
use crate::error::{Error, Result};
use crate::geom::{
    distance_to_axis, distance_to_axis_squared, moment_from_c, AxisLine, Cylinder, PointCloud,
    UnitVec3, Vec3,
};
use crate::moments::{
    classify_degeneracy, l_vector, nonflatness_operator, quartic_tensor_with_rank_eps,
    DegeneracyClass, NonFlatnessForm, QuarticObjective, DEFAULT_RANK_EPS,
};
use crate::oracle;
use crate::par;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653_3;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Largest step taken along the sphere in one iteration, in radians.
const MAX_STEP: f64 = 0.5;
/// Relative window within which refined candidates count as tied.
const TIE_REL: f64 = 1e-12;
/// Relative window for reporting alternative near-optimal candidates.
const ALTERNATIVE_REL: f64 = 1e-9;

// ── Configuration ──────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Number of hemisphere seed directions.
    pub grid_count: usize,
    /// Number of best seeds refined.
    pub multistart_count: usize,
    /// Target for [`stationarity_residual`].
    pub tol_stationarity: f64,
    pub max_refine_iters: usize,
    pub rank_eps: f64,
    pub emit_residuals: bool,
    /// Evaluate seeds and refinements on the rayon pool. Has no effect
    /// without the `parallel` feature; results are identical either way.
    pub parallel: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            grid_count: 2000,
            multistart_count: 8,
            tol_stationarity: 1e-12,
            max_refine_iters: 100,
            rank_eps: DEFAULT_RANK_EPS,
            emit_residuals: false,
            parallel: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_count < 8 {
            return Err(Error::InvalidInput(format!(
                "grid count must be at least 8, got {}",
                self.grid_count
            )));
        }
        if self.multistart_count < 1 {
            return Err(Error::InvalidInput(
                "multistart count must be at least 1".into(),
            ));
        }
        for (name, v) in [
            ("stationarity tolerance", self.tol_stationarity),
            ("rank epsilon", self.rank_eps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

// ── Objective ──────────────────────────────────────────────────────────────

/// `F(a)` for a unit direction. `F(a) = F(−a)`.
pub fn reduced_objective(q: &QuarticObjective, a: UnitVec3) -> f64 {
    q.value(&a)
}

/// Euclidean gradient of the homogeneous extension of `F`.
pub fn objective_gradient(q: &QuarticObjective, a: Vec3) -> Vec3 {
    q.gradient(&a)
}

/// `|[∇F(a), a]|` divided by the largest tensor component. Zero exactly at
/// constrained stationary points of `F` on the sphere.
pub fn stationarity_residual(q: &QuarticObjective, a: UnitVec3) -> f64 {
    let r = objective_gradient(q, a.get()).cross(&a).norm();
    let s = q.scale();
    if s > 0.0 {
        r / s
    } else {
        r
    }
}

// ── Closed-form eliminations ───────────────────────────────────────────────

/// Solves `2 Q c = L`: `c = Σ_k (e_k, L) e_k / (2 λ_k)`.
pub fn optimal_c(form: &NonFlatnessForm, l: Vec3) -> Result<Vec3> {
    let class = classify_degeneracy(form, DEFAULT_RANK_EPS);
    if class != DegeneracyClass::NonDegenerate {
        return Err(Error::degenerate(
            class,
            "Q is singular; 2Qc = L has no unique solution",
        ));
    }
    let values = form.eigenvalues();
    let mut c = Vec3::ZERO;
    for (e, lambda) in form.eigenvectors().iter().zip(values) {
        c += e.get() * (e.dot(&l) / (2.0 * lambda));
    }
    Ok(c)
}

/// `ρ = sqrt((1/n) Σ ρ_i²)`, the radius minimizing the deflection for a
/// fixed axis.
pub fn optimal_radius(cloud: &PointCloud, axis: &AxisLine) -> Result<f64> {
    let mean_sq = cloud
        .iter()
        .map(|p| distance_to_axis_squared(axis, p))
        .sum::<f64>()
        / cloud.len() as f64;
    let rho = mean_sq.sqrt();
    if rho > 0.0 && rho.is_finite() {
        Ok(rho)
    } else {
        Err(Error::degenerate(
            DegeneracyClass::DoubleDegenerate,
            "all points lie on the axis; the fitted radius is zero",
        ))
    }
}

/// Biquadratic deflection `(1/n) Σ ρ_i⁴ − 2ρ² (1/n) Σ ρ_i² + ρ⁴` of the
/// cloud from the cylinder `(axis, rho)`, evaluated as `(1/n) Σ (ρ_i² − ρ²)²`.
pub fn dbar2_direct(cloud: &PointCloud, axis: &AxisLine, rho: f64) -> f64 {
    let r2 = rho * rho;
    cloud
        .iter()
        .map(|p| {
            let d = distance_to_axis_squared(axis, p) - r2;
            d * d
        })
        .sum::<f64>()
        / cloud.len() as f64
}

// ── Search ─────────────────────────────────────────────────────────────────

/// Fibonacci spiral over the upper hemisphere, canonical-sign directions.
pub fn sphere_seeds(count: usize) -> Vec<UnitVec3> {
    let n = count as f64;
    (0..count)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = GOLDEN_ANGLE * i as f64;
            UnitVec3::new(Vec3::new(r * phi.cos(), r * phi.sin(), z))
                .expect("seed directions are nonzero")
                .canonical()
        })
        .collect()
}

/// Outcome of one refinement run.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub direction: UnitVec3,
    pub objective: f64,
    pub stationarity_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `F` at the start and after every accepted step.
    pub history: Vec<f64>,
}

/// Rounding floor of an objective evaluation near `f`.
fn objective_floor(q: &QuarticObjective, f: f64) -> f64 {
    64.0 * f64::EPSILON * (f.abs() + q.scale())
}

/// Orthonormal pair spanning the plane orthogonal to `a`.
fn tangent_basis(a: &Vec3) -> (Vec3, Vec3) {
    let helper = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Vec3::X
    } else if a.y.abs() <= a.z.abs() {
        Vec3::Y
    } else {
        Vec3::Z
    };
    let u = a.cross(&helper);
    let u = u / u.norm();
    (u, a.cross(&u))
}

/// Search direction in the tangent plane at `a`: the Newton step of the
/// restricted Hessian when it is positive definite, otherwise the scaled
/// negative tangent gradient. Returns the direction and whether it is Newton.
fn search_direction(hess: &Sym3, radial: f64, gt: &Vec3, a: &Vec3) -> (Vec3, bool) {
    let (u, v) = tangent_basis(a);
    let h11 = hess.bilinear(&u, &u) - radial;
    let h22 = hess.bilinear(&v, &v) - radial;
    let h12 = hess.bilinear(&u, &v);
    let g1 = gt.dot(&u);
    let g2 = gt.dot(&v);
    let det = h11 * h22 - h12 * h12;
    if h11 > 0.0 && det > 0.0 {
        let x1 = -(h22 * g1 - h12 * g2) / det;
        let x2 = -(h11 * g2 - h12 * g1) / det;
        return (u * x1 + v * x2, true);
    }
    let curvature = (h11 * h11 + h22 * h22 + 2.0 * h12 * h12).sqrt();
    let scale = if curvature > 0.0 { curvature } else { 1.0 };
    (-*gt / scale, false)
}

/// Projected line search on the unit sphere starting from `a0`.
///
/// Each iteration moves along a tangent direction and renormalizes,
/// accepting the first halving that satisfies the Armijo condition. Once the
/// predicted decrease drops below the rounding floor of `F`, Newton steps
/// are still accepted if they shrink the stationarity residual and leave
/// `F` within that floor, so `history` is non-increasing up to rounding.
pub fn refine_on_sphere(q: &QuarticObjective, a0: UnitVec3, cfg: &FitConfig) -> Result<Refinement> {
    let eval = |a: &UnitVec3| -> Result<f64> {
        let f = q.value(a);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::NumericFailure(format!(
                "objective is not finite at direction {}",
                a.get()
            )))
        }
    };

    let mut a = a0;
    let mut f = eval(&a)?;
    let mut history = vec![f];
    let mut iterations = 0;
    let mut residual = stationarity_residual(q, a);

    while iterations < cfg.max_refine_iters && residual > cfg.tol_stationarity {
        let g = q.gradient(&a);
        let radial = g.dot(&a);
        let gt = g - a.get() * radial;
        let (mut step, newton) = search_direction(&q.hessian(&a), radial, &gt, &a);
        let len = step.norm();
        if len > MAX_STEP {
            step = step * (MAX_STEP / len);
        }
        let slope = gt.dot(&step);

        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..MAX_HALVINGS {
            if -ARMIJO * t * slope <= f64::EPSILON * f.abs() {
                break;
            }
            let cand = UnitVec3::new(a.get() + step * t)?;
            let fc = eval(&cand)?;
            if fc <= f + ARMIJO * t * slope {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }

        if accepted.is_none() && newton {
            let cand = UnitVec3::new(a.get() + step)?;
            let fc = eval(&cand)?;
            if stationarity_residual(q, cand) < residual && fc <= f + objective_floor(q, f) {
                accepted = Some((cand, fc));
            }
        }

        let Some((next, fn_)) = accepted else {
            break;
        };
        iterations += 1;
        a = next;
        f = fn_;
        history.push(f);
        residual = stationarity_residual(q, a);
    }

    Ok(Refinement {
        direction: a.canonical(),
        objective: f,
        stationarity_residual: residual,
        iterations,
        converged: residual <= cfg.tol_stationarity,
        history,
    })
}

// ── Fit ────────────────────────────────────────────────────────────────────

/// A refined direction whose objective is within `1e-9` (relative) of the
/// selected one but which points elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub direction: [f64; 3],
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub stationarity_residual: f64,
    pub refine_iterations: usize,
    pub converged: bool,
    pub seeds_evaluated: usize,
    /// `F` at the returned direction.
    pub objective_at_solution: f64,
    /// `dbar2 − objective_at_solution`; zero when `F` is tight.
    pub relaxation_gap: f64,
    /// Component of the unconstrained optimal `c` along `a`, which the
    /// back-substitution discards.
    pub c_axial_component: f64,
    pub alternatives: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFit {
    pub cylinder: Cylinder,
    /// Biquadratic deflection of the cloud from `cylinder`, length⁴.
    pub dbar2: f64,
    /// Root-mean-square surface distance, length.
    pub rms_distance: f64,
    pub residuals: Option<Vec<f64>>,
    pub degeneracy: DegeneracyClass,
    pub diagnostics: FitDiagnostics,
}

fn refusal(class: DegeneracyClass) -> Error {
    let reason = match class {
        DegeneracyClass::TripleDegenerate => {
            "all points coincide; any cylinder whose surface passes through the point fits"
        }
        DegeneracyClass::DoubleDegenerate => {
            "all points are collinear; any cylinder parallel to the line whose surface contains it fits"
        }
        DegeneracyClass::SimpleDegenerate => {
            "warning: all points are coplanar; the best-fitting cylinder is not unique, refusing to pick one"
        }
        DegeneracyClass::NonDegenerate => unreachable!("non-degenerate clouds are fitted"),
    };
    Error::degenerate(class, reason)
}

/// Lexicographic order on components, used to break ties deterministically.
fn lex_cmp(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

/// Picks the refined candidate with the smallest objective; among those
/// tied within `1e-12` relative, the lexicographically largest direction.
fn select_best<'a>(q: &QuarticObjective, refined: &'a [Refinement]) -> &'a Refinement {
    let f_min = refined
        .iter()
        .map(|r| r.objective)
        .fold(f64::INFINITY, f64::min);
    let window = TIE_REL * f_min.abs() + objective_floor(q, 0.0);
    refined
        .iter()
        .filter(|r| r.objective <= f_min + window)
        .max_by(|x, y| lex_cmp(&x.direction, &y.direction))
        .expect("at least one refined candidate")
}

/// Fits a cylinder to a non-degenerate cloud.
///
/// Degenerate clouds (coincident, collinear or coplanar points) are refused
/// with [`Error::Degenerate`] carrying the class and an explanation.
pub fn fit_cylinder(cloud: &PointCloud, cfg: &FitConfig) -> Result<CylinderFit> {
    cfg.validate()?;
    let form = nonflatness_operator(cloud);
    let class = classify_degeneracy(&form, cfg.rank_eps);
    if class != DegeneracyClass::NonDegenerate {
        return Err(refusal(class));
    }
    let q = quartic_tensor_with_rank_eps(cloud, &form, cfg.rank_eps)?;

    let seeds = sphere_seeds(cfg.grid_count);
    let values = par::map(&seeds, cfg.parallel, |a| q.value(a));
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by(|&i, &j| {
        values[i]
            .total_cmp(&values[j])
            .then(lex_cmp(&seeds[j], &seeds[i]))
    });
    let starts: Vec<UnitVec3> = order
        .iter()
        .take(cfg.multistart_count)
        .map(|&i| seeds[i])
        .collect();

    let refined = par::map(&starts, cfg.parallel, |a| refine_on_sphere(&q, *a, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let best = select_best(&q, &refined).clone();
    let a = best.direction;

    let mut alternatives: Vec<Candidate> = Vec::new();
    let alt_window = ALTERNATIVE_REL * best.objective.abs().max(objective_floor(&q, 0.0));
    for r in &refined {
        let distinct_from = |d: &Vec3| r.direction.dot(d).abs() < 1.0 - 1e-9;
        if r.objective <= best.objective + alt_window
            && distinct_from(&a)
            && alternatives
                .iter()
                .all(|c| distinct_from(&Vec3::from(c.direction)))
        {
            alternatives.push(Candidate {
                direction: r.direction.get().to_array(),
                objective: r.objective,
            });
        }
    }

    // back-substitute in coordinates centered on the center of mass
    let center = form.center();
    let centered = cloud.map(|p| *p - center)?;
    let c = optimal_c(&form, l_vector(&centered, a.get()))?;
    let b = moment_from_c(a, c);
    let axis = AxisLine::from_point_direction(a.cross(&b) + center, a.get())?;

    let spread = cloud.spread();
    let rho = optimal_radius(cloud, &axis)?;
    if rho <= 1e-12 * spread {
        return Err(Error::degenerate(
            DegeneracyClass::DoubleDegenerate,
            "the fitted radius vanishes; the points lie on a line",
        ));
    }
    let cylinder = Cylinder::new(axis, rho)?;
    let dbar2 = dbar2_direct(cloud, &axis, rho).max(0.0);
    let rms_distance = oracle::rms_error(cloud, &cylinder);
    let residuals = cfg.emit_residuals.then(|| {
        cloud
            .iter()
            .map(|p| (distance_to_axis(&axis, p) - rho).abs())
            .collect()
    });

    Ok(CylinderFit {
        cylinder,
        dbar2,
        rms_distance,
        residuals,
        degeneracy: class,
        diagnostics: FitDiagnostics {
            stationarity_residual: best.stationarity_residual,
            refine_iterations: best.iterations,
            converged: best.converged,
            seeds_evaluated: seeds.len(),
            objective_at_solution: best.objective,
            relaxation_gap: dbar2 - best.objective,
            c_axial_component: c.dot(&a),
            alternatives,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{generate_cylinder_cloud, GeneratorSpec};
    use crate::moments::{m_scalar, quartic_tensor};

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn unit(x: f64, y: f64, z: f64) -> UnitVec3 {
        UnitVec3::new(v(x, y, z)).unwrap()
    }

    fn eight_point_cylinder() -> PointCloud {
        let mut pts = Vec::new();
        for z in [0.0, 1.0] {
            for (x, y) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                pts.push(v(x, y, z));
            }
        }
        PointCloud::new(pts).unwrap()
    }

    fn z_cylinder(n: usize, seed: u64) -> PointCloud {
        generate_cylinder_cloud(&GeneratorSpec {
            n,
            axis_point: Vec3::ZERO,
            axis_dir: Vec3::Z,
            radius: 1.0,
            height: 3.0,
            noise_sigma: 0.0,
            seed,
        })
        .unwrap()
    }

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        };
        PointCloud::new(
            (0..n)
                .map(|_| v(next(), next() * 1.5, next() * 0.7))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn objective_vanishes_on_exact_cylinder_axis() {
        let c = eight_point_cylinder();
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        let f = reduced_objective(&q, unit(0.0, 0.0, 1.0));
        assert!(f.abs() <= 1e-12, "F = {f}");
    }

    #[test]
    fn objective_is_even() {
        let c = random_cloud(25, 4);
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        let a = unit(0.3, -0.5, 0.8);
        assert_eq!(reduced_objective(&q, a), reduced_objective(&q, -a));
    }

    #[test]
    fn objective_matches_unreduced_quadratic_in_c() {
        // 4Q(c,c) − 4(L,c) + M at the optimal c
        let c = random_cloud(40, 9);
        let form = nonflatness_operator(&c);
        let q = quartic_tensor(&c, &form).unwrap();
        for a in [
            unit(1.0, 0.2, 0.1),
            unit(-0.3, 0.9, 0.4),
            unit(0.1, 0.1, 1.0),
        ] {
            let l = l_vector(&c, a.get());
            let m = m_scalar(&c, a.get());
            let copt = optimal_c(&form, l).unwrap();
            let direct = 4.0 * form.quadratic(&copt) - 4.0 * l.dot(&copt) + m;
            let f = reduced_objective(&q, a);
            assert!((f - direct).abs() <= 1e-9 * direct.abs(), "{f} vs {direct}");
        }
    }

    #[test]
    fn gradient_at_zero_and_euler_relation() {
        let c = random_cloud(30, 2);
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        assert_eq!(objective_gradient(&q, Vec3::ZERO), Vec3::ZERO);
        let a = v(0.4, -1.1, 0.7);
        let lhs = objective_gradient(&q, a).dot(&a);
        let rhs = 4.0 * q.value(&a);
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs());
    }

    #[test]
    fn gradient_vanishes_at_exact_axis() {
        let c = z_cylinder(200, 1);
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        let g = objective_gradient(&q, Vec3::Z);
        assert!(g.norm() <= 1e-9 * q.scale(), "|g| = {}", g.norm());
        assert!(stationarity_residual(&q, unit(0.0, 0.0, 1.0)) <= 1e-12);
    }

    #[test]
    fn symmetric_cloud_is_stationary_along_mirror_normal() {
        // mirror-symmetric under x → −x, so e_x is a stationary direction
        let base = random_cloud(20, 31);
        let mut pts = base.points().to_vec();
        pts.extend(base.iter().map(|p| v(-p.x, p.y, p.z)));
        let c = PointCloud::new(pts).unwrap();
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        assert!(stationarity_residual(&q, unit(1.0, 0.0, 0.0)) <= 1e-10);
    }

    #[test]
    fn random_direction_is_not_stationary() {
        let c = random_cloud(30, 77);
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        assert!(stationarity_residual(&q, unit(0.37, -0.61, 0.52)) > 1e-3);
    }

    #[test]
    fn optimal_c_examples() {
        let form = NonFlatnessForm::from_matrix(Sym3::diag([1.0, 2.0, 4.0]), Vec3::ZERO, 1.0);
        let c = optimal_c(&form, v(2.0, 4.0, 8.0)).unwrap();
        assert!((c - v(1.0, 1.0, 1.0)).norm() < 1e-15);
        assert_eq!(optimal_c(&form, Vec3::ZERO).unwrap(), Vec3::ZERO);
    }

    #[test]
    fn optimal_c_solves_linear_system() {
        let c = random_cloud(50, 8);
        let form = nonflatness_operator(&c);
        let l = v(0.3, -2.0, 1.25);
        let sol = optimal_c(&form, l).unwrap();
        assert!((form.matrix().mul_vec(&sol) * 2.0 - l).norm() <= 1e-10 * l.norm());
    }

    #[test]
    fn optimal_c_rejects_singular_form() {
        let form = NonFlatnessForm::from_matrix(Sym3::diag([0.0, 2.0, 4.0]), Vec3::ZERO, 1.0);
        assert!(matches!(
            optimal_c(&form, Vec3::X),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn radius_and_deflection_examples() {
        let z = AxisLine::from_point_direction(Vec3::ZERO, Vec3::Z).unwrap();
        let at = |d: &[f64]| PointCloud::new(d.iter().map(|r| v(*r, 0.0, 0.0)).collect()).unwrap();
        assert_eq!(optimal_radius(&at(&[5.0, 5.0]), &z).unwrap(), 5.0);
        assert_eq!(optimal_radius(&at(&[1.0, 7.0]), &z).unwrap(), 5.0);
        assert_eq!(dbar2_direct(&at(&[1.0, 7.0]), &z, 5.0), 576.0);
        assert!(matches!(
            optimal_radius(&at(&[0.0, 0.0]), &z),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn optimal_radius_minimizes_deflection() {
        let c = random_cloud(40, 12);
        let axis = AxisLine::from_point_direction(v(0.1, 0.2, 0.0), v(0.2, 0.3, 1.0)).unwrap();
        let rho = optimal_radius(&c, &axis).unwrap();
        let best = dbar2_direct(&c, &axis, rho);
        for k in 0..50 {
            let other = rho * (0.5 + k as f64 / 50.0);
            assert!(best <= dbar2_direct(&c, &axis, other) + 1e-15);
        }
    }

    #[test]
    fn exact_cylinder_radius_and_deflection() {
        let c = z_cylinder(200, 3);
        let z = AxisLine::from_point_direction(Vec3::ZERO, Vec3::Z).unwrap();
        let rho = optimal_radius(&c, &z).unwrap();
        assert!((rho - 1.0).abs() <= 1e-12);
        assert!(dbar2_direct(&c, &z, 1.0) <= 1e-12);
    }

    #[test]
    fn seeds_are_spread_and_deterministic() {
        let s = sphere_seeds(8);
        assert_eq!(s.len(), 8);
        for (i, a) in s.iter().enumerate() {
            assert!((a.norm() - 1.0).abs() <= 1e-14);
            assert!(a.is_canonical());
            for b in &s[i + 1..] {
                let angle = a.dot(b).clamp(-1.0, 1.0).acos().to_degrees();
                assert!(angle >= 20.0, "angle {angle}");
            }
        }
        assert_eq!(sphere_seeds(2000), sphere_seeds(2000));
    }

    #[test]
    fn refine_keeps_exact_axis() {
        let c = z_cylinder(200, 5);
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        let r = refine_on_sphere(&q, unit(0.0, 0.0, 1.0), &FitConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.direction.get(), Vec3::Z);
    }

    #[test]
    fn refine_from_five_degrees_off() {
        let c = z_cylinder(200, 6);
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        let t = 5f64.to_radians();
        let start = unit(t.sin() * 0.6, t.sin() * 0.8, t.cos());
        let r = refine_on_sphere(&q, start, &FitConfig::default()).unwrap();
        assert!(r.direction.dot(&Vec3::Z).abs() >= 1.0 - 1e-10);
        assert!(r.objective <= q.value(&start));
    }

    #[test]
    fn refine_history_is_monotone() {
        let c = random_cloud(30, 21);
        let q = quartic_tensor(&c, &nonflatness_operator(&c)).unwrap();
        let r = refine_on_sphere(&q, unit(0.2, 0.9, -0.3), &FitConfig::default()).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + objective_floor(&q, w[0]), "{:?}", w);
        }
        assert!(r.converged);
    }

    #[test]
    fn fit_recovers_exact_cylinder() {
        let c = z_cylinder(200, 42);
        let fit = fit_cylinder(&c, &FitConfig::default()).unwrap();
        let spread = c.spread();
        assert!((fit.cylinder.radius() - 1.0).abs() <= 1e-7);
        assert!(fit.cylinder.axis.direction().dot(&Vec3::Z).abs() >= 1.0 - 1e-10);
        assert!(fit.dbar2 <= 1e-14 * spread.powi(4));
        assert!((fit.diagnostics.objective_at_solution - fit.dbar2).abs() <= 1e-9 * spread.powi(4));
    }

    #[test]
    fn fit_refuses_coincident_points() {
        let c = PointCloud::new(vec![v(1.5, -2.0, 0.25); 50]).unwrap();
        assert!(matches!(
            fit_cylinder(&c, &FitConfig::default()),
            Err(Error::Degenerate {
                class: DegeneracyClass::TripleDegenerate,
                ..
            })
        ));
    }

    #[test]
    fn fit_beats_grid_oracle() {
        let c = random_cloud(30, 1234);
        let fit = fit_cylinder(&c, &FitConfig::default()).unwrap();
        let grid = oracle::grid_best_axis(&c, 10_000).unwrap();
        let f_fit = oracle::DirectObjective::new(&c)
            .unwrap()
            .value(&fit.cylinder.axis.direction());
        assert!(f_fit <= grid.best_value + 1e-9 * c.spread().powi(4));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let c = random_cloud(30, 99);
        let par = fit_cylinder(&c, &FitConfig::default()).unwrap();
        let seq = fit_cylinder(
            &c,
            &FitConfig {
                parallel: false,
                ..FitConfig::default()
            },
        )
        .unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn invalid_config_rejected() {
        let c = random_cloud(30, 1);
        let bad = FitConfig {
            grid_count: 4,
            ..FitConfig::default()
        };
        assert!(matches!(
            fit_cylinder(&c, &bad),
            Err(Error::InvalidInput(_))
        ));
    }
}
