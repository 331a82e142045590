//! Moments of a point cloud: center of mass, the non-flatness form `Q` with
//! its eigensystem, the direction-dependent quantities `L(a)` and `M(a)`,
//! and the quartic tensor `D` whose contraction with `a⊗a⊗a⊗a` is the
//! reduced deflection `F(a)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eigen::Sym3;
use crate::error::{Error, Result};
use crate::geom::{PointCloud, UnitVec3, Vec3};
use crate::sum::Accumulator;

/// Default relative rank threshold for eigenvalues of `Q`.
pub const DEFAULT_RANK_EPS: f64 = 1e-9;

/// Absolute floor for "zero" eigenvalues, as a fraction of the squared
/// distance of the farthest point from the origin. Deviations below this are
/// indistinguishable from rounding of the centered coordinates.
const ABS_FLOOR_REL: f64 = 1e-24;

// ── Center of mass and Q ───────────────────────────────────────────────────

/// Arithmetic mean of the points.
pub fn center_of_mass(cloud: &PointCloud) -> Vec3 {
    let mut acc = Accumulator::<3>::for_count(cloud.len());
    for p in cloud {
        acc.add(&p.to_array());
    }
    Vec3::from(acc.mean(cloud.len()))
}

/// The non-flatness form `Q(c, c) = (1/n) Σ (r_i − r_cm, c)²` with its
/// eigenpairs sorted by non-decreasing eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonFlatnessForm {
    q: Sym3,
    values: [f64; 3],
    vectors: [UnitVec3; 3],
    center: Vec3,
    extent: f64,
}

impl NonFlatnessForm {
    /// Wraps a precomputed symmetric matrix, diagonalizing it.
    pub fn from_matrix(q: Sym3, center: Vec3, extent: f64) -> Self {
        let eig = q.eigen();
        Self {
            q,
            values: eig.values,
            vectors: eig.vectors,
            center,
            extent,
        }
    }

    pub fn matrix(&self) -> &Sym3 {
        &self.q
    }

    /// `λ1 ≤ λ2 ≤ λ3`.
    pub fn eigenvalues(&self) -> [f64; 3] {
        self.values
    }

    pub fn eigenvectors(&self) -> [UnitVec3; 3] {
        self.vectors
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    /// Largest distance of a point from the origin.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// `Q(c, c)`.
    pub fn quadratic(&self, c: &Vec3) -> f64 {
        self.q.bilinear(c, c)
    }

    /// Largest eigenvalue threshold below which `λ_k` counts as zero.
    pub fn zero_threshold(&self, rank_eps: f64) -> f64 {
        (rank_eps * self.values[2]).max(ABS_FLOOR_REL * self.extent * self.extent)
    }
}

pub fn nonflatness_operator(cloud: &PointCloud) -> NonFlatnessForm {
    let center = center_of_mass(cloud);
    let mut acc = Accumulator::<6>::for_count(cloud.len());
    for p in cloud {
        let d = *p - center;
        acc.add(&[
            d.x * d.x,
            d.y * d.y,
            d.z * d.z,
            d.x * d.y,
            d.x * d.z,
            d.y * d.z,
        ]);
    }
    let m = acc.mean(cloud.len());
    let q = Sym3 {
        xx: m[0],
        yy: m[1],
        zz: m[2],
        xy: m[3],
        xz: m[4],
        yz: m[5],
    };
    NonFlatnessForm::from_matrix(q, center, cloud.extent())
}

// ── Degeneracy ─────────────────────────────────────────────────────────────

/// How many eigenvalues of `Q` vanish: the cloud is in general position,
/// coplanar, collinear, or a single point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyClass {
    #[serde(rename = "none")]
    NonDegenerate,
    #[serde(rename = "simple")]
    SimpleDegenerate,
    #[serde(rename = "double")]
    DoubleDegenerate,
    #[serde(rename = "triple")]
    TripleDegenerate,
}

impl DegeneracyClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            DegeneracyClass::NonDegenerate => "none",
            DegeneracyClass::SimpleDegenerate => "simple",
            DegeneracyClass::DoubleDegenerate => "double",
            DegeneracyClass::TripleDegenerate => "triple",
        }
    }

    fn from_zero_count(zeros: usize) -> Self {
        match zeros {
            0 => DegeneracyClass::NonDegenerate,
            1 => DegeneracyClass::SimpleDegenerate,
            2 => DegeneracyClass::DoubleDegenerate,
            _ => DegeneracyClass::TripleDegenerate,
        }
    }
}

impl fmt::Display for DegeneracyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Counts eigenvalues at or below `max(rank_eps·λ3, floor)`, where the floor
/// is `1e-24·extent²`.
pub fn classify_degeneracy(form: &NonFlatnessForm, rank_eps: f64) -> DegeneracyClass {
    let threshold = form.zero_threshold(rank_eps);
    let zeros = form.values.iter().filter(|&&l| l <= threshold).count();
    DegeneracyClass::from_zero_count(zeros)
}

// ── L and M ────────────────────────────────────────────────────────────────

/// `L(a) = (1/n) Σ (r_i − r_cm) |[r_i, a]|²`.
///
/// Evaluated for any `a`, not just unit vectors; it is homogeneous of degree
/// two in `a`.
pub fn l_vector(cloud: &PointCloud, a: Vec3) -> Vec3 {
    let center = center_of_mass(cloud);
    let mut acc = Accumulator::<3>::for_count(cloud.len());
    for p in cloud {
        let y = p.cross(&a).norm_squared();
        acc.add(&((*p - center) * y).to_array());
    }
    Vec3::from(acc.mean(cloud.len()))
}

/// `M(a) = (1/n) Σ |[r_i, a]|⁴ − ((1/n) Σ |[r_i, a]|²)²`, computed as the
/// variance of `|[r_i, a]|²`. Homogeneous of degree four in `a`.
pub fn m_scalar(cloud: &PointCloud, a: Vec3) -> f64 {
    let n = cloud.len();
    let mut acc = Accumulator::<1>::for_count(n);
    for p in cloud {
        acc.add(&[p.cross(&a).norm_squared()]);
    }
    let mean = acc.mean(n)[0];
    let mut var = Accumulator::<1>::for_count(n);
    for p in cloud {
        let d = p.cross(&a).norm_squared() - mean;
        var.add(&[d * d]);
    }
    var.mean(n)[0]
}

// ── Quartic polynomials ────────────────────────────────────────────────────

/// Exponents of the 15 quartic monomials in `(a¹, a², a³)`, ordered as
/// D1111, D2222, D3333, D1112, D1113, D1222, D2223, D1333, D2333,
/// D1122, D1133, D2233, D1123, D1223, D1233.
pub const QUARTIC_EXPONENTS: [[u8; 3]; 15] = [
    [4, 0, 0],
    [0, 4, 0],
    [0, 0, 4],
    [3, 1, 0],
    [3, 0, 1],
    [1, 3, 0],
    [0, 3, 1],
    [1, 0, 3],
    [0, 1, 3],
    [2, 2, 0],
    [2, 0, 2],
    [0, 2, 2],
    [2, 1, 1],
    [1, 2, 1],
    [1, 1, 2],
];

/// Number of index orderings `ijkq` that share each independent component.
pub const MULTIPLICITY: [f64; 15] = [
    1.0, 1.0, 1.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0, 6.0, 6.0, 6.0, 12.0, 12.0, 12.0,
];

/// Quadratic monomials `α1², α2², α3², α1α2, α1α3, α2α3`.
const QUADRATIC_EXPONENTS: [[u8; 3]; 6] = [
    [2, 0, 0],
    [0, 2, 0],
    [0, 0, 2],
    [1, 1, 0],
    [1, 0, 1],
    [0, 1, 1],
];

fn quartic_slot(e: [u8; 3]) -> usize {
    QUARTIC_EXPONENTS
        .iter()
        .position(|q| *q == e)
        .expect("exponent sum is four")
}

/// For each pair of quadratic monomials, the slot of their product.
fn product_table() -> [[usize; 6]; 6] {
    let mut t = [[0; 6]; 6];
    for (i, ei) in QUADRATIC_EXPONENTS.iter().enumerate() {
        for (j, ej) in QUADRATIC_EXPONENTS.iter().enumerate() {
            t[i][j] = quartic_slot([ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2]]);
        }
    }
    t
}

/// Coefficients of `αᵀ S α` in the quadratic monomial basis.
fn quadratic_coeffs(s: &Sym3) -> [f64; 6] {
    [s.xx, s.yy, s.zz, 2.0 * s.xy, 2.0 * s.xz, 2.0 * s.yz]
}

/// Adds `w · p²` to the quartic coefficient vector.
fn add_square(out: &mut [f64; 15], p: &[f64; 6], w: f64, table: &[[usize; 6]; 6]) {
    for i in 0..6 {
        let wi = w * p[i];
        for j in 0..6 {
            out[table[i][j]] += wi * p[j];
        }
    }
}

/// `∂^d α^e`, the mixed partial of a monomial at `alpha`.
fn monomial_derivative(e: [u8; 3], d: [u8; 3], alpha: &[f64; 3]) -> f64 {
    let mut v = 1.0;
    for k in 0..3 {
        if d[k] > e[k] {
            return 0.0;
        }
        for m in 0..d[k] {
            v *= f64::from(e[k] - m);
        }
        v *= alpha[k].powi(i32::from(e[k] - d[k]));
    }
    v
}

// ── QuarticObjective ───────────────────────────────────────────────────────

/// A fully symmetric rank-4 tensor over three indices, stored as its 15
/// independent components and tagged with the orthonormal basis in which
/// they are expressed.
///
/// For a world-frame vector `a`, `F(a) = Σ D_ijkq αⁱ αʲ αᵏ α^q` with
/// `αᵏ = (e_k, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticObjective {
    components: [f64; 15],
    basis: [UnitVec3; 3],
    form: Option<NonFlatnessForm>,
}

impl QuarticObjective {
    /// Wraps raw components `D_ijkq` (in [`QUARTIC_EXPONENTS`] order).
    pub fn from_components(components: [f64; 15], basis: [UnitVec3; 3]) -> Self {
        Self {
            components,
            basis,
            form: None,
        }
    }

    /// The independent components `D_1111 … D_1233`.
    pub fn components(&self) -> &[f64; 15] {
        &self.components
    }

    pub fn basis(&self) -> &[UnitVec3; 3] {
        &self.basis
    }

    /// The non-flatness form this tensor was built from, if any.
    pub fn form(&self) -> Option<&NonFlatnessForm> {
        self.form.as_ref()
    }

    /// `D_ijkq` for indices in `0..3`.
    pub fn component(&self, i: usize, j: usize, k: usize, q: usize) -> f64 {
        let mut e = [0u8; 3];
        for idx in [i, j, k, q] {
            e[idx] += 1;
        }
        self.components[quartic_slot(e)]
    }

    /// Largest `|D_ijkq|`; the natural length⁴ scale of the objective.
    pub fn scale(&self) -> f64 {
        self.components.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Components of `a` in the tensor's basis.
    pub fn to_basis(&self, a: &Vec3) -> [f64; 3] {
        self.basis.map(|e| e.dot(a))
    }

    fn basis_to_world(&self, g: [f64; 3]) -> Vec3 {
        self.basis[0].get() * g[0] + self.basis[1].get() * g[1] + self.basis[2].get() * g[2]
    }

    /// Full contraction `Σ D_ijkq aⁱ aʲ aᵏ a^q`.
    pub fn value(&self, a: &Vec3) -> f64 {
        let alpha = self.to_basis(a);
        self.components
            .iter()
            .zip(QUARTIC_EXPONENTS.iter())
            .zip(MULTIPLICITY.iter())
            .map(|((d, e), m)| d * m * monomial_derivative(*e, [0, 0, 0], &alpha))
            .sum()
    }

    /// Euclidean gradient `4 Σ D_ijkq aʲ aᵏ a^q`, in the world frame.
    pub fn gradient(&self, a: &Vec3) -> Vec3 {
        let alpha = self.to_basis(a);
        let mut g = [0.0; 3];
        for (k, gk) in g.iter_mut().enumerate() {
            let mut d = [0u8; 3];
            d[k] = 1;
            *gk = self
                .components
                .iter()
                .zip(QUARTIC_EXPONENTS.iter())
                .zip(MULTIPLICITY.iter())
                .map(|((c, e), m)| c * m * monomial_derivative(*e, d, &alpha))
                .sum();
        }
        self.basis_to_world(g)
    }

    /// Euclidean Hessian `12 Σ D_ijkq aᵏ a^q`, in the world frame.
    pub fn hessian(&self, a: &Vec3) -> Sym3 {
        let alpha = self.to_basis(a);
        let mut h = [[0.0; 3]; 3];
        for r in 0..3 {
            for s in r..3 {
                let mut d = [0u8; 3];
                d[r] += 1;
                d[s] += 1;
                let v: f64 = self
                    .components
                    .iter()
                    .zip(QUARTIC_EXPONENTS.iter())
                    .zip(MULTIPLICITY.iter())
                    .map(|((c, e), m)| c * m * monomial_derivative(*e, d, &alpha))
                    .sum();
                h[r][s] = v;
                h[s][r] = v;
            }
        }
        // E H Eᵀ
        let e = self.basis.map(|u| u.get());
        let mut w = [[0.0; 3]; 3];
        for (i, row) in w.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for r in 0..3 {
                    for s in 0..3 {
                        acc += e[r][i] * h[r][s] * e[s][j];
                    }
                }
                *cell = acc;
            }
        }
        Sym3 {
            xx: w[0][0],
            yy: w[1][1],
            zz: w[2][2],
            xy: w[0][1],
            xz: w[0][2],
            yz: w[1][2],
        }
    }
}

/// Builds `D` for a non-degenerate cloud using [`DEFAULT_RANK_EPS`].
pub fn quartic_tensor(cloud: &PointCloud, form: &NonFlatnessForm) -> Result<QuarticObjective> {
    quartic_tensor_with_rank_eps(cloud, form, DEFAULT_RANK_EPS)
}

/// Builds the tensor of `F(a) = M(a) − Σ_k (e_k, L(a))² / λ_k` in the
/// eigenbasis of `Q`.
///
/// With `S_i = |r_i|² I − r_i r_iᵀ` we have `|[r_i, a]|² = aᵀ S_i a`, so
/// `M` is the mean of `(aᵀ T_i a)²` with `T_i = S_i − S̄`, and
/// `(e_k, L) = aᵀ W_k a` with `W_k = (1/n) Σ (r_i − r_cm, e_k) T_i`.
/// Coordinates are taken relative to the center of mass; `F` does not
/// depend on the origin.
pub fn quartic_tensor_with_rank_eps(
    cloud: &PointCloud,
    form: &NonFlatnessForm,
    rank_eps: f64,
) -> Result<QuarticObjective> {
    let class = classify_degeneracy(form, rank_eps);
    if class != DegeneracyClass::NonDegenerate {
        return Err(Error::degenerate(
            class,
            "the non-flatness form is singular, so the quartic objective is undefined",
        ));
    }

    let n = cloud.len();
    let basis = form.vectors;
    let center = form.center;
    let local = |p: &Vec3| -> Vec3 {
        let d = *p - center;
        Vec3::new(basis[0].dot(&d), basis[1].dot(&d), basis[2].dot(&d))
    };
    let s_coeffs = |x: &Vec3| -> [f64; 6] {
        let r2 = x.norm_squared();
        quadratic_coeffs(&Sym3 {
            xx: r2 - x.x * x.x,
            yy: r2 - x.y * x.y,
            zz: r2 - x.z * x.z,
            xy: -x.x * x.y,
            xz: -x.x * x.z,
            yz: -x.y * x.z,
        })
    };

    let mut s_acc = Accumulator::<6>::for_count(n);
    for p in cloud {
        s_acc.add(&s_coeffs(&local(p)));
    }
    let s_mean = s_acc.mean(n);

    let table = product_table();
    let mut m_acc = Accumulator::<15>::for_count(n);
    let mut w_acc = Accumulator::<18>::for_count(n);
    for p in cloud {
        let x = local(p);
        let s = s_coeffs(&x);
        let t: [f64; 6] = std::array::from_fn(|k| s[k] - s_mean[k]);
        let mut sq = [0.0; 15];
        add_square(&mut sq, &t, 1.0, &table);
        m_acc.add(&sq);
        let xs = x.to_array();
        let w: [f64; 18] = std::array::from_fn(|k| xs[k / 6] * t[k % 6]);
        w_acc.add(&w);
    }

    let mut coeffs = m_acc.mean(n);
    let w = w_acc.mean(n);
    for k in 0..3 {
        let wk: [f64; 6] = std::array::from_fn(|j| w[6 * k + j]);
        add_square(&mut coeffs, &wk, -1.0 / form.values[k], &table);
    }

    let components: [f64; 15] = std::array::from_fn(|k| coeffs[k] / MULTIPLICITY[k]);
    Ok(QuarticObjective {
        components,
        basis,
        form: Some(*form),
    })
}
