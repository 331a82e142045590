//! Symmetric 3×3 matrices and a cyclic Jacobi eigensolver.

use crate::geom::{UnitVec3, Vec3};

/// Off-diagonal Frobenius norm at which the Jacobi sweep stops, relative to
/// the Frobenius norm of the whole matrix.
const JACOBI_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

/// Symmetric 3×3 matrix stored as its six independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl Sym3 {
    pub const ZERO: Sym3 = Sym3 {
        xx: 0.0,
        yy: 0.0,
        zz: 0.0,
        xy: 0.0,
        xz: 0.0,
        yz: 0.0,
    };

    pub fn diag(d: [f64; 3]) -> Self {
        Sym3 {
            xx: d[0],
            yy: d[1],
            zz: d[2],
            ..Sym3::ZERO
        }
    }

    /// `v vᵀ`.
    pub fn outer(v: &Vec3) -> Self {
        Sym3 {
            xx: v.x * v.x,
            yy: v.y * v.y,
            zz: v.z * v.z,
            xy: v.x * v.y,
            xz: v.x * v.z,
            yz: v.y * v.z,
        }
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.to_matrix()[i][j]
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        Vec3::new(
            self.xx * v.x + self.xy * v.y + self.xz * v.z,
            self.xy * v.x + self.yy * v.y + self.yz * v.z,
            self.xz * v.x + self.yz * v.y + self.zz * v.z,
        )
    }

    /// `vᵀ S w`.
    pub fn bilinear(&self, v: &Vec3, w: &Vec3) -> f64 {
        v.dot(&self.mul_vec(w))
    }

    pub fn scale(&self, s: f64) -> Self {
        Sym3 {
            xx: self.xx * s,
            yy: self.yy * s,
            zz: self.zz * s,
            xy: self.xy * s,
            xz: self.xz * s,
            yz: self.yz * s,
        }
    }

    pub fn add(&self, o: &Sym3) -> Self {
        Sym3 {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zz: self.zz + o.zz,
            xy: self.xy + o.xy,
            xz: self.xz + o.xz,
            yz: self.yz + o.yz,
        }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + 2.0 * (self.xy * self.xy + self.xz * self.xz + self.yz * self.yz))
            .sqrt()
    }

    /// Eigenpairs sorted by non-decreasing eigenvalue.
    pub fn eigen(&self) -> SymEigen {
        jacobi_eigen(self)
    }
}

/// Eigen-decomposition of a [`Sym3`], ascending eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: [UnitVec3; 3],
    pub sweeps: usize,
}

/// Cyclic Jacobi rotations until the off-diagonal norm is at most
/// `1e-14 ·‖S‖_F`.
pub fn jacobi_eigen(s: &Sym3) -> SymEigen {
    let mut a = s.to_matrix();
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = s.frobenius_norm();
    let mut sweeps = 0;

    if scale > 0.0 {
        while sweeps < MAX_SWEEPS {
            let off = (2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2])).sqrt();
            if off <= JACOBI_TOL * scale {
                break;
            }
            sweeps += 1;
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - sn * akq;
                    row[q] = sn * akp + c * akq;
                }
                let (rp, rq) = (a[p], a[q]);
                for (k, (apk, aqk)) in rp.into_iter().zip(rq).enumerate() {
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - sn * vkq;
                    row[q] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let column = |k: usize| {
        let e = Vec3::new(v[0][k], v[1][k], v[2][k]);
        UnitVec3::new(e)
            .expect("Jacobi rotations keep columns unit length")
            .canonical()
    };
    SymEigen {
        values: order.map(|k| a[k][k]),
        vectors: order.map(column),
        sweeps,
    }
}
