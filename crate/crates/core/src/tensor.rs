//! Small symmetric matrices and 3-vectors.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};

pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Unit vector along `a`, or `None` for the zero vector.
pub fn normalized(a: &Vec3) -> Option<Vec3> {
    let n = norm(a);
    (n > 0.0).then(|| scale(a, 1.0 / n))
}

/// Angle in radians between the lines spanned by `a` and `b` (in `[0, π/2]`).
pub fn line_angle(a: &Vec3, b: &Vec3) -> f64 {
    let c = (dot(a, b) / (norm(a) * norm(b))).abs().min(1.0);
    c.acos()
}

/// Symmetric 3×3 matrix stored by its six independent components.
///
/// Component order everywhere in the crate is `xx, yy, zz, yz, xz, xy`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymMat3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub yz: f64,
    pub xz: f64,
    pub xy: f64,
}

impl SymMat3 {
    pub const ZERO: SymMat3 = SymMat3::diag(0.0, 0.0, 0.0);
    pub const IDENTITY: SymMat3 = SymMat3::diag(1.0, 1.0, 1.0);

    pub const fn new(xx: f64, yy: f64, zz: f64, yz: f64, xz: f64, xy: f64) -> Self {
        Self {
            xx,
            yy,
            zz,
            yz,
            xz,
            xy,
        }
    }

    pub const fn diag(xx: f64, yy: f64, zz: f64) -> Self {
        Self::new(xx, yy, zz, 0.0, 0.0, 0.0)
    }

    pub fn from_components(c: [f64; 6]) -> Self {
        Self::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    pub fn components(&self) -> [f64; 6] {
        [self.xx, self.yy, self.zz, self.yz, self.xz, self.xy]
    }

    pub fn diagonal(&self) -> Vec3 {
        [self.xx, self.yy, self.zz]
    }

    /// Entry `(i, j)` with zero-based indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            (2, 2) => self.zz,
            (1, 2) => self.yz,
            (0, 2) => self.xz,
            (0, 1) => self.xy,
            _ => panic!("index ({i}, {j}) out of range"),
        }
    }

    /// Symmetric part of a general matrix.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self::new(
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(1, 2)] + m[(2, 1)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            0.5 * (m[(0, 1)] + m[(1, 0)]),
        )
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.xx, self.xy, self.xz, //
            self.xy, self.yy, self.yz, //
            self.xz, self.yz, self.zz,
        )
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn det(&self) -> f64 {
        self.to_matrix().determinant()
    }

    /// Frobenius inner product `A : B`.
    pub fn ddot(&self, other: &Self) -> f64 {
        self.xx * other.xx
            + self.yy * other.yy
            + self.zz * other.zz
            + 2.0 * (self.yz * other.yz + self.xz * other.xz + self.xy * other.xy)
    }

    pub fn norm_sq(&self) -> f64 {
        self.ddot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_diagonal(&self) -> bool {
        self.yz == 0.0 && self.xz == 0.0 && self.xy == 0.0
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        [
            self.xx * v[0] + self.xy * v[1] + self.xz * v[2],
            self.xy * v[0] + self.yy * v[1] + self.yz * v[2],
            self.xz * v[0] + self.yz * v[1] + self.zz * v[2],
        ]
    }

    /// Eigenvalues in ascending order with matching unit eigenvectors.
    pub fn eigen_sorted(&self) -> ([f64; 3], [Vec3; 3]) {
        let eig = SymmetricEigen::new(self.to_matrix());
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.map(|i| eig.eigenvalues[i]);
        let vecs = order.map(|i| {
            let c = eig.eigenvectors.column(i);
            [c[0], c[1], c[2]]
        });
        (vals, vecs)
    }

    pub fn eigenvalues_sorted(&self) -> [f64; 3] {
        self.eigen_sorted().0
    }
}

impl Add for SymMat3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.xx + o.xx,
            self.yy + o.yy,
            self.zz + o.zz,
            self.yz + o.yz,
            self.xz + o.xz,
            self.xy + o.xy,
        )
    }
}

impl AddAssign for SymMat3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for SymMat3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.xx - o.xx,
            self.yy - o.yy,
            self.zz - o.zz,
            self.yz - o.yz,
            self.xz - o.xz,
            self.xy - o.xy,
        )
    }
}

impl Neg for SymMat3 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul<f64> for SymMat3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(
            self.xx * s,
            self.yy * s,
            self.zz * s,
            self.yz * s,
            self.xz * s,
            self.xy * s,
        )
    }
}

impl Mul<SymMat3> for f64 {
    type Output = SymMat3;
    fn mul(self, m: SymMat3) -> SymMat3 {
        m * self
    }
}

/// Symmetric 2×2 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymMat2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl SymMat2 {
    pub const fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Self { xx, yy, xy }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn norm(&self) -> f64 {
        (self.xx * self.xx + self.yy * self.yy + 2.0 * self.xy * self.xy).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.yy.abs()).max(self.xy.abs())
    }

    pub fn to_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.xx, self.xy, self.xy, self.yy)
    }

    /// Embeds into the upper-left block of a 3×3 matrix.
    pub fn embed(&self) -> SymMat3 {
        SymMat3::new(self.xx, self.yy, 0.0, 0.0, 0.0, self.xy)
    }

    /// Eigenvalues in ascending order with matching unit eigenvectors.
    pub fn eigen_sorted(&self) -> ([f64; 2], [[f64; 2]; 2]) {
        let eig = SymmetricEigen::new(self.to_matrix());
        let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
            (0, 1)
        } else {
            (1, 0)
        };
        let col = |i: usize| {
            let c = eig.eigenvectors.column(i);
            [c[0], c[1]]
        };
        ([eig.eigenvalues[lo], eig.eigenvalues[hi]], [col(lo), col(hi)])
    }
}

impl Add for SymMat2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.xx + o.xx, self.yy + o.yy, self.xy + o.xy)
    }
}

impl Sub for SymMat2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.xx - o.xx, self.yy - o.yy, self.xy - o.xy)
    }
}

impl Mul<f64> for SymMat2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.xx * s, self.yy * s, self.xy * s)
    }
}
