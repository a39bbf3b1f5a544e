//! D2Q9 stencil and the fixed moment basis.

use nalgebra::SMatrix;

use crate::error::{Error, Result};

pub type Matrix9 = SMatrix<f64, 9, 9>;
pub type Vector9 = nalgebra::SVector<f64, 9>;

/// Number of discrete velocities.
pub const Q: usize = 9;

/// D2Q9 velocity set in units of the lattice speed.
pub struct Stencil;

impl Stencil {
    pub const VELOCITIES: [[i32; 2]; Q] = [
        [0, 0],
        [1, 0],
        [0, 1],
        [-1, 0],
        [0, -1],
        [1, 1],
        [-1, 1],
        [-1, -1],
        [1, -1],
    ];

    pub const OPPOSITE: [usize; Q] = [0, 3, 4, 1, 2, 7, 8, 5, 6];

    #[inline]
    pub fn velocity(j: usize) -> [i32; 2] {
        Self::VELOCITIES[j]
    }

    #[inline]
    pub fn opposite(j: usize) -> usize {
        Self::OPPOSITE[j]
    }

    /// Index permutation induced by the reflection x -> -x.
    pub const X_REFLECTION: [usize; Q] = [0, 3, 2, 1, 4, 6, 5, 8, 7];

    /// Index permutation induced by the reflection y -> -y.
    pub const Y_REFLECTION: [usize; Q] = [0, 1, 4, 3, 2, 8, 7, 6, 5];
}

/// Power of lambda carried by each moment row.
pub const ROW_LAMBDA_POWER: [i32; Q] = [0, 1, 1, 2, 2, 2, 3, 3, 4];

/// Named positions inside a moment vector.
pub mod moment {
    pub const RHO: usize = 0;
    pub const JX: usize = 1;
    pub const JY: usize = 2;
    pub const EPSILON: usize = 3;
    pub const PHI_X: usize = 4;
    pub const PHI_Y: usize = 5;
    pub const QX: usize = 6;
    pub const QY: usize = 7;
    pub const D: usize = 8;

    pub const NAMES: [&str; 9] = ["rho", "jx", "jy", "epsilon", "phi_x", "phi_y", "qx", "qy", "d"];
}

/// Moments ordered (rho, jx, jy, epsilon, phi_x, phi_y, qx, qy, d).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentVector(pub [f64; Q]);

impl MomentVector {
    pub fn rho(&self) -> f64 {
        self.0[moment::RHO]
    }
    pub fn jx(&self) -> f64 {
        self.0[moment::JX]
    }
    pub fn jy(&self) -> f64 {
        self.0[moment::JY]
    }
    pub fn to_vector(&self) -> Vector9 {
        Vector9::from_column_slice(&self.0)
    }
    pub fn from_vector(v: &Vector9) -> Self {
        let mut a = [0.0; Q];
        a.copy_from_slice(v.as_slice());
        Self(a)
    }
}

/// The moment matrix M for a given lattice speed, with its explicit inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentBasis {
    lambda: f64,
    m: [[f64; Q]; Q],
    m_inv: [[f64; Q]; Q],
    /// `lambda^p_k` per row.
    row_scale: [f64; Q],
    /// `1 / (|row_k|^2 lambda^p_k)`: the rows of the unit matrix are orthogonal.
    inv_scale: [f64; Q],
}

/// Squared norms of the rows of the unit moment matrix.
const ROW_NORM_SQ: [f64; Q] = [9.0, 6.0, 6.0, 36.0, 4.0, 4.0, 12.0, 12.0, 36.0];

/// Unscaled integer rows of M (lambda = 1).
const M_UNIT: [[i32; Q]; Q] = [
    [1, 1, 1, 1, 1, 1, 1, 1, 1],
    [0, 1, 0, -1, 0, 1, -1, -1, 1],
    [0, 0, 1, 0, -1, 1, 1, -1, -1],
    [-4, -1, -1, -1, -1, 2, 2, 2, 2],
    [0, 1, -1, 1, -1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, -1, 1, -1],
    [0, -2, 0, 2, 0, 1, -1, -1, 1],
    [0, 0, -2, 0, 2, 1, 1, -1, -1],
    [4, -2, -2, -2, -2, 1, 1, 1, 1],
];

impl MomentBasis {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
        }
        let mut m = [[0.0; Q]; Q];
        for (k, row) in m.iter_mut().enumerate() {
            let scale = lambda.powi(ROW_LAMBDA_POWER[k]);
            for (j, e) in row.iter_mut().enumerate() {
                *e = M_UNIT[k][j] as f64 * scale;
            }
        }
        let inv = Matrix9::from_fn(|i, j| m[i][j])
            .try_inverse()
            .ok_or_else(|| Error::param("lambda", "moment matrix is not invertible"))?;
        let mut m_inv = [[0.0; Q]; Q];
        for (i, row) in m_inv.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = inv[(i, j)];
            }
        }
        let row_scale: [f64; Q] = std::array::from_fn(|k| lambda.powi(ROW_LAMBDA_POWER[k]));
        let inv_scale = std::array::from_fn(|k| 1.0 / (ROW_NORM_SQ[k] * row_scale[k]));
        Ok(Self {
            lambda,
            m,
            m_inv,
            row_scale,
            inv_scale,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn m(&self) -> &[[f64; Q]; Q] {
        &self.m
    }

    pub fn m_inv(&self) -> &[[f64; Q]; Q] {
        &self.m_inv
    }

    pub fn matrix(&self) -> Matrix9 {
        Matrix9::from_fn(|i, j| self.m[i][j])
    }

    pub fn inverse_matrix(&self) -> Matrix9 {
        Matrix9::from_fn(|i, j| self.m_inv[i][j])
    }

    /// `M f`, written out using the sparsity of the integer rows.
    #[inline]
    pub fn to_moments(&self, f: &[f64; Q]) -> MomentVector {
        let s = &self.row_scale;
        let axis = f[1] + f[2] + f[3] + f[4];
        let diag = f[5] + f[6] + f[7] + f[8];
        let dx = f[5] - f[6] - f[7] + f[8];
        let dy = f[5] + f[6] - f[7] - f[8];
        MomentVector([
            f[0] + axis + diag,
            s[1] * (f[1] - f[3] + dx),
            s[2] * (f[2] - f[4] + dy),
            s[3] * (-4.0 * f[0] - axis + 2.0 * diag),
            s[4] * (f[1] - f[2] + f[3] - f[4]),
            s[5] * (f[5] - f[6] + f[7] - f[8]),
            s[6] * (2.0 * (f[3] - f[1]) + dx),
            s[7] * (2.0 * (f[4] - f[2]) + dy),
            s[8] * (4.0 * f[0] - 2.0 * axis + diag),
        ])
    }

    /// `M^-1 m`, using `M^-1 = M_unit^T diag(1 / (|row|^2 lambda^p))`.
    #[inline]
    pub fn from_moments(&self, m: &MomentVector) -> [f64; Q] {
        let a: [f64; Q] = std::array::from_fn(|k| m.0[k] * self.inv_scale[k]);
        let axis = a[0] - a[3] - 2.0 * a[8];
        let diag = a[0] + 2.0 * a[3] + a[8];
        [
            a[0] - 4.0 * a[3] + 4.0 * a[8],
            axis + a[1] + a[4] - 2.0 * a[6],
            axis + a[2] - a[4] - 2.0 * a[7],
            axis - a[1] + a[4] + 2.0 * a[6],
            axis - a[2] - a[4] + 2.0 * a[7],
            diag + a[1] + a[2] + a[5] + a[6] + a[7],
            diag - a[1] + a[2] - a[5] - a[6] + a[7],
            diag - a[1] - a[2] + a[5] - a[6] - a[7],
            diag + a[1] - a[2] - a[5] + a[6] - a[7],
        ]
    }
}

/// Convenience constructor mirroring [`MomentBasis::new`].
pub fn build_moment_basis(lambda: f64) -> Result<MomentBasis> {
    MomentBasis::new(lambda)
}

#[inline]
pub(crate) fn mat_vec(a: &[[f64; Q]; Q], x: &[f64; Q]) -> [f64; Q] {
    let mut y = [0.0; Q];
    for (yi, row) in y.iter_mut().zip(a) {
        *yi = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
    y
}
