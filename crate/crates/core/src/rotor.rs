//! Orientation of a rigid rotor and the SO(3) utilities the rest of the crate builds on.
//!
//! Orientations are parametrized by Euler angles in the z-y'-z'' convention: a rotation by
//! `alpha` about the space-fixed z axis, then by `beta` about the nodal line, then by
//! `gamma` about the body axis `n3`. In fixed-axis form the matrix is
//! `Rz(alpha) * Ry(beta) * Rz(gamma)`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use thiserror::Error;

/// Tolerance on orthogonality and unit norms used to validate inputs.
pub const ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotorError {
    #[error("matrix is not close to a proper rotation (det = {det})")]
    ImproperRotation { det: f64 },
    #[error("vector cannot be normalized (norm = {norm})")]
    ZeroVector { norm: f64 },
    #[error("axes are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("moment of inertia must be positive, got {0}")]
    NonPositiveMoment(f64),
}

/// Euler angles in the z-y'-z'' convention. `alpha` and `gamma` live in `[0, 2π)`,
/// `beta` in `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

fn wrap_tau(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if y >= TAU {
        0.0
    } else {
        y
    }
}

impl EulerAngles {
    /// Builds a normalized triple. `alpha`, `gamma` are reduced mod 2π; a `beta`
    /// outside `[0, π]` is folded back with the equivalent `(alpha + π, -beta, gamma + π)`
    /// so that the represented rotation is unchanged.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        let mut a = alpha;
        let mut g = gamma;
        let mut b = beta.rem_euclid(TAU);
        if b > PI {
            b = TAU - b;
            a += PI;
            g += PI;
        }
        Self {
            alpha: wrap_tau(a),
            beta: b,
            gamma: wrap_tau(g),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn to_rotation(&self) -> RotationMatrix {
        rotation_from_euler(*self)
    }
}

/// A proper rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix without any check. The caller guarantees it is in SO(3).
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Wraps a matrix after checking orthogonality and `det = +1` within [`ORTHO_TOL`].
    pub fn try_from_matrix(m: Matrix3<f64>) -> Result<Self, RotorError> {
        let det = m.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(RotorError::ImproperRotation { det });
        }
        let deviation = orthogonality_defect(&m);
        if deviation > ORTHO_TOL {
            return Err(RotorError::NotOrthonormal { deviation });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &RotationMatrix) -> Self {
        Self(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Similarity transform `R T Rᵀ` of a body-frame tensor.
    pub fn rotate_tensor(&self, t: &Matrix3<f64>) -> Matrix3<f64> {
        self.0 * t * self.0.transpose()
    }

    /// Euler angles of this rotation. In the gimbal-degenerate cases `beta = 0` and
    /// `beta = π` the whole in-plane angle is assigned to `alpha` and `gamma = 0`.
    pub fn to_euler(&self) -> EulerAngles {
        let r = &self.0;
        let sb = (r[(0, 2)].powi(2) + r[(1, 2)].powi(2)).sqrt();
        let beta = sb.atan2(r[(2, 2)]);
        if sb < 1e-12 {
            if r[(2, 2)] > 0.0 {
                EulerAngles::new(r[(1, 0)].atan2(r[(0, 0)]), 0.0, 0.0)
            } else {
                EulerAngles::new((-r[(1, 0)]).atan2(r[(1, 1)]), PI, 0.0)
            }
        } else {
            let alpha = r[(1, 2)].atan2(r[(0, 2)]);
            let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
            EulerAngles::new(alpha, beta, gamma)
        }
    }
}

impl From<EulerAngles> for RotationMatrix {
    fn from(angles: EulerAngles) -> Self {
        rotation_from_euler(angles)
    }
}

impl From<&EulerAngles> for RotationMatrix {
    fn from(angles: &EulerAngles) -> Self {
        rotation_from_euler(*angles)
    }
}

impl From<&RotationMatrix> for RotationMatrix {
    fn from(r: &RotationMatrix) -> Self {
        *r
    }
}

/// Largest entry of `MᵀM - 1`.
pub fn orthogonality_defect(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).amax()
}

/// A vector of unit Euclidean length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector(Vector3<f64>);

impl UnitVector {
    /// Normalizes `v`; fails for (numerically) zero vectors.
    pub fn new(v: Vector3<f64>) -> Result<Self, RotorError> {
        let norm = v.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(RotorError::ZeroVector { norm });
        }
        Ok(Self(v / norm))
    }

    pub fn new_unchecked(v: Vector3<f64>) -> Self {
        Self(v)
    }

    pub fn x() -> Self {
        Self(Vector3::x())
    }

    pub fn y() -> Self {
        Self(Vector3::y())
    }

    pub fn z() -> Self {
        Self(Vector3::z())
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Vector3<f64> {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn rotated(&self, r: &RotationMatrix) -> UnitVector {
        UnitVector(r.apply(&self.0))
    }
}

fn rot_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// `R(alpha, beta, gamma) = Rz(alpha) Ry(beta) Rz(gamma)`.
pub fn rotation_from_euler(angles: EulerAngles) -> RotationMatrix {
    RotationMatrix(rot_z(angles.alpha) * rot_y(angles.beta) * rot_z(angles.gamma))
}

/// The nodal line `e_ν(α) = −e_x sin α + e_y cos α`.
pub fn nodal_line(alpha: f64) -> UnitVector {
    let (s, c) = alpha.sin_cos();
    UnitVector(Vector3::new(-s, c, 0.0))
}

/// Body axes `n_i = R e_i`, i.e. the columns of the rotation matrix.
pub fn body_axes(angles: EulerAngles) -> (UnitVector, UnitVector, UnitVector) {
    let r = rotation_from_euler(angles);
    let m = r.matrix();
    (
        UnitVector(m.column(0).into_owned()),
        UnitVector(m.column(1).into_owned()),
        UnitVector(m.column(2).into_owned()),
    )
}

/// Rotation by `angle` about `axis` (Rodrigues formula).
pub fn axis_angle_rotation(axis: &UnitVector, angle: f64) -> RotationMatrix {
    let k = skew(axis.as_vector());
    let (s, c) = angle.sin_cos();
    RotationMatrix(Matrix3::identity() + k * s + k * k * (1.0 - c))
}

/// Exponential map of the rotation vector `w` (axis `w/|w|`, angle `|w|`).
pub fn exp_so3(w: &Vector3<f64>) -> RotationMatrix {
    let theta = w.norm();
    let k = skew(w);
    // a = sin θ / θ, b = (1 − cos θ)/θ², both with Taylor fallbacks near θ = 0
    let (a, b) = if theta < 1e-4 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    RotationMatrix(Matrix3::identity() + k * a + k * k * b)
}

/// Cross-product matrix: `skew(w) v = w × v`.
pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Haar-uniform orientation: `alpha`, `gamma` uniform on `[0, 2π)`, `cos beta` uniform on `[-1, 1]`.
pub fn sample_uniform_orientation<R: Rng + ?Sized>(rng: &mut R) -> EulerAngles {
    let alpha = rng.random::<f64>() * TAU;
    let cos_beta = 2.0 * rng.random::<f64>() - 1.0;
    let gamma = rng.random::<f64>() * TAU;
    EulerAngles::new(alpha, cos_beta.clamp(-1.0, 1.0).acos(), gamma)
}

/// Nearest rotation matrix in Frobenius norm, `M (MᵀM)^{-1/2}` (polar decomposition).
pub fn reorthonormalize(m: &Matrix3<f64>) -> Result<RotationMatrix, RotorError> {
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(RotorError::ImproperRotation { det });
    }
    let eig = SymmetricEigen::new(m.transpose() * m);
    let mut inv_sqrt = Matrix3::zeros();
    for i in 0..3 {
        let lambda = eig.eigenvalues[i];
        if !(lambda > 0.0) {
            return Err(RotorError::ImproperRotation { det });
        }
        let v = eig.eigenvectors.column(i);
        inv_sqrt += v * v.transpose() / lambda.sqrt();
    }
    let q = m * inv_sqrt;
    let det_q = q.determinant();
    if !(det_q > 0.0) {
        return Err(RotorError::ImproperRotation { det: det_q });
    }
    Ok(RotationMatrix(q))
}

/// Checks that three vectors form an orthonormal triad.
pub fn check_orthonormal(axes: &[UnitVector; 3]) -> Result<(), RotorError> {
    let m = Matrix3::from_columns(&[axes[0].0, axes[1].0, axes[2].0]);
    let deviation = orthogonality_defect(&m);
    if deviation > 1e-10 {
        return Err(RotorError::NotOrthonormal { deviation });
    }
    Ok(())
}

/// Principal moments of inertia and the body-frame principal axes.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaTensor {
    moments: [f64; 3],
    axes: [UnitVector; 3],
}

impl InertiaTensor {
    /// Principal axes along the body-frame coordinate axes.
    pub fn principal(moments: [f64; 3]) -> Result<Self, RotorError> {
        Self::with_axes(moments, [UnitVector::x(), UnitVector::y(), UnitVector::z()])
    }

    pub fn with_axes(moments: [f64; 3], axes: [UnitVector; 3]) -> Result<Self, RotorError> {
        for &m in &moments {
            if !(m > 0.0) || !m.is_finite() {
                return Err(RotorError::NonPositiveMoment(m));
            }
        }
        check_orthonormal(&axes)?;
        Ok(Self { moments, axes })
    }

    pub fn isotropic(moment: f64) -> Result<Self, RotorError> {
        Self::principal([moment; 3])
    }

    pub fn moments(&self) -> [f64; 3] {
        self.moments
    }

    pub fn axes(&self) -> &[UnitVector; 3] {
        &self.axes
    }

    /// Body-frame tensor `Σ I_i n_i ⊗ n_i`.
    pub fn body_tensor(&self) -> Matrix3<f64> {
        self.weighted(|i| i)
    }

    /// Body-frame inverse `Σ I_i⁻¹ n_i ⊗ n_i`.
    pub fn body_inverse(&self) -> Matrix3<f64> {
        self.weighted(|i| 1.0 / i)
    }

    /// Space-frame inverse `R I₀⁻¹ Rᵀ` at orientation `r`.
    pub fn inverse_at(&self, r: &RotationMatrix) -> Matrix3<f64> {
        r.rotate_tensor(&self.body_inverse())
    }

    fn weighted(&self, f: impl Fn(f64) -> f64) -> Matrix3<f64> {
        self.moments
            .iter()
            .zip(&self.axes)
            .map(|(&m, n)| n.0 * n.0.transpose() * f(m))
            .sum()
    }
}
