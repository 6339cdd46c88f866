//! Diffusion constants, orientational localization rates and angular momentum diffusion
//! tensors.
//!
//! The environment enters through a real vector `A(Ω) = R(Ω) A₀ = A a(Ω)` and a real
//! symmetric tensor `B(Ω) = R(Ω) B₀ Rᵀ(Ω) = Σ B_i b_i(Ω) ⊗ b_i(Ω)`. Everything here is
//! expressed through the eigen-decomposition of `B₀`; for degenerate eigenvalues the axes
//! are any orthonormal completion and every exposed quantity is independent of that choice.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::rotor::{check_orthonormal, RotationMatrix, RotorError, UnitVector};

/// Lindblad data of the linear (`A`) and quadratic (`B`) superoperators, body frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropySpec {
    amplitude: f64,
    a0: UnitVector,
    b_eigenvalues: [f64; 3],
    b_axes: [UnitVector; 3],
}

impl AnisotropySpec {
    pub fn new(
        amplitude: f64,
        a0: UnitVector,
        b_eigenvalues: [f64; 3],
        b_axes: [UnitVector; 3],
    ) -> Result<Self, RotorError> {
        check_orthonormal(&b_axes)?;
        Ok(Self {
            amplitude: amplitude.abs(),
            a0,
            b_eigenvalues,
            b_axes,
        })
    }

    /// `B₀` diagonal in the body coordinate axes.
    pub fn principal(amplitude: f64, a0: UnitVector, b_eigenvalues: [f64; 3]) -> Self {
        Self {
            amplitude: amplitude.abs(),
            a0,
            b_eigenvalues,
            b_axes: [UnitVector::x(), UnitVector::y(), UnitVector::z()],
        }
    }

    /// Azimuthally symmetric rotor with symmetry axis `e_z`: `a₀ = e_z`,
    /// `B₀ = diag(B⊥, B⊥, B∥)`.
    pub fn symmetric(amplitude: f64, b_perp: f64, b_par: f64) -> Self {
        Self::principal(amplitude, UnitVector::z(), [b_perp, b_perp, b_par])
    }

    /// Builds the anisotropy data from a raw vector and symmetric matrix by diagonalizing `B₀`.
    /// A vanishing `A₀` gets the (irrelevant) direction `e_z`.
    pub fn from_raw(a0: Vector3<f64>, b0: Matrix3<f64>) -> Self {
        let amplitude = a0.norm();
        let dir = UnitVector::new(a0).unwrap_or_else(|_| UnitVector::z());
        let sym = (b0 + b0.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut axes = [UnitVector::x(); 3];
        let mut vals = [0.0; 3];
        for i in 0..3 {
            axes[i] = UnitVector::new_unchecked(eig.eigenvectors.column(i).into_owned());
            vals[i] = eig.eigenvalues[i];
        }
        Self {
            amplitude,
            a0: dir,
            b_eigenvalues: vals,
            b_axes: axes,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn a0(&self) -> &UnitVector {
        &self.a0
    }

    pub fn b_eigenvalues(&self) -> [f64; 3] {
        self.b_eigenvalues
    }

    pub fn b_axes(&self) -> &[UnitVector; 3] {
        &self.b_axes
    }

    /// `a(Ω) = R(Ω) a₀`.
    pub fn a_at(&self, r: &RotationMatrix) -> UnitVector {
        self.a0.rotated(r)
    }

    /// `b_i(Ω) = R(Ω) b_i(0)`.
    pub fn b_axes_at(&self, r: &RotationMatrix) -> [UnitVector; 3] {
        self.b_axes.map(|b| b.rotated(r))
    }
}

/// `D⁽¹⁾` and the three `D⁽²⁾_i`, all in units of angular momentum squared per time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionCoefficients {
    pub d1: f64,
    pub d2: [f64; 3],
}

impl DiffusionCoefficients {
    /// The weights `f_i = Σ_j D⁽²⁾_j − 2 D⁽²⁾_i` of the quadratic localization rate.
    pub fn f_coefficients(&self) -> [f64; 3] {
        let total: f64 = self.d2.iter().sum();
        self.d2.map(|d| total - 2.0 * d)
    }
}

/// A symmetric positive-semidefinite 3×3 diffusion tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionTensor(pub Matrix3<f64>);

impl DiffusionTensor {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let mut v: Vec<f64> = SymmetricEigen::new(self.0).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        [v[0], v[1], v[2]]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl std::ops::Add for DiffusionTensor {
    type Output = DiffusionTensor;

    fn add(self, rhs: Self) -> Self {
        DiffusionTensor(self.0 + rhs.0)
    }
}

/// `D⁽¹⁾ = ħ²A²/6`, `D⁽²⁾_i = (2ħ²/15)(B_j − B_k)²` with `(i, j, k)` cyclic.
pub fn diffusion_constants(spec: &AnisotropySpec, hbar: f64) -> DiffusionCoefficients {
    let h2 = hbar * hbar;
    let b = spec.b_eigenvalues;
    let d2 = [0, 1, 2].map(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        2.0 * h2 / 15.0 * (b[j] - b[k]).powi(2)
    });
    DiffusionCoefficients {
        d1: h2 * spec.amplitude * spec.amplitude / 6.0,
        d2,
    }
}

/// Linear-superoperator localization rate `F₁ = (2D⁽¹⁾/ħ²)[1 − a(Ω)·a(Ω′)]`.
pub fn localization_rate_f1(
    spec: &AnisotropySpec,
    omega: impl Into<RotationMatrix>,
    omega_prime: impl Into<RotationMatrix>,
    hbar: f64,
) -> f64 {
    let (r, rp) = (omega.into(), omega_prime.into());
    let d = diffusion_constants(spec, hbar);
    2.0 * d.d1 / (hbar * hbar) * one_minus_cos(&spec.a_at(&r), &spec.a_at(&rp))
}

/// Quadratic-superoperator localization rate
/// `F₂ = (1/2ħ²) Σ_i f_i |b_i(Ω) × b_i(Ω′)|²`.
pub fn localization_rate_f2(
    spec: &AnisotropySpec,
    omega: impl Into<RotationMatrix>,
    omega_prime: impl Into<RotationMatrix>,
    hbar: f64,
) -> f64 {
    let (r, rp) = (omega.into(), omega_prime.into());
    let f = diffusion_constants(spec, hbar).f_coefficients();
    let b = spec.b_axes_at(&r);
    let bp = spec.b_axes_at(&rp);
    let sum: f64 = (0..3)
        .map(|i| f[i] * b[i].as_vector().cross(bp[i].as_vector()).norm_squared())
        .sum();
    sum / (2.0 * hbar * hbar)
}

/// `1 − u·v` for unit vectors, evaluated as `|u − v|²/2`: exact zero at coincidence and
/// free of cancellation for nearby directions.
fn one_minus_cos(u: &UnitVector, v: &UnitVector) -> f64 {
    0.5 * (u.as_vector() - v.as_vector()).norm_squared()
}

/// Symmetric-rotor rates `(F₁, F₂)` in terms of the symmetry axes `m`, `m′`.
pub fn localization_rate_symmetric(d1: f64, d2: f64, m: &UnitVector, m_prime: &UnitVector, hbar: f64) -> (f64, f64) {
    let h2 = hbar * hbar;
    let f1 = 2.0 * d1 / h2 * one_minus_cos(m, m_prime);
    let f2 = d2 / h2 * m.as_vector().cross(m_prime.as_vector()).norm_squared();
    (f1, f2)
}

/// Planar-rotor rates `F₁ = (4D⁽¹⁾/ħ²) sin²((α−α′)/2)`, `F₂ = (D⁽²⁾/ħ²) sin²(α−α′)`.
pub fn localization_rate_planar(d1: f64, d2: f64, alpha: f64, alpha_prime: f64, hbar: f64) -> (f64, f64) {
    let h2 = hbar * hbar;
    let delta = alpha - alpha_prime;
    (
        4.0 * d1 / h2 * (0.5 * delta).sin().powi(2),
        d2 / h2 * delta.sin().powi(2),
    )
}

/// Body-frame tensor `D⁽¹⁾[1 − a₀ ⊗ a₀]`.
pub fn body_tensor_d1(spec: &AnisotropySpec, hbar: f64) -> Matrix3<f64> {
    let d = diffusion_constants(spec, hbar);
    let a = spec.a0.as_vector();
    (Matrix3::identity() - a * a.transpose()) * d.d1
}

/// Body-frame tensor `Σ D⁽²⁾_i b_i ⊗ b_i`.
pub fn body_tensor_d2(spec: &AnisotropySpec, hbar: f64) -> Matrix3<f64> {
    let d = diffusion_constants(spec, hbar);
    spec.b_axes
        .iter()
        .zip(d.d2)
        .map(|(b, di)| b.as_vector() * b.as_vector().transpose() * di)
        .sum()
}

/// `D⁽¹⁾(Ω) = D⁽¹⁾[1 − a(Ω) ⊗ a(Ω)]`.
pub fn diffusion_tensor_d1(spec: &AnisotropySpec, omega: impl Into<RotationMatrix>, hbar: f64) -> DiffusionTensor {
    let r = omega.into();
    DiffusionTensor(symmetrize(r.rotate_tensor(&body_tensor_d1(spec, hbar))))
}

/// `D⁽²⁾(Ω) = Σ D⁽²⁾_i b_i(Ω) ⊗ b_i(Ω)`.
pub fn diffusion_tensor_d2(spec: &AnisotropySpec, omega: impl Into<RotationMatrix>, hbar: f64) -> DiffusionTensor {
    let r = omega.into();
    DiffusionTensor(symmetrize(r.rotate_tensor(&body_tensor_d2(spec, hbar))))
}

pub(crate) fn symmetrize(m: Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}
