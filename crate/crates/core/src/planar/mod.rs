//! Planar rotor in Wigner phase space.
//!
//! The state is a real grid `w(αⱼ, m)` with `αⱼ = 2πj/N` and integer angular momentum
//! `|m| ≤ M`, evolving under
//!
//! ```text
//! ∂ₜw + (ħm/I)∂_α w = (D⁽¹⁾/ħ²)[w(m+1) − 2w(m) + w(m−1)] + (D⁽²⁾/4ħ²)[w(m+2) − 2w(m) + w(m−2)].
//! ```
//!
//! Both propagators work column-wise in the angular Fourier variable `k`, where the shear
//! is diagonal. [`evolve_analytic`] applies the closed-form kernel (valid for `D⁽²⁾ = 0`);
//! [`evolve_numeric`] is a Strang splitting of exact shear and exact lattice heat-kernel
//! sub-steps.

mod diagnostics;
mod propagate;
mod spectral;
mod wigner;

use std::f64::consts::PI;

use thiserror::Error;

pub use diagnostics::{
    l1_distance, mean_energy, momentum_distribution, packet_retention, revival_fidelity, unshear, CoherenceProbe,
};
pub use propagate::{evolve_analytic, evolve_numeric, kernel_t, PlanarKernel, KERNEL_CUTOFF};
pub use wigner::{fig1b_packet, wigner_from_wavefunction};

/// Default angular grid size.
pub const DEFAULT_N_ALPHA: usize = 512;
/// Default angular momentum cutoff.
pub const DEFAULT_M_MAX: usize = 128;
/// Boundary mass above which propagation aborts.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanarError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid too small: mass {boundary_mass:e} reached |m| = {m_max}")]
    GridTooSmall { boundary_mass: f64, m_max: usize },
    #[error("wavefunction not normalized: Σ|ψ|²Δα = {0}")]
    NotNormalized(f64),
    #[error("Wigner transform has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("the closed-form kernel requires D2 = 0 (got {0})")]
    AnalyticRequiresNoD2(f64),
}

/// Moment of inertia, diffusion constants and ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarParams {
    pub inertia: f64,
    pub d1: f64,
    pub d2: f64,
    pub hbar: f64,
}

impl PlanarParams {
    pub fn new(inertia: f64, d1: f64, d2: f64, hbar: f64) -> Result<Self, PlanarError> {
        let p = Self { inertia, d1, d2, hbar };
        p.validate()?;
        Ok(p)
    }

    /// `ħ = I = 1`.
    pub fn natural(d1: f64, d2: f64) -> Result<Self, PlanarError> {
        Self::new(1.0, d1, d2, 1.0)
    }

    pub fn validate(&self) -> Result<(), PlanarError> {
        let bad = |what: &str, v: f64| Err(PlanarError::InvalidParameter(format!("{what} = {v}")));
        if !(self.inertia > 0.0 && self.inertia.is_finite()) {
            return bad("inertia", self.inertia);
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return bad("hbar", self.hbar);
        }
        if !(self.d1 >= 0.0 && self.d1.is_finite()) {
            return bad("d1", self.d1);
        }
        if !(self.d2 >= 0.0 && self.d2.is_finite()) {
            return bad("d2", self.d2);
        }
        Ok(())
    }

    /// Angular velocity `ħ/I` of the `m = 1` row.
    pub fn shear_rate(&self) -> f64 {
        self.hbar / self.inertia
    }

    /// Revival period `2πI/ħ` of an arbitrary state.
    pub fn revival_time(&self) -> f64 {
        2.0 * PI * self.inertia / self.hbar
    }
}

/// Real Wigner grid, row-major in `m` (row `m + M` holds `w(·, m)`).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarWignerState {
    n_alpha: usize,
    m_max: usize,
    values: Vec<f64>,
    t: f64,
}

fn check_grid(n_alpha: usize, m_max: usize) -> Result<(), PlanarError> {
    if n_alpha < 4 || !n_alpha.is_power_of_two() {
        return Err(PlanarError::InvalidParameter(format!(
            "n_alpha must be a power of two ≥ 4, got {n_alpha}"
        )));
    }
    if m_max == 0 {
        return Err(PlanarError::InvalidParameter("m_max must be positive".into()));
    }
    Ok(())
}

impl PlanarWignerState {
    pub fn from_values(n_alpha: usize, m_max: usize, values: Vec<f64>, t: f64) -> Result<Self, PlanarError> {
        check_grid(n_alpha, m_max)?;
        if values.len() != n_alpha * (2 * m_max + 1) {
            return Err(PlanarError::InvalidParameter(format!(
                "expected {} values, got {}",
                n_alpha * (2 * m_max + 1),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PlanarError::InvalidParameter("non-finite Wigner value".into()));
        }
        Ok(Self {
            n_alpha,
            m_max,
            values,
            t,
        })
    }

    /// `w₀(α, m) = δ_{m0}/2π`.
    pub fn ground_state(n_alpha: usize, m_max: usize) -> Result<Self, PlanarError> {
        check_grid(n_alpha, m_max)?;
        let mut values = vec![0.0; n_alpha * (2 * m_max + 1)];
        values[m_max * n_alpha..(m_max + 1) * n_alpha].fill(1.0 / (2.0 * PI));
        Ok(Self {
            n_alpha,
            m_max,
            values,
            t: 0.0,
        })
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid spacing `2π/N`.
    pub fn d_alpha(&self) -> f64 {
        2.0 * PI / self.n_alpha as f64
    }

    pub fn alpha(&self, j: usize) -> f64 {
        j as f64 * self.d_alpha()
    }

    pub fn m_values(&self) -> impl Iterator<Item = i64> {
        let m = self.m_max as i64;
        -m..=m
    }

    pub fn row(&self, m: i64) -> &[f64] {
        let i = (m + self.m_max as i64) as usize;
        &self.values[i * self.n_alpha..(i + 1) * self.n_alpha]
    }

    pub fn value(&self, j: usize, m: i64) -> f64 {
        self.row(m)[j]
    }

    /// `Σ_m Σ_j w Δα`.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.d_alpha()
    }

    /// `Σ_j (|w(αⱼ, −M)| + |w(αⱼ, M)|) Δα`, relative to the normalization.
    pub fn boundary_fraction(&self) -> f64 {
        let m = self.m_max as i64;
        let edge: f64 = self.row(-m).iter().chain(self.row(m)).map(|v| v.abs()).sum();
        edge * self.d_alpha() / self.normalization().abs().max(f64::MIN_POSITIVE)
    }

    pub(crate) fn check_boundary(&self) -> Result<(), PlanarError> {
        let b = self.boundary_fraction();
        if !(b <= BOUNDARY_TOLERANCE) {
            return Err(PlanarError::GridTooSmall {
                boundary_mass: b,
                m_max: self.m_max,
            });
        }
        Ok(())
    }
}
