//! Angular momentum diffusion of rigid rotors.
//!
//! The crate is split along the physics:
//!
//! - [`rotor`]: orientations, rotation matrices and inertia tensors (z-y'-z'' Euler angles).
//! - [`localization`]: diffusion constants, orientational localization rates and the
//!   orientation-dependent diffusion tensors of the quantum master equation.
//! - [`classical`]: Euler–Maruyama integration of the Langevin equation for the
//!   space-fixed angular momentum together with the free rotation of the body.
//! - [`planar`]: phase-space (Wigner) dynamics of the planar rotor, solved both through
//!   the closed-form kernel and by operator splitting.
//! - [`micro`]: diffusion constants from Born-approximation gas scattering and
//!   Rayleigh-Gans photon scattering.
//! - [`special`] and [`quadrature`]: the numerical kernels shared by the above.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod localization;
pub mod micro;
pub mod planar;
pub mod quadrature;
pub mod rotor;
pub mod special;

pub use nalgebra::{Matrix3, Vector3};
