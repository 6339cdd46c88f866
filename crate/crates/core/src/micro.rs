//! Microscopic diffusion constants in SI units: Born-approximation gas scattering and
//! Rayleigh–Gans photon scattering.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::{integrate, integrate_to_infinity, QuadratureError, QuadratureSpec};
use crate::special::spherical_bessel_j;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;

/// `e^{−ξ²} < 1e−18` beyond this point.
pub const XI_MAX: f64 = 6.437_752_032_230_335;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MicroError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// How a radial profile behaves beyond its cutoff radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClass {
    /// Identically zero beyond the cutoff.
    Compact,
    /// Exponentially small beyond the cutoff; the tail is dropped.
    Rapid,
    /// Power-law tail; integrated through a mapping onto a finite interval.
    Algebraic,
}

/// A real radial function `v(r)` in energy units.
pub trait RadialProfile: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn cutoff(&self) -> f64;
    fn decay(&self) -> DecayClass;
}

/// `v(r) = v₀ exp(−r²/2r₀²)`, cut at `12 r₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    pub v0: f64,
    pub r0: f64,
}

impl RadialProfile for GaussianProfile {
    fn value(&self, r: f64) -> f64 {
        let x = r / self.r0;
        self.v0 * (-0.5 * x * x).exp()
    }

    fn cutoff(&self) -> f64 {
        12.0 * self.r0
    }

    fn decay(&self) -> DecayClass {
        DecayClass::Rapid
    }
}

/// Constant `v₀` inside radius `a`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareWellProfile {
    pub v0: f64,
    pub radius: f64,
}

impl RadialProfile for SquareWellProfile {
    fn value(&self, r: f64) -> f64 {
        if r <= self.radius {
            self.v0
        } else {
            0.0
        }
    }

    fn cutoff(&self) -> f64 {
        self.radius
    }

    fn decay(&self) -> DecayClass {
        DecayClass::Compact
    }
}

/// Closure-backed profile.
pub struct FnProfile<F> {
    f: F,
    cutoff: f64,
    decay: DecayClass,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnProfile<F> {
    pub fn new(f: F, cutoff: f64, decay: DecayClass) -> Self {
        Self { f, cutoff, decay }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> RadialProfile for FnProfile<F> {
    fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    fn cutoff(&self) -> f64 {
        self.cutoff
    }

    fn decay(&self) -> DecayClass {
        self.decay
    }
}

/// `∫₀^∞ dr r² v(r) w(r)` for a weight bounded by one in magnitude. The absolute
/// tolerance is `rel_tol · ∫ r²|v|`, so strongly cancelling integrals (large momentum
/// transfer) still terminate.
fn radial_integral<W: Fn(f64) -> f64>(
    profile: &dyn RadialProfile,
    weight: W,
    spec: &QuadratureSpec,
) -> Result<f64, QuadratureError> {
    let rc = profile.cutoff();
    let algebraic = profile.decay() == DecayClass::Algebraic;
    let abs_f = |r: f64| r * r * profile.value(r).abs();
    let mut scale = integrate(abs_f, 0.0, rc, spec)?.value;
    if algebraic {
        scale += integrate_to_infinity(abs_f, rc, spec)?.value;
    }
    let spec = spec.with_abs_tol(spec.abs_tol.max(spec.rel_tol * scale));
    let f = |r: f64| r * r * profile.value(r) * weight(r);
    let mut total = integrate(f, 0.0, rc, &spec)?.value;
    if algebraic {
        total += integrate_to_infinity(f, rc, &spec)?.value;
    }
    Ok(total)
}

/// Spherical form factor `g_ℓ(k) = ∫₀^∞ dr r² v(r) j_ℓ(kr)`.
pub fn form_factor(profile: &dyn RadialProfile, ell: u32, k: f64, spec: &QuadratureSpec) -> Result<f64, MicroError> {
    check_ell(ell)?;
    if k == 0.0 && ell > 0 {
        return Ok(0.0);
    }
    Ok(radial_integral(profile, |r| spherical_bessel_j(ell, k * r), spec)?)
}

/// Momentum transfer wavenumber `2p sin(θ/2)/ħ`.
pub fn transfer_wavenumber(p: f64, theta: f64, hbar: f64) -> f64 {
    2.0 * p * (0.5 * theta).sin() / hbar
}

fn i_pow(ell: u32) -> Complex64 {
    match ell % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Born coefficient `−(2m iˡ/ħ²) ∫ dr r² v(r) j_ℓ(2pr sin(θ/2)/ħ)` for one real radial profile.
pub fn born_coefficient(
    profile: &dyn RadialProfile,
    ell: u32,
    p: f64,
    theta: f64,
    mass: f64,
    hbar: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64, MicroError> {
    let g = form_factor(profile, ell, transfer_wavenumber(p, theta, hbar), spec)?;
    Ok(i_pow(ell) * (-2.0 * mass / (hbar * hbar) * g))
}

fn check_ell(ell: u32) -> Result<(), MicroError> {
    if ell > 2 {
        return Err(MicroError::InvalidParameter(format!(
            "multipole order {ell} out of range 0..=2"
        )));
    }
    Ok(())
}

/// One contribution `weight · v(r)` to the radial function `V_{ℓm}(r)`.
#[derive(Clone)]
pub struct ExpansionTerm {
    pub ell: u32,
    pub m: i32,
    pub weight: Complex64,
    pub profile: Arc<dyn RadialProfile>,
}

/// Multipole expansion `V(r, Ω) = Σ V_{ℓm}(r) Y_{ℓm}(Rᵀ e_r)` with `ℓ ≤ 2`.
#[derive(Clone, Default)]
pub struct PotentialExpansion {
    terms: Vec<ExpansionTerm>,
}

impl PotentialExpansion {
    pub fn new(terms: Vec<ExpansionTerm>) -> Result<Self, MicroError> {
        for t in &terms {
            check_ell(t.ell)?;
            if t.m.unsigned_abs() > t.ell {
                return Err(MicroError::InvalidParameter(format!(
                    "m = {} out of range for ℓ = {}",
                    t.m, t.ell
                )));
            }
        }
        Ok(Self { terms })
    }

    /// `v(r)[1 + a₁ m·e_r + (√5 a₂/2)(m·e_r)²]` with the symmetry axis `m` along the body z-axis.
    pub fn symmetric(v: Arc<dyn RadialProfile>, a1: f64, a2: f64) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        let v00 = (4.0 * PI).sqrt() * (1.0 + 5f64.sqrt() * a2 / 6.0);
        let v10 = a1 * (4.0 * PI / 3.0).sqrt();
        let v20 = 2.0 * PI.sqrt() / 3.0 * a2;
        let terms = [(0, v00), (1, v10), (2, v20)]
            .into_iter()
            .map(|(ell, w)| ExpansionTerm {
                ell,
                m: 0,
                weight: c(w),
                profile: Arc::clone(&v),
            })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[ExpansionTerm] {
        &self.terms
    }

    /// `V_{ℓm}(r)`.
    pub fn radial(&self, ell: u32, m: i32, r: f64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.ell == ell && t.m == m)
            .map(|t| t.weight * t.profile.value(r))
            .sum()
    }

    /// Largest `|V_{ℓ,−m}(r) − (−1)^m V*_{ℓm}(r)|` over the sample radii; zero for a real potential.
    pub fn hermiticity_defect(&self, radii: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for ell in 0..=2u32 {
            for m in -(ell as i32)..=ell as i32 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                for &r in radii {
                    let d = self.radial(ell, -m, r) - sign * self.radial(ell, m, r).conj();
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }

    /// All Born coefficients `f_{ℓm}(p, θ)` for gas particles of mass `mass`.
    pub fn born_coefficients(
        &self,
        p: f64,
        theta: f64,
        mass: f64,
        hbar: f64,
        spec: &QuadratureSpec,
    ) -> Result<BornCoefficients, MicroError> {
        let mut out = BornCoefficients::default();
        for t in &self.terms {
            let f = t.weight * born_coefficient(t.profile.as_ref(), t.ell, p, theta, mass, hbar, spec)?;
            match t.ell {
                0 => out.f0 += f,
                1 => out.f1[(t.m + 1) as usize] += f,
                _ => out.f2[(t.m + 2) as usize] += f,
            }
        }
        Ok(out)
    }
}

/// Born coefficients at fixed `(p, θ)`, indexed by `m + ℓ`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BornCoefficients {
    pub f0: Complex64,
    pub f1: [Complex64; 3],
    pub f2: [Complex64; 5],
}

impl BornCoefficients {
    pub fn a0(&self) -> Vector3<Complex64> {
        assemble_a0(&self.f1)
    }

    pub fn b0(&self) -> Matrix3<Complex64> {
        assemble_b0(&self.f2)
    }
}

/// Body-frame vector `A₀` from `(f_{1,−1}, f_{10}, f_{11})`.
pub fn assemble_a0(f1: &[Complex64; 3]) -> Vector3<Complex64> {
    let i = Complex64::i();
    let [fm1, f0, fp1] = *f1;
    Vector3::new(fm1 - fp1, -i * (fp1 + fm1), 2f64.sqrt() * f0) * Complex64::from((3.0 / (8.0 * PI)).sqrt())
}

/// Body-frame tensor `B₀` from `(f_{2,−2}, …, f_{22})`.
pub fn assemble_b0(f2: &[Complex64; 5]) -> Matrix3<Complex64> {
    let i = Complex64::i();
    let [fm2, fm1, f0, fp1, fp2] = *f2;
    let s23 = (2.0f64 / 3.0).sqrt();
    let s83 = (8.0f64 / 3.0).sqrt();
    let xy = i * (fp2 - fm2);
    let xz = fm1 - fp1;
    let yz = -i * (fp1 + fm1);
    Matrix3::new(
        fp2 + fm2 - s23 * f0,
        xy,
        xz,
        xy,
        -fm2 - fp2 - s23 * f0,
        yz,
        xz,
        yz,
        s83 * f0,
    ) * Complex64::from((15.0 / (32.0 * PI)).sqrt())
}

fn generator(i: usize) -> Matrix3<f64> {
    let mut e = Vector3::zeros();
    e[i] = 1.0;
    crate::rotor::skew(&e)
}

/// Diffusion tensor of the linear channel, `(ħ²/6)(|A|²𝟙 − Re A A†)`; for real `A = A a`
/// this is `D⁽¹⁾(𝟙 − a⊗a)`.
pub fn linear_tensor(a: &Vector3<Complex64>, hbar: f64) -> Matrix3<f64> {
    let norm2: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    let mut out = Matrix3::identity() * norm2;
    for r in 0..3 {
        for c in 0..3 {
            out[(r, c)] -= (a[r] * a[c].conj()).re;
        }
    }
    out * (hbar * hbar / 6.0)
}

/// Diffusion tensor of the quadratic channel, `(ħ²/15) Re tr([Tᵢ,B]†[Tⱼ,B])` with `Tᵢ` the
/// rotation generators; for real `B` with eigenpairs `(Bᵢ, bᵢ)` this is
/// `Σᵢ (2ħ²/15)(Bⱼ − B_k)² bᵢ⊗bᵢ`.
pub fn quadratic_tensor(b: &Matrix3<Complex64>, hbar: f64) -> Matrix3<f64> {
    let comms: Vec<Matrix3<Complex64>> = (0..3)
        .map(|i| {
            let t = generator(i).map(|x| Complex64::new(x, 0.0));
            t * b - b * t
        })
        .collect();
    let mut out = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let v: Complex64 = comms[i].adjoint().component_mul(&comms[j].transpose()).sum();
            let v = v.re * hbar * hbar / 15.0;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Gas parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    pub number_density: f64,
    pub mass: f64,
    pub temperature: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl GasParams {
    pub fn new(number_density: f64, mass: f64, temperature: f64) -> Result<Self, MicroError> {
        Self {
            number_density,
            mass,
            temperature,
            hbar: HBAR,
            k_b: K_B,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self, MicroError> {
        let fields = [
            ("number_density", self.number_density),
            ("mass", self.mass),
            ("temperature", self.temperature),
            ("hbar", self.hbar),
            ("k_b", self.k_b),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(MicroError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(self)
    }

    /// Thermal momentum scale `√(2 m k_B T)`.
    pub fn thermal_momentum(&self) -> f64 {
        (2.0 * self.mass * self.k_b * self.temperature).sqrt()
    }

    /// Maxwell density `(2π m k_B T)^{−3/2} exp(−p²/2mk_BT)` of a momentum vector.
    pub fn maxwell_density(&self, p: f64) -> f64 {
        let mkt = self.mass * self.k_b * self.temperature;
        (2.0 * PI * mkt).powf(-1.5) * (-p * p / (2.0 * mkt)).exp()
    }
}

/// Scalar diffusion constants `(D⁽¹⁾, D⁽²⁾)` of the azimuthally symmetric potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricConstants {
    pub d1: f64,
    pub d2: f64,
}

/// Thermally averaged constants of the potential `v(r)[1 + a₁ m·e_r + (√5 a₂/2)(m·e_r)²]`.
pub fn thermal_diffusion_constants(
    profile: &dyn RadialProfile,
    a1: f64,
    a2: f64,
    gas: &GasParams,
    spec: &QuadratureSpec,
) -> Result<SymmetricConstants, MicroError> {
    let gas = gas.validated()?;
    let pth = gas.thermal_momentum();
    let prefactor = (PI * pth * pth).sqrt() * 32.0 * gas.number_density * gas.mass / (3.0 * gas.hbar * gas.hbar);
    let channel = |ell: u32, a: f64| -> Result<f64, MicroError> {
        if a == 0.0 {
            return Ok(0.0);
        }
        let mut failure = None;
        let est = integrate(
            |xi| match form_factor(profile, ell, 2.0 * pth * xi / gas.hbar, spec) {
                Ok(g) => xi * (-xi * xi).exp() * g * g,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            XI_MAX,
            spec,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(prefactor * a * a * est.value)
    };
    Ok(SymmetricConstants {
        d1: channel(1, a1)?,
        d2: channel(2, a2)?,
    })
}

/// The same constants for a gas of sharp momentum `p0` instead of a thermal distribution:
/// `(64π² n_g m a² p0³/3ħ²) ∫₀¹ ds s g_ℓ²(2p0 s/ħ)`. Integrating this against
/// [`GasParams::maxwell_density`] over `p0 ∈ [0, ∞)` gives [`thermal_diffusion_constants`].
pub fn sharp_momentum_constants(
    profile: &dyn RadialProfile,
    a1: f64,
    a2: f64,
    p0: f64,
    gas: &GasParams,
    spec: &QuadratureSpec,
) -> Result<SymmetricConstants, MicroError> {
    let gas = gas.validated()?;
    let prefactor = 64.0 * PI * PI * gas.number_density * gas.mass * p0.powi(3) / (3.0 * gas.hbar * gas.hbar);
    let channel = |ell: u32, a: f64| -> Result<f64, MicroError> {
        if a == 0.0 || p0 == 0.0 {
            return Ok(0.0);
        }
        let mut failure = None;
        let est = integrate(
            |s| match form_factor(profile, ell, 2.0 * p0 * s / gas.hbar, spec) {
                Ok(g) => s * g * g,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            spec,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(prefactor * a * a * est.value)
    };
    Ok(SymmetricConstants {
        d1: channel(1, a1)?,
        d2: channel(2, a2)?,
    })
}

/// Body-frame diffusion tensors `(D⁽¹⁾, D⁽²⁾)` of a general expansion for gas particles of
/// sharp momentum `p0`, collision-averaged over the scattering angle with weight
/// `(8π² n_g/m) p0³ sin θ`.
pub fn collision_averaged_tensors(
    expansion: &PotentialExpansion,
    p0: f64,
    gas: &GasParams,
    spec: &QuadratureSpec,
) -> Result<(Matrix3<f64>, Matrix3<f64>), MicroError> {
    let gas = gas.validated()?;
    let weight = 8.0 * PI * PI * gas.number_density / gas.mass * p0.powi(3);
    // s = sin(θ/2), sin θ dθ = 4s ds; each node's tensors are shared by all components
    let mut cache: HashMap<u64, (Matrix3<f64>, Matrix3<f64>)> = HashMap::new();
    let mut failure: Option<MicroError> = None;
    let mut tensors_at = |s: f64| -> (Matrix3<f64>, Matrix3<f64>) {
        if let Some(t) = cache.get(&s.to_bits()) {
            return *t;
        }
        let theta = 2.0 * s.clamp(0.0, 1.0).asin();
        let t = match expansion.born_coefficients(p0, theta, gas.mass, gas.hbar, spec) {
            Ok(f) => (linear_tensor(&f.a0(), gas.hbar), quadratic_tensor(&f.b0(), gas.hbar)),
            Err(e) => {
                failure.get_or_insert(e);
                (Matrix3::zeros(), Matrix3::zeros())
            }
        };
        cache.insert(s.to_bits(), t);
        t
    };
    let mut d1 = Matrix3::zeros();
    let mut d2 = Matrix3::zeros();
    for which in 0..2 {
        let pick = |t: (Matrix3<f64>, Matrix3<f64>)| if which == 0 { t.0 } else { t.1 };
        // the trace is non-negative and sets the absolute scale for every component,
        // some of which vanish identically
        let trace = integrate(|s| 4.0 * s * pick(tensors_at(s)).trace(), 0.0, 1.0, spec)?.value;
        let component_spec = spec.with_abs_tol(spec.abs_tol.max(spec.rel_tol * trace.abs()));
        for r in 0..3 {
            for c in r..3 {
                let v = integrate(|s| 4.0 * s * pick(tensors_at(s))[(r, c)], 0.0, 1.0, &component_spec)?.value;
                let target = if which == 0 { &mut d1 } else { &mut d2 };
                target[(r, c)] = weight * v;
                target[(c, r)] = weight * v;
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((d1, d2))
}

/// Photon environment for Rayleigh–Gans scattering, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonEnvironment {
    pub volume: f64,
    pub field_amplitude: f64,
    pub wavenumber: f64,
    pub chi: [f64; 3],
    pub epsilon0: f64,
    pub hbar: f64,
}

impl PhotonEnvironment {
    pub fn new(volume: f64, field_amplitude: f64, wavenumber: f64, chi: [f64; 3]) -> Result<Self, MicroError> {
        let env = Self {
            volume,
            field_amplitude,
            wavenumber,
            chi,
            epsilon0: EPSILON_0,
            hbar: HBAR,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<(), MicroError> {
        let fields = [
            ("volume", self.volume),
            ("field_amplitude", self.field_amplitude),
            ("wavenumber", self.wavenumber),
            ("epsilon0", self.epsilon0),
            ("hbar", self.hbar),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(MicroError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.chi.iter().any(|c| !c.is_finite()) {
            return Err(MicroError::InvalidParameter("susceptibility must be finite".into()));
        }
        Ok(())
    }
}

/// `D⁽²⁾ᵢ = (ε₀ħV₀²E₀²k³/36π)(χⱼ − χ_k)²` for cyclic `(i, j, k)`.
pub fn rayleigh_gans_diffusion(env: &PhotonEnvironment) -> Result<[f64; 3], MicroError> {
    env.validate()?;
    let k = env.wavenumber;
    let prefactor =
        env.epsilon0 * env.hbar * env.volume * env.volume * env.field_amplitude * env.field_amplitude * (k * k * k)
            / (36.0 * PI);
    let c = env.chi;
    Ok([
        prefactor * (c[1] - c[2]).powi(2),
        prefactor * (c[2] - c[0]).powi(2),
        prefactor * (c[0] - c[1]).powi(2),
    ])
}
