//! Scenario configuration files.
//!
//! A configuration is a JSON object naming the scenario `kind` and carrying exactly one
//! parameter block for it. Unknown keys are rejected at every level. Physical defaults
//! (`ħ = I = 1`, the planar grid) are part of the schema.

use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use rotodiff_core::classical::ClassicalParams;
use rotodiff_core::localization::AnisotropySpec;
use rotodiff_core::micro::{GasParams, PhotonEnvironment};
use rotodiff_core::planar::{PlanarParams, DEFAULT_M_MAX, DEFAULT_N_ALPHA};
use rotodiff_core::rotor::{EulerAngles, InertiaTensor, UnitVector};
use rotodiff_core::{Matrix3, Vector3};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    ClassicalEnsemble,
    PlanarEvolve,
    Rates,
    MicroGas,
    MicroPhoton,
}

impl ScenarioKind {
    /// Key of the parameter block belonging to this kind.
    pub fn block_name(self) -> &'static str {
        match self {
            Self::ClassicalEnsemble => "classical_ensemble",
            Self::PlanarEvolve => "planar_evolve",
            Self::Rates => "rates",
            Self::MicroGas => "micro_gas",
            Self::MicroPhoton => "micro_photon",
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_prefix() -> String {
    "rotodiff".into()
}

/// One scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Prefix of every emitted file name.
    #[serde(default = "default_prefix")]
    pub output_prefix: String,
    /// Seed of the random streams (classical ensembles only).
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_ensemble: Option<ClassicalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planar_evolve: Option<PlanarConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub micro_gas: Option<MicroGasConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub micro_photon: Option<MicroPhotonConfig>,
}

/// Lindblad data: amplitude and body-frame direction of `A₀`, eigen-decomposition of `B₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AnisotropyConfig {
    pub amplitude: f64,
    pub a0: [f64; 3],
    pub b_eigenvalues: [f64; 3],
    /// Orthonormal eigenvectors of `B₀` as rows; the body axes if omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_axes: Option<[[f64; 3]; 3]>,
}

impl AnisotropyConfig {
    pub fn to_spec(&self) -> Result<AnisotropySpec, CliError> {
        let unit = |v: [f64; 3], what: &str| {
            UnitVector::new(Vector3::from(v)).map_err(|e| CliError::Config(format!("{what}: {e}")))
        };
        let a0 = unit(self.a0, "a0")?;
        match self.b_axes {
            None => Ok(AnisotropySpec::principal(self.amplitude, a0, self.b_eigenvalues)),
            Some(rows) => {
                let axes = [
                    unit(rows[0], "b_axes[0]")?,
                    unit(rows[1], "b_axes[1]")?,
                    unit(rows[2], "b_axes[2]")?,
                ];
                AnisotropySpec::new(self.amplitude, a0, self.b_eigenvalues, axes)
                    .map_err(|e| CliError::Config(format!("b_axes: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodyDiffusion {
    /// Raw symmetric PSD body-frame tensor `D₀`.
    Matrix { d0: [[f64; 3]; 3] },
    /// `D₀` from the Lindblad data.
    Anisotropy {
        spec: AnisotropyConfig,
        #[serde(default = "one")]
        hbar: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassicalInitial {
    /// Fixed orientation (z-y′-z″ Euler angles) and angular momentum.
    Delta { euler: [f64; 3], j: [f64; 3] },
    /// Haar-random orientation with fixed angular momentum.
    Haar {
        #[serde(default)]
        j: [f64; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    /// Principal moments of inertia.
    pub inertia: [f64; 3],
    pub diffusion: BodyDiffusion,
    pub dt: f64,
    pub n_traj: usize,
    /// Ascending, non-negative.
    pub sample_times: Vec<f64>,
    pub initial: ClassicalInitial,
}

impl ClassicalConfig {
    pub fn params(&self, seed: u64) -> Result<ClassicalParams, CliError> {
        let inertia = InertiaTensor::principal(self.inertia).map_err(|e| CliError::Config(format!("inertia: {e}")))?;
        let params = match &self.diffusion {
            BodyDiffusion::Matrix { d0 } => {
                let m = Matrix3::from_fn(|i, j| d0[i][j]);
                ClassicalParams::new(inertia, m, self.dt, seed)
            }
            BodyDiffusion::Anisotropy { spec, hbar } => {
                positive("hbar", *hbar)?;
                ClassicalParams::from_spec(inertia, &spec.to_spec()?, *hbar, self.dt, seed)
            }
        };
        params.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PlanarInitial {
    /// `w = δ_{m0}/2π`.
    Ground,
    /// Two-lobed packet `ψ ∝ exp(−cos²α/4σ²)`.
    TwoPacket { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum PlanarMethod {
    /// Closed-form kernel when `d2 = 0`, splitting otherwise.
    #[default]
    Auto,
    Analytic,
    Numeric,
}

fn default_n_alpha() -> usize {
    DEFAULT_N_ALPHA
}

fn default_m_max() -> usize {
    DEFAULT_M_MAX
}

fn default_dt() -> f64 {
    3e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PlanarConfig {
    #[serde(default = "one")]
    pub inertia: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub d1: f64,
    #[serde(default)]
    pub d2: f64,
    /// Angle grid size, a power of two.
    #[serde(default = "default_n_alpha")]
    pub n_alpha: usize,
    /// Angular momentum cutoff `M`.
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    pub initial: PlanarInitial,
    /// Snapshot times, ascending and non-negative.
    pub times: Vec<f64>,
    #[serde(default)]
    pub method: PlanarMethod,
    /// Splitting step (numeric method only).
    #[serde(default = "default_dt")]
    pub dt: f64,
}

impl PlanarConfig {
    pub fn params(&self) -> Result<PlanarParams, CliError> {
        PlanarParams::new(self.inertia, self.d1, self.d2, self.hbar).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Whether the closed-form kernel is used.
    pub fn analytic(&self) -> bool {
        match self.method {
            PlanarMethod::Auto => self.d2 == 0.0,
            PlanarMethod::Analytic => true,
            PlanarMethod::Numeric => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub anisotropy: AnisotropyConfig,
    #[serde(default = "one")]
    pub hbar: f64,
    /// Orientation pairs `(Ω, Ω′)` as Euler angles.
    #[serde(default)]
    pub pairs: Vec<[[f64; 3]; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadialProfileConfig {
    /// `v₀ exp(−r²/2r₀²)`.
    Gaussian { v0: f64, r0: f64 },
    /// `v₀` for `r < radius`.
    SquareWell { v0: f64, radius: f64 },
}

fn default_rel_tol() -> f64 {
    1e-10
}

/// Gas scattering off `v(r)[1 + a₁ m·e_r + (√5a₂/2)(m·e_r)²]`, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MicroGasConfig {
    pub profile: RadialProfileConfig,
    pub a1: f64,
    pub a2: f64,
    pub number_density: f64,
    pub gas_mass: f64,
    pub temperature: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

impl MicroGasConfig {
    pub fn gas(&self) -> Result<GasParams, CliError> {
        GasParams::new(self.number_density, self.gas_mass, self.temperature)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Rayleigh–Gans photon scattering, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MicroPhotonConfig {
    pub volume: f64,
    pub field_amplitude: f64,
    pub wavenumber: f64,
    pub chi: [f64; 3],
}

impl MicroPhotonConfig {
    pub fn environment(&self) -> Result<PhotonEnvironment, CliError> {
        PhotonEnvironment::new(self.volume, self.field_amplitude, self.wavenumber, self.chi)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn positive(what: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} must be positive, got {v}")))
    }
}

fn finite(what: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} must be finite")))
    }
}

fn ascending_times(what: &str, times: &[f64]) -> Result<(), CliError> {
    if times.is_empty() {
        return Err(CliError::Config(format!("{what} is empty")));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Config(format!(
            "{what} must be finite, non-negative and ascending"
        )));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The configuration with every default filled in, keys sorted.
    pub fn canonical(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configuration serializes")
    }

    /// Checks everything that can be checked without running the computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let present = [
            ("classical_ensemble", self.classical_ensemble.is_some()),
            ("planar_evolve", self.planar_evolve.is_some()),
            ("rates", self.rates.is_some()),
            ("micro_gas", self.micro_gas.is_some()),
            ("micro_photon", self.micro_photon.is_some()),
        ];
        let wanted = self.kind.block_name();
        for (name, is_set) in present {
            if is_set != (name == wanted) {
                return Err(CliError::Config(if is_set {
                    format!("block `{name}` does not belong to kind {:?}", self.kind)
                } else {
                    format!("missing block `{name}`")
                }));
            }
        }
        if self.output_prefix.is_empty() || self.output_prefix.contains(['/', '\\']) {
            return Err(CliError::Config(format!(
                "output_prefix must be a non-empty file name, got {:?}",
                self.output_prefix
            )));
        }
        if let Some(c) = &self.classical_ensemble {
            c.params(self.seed)?;
            if c.n_traj < 2 {
                return Err(CliError::Config("n_traj must be at least 2".into()));
            }
            ascending_times("sample_times", &c.sample_times)?;
            if let ClassicalInitial::Delta { euler, j } = c.initial {
                euler.iter().chain(&j).try_for_each(|v| finite("initial state", *v))?;
            }
        }
        if let Some(p) = &self.planar_evolve {
            p.params()?;
            if p.n_alpha < 4 || !p.n_alpha.is_power_of_two() {
                return Err(CliError::Config(format!(
                    "n_alpha must be a power of two ≥ 4, got {}",
                    p.n_alpha
                )));
            }
            if p.m_max == 0 {
                return Err(CliError::Config("m_max must be positive".into()));
            }
            ascending_times("times", &p.times)?;
            positive("dt", p.dt)?;
            if p.analytic() && p.d2 != 0.0 {
                return Err(CliError::Config("the analytic method requires d2 = 0".into()));
            }
            if let PlanarInitial::TwoPacket { sigma } = p.initial {
                positive("sigma", sigma)?;
                if p.m_max >= p.n_alpha / 2 {
                    return Err(CliError::Config("two-packet states need m_max < n_alpha/2".into()));
                }
            }
        }
        if let Some(r) = &self.rates {
            r.anisotropy.to_spec()?;
            positive("hbar", r.hbar)?;
            r.pairs
                .iter()
                .flatten()
                .flatten()
                .try_for_each(|v| finite("Euler angle", *v))?;
        }
        if let Some(g) = &self.micro_gas {
            g.gas()?;
            match g.profile {
                RadialProfileConfig::Gaussian { v0, r0 } => {
                    finite("v0", v0)?;
                    positive("r0", r0)?;
                }
                RadialProfileConfig::SquareWell { v0, radius } => {
                    finite("v0", v0)?;
                    positive("radius", radius)?;
                }
            }
            finite("a1", g.a1)?;
            finite("a2", g.a2)?;
            positive("rel_tol", g.rel_tol)?;
        }
        if let Some(ph) = &self.micro_photon {
            ph.environment()?;
        }
        Ok(())
    }
}

/// JSON schema of [`ScenarioConfig`].
pub fn schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(ScenarioConfig)).expect("schema serializes")
}

/// Euler-angle triple to an orientation.
pub fn euler(a: [f64; 3]) -> EulerAngles {
    EulerAngles::new(a[0], a[1], a[2])
}
