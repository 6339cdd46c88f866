//! Execution of one scenario.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use rotodiff_core::classical::{simulate_ensemble, InitialCondition, MomentSeries};
use rotodiff_core::localization::{
    body_tensor_d1, body_tensor_d2, diffusion_constants, diffusion_tensor_d1, diffusion_tensor_d2,
    localization_rate_f1, localization_rate_f2,
};
use rotodiff_core::micro::{
    rayleigh_gans_diffusion, thermal_diffusion_constants, GaussianProfile, RadialProfile, SquareWellProfile,
};
use rotodiff_core::planar::{
    evolve_analytic, evolve_numeric, fig1b_packet, mean_energy, momentum_distribution, packet_retention,
    wigner_from_wavefunction, CoherenceProbe, PlanarWignerState,
};
use rotodiff_core::quadrature::QuadratureSpec;
use rotodiff_core::{Matrix3, Vector3};

use crate::config::{
    euler, ClassicalConfig, ClassicalInitial, MicroGasConfig, MicroPhotonConfig, PlanarConfig, PlanarInitial,
    RadialProfileConfig, RatesConfig, ScenarioConfig, ScenarioKind,
};
use crate::error::CliError;
use crate::output::{format_f64, wigner_csv, Manifest, OutputSet};

/// Files of a completed run, manifest last.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub manifest: Manifest,
}

/// Validates `config`, runs it and writes every output below `out_dir`. `seed` overrides
/// the configured seed; the manifest echoes the effective configuration.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path, seed: Option<u64>) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let mut config = config.clone();
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    let mut out = OutputSet::new(out_dir, &config.output_prefix)?;
    let mut files = Vec::new();
    match config.kind {
        ScenarioKind::ClassicalEnsemble => run_classical(
            block(config.classical_ensemble.as_ref(), config.kind)?,
            config.seed,
            &mut out,
            &mut files,
        )?,
        ScenarioKind::PlanarEvolve => {
            run_planar(block(config.planar_evolve.as_ref(), config.kind)?, &mut out, &mut files)?
        }
        ScenarioKind::Rates => run_rates(block(config.rates.as_ref(), config.kind)?, &mut out, &mut files)?,
        ScenarioKind::MicroGas => run_micro_gas(block(config.micro_gas.as_ref(), config.kind)?, &mut out, &mut files)?,
        ScenarioKind::MicroPhoton => {
            run_micro_photon(block(config.micro_photon.as_ref(), config.kind)?, &mut out, &mut files)?
        }
    }
    let (path, manifest) = out.finish(config.canonical(), started)?;
    files.push(path);
    Ok(RunReport { files, manifest })
}

// validate() already guarantees the block is present
fn block<T>(b: Option<&T>, kind: ScenarioKind) -> Result<&T, CliError> {
    b.ok_or_else(|| CliError::Config(format!("missing block for {kind:?}")))
}

fn vec3(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn mat3(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)]])
}

fn csv_row(out: &mut String, fields: impl IntoIterator<Item = f64>) {
    let row: Vec<String> = fields.into_iter().map(format_f64).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn moments_csv(series: &MomentSeries) -> String {
    let mut header = vec!["t".to_owned()];
    for stat in ["mean", "se"] {
        header.extend(AXES.map(|a| format!("j{a}_{stat}")));
    }
    for stat in ["mean", "se"] {
        for a in AXES {
            header.extend(AXES.map(|b| format!("j{a}j{b}_{stat}")));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for (k, t) in series.times.iter().enumerate() {
        let (j, jj) = (&series.mean_j[k], &series.mean_jj[k]);
        // row-major order of J⊗J
        let flat = |m: &Matrix3<f64>| m.transpose().iter().copied().collect::<Vec<f64>>();
        let fields = std::iter::once(*t)
            .chain(vec3(&j.mean))
            .chain(vec3(&j.se))
            .chain(flat(&jj.mean))
            .chain(flat(&jj.se));
        csv_row(&mut out, fields);
    }
    out
}

fn run_classical(
    c: &ClassicalConfig,
    seed: u64,
    out: &mut OutputSet,
    files: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let params = c.params(seed)?;
    let initial = match c.initial {
        ClassicalInitial::Delta { euler: e, j } => InitialCondition::Delta {
            r: euler(e).to_rotation(),
            j: Vector3::from(j),
        },
        ClassicalInitial::Haar { j } => InitialCondition::HaarOrientation { j: Vector3::from(j) },
    };
    let series = simulate_ensemble(&params, c.n_traj, &initial, &c.sample_times)
        .map_err(|e| CliError::numerical("classical", e))?;
    files.push(out.write("moments.csv", moments_csv(&series).as_bytes())?);
    let slopes = json!({
        "n_traj": series.n_traj,
        "body_diffusion": mat3(params.body_diffusion()),
        "slope_j": series.slope_j.map(|s| json!({ "mean": vec3(&s.mean), "se": vec3(&s.se) })),
        "slope_jj": series.slope_jj.map(|s| json!({ "mean": mat3(&s.mean), "se": mat3(&s.se) })),
    });
    files.push(out.write_json("slopes.json", &slopes)?);
    Ok(())
}

fn run_planar(p: &PlanarConfig, out: &mut OutputSet, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let numerical = |e| CliError::numerical("planar", e);
    let params = p.params()?;
    let initial = match p.initial {
        PlanarInitial::Ground => PlanarWignerState::ground_state(p.n_alpha, p.m_max),
        PlanarInitial::TwoPacket { sigma } => wigner_from_wavefunction(&fig1b_packet(p.n_alpha, sigma), p.m_max),
    }
    .map_err(numerical)?;
    let probe = match p.initial {
        PlanarInitial::TwoPacket { sigma } => Some(CoherenceProbe::new(&initial, sigma, &params).map_err(numerical)?),
        PlanarInitial::Ground => None,
    };

    let mut momentum = String::from("t,m,p\n");
    let mut snapshots = Vec::new();
    let mut current = initial.clone();
    for (i, &t) in p.times.iter().enumerate() {
        let state = if p.analytic() {
            evolve_analytic(&initial, &params, t).map_err(numerical)?
        } else {
            // snapshots are chained, so each step only covers the gap since the last one
            current = evolve_numeric(&current, &params, t - current.t(), p.dt)
                .map_err(numerical)?
                .with_time(t);
            current.clone()
        };
        files.push(out.write(&format!("wigner_{i:03}.csv"), wigner_csv(&state).as_bytes())?);
        for (m, v) in state.m_values().zip(momentum_distribution(&state)) {
            let _ = writeln!(momentum, "{},{m},{}", format_f64(t), format_f64(v));
        }
        let mut snap = json!({
            "index": i,
            "t": t,
            "normalization": state.normalization(),
            "mean_energy": mean_energy(&state, &params),
            "boundary_fraction": state.boundary_fraction(),
        });
        if let Some(probe) = &probe {
            snap["coherence_contrast"] = json!(probe.contrast(&state));
            snap["packet_retention"] = json!(packet_retention(&initial, &state, &params).map_err(numerical)?);
        }
        snapshots.push(snap);
    }
    files.push(out.write("momentum.csv", momentum.as_bytes())?);
    let summary = json!({
        "method": if p.analytic() { "analytic" } else { "numeric" },
        "n_alpha": p.n_alpha,
        "m_max": p.m_max,
        "revival_time": params.revival_time(),
        "snapshots": snapshots,
    });
    files.push(out.write_json("summary.json", &summary)?);
    Ok(())
}

fn run_rates(r: &RatesConfig, out: &mut OutputSet, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let spec = r.anisotropy.to_spec()?;
    let d = diffusion_constants(&spec, r.hbar);
    let pairs: Vec<Value> = r
        .pairs
        .iter()
        .map(|[a, b]| {
            let (ra, rb) = (euler(*a).to_rotation(), euler(*b).to_rotation());
            json!({
                "omega": a,
                "omega_prime": b,
                "f1": localization_rate_f1(&spec, ra, rb, r.hbar),
                "f2": localization_rate_f2(&spec, ra, rb, r.hbar),
                "d1_tensor": mat3(diffusion_tensor_d1(&spec, ra, r.hbar).matrix()),
                "d2_tensor": mat3(diffusion_tensor_d2(&spec, ra, r.hbar).matrix()),
            })
        })
        .collect();
    let value = json!({
        "d1": d.d1,
        "d2": d.d2,
        "f_coefficients": d.f_coefficients(),
        "body_d1": mat3(&body_tensor_d1(&spec, r.hbar)),
        "body_d2": mat3(&body_tensor_d2(&spec, r.hbar)),
        "pairs": pairs,
    });
    files.push(out.write_json("rates.json", &value)?);
    Ok(())
}

fn run_micro_gas(g: &MicroGasConfig, out: &mut OutputSet, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let gas = g.gas()?;
    let profile: Box<dyn RadialProfile> = match g.profile {
        RadialProfileConfig::Gaussian { v0, r0 } => Box::new(GaussianProfile { v0, r0 }),
        RadialProfileConfig::SquareWell { v0, radius } => Box::new(SquareWellProfile { v0, radius }),
    };
    let quad = QuadratureSpec::default().with_rel_tol(g.rel_tol);
    let c = thermal_diffusion_constants(profile.as_ref(), g.a1, g.a2, &gas, &quad)
        .map_err(|e| CliError::numerical("micro", e))?;
    let value = json!({
        "d1": c.d1,
        "d2": c.d2,
        "thermal_momentum": gas.thermal_momentum(),
    });
    files.push(out.write_json("rates.json", &value)?);
    Ok(())
}

fn run_micro_photon(ph: &MicroPhotonConfig, out: &mut OutputSet, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let env = ph.environment()?;
    let d2 = rayleigh_gans_diffusion(&env).map_err(|e| CliError::numerical("micro", e))?;
    files.push(out.write_json("rates.json", &json!({ "d1": 0.0, "d2": d2 }))?);
    Ok(())
}
