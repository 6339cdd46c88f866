use std::f64::consts::PI;

use super::spectral::Spectrum;
use super::{PlanarError, PlanarParams, PlanarWignerState};

/// `p(m) = Σⱼ w(αⱼ, m) Δα` for `m = −M..=M`.
pub fn momentum_distribution(state: &PlanarWignerState) -> Vec<f64> {
    state
        .m_values()
        .map(|m| state.row(m).iter().sum::<f64>() * state.d_alpha())
        .collect()
}

/// `⟨H⟩ = Σ_m p(m) ħ²m²/2I`.
pub fn mean_energy(state: &PlanarWignerState, params: &PlanarParams) -> f64 {
    let p = momentum_distribution(state);
    let m_max = state.m_max() as f64;
    let sum: f64 = p.iter().enumerate().map(|(i, v)| (i as f64 - m_max).powi(2) * v).sum();
    sum * params.hbar * params.hbar / (2.0 * params.inertia)
}

/// The state in the interaction frame: row `m` translated back by `ħmt/I`, which undoes
/// free rotation since `t = 0`.
pub fn unshear(state: &PlanarWignerState, params: &PlanarParams) -> PlanarWignerState {
    let mut spec = Spectrum::from_state(state);
    spec.shear(-params.shear_rate() * state.t());
    spec.to_state(state.t())
}

fn same_grid(a: &PlanarWignerState, b: &PlanarWignerState) -> Result<(), PlanarError> {
    if a.n_alpha() != b.n_alpha() || a.m_max() != b.m_max() {
        return Err(PlanarError::InvalidParameter(format!(
            "grids differ: {}×{} vs {}×{}",
            a.n_alpha(),
            a.m_max(),
            b.n_alpha(),
            b.m_max()
        )));
    }
    Ok(())
}

/// `Σ |w_a − w_b| Δα` over the whole grid.
pub fn l1_distance(a: &PlanarWignerState, b: &PlanarWignerState) -> Result<f64, PlanarError> {
    same_grid(a, b)?;
    let s: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    Ok(s * a.d_alpha())
}

/// Normalized overlap `⟨a, b⟩ / (‖a‖ ‖b‖)` of two Wigner grids; one for identical states.
pub fn revival_fidelity(a: &PlanarWignerState, b: &PlanarWignerState) -> Result<f64, PlanarError> {
    same_grid(a, b)?;
    let dot: f64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum();
    let na: f64 = a.values().iter().map(|x| x * x).sum();
    let nb: f64 = b.values().iter().map(|x| x * x).sum();
    Ok(dot / (na * nb).sqrt().max(f64::MIN_POSITIVE))
}

/// Circular distance of `α` from `center`.
fn angular_distance(alpha: f64, center: f64) -> f64 {
    let d = (alpha - center).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Interference-fringe contrast of a planar state relative to a reference state.
///
/// The fringes of a two-packet superposition sit at `α ≈ 0` and alternate in sign with `m`.
/// The probe measures, in the interaction frame, the L1 mass of the high-pass component
/// `h(m) = [2w(m) − w(m−1) − w(m+1)]/4` inside `|α| < 3σ`. Smooth structure in `m` is
/// suppressed and an alternating one passes unchanged, so free rotation leaves the contrast
/// at one and momentum diffusion washes it out.
#[derive(Debug, Clone)]
pub struct CoherenceProbe {
    params: PlanarParams,
    band: Vec<usize>,
    reference: f64,
}

impl CoherenceProbe {
    pub fn new(initial: &PlanarWignerState, sigma: f64, params: &PlanarParams) -> Result<Self, PlanarError> {
        params.validate()?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(PlanarError::InvalidParameter(format!("sigma = {sigma}")));
        }
        let band: Vec<usize> = (0..initial.n_alpha())
            .filter(|&j| angular_distance(initial.alpha(j), 0.0) < 3.0 * sigma)
            .collect();
        let mut probe = Self {
            params: *params,
            band,
            reference: 1.0,
        };
        let reference = probe.band_mass(&unshear(initial, params));
        if !(reference > 0.0) {
            return Err(PlanarError::InvalidParameter(
                "initial state has no interference structure near α = 0".into(),
            ));
        }
        probe.reference = reference;
        Ok(probe)
    }

    fn band_mass(&self, w: &PlanarWignerState) -> f64 {
        let m_max = w.m_max() as i64;
        let row = |m: i64, j: usize| if m.abs() > m_max { 0.0 } else { w.value(j, m) };
        let mut sum = 0.0;
        for m in w.m_values() {
            for &j in &self.band {
                sum += (2.0 * row(m, j) - row(m - 1, j) - row(m + 1, j)).abs() / 4.0;
            }
        }
        sum * w.d_alpha()
    }

    /// Fringe mass of `state` relative to the reference, clamped to `[0, 1]`.
    pub fn contrast(&self, state: &PlanarWignerState) -> f64 {
        (self.band_mass(&unshear(state, &self.params)) / self.reference).min(1.0)
    }
}

/// Interaction-frame angle marginal within `±π/4` of each packet centre `α = π/2` and
/// `α = 3π/2`, as a fraction of the same quantity for `initial`.
pub fn packet_retention(
    initial: &PlanarWignerState,
    state: &PlanarWignerState,
    params: &PlanarParams,
) -> Result<[f64; 2], PlanarError> {
    same_grid(initial, state)?;
    let window = |w: &PlanarWignerState, center: f64| -> f64 {
        let mut sum = 0.0;
        for j in 0..w.n_alpha() {
            if angular_distance(w.alpha(j), center) < PI / 4.0 {
                sum += w.m_values().map(|m| w.value(j, m)).sum::<f64>();
            }
        }
        sum * w.d_alpha()
    };
    let a = unshear(initial, params);
    let b = unshear(state, params);
    let mut out = [0.0; 2];
    for (o, c) in out.iter_mut().zip([PI / 2.0, 1.5 * PI]) {
        let base = window(&a, c);
        if !(base > 0.0) {
            return Err(PlanarError::InvalidParameter(format!("no initial mass near α = {c}")));
        }
        *o = window(&b, c) / base;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::{evolve_numeric, fig1b_packet, wigner_from_wavefunction};

    #[test]
    fn ground_state_diagnostics() {
        let g = PlanarWignerState::ground_state(32, 5).unwrap();
        let p = momentum_distribution(&g);
        assert_eq!(p.len(), 11);
        assert!((p[5] - 1.0).abs() < 1e-15);
        assert_eq!(mean_energy(&g, &PlanarParams::natural(1.0, 0.0).unwrap()), 0.0);
        assert_eq!(l1_distance(&g, &g).unwrap(), 0.0);
        assert!((revival_fidelity(&g, &g).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unshear_inverts_free_rotation() {
        let free = PlanarParams::natural(0.0, 0.0).unwrap();
        let w = wigner_from_wavefunction(&fig1b_packet(128, 0.1), 30).unwrap();
        let moved = evolve_numeric(&w, &free, 0.7, 0.1).unwrap();
        assert!(l1_distance(&moved, &w).unwrap() > 0.1);
        let back = l1_distance(&unshear(&moved, &free), &w).unwrap();
        // only the Nyquist column, which a real grid cannot translate, is lost
        assert!(back < 1e-7, "{back}");
    }

    #[test]
    fn contrast_is_one_for_free_motion_and_drops_with_diffusion() {
        let sigma = 0.1;
        let w = wigner_from_wavefunction(&fig1b_packet(128, sigma), 40).unwrap();
        let free = PlanarParams::natural(0.0, 0.0).unwrap();
        let probe = CoherenceProbe::new(&w, sigma, &free).unwrap();
        assert!((probe.contrast(&w) - 1.0).abs() < 1e-12);
        let later = evolve_numeric(&w, &free, 1.3, 0.1).unwrap();
        assert!(probe.contrast(&later) > 0.99);

        let noisy = PlanarParams::natural(10.0, 0.0).unwrap();
        let probe = CoherenceProbe::new(&w, sigma, &noisy).unwrap();
        let later = evolve_numeric(&w, &noisy, 0.05 * PI, 0.01).unwrap();
        assert!(probe.contrast(&later) < 0.1, "{}", probe.contrast(&later));
        let kept = packet_retention(&w, &later, &noisy).unwrap();
        assert!(kept.iter().all(|&r| r > 0.9), "{kept:?}");
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = PlanarWignerState::ground_state(32, 5).unwrap();
        let b = PlanarWignerState::ground_state(64, 5).unwrap();
        assert!(l1_distance(&a, &b).is_err());
        assert!(revival_fidelity(&a, &b).is_err());
    }
}
