use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{check_grid, PlanarError, PlanarWignerState};

/// Largest tolerated `|Im w|` relative to `max |w|`.
const IMAGINARY_TOLERANCE: f64 = 1e-8;

/// Wigner function `w(α, m) = (1/2π) ∫_{−π}^{π} dα′ e^{imα′} ψ(α − α′/2) ψ*(α + α′/2)` of a
/// wavefunction sampled at `αⱼ = 2πj/N`.
///
/// The half-grid values of `ψ` come from band-limited (Fourier) interpolation, the `α′`
/// integral is the trapezoid rule on the `N` points of `[−π, π]`, and the result is
/// truncated to `|m| ≤ m_max` and renormalized.
pub fn wigner_from_wavefunction(psi: &[Complex64], m_max: usize) -> Result<PlanarWignerState, PlanarError> {
    let n = psi.len();
    check_grid(n, m_max)?;
    if m_max >= n / 2 {
        return Err(PlanarError::InvalidParameter(format!(
            "m_max = {m_max} must be below n_alpha/2 = {}",
            n / 2
        )));
    }
    let d_alpha = 2.0 * PI / n as f64;
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * d_alpha;
    if (norm - 1.0).abs() > 1e-9 {
        return Err(PlanarError::NotNormalized(norm));
    }

    let psi2 = interpolate_to_double_grid(psi);
    let two_n = 2 * n;
    let rows = 2 * m_max + 1;
    let mut values = vec![0.0; n * rows];
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    let mut worst_imag: f64 = 0.0;
    let mut worst_real: f64 = 0.0;
    let half = (n / 2) as i64;
    for j in 0..n {
        // g(j′) = ψ(αⱼ − α′/2) ψ*(αⱼ + α′/2) with α′ = 2πj′/N, stored at index j′ mod N
        for jp in -half..half {
            let minus = (2 * j as i64 - jp).rem_euclid(two_n as i64) as usize;
            let plus = (2 * j as i64 + jp).rem_euclid(two_n as i64) as usize;
            let mut v = psi2[minus] * psi2[plus].conj();
            if jp == -half {
                // trapezoid: both endpoints α′ = ±π, whose values are complex conjugates
                v = Complex64::new(v.re, 0.0);
            }
            g[jp.rem_euclid(n as i64) as usize] = v;
        }
        // Σ_{j′} e^{i m α′} g(j′) is an inverse DFT in j′
        fft.process(&mut g);
        for (mi, m) in (-(m_max as i64)..=m_max as i64).enumerate() {
            let c = g[m.rem_euclid(n as i64) as usize] / n as f64;
            worst_imag = worst_imag.max(c.im.abs());
            worst_real = worst_real.max(c.re.abs());
            values[mi * n + j] = c.re;
        }
    }
    if worst_imag > IMAGINARY_TOLERANCE * worst_real.max(f64::MIN_POSITIVE) {
        return Err(PlanarError::ImaginaryResidue(worst_imag));
    }
    let total: f64 = values.iter().sum::<f64>() * d_alpha;
    for v in &mut values {
        *v /= total;
    }
    PlanarWignerState::from_values(n, m_max, values, 0.0)
}

/// Values of the trigonometric interpolant of `psi` on the grid of spacing `π/N`.
fn interpolate_to_double_grid(psi: &[Complex64]) -> Vec<Complex64> {
    let n = psi.len();
    let mut planner = FftPlanner::new();
    let mut spec = psi.to_vec();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut padded = vec![Complex64::new(0.0, 0.0); 2 * n];
    padded[..n / 2].copy_from_slice(&spec[..n / 2]);
    padded[n + n / 2 + 1..].copy_from_slice(&spec[n / 2 + 1..]);
    // split the Nyquist mode symmetrically so real data stay real
    padded[n / 2] = spec[n / 2] * 0.5;
    padded[2 * n - n / 2] = spec[n / 2] * 0.5;
    planner.plan_fft_inverse(2 * n).process(&mut padded);
    for v in &mut padded {
        *v /= n as f64;
    }
    padded
}

/// `ψ(α) ∝ exp(−cos²α / 4σ²)`, normalized on the grid: two lobes at `α = ±π/2` whose
/// interference fringes sit around `α = 0` and `α = π`.
pub fn fig1b_packet(n_alpha: usize, sigma: f64) -> Vec<Complex64> {
    let d_alpha = 2.0 * PI / n_alpha as f64;
    let raw: Vec<f64> = (0..n_alpha)
        .map(|j| {
            let c = (j as f64 * d_alpha).cos();
            (-c * c / (4.0 * sigma * sigma)).exp()
        })
        .collect();
    let norm = (raw.iter().map(|v| v * v).sum::<f64>() * d_alpha).sqrt();
    raw.into_iter().map(|v| Complex64::new(v / norm, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_wave(n: usize, k: i64) -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), k as f64 * 2.0 * PI * j as f64 / n as f64))
            .collect()
    }

    #[test]
    fn uniform_state_is_the_ground_state() {
        let w = wigner_from_wavefunction(&plane_wave(64, 0), 10).unwrap();
        let g = PlanarWignerState::ground_state(64, 10).unwrap();
        for (a, b) in w.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_waves_occupy_one_row() {
        for k in [-7i64, -1, 1, 3, 9] {
            let w = wigner_from_wavefunction(&plane_wave(64, k), 12).unwrap();
            for m in w.m_values() {
                for &v in w.row(m) {
                    if m == k {
                        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-13);
                    } else {
                        assert!(v.abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn packet_has_alternating_fringes_at_zero() {
        let psi = fig1b_packet(512, 0.06);
        let w = wigner_from_wavefunction(&psi, 128).unwrap();
        assert!((w.normalization() - 1.0).abs() < 1e-12);
        // fringes at α = 0 alternate in sign with m
        let signs: Vec<f64> = (-10..=10).map(|m| w.value(0, m).signum()).collect();
        assert!(signs.windows(2).all(|s| s[0] != s[1]), "{signs:?}");
        // the lobes are positive
        assert!(w.value(128, 0) > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let mut psi = plane_wave(64, 0);
        psi[0] *= 2.0;
        assert!(matches!(
            wigner_from_wavefunction(&psi, 8),
            Err(PlanarError::NotNormalized(_))
        ));
        assert!(wigner_from_wavefunction(&plane_wave(64, 0), 32).is_err());
        assert!(wigner_from_wavefunction(&plane_wave(48, 0)[..48], 8).is_err());
    }

    #[test]
    fn marginals_reproduce_density_and_momenta() {
        // a superposition of two plane waves has momentum marginal on its two rows
        let n = 64;
        let a = plane_wave(n, 2);
        let b = plane_wave(n, -3);
        let psi: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * 0.6 + y * 0.8).collect();
        let w = wigner_from_wavefunction(&psi, 10).unwrap();
        let p = |m: i64| w.row(m).iter().sum::<f64>() * w.d_alpha();
        assert!((p(2) - 0.36).abs() < 1e-13);
        assert!((p(-3) - 0.64).abs() < 1e-13);
    }
}
