use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::spectral::{shear_phase, Spectrum};
use super::{PlanarError, PlanarParams, PlanarWignerState};
use crate::special::{bessel_i_scaled_seq, lattice_heat_kernel};

/// Heat-kernel entries below this value are dropped.
pub const KERNEL_CUTOFF: f64 = 1e-16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn require_no_d2(params: &PlanarParams) -> Result<(), PlanarError> {
    params.validate()?;
    if params.d2 != 0.0 {
        return Err(PlanarError::AnalyticRequiresNoD2(params.d2));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<(), PlanarError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(PlanarError::InvalidParameter(format!("time = {t}")));
    }
    Ok(())
}

/// Largest `|ℓ|` kept by the closed-form kernel: where `e^{−2τ}I_ℓ(2τ)` drops below
/// [`KERNEL_CUTOFF`]. Since `|c_k(ℓ)| ≤ e^{−2τ}I_ℓ(2τ)` this bound holds for every `k`.
fn kernel_order(params: &PlanarParams, t: f64) -> usize {
    let tau = params.d1 * t / (params.hbar * params.hbar);
    lattice_heat_kernel(tau, KERNEL_CUTOFF).len() - 1
}

/// Angular Fourier coefficients `c_k(ℓ) = ∫dα′ T_t(α′, ℓ) e^{−ikα′}` for `ℓ = −L..=L`
/// (index `ℓ + L`):
///
/// ```text
/// c_k(ℓ) = e^{−2τ} e^{iℓθ} I_ℓ(2τ·sinc θ),   τ = D⁽¹⁾t/ħ²,  θ = ħkt/2I.
/// ```
fn kernel_coefficients(k: f64, t: f64, params: &PlanarParams, l_max: usize) -> Vec<Complex64> {
    let tau = params.d1 * t / (params.hbar * params.hbar);
    let theta = params.hbar * k * t / (2.0 * params.inertia);
    let x = 2.0 * tau * sinc(theta);
    // e^{−2τ}I_ℓ(x) = e^{−(2τ−|x|)} · [e^{−|x|}I_ℓ(x)], and |x| ≤ 2τ
    let scaled = bessel_i_scaled_seq(x, l_max);
    let damp = (-(2.0 * tau - x.abs())).exp();
    let l = l_max as i64;
    (-l..=l)
        .map(|ell| {
            let mag = damp * scaled[ell.unsigned_abs() as usize];
            Complex64::from_polar(1.0, (ell as f64 * theta).rem_euclid(2.0 * PI)) * mag
        })
        .collect()
}

/// `T_t(α′, ℓ) = (1/2π) Σ_{|k|≤K} c_k(ℓ) e^{ikα′}` (partial sum with `K = k_max`).
///
/// The full kernel contains a `δ(α′)` part (weight `e^{−2τ}`, from `ℓ = 0`) and jumps, so
/// its Fourier series does not converge pointwise; `k_max` sets the resolution.
pub fn kernel_t(alpha_prime: f64, ell: i64, t: f64, params: &PlanarParams, k_max: usize) -> Result<f64, PlanarError> {
    require_no_d2(params)?;
    check_time(t)?;
    let l = ell.unsigned_abs() as usize;
    let coeff = |k: f64| kernel_coefficients(k, t, params, l)[(ell + l as i64) as usize];
    let mut sum = coeff(0.0).re;
    for k in 1..=k_max {
        let kf = k as f64;
        let phase = Complex64::from_polar(1.0, (kf * alpha_prime).rem_euclid(2.0 * PI));
        sum += 2.0 * (coeff(kf) * phase).re;
    }
    Ok(sum / (2.0 * PI))
}

/// Closed-form kernel tabulated on the angle grid, `T_t(αⱼ, ℓ)` for `|ℓ| ≤ L`, band-limited to
/// the `N/2` Fourier modes the grid resolves.
#[derive(Debug, Clone)]
pub struct PlanarKernel {
    params: PlanarParams,
    t: f64,
    n_alpha: usize,
    l_max: usize,
    /// Row `ℓ + L` holds `T_t(αⱼ, ℓ)`.
    table: Vec<f64>,
}

impl PlanarKernel {
    pub fn new(params: &PlanarParams, t: f64, n_alpha: usize) -> Result<Self, PlanarError> {
        require_no_d2(params)?;
        check_time(t)?;
        super::check_grid(n_alpha, 1)?;
        let l_max = kernel_order(params, t);
        let width = 2 * l_max + 1;
        let mut spectra = vec![vec![ZERO; n_alpha]; width];
        for k in 0..=n_alpha / 2 {
            let c = kernel_coefficients(k as f64, t, params, l_max);
            for (row, &ck) in spectra.iter_mut().zip(&c) {
                if k == 0 || k == n_alpha / 2 {
                    row[k] = Complex64::new(ck.re, 0.0);
                } else {
                    row[k] = ck;
                    row[n_alpha - k] = ck.conj();
                }
            }
        }
        let ifft = FftPlanner::new().plan_fft_inverse(n_alpha);
        let mut table = Vec::with_capacity(width * n_alpha);
        for mut row in spectra {
            ifft.process(&mut row);
            table.extend(row.iter().map(|c| c.re / (2.0 * PI)));
        }
        Ok(Self {
            params: *params,
            t,
            n_alpha,
            l_max,
            table,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    /// Cutoff `L` of the `ℓ` range.
    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Cutoff `K = N/2` of the Fourier sum.
    pub fn k_max(&self) -> usize {
        self.n_alpha / 2
    }

    /// `T_t(αⱼ, ℓ)` for all `j`; zero rows beyond `L` are not stored.
    pub fn row(&self, ell: i64) -> Option<&[f64]> {
        if ell.unsigned_abs() as usize > self.l_max {
            return None;
        }
        let i = (ell + self.l_max as i64) as usize;
        Some(&self.table[i * self.n_alpha..(i + 1) * self.n_alpha])
    }

    /// `Σ_ℓ Σ_j T_t(αⱼ, ℓ) Δα`, equal to one up to the dropped kernel tail.
    pub fn normalization_sum(&self) -> f64 {
        self.table.iter().sum::<f64>() * 2.0 * PI / self.n_alpha as f64
    }

    /// `w_t(α, m) = Σ_ℓ Σ_j w₀(α − ħmt/I − α′ⱼ, m − ℓ) T_t(α′ⱼ, ℓ) Δα`, evaluated as a
    /// product in the angular Fourier variable (exact for the circular convolution on the
    /// grid). The shear by `ħmt/I` is a spectral translation.
    pub fn apply(&self, state0: &PlanarWignerState) -> Result<PlanarWignerState, PlanarError> {
        if state0.n_alpha() != self.n_alpha {
            return Err(PlanarError::InvalidParameter(format!(
                "kernel grid {} does not match state grid {}",
                self.n_alpha,
                state0.n_alpha()
            )));
        }
        let n = self.n_alpha;
        let fft = FftPlanner::new().plan_fft_forward(n);
        let d_alpha = 2.0 * PI / n as f64;
        // coeffs[ℓ + L][k] = c_k(ℓ) recovered from the table
        let coeffs: Vec<Vec<Complex64>> = self
            .table
            .chunks(n)
            .map(|row| {
                let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v * d_alpha, 0.0)).collect();
                fft.process(&mut buf);
                buf.truncate(n / 2 + 1);
                buf
            })
            .collect();
        let mut spec = Spectrum::from_state(state0);
        let m_max = spec.m_max as i64;
        let l = self.l_max as i64;
        let shear = self.params.shear_rate() * self.t;
        spec.columns.par_iter_mut().enumerate().for_each(|(k, col)| {
            if col.iter().all(|c| *c == ZERO) {
                return;
            }
            let old = col.clone();
            for (mi, out) in col.iter_mut().enumerate() {
                let m = mi as i64 - m_max;
                let mut acc = ZERO;
                for ell in (-l).max(m - m_max)..=l.min(m + m_max) {
                    acc += coeffs[(ell + l) as usize][k] * old[(m - ell + m_max) as usize];
                }
                *out = acc * shear_phase(k as f64, m as f64, shear);
            }
        });
        let out = spec.to_state(state0.t() + self.t);
        out.check_boundary()?;
        Ok(out)
    }
}

/// Closed-form propagation over time `t` (requires `D⁽²⁾ = 0`).
pub fn evolve_analytic(
    state0: &PlanarWignerState,
    params: &PlanarParams,
    t: f64,
) -> Result<PlanarWignerState, PlanarError> {
    PlanarKernel::new(params, t, state0.n_alpha())?.apply(state0)
}

/// Symmetric one-step diffusion kernel `g(|Δm|)`: the `D⁽¹⁾` lattice heat kernel convolved
/// with the stride-2 `D⁽²⁾` one.
fn diffusion_kernel(params: &PlanarParams, h: f64) -> Vec<f64> {
    let hb2 = params.hbar * params.hbar;
    let k1 = lattice_heat_kernel(params.d1 * h / hb2, KERNEL_CUTOFF);
    let k2 = lattice_heat_kernel(params.d2 * h / (4.0 * hb2), KERNEL_CUTOFF);
    let l1 = k1.len() as i64 - 1;
    let l2 = k2.len() as i64 - 1;
    let half = (l1 + 2 * l2) as usize;
    let mut g = vec![0.0; half + 1];
    for a in -l1..=l1 {
        for b in -l2..=l2 {
            let d = a + 2 * b;
            if d >= 0 {
                g[d as usize] += k1[a.unsigned_abs() as usize] * k2[b.unsigned_abs() as usize];
            }
        }
    }
    g
}

/// `out[i] = Σ_d g(|d|) col[i − d]`, with zero outside `|m| ≤ M`.
fn convolve(col: &[Complex64], g: &[f64], out: &mut [Complex64]) {
    let n = col.len() as i64;
    let l = g.len() as i64 - 1;
    for (i, o) in out.iter_mut().enumerate() {
        let i = i as i64;
        let mut acc = col[i as usize] * g[0];
        for d in 1..=l {
            let lo = i - d;
            let hi = i + d;
            let mut pair = ZERO;
            if lo >= 0 {
                pair += col[lo as usize];
            }
            if hi < n {
                pair += col[hi as usize];
            }
            acc += pair * g[d as usize];
        }
        *o = acc;
    }
}

/// Strang-split propagation over `t_final`: half shear, then alternating exact diffusion
/// and exact shear sub-steps, ending with a half shear.
///
/// The step is shrunk to `t_final / ⌈t_final/dt⌉` so that the last step lands on
/// `t_final`.
pub fn evolve_numeric(
    state: &PlanarWignerState,
    params: &PlanarParams,
    t_final: f64,
    dt: f64,
) -> Result<PlanarWignerState, PlanarError> {
    params.validate()?;
    check_time(t_final)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PlanarError::InvalidParameter(format!("dt = {dt}")));
    }
    if t_final == 0.0 {
        return Ok(state.clone());
    }
    let steps = ((t_final / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;
    let g = diffusion_kernel(params, h);
    let rate = params.shear_rate();
    let mut spec = Spectrum::from_state(state);
    let m_max = spec.m_max as i64;
    spec.columns.par_iter_mut().enumerate().for_each(|(k, col)| {
        if col.iter().all(|c| *c == ZERO) {
            return;
        }
        let kf = k as f64;
        let phases =
            |s: f64| -> Vec<Complex64> { (-m_max..=m_max).map(|m| shear_phase(kf, m as f64, rate * s)).collect() };
        let (half, full) = if k == 0 {
            (Vec::new(), Vec::new())
        } else {
            (phases(0.5 * h), phases(h))
        };
        let apply = |col: &mut [Complex64], p: &[Complex64]| {
            for (c, ph) in col.iter_mut().zip(p) {
                *c *= ph;
            }
        };
        let mut tmp = vec![ZERO; col.len()];
        apply(col, &half);
        for step in 0..steps {
            convolve(col, &g, &mut tmp);
            col.copy_from_slice(&tmp);
            apply(col, if step + 1 == steps { &half } else { &full });
        }
    });
    let out = spec.to_state(state.t() + t_final);
    out.check_boundary()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_i_scaled;

    fn natural(d1: f64) -> PlanarParams {
        PlanarParams::natural(d1, 0.0).unwrap()
    }

    #[test]
    fn kernel_normalization_is_one() {
        for (d1, t) in [(1.0, 0.3), (10.0, 0.5 * PI / 10.0), (10.0, 3.75 * PI / 10.0)] {
            let k = PlanarKernel::new(&natural(d1), t, 256).unwrap();
            assert!((k.normalization_sum() - 1.0).abs() < 1e-12, "{}", k.normalization_sum());
        }
    }

    #[test]
    fn zero_time_kernel_is_identity() {
        let p = natural(3.0);
        let k = PlanarKernel::new(&p, 0.0, 64).unwrap();
        assert_eq!(k.l_max(), 0);
        let row = k.row(0).unwrap();
        assert!((row[0] * 2.0 * PI / 64.0 - 1.0).abs() < 1e-14);
        assert!(row[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn pointwise_kernel_matches_table_at_full_band() {
        let p = natural(2.0);
        let t = 0.4;
        let k = PlanarKernel::new(&p, t, 64).unwrap();
        for ell in [-2i64, 0, 1, 3] {
            for j in [0usize, 5, 17, 40] {
                let alpha = j as f64 * 2.0 * PI / 64.0;
                // the table treats the Nyquist mode as a single real term, half of the pair
                let full = kernel_t(alpha, ell, t, &p, 31).unwrap();
                let c32 = kernel_coefficients(32.0, t, &p, ell.unsigned_abs() as usize)[(ell + ell.abs()) as usize];
                let nyq = (c32 * Complex64::from_polar(1.0, 32.0 * alpha)).re / (2.0 * PI);
                assert!((full + nyq - k.row(ell).unwrap()[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_t_integrates_weakly_to_delta() {
        // ∫ T_t(α′, ℓ) f(α′) dα′ → f(0) δ_ℓ0 for small t, with f(α′) = e^{cos α′}
        let p = natural(1.0);
        let t = 1e-3;
        let n = 2048;
        let d = 2.0 * PI / n as f64;
        let integral = |ell| -> f64 {
            (0..n)
                .map(|j| {
                    let a = j as f64 * d;
                    kernel_t(a, ell, t, &p, 64).unwrap() * a.cos().exp() * d
                })
                .sum()
        };
        assert!((integral(0) - 1f64.exp()).abs() < 1e-2);
        assert!(integral(1).abs() < 1e-2);
    }

    #[test]
    fn kernel_t_rejects_d2() {
        let p = PlanarParams::natural(1.0, 0.5).unwrap();
        assert!(matches!(
            kernel_t(0.0, 0, 1.0, &p, 4),
            Err(PlanarError::AnalyticRequiresNoD2(_))
        ));
    }

    #[test]
    fn both_propagators_give_heat_kernel_momenta() {
        let p = natural(1.0);
        let g = PlanarWignerState::ground_state(64, 40).unwrap();
        let t = 0.5;
        let a = evolve_analytic(&g, &p, t).unwrap();
        let b = evolve_numeric(&g, &p, t, 0.01).unwrap();
        for m in -5i64..=5 {
            let exact = bessel_i_scaled(m, 2.0 * t);
            let pa: f64 = a.row(m).iter().sum::<f64>() * a.d_alpha();
            let pb: f64 = b.row(m).iter().sum::<f64>() * b.d_alpha();
            assert!((pa - exact).abs() < 1e-13);
            assert!((pb - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn free_shear_revives() {
        let p = natural(0.0);
        let mut values = vec![0.0; 32 * 9];
        // arbitrary data away from the boundary rows
        for (i, v) in values.iter_mut().enumerate().skip(32).take(32 * 7) {
            *v = ((i * 7919) % 13) as f64 / 100.0;
        }
        let s = PlanarWignerState::from_values(32, 4, values, 0.0).unwrap();
        let r = evolve_numeric(&s, &p, p.revival_time(), 0.05).unwrap();
        for (a, b) in r.values().iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn small_grid_is_reported() {
        let p = natural(10.0);
        let g = PlanarWignerState::ground_state(16, 4).unwrap();
        assert!(matches!(
            evolve_numeric(&g, &p, 1.0, 0.1),
            Err(PlanarError::GridTooSmall { .. })
        ));
        assert!(matches!(
            evolve_analytic(&g, &p, 1.0),
            Err(PlanarError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn diffusion_kernel_has_the_generator_moments() {
        let p = PlanarParams::natural(0.7, 0.4).unwrap();
        let h = 0.05;
        let g = diffusion_kernel(&p, h);
        let mass: f64 = g[0] + 2.0 * g[1..].iter().sum::<f64>();
        let second: f64 = 2.0 * g.iter().enumerate().map(|(d, v)| (d * d) as f64 * v).sum::<f64>();
        assert!((mass - 1.0).abs() < 1e-14);
        assert!((second - 2.0 * (0.7 + 0.4) * h).abs() < 1e-13);
    }
}
