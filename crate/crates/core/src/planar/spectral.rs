//! Angular Fourier representation `w(α, m) = Σ_k ŵ(k, m) e^{ikα}`, stored for
//! `k = 0..=N/2`; negative `k` follow from realness.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::PlanarWignerState;

#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    pub n_alpha: usize,
    pub m_max: usize,
    /// `columns[k][m + M] = ŵ(k, m)`.
    pub columns: Vec<Vec<Complex64>>,
}

impl Spectrum {
    pub fn from_state(state: &PlanarWignerState) -> Self {
        let n = state.n_alpha();
        let rows = 2 * state.m_max() + 1;
        let fft = FftPlanner::new().plan_fft_forward(n);
        let mut columns = vec![vec![Complex64::new(0.0, 0.0); rows]; n / 2 + 1];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let scale = 1.0 / n as f64;
        for (mi, m) in state.m_values().enumerate() {
            let row = state.row(m);
            if row.iter().all(|&v| v == 0.0) {
                continue;
            }
            for (b, &v) in buf.iter_mut().zip(row) {
                *b = Complex64::new(v, 0.0);
            }
            fft.process(&mut buf);
            for (k, col) in columns.iter_mut().enumerate() {
                col[mi] = buf[k] * scale;
            }
        }
        Self {
            n_alpha: n,
            m_max: state.m_max(),
            columns,
        }
    }

    pub fn to_state(&self, t: f64) -> PlanarWignerState {
        let n = self.n_alpha;
        let rows = 2 * self.m_max + 1;
        let ifft = FftPlanner::new().plan_fft_inverse(n);
        let mut values = vec![0.0; n * rows];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for mi in 0..rows {
            if self.columns.iter().all(|c| c[mi] == Complex64::new(0.0, 0.0)) {
                continue;
            }
            buf[0] = Complex64::new(self.columns[0][mi].re, 0.0);
            for k in 1..n / 2 {
                buf[k] = self.columns[k][mi];
                buf[n - k] = self.columns[k][mi].conj();
            }
            // the ±N/2 modes coincide on the grid; their average is the real part
            buf[n / 2] = Complex64::new(self.columns[n / 2][mi].re, 0.0);
            ifft.process(&mut buf);
            for (v, b) in values[mi * n..(mi + 1) * n].iter_mut().zip(&buf) {
                *v = b.re;
            }
        }
        PlanarWignerState::from_values(n, self.m_max, values, t).expect("grid shape is preserved")
    }

    /// Multiplies column `k` by `e^{−ik(ħ/I)·m·s}` for every `m`, i.e. translates row `m`
    /// by `(ħ/I)·m·s` in `α`.
    pub fn shear(&mut self, rate_times_s: f64) {
        let m_max = self.m_max as i64;
        for (k, col) in self.columns.iter_mut().enumerate() {
            if k == 0 {
                continue;
            }
            for (mi, c) in col.iter_mut().enumerate() {
                *c *= shear_phase(k as f64, (mi as i64 - m_max) as f64, rate_times_s);
            }
        }
    }
}

/// `e^{−i k m s}` with the angle reduced modulo 2π before evaluation.
pub(crate) fn shear_phase(k: f64, m: f64, s: f64) -> Complex64 {
    let angle = (-(k * m) * s).rem_euclid(std::f64::consts::TAU);
    Complex64::from_polar(1.0, angle)
}
