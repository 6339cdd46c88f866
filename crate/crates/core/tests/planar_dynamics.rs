use std::f64::consts::PI;

use rotodiff_core::planar::*;

/// `e^{−x} I_m(x)` from the defining power series, summed in log space.
fn scaled_bessel_series(m: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = (m as f64 * half.ln() - x - ln_factorial(m)).exp();
    let mut sum = term;
    for j in 1..400 {
        term *= half * half / (j as f64 * (j + m) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn natural(d1: f64, d2: f64) -> PlanarParams {
    PlanarParams::natural(d1, d2).unwrap()
}

#[test]
fn series_oracle_sanity() {
    assert!((scaled_bessel_series(0, 1.0) * 1f64.exp() - 1.2660658777520084).abs() < 1e-15);
    assert_eq!(scaled_bessel_series(1, 0.0), 0.0);
}

#[test]
fn ground_state_momenta_follow_the_closed_form() {
    let g = PlanarWignerState::ground_state(512, 128).unwrap();
    let p = natural(1.0, 0.0);
    for x in [0.1, 1.0, 10.0] {
        let t = x / 2.0;
        let a = momentum_distribution(&evolve_analytic(&g, &p, t).unwrap());
        let n = momentum_distribution(&evolve_numeric(&g, &p, t, 1e-2).unwrap());
        for (i, m) in (-128i64..=128).enumerate() {
            let exact = scaled_bessel_series(m.unsigned_abs() as u32, x);
            assert!((a[i] - exact).abs() < 1e-8, "analytic x={x} m={m}");
            assert!((n[i] - exact).abs() < 1e-6, "numeric x={x} m={m}");
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn mean_energy_grows_linearly() {
    let g = PlanarWignerState::ground_state(64, 128).unwrap();
    let inertia = 2.5;
    let hbar = 0.8;
    let p = PlanarParams::new(inertia, 1.7, 0.0, hbar).unwrap();
    for t in [0.05, 0.5, 2.0, 5.0] {
        let e = mean_energy(&evolve_analytic(&g, &p, t).unwrap(), &p);
        let expect = p.d1 * t / inertia;
        assert!((e - expect).abs() < 1e-8 * expect, "t={t}: {e} vs {expect}");
    }
    let p = PlanarParams::new(inertia, 1.7, 0.9, hbar).unwrap();
    for t in [0.5, 2.0] {
        let e = mean_energy(&evolve_numeric(&g, &p, t, 0.05).unwrap(), &p);
        let expect = (p.d1 + p.d2) * t / inertia;
        assert!((e - expect).abs() < 1e-6 * expect, "t={t}: {e} vs {expect}");
    }
}

#[test]
fn propagators_agree_on_the_two_packet_state() {
    let p = natural(10.0, 0.0);
    let w = wigner_from_wavefunction(&fig1b_packet(512, 0.06), 128).unwrap();
    for f in [0.1, 0.5, 1.0] {
        let t = f * PI / 10.0;
        let a = evolve_analytic(&w, &p, t).unwrap();
        let n = evolve_numeric(&w, &p, t, 3e-4).unwrap();
        let d = l1_distance(&a, &n).unwrap();
        assert!(d < 1e-6, "t={t}: L1 {d:e}");
        assert!((a.normalization() - 1.0).abs() < 1e-9);
        assert!((n.normalization() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn evolution_preserves_parity_symmetry() {
    let p = natural(4.0, 0.0);
    let w = wigner_from_wavefunction(&fig1b_packet(256, 0.1), 64).unwrap();
    let pm = momentum_distribution(&evolve_analytic(&w, &p, 0.3).unwrap());
    let n = pm.len();
    for i in 0..n {
        assert!((pm[i] - pm[n - 1 - i]).abs() < 1e-12);
    }
}

/// Right-hand side of the phase-space master equation with a dense periodic spectral
/// differentiation matrix in α.
struct DenseGenerator {
    n: usize,
    m_max: i64,
    deriv: Vec<f64>,
    params: PlanarParams,
}

impl DenseGenerator {
    fn new(n: usize, m_max: usize, params: PlanarParams) -> Self {
        let h = 2.0 * PI / n as f64;
        let mut deriv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = i as f64 - j as f64;
                    let sign = if (i + n - j).is_multiple_of(2) { 1.0 } else { -1.0 };
                    deriv[i * n + j] = 0.5 * sign / (d * h / 2.0).tan();
                }
            }
        }
        Self {
            n,
            m_max: m_max as i64,
            deriv,
            params,
        }
    }

    fn rhs(&self, w: &[f64], out: &mut [f64]) {
        let n = self.n;
        let hb2 = self.params.hbar * self.params.hbar;
        let c1 = self.params.d1 / hb2;
        let c2 = self.params.d2 / (4.0 * hb2);
        let get = |m: i64, j: usize| {
            if m.abs() > self.m_max {
                0.0
            } else {
                w[(m + self.m_max) as usize * n + j]
            }
        };
        for m in -self.m_max..=self.m_max {
            let r = (m + self.m_max) as usize;
            let vel = self.params.hbar * m as f64 / self.params.inertia;
            for i in 0..n {
                let row = &w[r * n..(r + 1) * n];
                let d: f64 = (0..n).map(|j| self.deriv[i * n + j] * row[j]).sum();
                let w0 = get(m, i);
                out[r * n + i] = -vel * d
                    + c1 * (get(m + 1, i) - 2.0 * w0 + get(m - 1, i))
                    + c2 * (get(m + 2, i) - 2.0 * w0 + get(m - 2, i));
            }
        }
    }

    fn rk4(&self, w: &mut [f64], t: f64, steps: usize) {
        let h = t / steps as f64;
        let len = w.len();
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
        );
        for _ in 0..steps {
            self.rhs(w, &mut k1);
            for i in 0..len {
                tmp[i] = w[i] + 0.5 * h * k1[i];
            }
            self.rhs(&tmp, &mut k2);
            for i in 0..len {
                tmp[i] = w[i] + 0.5 * h * k2[i];
            }
            self.rhs(&tmp, &mut k3);
            for i in 0..len {
                tmp[i] = w[i] + h * k3[i];
            }
            self.rhs(&tmp, &mut k4);
            for i in 0..len {
                w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
}

#[test]
fn splitting_matches_a_dense_rk4_integration() {
    let (n, m_max) = (64, 16);
    let w0 = wigner_from_wavefunction(&fig1b_packet(n, 0.2), m_max).unwrap();
    for params in [natural(1.0, 0.0), natural(0.6, 0.4)] {
        let t = 0.5;
        let gen = DenseGenerator::new(n, m_max, params);
        let mut w = w0.values().to_vec();
        gen.rk4(&mut w, t, 2500);
        let oracle = PlanarWignerState::from_values(n, m_max, w, t).unwrap();
        let split = evolve_numeric(&w0, &params, t, 1e-3).unwrap();
        let d = l1_distance(&oracle, &split).unwrap();
        assert!(d < 1e-5, "{params:?}: L1 {d:e}");
    }
}

#[test]
fn momentum_distribution_approaches_a_gaussian() {
    let g = PlanarWignerState::ground_state(16, 128).unwrap();
    let p = natural(1.0, 0.0);
    let mut last = f64::INFINITY;
    for x in [0.5, 2.0, 5.0, 20.0, 100.0] {
        let pm = momentum_distribution(&evolve_analytic(&g, &p, x / 2.0).unwrap());
        let gauss: Vec<f64> = (-128i64..=128).map(|m| (-(m * m) as f64 / (2.0 * x)).exp()).collect();
        let z: f64 = gauss.iter().sum();
        let tvd: f64 = pm.iter().zip(&gauss).map(|(a, b)| (a - b / z).abs()).sum::<f64>() / 2.0;
        assert!(tvd < last, "x={x}: {tvd} after {last}");
        last = tvd;
    }
    assert!(last < 0.01, "{last}");
}

#[test]
fn free_rotor_revives() {
    let p = natural(0.0, 0.0);
    let w = wigner_from_wavefunction(&fig1b_packet(256, 0.1), 64).unwrap();
    let tr = p.revival_time();
    let n = evolve_numeric(&w, &p, tr, 0.01).unwrap();
    let a = evolve_analytic(&w, &p, tr).unwrap();
    for s in [&n, &a] {
        let worst = s
            .values()
            .iter()
            .zip(w.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst:e}");
        assert!(revival_fidelity(s, &w).unwrap() > 0.999);
    }
    // the packet has only even momenta, so it already revives at tr/2 but not at tr/4
    let quarter = evolve_numeric(&w, &p, tr / 4.0, 0.01).unwrap();
    assert!(revival_fidelity(&quarter, &w).unwrap() < 0.999);
}

#[test]
fn diffusion_washes_out_fringes_and_keeps_packets() {
    let sigma = 0.06;
    let d1 = 10.0;
    let p = natural(d1, 0.0);
    let w = wigner_from_wavefunction(&fig1b_packet(512, sigma), 128).unwrap();
    let t_b = 0.5 * PI / d1;
    let probe = CoherenceProbe::new(&w, sigma, &p).unwrap();
    let later = evolve_analytic(&w, &p, t_b).unwrap();
    let c = probe.contrast(&later);
    assert!(c < 0.1, "contrast {c}");
    let kept = packet_retention(&w, &later, &p).unwrap();
    assert!(kept.iter().all(|&r| r > 0.9), "{kept:?}");
}

#[test]
fn decoherence_suppresses_the_half_revival() {
    let sigma = 0.06;
    let w = wigner_from_wavefunction(&fig1b_packet(512, sigma), 128).unwrap();
    let t = PI;
    let free = natural(0.0, 0.0);
    let c_free = CoherenceProbe::new(&w, sigma, &free)
        .unwrap()
        .contrast(&evolve_analytic(&w, &free, t).unwrap());
    assert!(c_free > 0.99);
    for d1 in [0.01, 1.0] {
        let p = natural(d1, 0.0);
        let c = CoherenceProbe::new(&w, sigma, &p)
            .unwrap()
            .contrast(&evolve_analytic(&w, &p, t).unwrap());
        assert!(c < c_free, "D1={d1}: {c}");
        if d1 >= 1.0 {
            assert!(c < 0.5 * c_free);
        }
    }
}
