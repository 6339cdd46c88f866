//! Modified Bessel functions of the first kind and spherical Bessel functions.

use thiserror::Error;

/// Largest argument for which the unscaled `I_ℓ(x)` is returned; beyond it use the
/// scaled variants.
pub const BESSEL_I_MAX_ARG: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("I_{order}({x}) overflows; use the exponentially scaled variant")]
    Overflow { order: i64, x: f64 },
    #[error("argument must be finite and non-negative, got {0}")]
    Domain(f64),
}

/// Exponentially scaled modified Bessel functions `e^{−|x|} I_ℓ(x)` for `ℓ = 0..=n_max`.
///
/// Ratios `r_ℓ = I_ℓ/I_{ℓ−1}` come from the backward recurrence
/// `r_ℓ = x / (2ℓ + x r_{ℓ+1})`, started far above both `n_max` and `|x|`; the absolute
/// scale follows from `e^{−x}[I₀(x) + 2 Σ_{ℓ≥1} I_ℓ(x)] = 1`. All quantities stay
/// bounded, so there is no overflow for any finite `x`.
pub fn bessel_i_scaled_seq(x: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let start = n_max + ax.ceil() as usize + 64 + (8.0 * ax.sqrt()).ceil() as usize;
    let mut ratios = vec![0.0; start + 1];
    let mut r = 0.0;
    for l in (1..=start).rev() {
        r = ax / (2.0 * l as f64 + ax * r);
        ratios[l] = r;
    }
    // products I_ℓ/I₀ and the normalization sum, largest-to-smallest is not needed:
    // all terms are positive
    let mut prod = 1.0;
    let mut sum = 1.0;
    let mut rel = Vec::with_capacity(n_max + 1);
    rel.push(1.0);
    for (l, ratio) in ratios.iter().enumerate().skip(1) {
        prod *= ratio;
        if l <= n_max {
            rel.push(prod);
        }
        sum += 2.0 * prod;
        if prod == 0.0 && l > n_max {
            break;
        }
    }
    let i0 = 1.0 / sum;
    for (l, v) in rel.into_iter().enumerate() {
        out[l] = v * i0;
    }
    if x < 0.0 {
        for (l, v) in out.iter_mut().enumerate() {
            if l % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `e^{−|x|} I_ℓ(x)` for any integer order (`I_{−ℓ} = I_ℓ`) and real argument.
pub fn bessel_i_scaled(order: i64, x: f64) -> f64 {
    let n = order.unsigned_abs() as usize;
    bessel_i_scaled_seq(x, n)[n]
}

/// Modified Bessel function `I_ℓ(x)` for `0 ≤ x ≤ 700`.
pub fn modified_bessel_i(order: i64, x: f64) -> Result<f64, SpecialError> {
    if !x.is_finite() || x < 0.0 {
        return Err(SpecialError::Domain(x));
    }
    if x > BESSEL_I_MAX_ARG {
        return Err(SpecialError::Overflow { order, x });
    }
    Ok(bessel_i_scaled(order, x) * x.exp())
}

/// Lattice heat kernel `e^{−2τ} I_ℓ(2τ)` for `ℓ = 0, 1, …` until it drops below `cutoff`
/// (always at least the `ℓ = 0` entry). These are the transition probabilities of a
/// symmetric continuous-time random walk on the integers with unit hopping rate per
/// direction after time `τ`.
pub fn lattice_heat_kernel(tau: f64, cutoff: f64) -> Vec<f64> {
    if tau <= 0.0 {
        return vec![1.0];
    }
    let x = 2.0 * tau;
    // enough headroom to reach any sensible cutoff
    let n = (x + 40.0 * x.sqrt() + 60.0).ceil() as usize;
    let vals = bessel_i_scaled_seq(x, n);
    let mut len = vals.len();
    while len > 1 && vals[len - 1] < cutoff {
        len -= 1;
    }
    vals[..len].to_vec()
}

/// Spherical Bessel function `j_ℓ(x)` for `ℓ ∈ {0, 1, 2}`, closed form with a power-series
/// branch near the origin where the closed forms cancel.
pub fn spherical_bessel_j(order: u32, x: f64) -> f64 {
    let ax = x.abs();
    let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
    let v = if ax < SERIES_SWITCH[order as usize] {
        spherical_bessel_series(order, ax)
    } else {
        let (s, c) = ax.sin_cos();
        match order {
            0 => s / ax,
            1 => (s / ax - c) / ax,
            2 => ((3.0 / (ax * ax) - 1.0) * s - 3.0 * c / ax) / ax,
            _ => panic!("spherical_bessel_j supports orders 0..=2, got {order}"),
        }
    };
    sign * v
}

/// Below these arguments the closed forms lose more than ~1e-13 to cancellation.
const SERIES_SWITCH: [f64; 3] = [1e-3, 0.1, 0.5];

/// `j_ℓ(x) = x^ℓ Σ_k (−x²/2)^k / (k! (2ℓ+2k+1)!!)`.
fn spherical_bessel_series(order: u32, x: f64) -> f64 {
    let mut dfact = 1.0;
    for k in 1..=order {
        dfact *= (2 * k + 1) as f64;
    }
    let mut term = x.powi(order as i32) / dfact;
    let mut sum = term;
    let half_x2 = 0.5 * x * x;
    for k in 1..40 {
        term *= -half_x2 / (k as f64 * (2 * (order as usize + k) + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}
