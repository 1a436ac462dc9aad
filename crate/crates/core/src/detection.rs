//! Receiver constants and photon-count statistics.
//!
//! The rate formulas only consume moments. The integer-valued Laguerre and
//! Poisson machinery here is used to validate the moment-matched model.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::ensemble::CrosstalkMatrix;
use crate::error::{Error, Result};
use crate::modes::ModeState;

/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    eta: f64,
    tau: f64,
    temperature: f64,
    load_resistance: f64,
    wavelength: f64,
}

impl DetectionParams {
    pub fn new(eta: f64, tau: f64, temperature: f64, load_resistance: f64, wavelength: f64) -> Result<Self> {
        let named = [
            ("quantum efficiency", eta),
            ("symbol duration", tau),
            ("temperature", temperature),
            ("load resistance", load_resistance),
            ("wavelength", wavelength),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be > 0, got {v}")));
            }
        }
        if eta > 1.0 {
            return Err(Error::config(format!("quantum efficiency must be <= 1, got {eta}")));
        }
        Ok(Self {
            eta,
            tau,
            temperature,
            load_resistance,
            wavelength,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn load_resistance(&self) -> f64 {
        self.load_resistance
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
}

impl Default for DetectionParams {
    /// η = 1, τ = 1 ns, 300 K, 50 Ω, 850 nm.
    fn default() -> Self {
        Self::new(1.0, 1e-9, 300.0, 50.0, 850e-9).expect("valid defaults")
    }
}

/// μ = ητ/(hν): photon counts per symbol per watt of received power.
pub fn photon_conversion_mu(params: &DetectionParams) -> f64 {
    params.eta * params.tau * params.wavelength / (PLANCK * SPEED_OF_LIGHT)
}

/// Thermal noise variance in counts², 2·k_B·T·τ/(R_L·q²).
pub fn thermal_variance(params: &DetectionParams) -> f64 {
    2.0 * BOLTZMANN * params.temperature * params.tau
        / (params.load_resistance * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE)
}

/// Mean signal count, mean interference count and thermal variance of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonStats {
    pub m_s: f64,
    pub m_c: f64,
    pub sigma_th2: f64,
}

impl PhotonStats {
    pub fn new(m_s: f64, m_c: f64, sigma_th2: f64) -> Result<Self> {
        if !(m_s >= 0.0 && m_c >= 0.0 && sigma_th2 >= 0.0) {
            return Err(Error::domain(format!(
                "photon statistics must be >= 0, got ({m_s}, {m_c}, {sigma_th2})"
            )));
        }
        Ok(Self { m_s, m_c, sigma_th2 })
    }

    pub fn moments(&self) -> (f64, f64) {
        count_moments(self.m_s, self.m_c, self.sigma_th2)
    }
}

/// Per-quadrature interference variance σ_c² and mean interference count m_c = 2μσ_c²
/// of received channel `i` when `tx_set` is transmitted with total power `pt`.
pub fn interference_stats(
    i: ModeState,
    tx_set: &[ModeState],
    x: &CrosstalkMatrix,
    pt: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    if !tx_set.contains(&i) {
        return Err(Error::domain(format!("channel {i} is not in the transmit set")));
    }
    if !(pt >= 0.0) {
        return Err(Error::domain(format!("transmit power must be >= 0, got {pt}")));
    }
    let leak = x.interference(i, i, tx_set)?;
    let sigma_c2 = pt / (2.0 * tx_set.len() as f64) * leak;
    Ok((sigma_c2, 2.0 * mu * sigma_c2))
}

fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Poisson probability mass, the `m_c → 0` limit of [`laguerre_pmf`].
pub fn poisson_pmf(n: i64, mean: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("count must be >= 0, got {n}")));
    }
    if mean == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let n = n as u64;
    Ok((n as f64 * mean.ln() - mean - ln_factorial(n)).exp())
}

/// ln L_j(−x) for j = 0..=n_max, with x ≥ 0. Every term of the recurrence is
/// positive there, so it is evaluated directly with periodic rescaling.
fn ln_laguerre_neg(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let (mut prev, mut cur, mut offset) = (0.0_f64, 1.0_f64, 0.0_f64);
    out.push(0.0);
    for k in 0..n_max {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        if cur > 1e200 {
            prev /= cur;
            offset += cur.ln();
            cur = 1.0;
        }
        out.push(offset + cur.ln());
    }
    out
}

/// Laguerre photon-count probabilities for n = 0..=n_max.
pub fn laguerre_pmf_series(n_max: usize, m_s: f64, m_c: f64) -> Result<Vec<f64>> {
    if !(m_s >= 0.0 && m_c >= 0.0) {
        return Err(Error::domain(format!("means must be >= 0, got ({m_s}, {m_c})")));
    }
    if m_c == 0.0 {
        return (0..=n_max as i64).map(|n| poisson_pmf(n, m_s)).collect();
    }
    let x = m_s / (m_c * (1.0 + m_c));
    let ln_l = ln_laguerre_neg(n_max, x);
    let (a, b) = (m_c.ln(), (1.0 + m_c).ln());
    let base = -m_s / (1.0 + m_c);
    Ok(ln_l
        .iter()
        .enumerate()
        .map(|(n, l)| (n as f64 * a - (n as f64 + 1.0) * b + base + l).exp())
        .collect())
}

/// Probability of `n` counts for signal mean `m_s` and Gaussian interference mean `m_c`.
/// With `m_c = 0` this is the Poisson law.
pub fn laguerre_pmf(n: i64, m_s: f64, m_c: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("count must be >= 0, got {n}")));
    }
    Ok(*laguerre_pmf_series(n as usize, m_s, m_c)?.last().expect("nonempty"))
}

/// Characteristic function Ψ(jω) of the Laguerre count.
pub fn laguerre_cf(omega: f64, m_s: f64, m_c: f64) -> Complex64 {
    let one_minus = Complex64::new(1.0 - omega.cos(), -omega.sin());
    let d = Complex64::new(1.0, 0.0) + one_minus * m_c;
    (-(one_minus * m_s) / d).exp() / d
}

/// Mean and variance of the detected count including thermal noise.
pub fn count_moments(m_s: f64, m_c: f64, sigma_th2: f64) -> (f64, f64) {
    let mean = m_s + m_c;
    (mean, mean + m_c * m_c + 2.0 * m_s * m_c + sigma_th2)
}

/// Variances of the signal-dependent (σ_Zs²) and signal-independent (σ_Z0²) noise terms.
pub fn noise_variances(m_c: f64, sigma_th2: f64) -> (f64, f64) {
    (1.0 + 2.0 * m_c, m_c + m_c * m_c + sigma_th2)
}

/// One detected count: coherent rate μ|ρ_iα_ii + Σρ_kα_ki|², Poisson draw, thermal noise.
pub fn sample_detected_count<R: Rng + ?Sized>(
    rho_i: f64,
    alpha_ii: Complex64,
    interferer_rho: &[f64],
    interferer_alpha: &[Complex64],
    mu: f64,
    sigma_th2: f64,
    rng: &mut R,
) -> Result<f64> {
    if interferer_rho.len() != interferer_alpha.len() {
        return Err(Error::dimension(format!(
            "{} interferer amplitudes but {} couplings",
            interferer_rho.len(),
            interferer_alpha.len()
        )));
    }
    if !(mu >= 0.0 && sigma_th2 >= 0.0) {
        return Err(Error::domain("mu and thermal variance must be >= 0"));
    }
    let field = interferer_rho
        .iter()
        .zip(interferer_alpha)
        .fold(alpha_ii * rho_i, |acc, (&r, &a)| acc + a * r);
    let rate = mu * field.norm_sqr();
    let counts = if rate > 0.0 {
        Poisson::new(rate)
            .map_err(|e| Error::domain(e.to_string()))?
            .sample(rng)
    } else {
        0.0
    };
    let thermal = if sigma_th2 > 0.0 {
        Normal::new(0.0, sigma_th2.sqrt())
            .map_err(|e| Error::domain(e.to_string()))?
            .sample(rng)
    } else {
        0.0
    };
    Ok(counts + thermal)
}
