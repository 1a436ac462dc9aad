//! Achievable-rate lower bounds in nats per channel use.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::detection::{noise_variances, photon_conversion_mu, thermal_variance, DetectionParams};
use crate::ensemble::{mean_crosstalk, ChannelEnsemble, CrosstalkMatrix};
use crate::error::{Error, Result};
use crate::modes::ModeState;
use crate::stats::stable_mean;

/// Transmit power, transmit set and receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pt: f64,
    tx_set: Vec<ModeState>,
    detection: DetectionParams,
}

impl LinkBudget {
    pub fn new(pt: f64, tx_set: Vec<ModeState>, detection: DetectionParams) -> Result<Self> {
        if !(pt >= 0.0) || !pt.is_finite() {
            return Err(Error::domain(format!("transmit power must be finite and >= 0, got {pt}")));
        }
        check_tx_set(&tx_set)?;
        Ok(Self { pt, tx_set, detection })
    }

    pub fn pt(&self) -> f64 {
        self.pt
    }

    pub fn tx_set(&self) -> &[ModeState] {
        &self.tx_set
    }

    pub fn n(&self) -> usize {
        self.tx_set.len()
    }

    pub fn detection(&self) -> &DetectionParams {
        &self.detection
    }

    pub fn mu(&self) -> f64 {
        photon_conversion_mu(&self.detection)
    }

    pub fn sigma_th2(&self) -> f64 {
        thermal_variance(&self.detection)
    }

    /// μ·P_t/N, the mean count per unit channel gain.
    pub fn mu_pt_over_n(&self) -> f64 {
        self.mu() * self.pt / self.n() as f64
    }

    pub fn with_pt(&self, pt: f64) -> Result<Self> {
        Self::new(pt, self.tx_set.clone(), self.detection)
    }
}

pub(crate) fn check_tx_set(tx_set: &[ModeState]) -> Result<()> {
    if tx_set.is_empty() {
        return Err(Error::domain("transmit set is empty"));
    }
    for (a, s) in tx_set.iter().enumerate() {
        if tx_set[..a].contains(s) {
            return Err(Error::domain(format!("mode state {s} listed twice")));
        }
    }
    Ok(())
}

/// Milliwatt-referenced dB to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Rate bound for effective signal count `e`, signal-dependent noise variance
/// `sigma_s2` and signal-independent noise variance `sigma_02`, clamped at zero.
pub fn rate_lower_bound(e: f64, sigma_s2: f64, sigma_02: f64) -> f64 {
    if !(e > 0.0) || !(sigma_s2 > 0.0) {
        return 0.0;
    }
    let a = e / sigma_s2;
    // ½ln a + ½ln(1 + 2/a) = ½ln(a + 2);  −a + √(a² + 2a) = 2a / (√(a² + 2a) + a)
    let v = 0.5 * (a + 2.0).ln() - 1.0 + 2.0 * a / ((a * a + 2.0 * a).sqrt() + a)
        - (std::f64::consts::PI * sigma_02 / (2.0 * e * sigma_s2)).sqrt();
    if v < 0.0 {
        log::trace!("rate bound {v} clamped to 0 (a = {a})");
        0.0
    } else {
        v
    }
}

/// Rate conditioned on the signal gain |α_ii|², given the channel's mean interference count.
pub fn conditional_rate(gain2: f64, budget: &LinkBudget, m_c: f64) -> Result<f64> {
    if !(gain2 >= 0.0) {
        return Err(Error::domain(format!("signal gain must be >= 0, got {gain2}")));
    }
    if !(m_c >= 0.0) {
        return Err(Error::domain(format!("interference count must be >= 0, got {m_c}")));
    }
    let (zs, z0) = noise_variances(m_c, budget.sigma_th2());
    Ok(rate_lower_bound(budget.mu_pt_over_n() * gain2, zs, z0))
}

/// γ_i = |α_ii|² / Σ_{k≠i} E[|α_ki|²].
pub fn asymptotic_sir(i: ModeState, tx_set: &[ModeState], gain2: f64, x: &CrosstalkMatrix) -> Result<f64> {
    if !tx_set.contains(&i) {
        return Err(Error::domain(format!("channel {i} is not in the transmit set")));
    }
    let s = x.interference(i, i, tx_set)?;
    if !(s > 0.0) {
        return Err(Error::domain(format!(
            "channel {i} sees no interference; the SIR is undefined"
        )));
    }
    Ok(gain2 / s)
}

fn asymptotic_rate_raw(gamma: f64) -> f64 {
    // −γ/2 + √(γ(γ+4))/2 = 2γ / (√(γ² + 4γ) + γ)
    0.5 * (0.5 * gamma + 2.0).ln() - 1.0 + 2.0 * gamma / ((gamma * gamma + 4.0 * gamma).sqrt() + gamma)
        - (std::f64::consts::PI / (4.0 * gamma)).sqrt()
}

/// High-power limit of the conditional rate, clamped at zero.
pub fn asymptotic_rate(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("SIR must be > 0, got {gamma}")));
    }
    Ok(asymptotic_rate_raw(gamma).max(0.0))
}

/// Like [`asymptotic_rate`] but zero for γ = 0 (no signal).
pub(crate) fn asymptotic_rate_or_zero(gamma: f64) -> f64 {
    if gamma > 0.0 {
        asymptotic_rate_raw(gamma).max(0.0)
    } else {
        0.0
    }
}

fn indices(ensemble: &ChannelEnsemble, tx_set: &[ModeState]) -> Result<Vec<usize>> {
    check_tx_set(tx_set)?;
    tx_set.iter().map(|&s| ensemble.index_of(s)).collect()
}

/// Mean conditional rate of every channel of `budget.tx_set()`, in transmit-set order.
pub fn average_rates(ensemble: &ChannelEnsemble, budget: &LinkBudget) -> Result<Vec<f64>> {
    if ensemble.is_empty() {
        return Err(Error::statistics("empty ensemble"));
    }
    let tx = budget.tx_set();
    let idx = indices(ensemble, tx)?;
    let x = mean_crosstalk(ensemble);
    let c = budget.mu_pt_over_n();
    let sth = budget.sigma_th2();
    tx.iter()
        .zip(&idx)
        .map(|(&i, &ii)| {
            let m_c = c * x.interference(i, i, tx)?;
            let (zs, z0) = noise_variances(m_c, sth);
            let r: Vec<f64> = ensemble
                .realizations()
                .iter()
                .map(|m| rate_lower_bound(c * m.at(ii, ii).norm_sqr(), zs, z0))
                .collect();
            stable_mean(&r)
        })
        .collect()
}

/// Average aggregate achievable rate at every transmit power in `pt_grid` (watts).
pub fn average_aar(ensemble: &ChannelEnsemble, budget: &LinkBudget, pt_grid: &[f64]) -> Result<Vec<f64>> {
    pt_grid
        .iter()
        .map(|&pt| Ok(average_rates(ensemble, &budget.with_pt(pt)?)?.iter().sum()))
        .collect()
}

/// Average asymptotic AAR, or the flag that some channel is not interference-limited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticAar {
    Finite(f64),
    /// At least one channel has no interferers (e.g. a single transmitted mode).
    NotInterferenceLimited,
}

impl AsymptoticAar {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::NotInterferenceLimited => None,
        }
    }
}

/// Per-channel mean asymptotic rates, `None` if some channel sees no interference.
pub fn average_asymptotic_rates(ensemble: &ChannelEnsemble, tx_set: &[ModeState]) -> Result<Option<Vec<f64>>> {
    let idx = indices(ensemble, tx_set)?;
    let x = mean_crosstalk(ensemble);
    let mut out = Vec::with_capacity(tx_set.len());
    for (&i, &ii) in tx_set.iter().zip(&idx) {
        let s = x.interference(i, i, tx_set)?;
        if !(s > 0.0) {
            return Ok(None);
        }
        let r: Vec<f64> = ensemble
            .realizations()
            .iter()
            .map(|m| asymptotic_rate_or_zero(m.at(ii, ii).norm_sqr() / s))
            .collect();
        out.push(stable_mean(&r)?);
    }
    Ok(Some(out))
}

pub fn average_asymptotic_aar(ensemble: &ChannelEnsemble, tx_set: &[ModeState]) -> Result<AsymptoticAar> {
    Ok(match average_asymptotic_rates(ensemble, tx_set)? {
        Some(r) => AsymptoticAar::Finite(r.iter().sum()),
        None => AsymptoticAar::NotInterferenceLimited,
    })
}

/// Per-realization asymptotic AAR, `None` if some channel sees no interference.
pub fn asymptotic_aar_samples(ensemble: &ChannelEnsemble, tx_set: &[ModeState]) -> Result<Option<Vec<f64>>> {
    let idx = indices(ensemble, tx_set)?;
    let x = mean_crosstalk(ensemble);
    let mut s = Vec::with_capacity(tx_set.len());
    for &i in tx_set {
        let v = x.interference(i, i, tx_set)?;
        if !(v > 0.0) {
            return Ok(None);
        }
        s.push(v);
    }
    Ok(Some(
        ensemble
            .realizations()
            .iter()
            .map(|m| {
                idx.iter()
                    .zip(&s)
                    .map(|(&ii, &v)| asymptotic_rate_or_zero(m.at(ii, ii).norm_sqr() / v))
                    .sum()
            })
            .collect(),
    ))
}

/// One draw of the rate-achieving half-normal amplitude, E[ρ²] = P_t/N.
pub fn sample_half_normal<R: Rng + ?Sized>(rng: &mut R, pt: f64, n: usize) -> Result<f64> {
    if !(pt > 0.0) || n == 0 {
        return Err(Error::domain(format!("need P_t > 0 and N >= 1, got {pt}, {n}")));
    }
    let d = Normal::new(0.0, (pt / n as f64).sqrt()).map_err(|e| Error::domain(e.to_string()))?;
    Ok(d.sample(rng).abs())
}
