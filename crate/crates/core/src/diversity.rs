//! Mode-diversity combining: coefficients, SINR, EFF, outage and outage rates.
//!
//! A channel transmitted on state `i` is received on every state `j` of its
//! branch set. The combiner sees the instantaneous branch gains |α_ij|² but
//! only the mean interference of each branch.

use crate::detection::noise_variances;
use crate::ensemble::{mean_crosstalk, ChannelEnsemble, CrosstalkMatrix};
use crate::error::{Error, Result};
use crate::modes::ModeState;
use crate::rates::{check_tx_set, rate_lower_bound, LinkBudget};
use crate::stats::{sample_variance, stable_mean};

/// Default outage SINR threshold ζ_th in dB.
pub const DEFAULT_OUTAGE_THRESHOLD_DB: f64 = 19.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombiningRule {
    /// Maximal-ratio combining.
    Mrc,
    /// Equal-gain combining, β = 1 on every branch.
    Egc,
}

/// Branch set and combining rule of one multiplexed channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityConfig {
    channel: ModeState,
    branch_set: Vec<ModeState>,
    rule: CombiningRule,
}

impl DiversityConfig {
    pub fn new(channel: ModeState, branch_set: Vec<ModeState>, rule: CombiningRule) -> Result<Self> {
        if branch_set.is_empty() {
            return Err(Error::domain("branch set is empty"));
        }
        for (a, s) in branch_set.iter().enumerate() {
            if branch_set[..a].contains(s) {
                return Err(Error::domain(format!("branch {s} listed twice")));
            }
        }
        Ok(Self {
            channel,
            branch_set,
            rule,
        })
    }

    pub fn channel(&self) -> ModeState {
        self.channel
    }

    pub fn branch_set(&self) -> &[ModeState] {
        &self.branch_set
    }

    pub fn rule(&self) -> CombiningRule {
        self.rule
    }
}

/// Combiner coefficients and output SINR, optionally with the conditional rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinerOutput {
    pub beta: Vec<f64>,
    pub sinr: f64,
    pub rate: Option<f64>,
}

/// Interference statistics of one diversity branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchNoise {
    pub m_c: f64,
    pub sigma_zs2: f64,
    pub sigma_z02: f64,
}

/// Mean crosstalk count into branch `j` from every transmitted mode but `i`, and
/// the resulting noise variances.
#[allow(clippy::too_many_arguments)]
pub fn branch_noise(
    i: ModeState,
    j: ModeState,
    tx_set: &[ModeState],
    x: &CrosstalkMatrix,
    pt: f64,
    mu: f64,
    sigma_th2: f64,
) -> Result<BranchNoise> {
    if !tx_set.contains(&i) {
        return Err(Error::domain(format!("channel {i} is not in the transmit set")));
    }
    let m_c = mu * pt / tx_set.len() as f64 * x.interference(i, j, tx_set)?;
    let (sigma_zs2, sigma_z02) = noise_variances(m_c, sigma_th2);
    Ok(BranchNoise {
        m_c,
        sigma_zs2,
        sigma_z02,
    })
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b || a == 0 {
        return Err(Error::dimension(format!("{a} fadings but {b} branch entries")));
    }
    Ok(())
}

fn check_scale(mu_pt_over_n: f64) -> Result<()> {
    if !(mu_pt_over_n > 0.0) {
        return Err(Error::domain(format!("μP_t/N must be > 0, got {mu_pt_over_n}")));
    }
    Ok(())
}

/// Per-branch noise power seen by the combiner, |α|²σ_Zs² + σ_Z0²/(μP_t/N).
fn branch_denominator(g: f64, n: &BranchNoise, c: f64) -> f64 {
    g * n.sigma_zs2 + n.sigma_z02 / c
}

/// MRC weights with the free scale fixed to 1.
pub fn mrc_coefficients(fadings: &[f64], noise: &[BranchNoise], mu_pt_over_n: f64) -> Result<Vec<f64>> {
    check_lengths(fadings.len(), noise.len())?;
    check_scale(mu_pt_over_n)?;
    fadings
        .iter()
        .zip(noise)
        .map(|(&g, n)| {
            let d = branch_denominator(g, n, mu_pt_over_n);
            if !(d > 0.0) {
                return Err(Error::domain("branch noise variance must be > 0"));
            }
            Ok(g / d)
        })
        .collect()
}

/// Output SINR of an arbitrary linear combiner.
pub fn combiner_sinr(beta: &[f64], fadings: &[f64], noise: &[BranchNoise], mu_pt_over_n: f64) -> Result<f64> {
    check_lengths(fadings.len(), noise.len())?;
    check_lengths(fadings.len(), beta.len())?;
    check_scale(mu_pt_over_n)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&b, &g), n) in beta.iter().zip(fadings).zip(noise) {
        num += b * g;
        den += b * b * branch_denominator(g, n, mu_pt_over_n);
    }
    if !(den > 0.0) {
        return Err(Error::domain("combiner has no active branch"));
    }
    Ok(mu_pt_over_n * num * num / den)
}

/// MRC output SINR, the sum of the branch SINRs.
pub fn mrc_sinr(fadings: &[f64], noise: &[BranchNoise], mu_pt_over_n: f64) -> Result<f64> {
    check_lengths(fadings.len(), noise.len())?;
    check_scale(mu_pt_over_n)?;
    let mut total = 0.0;
    for (&g, n) in fadings.iter().zip(noise) {
        let d = branch_denominator(g, n, mu_pt_over_n);
        if !(d > 0.0) {
            return Err(Error::domain("branch noise variance must be > 0"));
        }
        total += g * g / d;
    }
    Ok(mu_pt_over_n * total)
}

/// S_j = Σ_{k ∈ tx_set, k ≠ i} E[|α_kj|²] for every branch.
pub fn branch_interference(
    i: ModeState,
    branch_set: &[ModeState],
    tx_set: &[ModeState],
    x: &CrosstalkMatrix,
) -> Result<Vec<f64>> {
    if !tx_set.contains(&i) {
        return Err(Error::domain(format!("channel {i} is not in the transmit set")));
    }
    branch_set.iter().map(|&j| x.interference(i, j, tx_set)).collect()
}

fn check_interference(s: &[f64]) -> Result<()> {
    if s.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain(
            "a branch sees no interference; the link is not interference-limited",
        ));
    }
    Ok(())
}

/// High-power MRC SINR from branch gains and branch interference levels.
pub fn asymptotic_sinr_from(fadings: &[f64], s: &[f64]) -> Result<f64> {
    check_lengths(fadings.len(), s.len())?;
    check_interference(s)?;
    Ok(fadings
        .iter()
        .zip(s)
        .map(|(&g, &s)| g * g / (2.0 * g * s + s * s))
        .sum())
}

/// High-power MRC SINR of channel `i` combined over `branch_set`.
pub fn asymptotic_sinr(
    i: ModeState,
    branch_set: &[ModeState],
    tx_set: &[ModeState],
    fadings: &[f64],
    x: &CrosstalkMatrix,
) -> Result<f64> {
    asymptotic_sinr_from(fadings, &branch_interference(i, branch_set, tx_set, x)?)
}

/// MRC weights that maximize the high-power SINR.
pub fn asymptotic_mrc_coefficients(fadings: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    check_lengths(fadings.len(), s.len())?;
    check_interference(s)?;
    Ok(fadings
        .iter()
        .zip(s)
        .map(|(&g, &s)| g / (2.0 * g * s + s * s))
        .collect())
}

/// Effective fading figure 10·log10(Var[ζ]/E[ζ]²). Constant samples give −∞.
pub fn eff(samples: &[f64]) -> Result<f64> {
    let m = stable_mean(samples)?;
    let v = sample_variance(samples)?;
    if !(m > 0.0) {
        return Err(Error::statistics(format!("EFF needs a positive mean, got {m}")));
    }
    if v == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * (v / (m * m)).log10())
}

/// Fraction of samples strictly below `threshold`.
pub fn outage_probability(samples: &[f64], threshold: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::statistics("outage of an empty sample"));
    }
    Ok(samples.iter().filter(|&&z| z < threshold).count() as f64 / samples.len() as f64)
}

/// Conditional rate of the combiner output.
pub fn diversity_conditional_rate(
    fadings: &[f64],
    beta: &[f64],
    budget: &LinkBudget,
    noise: &[BranchNoise],
) -> Result<f64> {
    check_lengths(fadings.len(), noise.len())?;
    check_lengths(fadings.len(), beta.len())?;
    let c = budget.mu_pt_over_n();
    let mut sig = 0.0;
    let mut zs = 0.0;
    let mut z0 = 0.0;
    for ((&b, &g), n) in beta.iter().zip(fadings).zip(noise) {
        sig += b * g;
        zs += b * b * g * n.sigma_zs2;
        z0 += b * b * n.sigma_z02;
    }
    if !(sig > 0.0) {
        return Err(Error::domain("combiner collects no signal"));
    }
    Ok(rate_lower_bound(c * sig, zs / sig, z0))
}

/// Largest rate `r` with Pr{rate < r} < ε over the samples.
pub fn epsilon_outage_rate(samples: &[f64], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if samples.is_empty() {
        return Err(Error::statistics("outage rate of an empty sample"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let m = (epsilon * v.len() as f64).ceil() as usize;
    Ok(v[m.clamp(1, v.len()) - 1])
}

/// |α_ij|² over `branch_set` for each realization.
pub fn branch_fadings(ensemble: &ChannelEnsemble, i: ModeState, branch_set: &[ModeState]) -> Result<Vec<Vec<f64>>> {
    let ii = ensemble.index_of(i)?;
    let jj = branch_set
        .iter()
        .map(|&j| ensemble.index_of(j))
        .collect::<Result<Vec<_>>>()?;
    Ok(ensemble
        .realizations()
        .iter()
        .map(|m| jj.iter().map(|&j| m.at(ii, j).norm_sqr()).collect())
        .collect())
}

/// Per-realization high-power MRC SINR of channel `i`.
pub fn asymptotic_sinr_samples(
    ensemble: &ChannelEnsemble,
    i: ModeState,
    branch_set: &[ModeState],
    tx_set: &[ModeState],
) -> Result<Vec<f64>> {
    check_tx_set(tx_set)?;
    let x = mean_crosstalk(ensemble);
    let s = branch_interference(i, branch_set, tx_set, &x)?;
    branch_fadings(ensemble, i, branch_set)?
        .iter()
        .map(|g| asymptotic_sinr_from(g, &s))
        .collect()
}

fn branch_noises(
    ensemble: &ChannelEnsemble,
    i: ModeState,
    branch_set: &[ModeState],
    budget: &LinkBudget,
) -> Result<Vec<BranchNoise>> {
    let x = mean_crosstalk(ensemble);
    branch_set
        .iter()
        .map(|&j| branch_noise(i, j, budget.tx_set(), &x, budget.pt(), budget.mu(), budget.sigma_th2()))
        .collect()
}

/// Per-realization finite-power combiner output SINR of `config.channel()`.
pub fn sinr_samples(ensemble: &ChannelEnsemble, config: &DiversityConfig, budget: &LinkBudget) -> Result<Vec<f64>> {
    let noise = branch_noises(ensemble, config.channel(), config.branch_set(), budget)?;
    let c = budget.mu_pt_over_n();
    let ones = vec![1.0; noise.len()];
    branch_fadings(ensemble, config.channel(), config.branch_set())?
        .iter()
        .map(|g| match config.rule() {
            CombiningRule::Mrc => mrc_sinr(g, &noise, c),
            CombiningRule::Egc => combiner_sinr(&ones, g, &noise, c),
        })
        .collect()
}

/// Per-realization conditional rate of channel `i` with the high-power MRC weights,
/// evaluated at the finite power of `budget`. With a single branch this is the
/// plain conditional rate.
pub fn diversity_rate_samples(
    ensemble: &ChannelEnsemble,
    i: ModeState,
    branch_set: &[ModeState],
    budget: &LinkBudget,
) -> Result<Vec<f64>> {
    let noise = branch_noises(ensemble, i, branch_set, budget)?;
    let x = mean_crosstalk(ensemble);
    let s = branch_interference(i, branch_set, budget.tx_set(), &x)?;
    let fadings = branch_fadings(ensemble, i, branch_set)?;
    fadings
        .iter()
        .map(|g| {
            let beta = if branch_set.len() == 1 || s.iter().any(|&v| v == 0.0) {
                mrc_coefficients(g, &noise, budget.mu_pt_over_n())?
            } else {
                asymptotic_mrc_coefficients(g, &s)?
            };
            if g.iter().zip(&beta).all(|(&a, &b)| a * b == 0.0) {
                return Ok(0.0);
            }
            diversity_conditional_rate(g, &beta, budget, &noise)
        })
        .collect()
}
