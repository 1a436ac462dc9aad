//! Coupling matrices, Monte-Carlo channel ensembles and their statistics.

use std::ops::Range;

use num_complex::{Complex, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::fields::{ComplexField, GridSpec};
use crate::modes::{lg_mode_field, ModeBasis, ModeState};
use crate::propagation::{PathConfig, ScreenStack, SplitStep};
use crate::scalar::Real;
use crate::stats::{ks_distance, pearson, stable_mean};
use crate::turbulence::{ScreenGenerator, TurbulenceParams};

/// Slack allowed on row power sums for discretization error.
pub const PASSIVITY_TOLERANCE: f64 = 1e-3;

/// Complex couplings `alpha[k][i]` from transmitted state k to received state i.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    states: Vec<ModeState>,
    alpha: Vec<Complex64>,
}

fn position(states: &[ModeState], s: ModeState) -> Result<usize> {
    states
        .iter()
        .position(|&t| t == s)
        .ok_or_else(|| Error::domain(format!("mode state {s} is not in the ensemble")))
}

impl CouplingMatrix {
    /// `alpha` is row-major over (k, i).
    pub fn new(states: Vec<ModeState>, alpha: Vec<Complex64>) -> Result<Self> {
        let n = states.len();
        if n == 0 || alpha.len() != n * n {
            return Err(Error::dimension(format!(
                "{} coefficients for {n} states",
                alpha.len()
            )));
        }
        if alpha.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::domain("coupling coefficients must be finite"));
        }
        Ok(Self { states, alpha })
    }

    pub fn identity(states: Vec<ModeState>) -> Self {
        let n = states.len();
        let mut alpha = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            alpha[k * n + k] = Complex64::new(1.0, 0.0);
        }
        Self { states, alpha }
    }

    pub fn states(&self) -> &[ModeState] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Row-major coefficients.
    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn at(&self, k: usize, i: usize) -> Complex64 {
        self.alpha[k * self.dim() + i]
    }

    pub fn get(&self, k: ModeState, i: ModeState) -> Result<Complex64> {
        Ok(self.at(position(&self.states, k)?, position(&self.states, i)?))
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        let n = self.dim();
        &self.alpha[k * n..(k + 1) * n]
    }

    /// Σ_i |alpha[k][i]|² for every row.
    pub fn row_powers(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.row(k).iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    pub fn is_passive(&self) -> bool {
        self.row_powers().iter().all(|&p| p <= 1.0 + PASSIVITY_TOLERANCE)
    }
}

/// Mean crosstalk `X[k][i] = E[|α_ki|²]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkMatrix {
    states: Vec<ModeState>,
    values: Vec<f64>,
}

impl CrosstalkMatrix {
    pub fn from_values(states: Vec<ModeState>, values: Vec<f64>) -> Result<Self> {
        let n = states.len();
        if n == 0 || values.len() != n * n {
            return Err(Error::dimension(format!("{} values for {n} states", values.len())));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain("crosstalk values must be finite and >= 0"));
        }
        Ok(Self { states, values })
    }

    pub fn states(&self) -> &[ModeState] {
        &self.states
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.states.len() + i]
    }

    pub fn get(&self, k: ModeState, i: ModeState) -> Result<f64> {
        Ok(self.at(position(&self.states, k)?, position(&self.states, i)?))
    }

    /// Σ_{k ∈ tx_set, k ≠ i} X[k][j]: power leaking into receive mode `j`
    /// from every transmitted mode except channel `i`.
    pub fn interference(&self, i: ModeState, j: ModeState, tx_set: &[ModeState]) -> Result<f64> {
        let jj = position(&self.states, j)?;
        let mut total = 0.0;
        for &k in tx_set {
            let kk = position(&self.states, k)?;
            if k != i {
                total += self.at(kk, jj);
            }
        }
        Ok(total)
    }
}

/// Monte-Carlo collection of coupling matrices drawn from one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEnsemble {
    config_hash: [u8; 32],
    states: Vec<ModeState>,
    realizations: Vec<CouplingMatrix>,
    params: TurbulenceParams<f64>,
    base_seed: u64,
}

impl ChannelEnsemble {
    pub fn new(
        config_hash: [u8; 32],
        realizations: Vec<CouplingMatrix>,
        params: TurbulenceParams<f64>,
        base_seed: u64,
    ) -> Result<Self> {
        let Some(first) = realizations.first() else {
            return Err(Error::statistics("an ensemble needs at least one realization"));
        };
        let states = first.states().to_vec();
        if realizations.iter().any(|m| m.states() != states.as_slice()) {
            return Err(Error::dimension("realizations must share one state list"));
        }
        Ok(Self {
            config_hash,
            states,
            realizations,
            params,
            base_seed,
        })
    }

    /// Wraps synthetic matrices, e.g. for tests, with a zero hash.
    pub fn from_matrices(realizations: Vec<CouplingMatrix>) -> Result<Self> {
        let params = TurbulenceParams::new(0.0, 5e-3, 20.0)?;
        Self::new([0; 32], realizations, params, 0)
    }

    pub fn config_hash(&self) -> &[u8; 32] {
        &self.config_hash
    }

    pub fn states(&self) -> &[ModeState] {
        &self.states
    }

    pub fn realizations(&self) -> &[CouplingMatrix] {
        &self.realizations
    }

    pub fn params(&self) -> &TurbulenceParams<f64> {
        &self.params
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn index_of(&self, s: ModeState) -> Result<usize> {
        position(&self.states, s)
    }

    /// α_ki across realizations.
    pub fn couplings(&self, k: ModeState, i: ModeState) -> Result<Vec<Complex64>> {
        let (kk, ii) = (self.index_of(k)?, self.index_of(i)?);
        Ok(self.realizations.iter().map(|m| m.at(kk, ii)).collect())
    }

    /// |α_ki|² across realizations.
    pub fn gains(&self, k: ModeState, i: ModeState) -> Result<Vec<f64>> {
        Ok(self.couplings(k, i)?.iter().map(|a| a.norm_sqr()).collect())
    }

    /// Appends another ensemble drawn from the same state list.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.states != other.states {
            return Err(Error::dimension("cannot concatenate ensembles with different states"));
        }
        let mut realizations = self.realizations.clone();
        realizations.extend_from_slice(&other.realizations);
        Ok(Self {
            realizations,
            ..self.clone()
        })
    }

    /// Same realizations reordered by `order` (a permutation of 0..len).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        for &o in order {
            if o >= self.len() || std::mem::replace(&mut seen[o], true) {
                return Err(Error::dimension("order is not a permutation"));
            }
        }
        if order.len() != self.len() {
            return Err(Error::dimension("order is not a permutation"));
        }
        Ok(Self {
            realizations: order.iter().map(|&o| self.realizations[o].clone()).collect(),
            ..self.clone()
        })
    }
}

/// Entrywise mean of |α|² over the ensemble.
pub fn mean_crosstalk(ensemble: &ChannelEnsemble) -> CrosstalkMatrix {
    let n = ensemble.states.len();
    let values = (0..n * n)
        .map(|idx| {
            let g: Vec<f64> = ensemble
                .realizations
                .iter()
                .map(|m| m.alpha[idx].norm_sqr())
                .collect();
            stable_mean(&g).expect("ensembles are nonempty")
        })
        .collect();
    CrosstalkMatrix {
        states: ensemble.states.clone(),
        values,
    }
}

/// Pearson correlation of |α_ii|² and |α_ij|² across realizations.
pub fn correlation_coefficient(ensemble: &ChannelEnsemble, i: ModeState, j: ModeState) -> Result<f64> {
    if ensemble.len() < 2 {
        return Err(Error::statistics("correlation needs at least two realizations"));
    }
    let a = ensemble.gains(i, i)?;
    if i == j {
        // exact, provided the fading actually varies
        pearson(&a, &a)?;
        return Ok(1.0);
    }
    pearson(&a, &ensemble.gains(i, j)?)
}

/// Realizations required by [`phase_uniformity_check`].
pub const MIN_PHASE_SAMPLES: usize = 500;

/// Kolmogorov–Smirnov distance of the phases ∠α_ki from the uniform law on [0, 2π).
pub fn phase_uniformity_check(ensemble: &ChannelEnsemble, k: ModeState, i: ModeState) -> Result<f64> {
    if k == i {
        return Err(Error::domain("phase uniformity is defined for k != i only"));
    }
    if ensemble.len() < MIN_PHASE_SAMPLES {
        return Err(Error::statistics(format!(
            "phase uniformity needs >= {MIN_PHASE_SAMPLES} realizations, got {}",
            ensemble.len()
        )));
    }
    let tau = std::f64::consts::TAU;
    let phases: Vec<f64> = ensemble
        .couplings(k, i)?
        .iter()
        .map(|a| a.arg().rem_euclid(tau) / tau)
        .collect();
    ks_distance(&phases, |u| u.clamp(0.0, 1.0))
}

/// Everything needed to draw realizations for one configuration.
#[derive(Clone)]
pub struct ChannelSimulator<T: Real> {
    states: Vec<ModeState>,
    launch: Vec<ComplexField<T>>,
    receiver: ModeBasis<T>,
    generator: ScreenGenerator<T>,
    stepper: SplitStep<T>,
    segments: usize,
    base_seed: u64,
}

impl<T: Real> ChannelSimulator<T> {
    /// Builds launch fields at the waist and the receiver basis (the same modes
    /// propagated through vacuum without the absorbing window).
    pub fn new(
        grid: GridSpec<T>,
        path: PathConfig<T>,
        params: TurbulenceParams<T>,
        w0: T,
        states: &[ModeState],
        base_seed: u64,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::config("at least one mode state is required"));
        }
        let launch = states
            .iter()
            .map(|&s| lg_mode_field(s, grid, w0))
            .collect::<Result<Vec<_>>>()?;
        let mut clean = SplitStep::new(grid, path, false)?;
        let received = launch
            .iter()
            .map(|u| clean.propagate_vacuum(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            states: states.to_vec(),
            receiver: ModeBasis::from_fields(states.to_vec(), received)?,
            launch,
            generator: ScreenGenerator::new(grid, params, path.screen_spacing(), path.wavelength())?,
            stepper: SplitStep::new(grid, path, true)?,
            segments: path.segments(),
            base_seed,
        })
    }

    pub fn from_config(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        Self::new(
            config.grid_spec()?,
            config.path_config()?,
            config.turbulence_params()?,
            T::lit(config.optics.w0_m),
            &config.states(),
            config.ensemble.base_seed,
        )
    }

    pub fn states(&self) -> &[ModeState] {
        &self.states
    }

    pub fn receiver_basis(&self) -> &ModeBasis<T> {
        &self.receiver
    }

    /// The rng stream of realization `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(index);
        rng
    }

    /// One coupling matrix: every launch mode goes through the same screen stack.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<CouplingMatrix> {
        let stack = ScreenStack::draw(&mut self.generator, self.segments, rng);
        let n = self.states.len();
        let mut alpha = Vec::with_capacity(n * n);
        for u in &self.launch {
            let out = self.stepper.propagate(u, &stack)?;
            alpha.extend(self.receiver.decompose(&out)?.into_iter().map(to_c64));
        }
        CouplingMatrix::new(self.states.clone(), alpha)
    }

    pub fn realization(&mut self, index: u64) -> Result<CouplingMatrix> {
        let mut rng = self.stream(index);
        self.draw(&mut rng)
    }

    /// Realizations `range`, in index order, computed in parallel.
    pub fn run(&self, range: Range<u64>) -> Result<Vec<CouplingMatrix>> {
        range
            .into_par_iter()
            .map_init(|| self.clone(), |sim, r| sim.realization(r))
            .collect()
    }
}

fn to_c64<T: Real>(c: Complex<T>) -> Complex64 {
    Complex64::new(c.re.as_f64(), c.im.as_f64())
}

/// Single realization from an explicit rng stream.
pub fn compute_coupling_matrix<T: Real, R: Rng + ?Sized>(
    path: PathConfig<T>,
    params: TurbulenceParams<T>,
    grid: GridSpec<T>,
    w0: T,
    states: &[ModeState],
    rng: &mut R,
) -> Result<CouplingMatrix> {
    ChannelSimulator::new(grid, path, params, w0, states, 0)?.draw(rng)
}

/// Full ensemble for `config`; realization r uses stream r of `base_seed`.
pub fn run_ensemble(config: &SimulationConfig) -> Result<ChannelEnsemble> {
    run_ensemble_with::<f64>(config)
}

/// [`run_ensemble`] with the wave optics carried out in scalar type `T`.
pub fn run_ensemble_with<T: Real>(config: &SimulationConfig) -> Result<ChannelEnsemble> {
    let sim = ChannelSimulator::<T>::from_config(config)?;
    let realizations = sim.run(0..config.ensemble.realizations as u64)?;
    ChannelEnsemble::new(
        config.config_hash(),
        realizations,
        config.turbulence_params()?,
        config.ensemble.base_seed,
    )
}
