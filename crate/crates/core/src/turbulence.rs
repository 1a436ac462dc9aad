//! Modified von Karman turbulence: spectrum, random phase screens and Rytov variance.
//!
//! Screens are synthesized spectrally: complex white noise shaped by the square
//! root of the thin-slab phase spectrum `2π k² Δz Φ_n(κ)` and inverse-transformed,
//! plus three levels of 3×3 subharmonics that restore the low-frequency power a
//! grid much smaller than the outer scale cannot represent.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::fields::GridSpec;
use crate::scalar::Real;

const BETA1: f64 = 0.033;
const BETA2: f64 = 1.802;
const BETA3: f64 = 0.254;

/// Number of subharmonic levels used for low-frequency compensation.
pub const SUBHARMONIC_LEVELS: u32 = 3;

/// Refractive-index structure constant and inner/outer scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceParams<T> {
    cn2: T,
    inner_scale: T,
    outer_scale: T,
}

impl<T: Real> TurbulenceParams<T> {
    /// `cn2` in m^(−2/3); `inner_scale` (l0) and `outer_scale` (L0) in meters.
    pub fn new(cn2: T, inner_scale: T, outer_scale: T) -> Result<Self> {
        if !(cn2 >= T::zero()) || !cn2.is_finite() {
            return Err(Error::config(format!("cn2 must be >= 0, got {cn2}")));
        }
        if !(inner_scale > T::zero()) || !(outer_scale > inner_scale) || !outer_scale.is_finite() {
            return Err(Error::config(format!(
                "scales must satisfy 0 < l0 < L0, got l0 = {inner_scale}, L0 = {outer_scale}"
            )));
        }
        Ok(Self {
            cn2,
            inner_scale,
            outer_scale,
        })
    }

    pub fn cn2(&self) -> T {
        self.cn2
    }

    pub fn inner_scale(&self) -> T {
        self.inner_scale
    }

    pub fn outer_scale(&self) -> T {
        self.outer_scale
    }

    /// κ_l = 3.3 / l0
    pub fn kappa_l(&self) -> T {
        T::lit(3.3) / self.inner_scale
    }

    /// κ_0 = 2π / L0
    pub fn kappa_0(&self) -> T {
        T::TAU() / self.outer_scale
    }

    /// Same scales, different strength.
    pub fn with_cn2(&self, cn2: T) -> Result<Self> {
        Self::new(cn2, self.inner_scale, self.outer_scale)
    }
}

/// Modified von Karman refractive-index spectrum Φ_n(κ) in m³.
pub fn von_karman_psd<T: Real>(kappa: T, params: &TurbulenceParams<T>) -> Result<T> {
    if !(kappa >= T::zero()) {
        return Err(Error::domain(format!("spatial frequency must be >= 0, got {kappa}")));
    }
    Ok(psd_unchecked(kappa, params))
}

fn psd_unchecked<T: Real>(kappa: T, params: &TurbulenceParams<T>) -> T {
    let kl = params.kappa_l();
    let k0 = params.kappa_0();
    let x = kappa / kl;
    let bump = T::one() + T::lit(BETA2) * x - T::lit(BETA3) * x.powf(T::lit(7.0 / 6.0));
    T::lit(BETA1) * params.cn2 * bump * (-(x * x)).exp()
        / (k0 * k0 + kappa * kappa).powf(T::lit(11.0 / 6.0))
}

/// Phase spectrum of a slab of thickness `slab` (thin-screen approximation),
/// clamped at zero where the spectral bump term turns negative.
pub fn phase_psd<T: Real>(kappa: T, params: &TurbulenceParams<T>, wavenumber: T, slab: T) -> T {
    let v = T::TAU() * wavenumber * wavenumber * slab * psd_unchecked(kappa, params);
    v.max(T::zero())
}

/// Rytov variance `1.23 C_n² k^{7/6} z^{11/6}` with `k = 2π/λ`.
pub fn rytov_variance<T: Real>(cn2: T, wavelength: T, z: T) -> Result<T> {
    if !(cn2 >= T::zero()) || !(wavelength > T::zero()) || !(z > T::zero()) {
        return Err(Error::domain(format!(
            "rytov variance needs cn2 >= 0, wavelength > 0, z > 0 (got {cn2}, {wavelength}, {z})"
        )));
    }
    let k = T::TAU() / wavelength;
    Ok(T::lit(1.23) * cn2 * k.powf(T::lit(7.0 / 6.0)) * z.powf(T::lit(11.0 / 6.0)))
}

/// One thin random phase screen.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScreen<T> {
    grid: GridSpec<T>,
    phases: Vec<T>,
    params: TurbulenceParams<T>,
    slab_thickness: T,
}

impl<T: Real> PhaseScreen<T> {
    /// Wraps externally produced phases (radians, row-major).
    pub fn from_phases(
        grid: GridSpec<T>,
        phases: Vec<T>,
        params: TurbulenceParams<T>,
        slab_thickness: T,
    ) -> Result<Self> {
        if phases.len() != grid.len() {
            return Err(Error::dimension(format!(
                "{} phases for a {}-sample grid",
                phases.len(),
                grid.len()
            )));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("phase screen values must be finite"));
        }
        Ok(Self {
            grid,
            phases,
            params,
            slab_thickness,
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    pub fn params(&self) -> &TurbulenceParams<T> {
        &self.params
    }

    pub fn slab_thickness(&self) -> T {
        self.slab_thickness
    }

    pub fn mean(&self) -> T {
        self.phases.iter().fold(T::zero(), |a, &p| a + p) / T::of_usize(self.phases.len())
    }

    /// `exp(iθ)` for every sample.
    pub fn phasors(&self) -> Vec<Complex<T>> {
        self.phases
            .iter()
            .map(|&p| {
                let (s, c) = p.sin_cos();
                Complex::new(c, s)
            })
            .collect()
    }
}

/// Rejects grids whose pitch does not resolve the inner scale.
pub fn check_resolves_inner_scale<T: Real>(grid: &GridSpec<T>, params: &TurbulenceParams<T>) -> Result<()> {
    if grid.spacing() > params.inner_scale() {
        return Err(Error::config(format!(
            "grid spacing {} m does not resolve inner scale l0 = {} m",
            grid.spacing(),
            params.inner_scale()
        )));
    }
    Ok(())
}

/// Reusable screen synthesizer for one grid.
#[derive(Clone)]
pub struct ScreenGenerator<T: Real> {
    grid: GridSpec<T>,
    params: TurbulenceParams<T>,
    slab_thickness: T,
    /// `√(Φ_θ)·Δκ` for every FFT bin (transposed layout, DC zeroed).
    amplitude: Vec<T>,
    /// per level: `(Δκ_p, √(Φ_θ)·Δκ_p)` for the 3×3 offsets, row-major over (m, n) ∈ {−1,0,1}²
    subharmonics: Vec<(T, [T; 9])>,
    fft: Fft2<T>,
}

impl<T: Real> ScreenGenerator<T> {
    pub fn new(
        grid: GridSpec<T>,
        params: TurbulenceParams<T>,
        slab_thickness: T,
        wavelength: T,
    ) -> Result<Self> {
        if !(slab_thickness > T::zero()) {
            return Err(Error::config(format!(
                "slab thickness must be > 0, got {slab_thickness}"
            )));
        }
        if !(wavelength > T::zero()) {
            return Err(Error::config(format!("wavelength must be > 0, got {wavelength}")));
        }
        check_resolves_inner_scale(&grid, &params)?;
        let k = T::TAU() / wavelength;
        let n = grid.n_points();
        let dk = T::TAU() / grid.extent();
        let mut amplitude = Vec::with_capacity(n * n);
        for i in 0..n {
            let ki = grid.angular_frequency(i);
            for j in 0..n {
                let kj = grid.angular_frequency(j);
                let kappa = (ki * ki + kj * kj).sqrt();
                amplitude.push(phase_psd(kappa, &params, k, slab_thickness).sqrt() * dk);
            }
        }
        amplitude[0] = T::zero();

        let subharmonics = (1..=SUBHARMONIC_LEVELS)
            .map(|p| {
                let dkp = dk / T::lit(3f64.powi(p as i32));
                let mut amps = [T::zero(); 9];
                for (idx, amp) in amps.iter_mut().enumerate() {
                    let (m, nn) = ((idx / 3) as f64 - 1.0, (idx % 3) as f64 - 1.0);
                    if m == 0.0 && nn == 0.0 {
                        continue;
                    }
                    let kappa = dkp * T::lit((m * m + nn * nn).sqrt());
                    *amp = phase_psd(kappa, &params, k, slab_thickness).sqrt() * dkp;
                }
                (dkp, amps)
            })
            .collect();

        Ok(Self {
            grid,
            params,
            slab_thickness,
            amplitude,
            subharmonics,
            fft: Fft2::new(n),
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// Draws one screen. Consumes the same number of normal variates for any C_n²,
    /// so screens drawn from equal streams at different strengths are paired.
    pub fn generate<R: Rng + ?Sized>(&mut self, rng: &mut R) -> PhaseScreen<T> {
        let n = self.grid.n_points();
        let mut spec: Vec<Complex<T>> = self
            .amplitude
            .iter()
            .map(|&a| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im)) * a
            })
            .collect();
        self.fft.inverse_unnormalized(&mut spec);
        let mut phases: Vec<T> = spec.iter().map(|c| c.re).collect();

        let axis = self.grid.axis();
        let mut low = vec![T::zero(); n * n];
        for &(dkp, amps) in &self.subharmonics {
            let mut coeff = [Complex::new(T::zero(), T::zero()); 9];
            for (c, &a) in coeff.iter_mut().zip(&amps) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *c = Complex::new(T::lit(re), T::lit(im)) * a;
            }
            // separable evaluation of Σ c_mn exp(i(m x + n y)Δκ_p)
            let plane = |offset: f64, coord: T| {
                let (s, c) = (T::lit(offset) * dkp * coord).sin_cos();
                Complex::new(c, s)
            };
            let ex: Vec<[Complex<T>; 3]> = axis
                .iter()
                .map(|&x| [plane(-1.0, x), plane(0.0, x), plane(1.0, x)])
                .collect();
            for (b, &y) in axis.iter().enumerate() {
                let ey = [plane(-1.0, y), plane(0.0, y), plane(1.0, y)];
                let mut d = [Complex::new(T::zero(), T::zero()); 3];
                for (m, dm) in d.iter_mut().enumerate() {
                    for (nn, eyn) in ey.iter().enumerate() {
                        *dm = *dm + coeff[m * 3 + nn] * eyn;
                    }
                }
                let row = &mut low[b * n..(b + 1) * n];
                for (v, exa) in row.iter_mut().zip(&ex) {
                    *v += (d[0] * exa[0] + d[1] * exa[1] + d[2] * exa[2]).re;
                }
            }
        }
        let low_mean = low.iter().fold(T::zero(), |a, &v| a + v) / T::of_usize(n * n);
        for (p, l) in phases.iter_mut().zip(&low) {
            *p += *l - low_mean;
        }

        PhaseScreen {
            grid: self.grid,
            phases,
            params: self.params,
            slab_thickness: self.slab_thickness,
        }
    }
}

/// Convenience wrapper around [`ScreenGenerator`] for a single draw.
pub fn generate_phase_screen<T: Real, R: Rng + ?Sized>(
    grid: GridSpec<T>,
    params: TurbulenceParams<T>,
    slab_thickness: T,
    wavelength: T,
    rng: &mut R,
) -> Result<PhaseScreen<T>> {
    Ok(ScreenGenerator::new(grid, params, slab_thickness, wavelength)?.generate(rng))
}

/// Minimum ensemble size accepted by [`structure_function_profile`].
pub const MIN_PROFILE_SCREENS: usize = 100;

/// Roughly log-spaced pixel separations from 1 up to `n/2`.
pub fn default_separations(n_points: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut s = 1.0_f64;
    while (s as usize) <= n_points / 2 {
        let v = s.round() as usize;
        if out.last() != Some(&v) {
            out.push(v);
        }
        s *= 1.2;
    }
    out
}

/// Ensemble phase structure function `E[(θ(x) − θ(x+r))²]`, averaged over
/// positions and the two grid axes. Returns `(r in meters, D(r))` pairs.
pub fn structure_function_profile<T: Real>(
    screens: &[PhaseScreen<T>],
    separations: &[usize],
) -> Result<Vec<(T, T)>> {
    if screens.len() < MIN_PROFILE_SCREENS {
        return Err(Error::statistics(format!(
            "structure function needs >= {MIN_PROFILE_SCREENS} screens, got {}",
            screens.len()
        )));
    }
    let grid = *screens[0].grid();
    if screens.iter().any(|s| !s.grid().same_as(&grid)) {
        return Err(Error::dimension("screens must share one grid"));
    }
    let n = grid.n_points();
    if let Some(&bad) = separations.iter().find(|&&m| m == 0 || m >= n) {
        return Err(Error::domain(format!("separation {bad} px outside 1..{n}")));
    }
    let mut out = Vec::with_capacity(separations.len());
    for &m in separations {
        let mut acc = 0.0_f64;
        for s in screens {
            let p = s.phases();
            let mut sum = T::zero();
            for b in 0..n {
                for a in 0..n - m {
                    let dx = p[b * n + a] - p[b * n + a + m];
                    sum += dx * dx;
                }
            }
            for b in 0..n - m {
                for a in 0..n {
                    let dy = p[b * n + a] - p[(b + m) * n + a];
                    sum += dy * dy;
                }
            }
            acc += sum.as_f64();
        }
        let count = (screens.len() * 2 * n * (n - m)) as f64;
        out.push((T::of_usize(m) * grid.spacing(), T::lit(acc / count)));
    }
    Ok(out)
}

/// Bessel function J0: power series below 8, Hankel asymptotic form above (|error| < 1e-8).
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let q = -0.25 * x * x;
        let (mut term, mut sum) = (1.0_f64, 1.0_f64);
        for k in 1..60 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-3) {
                break;
            }
        }
        sum
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 0.785398164;
        let p = 1.0
            + y * (-0.1098628627e-2
                + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let q = -0.1562499995e-1
            + y * (0.1430488765e-3 + y * (-0.6911147651e-5 + y * (0.7621095161e-6 - y * 0.934935152e-7)));
        (0.636619772 / ax).sqrt() * (xx.cos() * p - z * xx.sin() * q)
    }
}

/// Analytic phase structure function of one slab,
/// `D(r) = 4π ∫ Φ_θ(κ)[1 − J0(κr)] κ dκ`, by log-spaced trapezoid quadrature.
pub fn analytic_structure_function(
    r: f64,
    params: &TurbulenceParams<f64>,
    wavelength: f64,
    slab: f64,
) -> f64 {
    let k = std::f64::consts::TAU / wavelength;
    let lo = (params.kappa_0() * 1e-4).ln();
    let hi = (params.kappa_l() * 8.0).ln();
    let steps = 6000;
    let h = (hi - lo) / steps as f64;
    let mut sum = 0.0;
    for i in 0..=steps {
        let kappa = (lo + i as f64 * h).exp();
        let f = phase_psd(kappa, params, k, slab) * (1.0 - bessel_j0(kappa * r)) * kappa * kappa;
        sum += if i == 0 || i == steps { 0.5 * f } else { f };
    }
    4.0 * std::f64::consts::PI * sum * h
}
