//! Angular-spectrum vacuum steps and symmetric split-step propagation through
//! a stack of thin phase screens.
//!
//! A path of `total/spacing` segments places one screen at the center of each
//! segment. Adjacent half steps between screens are merged, so the sequence is
//! `Δz/2, screen, Δz, screen, …, screen, Δz/2`, with the absorbing window applied
//! after every vacuum step.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::fields::{ComplexField, GridSpec};
use crate::scalar::Real;
use crate::turbulence::{PhaseScreen, ScreenGenerator, TurbulenceParams};

/// Fraction of the grid width (per side) covered by the absorbing window.
pub const WINDOW_FRACTION: f64 = 0.1;
/// Super-Gaussian order of the absorbing window edge.
pub const WINDOW_ORDER: i32 = 8;

/// Propagation distance, screen spacing and wavelength, all in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig<T> {
    total_distance: T,
    screen_spacing: T,
    wavelength: T,
}

impl<T: Real> PathConfig<T> {
    pub fn new(total_distance: T, screen_spacing: T, wavelength: T) -> Result<Self> {
        for (name, v) in [
            ("total distance", total_distance),
            ("screen spacing", screen_spacing),
            ("wavelength", wavelength),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::config(format!("{name} must be > 0, got {v}")));
            }
        }
        let ratio = (total_distance / screen_spacing).as_f64();
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(Error::config(format!(
                "total distance {total_distance} m is not a multiple of screen spacing {screen_spacing} m"
            )));
        }
        Ok(Self {
            total_distance,
            screen_spacing,
            wavelength,
        })
    }

    pub fn total_distance(&self) -> T {
        self.total_distance
    }

    pub fn screen_spacing(&self) -> T {
        self.screen_spacing
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    pub fn wavenumber(&self) -> T {
        T::TAU() / self.wavelength
    }

    /// Number of segments (and screens).
    pub fn segments(&self) -> usize {
        (self.total_distance / self.screen_spacing).as_f64().round() as usize
    }
}

/// Checks `λ·Δz ≤ Δ·L`, the sampling bound of the angular-spectrum transfer function.
pub fn check_sampling<T: Real>(grid: &GridSpec<T>, dz: T, wavelength: T) -> Result<()> {
    if wavelength * dz > grid.spacing() * grid.extent() {
        return Err(Error::config(format!(
            "step of {dz} m at {wavelength} m aliases on a {}-point grid over {} m (λΔz must be <= ΔL = {})",
            grid.n_points(),
            grid.extent(),
            grid.spacing() * grid.extent()
        )));
    }
    Ok(())
}

/// Unitary angular-spectrum transfer function for one step, pre-scaled by 1/n²
/// and stored in the transposed spectral layout.
fn transfer_function<T: Real>(grid: &GridSpec<T>, dz: T, wavelength: T) -> Vec<Complex<T>> {
    let n = grid.n_points();
    let k = T::TAU() / wavelength;
    let norm = T::one() / T::of_usize(n * n);
    let mut h = Vec::with_capacity(n * n);
    for i in 0..n {
        let ki = grid.angular_frequency(i);
        for j in 0..n {
            let kj = grid.angular_frequency(j);
            // s = (κ/k)²; phase k·dz·(√(1−s) − 1) written without cancellation
            let s = (ki * ki + kj * kj) / (k * k);
            let v = if s < T::one() {
                let phase = -k * dz * s / (T::one() + (T::one() - s).sqrt());
                let (sn, cs) = phase.sin_cos();
                Complex::new(cs * norm, sn * norm)
            } else {
                Complex::new(T::zero(), T::zero())
            };
            h.push(v);
        }
    }
    h
}

/// Separable super-Gaussian edge profile along one axis.
fn window_profile<T: Real>(grid: &GridSpec<T>) -> Vec<T> {
    let l = grid.extent().as_f64();
    let inner = (0.5 - WINDOW_FRACTION) * l;
    let width = 0.5 * WINDOW_FRACTION * l;
    grid.axis()
        .iter()
        .map(|&x| {
            let ax = x.as_f64().abs();
            if ax <= inner {
                T::one()
            } else {
                T::lit((-((ax - inner) / width).powi(WINDOW_ORDER)).exp())
            }
        })
        .collect()
}

/// One vacuum propagation step of `dz` meters (no window).
pub fn angular_spectrum_step<T: Real>(field: &ComplexField<T>, dz: T, wavelength: T) -> Result<ComplexField<T>> {
    if !(dz >= T::zero()) {
        return Err(Error::domain(format!("step length must be >= 0, got {dz}")));
    }
    if !(wavelength > T::zero()) {
        return Err(Error::domain(format!("wavelength must be > 0, got {wavelength}")));
    }
    if dz == T::zero() {
        return Ok(field.clone());
    }
    let grid = *field.grid();
    let h = transfer_function(&grid, dz, wavelength);
    let mut fft = Fft2::new(grid.n_points());
    let mut out = field.clone();
    apply_transfer(&mut fft, out.samples_mut(), &h);
    Ok(out)
}

fn apply_transfer<T: Real>(fft: &mut Fft2<T>, data: &mut [Complex<T>], h: &[Complex<T>]) {
    fft.forward(data);
    for (d, t) in data.iter_mut().zip(h) {
        *d = *d * t;
    }
    fft.inverse_unnormalized(data);
}

/// Multiplies the field by `exp(iθ)`; intensities are unchanged.
pub fn apply_screen<T: Real>(field: &mut ComplexField<T>, screen: &PhaseScreen<T>) -> Result<()> {
    if screen.grid() != field.grid() {
        return Err(Error::dimension("screen and field grids differ"));
    }
    for (u, &p) in field.samples_mut().iter_mut().zip(screen.phases()) {
        let (s, c) = p.sin_cos();
        *u = *u * Complex::new(c, s);
    }
    Ok(())
}

/// Precomputed `exp(iθ)` for every screen of one realization.
#[derive(Debug, Clone)]
pub struct ScreenStack<T> {
    phasors: Vec<Vec<Complex<T>>>,
}

impl<T: Real> ScreenStack<T> {
    pub fn from_screens(screens: &[PhaseScreen<T>]) -> Self {
        Self {
            phasors: screens.iter().map(PhaseScreen::phasors).collect(),
        }
    }

    /// Draws one screen per path segment from `rng`.
    pub fn draw<R: Rng + ?Sized>(generator: &mut ScreenGenerator<T>, count: usize, rng: &mut R) -> Self {
        Self {
            phasors: (0..count).map(|_| generator.generate(rng).phasors()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.phasors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phasors.is_empty()
    }
}

/// Split-step propagator for a fixed grid and path.
#[derive(Clone)]
pub struct SplitStep<T: Real> {
    grid: GridSpec<T>,
    path: PathConfig<T>,
    half: Vec<Complex<T>>,
    full: Vec<Complex<T>>,
    window: Option<Vec<T>>,
    fft: Fft2<T>,
}

impl<T: Real> SplitStep<T> {
    /// `absorbing` enables the edge window after each vacuum step.
    pub fn new(grid: GridSpec<T>, path: PathConfig<T>, absorbing: bool) -> Result<Self> {
        check_sampling(&grid, path.screen_spacing(), path.wavelength())?;
        let dz = path.screen_spacing();
        Ok(Self {
            grid,
            path,
            half: transfer_function(&grid, dz / T::lit(2.0), path.wavelength()),
            full: transfer_function(&grid, dz, path.wavelength()),
            window: absorbing.then(|| window_profile(&grid)),
            fft: Fft2::new(grid.n_points()),
        })
    }

    pub fn path(&self) -> &PathConfig<T> {
        &self.path
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    fn vacuum(&mut self, data: &mut [Complex<T>], full: bool) {
        let h = if full { &self.full } else { &self.half };
        apply_transfer(&mut self.fft, data, h);
        if let Some(w) = &self.window {
            let n = self.grid.n_points();
            for (row, &wy) in data.chunks_mut(n).zip(w) {
                for (u, &wx) in row.iter_mut().zip(w) {
                    *u = *u * (wx * wy);
                }
            }
        }
    }

    fn run(&mut self, field: &ComplexField<T>, screens: Option<&ScreenStack<T>>) -> Result<ComplexField<T>> {
        if field.grid() != &self.grid {
            return Err(Error::dimension("field grid differs from propagator grid"));
        }
        let segments = self.path.segments();
        if let Some(s) = screens {
            if s.len() != segments {
                return Err(Error::dimension(format!(
                    "{} screens for a {segments}-segment path",
                    s.len()
                )));
            }
        }
        let mut data = field.clone().into_samples();
        for seg in 0..segments {
            self.vacuum(&mut data, seg > 0);
            if let Some(s) = screens {
                for (u, p) in data.iter_mut().zip(&s.phasors[seg]) {
                    *u = *u * p;
                }
            }
        }
        self.vacuum(&mut data, false);
        ComplexField::from_samples(self.grid, data)
    }

    /// Same stepping (and window) as a turbulent run, without screens.
    pub fn propagate_vacuum(&mut self, field: &ComplexField<T>) -> Result<ComplexField<T>> {
        self.run(field, None)
    }

    pub fn propagate(&mut self, field: &ComplexField<T>, screens: &ScreenStack<T>) -> Result<ComplexField<T>> {
        self.run(field, Some(screens))
    }
}

/// Draws a fresh screen stack from `rng` and propagates `field` through it.
pub fn propagate_turbulent<T: Real, R: Rng + ?Sized>(
    field: &ComplexField<T>,
    path: PathConfig<T>,
    params: TurbulenceParams<T>,
    rng: &mut R,
) -> Result<ComplexField<T>> {
    let grid = *field.grid();
    let mut gen = ScreenGenerator::new(grid, params, path.screen_spacing(), path.wavelength())?;
    let stack = ScreenStack::draw(&mut gen, path.segments(), rng);
    SplitStep::new(grid, path, true)?.propagate(field, &stack)
}
