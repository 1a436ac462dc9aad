//! Sampled square grids and complex optical fields on them.
//!
//! Samples are stored row-major: `samples[b * n + a]` holds the value at
//! `x = (a - n/2)·Δ`, `y = (b - n/2)·Δ`. Field amplitudes are in √W/m so the
//! Riemann sum `Σ|u|²·Δ²` is optical power in watts.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest grid accepted by [`GridSpec::new`].
pub const MIN_GRID_POINTS: usize = 64;

/// Square, centered sampling grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    n_points: usize,
    extent: T,
}

impl<T: Real> GridSpec<T> {
    /// Grid with `n_points` samples per side over a physical side length `extent` (m).
    pub fn new(n_points: usize, extent: T) -> Result<Self> {
        if n_points < MIN_GRID_POINTS || !n_points.is_power_of_two() {
            return Err(Error::config(format!(
                "grid n_points must be a power of two >= {MIN_GRID_POINTS}, got {n_points}"
            )));
        }
        if !(extent > T::zero()) || !extent.is_finite() {
            return Err(Error::config(format!("grid extent must be > 0, got {extent}")));
        }
        Ok(Self { n_points, extent })
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn extent(&self) -> T {
        self.extent
    }

    /// Sample pitch Δ = extent / n_points.
    #[inline]
    pub fn spacing(&self) -> T {
        self.extent / T::of_usize(self.n_points)
    }

    /// Area element Δ² used by every Riemann sum.
    #[inline]
    pub fn cell_area(&self) -> T {
        let d = self.spacing();
        d * d
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_points * self.n_points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical coordinate of index `a` along either axis.
    #[inline]
    pub fn coordinate(&self, a: usize) -> T {
        (T::of_usize(a) - T::of_usize(self.n_points / 2)) * self.spacing()
    }

    /// Coordinates along one axis, in index order.
    pub fn axis(&self) -> Vec<T> {
        (0..self.n_points).map(|a| self.coordinate(a)).collect()
    }

    /// Angular spatial frequency (rad/m) of FFT bin `a` in standard (unshifted) order.
    #[inline]
    pub fn angular_frequency(&self, a: usize) -> T {
        let n = self.n_points;
        let signed = if a < n / 2 {
            a as f64
        } else {
            a as f64 - n as f64
        };
        T::lit(signed) * T::TAU() / self.extent
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.extent == other.extent
    }
}

/// Complex field sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField<T> {
    grid: GridSpec<T>,
    samples: Vec<Complex<T>>,
}

impl<T: Real> ComplexField<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self {
            grid,
            samples: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn from_samples(grid: GridSpec<T>, samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::dimension(format!(
                "{} samples for a {}x{} grid",
                samples.len(),
                grid.n_points(),
                grid.n_points()
            )));
        }
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::domain("field samples must be finite"));
        }
        Ok(Self { grid, samples })
    }

    /// Evaluates `f(x, y)` at every sample position.
    pub fn from_fn(grid: GridSpec<T>, mut f: impl FnMut(T, T) -> Complex<T>) -> Self {
        let axis = grid.axis();
        let mut samples = Vec::with_capacity(grid.len());
        for &y in &axis {
            for &x in &axis {
                samples.push(f(x, y));
            }
        }
        Self { grid, samples }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    /// Sample at column `a`, row `b`.
    #[inline]
    pub fn at(&self, a: usize, b: usize) -> Complex<T> {
        self.samples[b * self.grid.n_points() + a]
    }

    /// Total power `Σ|u|²·Δ²`.
    pub fn power(&self) -> T {
        sum_rows(&self.samples, self.grid.n_points(), |s| s.norm_sqr()) * self.grid.cell_area()
    }

    pub fn intensity(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.norm_sqr()).collect()
    }

    pub fn scale(&mut self, c: Complex<T>) {
        for s in &mut self.samples {
            *s = *s * c;
        }
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c·other`.
    pub fn add_scaled(&mut self, c: Complex<T>, other: &Self) -> Result<()> {
        check_grids(&self.grid, &other.grid)?;
        for (s, o) in self.samples.iter_mut().zip(&other.samples) {
            *s = *s + *o * c;
        }
        Ok(())
    }
}

fn check_grids<T: Real>(a: &GridSpec<T>, b: &GridSpec<T>) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::dimension(format!(
            "grid mismatch: {}x{} over {} m vs {}x{} over {} m",
            a.n_points(),
            a.n_points(),
            a.extent(),
            b.n_points(),
            b.n_points(),
            b.extent()
        )))
    }
}

/// Row-wise then total summation; keeps f32 accumulation error small on large grids.
fn sum_rows<S: Copy, T: Real>(values: &[S], row: usize, f: impl Fn(S) -> T) -> T {
    values
        .chunks(row)
        .map(|r| r.iter().fold(T::zero(), |acc, &v| acc + f(v)))
        .fold(T::zero(), |acc, v| acc + v)
}

/// Overlap `∫ a·b* dA` as a Riemann sum over the shared grid.
pub fn inner_product<T: Real>(a: &ComplexField<T>, b: &ComplexField<T>) -> Result<Complex<T>> {
    check_grids(&a.grid, &b.grid)?;
    Ok(overlap(&a.samples, &b.samples, a.grid.n_points()) * a.grid.cell_area())
}

/// Unscaled `Σ a·conj(b)`, accumulated per row.
pub(crate) fn overlap<T: Real>(a: &[Complex<T>], b: &[Complex<T>], row: usize) -> Complex<T> {
    let zero = Complex::new(T::zero(), T::zero());
    a.chunks(row)
        .zip(b.chunks(row))
        .map(|(ra, rb)| {
            let (mut re, mut im) = (T::zero(), T::zero());
            for (x, y) in ra.iter().zip(rb) {
                // x · conj(y)
                re += x.re * y.re + x.im * y.im;
                im += x.im * y.re - x.re * y.im;
            }
            Complex::new(re, im)
        })
        .fold(zero, |acc, v| acc + v)
}
