//! Zero-radial-order Laguerre-Gaussian (OAM) modes, modal decomposition and superposition.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{inner_product, overlap, ComplexField, GridSpec};
use crate::scalar::Real;

/// Largest |ℓ| used unless a configuration raises it.
pub const DEFAULT_MAX_STATE: u32 = 10;

/// OAM topological charge ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeState(pub i32);

impl ModeState {
    #[inline]
    pub fn ell(self) -> i32 {
        self.0
    }

    #[inline]
    pub fn order(self) -> u32 {
        self.0.unsigned_abs()
    }

    /// All states `-max..=max` in increasing order.
    pub fn range(max_state: u32) -> Vec<ModeState> {
        let m = max_state as i32;
        (-m..=m).map(ModeState).collect()
    }
}

impl fmt::Display for ModeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 > 0 {
            write!(f, "+{}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for ModeState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .trim_start_matches('+')
            .parse::<i32>()
            .map(ModeState)
            .map_err(|_| Error::domain(format!("not a mode state: {s:?}")))
    }
}

/// Parses a comma separated list such as `0,-10,+10` (or `0,±10`).
pub fn parse_mode_list(s: &str) -> Result<Vec<ModeState>> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some(rest) = tok.strip_prefix('±') {
            let m: ModeState = rest.parse()?;
            out.push(ModeState(-m.0.abs()));
            out.push(ModeState(m.0.abs()));
        } else {
            out.push(tok.parse()?);
        }
    }
    Ok(out)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Checks that an LG mode of order |ℓ| with waist `w0` fits inside the grid window.
pub fn check_mode_fits<T: Real>(state: ModeState, grid: &GridSpec<T>, w0: T) -> Result<()> {
    if !(w0 > T::zero()) {
        return Err(Error::config(format!("beam waist must be > 0, got {w0}")));
    }
    let needed = w0.as_f64() * 6.0 * (state.order() as f64 / 2.0 + 1.0).sqrt();
    if grid.extent().as_f64() < needed {
        return Err(Error::config(format!(
            "mode {state} with w0 = {w0} m needs a window of {needed:.4} m, grid extent is {} m",
            grid.extent()
        )));
    }
    Ok(())
}

/// Zero-radial-order LG beam at its waist:
/// `√(2/(π|ℓ|!))·(1/w0)·(√2 r/w0)^|ℓ|·exp(−r²/w0²)·exp(−jℓφ)`.
pub fn lg_mode_field<T: Real>(state: ModeState, grid: GridSpec<T>, w0: T) -> Result<ComplexField<T>> {
    check_mode_fits(state, &grid, w0)?;
    let order = state.order();
    let ell = state.ell() as f64;
    let w0f = w0.as_f64();
    // log of the normalization, kept in f64 regardless of T
    let ln_norm = 0.5 * (2.0 / std::f64::consts::PI).ln() - 0.5 * ln_factorial(order) - w0f.ln();
    Ok(ComplexField::from_fn(grid, |x, y| {
        let (x, y) = (x.as_f64(), y.as_f64());
        let r2 = x * x + y * y;
        let radial = if order == 0 {
            ln_norm - r2 / (w0f * w0f)
        } else if r2 == 0.0 {
            f64::NEG_INFINITY
        } else {
            let rho = (2.0 * r2).sqrt() / w0f;
            ln_norm + order as f64 * rho.ln() - r2 / (w0f * w0f)
        };
        let amp = radial.exp();
        let phi = y.atan2(x);
        let (s, c) = (ell * phi).sin_cos();
        Complex::new(T::lit(amp * c), T::lit(-amp * s))
    }))
}

/// A set of mode fields on one grid, used for repeated decompositions.
#[derive(Debug, Clone)]
pub struct ModeBasis<T> {
    states: Vec<ModeState>,
    fields: Vec<ComplexField<T>>,
}

impl<T: Real> ModeBasis<T> {
    /// The analytic LG basis at the waist plane.
    pub fn at_waist(states: &[ModeState], grid: GridSpec<T>, w0: T) -> Result<Self> {
        let fields = states
            .iter()
            .map(|&s| lg_mode_field(s, grid, w0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            states: states.to_vec(),
            fields,
        })
    }

    pub fn from_fields(states: Vec<ModeState>, fields: Vec<ComplexField<T>>) -> Result<Self> {
        if states.len() != fields.len() {
            return Err(Error::dimension(format!(
                "{} states but {} fields",
                states.len(),
                fields.len()
            )));
        }
        if let Some(first) = fields.first() {
            if fields.iter().any(|f| !f.grid().same_as(first.grid())) {
                return Err(Error::dimension("basis fields must share one grid"));
            }
        }
        Ok(Self { states, fields })
    }

    pub fn states(&self) -> &[ModeState] {
        &self.states
    }

    pub fn fields(&self) -> &[ComplexField<T>] {
        &self.fields
    }

    pub fn field(&self, state: ModeState) -> Option<&ComplexField<T>> {
        self.states
            .iter()
            .position(|&s| s == state)
            .map(|i| &self.fields[i])
    }

    /// Coefficients `α_i = ⟨field, u_i⟩` for every basis mode.
    pub fn decompose(&self, field: &ComplexField<T>) -> Result<Vec<Complex<T>>> {
        let Some(first) = self.fields.first() else {
            return Ok(Vec::new());
        };
        if !field.grid().same_as(first.grid()) {
            // route through inner_product for the error message
            inner_product(field, first)?;
        }
        let n = field.grid().n_points();
        let da = field.grid().cell_area();
        Ok(self
            .fields
            .iter()
            .map(|u| overlap(field.samples(), u.samples(), n) * da)
            .collect())
    }

    /// Gram matrix `G[a][b] = ⟨u_a, u_b⟩`.
    pub fn gram(&self) -> Vec<Vec<Complex<T>>> {
        self.fields
            .iter()
            .map(|a| {
                self.fields
                    .iter()
                    .map(|b| inner_product(a, b).expect("basis shares one grid"))
                    .collect()
            })
            .collect()
    }
}

/// Projects `field` onto the waist-plane LG modes `states`.
pub fn decompose<T: Real>(
    field: &ComplexField<T>,
    states: &[ModeState],
    w0: T,
) -> Result<Vec<Complex<T>>> {
    ModeBasis::at_waist(states, *field.grid(), w0)?.decompose(field)
}

/// Coherent sum `Σ ρ_k u_k` of waist-plane modes with real amplitudes.
pub fn superpose<T: Real>(
    states: &[ModeState],
    amplitudes: &[T],
    grid: GridSpec<T>,
    w0: T,
) -> Result<ComplexField<T>> {
    if states.len() != amplitudes.len() {
        return Err(Error::dimension(format!(
            "{} states but {} amplitudes",
            states.len(),
            amplitudes.len()
        )));
    }
    if amplitudes.iter().any(|a| !a.is_finite()) {
        return Err(Error::domain("amplitudes must be finite"));
    }
    let mut out = ComplexField::zeros(grid);
    for (&s, &rho) in states.iter().zip(amplitudes) {
        let u = lg_mode_field(s, grid, w0)?;
        out.add_scaled(Complex::new(rho, T::zero()), &u)?;
    }
    Ok(out)
}
