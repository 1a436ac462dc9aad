//! Wave-optics simulation and link analysis for mode-multiplexed free-space optical
//! links with direct detection.
//!
//! The wave-optics layer (fields, modes, screens, propagation) is generic over the
//! scalar type; channel statistics and everything downstream work in `f64`.

pub mod config;
pub mod detection;
pub mod diversity;
pub mod ensemble;
pub mod error;
mod fft;
pub mod fields;
pub mod modes;
pub mod optimizer;
pub mod persist;
pub mod propagation;
pub mod rates;
pub mod scalar;
pub mod stats;
pub mod turbulence;

pub use config::SimulationConfig;
pub use ensemble::{ChannelEnsemble, CouplingMatrix, CrosstalkMatrix};
pub use error::{Error, PersistenceError, Result};
pub use fields::{ComplexField, GridSpec};
pub use modes::ModeState;

pub type Grid64 = fields::GridSpec<f64>;
pub type Grid32 = fields::GridSpec<f32>;
pub type Field64 = fields::ComplexField<f64>;
pub type Field32 = fields::ComplexField<f32>;
pub type Turbulence64 = turbulence::TurbulenceParams<f64>;
