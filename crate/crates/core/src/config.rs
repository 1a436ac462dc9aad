//! Experiment description: TOML file format, validation and cache identity.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detection::DetectionParams;
use crate::error::{Error, Result};
use crate::fields::GridSpec;
use crate::modes::{ModeState, DEFAULT_MAX_STATE};
use crate::propagation::PathConfig;
use crate::turbulence::TurbulenceParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpticsSection {
    pub wavelength_m: f64,
    pub w0_m: f64,
}

impl Default for OpticsSection {
    fn default() -> Self {
        Self {
            wavelength_m: 850e-9,
            w0_m: 0.016,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathSection {
    pub z_m: f64,
    pub screen_spacing_m: f64,
}

impl Default for PathSection {
    fn default() -> Self {
        Self {
            z_m: 1000.0,
            screen_spacing_m: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbulenceSection {
    pub cn2: f64,
    pub inner_scale_m: f64,
    pub outer_scale_m: f64,
}

impl Default for TurbulenceSection {
    fn default() -> Self {
        Self {
            cn2: 1e-15,
            inner_scale_m: 5e-3,
            outer_scale_m: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_points: usize,
    pub extent_m: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_points: 512,
            extent_m: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    pub max_state: u32,
}

impl Default for ModesSection {
    fn default() -> Self {
        Self {
            max_state: DEFAULT_MAX_STATE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub realizations: usize,
    pub base_seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            realizations: 2000,
            base_seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    pub eta: f64,
    pub tau_s: f64,
    pub temperature_k: f64,
    pub load_resistance_ohm: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self {
            eta: 1.0,
            tau_s: 1e-9,
            temperature_k: 300.0,
            load_resistance_ohm: 50.0,
        }
    }
}

/// Full experiment description. Every field has a default, so an empty file is valid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub optics: OpticsSection,
    pub path: PathSection,
    pub turbulence: TurbulenceSection,
    pub grid: GridSection,
    pub modes: ModesSection,
    pub ensemble: EnsembleSection,
    pub detection: DetectionSection,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl SimulationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every physical constraint, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        positive("optics.wavelength_m", self.optics.wavelength_m)?;
        positive("optics.w0_m", self.optics.w0_m)?;
        positive("path.z_m", self.path.z_m)?;
        positive("path.screen_spacing_m", self.path.screen_spacing_m)?;
        if !(self.turbulence.cn2 >= 0.0 && self.turbulence.cn2.is_finite()) {
            return Err(Error::config(format!(
                "turbulence.cn2 must be >= 0, got {}",
                self.turbulence.cn2
            )));
        }
        positive("turbulence.inner_scale_m", self.turbulence.inner_scale_m)?;
        positive("turbulence.outer_scale_m", self.turbulence.outer_scale_m)?;
        positive("grid.extent_m", self.grid.extent_m)?;
        if self.ensemble.realizations == 0 {
            return Err(Error::config("ensemble.realizations must be >= 1"));
        }
        positive("detection.eta", self.detection.eta)?;
        if self.detection.eta > 1.0 {
            return Err(Error::config(format!(
                "detection.eta must be <= 1, got {}",
                self.detection.eta
            )));
        }
        positive("detection.tau_s", self.detection.tau_s)?;
        positive("detection.temperature_k", self.detection.temperature_k)?;
        positive("detection.load_resistance_ohm", self.detection.load_resistance_ohm)?;
        self.grid_spec::<f64>()
            .map_err(|e| Error::config(format!("grid: {e}")))?;
        self.path_config::<f64>()
            .map_err(|e| Error::config(format!("path: {e}")))?;
        self.turbulence_params::<f64>()
            .map_err(|e| Error::config(format!("turbulence: {e}")))?;
        self.detection_params()?;
        Ok(())
    }

    pub fn grid_spec<T: crate::scalar::Real>(&self) -> Result<GridSpec<T>> {
        GridSpec::new(self.grid.n_points, T::lit(self.grid.extent_m))
    }

    pub fn path_config<T: crate::scalar::Real>(&self) -> Result<PathConfig<T>> {
        PathConfig::new(
            T::lit(self.path.z_m),
            T::lit(self.path.screen_spacing_m),
            T::lit(self.optics.wavelength_m),
        )
    }

    pub fn turbulence_params<T: crate::scalar::Real>(&self) -> Result<TurbulenceParams<T>> {
        TurbulenceParams::new(
            T::lit(self.turbulence.cn2),
            T::lit(self.turbulence.inner_scale_m),
            T::lit(self.turbulence.outer_scale_m),
        )
    }

    pub fn detection_params(&self) -> Result<DetectionParams> {
        DetectionParams::new(
            self.detection.eta,
            self.detection.tau_s,
            self.detection.temperature_k,
            self.detection.load_resistance_ohm,
            self.optics.wavelength_m,
        )
    }

    pub fn states(&self) -> Vec<ModeState> {
        ModeState::range(self.modes.max_state)
    }

    /// Canonical text over the fields that determine an ensemble (detection excluded).
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("optics.wavelength_m", format!("{:?}", self.optics.wavelength_m));
        kv("optics.w0_m", format!("{:?}", self.optics.w0_m));
        kv("path.z_m", format!("{:?}", self.path.z_m));
        kv("path.screen_spacing_m", format!("{:?}", self.path.screen_spacing_m));
        kv("turbulence.cn2", format!("{:?}", self.turbulence.cn2));
        kv("turbulence.inner_scale_m", format!("{:?}", self.turbulence.inner_scale_m));
        kv("turbulence.outer_scale_m", format!("{:?}", self.turbulence.outer_scale_m));
        kv("grid.n_points", self.grid.n_points.to_string());
        kv("grid.extent_m", format!("{:?}", self.grid.extent_m));
        kv("modes.max_state", self.modes.max_state.to_string());
        kv("ensemble.realizations", self.ensemble.realizations.to_string());
        kv("ensemble.base_seed", self.ensemble.base_seed.to_string());
        s
    }

    /// SHA-256 of [`canonical_text`](Self::canonical_text).
    pub fn config_hash(&self) -> [u8; 32] {
        Sha256::digest(self.canonical_text().as_bytes()).into()
    }
}

pub fn hash_hex(hash: &[u8; 32]) -> String {
    hash.iter().map(|b| format!("{b:02x}")).collect()
}
