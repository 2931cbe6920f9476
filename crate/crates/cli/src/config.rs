//! `TomographyConfig`: one JSON document describing the true state, the
//! measurement settings and the tolerances a comparison report checks.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use pentomo_core::state::{build_entangled_state, EntangledState, SpinRotation};
use pentomo_core::tomography::{ReconstructionParams, CONSISTENCY_TOLERANCE, DEFAULT_COND_LIMIT};
use pentomo_core::wigner::GridSpec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Events per phase of the paper-scale preset.
pub const PAPER_SCALE_EVENTS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateParams {
    pub c1: f64,
    pub c2_mod: f64,
    pub theta: f64,
    pub gamma: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub chi: f64,
    pub phi_d: f64,
}

impl PulseSpec {
    pub fn rotation(&self) -> SpinRotation {
        SpinRotation::new(self.chi, self.phi_d)
    }
}

/// Limits checked by `report`; absent entries are not checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho11_max_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho22_max_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho12_max_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho12_imag_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_abs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    pub state: StateParams,
    /// Cutoff of the simulated state; defaults to `nc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_cutoff: Option<usize>,
    /// Reconstruction cutoff.
    pub nc: usize,
    /// Highest count used in the fit.
    pub n: usize,
    pub alpha_mod: f64,
    /// Number of drive phases; defaults to `2 nc + 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<usize>,
    pub eta: f64,
    pub events_per_phase: u64,
    /// Events per spin-pulse run; defaults to `events_per_phase`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_events: Option<u64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub psd_projection: bool,
    #[serde(default)]
    pub exact_mode: bool,
    #[serde(default = "default_pulses")]
    pub spin_pulses: Vec<PulseSpec>,
    #[serde(default = "default_cond_limit")]
    pub cond_limit: f64,
    #[serde(default = "default_spin_tolerance")]
    pub spin_tolerance: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_pulses() -> Vec<PulseSpec> {
    vec![
        PulseSpec {
            chi: FRAC_PI_2,
            phi_d: 0.0,
        },
        PulseSpec {
            chi: FRAC_PI_2,
            phi_d: FRAC_PI_2,
        },
    ]
}

fn default_cond_limit() -> f64 {
    DEFAULT_COND_LIMIT
}

fn default_spin_tolerance() -> f64 {
    CONSISTENCY_TOLERANCE
}

impl TomographyConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let config: Self = serde_json::from_str(&text).map_err(Error::json(path))?;
        config.validate()?;
        Ok(config)
    }

    pub fn phases(&self) -> usize {
        self.phases.unwrap_or(2 * self.nc + 2)
    }

    pub fn state_cutoff(&self) -> usize {
        self.state_cutoff.unwrap_or(self.nc)
    }

    pub fn pulse_events(&self) -> u64 {
        self.pulse_events.unwrap_or(self.events_per_phase)
    }

    /// Fills in the defaulted fields so the sidecar records what was run.
    pub fn resolved(&self) -> Self {
        Self {
            phases: Some(self.phases()),
            state_cutoff: Some(self.state_cutoff()),
            pulse_events: Some(self.pulse_events()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.state;
        for (field, value) in [
            ("state.c1", s.c1),
            ("state.c2_mod", s.c2_mod),
            ("state.theta", s.theta),
            ("state.gamma", s.gamma),
            ("state.xi", s.xi),
            ("alpha_mod", self.alpha_mod),
            ("eta", self.eta),
        ] {
            if !value.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if s.c1 < 0.0 || s.c2_mod < 0.0 {
            return Err(Error::config("state", "c1 and c2_mod must be non-negative"));
        }
        let norm = s.c1 * s.c1 + s.c2_mod * s.c2_mod;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "state",
                format!("c1^2 + c2_mod^2 = {norm}, expected 1"),
            ));
        }
        if self.n < self.nc {
            return Err(Error::config(
                "n",
                format!("{} is below nc = {}", self.n, self.nc),
            ));
        }
        if self.phases() < 2 * self.nc + 1 {
            return Err(Error::config(
                "phases",
                format!("{} < 2 nc + 1 = {}", self.phases(), 2 * self.nc + 1),
            ));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::config(
                "eta",
                format!("{} is outside (0, 1]", self.eta),
            ));
        }
        if self.alpha_mod < 0.0 {
            return Err(Error::config("alpha_mod", "must be non-negative"));
        }
        if !self.exact_mode && self.events_per_phase == 0 {
            return Err(Error::config("events_per_phase", "must be at least 1"));
        }
        if !self.exact_mode && !self.spin_pulses.is_empty() && self.pulse_events() == 0 {
            return Err(Error::config("pulse_events", "must be at least 1"));
        }
        if self
            .spin_pulses
            .iter()
            .any(|p| !p.chi.is_finite() || !p.phi_d.is_finite())
        {
            return Err(Error::config("spin_pulses", "angles must be finite"));
        }
        if !(self.cond_limit > 1.0) {
            return Err(Error::config("cond_limit", "must exceed 1"));
        }
        if !(self.spin_tolerance >= 0.0) {
            return Err(Error::config("spin_tolerance", "must be non-negative"));
        }
        Ok(())
    }

    /// The true state at the simulation cutoff.
    pub fn true_state(&self) -> Result<EntangledState> {
        self.state_at(self.state_cutoff())
    }

    /// The true state truncated to `cutoff`.
    pub fn state_at(&self, cutoff: usize) -> Result<EntangledState> {
        let s = &self.state;
        Ok(build_entangled_state(
            s.c1, s.c2_mod, s.theta, s.gamma, s.xi, cutoff,
        )?)
    }

    pub fn reconstruction_params(&self) -> ReconstructionParams {
        let mut params = ReconstructionParams::new(self.nc, self.n, self.alpha_mod, self.eta);
        params.cond_limit = self.cond_limit;
        params.psd_projection = self.psd_projection;
        params.spin_tolerance = self.spin_tolerance;
        params
    }
}

/// Wigner grid flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl From<GridConfig> for GridSpec {
    fn from(g: GridConfig) -> Self {
        GridSpec {
            x_min: g.x_min,
            x_max: g.x_max,
            y_min: g.y_min,
            y_max: g.y_max,
            nx: g.nx,
            ny: g.ny,
        }
    }
}

impl From<GridSpec> for GridConfig {
    fn from(g: GridSpec) -> Self {
        GridConfig {
            x_min: g.x_min,
            x_max: g.x_max,
            y_min: g.y_min,
            y_max: g.y_max,
            nx: g.nx,
            ny: g.ny,
        }
    }
}
