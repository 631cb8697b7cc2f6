//! Flat key–value experiment configuration (TOML syntax).

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::qstate::BellOutcome;
use crate::spectrum::PhysicalParams;

use super::presets::{preset, InputPreset, PRESET_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Alice's noise ramps up, then Bob's ramps up at Alice's maximum.
    AliceThenBob,
    /// Both sides ramp together with equal interaction times.
    EqualRamp,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::AliceThenBob => "alice_then_bob",
            Scenario::EqualRamp => "equal_ramp",
        }
    }
}

/// `(key, unit, description)` for every accepted configuration key.
pub const CONFIG_KEYS: [(&str, &str, &str); 14] = [
    ("scenario", "-", "alice_then_bob (exp1) or equal_ramp (exp2)"),
    ("k", "-", "frequency correlation coefficient in [-1, 1] (default -0.98)"),
    ("pump_wavelength_nm", "nm", "pump wavelength (default 404)"),
    ("filter_fwhm_nm", "nm", "bandpass filter FWHM (default 3)"),
    ("filter_center_nm", "nm", "bandpass filter center (default 808)"),
    ("delta_n", "-", "quartz birefringence n_V - n_H (default 0.00889)"),
    ("x_max_units", "808nm", "maximum optical path difference per side (default 237.6)"),
    ("n_points", "-", "points per ramp segment, >= 2 (default 13)"),
    ("inputs", "-", "input presets: rho_plus, rho_1, rho_2, rho_i (default [\"rho_plus\"])"),
    ("outcomes", "-", "Bell outcomes: phi_plus, phi_minus, psi_plus, psi_minus (default all)"),
    ("compensate_phase", "-", "remove Bob's deterministic pump phase (default true)"),
    ("shots", "counts/basis", "enable simulated tomography with this many shots per Pauli basis"),
    ("resamples", "-", "Monte-Carlo resamples per error bar, >= 100 (default 200)"),
    ("seed", "-", "base RNG seed for tomography mode (default 0)"),
];

struct RawConfig {
    scenario: Option<Scenario>,
    k: Option<f64>,
    pump_wavelength_nm: Option<f64>,
    filter_fwhm_nm: Option<f64>,
    filter_center_nm: Option<f64>,
    delta_n: Option<f64>,
    x_max_units: Option<f64>,
    n_points: Option<i64>,
    inputs: Option<Vec<String>>,
    outcomes: Option<Vec<String>>,
    compensate_phase: Option<bool>,
    shots: Option<i64>,
    resamples: Option<i64>,
    seed: Option<i64>,
}

fn field<T: DeserializeOwned>(table: &toml::Table, key: &str) -> Result<Option<T>> {
    table
        .get(key)
        .map(|v| {
            v.clone()
                .try_into()
                .map_err(|e: toml::de::Error| Error::config(key, format!("bad value {v}: {}", e.message().trim())))
        })
        .transpose()
}

impl RawConfig {
    fn from_table(t: &toml::Table) -> Result<Self> {
        Ok(Self {
            scenario: field(t, "scenario")?,
            k: field(t, "k")?,
            pump_wavelength_nm: field(t, "pump_wavelength_nm")?,
            filter_fwhm_nm: field(t, "filter_fwhm_nm")?,
            filter_center_nm: field(t, "filter_center_nm")?,
            delta_n: field(t, "delta_n")?,
            x_max_units: field(t, "x_max_units")?,
            n_points: field(t, "n_points")?,
            inputs: field(t, "inputs")?,
            outcomes: field(t, "outcomes")?,
            compensate_phase: field(t, "compensate_phase")?,
            shots: field(t, "shots")?,
            resamples: field(t, "resamples")?,
            seed: field(t, "seed")?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographySettings {
    pub shots: u64,
    pub resamples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub k: f64,
    pub physical: PhysicalParams,
    pub x_max_units: f64,
    pub n_points: usize,
    pub inputs: Vec<InputPreset>,
    pub outcomes: Vec<BellOutcome>,
    pub tomography: Option<TomographySettings>,
    pub compensate_phase: bool,
}

pub const DEFAULT_K: f64 = -0.98;
pub const DEFAULT_X_MAX: f64 = 237.6;
pub const DEFAULT_N_POINTS: usize = 13;
pub const DEFAULT_RESAMPLES: usize = 200;

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            k: DEFAULT_K,
            physical: PhysicalParams::default(),
            x_max_units: DEFAULT_X_MAX,
            n_points: DEFAULT_N_POINTS,
            inputs: vec![preset("rho_plus").expect("built-in preset")],
            outcomes: BellOutcome::ALL.to_vec(),
            tomography: None,
            compensate_phase: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.k) {
            return Err(Error::config("k", format!("{} is outside [-1, 1]", self.k)));
        }
        self.physical.validate()?;
        if !(self.x_max_units.is_finite() && self.x_max_units > 0.0) {
            return Err(Error::config("x_max_units", "must be positive"));
        }
        if self.n_points < 2 {
            return Err(Error::config("n_points", "must be at least 2"));
        }
        if self.inputs.is_empty() {
            return Err(Error::config("inputs", "must list at least one preset"));
        }
        if self.outcomes.is_empty() {
            return Err(Error::config("outcomes", "must list at least one outcome"));
        }
        if let Some(t) = self.tomography {
            if t.shots == 0 {
                return Err(Error::config("shots", "must be at least 1"));
            }
            if t.resamples < crate::tomography::MIN_RESAMPLES {
                return Err(Error::config(
                    "resamples",
                    format!("must be at least {}", crate::tomography::MIN_RESAMPLES),
                ));
            }
        }
        Ok(())
    }

    /// Reads a config file (may be absent), applies `key=value` overrides and
    /// validates. A `scenario` key that disagrees with `scenario` is rejected.
    pub fn load(
        scenario: Scenario,
        path: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|source| Error::Io { path: p.to_path_buf(), source })?;
                text.parse::<toml::Table>().map_err(|e| {
                    Error::config(first_key_in(e.message()), format!("{}: {}", p.display(), e.message()))
                })?
            }
            None => toml::Table::new(),
        };
        for (key, value) in overrides {
            table.insert(key.clone(), parse_override(value));
        }
        Self::from_table(scenario, table)
    }

    pub fn from_toml_str(scenario: Scenario, text: &str) -> Result<Self> {
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| Error::config(first_key_in(e.message()), e.message().to_string()))?;
        Self::from_table(scenario, table)
    }

    fn from_table(scenario: Scenario, table: toml::Table) -> Result<Self> {
        for key in table.keys() {
            if !CONFIG_KEYS.iter().any(|(k, _, _)| k == key) {
                return Err(Error::config(key.as_str(), "unknown configuration key"));
            }
        }
        let raw = RawConfig::from_table(&table)?;

        let mut cfg = Self::new(scenario);
        if let Some(s) = raw.scenario {
            if s != scenario {
                return Err(Error::config(
                    "scenario",
                    format!("`{}` does not match this command ({})", s.label(), scenario.label()),
                ));
            }
        }
        if let Some(k) = raw.k {
            cfg.k = k;
        }
        let p = &mut cfg.physical;
        p.pump_wavelength_nm = raw.pump_wavelength_nm.unwrap_or(p.pump_wavelength_nm);
        p.filter_fwhm_nm = raw.filter_fwhm_nm.unwrap_or(p.filter_fwhm_nm);
        p.filter_center_nm = raw.filter_center_nm.unwrap_or(p.filter_center_nm);
        p.delta_n = raw.delta_n.unwrap_or(p.delta_n);
        if let Some(x) = raw.x_max_units {
            cfg.x_max_units = x;
        }
        if let Some(n) = raw.n_points {
            cfg.n_points = non_negative("n_points", n)? as usize;
        }
        if let Some(names) = raw.inputs {
            cfg.inputs = names.iter().map(|n| preset(n)).collect::<Result<_>>()?;
        }
        if let Some(names) = raw.outcomes {
            cfg.outcomes = names
                .iter()
                .map(|n| n.parse().map_err(|_| Error::config("outcomes", format!("unknown outcome `{n}`"))))
                .collect::<Result<_>>()?;
        }
        if let Some(b) = raw.compensate_phase {
            cfg.compensate_phase = b;
        }
        let resamples = match raw.resamples {
            Some(r) => non_negative("resamples", r)? as usize,
            None => DEFAULT_RESAMPLES,
        };
        let seed = match raw.seed {
            Some(s) => non_negative("seed", s)?,
            None => 0,
        };
        if let Some(shots) = raw.shots {
            cfg.tomography = Some(TomographySettings { shots: non_negative("shots", shots)?, resamples, seed });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn non_negative(key: &str, v: i64) -> Result<u64> {
    u64::try_from(v).map_err(|_| Error::config(key, format!("{v} must be non-negative")))
}

/// Values that are not valid TOML (e.g. a bare word) are taken as strings.
fn parse_override(value: &str) -> toml::Value {
    let doc = format!("v = {value}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(value.to_string()),
    }
}

/// Pulls the first backquoted identifier out of a deserializer message.
fn first_key_in(message: &str) -> String {
    CONFIG_KEYS
        .iter()
        .map(|(k, _, _)| *k)
        .find(|k| message.contains(&format!("`{k}`")))
        .map(str::to_string)
        .unwrap_or_else(|| "<config>".to_string())
}

/// Help-text table of configuration keys.
pub fn config_keys_help() -> String {
    let mut s = String::from("Configuration keys (config file or --set key=value):\n");
    for (key, unit, desc) in CONFIG_KEYS {
        s.push_str(&format!("  {key:<20} [{unit}] {desc}\n"));
    }
    s.push_str(&format!("Input presets: {}\n", PRESET_NAMES.join(", ")));
    s
}
