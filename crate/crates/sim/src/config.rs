//! Scenario configuration: a TOML document whose sections mirror the model,
//! pulse, integrator, analysis and output settings. Missing keys take the
//! documented defaults, unknown keys are rejected.
//!
//! Two defaults are derived rather than fixed: a pulse without `omegaDrive`
//! is resonant with the lower polariton at its `kCenter`, and an integrator
//! without `frameOmega` rotates with the pump carrier.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use polaritrans_core::integrate::IntegratorConfig;
use polaritrans_core::model::polariton_frequencies;
use polaritrans_core::{ModelParams, PulseSpec};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{ConfigError, Result, SimError};
use crate::pipeline::{AnalysisOptions, PumpProbeSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Dispersion,
    PumpOnly,
    #[default]
    PumpProbe,
    SweepMomentum,
    SweepDephasing,
    BeerLambert,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dispersion => "dispersion",
            Self::PumpOnly => "pump-only",
            Self::PumpProbe => "pump-probe",
            Self::SweepMomentum => "sweep-momentum",
            Self::SweepDephasing => "sweep-dephasing",
            Self::BeerLambert => "beer-lambert",
        }
    }

    pub fn is_sweep(self) -> bool {
        matches!(self, Self::SweepMomentum | Self::SweepDephasing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Text,
    Binary,
    Both,
}

impl Format {
    pub fn text(self) -> bool {
        matches!(self, Self::Text | Self::Both)
    }

    pub fn binary(self) -> bool {
        matches!(self, Self::Binary | Self::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: Format::Text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Axis values of a sweep: k_p in μm⁻¹ or γ_φ in eV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<Vec<f64>>,
    pub model: ModelParams,
    pub pump: PulseSpec,
    pub probe: PulseSpec,
    pub integrator: IntegratorConfig,
    pub analysis: AnalysisOptions,
    pub output: OutputOptions,
}

/// Default pulse amplitude η, small enough for the weak-drive regime.
pub const DEFAULT_AMPLITUDE: f64 = 1e-3;

impl Default for ScenarioConfig {
    fn default() -> Self {
        let model = ModelParams::default();
        let pump = PulseSpec::resonant_lp(&model, DEFAULT_AMPLITUDE, PI / 2.0, -50.0, 200.0);
        let probe = PulseSpec::resonant_lp(&model, DEFAULT_AMPLITUDE, -PI / 2.0, 50.0, 200.0);
        let integrator = IntegratorConfig {
            frame_omega: pump.omega_drive,
            ..IntegratorConfig::default()
        };
        Self {
            scenario: Scenario::default(),
            sweep_axis: None,
            model,
            pump,
            probe,
            integrator,
            analysis: AnalysisOptions::default(),
            output: OutputOptions::default(),
        }
    }
}

impl ScenarioConfig {
    /// Checks every section and the cross-section requirements.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.pump.validate(&self.model)?;
        self.probe.validate(&self.model)?;
        self.integrator.validate(&self.model)?;
        let a = &self.analysis;
        if a.delays.is_empty() || a.delays.iter().any(|d| !d.is_finite()) {
            return Err(validation("analysis.delays must be a non-empty list of finite values"));
        }
        if !(a.band_half_width > 0.0) {
            return Err(validation("analysis.bandHalfWidth must be positive"));
        }
        if !(a.window_offset_widths >= 0.0) {
            return Err(validation("analysis.windowOffsetWidths must be non-negative"));
        }
        if self.scenario.is_sweep() {
            match &self.sweep_axis {
                None => {
                    return Err(validation(format!(
                        "scenario {} requires sweepAxis",
                        self.scenario.name()
                    )))
                }
                Some(v) if v.is_empty() => return Err(validation("sweepAxis must not be empty")),
                Some(v) => {
                    for &x in v {
                        let ok = match self.scenario {
                            Scenario::SweepMomentum => x.is_finite() && x.abs() <= self.model.k_max(),
                            _ => x.is_finite() && x >= 0.0,
                        };
                        if !ok {
                            return Err(validation(format!("sweepAxis value {x} is out of range")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The pump-probe experiment described by this configuration.
    pub fn setup(&self) -> PumpProbeSetup {
        PumpProbeSetup {
            params: self.model.clone(),
            pump: self.pump.clone(),
            probe: self.probe.clone(),
            integrator: self.integrator.clone(),
            analysis: self.analysis.clone(),
        }
    }

    /// The complete configuration as TOML, every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}

fn validation(msg: impl Into<String>) -> SimError {
    ConfigError::Validation(msg.into()).into()
}

/// Parses and validates a configuration document, applying `overrides`
/// (`section.key=value`) on top of it.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ScenarioConfig> {
    let mut user: Table = toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    for o in overrides {
        apply_override(&mut user, o)?;
    }
    let mut merged = Table::try_from(ScenarioConfig::default()).expect("defaults serialize");
    for (section, derived) in [("pump", "omegaDrive"), ("probe", "omegaDrive"), ("integrator", "frameOmega")] {
        if let Some(Value::Table(t)) = merged.get_mut(section) {
            t.remove(derived);
        }
    }
    merge(&mut merged, user);

    let model: ModelParams = section(&merged, "model", text)?;
    for name in ["pump", "probe"] {
        let t = table_mut(&mut merged, name);
        if !t.contains_key("omegaDrive") {
            let k = t.get("kCenter").and_then(as_f64).unwrap_or(0.0);
            t.insert("omegaDrive".into(), Value::Float(polariton_frequencies(k, &model).1));
        }
    }
    let pump_omega = table_mut(&mut merged, "pump").get("omegaDrive").and_then(as_f64).unwrap_or(0.0);
    table_mut(&mut merged, "integrator")
        .entry("frameOmega")
        .or_insert(Value::Float(pump_omega));

    let cfg: ScenarioConfig = Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| deserialize_error(e, text))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a configuration file; see [`parse_config`].
pub fn load_config(path: &Path, overrides: &[String]) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_config(&text, overrides)
}

/// Writes the full configuration so that loading it reproduces `cfg`.
pub fn save_config(cfg: &ScenarioConfig, path: &Path) -> Result<()> {
    std::fs::write(path, cfg.to_toml()).map_err(|e| SimError::io(path, e))
}

fn section<T: serde::de::DeserializeOwned>(merged: &Table, name: &str, text: &str) -> Result<T> {
    let t = merged.get(name).cloned().unwrap_or(Value::Table(Table::new()));
    t.try_into().map_err(|e: toml::de::Error| deserialize_error(e, text))
}

fn table_mut<'a>(t: &'a mut Table, name: &str) -> &'a mut Table {
    let v = t.entry(name).or_insert(Value::Table(Table::new()));
    if !v.is_table() {
        *v = Value::Table(Table::new());
    }
    v.as_table_mut().expect("just made a table")
}

fn as_f64(v: &Value) -> Option<f64> {
    v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
}

/// Recursively overlays `user` on `base`; tables merge, other values replace.
fn merge(base: &mut Table, user: Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn apply_override(t: &mut Table, o: &str) -> Result<()> {
    let (path, raw) = o.split_once('=').ok_or_else(|| ConfigError::Override(o.to_string()))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::Override(o.to_string()).into());
    }
    let value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let (last, parents) = keys.split_last().expect("non-empty path");
    let mut cur = t;
    for k in parents {
        cur = table_mut(cur, k);
    }
    cur.insert((*last).to_string(), value);
    Ok(())
}

fn deserialize_error(e: toml::de::Error, text: &str) -> SimError {
    let msg = e.message();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        let key = rest.split('`').next().unwrap_or_default().to_string();
        let line = find_key_line(text, &key);
        return ConfigError::UnknownKey { key, line }.into();
    }
    if let Some(rest) = msg.strip_prefix("unknown variant `") {
        let value = rest.split('`').next().unwrap_or_default();
        return validation(format!("unknown value `{value}`: {msg}"));
    }
    validation(msg.to_string())
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// First line assigning `key`, for error messages.
fn find_key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .map(|r| r.trim_start().starts_with('='))
            .unwrap_or(false)
            || l.contains(&format!(".{key}"))
                && l.split('=').next().is_some_and(|lhs| lhs.trim().ends_with(&format!(".{key}")))
    })
    .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config("", &[]).unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn derived_defaults_follow_the_wavevector() {
        let cfg = parse_config("[pump]\nkCenter = 0.7853981633974483\n", &[]).unwrap();
        let w = polariton_frequencies(PI / 4.0, &cfg.model).1;
        assert_eq!(cfg.pump.omega_drive, w);
        assert_eq!(cfg.integrator.frame_omega, w);
        let cfg = parse_config("[integrator]\nframeOmega = 0.0\n", &[]).unwrap();
        assert_eq!(cfg.integrator.frame_omega, 0.0);
    }

    #[test]
    fn overrides() {
        let cfg = parse_config("", &["model.gammaPhi=0.0025".into(), "scenario=dispersion".into()]).unwrap();
        assert_eq!(cfg.model.gamma_phi, 0.0025);
        assert_eq!(cfg.scenario, Scenario::Dispersion);
        assert!(matches!(
            parse_config("", &["nonsense".into()]),
            Err(SimError::Config(ConfigError::Override(_)))
        ));
    }

    #[test]
    fn line_lookup() {
        assert_eq!(line_of("a\nb\nc", 2), 2);
        assert_eq!(find_key_line("[model]\n  kapa = 1\n", "kapa"), Some(2));
        assert_eq!(find_key_line("model.kapa = 1\n", "kapa"), Some(1));
        assert_eq!(find_key_line("kappa = 1\n", "kapa"), None);
    }
}
