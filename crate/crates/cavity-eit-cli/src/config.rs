//! Run configuration: strict JSON schema, validation, and unit resolution.
//!
//! Rates are given relative to κ; the physical scale enters once through
//! `kappa_MHz` (κ/2π in MHz) and everything is resolved to angular
//! frequencies in rad/µs with times in µs.

use std::path::PathBuf;

use anyhow::{bail, Context};
use cavity_eit::model::{GaussianPulse, SystemParams};
use cavity_eit::pulse::ModelVariant;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Spectrum,
    Pulse,
    Store,
    Gate,
    Sweep,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Spectrum => "spectrum",
            Scenario::Pulse => "pulse",
            Scenario::Store => "store",
            Scenario::Gate => "gate",
            Scenario::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    /// κ/2π in MHz.
    #[serde(rename = "kappa_MHz")]
    pub kappa_mhz: f64,
    pub g_over_kappa: f64,
    pub gamma_31_over_kappa: f64,
    pub gamma_32_over_kappa: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub delta_over_kappa: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub omega_c_over_kappa: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub epsilon_over_kappa: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub kappa_b_over_kappa: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub t0_us: f64,
    pub fwhm_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: GridSpacing,
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        match self.spacing {
            GridSpacing::Linear => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
            GridSpacing::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..n)
                    .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// "standard" (default) or "as-printed".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Delay of the target pulse maximum after the control pulse maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_delay_us: Option<f64>,
    /// Control-field clamp of the storage synthesis, in units of κ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max_over_kappa: Option<f64>,
    /// Replace the pulse by the quasi-monochromatic one (FWHM = 20/κ).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_pulse: Option<bool>,
    /// Fock truncation of the steady-state engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_fock: Option<usize>,
    /// Runs are deterministic; only `true` is accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seedless: Option<bool>,
}

/// Parse a strict JSON configuration document.
///
/// Unknown keys are rejected, missing required keys are named individually,
/// and non-physical values are rejected with the offending path.
pub fn parse_config(text: &str) -> anyhow::Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).context("invalid configuration")?;
    validate(&config)?;
    Ok(config)
}

fn validate(config: &RunConfig) -> anyhow::Result<()> {
    let p = &config.params;
    if !(p.kappa_mhz > 0.0) || !p.kappa_mhz.is_finite() {
        bail!("params.kappa_MHz: must be finite and > 0, got {}", p.kappa_mhz);
    }
    for (path, v) in [
        ("params.g_over_kappa", p.g_over_kappa),
        ("params.gamma_31_over_kappa", p.gamma_31_over_kappa),
        ("params.gamma_32_over_kappa", p.gamma_32_over_kappa),
        ("params.omega_c_over_kappa", p.omega_c_over_kappa),
        ("params.epsilon_over_kappa", p.epsilon_over_kappa),
        ("params.kappa_b_over_kappa", p.kappa_b_over_kappa),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            bail!("{path}: must be finite and >= 0, got {v}");
        }
    }
    if p.kappa_b_over_kappa >= 1.0 {
        bail!(
            "params.kappa_b_over_kappa: must be < 1 (fraction of total κ), got {}",
            p.kappa_b_over_kappa
        );
    }
    if !p.delta_over_kappa.is_finite() {
        bail!("params.delta_over_kappa: must be finite");
    }

    if let Some(pulse) = &config.pulse {
        if !(pulse.fwhm_us > 0.0) || !pulse.fwhm_us.is_finite() {
            bail!("pulse.fwhm_us: must be finite and > 0, got {}", pulse.fwhm_us);
        }
        if !pulse.t0_us.is_finite() {
            bail!("pulse.t0_us: must be finite");
        }
    }
    if let Some(grid) = &config.grid {
        if grid.count < 2 {
            bail!("grid.count: must be >= 2, got {}", grid.count);
        }
        if !(grid.start < grid.stop) {
            bail!("grid: start {} must be below stop {}", grid.start, grid.stop);
        }
        if grid.spacing == GridSpacing::Log && !(grid.start > 0.0) {
            bail!("grid.start: log spacing needs start > 0, got {}", grid.start);
        }
    }
    if let Some(v) = &config.variant {
        parse_variant(v)?;
    }
    if let Some(delay) = config.target_delay_us {
        if !(delay > 0.0) || !delay.is_finite() {
            bail!("target_delay_us: must be finite and > 0, got {delay}");
        }
    }
    if let Some(omega_max) = config.omega_max_over_kappa {
        if !(omega_max > 0.0) || !omega_max.is_finite() {
            bail!("omega_max_over_kappa: must be finite and > 0, got {omega_max}");
        }
    }
    if let Some(n_fock) = config.n_fock {
        if n_fock < 1 {
            bail!("n_fock: must be >= 1, got {n_fock}");
        }
    }
    if config.seedless == Some(false) {
        bail!("seedless: runs are always deterministic; only true is accepted");
    }

    // Scenario-specific requirements, checked before any computation.
    match config.scenario {
        Scenario::Spectrum => {
            if config.grid.is_none() {
                bail!("scenario spectrum requires a grid (detuning range in units of κ)");
            }
            if !(p.epsilon_over_kappa > 0.0) {
                bail!("scenario spectrum requires params.epsilon_over_kappa > 0");
            }
        }
        Scenario::Pulse | Scenario::Store | Scenario::Gate => {
            if config.pulse.is_none() && config.long_pulse != Some(true) {
                bail!(
                    "scenario {} requires a pulse (or long_pulse = true)",
                    config.scenario.name()
                );
            }
        }
        Scenario::Sweep => {
            if config.pulse.is_none() && config.long_pulse != Some(true) {
                bail!("scenario sweep requires a pulse (or long_pulse = true)");
            }
            if config.grid.is_none() {
                bail!("scenario sweep requires a grid (cooperativity range)");
            }
            if let Some(grid) = &config.grid {
                if !(grid.start > 0.0) {
                    bail!("grid.start: cooperativity sweeps need start > 0");
                }
            }
        }
    }
    Ok(())
}

pub fn parse_variant(s: &str) -> anyhow::Result<ModelVariant> {
    match s {
        "standard" => Ok(ModelVariant::Standard),
        "as-printed" => Ok(ModelVariant::AsPrinted),
        other => bail!("variant: expected \"standard\" or \"as-printed\", got \"{other}\""),
    }
}

/// Configuration with units resolved to rad/µs and µs.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    /// κ in rad/µs.
    pub kappa: f64,
    pub params: SystemParams,
    pub pulse: Option<GaussianPulse>,
    pub grid: Option<Vec<f64>>,
    pub variant: ModelVariant,
    pub target_delay_us: f64,
    pub omega_max: Option<f64>,
    pub n_fock: usize,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn resolve(&self) -> anyhow::Result<Resolved> {
        validate(self)?;
        let kappa = 2.0 * std::f64::consts::PI * self.params.kappa_mhz;
        let kappa_b = self.params.kappa_b_over_kappa * kappa;
        let params = SystemParams::new(
            self.params.g_over_kappa * kappa,
            kappa - kappa_b,
            kappa_b,
            self.params.gamma_31_over_kappa * kappa,
            self.params.gamma_32_over_kappa * kappa,
            self.params.delta_over_kappa * kappa,
            self.params.omega_c_over_kappa * kappa,
            self.params.epsilon_over_kappa * kappa,
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;

        let pulse = if self.long_pulse == Some(true) {
            let fwhm = 20.0 / kappa;
            let eta = fwhm / (2.0 * (2.0 * 2.0_f64.ln()).sqrt());
            Some(
                GaussianPulse::from_fwhm(6.0 * eta, fwhm)
                    .map_err(|e| anyhow::anyhow!("{e}"))?,
            )
        } else {
            self.pulse
                .map(|p| GaussianPulse::from_fwhm(p.t0_us, p.fwhm_us))
                .transpose()
                .map_err(|e| anyhow::anyhow!("{e}"))?
        };

        let variant = match &self.variant {
            Some(v) => parse_variant(v)?,
            None => ModelVariant::Standard,
        };
        Ok(Resolved {
            config: self.clone(),
            kappa,
            params,
            pulse,
            grid: self.grid.as_ref().map(GridConfig::points),
            variant,
            target_delay_us: self.target_delay_us.unwrap_or(4.0),
            omega_max: self.omega_max_over_kappa.map(|m| m * kappa),
            n_fock: self.n_fock.unwrap_or(3),
            output_dir: self
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2_json() -> &'static str {
        r#"{
            "scenario": "spectrum",
            "params": {
                "kappa_MHz": 2.5,
                "g_over_kappa": 5.0,
                "gamma_31_over_kappa": 0.6,
                "gamma_32_over_kappa": 0.6,
                "omega_c_over_kappa": 3.0,
                "epsilon_over_kappa": 0.1
            },
            "grid": { "start": -8.0, "stop": 8.0, "count": 161, "spacing": "linear" }
        }"#
    }

    #[test]
    fn fig2_style_config_parses() {
        let config = parse_config(fig2_json()).unwrap();
        assert_eq!(config.scenario, Scenario::Spectrum);
        let resolved = config.resolve().unwrap();
        assert!((resolved.kappa - 2.0 * std::f64::consts::PI * 2.5).abs() < 1e-12);
        assert!((resolved.params.g - 5.0 * resolved.kappa).abs() < 1e-9);
        assert_eq!(resolved.grid.as_ref().unwrap().len(), 161);
    }

    #[test]
    fn missing_kappa_named() {
        let text = r#"{
            "scenario": "spectrum",
            "params": {
                "g_over_kappa": 5.0,
                "gamma_31_over_kappa": 0.6,
                "gamma_32_over_kappa": 0.6,
                "epsilon_over_kappa": 0.1
            },
            "grid": { "start": -8.0, "stop": 8.0, "count": 11, "spacing": "linear" }
        }"#;
        let err = format!("{:#}", parse_config(text).unwrap_err());
        assert!(err.contains("kappa_MHz"), "error does not name the key: {err}");
    }

    #[test]
    fn negative_rate_rejected_with_path() {
        let text = fig2_json().replace("\"gamma_31_over_kappa\": 0.6", "\"gamma_31_over_kappa\": -0.1");
        let err = format!("{:#}", parse_config(&text).unwrap_err());
        assert!(err.contains("params.gamma_31_over_kappa"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = fig2_json().replace("\"scenario\"", "\"bogus\": 1, \"scenario\"");
        let err = format!("{:#}", parse_config(&text).unwrap_err());
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn scenario_requirements_enforced() {
        let text = r#"{
            "scenario": "pulse",
            "params": {
                "kappa_MHz": 2.5,
                "g_over_kappa": 10.0,
                "gamma_31_over_kappa": 0.6,
                "gamma_32_over_kappa": 0.6
            }
        }"#;
        let err = format!("{:#}", parse_config(text).unwrap_err());
        assert!(err.contains("requires a pulse"), "{err}");
    }

    #[test]
    fn round_trip_preserves_config() {
        let config = parse_config(fig2_json()).unwrap();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let reparsed = parse_config(&text).unwrap();
        assert_eq!(config, reparsed);
    }

    #[test]
    fn long_pulse_resolution() {
        let text = r#"{
            "scenario": "sweep",
            "params": {
                "kappa_MHz": 2.5,
                "g_over_kappa": 1.0,
                "gamma_31_over_kappa": 0.6,
                "gamma_32_over_kappa": 0.6
            },
            "grid": { "start": 0.2, "stop": 100.0, "count": 40, "spacing": "log" },
            "long_pulse": true
        }"#;
        let resolved = parse_config(text).unwrap().resolve().unwrap();
        let pulse = resolved.pulse.unwrap();
        assert!((pulse.fwhm() - 20.0 / resolved.kappa).abs() < 1e-12);
        assert!((pulse.t0 - 6.0 * pulse.eta).abs() < 1e-12);
    }

    #[test]
    fn log_grid_points() {
        let grid = GridConfig {
            start: 1.0,
            stop: 100.0,
            count: 3,
            spacing: GridSpacing::Log,
        };
        let pts = grid.points();
        assert!((pts[0] - 1.0).abs() < 1e-12);
        assert!((pts[1] - 10.0).abs() < 1e-10);
        assert!((pts[2] - 100.0).abs() < 1e-10);
    }

    #[test]
    fn seedless_false_rejected() {
        let text = fig2_json().replace("\"scenario\"", "\"seedless\": false, \"scenario\"");
        assert!(parse_config(&text).is_err());
    }
}
