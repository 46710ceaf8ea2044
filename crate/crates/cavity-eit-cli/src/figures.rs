//! Built-in figure presets: end-to-end runs with pinned parameters.
//!
//! All presets share κ/2π = 2.5 MHz and Γ₃₁ = Γ₃₂ = 0.6 κ.
//! * fig2 — classical-probe phase spectra (g = 5κ, ε = √10⁻² κ, Ω_C ∈ {0, 3κ});
//! * fig3 — single-photon pulses for Ω_C ∈ {0, 2κ, 10κ} (g = 10κ, FWHM 1 µs);
//! * fig4 — synthesized storage control field (g = 10κ) and the storage
//!   efficiencies over C ∈ [1, 100];
//! * fig5 — conditional target scattering at C ≈ 100, output traces over a
//!   range of C, and the full gate sweep with the dark-region boundary.

use std::path::Path;

use anyhow::Result;
use cavity_eit::gate::AtomState;
use cavity_eit::model::GaussianPulse;
use cavity_eit::pulse::{self, IntegrationOptions, ModelVariant};
use serde_json::{json, Value};

use crate::config::{
    GridConfig, GridSpacing, ParamsConfig, PulseConfig, RunConfig, Scenario,
};
use crate::emit;
use crate::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl std::str::FromStr for Figure {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            other => anyhow::bail!("unknown figure \"{other}\" (expected fig2..fig5)"),
        }
    }
}

fn base_params(g_over_kappa: f64) -> ParamsConfig {
    ParamsConfig {
        kappa_mhz: 2.5,
        g_over_kappa,
        gamma_31_over_kappa: 0.6,
        gamma_32_over_kappa: 0.6,
        delta_over_kappa: 0.0,
        omega_c_over_kappa: 0.0,
        epsilon_over_kappa: 0.0,
        kappa_b_over_kappa: 0.0,
    }
}

fn photon() -> PulseConfig {
    PulseConfig {
        t0_us: 4.0,
        fwhm_us: 1.0,
    }
}

fn run_config(scenario: Scenario, params: ParamsConfig) -> RunConfig {
    RunConfig {
        scenario,
        params,
        pulse: None,
        grid: None,
        variant: None,
        output_dir: None,
        target_delay_us: None,
        omega_max_over_kappa: None,
        long_pulse: None,
        n_fock: None,
        seedless: None,
    }
}

/// Run the preset for `figure` and write its data and plot script into
/// `out_dir`. Returns the summary document.
pub fn emit_figure_bundle(figure: Figure, out_dir: &Path) -> Result<Value> {
    emit::ensure_dir(out_dir)?;
    match figure {
        Figure::Fig2 => fig2(out_dir),
        Figure::Fig3 => fig3(out_dir),
        Figure::Fig4 => fig4(out_dir),
        Figure::Fig5 => fig5(out_dir),
    }
}

fn fig2(out: &Path) -> Result<Value> {
    let mut params = base_params(5.0);
    params.omega_c_over_kappa = 3.0;
    params.epsilon_over_kappa = 0.01_f64.sqrt();
    let mut config = run_config(Scenario::Spectrum, params);
    config.grid = Some(GridConfig {
        start: -8.0,
        stop: 8.0,
        count: 321,
        spacing: GridSpacing::Linear,
    });
    run::run(&config.resolve()?, out)
}

fn fig3(out: &Path) -> Result<Value> {
    let mut summaries = Vec::new();
    for omega_c in [0.0, 2.0, 10.0] {
        let mut params = base_params(10.0);
        params.omega_c_over_kappa = omega_c;
        let mut config = run_config(Scenario::Pulse, params);
        config.pulse = Some(photon());
        let resolved = config.resolve()?;
        let sub_dir = out.join(format!("omega_c_{omega_c:.0}"));
        let summary = run::run(&resolved, &sub_dir)?;
        summaries.push(json!({
            "omega_c_over_kappa": omega_c,
            "summary": summary["results"].clone(),
        }));
    }
    emit::write_text(
        &out.join("plot_fig3.gp"),
        &emit::plot_script(
            "output pulses for different control powers",
            "t / us",
            "field amplitude",
            &[
                ("omega_c_0/pulse.csv", 1, 2, "alpha_in"),
                ("omega_c_0/pulse.csv", 1, 3, "omega_c = 0"),
                ("omega_c_2/pulse.csv", 1, 3, "omega_c = 2k"),
                ("omega_c_10/pulse.csv", 1, 3, "omega_c = 10k"),
            ],
        ),
    )?;
    let doc = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "scenario": "figure fig3",
        "runs": summaries,
    });
    emit::write_json(&out.join("summary.json"), &doc)?;
    Ok(doc)
}

fn fig4(out: &Path) -> Result<Value> {
    let mut config = run_config(Scenario::Store, base_params(10.0));
    config.pulse = Some(photon());
    config.grid = Some(GridConfig {
        start: 1.0,
        stop: 100.0,
        count: 25,
        spacing: GridSpacing::Log,
    });
    let resolved = config.resolve()?;
    let summary = run::run(&resolved, out)?;

    // Time sequence of the two photons (target delayed by 4 µs).
    let control = resolved.pulse.expect("preset has a pulse");
    let target = GaussianPulse::new(control.t0 + 4.0, control.eta)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let n = 1601;
    let (t0, t1) = (0.0, 12.0);
    emit::write_csv(
        &out.join("pulse_sequence.csv"),
        &["t_us", "control_photon", "target_photon"],
        (0..n).map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / (n - 1) as f64;
            vec![
                t,
                control.value(t) / control.amplitude_norm,
                target.value(t) / target.amplitude_norm,
            ]
        }),
    )?;
    emit::write_text(
        &out.join("plot_fig4.gp"),
        &emit::plot_script(
            "storage control field and photon sequence",
            "t / us",
            "normalized amplitude",
            &[
                ("control_pulse.csv", 1, 2, "omega_c / kappa"),
                ("pulse_sequence.csv", 1, 2, "control photon"),
                ("pulse_sequence.csv", 1, 3, "target photon"),
            ],
        ),
    )?;
    Ok(summary)
}

fn fig5(out: &Path) -> Result<Value> {
    // (a) conditional output traces at C ≈ 100.
    let mut params_100 = base_params(1.0);
    params_100.g_over_kappa = (2.0 * 1.2 * 100.0_f64).sqrt();
    let config_100 = {
        let mut c = run_config(Scenario::Gate, params_100);
        c.pulse = Some(photon());
        c
    };
    let resolved_100 = config_100.resolve()?;
    let target = GaussianPulse::new(4.0 + 4.0, resolved_100.pulse.unwrap().eta)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let atom1 = run::target_branch(&resolved_100, &target, AtomState::Ground1)?;
    let atom2 = run::target_branch(&resolved_100, &target, AtomState::Ground2)?;
    emit::write_csv(
        &out.join("fig5a.csv"),
        &["t_us", "alpha_in", "re_alpha_out_atom1", "re_alpha_out_atom2"],
        (0..atom1.record.time.len()).map(|i| {
            vec![
                atom1.record.time[i],
                atom1.record.alpha_in[i].re,
                atom1.record.alpha_out[i].re,
                atom2.record.alpha_out[i].re,
            ]
        }),
    )?;

    // (b) atom-in-|1⟩ output traces over a range of cooperativities.
    let c_values = [0.25, 0.5, 2.0, 10.0, 100.0];
    let mut traces: Vec<Vec<f64>> = Vec::new();
    let mut time_axis: Vec<f64> = Vec::new();
    for &c in &c_values {
        let params = resolved_100
            .params
            .with_cooperativity(c)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let rec = pulse::integrate(
            &params,
            |_| 0.0,
            &target,
            pulse::default_window(&params, &target),
            ModelVariant::Standard,
            &IntegrationOptions {
                extract_phase: false,
                ..Default::default()
            },
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;
        if time_axis.is_empty() {
            time_axis = rec.time.clone();
        }
        traces.push(rec.alpha_out.iter().map(|z| z.re).collect());
    }
    emit::write_csv(
        &out.join("fig5b.csv"),
        &[
            "t_us",
            "re_alpha_out_c0.25",
            "re_alpha_out_c0.5",
            "re_alpha_out_c2",
            "re_alpha_out_c10",
            "re_alpha_out_c100",
        ],
        (0..time_axis.len()).map(|i| {
            let mut row = vec![time_axis[i]];
            row.extend(traces.iter().map(|tr| tr[i]));
            row
        }),
    )?;

    // (c)+(d) sweep with the dark region and success probability.
    let mut sweep_config = run_config(Scenario::Sweep, base_params(1.0));
    sweep_config.pulse = Some(photon());
    sweep_config.grid = Some(GridConfig {
        start: 0.2,
        stop: 100.0,
        count: 40,
        spacing: GridSpacing::Log,
    });
    let sweep_summary = run::run(&sweep_config.resolve()?, out)?;

    emit::write_text(
        &out.join("plot_fig5.gp"),
        &emit::plot_script(
            "conditional scattering and gate success",
            "t / us or C",
            "amplitude or probability",
            &[
                ("fig5a.csv", 1, 3, "atom in 1"),
                ("fig5a.csv", 1, 4, "atom in 2"),
                ("sweep.csv", 1, 3, "p_target(C)"),
                ("sweep.csv", 1, 5, "scattered(C)"),
                ("sweep.csv", 1, 4, "p_succ(C)"),
            ],
        ),
    )?;

    let doc = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "scenario": "figure fig5",
        "gate_at_c100": {
            "phase_atom_in_1": atom1.phase,
            "phase_atom_in_2": atom2.phase,
            "n_out_atom_in_1": atom1.n_out,
            "n_out_atom_in_2": atom2.n_out,
        },
        "sweep": sweep_summary["results"].clone(),
    });
    emit::write_json(&out.join("summary.json"), &doc)?;
    Ok(doc)
}
