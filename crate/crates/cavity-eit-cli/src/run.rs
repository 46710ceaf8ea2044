//! Scenario dispatch: execute a resolved configuration and write its
//! artifact files.

use std::fmt;
use std::path::Path;

use anyhow::Result;
use cavity_eit::gate::{self, AtomState, SweepOptions};
use cavity_eit::model::HilbertSpace;
use cavity_eit::pulse::{self, IntegrationOptions, ScatteringRecord};
use cavity_eit::steady_state::{self, PairedSpectrum, SpectrumPoint};
use cavity_eit::storage::{self, SynthesisOptions};
use serde_json::{json, Value};

use crate::config::{Resolved, Scenario};
use crate::emit::{self, error_module, fmt_float};

/// A failure inside one of the compute modules, tagged for the error JSON.
#[derive(Debug)]
pub struct StageError {
    pub module: &'static str,
    pub operation: &'static str,
    pub source: cavity_eit::Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}: {}", self.module, self.operation, self.source)
    }
}

impl std::error::Error for StageError {}

fn stage<T>(operation: &'static str, r: cavity_eit::Result<T>) -> Result<T> {
    r.map_err(|source| {
        StageError {
            module: error_module(&source),
            operation,
            source,
        }
        .into()
    })
}

/// Execute the scenario and write all artifacts into `out_dir`.
/// Returns the summary document (also written as `summary.json`).
pub fn run(resolved: &Resolved, out_dir: &Path) -> Result<Value> {
    emit::ensure_dir(out_dir)?;
    let config_json = serde_json::to_value(&resolved.config)?;
    let summary = match resolved.config.scenario {
        Scenario::Spectrum => run_spectrum(resolved, out_dir)?,
        Scenario::Pulse => run_pulse(resolved, out_dir)?,
        Scenario::Store => run_store(resolved, out_dir)?,
        Scenario::Gate => run_gate(resolved, out_dir)?,
        Scenario::Sweep => run_sweep(resolved, out_dir)?,
    };
    let (results, diagnostics, thresholds) = summary;
    let doc = emit::summary(
        resolved.config.scenario.name(),
        &config_json,
        results,
        diagnostics,
        thresholds,
    );
    emit::write_json(&out_dir.join("summary.json"), &doc)?;
    Ok(doc)
}

type ScenarioOutput = (Value, Value, Value);

fn spectrum_rows(points: &[SpectrumPoint], kappa: f64) -> Vec<Vec<f64>> {
    let n_max = points
        .iter()
        .map(|p| p.n_intra)
        .fold(f64::MIN_POSITIVE, f64::max);
    points
        .iter()
        .map(|p| {
            vec![
                p.delta / kappa,
                p.phase / std::f64::consts::PI,
                p.n_intra / n_max,
                p.a_out_mean.re,
                p.a_out_mean.im,
            ]
        })
        .collect()
}

const SPECTRUM_HEADER: [&str; 5] = [
    "delta_over_kappa",
    "phase_over_pi",
    "n_intra_normalized",
    "re_a_out",
    "im_a_out",
];

fn run_spectrum(res: &Resolved, out: &Path) -> Result<ScenarioOutput> {
    let space = stage("hilbert_space", HilbertSpace::new(res.n_fock))?;
    let grid_kappa = res.grid.as_ref().expect("validated");
    let grid: Vec<f64> = grid_kappa.iter().map(|d| d * res.kappa).collect();
    let paired: PairedSpectrum = stage(
        "phase_spectrum",
        steady_state::phase_spectrum_paired(&res.params, &space, &grid),
    )?;

    emit::write_csv(
        &out.join("spectrum_on.csv"),
        &SPECTRUM_HEADER,
        spectrum_rows(&paired.on, res.kappa).into_iter(),
    )?;
    emit::write_csv(
        &out.join("spectrum_off.csv"),
        &SPECTRUM_HEADER,
        spectrum_rows(&paired.off, res.kappa).into_iter(),
    )?;
    emit::write_csv(
        &out.join("phase_diff.csv"),
        &["delta_over_kappa", "phase_diff_over_pi"],
        paired
            .on
            .iter()
            .zip(&paired.phase_diff)
            .map(|(p, diff)| vec![p.delta / res.kappa, diff / std::f64::consts::PI]),
    )?;
    emit::write_text(
        &out.join("plot_spectrum.gp"),
        &emit::plot_script(
            "probe phase vs detuning",
            "delta / kappa",
            "phase / pi",
            &[
                ("spectrum_off.csv", 1, 2, "control off"),
                ("spectrum_on.csv", 1, 2, "control on"),
                ("phase_diff.csv", 1, 2, "difference"),
            ],
        ),
    )?;

    // Scalars at the grid point nearest resonance.
    let zero_idx = grid_kappa
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap();
    let residual_max = paired
        .on
        .iter()
        .chain(&paired.off)
        .map(|p| p.residual)
        .fold(0.0, f64::max);
    let truncation = stage(
        "truncation_change",
        steady_state::truncation_change(&res.params, &space),
    )?;

    Ok((
        json!({
            "phi_on_at_zero": paired.on[zero_idx].phase,
            "phi_off_at_zero": paired.off[zero_idx].phase,
            "phi_diff_at_zero": paired.phase_diff[zero_idx],
            "delta_at_zero_over_kappa": grid_kappa[zero_idx],
            "n_points": grid.len(),
        }),
        json!({
            "liouvillian_residual_max_over_kappa": residual_max / res.kappa,
            "truncation_change": truncation,
        }),
        json!({
            "liouvillian_residual_tol": steady_state::RESIDUAL_TOL,
            "truncation_change_tol": 1e-6,
        }),
    ))
}

const PULSE_HEADER: [&str; 8] = [
    "t_us",
    "re_alpha_in",
    "re_alpha_out",
    "im_alpha_out",
    "p1",
    "p2",
    "p3",
    "omega_c_over_kappa",
];

fn record_rows(rec: &ScatteringRecord, kappa: f64) -> Vec<Vec<f64>> {
    (0..rec.time.len())
        .map(|i| {
            let s = &rec.states[i];
            vec![
                rec.time[i],
                rec.alpha_in[i].re,
                rec.alpha_out[i].re,
                rec.alpha_out[i].im,
                s.cavity.norm_sqr(),
                s.stored.norm_sqr(),
                s.excited.norm_sqr(),
                rec.omega_c[i] / kappa,
            ]
        })
        .collect()
}

fn record_results(rec: &ScatteringRecord) -> Value {
    json!({
        "n_out": rec.n_out,
        "scattered": rec.scattered,
        "injected": rec.injected,
        "pulse_phase": float_or_null(rec.pulse_phase),
        "delay_us": float_or_null(rec.delay),
        "mode_overlap": float_or_null(rec.mode_overlap),
    })
}

fn float_or_null(v: f64) -> Value {
    if v.is_nan() {
        Value::Null
    } else {
        json!(v)
    }
}

fn run_pulse(res: &Resolved, out: &Path) -> Result<ScenarioOutput> {
    let pulse = res.pulse.expect("validated");
    let params = res.params;
    let rec = stage(
        "integrate",
        pulse::integrate(
            &params,
            |_| params.omega_c,
            &pulse,
            pulse::default_window(&params, &pulse),
            res.variant,
            &IntegrationOptions::default(),
        ),
    )?;
    emit::write_csv(
        &out.join("pulse.csv"),
        &PULSE_HEADER,
        record_rows(&rec, res.kappa).into_iter(),
    )?;
    emit::write_text(
        &out.join("plot_pulse.gp"),
        &emit::plot_script(
            "pulse scattering",
            "t / us",
            "field amplitude",
            &[
                ("pulse.csv", 1, 2, "alpha_in"),
                ("pulse.csv", 1, 3, "Re alpha_out"),
            ],
        ),
    )?;

    let window = if params.omega_c > 0.0 {
        match pulse::eit_window_check(&params, &pulse) {
            Ok(w) => json!({
                "fits": w.fits,
                "ratio": w.ratio,
                "pulse_spectral_fwhm_over_kappa": w.pulse_spectral_fwhm / res.kappa,
                "window_width_over_kappa": w.window_width / res.kappa,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        Value::Null
    };

    Ok((
        json!({
            "record": record_results(&rec),
            "eit_window": window,
            "variant": res.variant.to_string(),
        }),
        json!({ "flux_ledger_residual": rec.ledger_residual }),
        json!({ "flux_ledger_tol": 1e-6 }),
    ))
}

fn synthesis_options(res: &Resolved) -> SynthesisOptions {
    SynthesisOptions {
        omega_max: res.omega_max,
        ..Default::default()
    }
}

fn run_store(res: &Resolved, out: &Path) -> Result<ScenarioOutput> {
    let pulse = res.pulse.expect("validated");
    let params = res.params;
    let opts = synthesis_options(res);
    let control = stage(
        "synthesize_control",
        storage::synthesize_control(&params, &pulse, &opts),
    )?;
    let rec = stage(
        "closed_loop",
        storage::closed_loop(
            &params,
            &pulse,
            &control,
            &IntegrationOptions {
                extract_phase: false,
                ..Default::default()
            },
        ),
    )?;
    let result = storage::storage_result(&rec);
    let fidelity = stage(
        "dark_state_fidelity",
        storage::dark_state_fidelity(&rec, &control, &params),
    )?;

    emit::write_csv(
        &out.join("control_pulse.csv"),
        &["t_us", "omega_c_over_kappa"],
        control
            .time_grid
            .iter()
            .zip(&control.omega_c)
            .map(|(t, w)| vec![*t, w / res.kappa]),
    )?;
    emit::write_csv(
        &out.join("storage_record.csv"),
        &PULSE_HEADER,
        record_rows(&rec, res.kappa).into_iter(),
    )?;

    // Optional efficiency sweep over a cooperativity grid.
    let mut sweep_rows = Vec::new();
    if let Some(c_grid) = &res.grid {
        for &c in c_grid {
            let p = stage("with_cooperativity", params.with_cooperativity(c))?;
            let eff = stage(
                "storage_efficiency",
                storage::storage_efficiency(&p, &pulse, &opts),
            )?;
            sweep_rows.push(vec![c, eff.p1, eff.p2, eff.leak, eff.scattered]);
        }
        emit::write_csv(
            &out.join("storage_sweep.csv"),
            &["C", "P1", "P2", "leak", "scattered"],
            sweep_rows.iter().cloned(),
        )?;
    }
    emit::write_text(
        &out.join("plot_store.gp"),
        &emit::plot_script(
            "impedance-matched storage",
            "t / us",
            "omega_c / kappa",
            &[("control_pulse.csv", 1, 2, "control field")],
        ),
    )?;

    Ok((
        json!({
            "p1": result.p1,
            "p2": result.p2,
            "leak": result.leak,
            "scattered": result.scattered,
            "dark_state_fidelity": fidelity,
            "control_valid_from_us": control.valid_from,
            "omega_max_over_kappa": control.omega_max / res.kappa,
            "sweep_points": sweep_rows.len(),
        }),
        json!({
            "flux_ledger_residual": rec.ledger_residual,
            "storage_ledger_residual": result.ledger_residual,
        }),
        json!({ "flux_ledger_tol": 1e-6, "storage_ledger_tol": 1e-4 }),
    ))
}

const SWEEP_HEADER: [&str; 7] = [
    "C",
    "p2",
    "p_target",
    "p_succ",
    "scattered",
    "phase_1",
    "phase_2",
];

fn outcome_row(c: f64, o: &gate::GateOutcome) -> Vec<f64> {
    vec![
        c,
        o.p2,
        o.p_target,
        o.p_succ,
        o.scattered,
        o.phase_atom_in_1,
        o.phase_atom_in_2,
    ]
}

fn run_gate(res: &Resolved, out: &Path) -> Result<ScenarioOutput> {
    let pulse = res.pulse.expect("validated");
    let params = res.params;
    let detail = stage(
        "run_full_gate",
        gate::run_full_gate_detailed(
            &params,
            &pulse,
            &pulse,
            res.target_delay_us,
            &synthesis_options(res),
        ),
    )?;
    let c = stage("cooperativity", params.cooperativity())?;

    emit::write_csv(
        &out.join("gate.csv"),
        &SWEEP_HEADER,
        std::iter::once(outcome_row(c, &detail.outcome)),
    )?;
    emit::write_csv(
        &out.join("control_pulse.csv"),
        &["t_us", "omega_c_over_kappa"],
        detail
            .control
            .time_grid
            .iter()
            .zip(&detail.control.omega_c)
            .map(|(t, w)| vec![*t, w / res.kappa]),
    )?;
    emit::write_csv(
        &out.join("target_atom1.csv"),
        &PULSE_HEADER,
        record_rows(&detail.branch_1.record, res.kappa).into_iter(),
    )?;
    emit::write_csv(
        &out.join("target_atom2.csv"),
        &PULSE_HEADER,
        record_rows(&detail.branch_2.record, res.kappa).into_iter(),
    )?;
    emit::write_text(
        &out.join("plot_gate.gp"),
        &emit::plot_script(
            "conditional target scattering",
            "t / us",
            "field amplitude",
            &[
                ("target_atom1.csv", 1, 2, "alpha_in"),
                ("target_atom1.csv", 1, 3, "atom in 1"),
                ("target_atom2.csv", 1, 3, "atom in 2"),
            ],
        ),
    )?;

    let o = &detail.outcome;
    Ok((
        json!({
            "cooperativity": c,
            "p2": o.p2,
            "p_target": o.p_target,
            "p_succ": o.p_succ,
            "scattered": o.scattered,
            "phase_atom_in_1": o.phase_atom_in_1,
            "phase_atom_in_2": o.phase_atom_in_2,
            "conditional_shift": o.conditional_shift,
            "storage": {
                "p1": detail.storage.p1,
                "p2": detail.storage.p2,
                "leak": detail.storage.leak,
                "scattered": detail.storage.scattered,
            },
        }),
        json!({
            "storage_flux_ledger_residual": detail.storage_record.ledger_residual,
            "target_flux_ledger_residual": detail.branch_1.record.ledger_residual,
            "branch_energy_ledger": o.p_target + o.scattered - detail.branch_1.record.injected,
        }),
        json!({ "flux_ledger_tol": 1e-6, "branch_energy_tol": 1e-4 }),
    ))
}

fn run_sweep(res: &Resolved, out: &Path) -> Result<ScenarioOutput> {
    let pulse = res.pulse.expect("validated");
    let c_grid = res.grid.as_ref().expect("validated");
    let sweep = stage(
        "sweep_cooperativity",
        gate::sweep_cooperativity(
            &res.params,
            &pulse,
            c_grid,
            &SweepOptions {
                target_delay: Some(res.target_delay_us),
                synthesis: synthesis_options(res),
            },
        ),
    )?;
    emit::write_csv(
        &out.join("sweep.csv"),
        &SWEEP_HEADER,
        sweep
            .c_grid
            .iter()
            .zip(&sweep.outcomes)
            .map(|(c, o)| outcome_row(*c, o)),
    )?;
    emit::write_text(
        &out.join("plot_sweep.gp"),
        &emit::plot_script(
            "gate performance vs cooperativity",
            "C",
            "probability",
            &[
                ("sweep.csv", 1, 3, "p_target"),
                ("sweep.csv", 1, 5, "scattered"),
                ("sweep.csv", 1, 4, "p_succ"),
            ],
        ),
    )?;
    Ok((
        json!({
            "zero_reflection_c": sweep.zero_reflection_c,
            "dark_region_upper": sweep.dark_region_upper,
            "n_points": sweep.c_grid.len(),
        }),
        json!({}),
        json!({
            "dark_region_scattered_level": 0.2,
            "zero_reflection_expected": 0.5,
        }),
    ))
}

/// Scatter the target photon for one atomic state; used by figure bundles.
pub fn target_branch(
    res: &Resolved,
    pulse: &cavity_eit::GaussianPulse,
    atom: AtomState,
) -> Result<gate::TargetBranch> {
    stage(
        "run_target_scattering",
        gate::run_target_scattering(&res.params, pulse, atom),
    )
}

/// Format helper shared with the figure bundles.
pub fn csv_cell(v: f64) -> String {
    fmt_float(v)
}
