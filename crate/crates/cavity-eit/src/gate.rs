//! The controlled phase-gate protocol and its cooperativity analysis.
//!
//! Three scenarios share one mechanism: a resonant probe is reflected with a
//! π phase shift when the atom blocks the cavity (normal-mode splitting) and
//! transmitted with no phase shift when it does not.
//!
//! * classical gate — steady-state phases with the control field on/off;
//! * target scattering — a single-photon pulse hits the cavity with the atom
//!   prepared in |1⟩ (coupled, reflects) or |2⟩ (dark, transmits);
//! * full gate — a control photon is first stored by the impedance-matched
//!   memory, then the target photon picks up a conditional π shift; the
//!   success probability is P_succ = P₂ · P_target.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{GaussianPulse, HilbertSpace, SystemParams};
use crate::pulse::{self, IntegrationOptions, ModelVariant, ScatteringRecord};
use crate::steady_state::{self, wrap_phase};
use crate::storage::{self, SynthesisOptions};

/// Conditional atomic state when the target photon arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomState {
    /// |1⟩ — coupled to the cavity mode; the photon is reflected.
    Ground1,
    /// |2⟩ — dark; the cavity behaves as if empty and transmits.
    Ground2,
}

/// Steady-state phases of the classical-probe gate.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalGatePhases {
    /// φ with the control field off (reflection branch).
    pub phase_off: f64,
    /// φ with the control field on (transparency branch).
    pub phase_on: f64,
    /// Φ = φ(off) − φ(on), wrapped to (−π, π].
    pub shift: f64,
}

/// One conditional branch of the target-photon scattering.
#[derive(Debug, Clone)]
pub struct TargetBranch {
    pub atom: AtomState,
    pub phase: f64,
    pub delay: f64,
    pub mode_overlap: f64,
    /// Output pulse energy n̄_out = ∫|α_out|²dt.
    pub n_out: f64,
    /// Scattered light 2Γ₃∫P₃dt (zero in the dark branch).
    pub scattered: f64,
    pub record: ScatteringRecord,
}

/// Assembled outcome of the two-photon gate.
#[derive(Debug, Clone, Copy)]
pub struct GateOutcome {
    /// Target phase with the atom in |1⟩ (≈ π).
    pub phase_atom_in_1: f64,
    /// Target phase with the atom in |2⟩ (≈ 0).
    pub phase_atom_in_2: f64,
    /// Wrapped difference of the two branch phases.
    pub conditional_shift: f64,
    /// Survival probability of the target photon in the |1⟩ branch.
    pub p_target: f64,
    /// Memory efficiency of the control photon (0 below the C = 1/2 bound,
    /// where the storage stage is undefined).
    pub p2: f64,
    /// P_succ = P₂ · P_target.
    pub p_succ: f64,
    /// Scattered fraction in the |1⟩ branch.
    pub scattered: f64,
}

/// Gate outcomes over a cooperativity grid, with the located landmarks.
#[derive(Debug, Clone)]
pub struct CooperativitySweep {
    pub c_grid: Vec<f64>,
    pub outcomes: Vec<GateOutcome>,
    /// Smallest cooperativity with scattered ≤ 0.2 (upper edge of the dark
    /// region), from bisection.
    pub dark_region_upper: f64,
    /// Cooperativity minimizing n̄_out (the total-scattering point ≈ 1/2),
    /// from golden-section search.
    pub zero_reflection_c: f64,
}

/// Sweep controls.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Delay between control and target pulse maxima; default 10η.
    pub target_delay: Option<f64>,
    /// Synthesis options for the storage stage.
    pub synthesis: SynthesisOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            target_delay: None,
            synthesis: SynthesisOptions::default(),
        }
    }
}

/// Classical-probe gate: paired steady-state phases at Δ = 0.
///
/// Requires the weak-drive regime ε ≤ 0.1 κ.
pub fn run_classical_gate(params: &SystemParams) -> Result<ClassicalGatePhases> {
    params.validate()?;
    if params.epsilon > 0.1 * params.kappa() {
        return Err(Error::InvalidParam {
            name: "epsilon",
            reason: format!(
                "classical gate needs weak drive (epsilon <= 0.1 kappa), got {}",
                params.epsilon
            ),
        });
    }
    let space = HilbertSpace::new(3)?;
    let on = steady_state::spectrum_point(params, &space, 0.0)?;
    let off = steady_state::spectrum_point(&params.with_omega_c(0.0), &space, 0.0)?;
    Ok(ClassicalGatePhases {
        phase_off: off.phase,
        phase_on: on.phase,
        shift: wrap_phase(off.phase - on.phase),
    })
}

/// Scatter the target photon off the cavity with the control field off and
/// the atom held in `atom`.
///
/// The |2⟩ branch is exactly the decoupled empty cavity, simulated as g = 0.
pub fn run_target_scattering(
    params: &SystemParams,
    pulse: &GaussianPulse,
    atom: AtomState,
) -> Result<TargetBranch> {
    let branch_params = match atom {
        AtomState::Ground1 => *params,
        AtomState::Ground2 => params.with_g(0.0),
    };
    let record = pulse::integrate(
        &branch_params,
        |_| 0.0,
        pulse,
        pulse::default_window(&branch_params, pulse),
        ModelVariant::Standard,
        &IntegrationOptions::default(),
    )?;
    Ok(TargetBranch {
        atom,
        phase: record.pulse_phase,
        delay: record.delay,
        mode_overlap: record.mode_overlap,
        n_out: record.n_out,
        scattered: record.scattered,
        record,
    })
}

/// Everything produced by one full gate run, for inspection and emission.
#[derive(Debug, Clone)]
pub struct FullGateRun {
    pub outcome: GateOutcome,
    pub storage: storage::StorageResult,
    pub control: storage::ControlPulse,
    pub storage_record: ScatteringRecord,
    pub branch_1: TargetBranch,
    pub branch_2: TargetBranch,
}

/// Run the full two-photon gate: store the control photon, then scatter the
/// target photon for both conditional atomic states.
///
/// The target pulse shape is taken from `target_pulse` with its maximum
/// placed at `control_pulse.t0 + target_delay`; the synthesized control
/// field must be off (≤ 10⁻³κ) when the target support begins.
pub fn run_full_gate(
    params: &SystemParams,
    control_pulse: &GaussianPulse,
    target_pulse: &GaussianPulse,
    target_delay: f64,
    synthesis: &SynthesisOptions,
) -> Result<GateOutcome> {
    run_full_gate_detailed(params, control_pulse, target_pulse, target_delay, synthesis)
        .map(|run| run.outcome)
}

/// [`run_full_gate`] keeping the storage record, control pulse, and both
/// branch records.
pub fn run_full_gate_detailed(
    params: &SystemParams,
    control_pulse: &GaussianPulse,
    target_pulse: &GaussianPulse,
    target_delay: f64,
    synthesis: &SynthesisOptions,
) -> Result<FullGateRun> {
    let control = storage::synthesize_control(params, control_pulse, synthesis)?;
    let storage_record = storage::closed_loop(
        params,
        control_pulse,
        &control,
        &IntegrationOptions {
            extract_phase: false,
            ..Default::default()
        },
    )?;
    let stored = storage::storage_result(&storage_record);

    let target = GaussianPulse::new(control_pulse.t0 + target_delay, target_pulse.eta)?;
    let arrival = target.t0 - 3.0 * target.eta;
    let tail = control.sample(arrival);
    if tail > 1e-3 * params.kappa() {
        return Err(Error::ControlOverlap {
            t: arrival,
            omega_c: tail,
        });
    }

    let branch_1 = run_target_scattering(params, &target, AtomState::Ground1)?;
    let branch_2 = run_target_scattering(params, &target, AtomState::Ground2)?;
    let outcome = assemble_outcome(stored.p2, &branch_1, &branch_2);
    Ok(FullGateRun {
        outcome,
        storage: stored,
        control,
        storage_record,
        branch_1,
        branch_2,
    })
}

fn assemble_outcome(p2: f64, branch_1: &TargetBranch, branch_2: &TargetBranch) -> GateOutcome {
    let p_target = branch_1.n_out;
    GateOutcome {
        phase_atom_in_1: branch_1.phase,
        phase_atom_in_2: branch_2.phase,
        conditional_shift: wrap_phase(branch_1.phase - branch_2.phase),
        p_target,
        p2,
        p_succ: p2 * p_target,
        scattered: branch_1.scattered,
    }
}

/// Sweep the gate over a cooperativity grid (varying g at fixed κ, Γ₃) and
/// locate the dark-region boundary and the total-scattering point.
///
/// Grid points above C = 1/2 run the full gate; points at or below run only
/// the target stage (storage is undefined there) and report p2 = 0.
pub fn sweep_cooperativity(
    base: &SystemParams,
    pulse: &GaussianPulse,
    c_grid: &[f64],
    opts: &SweepOptions,
) -> Result<CooperativitySweep> {
    if c_grid.is_empty() || c_grid.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::InvalidParam {
            name: "c_grid",
            reason: "cooperativity grid must be nonempty and positive".into(),
        });
    }
    let target_delay = opts
        .target_delay
        .unwrap_or(10.0 * pulse.eta);

    let outcomes: Vec<GateOutcome> = c_grid
        .par_iter()
        .map(|&c| -> Result<GateOutcome> {
            let p = base.with_cooperativity(c)?;
            if c > 0.5 {
                run_full_gate(&p, pulse, pulse, target_delay, &opts.synthesis)
            } else {
                let target = GaussianPulse::new(pulse.t0 + target_delay, pulse.eta)?;
                let b1 = run_target_scattering(&p, &target, AtomState::Ground1)?;
                let b2 = run_target_scattering(&p, &target, AtomState::Ground2)?;
                Ok(assemble_outcome(0.0, &b1, &b2))
            }
        })
        .collect::<Result<_>>()?;

    let scattered_at = |c: f64| -> Result<f64> {
        Ok(target_energy(base, pulse, c)?.1)
    };
    let n_out_at = |c: f64| -> Result<f64> { Ok(target_energy(base, pulse, c)?.0) };

    // Dark-region boundary: scattered(C) decreases through 0.2.
    let bracket = c_grid
        .windows(2)
        .zip(outcomes.windows(2))
        .find(|(_, o)| (o[0].scattered - 0.2) * (o[1].scattered - 0.2) <= 0.0)
        .map(|(c, _)| (c[0], c[1]))
        .ok_or_else(|| Error::GridTooCoarse {
            what: "scattered = 0.2 not bracketed by the cooperativity grid".into(),
        })?;
    let (mut lo, mut hi) = bracket;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if scattered_at(mid)? > 0.2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dark_region_upper = 0.5 * (lo + hi);

    // Total-scattering point: golden-section minimum of n̄_out(C).
    let min_idx = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.p_target.total_cmp(&b.1.p_target))
        .map(|(i, _)| i)
        .unwrap();
    if min_idx == 0 || min_idx == c_grid.len() - 1 {
        return Err(Error::GridTooCoarse {
            what: format!(
                "n_out minimum at the grid edge (C = {}); cannot bracket",
                c_grid[min_idx]
            ),
        });
    }
    let (mut a, mut b) = (c_grid[min_idx - 1], c_grid[min_idx + 1]);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
    let (mut f1, mut f2) = (n_out_at(x1)?, n_out_at(x2)?);
    for _ in 0..40 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = n_out_at(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = n_out_at(x2)?;
        }
    }
    let zero_reflection_c = 0.5 * (a + b);

    Ok(CooperativitySweep {
        c_grid: c_grid.to_vec(),
        outcomes,
        dark_region_upper,
        zero_reflection_c,
    })
}

/// (n̄_out, scattered) of the |1⟩-branch target stage at cooperativity `c`,
/// without phase extraction.
fn target_energy(base: &SystemParams, pulse: &GaussianPulse, c: f64) -> Result<(f64, f64)> {
    let p = base.with_cooperativity(c)?;
    let record = pulse::integrate(
        &p,
        |_| 0.0,
        pulse,
        pulse::default_window(&p, pulse),
        ModelVariant::Standard,
        &IntegrationOptions {
            extract_phase: false,
            ..Default::default()
        },
    )?;
    Ok((record.n_out, record.scattered))
}

/// Steady reflection amplitude r = (1 − 2C)/(1 + 2C) of the resonant
/// single-sided cavity with the control field off.
///
/// Follows from the amplitude equations with the time derivatives set to
/// zero and a constant input. Valid for Δ = 0, Ω_C = 0, κ_B = 0.
pub fn analytic_reflection(params: &SystemParams) -> Result<num_complex::Complex64> {
    if params.delta != 0.0 {
        return Err(Error::InvalidParam {
            name: "delta",
            reason: "reflection coefficient derived on resonance only".into(),
        });
    }
    if params.omega_c != 0.0 {
        return Err(Error::InvalidParam {
            name: "omega_c",
            reason: "reflection coefficient assumes the control field off".into(),
        });
    }
    if !params.is_single_sided() {
        return Err(Error::InvalidParam {
            name: "kappa_b",
            reason: "reflection coefficient assumes a single-sided cavity".into(),
        });
    }
    let c = params.cooperativity()?;
    Ok(num_complex::Complex64::new(
        (1.0 - 2.0 * c) / (1.0 + 2.0 * c),
        0.0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig_params() -> SystemParams {
        let kappa = 2.0 * PI * 2.5;
        SystemParams::new(
            10.0 * kappa,
            kappa,
            0.0,
            0.6 * kappa,
            0.6 * kappa,
            0.0,
            0.0,
            0.0,
        )
        .unwrap()
    }

    fn photon() -> GaussianPulse {
        GaussianPulse::from_fwhm(4.0, 1.0).unwrap()
    }

    #[test]
    fn classical_gate_phase_difference() {
        let p = SystemParams::new(5.0, 1.0, 0.0, 0.6, 0.6, 0.0, 3.0, 0.01_f64.sqrt()).unwrap();
        let phases = run_classical_gate(&p).unwrap();
        assert!(steady_state::phase_distance(phases.phase_off, PI) < 1e-3);
        assert!(phases.phase_on.abs() < 1e-3);
        assert!((phases.shift.abs() - PI).abs() < 1e-3);
    }

    #[test]
    fn classical_gate_identical_branches() {
        // Control off in both branches → Φ = 0.
        let p = SystemParams::new(5.0, 1.0, 0.0, 0.6, 0.6, 0.0, 0.0, 0.1).unwrap();
        let phases = run_classical_gate(&p).unwrap();
        assert_eq!(phases.shift, 0.0);
    }

    #[test]
    fn classical_gate_without_atom() {
        let p = SystemParams::new(0.0, 1.0, 0.0, 0.6, 0.6, 0.0, 3.0, 0.1).unwrap();
        let phases = run_classical_gate(&p).unwrap();
        assert!(phases.shift.abs() < 1e-9, "Φ = {}", phases.shift);
    }

    #[test]
    fn classical_gate_rejects_strong_drive() {
        let p = SystemParams::new(5.0, 1.0, 0.0, 0.6, 0.6, 0.0, 3.0, 0.5).unwrap();
        assert!(matches!(
            run_classical_gate(&p),
            Err(Error::InvalidParam { name: "epsilon", .. })
        ));
    }

    #[test]
    fn dark_branch_transmits_fully() {
        let branch = run_target_scattering(&fig_params(), &photon(), AtomState::Ground2).unwrap();
        assert!((branch.n_out - 1.0).abs() < 1e-3, "n_out {}", branch.n_out);
        assert!(branch.phase.abs() < 0.05, "phase {}", branch.phase);
        assert_eq!(branch.scattered, 0.0);
    }

    #[test]
    fn coupled_branch_reflects_with_pi() {
        let p = fig_params().with_cooperativity(100.0).unwrap();
        let branch = run_target_scattering(&p, &photon(), AtomState::Ground1).unwrap();
        assert!((branch.phase.abs() - PI).abs() < 0.05, "phase {}", branch.phase);
        assert!(branch.n_out >= 0.95, "n_out {}", branch.n_out);
        assert!((branch.n_out + branch.scattered - 1.0).abs() < 1e-4);
    }

    #[test]
    fn long_pulse_matches_steady_reflection() {
        // C = 10 → n̄_out = (19/21)² within the long-pulse tolerance.
        let base = SystemParams::new(1.0, 1.0, 0.0, 0.6, 0.6, 0.0, 0.0, 0.0).unwrap();
        let p = base.with_cooperativity(10.0).unwrap();
        let fwhm = 20.0 / p.kappa();
        let eta = fwhm / (2.0 * (2.0 * 2.0_f64.ln()).sqrt());
        let pulse = GaussianPulse::from_fwhm(6.0 * eta, fwhm).unwrap();
        let branch = run_target_scattering(&p, &pulse, AtomState::Ground1).unwrap();
        let r2 = (19.0_f64 / 21.0).powi(2);
        assert!(
            (branch.n_out - r2).abs() <= 0.02,
            "n_out {} vs r² {}",
            branch.n_out,
            r2
        );
    }

    #[test]
    fn full_gate_strong_coupling() {
        let p = fig_params().with_cooperativity(100.0).unwrap();
        let out = run_full_gate(&p, &photon(), &photon(), 4.0, &SynthesisOptions::default())
            .unwrap();
        assert!((out.conditional_shift.abs() - PI).abs() < 0.05);
        assert!(out.p_succ >= 0.85, "p_succ {}", out.p_succ);
        assert_eq!(out.p_succ, out.p2 * out.p_target);
        assert!((out.p_target + out.scattered - 1.0).abs() < 1e-4);
    }

    #[test]
    fn full_gate_rejects_sub_threshold() {
        let p = fig_params().with_cooperativity(0.4).unwrap();
        let err = run_full_gate(&p, &photon(), &photon(), 4.0, &SynthesisOptions::default());
        assert!(matches!(err, Err(Error::ProtocolInvalid { .. })));
    }

    #[test]
    fn full_gate_rejects_overlapping_pulses() {
        let p = fig_params().with_cooperativity(100.0).unwrap();
        let err = run_full_gate(&p, &photon(), &photon(), 0.5, &SynthesisOptions::default());
        assert!(matches!(err, Err(Error::ControlOverlap { .. })));
    }

    #[test]
    fn analytic_reflection_landmarks() {
        let base = SystemParams::new(1.0, 1.0, 0.0, 0.6, 0.6, 0.0, 0.0, 0.0).unwrap();
        let r_half = analytic_reflection(&base.with_cooperativity(0.5).unwrap()).unwrap();
        assert!(r_half.norm() < 1e-14);
        let r_zero = analytic_reflection(&base.with_g(0.0)).unwrap();
        assert!((r_zero.re - 1.0).abs() < 1e-14);
        let r_ten = analytic_reflection(&base.with_cooperativity(10.0).unwrap()).unwrap();
        assert!((r_ten.re + 19.0 / 21.0).abs() < 1e-12);
        assert!((r_ten.norm_sqr() - 0.8185941043083901).abs() < 1e-12);
    }

    /// Independent route to the reflection coefficient: solve the 2×2
    /// steady linear system for the amplitudes numerically.
    #[test]
    fn analytic_reflection_vs_numeric_steady_solve() {
        use nalgebra::{Matrix2, Vector2};
        use num_complex::Complex64;
        let base = SystemParams::new(1.0, 1.0, 0.0, 0.6, 0.6, 0.0, 0.0, 0.0).unwrap();
        for c in [0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
            let p = base.with_cooperativity(c).unwrap();
            let alpha_in = Complex64::ONE;
            let root = (2.0 * p.kappa_a).sqrt();
            // 0 = −κ_A c_cav − i g c_exc + √(2κ_A) α_in
            // 0 = −i g c_cav − Γ₃ c_exc
            let m = Matrix2::new(
                Complex64::new(-p.kappa_a, 0.0),
                -Complex64::I * p.g,
                -Complex64::I * p.g,
                Complex64::new(-p.gamma_3(), 0.0),
            );
            let rhs = Vector2::new(-root * alpha_in, Complex64::ZERO);
            let sol = m.lu().solve(&rhs).unwrap();
            let r_numeric = root * sol[0] / alpha_in - Complex64::ONE;
            let r_analytic = analytic_reflection(&p).unwrap();
            assert!(
                (r_numeric - r_analytic).norm() < 1e-12,
                "C = {c}: {r_numeric} vs {r_analytic}"
            );
        }
    }

    #[test]
    fn sweep_locates_landmarks() {
        // Long-pulse sweep on a coarse grid: landmarks from refinement.
        let base = SystemParams::new(1.0, 1.0, 0.0, 0.6, 0.6, 0.0, 0.0, 0.0).unwrap();
        let fwhm = 20.0 / base.kappa();
        let eta = fwhm / (2.0 * (2.0 * 2.0_f64.ln()).sqrt());
        let pulse = GaussianPulse::from_fwhm(6.0 * eta, fwhm).unwrap();
        let grid: Vec<f64> = vec![0.25, 0.4, 0.6, 1.0, 2.0, 5.0, 12.0, 30.0];
        let sweep = sweep_cooperativity(&base, &pulse, &grid, &SweepOptions::default()).unwrap();
        assert!(
            (sweep.zero_reflection_c - 0.5).abs() <= 0.05,
            "zero-reflection C = {}",
            sweep.zero_reflection_c
        );
        assert!(
            (sweep.dark_region_upper - 10.0).abs() <= 2.0,
            "dark-region boundary C = {}",
            sweep.dark_region_upper
        );
        // n̄_out increases with C above the bound.
        let above: Vec<f64> = grid
            .iter()
            .zip(&sweep.outcomes)
            .filter(|(c, _)| **c > 0.5)
            .map(|(_, o)| o.p_target)
            .collect();
        assert!(above.windows(2).all(|w| w[1] >= w[0]));
        // p_succ = p2 · p_target bit-exact everywhere.
        for o in &sweep.outcomes {
            assert_eq!(o.p_succ, o.p2 * o.p_target);
        }
    }
}
