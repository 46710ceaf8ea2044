//! Impedance-matched storage of a single Gaussian photon.
//!
//! Imposing a vanishing output field α_out ≡ 0 on the amplitude equations
//! fixes the whole storage trajectory algebraically:
//!
//! 1. c_cavity(t) = α_in(t)/√(2κ_A);
//! 2. c_excited(t) = (κ_A c_cavity − ċ_cavity)/(i g), purely imaginary for a
//!    real input, with the time derivative taken analytically from the
//!    Gaussian;
//! 3. |c_stored|²(t) follows from the exact population bookkeeping
//!    d|c_stored|²/dt = −d|c_excited|²/dt − 2Γ₃|c_excited|² − 2g·Im(c_excited c̄_cavity);
//! 4. Ω_C(t) = |ċ_excited + Γ₃ c_excited + i g c_cavity| / |c_stored(t)|,
//!    clamped at `omega_max` and defined from the first time |c_stored|²
//!    exceeds a small floor.
//!
//! The synthesized control field drives the photon into |2,0⟩ through the
//! dark state; feeding it back into the scattering engine (the closed loop)
//! is the defining check: the output field stays at the clamp-leak level.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{GaussianPulse, SystemParams};
use crate::pulse::{self, IntegrationOptions, ModelVariant, ScatteringRecord};

/// |c_stored|² threshold from which the control field is defined.
const STORED_FLOOR: f64 = 1e-6;

/// Tolerance on negative |c_stored|² excursions before the input pulse is
/// declared infeasible.
const NEGATIVE_TOL: f64 = 1e-8;

/// Synthesized control field on a time grid.
#[derive(Debug, Clone)]
pub struct ControlPulse {
    pub time_grid: Vec<f64>,
    pub omega_c: Vec<f64>,
    /// Clamp value; the field equals it before `valid_from`.
    pub omega_max: f64,
    /// First time at which the matching inversion is well defined.
    pub valid_from: f64,
}

impl ControlPulse {
    /// Control Rabi frequency at time `t`: `omega_max` before the grid and
    /// before `valid_from`, 0 after the grid, linear interpolation inside.
    pub fn sample(&self, t: f64) -> f64 {
        let grid = &self.time_grid;
        let n = grid.len();
        if t < self.valid_from {
            return self.omega_max;
        }
        if t <= grid[0] {
            return self.omega_c[0];
        }
        if t >= grid[n - 1] {
            return 0.0;
        }
        let dt = (grid[n - 1] - grid[0]) / ((n - 1) as f64);
        let x = (t - grid[0]) / dt;
        let i = (x.floor() as usize).min(n - 2);
        let w = x - i as f64;
        self.omega_c[i] * (1.0 - w) + self.omega_c[i + 1] * w
    }
}

/// Storage outcome bookkeeping.
///
/// `p1 = 1 − p2 − scattered` folds the leaked light into the |1⟩ outcome
/// (a photon that came back out leaves the atom in the initial ground
/// state), matching the two-outcome reading of the memory process.
#[derive(Debug, Clone, Copy)]
pub struct StorageResult {
    /// Probability that the photon was not stored (atom remains in |1⟩).
    pub p1: f64,
    /// Memory efficiency: |c_stored|² at the end of the window.
    pub p2: f64,
    /// ∫|α_out|²dt — light that escaped through the mirror.
    pub leak: f64,
    /// 2Γ₃∫|c_excited|²dt — light scattered by the atom.
    pub scattered: f64,
    /// Single-excitation ledger residual
    /// (p2 + leak + scattered + residual excitation − injected energy).
    pub ledger_residual: f64,
}

/// Synthesis tuning knobs.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions {
    /// Control-field clamp; defaults to 20κ.
    pub omega_max: Option<f64>,
    /// Grid density of the synthesized pulse.
    pub grid_points: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            omega_max: None,
            grid_points: 8001,
        }
    }
}

/// Dark-state mixing angle θ with tan θ = Ω_C / g.
pub fn dark_state_angle(omega_c: f64, g: f64) -> f64 {
    omega_c.atan2(g)
}

/// Synthesize the impedance-matched control field for a Gaussian input.
///
/// Requires cooperativity C > 1/2; below that the matching inversion has no
/// solution. Fails with `InfeasiblePulse` when the bookkeeping would drive
/// |c_stored|² negative (input pulse too fast for the cavity).
pub fn synthesize_control(
    params: &SystemParams,
    pulse: &GaussianPulse,
    opts: &SynthesisOptions,
) -> Result<ControlPulse> {
    params.validate()?;
    let c = params.cooperativity()?;
    if c <= 0.5 {
        return Err(Error::ProtocolInvalid { c });
    }
    if !params.is_single_sided() {
        return Err(Error::InvalidParam {
            name: "kappa_b",
            reason: "storage synthesis assumes a single-sided cavity".into(),
        });
    }
    if opts.grid_points < 9 {
        return Err(Error::InvalidParam {
            name: "grid_points",
            reason: "synthesis grid too coarse".into(),
        });
    }

    let omega_max = opts.omega_max.unwrap_or(20.0 * params.kappa());
    let (t_start, t_end) = pulse::default_window(params, pulse);
    let n = opts.grid_points;
    let dt = (t_end - t_start) / ((n - 1) as f64);

    let kappa_a = params.kappa_a;
    let g = params.g;
    let gamma_3 = params.gamma_3();
    let eta2 = pulse.eta * pulse.eta;

    // All trajectory pieces are analytic in t; c_excited = i·m(t) with m real.
    let cavity_amp = |t: f64| pulse.value(t) / (2.0 * kappa_a).sqrt();
    let m_fn = |t: f64| -(kappa_a + (t - pulse.t0) / eta2) * cavity_amp(t) / g;
    let m_dot = |t: f64| {
        let u = (t - pulse.t0) / eta2;
        -cavity_amp(t) * (1.0 / eta2 - (kappa_a + u) * u) / g
    };
    // i Ω_C c_stored = −ċ_excited − Γ₃ c_excited − i g c_cavity = i·n(t).
    let drive = |t: f64| -m_dot(t) - gamma_3 * m_fn(t) - g * cavity_amp(t);
    let stored_rate = |t: f64| 2.0 * m_fn(t) * drive(t);

    let time_grid: Vec<f64> = (0..n).map(|k| t_start + dt * k as f64).collect();
    let mut stored_sq = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut prev = stored_rate(t_start);
    stored_sq.push(0.0);
    for k in 1..n {
        let r = stored_rate(time_grid[k]);
        acc += 0.5 * dt * (prev + r);
        prev = r;
        if acc < -NEGATIVE_TOL {
            return Err(Error::InfeasiblePulse {
                t: time_grid[k],
                value: acc,
            });
        }
        stored_sq.push(acc.max(0.0));
    }

    let valid_from_idx = stored_sq
        .iter()
        .position(|&v| v > STORED_FLOOR)
        .ok_or(Error::InfeasiblePulse {
            t: t_end,
            value: *stored_sq.last().unwrap(),
        })?;
    let valid_from = time_grid[valid_from_idx];

    let omega_c: Vec<f64> = (0..n)
        .map(|k| {
            if k < valid_from_idx {
                omega_max
            } else {
                let denom = stored_sq[k].sqrt();
                if denom > 0.0 {
                    (drive(time_grid[k]).abs() / denom).min(omega_max)
                } else {
                    omega_max
                }
            }
        })
        .collect();
    debug_assert!(omega_c.iter().all(|w| w.is_finite() && *w <= omega_max));

    Ok(ControlPulse {
        time_grid,
        omega_c,
        omega_max,
        valid_from,
    })
}

/// Run the scattering engine with the synthesized control field.
pub fn closed_loop(
    params: &SystemParams,
    pulse: &GaussianPulse,
    control: &ControlPulse,
    opts: &IntegrationOptions,
) -> Result<ScatteringRecord> {
    pulse::integrate(
        params,
        |t| control.sample(t),
        pulse,
        pulse::default_window(params, pulse),
        ModelVariant::Standard,
        opts,
    )
}

/// Bookkeeping of a finished storage run.
pub fn storage_result(record: &ScatteringRecord) -> StorageResult {
    let end = record.final_state();
    let p2 = end.stored.norm_sqr();
    let leak = record.n_out;
    let scattered = record.scattered;
    let residual_excitation = end.cavity.norm_sqr() + end.excited.norm_sqr();
    StorageResult {
        p1: 1.0 - p2 - scattered,
        p2,
        leak,
        scattered,
        ledger_residual: p2 + leak + scattered + residual_excitation - record.injected,
    }
}

/// Synthesize, run the closed loop, and report the memory efficiencies.
pub fn storage_efficiency(
    params: &SystemParams,
    pulse: &GaussianPulse,
    opts: &SynthesisOptions,
) -> Result<StorageResult> {
    let control = synthesize_control(params, pulse, opts)?;
    let record = closed_loop(
        params,
        pulse,
        &control,
        &IntegrationOptions {
            extract_phase: false,
            ..Default::default()
        },
    )?;
    Ok(storage_result(&record))
}

/// Time-averaged squared overlap of the normalized excitation amplitude
/// (c_cavity, c_stored) with the instantaneous dark state
/// (−sin θ, cos θ), tan θ = Ω_C(t)/g.
///
/// Samples with negligible excitation (below 10⁻⁶ of the maximum) are
/// excluded from the average.
pub fn dark_state_fidelity(
    record: &ScatteringRecord,
    control: &ControlPulse,
    params: &SystemParams,
) -> Result<f64> {
    let weight_max = record
        .states
        .iter()
        .map(|s| s.cavity.norm_sqr() + s.stored.norm_sqr())
        .fold(0.0, f64::max);
    if weight_max <= 0.0 {
        return Err(Error::InvalidParam {
            name: "record",
            reason: "no excitation anywhere in the record".into(),
        });
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (t, s) in record.time.iter().zip(&record.states) {
        let w = s.cavity.norm_sqr() + s.stored.norm_sqr();
        if w <= 1e-6 * weight_max {
            continue;
        }
        let theta = dark_state_angle(control.sample(*t), params.g);
        let overlap = -theta.sin() * s.cavity + Complex64::new(theta.cos(), 0.0) * s.stored;
        sum += overlap.norm_sqr() / w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidParam {
            name: "record",
            reason: "no samples above the excitation floor".into(),
        });
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig4_params(g_over_kappa: f64) -> SystemParams {
        let kappa = 2.0 * PI * 2.5;
        SystemParams::new(
            g_over_kappa * kappa,
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

    fn fig4_pulse() -> GaussianPulse {
        GaussianPulse::from_fwhm(4.0, 1.0).unwrap()
    }

    #[test]
    fn sub_threshold_cooperativity_rejected() {
        let p = fig4_params(1.0).with_cooperativity(0.4).unwrap();
        let err = synthesize_control(&p, &fig4_pulse(), &SynthesisOptions::default());
        assert!(matches!(err, Err(Error::ProtocolInvalid { .. })));
    }

    #[test]
    fn excited_amplitude_is_purely_imaginary() {
        // General complex route to c_excited, checked against the real-m form.
        let p = fig4_params(10.0);
        let pulse = fig4_pulse();
        let kappa_a = p.kappa_a;
        let eta2 = pulse.eta * pulse.eta;
        for t in [2.5, 3.2, 4.0, 4.9, 5.6] {
            let c11 = Complex64::new(pulse.value(t) / (2.0 * kappa_a).sqrt(), 0.0);
            let c11_dot = -((t - pulse.t0) / eta2) * c11;
            let c30 = (kappa_a * c11 - c11_dot) / (Complex64::I * p.g);
            assert!(c30.re.abs() < 1e-12, "Re c_excited = {}", c30.re);
            let m = -(kappa_a + (t - pulse.t0) / eta2) * c11.re / p.g;
            assert!((c30.im - m).abs() < 1e-12);
        }
    }

    #[test]
    fn control_field_turns_off_monotonically() {
        let p = fig4_params(10.0);
        let control = synthesize_control(&p, &fig4_pulse(), &SynthesisOptions::default()).unwrap();
        let last = *control.omega_c.last().unwrap();
        assert!(
            last < 1e-3 * p.kappa(),
            "control not off at window end: {last}"
        );
        // Non-increasing once defined (small numerical wiggle allowed).
        let from = control
            .time_grid
            .iter()
            .position(|&t| t >= control.valid_from)
            .unwrap();
        for w in control.omega_c[from..].windows(2) {
            assert!(
                w[1] <= w[0] + 1e-9 * control.omega_max,
                "control field rises: {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(control.omega_c.iter().all(|&w| w <= control.omega_max));
    }

    #[test]
    fn closed_loop_cancels_output() {
        // Defining property of the matching: leak stays small before turn-off.
        let p = fig4_params(10.0);
        let pulse = fig4_pulse();
        let control = synthesize_control(&p, &pulse, &SynthesisOptions::default()).unwrap();
        let rec = closed_loop(
            &p,
            &pulse,
            &control,
            &IntegrationOptions {
                extract_phase: false,
                ..Default::default()
            },
        )
        .unwrap();
        let peak_in = rec.alpha_in.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let peak_out = rec.alpha_out.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(
            peak_out < 1e-2 * peak_in,
            "|α_out| peak {peak_out} vs input peak {peak_in}"
        );
        assert!(rec.n_out <= 1e-2, "leak {}", rec.n_out);
    }

    #[test]
    fn storage_efficiency_high_cooperativity() {
        let p = fig4_params(1.0).with_cooperativity(100.0).unwrap();
        let res = storage_efficiency(&p, &fig4_pulse(), &SynthesisOptions::default()).unwrap();
        assert!(res.p2 >= 0.9, "P2 = {}", res.p2);
        assert!(res.ledger_residual.abs() < 1e-4);
        assert!((res.p1 + res.p2 + res.scattered - 1.0).abs() < 1e-12);
        assert!(res.leak <= res.p1 + 1e-4, "leak {} vs p1 {}", res.leak, res.p1);
    }

    #[test]
    fn no_control_stores_nothing() {
        let p = fig4_params(10.0);
        let pulse = fig4_pulse();
        let rec = pulse::integrate(
            &p,
            |_| 0.0,
            &pulse,
            pulse::default_window(&p, &pulse),
            ModelVariant::Standard,
            &IntegrationOptions {
                extract_phase: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(rec.final_state().stored.norm_sqr(), 0.0);
    }

    #[test]
    fn dark_state_angle_accessor() {
        assert!((dark_state_angle(1.0, 1.0) - PI / 4.0).abs() < 1e-15);
        assert_eq!(dark_state_angle(0.0, 5.0), 0.0);
    }

    #[test]
    fn storage_follows_dark_state_at_high_cooperativity() {
        let p = fig4_params(1.0).with_cooperativity(100.0).unwrap();
        let pulse = fig4_pulse();
        let control = synthesize_control(&p, &pulse, &SynthesisOptions::default()).unwrap();
        let rec = closed_loop(
            &p,
            &pulse,
            &control,
            &IntegrationOptions {
                extract_phase: false,
                ..Default::default()
            },
        )
        .unwrap();
        let fid = dark_state_fidelity(&rec, &control, &p).unwrap();
        assert!(fid >= 0.9, "time-averaged dark-state fidelity {fid}");

        // End point: θ = 0, so the fidelity reduces to P₂/(P₂ + residual).
        let end = rec.final_state();
        let end_fid =
            end.stored.norm_sqr() / (end.stored.norm_sqr() + end.cavity.norm_sqr());
        assert!(end_fid > 0.999, "end fidelity {end_fid}");
    }
}
