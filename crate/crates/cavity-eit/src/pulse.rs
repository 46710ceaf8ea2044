//! Single-excitation amplitude dynamics for a photon wave packet impinging
//! on the single-sided cavity, with an arbitrary time-dependent control
//! field.
//!
//! The state of the driven system stays in the span of |1,0⟩, |1,1⟩, |2,0⟩,
//! |3,0⟩ for at most one excitation; the amplitude equations on resonance
//! (Δ = 0) are, in the standard variant,
//!
//! ```text
//! ċ_cavity  = −κ_A c_cavity − i g c_excited + √(2κ_A) α_in(t)
//! ċ_stored  = −i Ω_C(t) c_excited
//! ċ_excited = −i g c_cavity − i Ω_C(t) c_stored − Γ₃ c_excited
//! α_out(t)  = √(2κ_A) c_cavity − α_in(t)
//! ```
//!
//! together with running loss integrals (scattered light 2Γ₃∫|c_excited|²dt,
//! emitted energy ∫|α_out|²dt) that close the flux ledger exactly. The
//! as-printed variant adds decay feed terms (Γ₃₁ c_excited into the vacuum
//! amplitude, +Γ₃₂ c_excited into ċ_stored) that recycle incoherent decay
//! into amplitudes; it breaks the ledger and is kept for comparison only.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{GaussianPulse, HilbertSpace, SystemParams};
use crate::ode::Dopri5;
use crate::steady_state;

/// Which amplitude-equation variant to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelVariant {
    /// Flux-conserving equations; decay losses tracked in accumulators.
    #[default]
    Standard,
    /// The equation matrix taken verbatim, including the decay feed terms.
    AsPrinted,
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelVariant::Standard => write!(f, "standard"),
            ModelVariant::AsPrinted => write!(f, "as-printed"),
        }
    }
}

/// Complex amplitudes of the four participating states plus the running
/// loss integrals.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeState {
    /// |1,0⟩ amplitude. Constant 1 in the standard variant (spectator);
    /// evolved by the recycling terms in the as-printed variant.
    pub vacuum: Complex64,
    /// |1,1⟩ amplitude: the excitation is a cavity photon.
    pub cavity: Complex64,
    /// |2,0⟩ amplitude: the excitation is stored in the second ground state.
    pub stored: Complex64,
    /// |3,0⟩ amplitude: the atom is excited.
    pub excited: Complex64,
    /// 2Γ₃ ∫|c_excited|² dt so far.
    pub scattered_accum: f64,
    /// ∫|α_out|² dt so far.
    pub emitted_accum: f64,
    /// ∫|α_in|² dt so far.
    pub injected_accum: f64,
}

impl AmplitudeState {
    /// Initial state |1,0⟩ before the pulse arrives.
    pub fn initial() -> Self {
        Self {
            vacuum: Complex64::ONE,
            cavity: Complex64::ZERO,
            stored: Complex64::ZERO,
            excited: Complex64::ZERO,
            scattered_accum: 0.0,
            emitted_accum: 0.0,
            injected_accum: 0.0,
        }
    }

    /// Excitation currently inside the system.
    pub fn excitation(&self) -> f64 {
        self.cavity.norm_sqr() + self.stored.norm_sqr() + self.excited.norm_sqr()
    }

    /// Flux-ledger residual: excitation + emitted + scattered − injected.
    /// Zero (to integrator tolerance) for the standard variant.
    pub fn ledger_residual(&self) -> f64 {
        self.excitation() + self.emitted_accum + self.scattered_accum - self.injected_accum
    }

    fn from_raw(y: &[f64; 11]) -> Self {
        Self {
            vacuum: Complex64::new(y[0], y[1]),
            cavity: Complex64::new(y[2], y[3]),
            stored: Complex64::new(y[4], y[5]),
            excited: Complex64::new(y[6], y[7]),
            scattered_accum: y[8],
            emitted_accum: y[9],
            injected_accum: y[10],
        }
    }
}

/// Full time record of one scattering run.
#[derive(Debug, Clone)]
pub struct ScatteringRecord {
    pub time: Vec<f64>,
    pub alpha_in: Vec<Complex64>,
    pub alpha_out: Vec<Complex64>,
    pub states: Vec<AmplitudeState>,
    /// Control Rabi frequency sampled on the time grid.
    pub omega_c: Vec<f64>,
    /// Total output energy ∫|α_out|²dt (ODE accumulator, so it converges
    /// with the integrator tolerance rather than the output-grid density).
    pub n_out: f64,
    /// Total scattered light 2Γ₃∫|c_excited|²dt.
    pub scattered: f64,
    /// Input energy ∫|α_in|²dt over the window.
    pub injected: f64,
    /// Flux-ledger residual at the end of the window.
    pub ledger_residual: f64,
    /// Mode-matched output phase; NaN when extraction was skipped.
    pub pulse_phase: f64,
    /// Delay maximizing the in/out cross-correlation; NaN when skipped.
    pub delay: f64,
    /// Shape fidelity |⟨α_in(·−delay), α_out⟩|²/n_out in [0,1]; NaN when skipped.
    pub mode_overlap: f64,
}

impl ScatteringRecord {
    pub fn final_state(&self) -> &AmplitudeState {
        self.states.last().expect("record is never empty")
    }

    /// |c_cavity(t)|² — probability that the excitation is a cavity photon.
    pub fn p_cavity(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.cavity.norm_sqr())
    }

    /// |c_stored(t)|² — population of the storage state |2,0⟩.
    pub fn p_stored(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.stored.norm_sqr())
    }

    /// |c_excited(t)|² — population of the excited state |3,0⟩.
    pub fn p_excited(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.excited.norm_sqr())
    }

    /// Trapezoidal ∫|α_out|²dt on the output grid; agrees with `n_out` to
    /// quadrature accuracy and serves as a cross-check.
    pub fn n_out_trapezoid(&self) -> f64 {
        trapezoid(&self.time, self.alpha_out.iter().map(|z| z.norm_sqr()))
    }
}

/// Mode-matched phase extraction result.
#[derive(Debug, Clone, Copy)]
pub struct PulsePhase {
    pub phase: f64,
    pub delay: f64,
    pub mode_overlap: f64,
}

/// Integration controls. The defaults match the engine contract:
/// relative tolerance 10⁻⁹, absolute 10⁻¹².
#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Number of output samples (uniform over the window).
    pub output_points: usize,
    /// Run the mode-matched phase extraction after integrating.
    pub extract_phase: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            output_points: 2001,
            extract_phase: true,
        }
    }
}

/// Ledger residuals above this limit abort a standard-variant run.
pub const LEDGER_LIMIT: f64 = 1e-5;

/// Default simulation window `[min(0, t₀−6η), t₀ + 6η + 10/κ]`.
/// Pulse tails outside ±6η carry < 10⁻⁷ of the energy.
pub fn default_window(params: &SystemParams, pulse: &GaussianPulse) -> (f64, f64) {
    let start = (pulse.t0 - 6.0 * pulse.eta).min(0.0);
    (start, pulse.t0 + 6.0 * pulse.eta + 10.0 / params.kappa())
}

/// Scatter a Gaussian single-photon pulse off the cavity.
///
/// `omega_c` is the (real, non-negative) control Rabi frequency as a
/// function of time; `params.omega_c` is ignored here. The window must
/// cover the pulse support [t₀ − 6η, t₀ + 6η] and the run starts from
/// |1,0⟩. Resonance (Δ = 0) and a single-sided cavity are required.
pub fn integrate<W: Fn(f64) -> f64>(
    params: &SystemParams,
    omega_c: W,
    pulse: &GaussianPulse,
    window: (f64, f64),
    variant: ModelVariant,
    opts: &IntegrationOptions,
) -> Result<ScatteringRecord> {
    let (t_start, t_end) = window;
    let (need_start, need_end) = (pulse.t0 - 6.0 * pulse.eta, pulse.t0 + 6.0 * pulse.eta);
    if t_start > need_start + 1e-12 || t_end < need_end - 1e-12 {
        return Err(Error::WindowTooShort {
            start: t_start,
            end: t_end,
            need_start,
            need_end,
        });
    }
    let p = *pulse;
    integrate_input(
        params,
        omega_c,
        move |t| Complex64::new(p.value(t), 0.0),
        window,
        variant,
        opts,
    )
}

/// General-input variant of [`integrate`]; the input amplitude may be any
/// complex function of time (the dynamics are linear in it).
pub fn integrate_input<W, I>(
    params: &SystemParams,
    omega_c: W,
    input: I,
    window: (f64, f64),
    variant: ModelVariant,
    opts: &IntegrationOptions,
) -> Result<ScatteringRecord>
where
    W: Fn(f64) -> f64,
    I: Fn(f64) -> Complex64,
{
    params.validate()?;
    if params.delta != 0.0 {
        return Err(Error::InvalidParam {
            name: "delta",
            reason: format!(
                "pulse scattering is modelled on resonance only, got delta = {}",
                params.delta
            ),
        });
    }
    if !params.is_single_sided() {
        return Err(Error::InvalidParam {
            name: "kappa_b",
            reason: format!(
                "pulse scattering models a single-sided cavity (kappa_b <= 1e-3 kappa_a), got {}",
                params.kappa_b
            ),
        });
    }
    let (t_start, t_end) = window;
    if !(t_end > t_start) {
        return Err(Error::InvalidParam {
            name: "window",
            reason: format!("end {t_end} must exceed start {t_start}"),
        });
    }
    if opts.output_points < 2 {
        return Err(Error::InvalidParam {
            name: "output_points",
            reason: "need at least 2 output samples".into(),
        });
    }

    let kappa_a = params.kappa_a;
    let root_2ka = (2.0 * kappa_a).sqrt();
    let g = params.g;
    let gamma_3 = params.gamma_3();
    let gamma_31 = params.gamma_31;
    let gamma_32 = params.gamma_32;

    // State layout: [re/im vacuum, re/im cavity, re/im stored, re/im excited,
    //                scattered, emitted, injected].
    let rhs = |t: f64, y: &[f64; 11]| -> [f64; 11] {
        let a_in = input(t);
        let om = omega_c(t);
        let cavity = Complex64::new(y[2], y[3]);
        let stored = Complex64::new(y[4], y[5]);
        let excited = Complex64::new(y[6], y[7]);

        let d_cavity = -kappa_a * cavity - Complex64::I * g * excited + root_2ka * a_in;
        let d_stored = match variant {
            ModelVariant::Standard => -Complex64::I * om * excited,
            ModelVariant::AsPrinted => (-Complex64::I * om + gamma_32) * excited,
        };
        let d_excited =
            -Complex64::I * g * cavity - Complex64::I * om * stored - gamma_3 * excited;
        let d_vacuum = match variant {
            ModelVariant::Standard => Complex64::ZERO,
            ModelVariant::AsPrinted => kappa_a * cavity + gamma_31 * excited,
        };

        let a_out = root_2ka * cavity - a_in;
        [
            d_vacuum.re,
            d_vacuum.im,
            d_cavity.re,
            d_cavity.im,
            d_stored.re,
            d_stored.im,
            d_excited.re,
            d_excited.im,
            2.0 * gamma_3 * excited.norm_sqr(),
            a_out.norm_sqr(),
            a_in.norm_sqr(),
        ]
    };

    let y0 = [0.0; 11];
    let y0 = {
        let mut y = y0;
        y[0] = 1.0; // vacuum amplitude
        y
    };
    let span = t_end - t_start;
    let mut solver = Dopri5::new(rhs, t_start, y0, opts.rtol, opts.atol, span * 1e-4);

    let n = opts.output_points;
    let mut time = Vec::with_capacity(n);
    let mut alpha_in = Vec::with_capacity(n);
    let mut alpha_out = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut omega_samples = Vec::with_capacity(n);

    for k in 0..n {
        let t = t_start + span * (k as f64) / ((n - 1) as f64);
        solver.advance_to(t)?;
        let state = AmplitudeState::from_raw(solver.state());
        let a_in = input(t);
        let a_out = root_2ka * state.cavity - a_in;
        time.push(t);
        alpha_in.push(a_in);
        alpha_out.push(a_out);
        omega_samples.push(omega_c(t));
        states.push(state);
    }

    let last = *states.last().unwrap();
    let ledger_residual = last.ledger_residual();
    if variant == ModelVariant::Standard && ledger_residual.abs() > LEDGER_LIMIT {
        return Err(Error::LedgerViolation {
            residual: ledger_residual,
            limit: LEDGER_LIMIT,
        });
    }

    let mut record = ScatteringRecord {
        time,
        alpha_in,
        alpha_out,
        states,
        omega_c: omega_samples,
        n_out: last.emitted_accum,
        scattered: last.scattered_accum,
        injected: last.injected_accum,
        ledger_residual,
        pulse_phase: f64::NAN,
        delay: f64::NAN,
        mode_overlap: f64::NAN,
    };

    if opts.extract_phase && record.n_out > 1e-6 {
        let info = extract_pulse_phase(&record)?;
        record.pulse_phase = info.phase;
        record.delay = info.delay;
        record.mode_overlap = info.mode_overlap;
    }
    Ok(record)
}

/// Mode-matched phase, delay, and shape overlap of the output pulse.
///
/// The delay maximizes |∫ᾱ_in(t−τ) α_out(t) dt| over a τ grid with step
/// (t_end−t_start)/10⁴, refined by parabolic interpolation; the phase is
/// the argument of the correlation at that delay.
pub fn extract_pulse_phase(record: &ScatteringRecord) -> Result<PulsePhase> {
    if record.n_out <= 1e-6 {
        return Err(Error::VanishingOutput {
            n_out: record.n_out,
        });
    }
    let span = record.time.last().unwrap() - record.time[0];
    let fine_step = span / 1e4;
    let coarse_step = span / 500.0;

    let corr = |tau: f64| correlation(record, tau);

    // Coarse scan over [−span/2, span/2], then a fine scan around the best
    // coarse point.
    let mut best_tau = 0.0;
    let mut best_mag = -1.0;
    let mut tau = -span / 2.0;
    while tau <= span / 2.0 {
        let m = corr(tau).norm();
        if m > best_mag {
            best_mag = m;
            best_tau = tau;
        }
        tau += coarse_step;
    }
    let lo = best_tau - 2.0 * coarse_step;
    let hi = best_tau + 2.0 * coarse_step;
    let mut tau = lo;
    while tau <= hi {
        let m = corr(tau).norm();
        if m > best_mag {
            best_mag = m;
            best_tau = tau;
        }
        tau += fine_step;
    }

    // Parabolic refinement through the three neighbouring samples.
    let (m_minus, m_plus) = (
        corr(best_tau - fine_step).norm(),
        corr(best_tau + fine_step).norm(),
    );
    let denom = m_minus - 2.0 * best_mag + m_plus;
    let delay = if denom.abs() > 0.0 {
        best_tau + 0.5 * fine_step * (m_minus - m_plus) / denom
    } else {
        best_tau
    };

    let c = corr(delay);
    Ok(PulsePhase {
        phase: steady_state::wrap_phase(c.arg()),
        delay,
        mode_overlap: c.norm_sqr() / record.n_out,
    })
}

/// ∫ᾱ_in(t−τ) α_out(t) dt on the record grid, with α_in shifted by linear
/// interpolation (zero outside the window).
fn correlation(record: &ScatteringRecord, tau: f64) -> Complex64 {
    let t = &record.time;
    let n = t.len();
    let t0 = t[0];
    let dt = (t[n - 1] - t0) / ((n - 1) as f64);
    let sample_in = |time: f64| -> Complex64 {
        let x = (time - t0) / dt;
        if x < 0.0 || x > (n - 1) as f64 {
            return Complex64::ZERO;
        }
        let i = (x.floor() as usize).min(n - 2);
        let w = x - i as f64;
        record.alpha_in[i] * (1.0 - w) + record.alpha_in[i + 1] * w
    };
    let vals = (0..n).map(|i| sample_in(t[i] - tau).conj() * record.alpha_out[i]);
    trapezoid_complex(t, vals)
}

/// Frequency-domain fit of the pulse inside the EIT transparency window.
#[derive(Debug, Clone, Copy)]
pub struct EitWindow {
    /// True iff the pulse spectral FWHM fits inside the window.
    pub fits: bool,
    /// Pulse spectral width / window width.
    pub ratio: f64,
    /// Spectral FWHM of the pulse intensity.
    pub pulse_spectral_fwhm: f64,
    /// Full width of the central transparency feature at half depth.
    pub window_width: f64,
}

/// Compare the pulse spectrum with the transparency window of the
/// intracavity spectrum n(Δ).
///
/// The window is measured on the steady-state n(Δ) curve probed at weak
/// drive: on each side of Δ = 0 the absorption dip between the central
/// transparency peak and the Autler-Townes peak is located by golden-section
/// minimization, and the half-depth crossing between peak top and dip floor
/// by bisection. The window width is the distance between the two crossings.
pub fn eit_window_check(params: &SystemParams, pulse: &GaussianPulse) -> Result<EitWindow> {
    if !(params.omega_c > 0.0) {
        return Err(Error::InvalidParam {
            name: "omega_c",
            reason: "transparency window needs a control field (omega_c > 0)".into(),
        });
    }
    let kappa = params.kappa();
    let probe = SystemParams {
        epsilon: 0.01 * kappa,
        delta: 0.0,
        ..*params
    };
    let space = HilbertSpace::new(3)?;
    let n_at = |delta: f64| -> Result<f64> {
        let rho = steady_state::solve_steady_state(&probe.with_delta(delta), &space)?;
        let a = space.annihilation();
        Ok(rho.expectation(&(a.adjoint() * &a)).re)
    };

    let top = n_at(0.0)?;
    let at_peak = (params.g * params.g + params.omega_c * params.omega_c).sqrt();

    let mut crossings = [0.0; 2];
    for (side_idx, side) in [-1.0, 1.0].into_iter().enumerate() {
        // Absorption dip between the transparency peak and the AT peak.
        let (mut a, mut b) = (1e-3 * kappa, 0.999 * at_peak);
        let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let (mut x1, mut x2) = (b - phi * (b - a), a + phi * (b - a));
        let (mut f1, mut f2) = (n_at(side * x1)?, n_at(side * x2)?);
        for _ in 0..40 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = n_at(side * x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = n_at(side * x2)?;
            }
        }
        let dip_pos = 0.5 * (a + b);
        let dip = n_at(side * dip_pos)?.min(f1).min(f2);

        if !(top > 1.5 * dip) {
            return Err(Error::NoTransparencyWindow {
                omega_c: params.omega_c,
            });
        }

        // Half-depth crossing between Δ = 0 and the dip.
        let level = dip + 0.5 * (top - dip);
        let (mut lo, mut hi) = (0.0, dip_pos);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if n_at(side * mid)? > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        crossings[side_idx] = 0.5 * (lo + hi);
    }

    let window_width = crossings[0] + crossings[1];
    if window_width < 1e-6 * kappa {
        return Err(Error::NoTransparencyWindow {
            omega_c: params.omega_c,
        });
    }
    let pulse_spectral_fwhm = pulse.spectral_fwhm();
    Ok(EitWindow {
        fits: pulse_spectral_fwhm <= window_width,
        ratio: pulse_spectral_fwhm / window_width,
        pulse_spectral_fwhm,
        window_width,
    })
}

fn trapezoid(t: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.collect();
    let mut sum = 0.0;
    for i in 1..t.len() {
        sum += 0.5 * (t[i] - t[i - 1]) * (vals[i] + vals[i - 1]);
    }
    sum
}

fn trapezoid_complex(t: &[f64], values: impl Iterator<Item = Complex64>) -> Complex64 {
    let vals: Vec<Complex64> = values.collect();
    let mut sum = Complex64::ZERO;
    for i in 1..t.len() {
        sum += 0.5 * (t[i] - t[i - 1]) * (vals[i] + vals[i - 1]);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fig3_params(omega_c: f64) -> SystemParams {
        // κ/2π = 2.5 MHz in rad/µs; times in µs.
        let kappa = 2.0 * PI * 2.5;
        SystemParams::new(10.0 * kappa, kappa, 0.0, 0.6 * kappa, 0.6 * kappa, 0.0, omega_c * kappa, 0.0)
            .unwrap()
    }

    fn fig3_pulse() -> GaussianPulse {
        GaussianPulse::from_fwhm(4.0, 1.0).unwrap()
    }

    #[test]
    fn no_input_no_output() {
        let p = fig3_params(2.0);
        let pulse = fig3_pulse();
        let window = default_window(&p, &pulse);
        let rec = integrate_input(
            &p,
            |_| p.omega_c,
            |_| Complex64::ZERO,
            window,
            ModelVariant::Standard,
            &IntegrationOptions {
                extract_phase: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rec.n_out == 0.0);
        assert!(rec.alpha_out.iter().all(|z| z.norm() == 0.0));
        assert!(rec.states.iter().all(|s| s.excitation() == 0.0));
    }

    #[test]
    fn reflection_with_control_off() {
        let p = fig3_params(0.0);
        let pulse = fig3_pulse();
        let rec = integrate(
            &p,
            |_| 0.0,
            &pulse,
            default_window(&p, &pulse),
            ModelVariant::Standard,
            &IntegrationOptions::default(),
        )
        .unwrap();
        assert!((rec.pulse_phase.abs() - PI).abs() < 0.05, "phase {}", rec.pulse_phase);
        assert!(rec.mode_overlap > 0.98, "overlap {}", rec.mode_overlap);
        assert!(rec.ledger_residual.abs() < 1e-6);
        // Energy matches the steady-reflection value r² at the few-percent level.
        let c = p.cooperativity().unwrap();
        let r2 = ((1.0 - 2.0 * c) / (1.0 + 2.0 * c)).powi(2);
        assert!((rec.n_out - r2).abs() < 0.01, "n_out {} vs r² {r2}", rec.n_out);
    }

    #[test]
    fn eit_transmission_with_strong_control() {
        let p = fig3_params(10.0);
        let pulse = fig3_pulse();
        let rec = integrate(
            &p,
            |_| p.omega_c,
            &pulse,
            default_window(&p, &pulse),
            ModelVariant::Standard,
            &IntegrationOptions::default(),
        )
        .unwrap();
        assert!(rec.pulse_phase.abs() < 0.05, "phase {}", rec.pulse_phase);
        assert!(rec.delay > 0.0, "delay {}", rec.delay);
        assert!(rec.n_out > 0.95, "transmitted energy {}", rec.n_out);
    }

    #[test]
    fn intermediate_control_gives_sign_change() {
        let p = fig3_params(2.0);
        let pulse = fig3_pulse();
        let rec = integrate(
            &p,
            |_| p.omega_c,
            &pulse,
            default_window(&p, &pulse),
            ModelVariant::Standard,
            &IntegrationOptions {
                extract_phase: false,
                ..Default::default()
            },
        )
        .unwrap();
        let re: Vec<f64> = rec.alpha_out.iter().map(|z| z.re).collect();
        let min = re.iter().copied().fold(f64::INFINITY, f64::min);
        let max = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let peak_in = rec.alpha_in.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(min < -0.05 * peak_in, "no reflected (negative) part: min {min}");
        assert!(max > 0.05 * peak_in, "no transmitted (positive) part: max {max}");
    }

    #[test]
    fn window_must_cover_pulse() {
        let p = fig3_params(0.0);
        let pulse = fig3_pulse();
        let err = integrate(
            &p,
            |_| 0.0,
            &pulse,
            (3.0, 5.0),
            ModelVariant::Standard,
            &IntegrationOptions::default(),
        );
        assert!(matches!(err, Err(Error::WindowTooShort { .. })));
    }

    #[test]
    fn off_resonant_pulse_rejected() {
        let p = fig3_params(0.0).with_delta(1.0);
        let pulse = fig3_pulse();
        let err = integrate(
            &p,
            |_| 0.0,
            &pulse,
            default_window(&p, &pulse),
            ModelVariant::Standard,
            &IntegrationOptions::default(),
        );
        assert!(matches!(err, Err(Error::InvalidParam { name: "delta", .. })));
    }

    #[test]
    fn as_printed_variant_breaks_ledger() {
        let p = fig3_params(2.0);
        let pulse = fig3_pulse();
        let rec = integrate(
            &p,
            |_| p.omega_c,
            &pulse,
            default_window(&p, &pulse),
            ModelVariant::AsPrinted,
            &IntegrationOptions {
                extract_phase: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            rec.ledger_residual.abs() > 1e-3,
            "as-printed ledger unexpectedly balanced: {}",
            rec.ledger_residual
        );
    }

    #[test]
    fn synthetic_record_phase_extraction() {
        // α_out = −α_in: phase π, zero delay, unit overlap.
        let pulse = GaussianPulse::from_fwhm(4.0, 1.0).unwrap();
        let n = 2001;
        let (t0, t1) = (0.0, 10.0);
        let time: Vec<f64> = (0..n)
            .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
            .collect();
        let alpha_in: Vec<Complex64> = time
            .iter()
            .map(|&t| Complex64::new(pulse.value(t), 0.0))
            .collect();
        let alpha_out: Vec<Complex64> = alpha_in.iter().map(|z| -z).collect();
        let n_out: f64 = {
            let vals: Vec<f64> = alpha_out.iter().map(|z| z.norm_sqr()).collect();
            (1..n).map(|i| 0.5 * (time[i] - time[i - 1]) * (vals[i] + vals[i - 1])).sum()
        };
        let rec = ScatteringRecord {
            time: time.clone(),
            alpha_in,
            alpha_out,
            states: vec![AmplitudeState::initial()],
            omega_c: vec![0.0; n],
            n_out,
            scattered: 0.0,
            injected: 1.0,
            ledger_residual: 0.0,
            pulse_phase: f64::NAN,
            delay: f64::NAN,
            mode_overlap: f64::NAN,
        };
        let info = extract_pulse_phase(&rec).unwrap();
        assert!((info.phase.abs() - PI).abs() < 1e-6);
        assert!(info.delay.abs() < 2e-3);
        assert!((info.mode_overlap - 1.0).abs() < 1e-4);
    }

    #[test]
    fn synthetic_record_pure_delay() {
        let pulse = GaussianPulse::from_fwhm(3.0, 1.0).unwrap();
        let tau_d = 0.37;
        let n = 4001;
        let (t0, t1) = (0.0, 10.0);
        let time: Vec<f64> = (0..n)
            .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
            .collect();
        let alpha_in: Vec<Complex64> = time
            .iter()
            .map(|&t| Complex64::new(pulse.value(t), 0.0))
            .collect();
        let alpha_out: Vec<Complex64> = time
            .iter()
            .map(|&t| Complex64::new(pulse.value(t - tau_d), 0.0))
            .collect();
        let vals: Vec<f64> = alpha_out.iter().map(|z| z.norm_sqr()).collect();
        let n_out: f64 = (1..n)
            .map(|i| 0.5 * (time[i] - time[i - 1]) * (vals[i] + vals[i - 1]))
            .sum();
        let rec = ScatteringRecord {
            time,
            alpha_in,
            alpha_out,
            states: vec![AmplitudeState::initial()],
            omega_c: vec![0.0; n],
            n_out,
            scattered: 0.0,
            injected: 1.0,
            ledger_residual: 0.0,
            pulse_phase: f64::NAN,
            delay: f64::NAN,
            mode_overlap: f64::NAN,
        };
        let info = extract_pulse_phase(&rec).unwrap();
        assert!((info.delay - tau_d).abs() < 2e-3, "delay {}", info.delay);
        assert!(info.phase.abs() < 1e-6, "phase {}", info.phase);
    }

    #[test]
    fn eit_window_fig3_inset() {
        let pulse = fig3_pulse();
        let fit_strong = eit_window_check(&fig3_params(10.0), &pulse).unwrap();
        assert!(fit_strong.fits, "ratio {}", fit_strong.ratio);
        let fit_weak = eit_window_check(&fig3_params(2.0), &pulse).unwrap();
        assert!(!fit_weak.fits, "ratio {}", fit_weak.ratio);
    }

    #[test]
    fn eit_window_requires_control() {
        let err = eit_window_check(&fig3_params(0.0), &fig3_pulse());
        assert!(matches!(err, Err(Error::InvalidParam { name: "omega_c", .. })));
    }

    #[test]
    fn eit_window_grows_with_control_power() {
        let pulse = fig3_pulse();
        let mut last = 0.0;
        for om in [1.0, 2.0, 4.0, 7.0, 10.0] {
            let w = eit_window_check(&fig3_params(om), &pulse).unwrap().window_width;
            assert!(w > last, "window width {w} at omega_c = {om}κ not above {last}");
            last = w;
        }
    }
}
