//! Error type shared by all engines.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor or operation received a non-physical parameter.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Cooperativity is undefined when κ·Γ₃ = 0.
    #[error("cooperativity undefined: kappa*gamma_3 = 0")]
    UndefinedCooperativity,

    /// The driven system has no dissipation channel, so no unique steady state.
    #[error("no dissipation (kappa = 0 and gamma_3 = 0): steady state is not unique")]
    NoDissipation,

    /// The steady-state solve failed or left a residual above tolerance.
    #[error("steady-state solve ill-conditioned at delta = {delta:.6e}: {detail}")]
    IllConditioned { delta: f64, detail: String },

    /// Output field too weak to carry a meaningful phase.
    #[error("output field magnitude {magnitude:.3e} below threshold; phase undefined")]
    PhaseUndefined { magnitude: f64 },

    /// The integration window does not cover the pulse support.
    #[error("window [{start:.3}, {end:.3}] does not cover the pulse support [{need_start:.3}, {need_end:.3}]")]
    WindowTooShort {
        start: f64,
        end: f64,
        need_start: f64,
        need_end: f64,
    },

    /// Adaptive step-size control collapsed.
    #[error("step size underflow at t = {t:.6e}")]
    StepSizeUnderflow { t: f64 },

    /// The single-excitation flux ledger failed to balance.
    #[error("flux ledger residual {residual:.3e} exceeds {limit:.3e}")]
    LedgerViolation { residual: f64, limit: f64 },

    /// No output energy: pulse phase extraction is undefined.
    #[error("output energy {n_out:.3e} too small for phase extraction")]
    VanishingOutput { n_out: f64 },

    /// The intracavity spectrum has no resolved transparency window.
    #[error("no transparency window found (omega_c = {omega_c:.3e} too small relative to the linewidths)")]
    NoTransparencyWindow { omega_c: f64 },

    /// Storage synthesis is undefined at or below the critical cooperativity.
    #[error("storage protocol invalid: cooperativity {c:.4} <= 1/2")]
    ProtocolInvalid { c: f64 },

    /// The impedance-matching inversion produced a negative |c2|².
    #[error("infeasible input pulse: stored population would be {value:.3e} at t = {t:.4} (pulse too fast for the cavity)")]
    InfeasiblePulse { t: f64, value: f64 },

    /// The synthesized control field is still on when the target pulse arrives.
    #[error("control field {omega_c:.3e} still on at target arrival t = {t:.4}")]
    ControlOverlap { t: f64, omega_c: f64 },

    /// A root-finding stage could not bracket its target on the given grid.
    #[error("grid too coarse: {what}")]
    GridTooCoarse { what: String },
}
