//! Simulator of a three-level Λ atom in a single-sided optical cavity.
//!
//! The crate models one atom (ground states |1⟩, |2⟩, excited state |3⟩)
//! coupled to a single cavity mode that is driven and read out through one
//! mirror. A classical control field on the |2⟩↔|3⟩ transition opens an
//! EIT transparency window for probe light on the |1⟩↔|3⟩ transition, and
//! that mechanism is exercised in four ways:
//!
//! * [`steady_state`] — driven Lindblad master equation, solved directly for
//!   its steady state, giving the reflected-field phase and intracavity
//!   photon number versus probe detuning.
//! * [`pulse`] — single-excitation amplitude equations for a photon wave
//!   packet impinging on the cavity, with an arbitrary time-dependent
//!   control field.
//! * [`storage`] — synthesis of the impedance-matched control pulse that
//!   stores an incoming photon in |2⟩ with no reflected light, plus the
//!   resulting memory efficiency.
//! * [`gate`] — the controlled phase-gate protocol built from the above:
//!   store a control photon, then conditionally reflect a target photon
//!   with a π phase shift.
//!
//! All quantities use a consistent angular-frequency unit (the inverse of
//! the time unit); nothing in the crate assumes a particular unit choice.

pub mod error;
pub mod gate;
pub mod model;
mod ode;
pub mod pulse;
pub mod steady_state;
pub mod storage;

pub use error::{Error, Result};
pub use model::{GaussianPulse, HilbertSpace, SystemParams};
