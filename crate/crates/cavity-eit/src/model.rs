//! Physical parameters, pulse shapes, and operator construction shared by
//! all engines.
//!
//! Basis ordering on the truncated atom⊗field space is fixed throughout the
//! crate: `index = 3*n + (level - 1)` for atomic level ∈ {1, 2, 3} and
//! photon number `n ∈ 0..=n_fock`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Physical rates and couplings of the driven atom-cavity system.
///
/// All fields share one angular-frequency unit. Rates are *field* (amplitude)
/// decay rates: the cavity energy decays at 2κ and the excited-state
/// population at 2Γ₃, matching the dissipator convention used in
/// [`build_collapse_operators`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Atom-cavity coupling (single-photon Rabi frequency).
    pub g: f64,
    /// Field decay rate of the input/output mirror.
    pub kappa_a: f64,
    /// Field decay rate of the second mirror (0 for an ideal single-sided cavity).
    pub kappa_b: f64,
    /// Polarization decay rate |3⟩→|1⟩.
    pub gamma_31: f64,
    /// Polarization decay rate |3⟩→|2⟩.
    pub gamma_32: f64,
    /// Probe-cavity detuning Δ = ω_P − ω.
    pub delta: f64,
    /// Classical control Rabi frequency (constant-drive contexts).
    pub omega_c: f64,
    /// Coherent pump strength ε (real, non-negative; fixes the input phase reference).
    pub epsilon: f64,
}

impl SystemParams {
    pub fn new(
        g: f64,
        kappa_a: f64,
        kappa_b: f64,
        gamma_31: f64,
        gamma_32: f64,
        delta: f64,
        omega_c: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let p = Self {
            g,
            kappa_a,
            kappa_b,
            gamma_31,
            gamma_32,
            delta,
            omega_c,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg: [(&'static str, f64); 6] = [
            ("g", self.g),
            ("kappa_b", self.kappa_b),
            ("gamma_31", self.gamma_31),
            ("gamma_32", self.gamma_32),
            ("omega_c", self.omega_c),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        if !(self.kappa_a > 0.0) || !self.kappa_a.is_finite() {
            return Err(Error::InvalidParam {
                name: "kappa_a",
                reason: format!("must be finite and > 0, got {}", self.kappa_a),
            });
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParam {
                name: "delta",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// Total cavity field decay rate κ = κ_A + κ_B.
    pub fn kappa(&self) -> f64 {
        self.kappa_a + self.kappa_b
    }

    /// Total excited-state polarization decay rate Γ₃ = Γ₃₁ + Γ₃₂.
    pub fn gamma_3(&self) -> f64 {
        self.gamma_31 + self.gamma_32
    }

    /// Cooperativity C = g² / (2 κ Γ₃). Undefined when κ·Γ₃ = 0.
    pub fn cooperativity(&self) -> Result<f64> {
        let denom = 2.0 * self.kappa() * self.gamma_3();
        if denom == 0.0 {
            return Err(Error::UndefinedCooperativity);
        }
        Ok(self.g * self.g / denom)
    }

    /// True iff the cavity is effectively single-sided (κ_B ≤ 10⁻³ κ_A).
    pub fn is_single_sided(&self) -> bool {
        self.kappa_b <= 1e-3 * self.kappa_a
    }

    /// Same parameters with the coupling g rescaled to hit cooperativity `c`
    /// at fixed κ and Γ₃.
    pub fn with_cooperativity(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(Error::InvalidParam {
                name: "cooperativity",
                reason: format!("must be >= 0, got {c}"),
            });
        }
        let denom = 2.0 * self.kappa() * self.gamma_3();
        if denom == 0.0 {
            return Err(Error::UndefinedCooperativity);
        }
        Ok(Self {
            g: (c * denom).sqrt(),
            ..*self
        })
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }

    pub fn with_omega_c(&self, omega_c: f64) -> Self {
        Self { omega_c, ..*self }
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..*self }
    }

    /// Mean input-field amplitude ⟨a_in⟩ fixed by the pump strength.
    ///
    /// The pump term ε(a + a†) enters the cavity equation of motion as the
    /// drive −iε, which the input-output relation a_out = √(2κ_A) a − a_in
    /// identifies with √(2κ_A)⟨a_in⟩. Hence ⟨a_in⟩ = −iε/√(2κ_A); only
    /// phases relative to this reference are physical.
    pub fn input_amplitude(&self) -> Complex64 {
        Complex64::new(0.0, -self.epsilon / (2.0 * self.kappa_a).sqrt())
    }
}

/// Normalized Gaussian single-photon wave packet
/// α_in(t) = C_n exp(−(t−t₀)²/(2η²)) with C_n = (√π η)^(−1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    /// Time of the pulse maximum.
    pub t0: f64,
    /// Gaussian width parameter η.
    pub eta: f64,
    /// Normalization constant C_n = (√π η)^(−1/2), so that ∫|α_in|² dt = 1.
    pub amplitude_norm: f64,
}

impl GaussianPulse {
    pub fn new(t0: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParam {
                name: "eta",
                reason: format!("must be finite and > 0, got {eta}"),
            });
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParam {
                name: "t0",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            t0,
            eta,
            amplitude_norm: (std::f64::consts::PI.sqrt() * eta).powf(-0.5),
        })
    }

    /// Construct from the intensity full width at half maximum,
    /// η = FWHM / (2 √(2 ln 2)).
    pub fn from_fwhm(t0: f64, fwhm: f64) -> Result<Self> {
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::InvalidParam {
                name: "fwhm",
                reason: format!("must be finite and > 0, got {fwhm}"),
            });
        }
        Self::new(t0, fwhm / (2.0 * (2.0 * (2.0_f64).ln()).sqrt()))
    }

    /// FWHM = 2 η √(2 ln 2).
    pub fn fwhm(&self) -> f64 {
        2.0 * self.eta * (2.0 * (2.0_f64).ln()).sqrt()
    }

    /// Pulse amplitude at time `t`.
    pub fn value(&self, t: f64) -> f64 {
        let u = (t - self.t0) / self.eta;
        self.amplitude_norm * (-0.5 * u * u).exp()
    }

    /// FWHM of the spectral intensity |α̃(ω)|² ∝ exp(−η²ω²): 2√(ln 2)/η.
    pub fn spectral_fwhm(&self) -> f64 {
        2.0 * (2.0_f64).ln().sqrt() / self.eta
    }
}

/// Truncated Hilbert space of the three-level atom and the cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    /// Fock truncation: photon numbers 0..=n_fock.
    pub n_fock: usize,
}

impl HilbertSpace {
    /// At least two Fock levels (n_fock ≥ 1) so the pump acts nontrivially.
    pub fn new(n_fock: usize) -> Result<Self> {
        if n_fock < 1 {
            return Err(Error::InvalidParam {
                name: "n_fock",
                reason: format!("must be >= 1, got {n_fock}"),
            });
        }
        Ok(Self { n_fock })
    }

    /// Total dimension 3 (n_fock + 1).
    pub fn dim(&self) -> usize {
        3 * (self.n_fock + 1)
    }

    /// Basis index of |level, n⟩ with level ∈ {1, 2, 3}.
    pub fn index(&self, level: usize, n: usize) -> usize {
        debug_assert!((1..=3).contains(&level) && n <= self.n_fock);
        3 * n + (level - 1)
    }

    /// Photon annihilation operator on the truncated space.
    pub fn annihilation(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut a = DMatrix::zeros(dim, dim);
        for n in 1..=self.n_fock {
            for level in 1..=3 {
                a[(self.index(level, n - 1), self.index(level, n))] =
                    Complex64::new((n as f64).sqrt(), 0.0);
            }
        }
        a
    }

    /// Atomic operator σ_kl = |k⟩⟨l| ⊗ 1_field.
    pub fn atomic(&self, k: usize, l: usize) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut s = DMatrix::zeros(dim, dim);
        for n in 0..=self.n_fock {
            s[(self.index(k, n), self.index(l, n))] = Complex64::ONE;
        }
        s
    }

    /// Projector matrix of the vacuum ground state |1,0⟩⟨1,0|.
    pub fn ground_projector(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut p = DMatrix::zeros(dim, dim);
        p[(self.index(1, 0), self.index(1, 0))] = Complex64::ONE;
        p
    }
}

/// Interaction-picture Hamiltonian
/// H = Δ(σ₁₁ − a†a) + (ε a + g a σ₃₁ + Ω_C σ₃₂ + h.c.).
///
/// Hermitian by construction: the non-Hermitian part is built once and added
/// to its own adjoint, so H[i,j] = conj(H[j,i]) holds exactly.
pub fn build_hamiltonian(params: &SystemParams, space: &HilbertSpace) -> DMatrix<Complex64> {
    let a = space.annihilation();
    let n_op = a.adjoint() * &a;
    let sigma_11 = space.atomic(1, 1);
    let sigma_31 = space.atomic(3, 1);
    let sigma_32 = space.atomic(3, 2);

    let half = &a * Complex64::new(params.epsilon, 0.0)
        + &a * sigma_31 * Complex64::new(params.g, 0.0)
        + sigma_32 * Complex64::new(params.omega_c, 0.0);
    let mut h = &half + half.adjoint();
    h += (sigma_11 - n_op) * Complex64::new(params.delta, 0.0);
    h
}

/// Collapse operators {√(2κ) a, √(2Γ₃₁) σ₁₃, √(2Γ₃₂) σ₂₃}.
///
/// In the dissipator D[L]ρ = LρL† − ½{L†L, ρ} these reproduce the rate
/// convention of the master equation: excited-state population decays at
/// 2Γ₃ and the cavity energy at 2κ. Channels with zero rate are omitted.
pub fn build_collapse_operators(
    params: &SystemParams,
    space: &HilbertSpace,
) -> Result<Vec<DMatrix<Complex64>>> {
    params.validate()?;
    let mut ops = Vec::new();
    let kappa = params.kappa();
    if kappa > 0.0 {
        ops.push(space.annihilation() * Complex64::new((2.0 * kappa).sqrt(), 0.0));
    }
    if params.gamma_31 > 0.0 {
        ops.push(space.atomic(1, 3) * Complex64::new((2.0 * params.gamma_31).sqrt(), 0.0));
    }
    if params.gamma_32 > 0.0 {
        ops.push(space.atomic(2, 3) * Complex64::new((2.0 * params.gamma_32).sqrt(), 0.0));
    }
    Ok(ops)
}

/// Apply the dissipator Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}) to `rho`.
pub fn apply_dissipator(
    collapse_ops: &[DMatrix<Complex64>],
    rho: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
    let half = Complex64::new(0.5, 0.0);
    for l in collapse_ops {
        let l_dag = l.adjoint();
        let ldl = &l_dag * l;
        out += l * rho * &l_dag - (&ldl * rho + rho * &ldl) * half;
    }
    out
}
