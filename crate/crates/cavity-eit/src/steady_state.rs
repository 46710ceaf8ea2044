//! Steady state of the driven Lindblad master equation and the phase /
//! photon-number spectra extracted from it.
//!
//! The steady state is obtained directly as the null space of the vectorized
//! Liouvillian (column-stacked convention), with one row replaced by the
//! trace-one condition. No time evolution is performed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{build_collapse_operators, build_hamiltonian, HilbertSpace, SystemParams};

/// Tolerance on the Liouvillian residual of a reported steady state,
/// in units of the dominant rate.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Steady-state density matrix with its solver residual.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
    /// ‖L(ρ)‖_max of the unmodified Liouvillian, in the parameter units.
    pub residual: f64,
}

impl DensityMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Maximum entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.mat.adjoint();
        (&self.mat - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// Smallest eigenvalue (the matrix is Hermitian up to solver tolerance).
    pub fn min_eigenvalue(&self) -> f64 {
        self.mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// tr(op · ρ).
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> Complex64 {
        let d = self.dim();
        let mut tr = Complex64::ZERO;
        for i in 0..d {
            for j in 0..d {
                tr += op[(i, j)] * self.mat[(j, i)];
            }
        }
        tr
    }
}

/// One point of the reflected-field spectrum.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumPoint {
    /// Probe-cavity detuning of this point.
    pub delta: f64,
    /// Output phase relative to the input field, in (−π, π].
    pub phase: f64,
    /// Intracavity photon number ⟨a†a⟩.
    pub n_intra: f64,
    /// Mean output-field amplitude √(2κ_A)⟨a⟩ − ⟨a_in⟩.
    pub a_out_mean: Complex64,
    /// Liouvillian residual of the underlying steady state.
    pub residual: f64,
}

/// Paired spectra with the control field on and off, on one detuning grid.
#[derive(Debug, Clone)]
pub struct PairedSpectrum {
    pub on: Vec<SpectrumPoint>,
    pub off: Vec<SpectrumPoint>,
    /// Φ(Δ) = φ(Ω_C = 0) − φ(Ω_C ≠ 0), wrapped to (−π, π].
    pub phase_diff: Vec<f64>,
}

/// Map an angle to the branch (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    std::f64::consts::PI - (std::f64::consts::PI - x).rem_euclid(std::f64::consts::TAU)
}

/// Distance between two angles on the circle, in [0, π].
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// Unwrap a wrapped phase sequence by nearest-branch continuity.
///
/// Returns the unwrapped angles together with the indices where the *raw*
/// sequence jumped by more than π (branch cuts).
pub fn unwrap_phases(phases: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut out = Vec::with_capacity(phases.len());
    let mut cuts = Vec::new();
    let mut offset = 0.0;
    for (i, &p) in phases.iter().enumerate() {
        if i > 0 {
            let raw_jump = p - phases[i - 1];
            if raw_jump.abs() > std::f64::consts::PI {
                cuts.push(i);
                offset -= std::f64::consts::TAU * raw_jump.signum();
            }
        }
        out.push(p + offset);
    }
    (out, cuts)
}

/// Collapse operators as seen by the steady-state engine.
///
/// With the control field off, |2⟩ is decoupled from every coherent process
/// and the 3→2 emission branch would only pump population darkly into |2⟩,
/// making the t→∞ state an empty-cavity one regardless of the coupling. The
/// probe response of interest is the two-level quasi-steady state, so for
/// Ω_C = 0 the engine returns that emission branch to |1⟩ instead. The
/// σ₁₃-coherence damping keeps the full Γ₃ either way, so the linear
/// response is untouched.
fn engine_collapse_operators(
    params: &SystemParams,
    space: &HilbertSpace,
) -> Result<Vec<DMatrix<Complex64>>> {
    if params.omega_c > 0.0 || params.gamma_32 == 0.0 {
        return build_collapse_operators(params, space);
    }
    let closed = SystemParams {
        gamma_31: params.gamma_31 + params.gamma_32,
        gamma_32: 0.0,
        ..*params
    };
    build_collapse_operators(&closed, space)
}

/// Vectorized Liouvillian of the master equation (column-stacked), dim²×dim².
pub fn liouvillian(params: &SystemParams, space: &HilbertSpace) -> Result<DMatrix<Complex64>> {
    let h = build_hamiltonian(params, space);
    let ls = engine_collapse_operators(params, space)?;
    let d = space.dim();
    let eye = DMatrix::<Complex64>::identity(d, d);

    // vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
    let mut sup = (eye.kronecker(&h) - h.transpose().kronecker(&eye)) * Complex64::new(0.0, -1.0);
    let half = Complex64::new(0.5, 0.0);
    for l in &ls {
        let ldl = l.adjoint() * l;
        sup += l.map(|z| z.conj()).kronecker(l)
            - eye.kronecker(&ldl) * half
            - ldl.transpose().kronecker(&eye) * half;
    }
    Ok(sup)
}

/// Solve L(ρ) = 0, tr ρ = 1 for the unique steady state.
///
/// The row of the vectorized system corresponding to the (0,0) element is
/// replaced by the trace condition; the result is validated against the
/// unmodified Liouvillian and must satisfy ‖L(ρ)‖_max ≤ 10⁻¹⁰ in units of
/// the dominant rate.
pub fn solve_steady_state(params: &SystemParams, space: &HilbertSpace) -> Result<DensityMatrix> {
    params.validate()?;
    let rate_scale = params.kappa().max(params.gamma_3());
    if rate_scale <= 0.0 {
        return Err(Error::NoDissipation);
    }

    let sup = liouvillian(params, space)?;
    let d = space.dim();
    let d2 = d * d;

    let mut system = sup.clone();
    for col in 0..d2 {
        system[(0, col)] = Complex64::ZERO;
    }
    for n in 0..d {
        system[(0, n * d + n)] = Complex64::ONE; // trace row
    }
    let mut rhs = DVector::<Complex64>::zeros(d2);
    rhs[0] = Complex64::ONE;

    let direct = system.full_piv_lu().solve(&rhs).and_then(|solved| {
        let (rho, residual) = finish_candidate(&sup, &solved, d);
        (residual.is_finite() && residual <= RESIDUAL_TOL * rate_scale)
            .then_some(DensityMatrix { mat: rho, residual })
    });
    if let Some(rho) = direct {
        return Ok(rho);
    }

    // Degenerate Liouvillian (e.g. a fully decoupled atom leaves several
    // stationary sectors): project the physical initial state |1,0⟩⟨1,0|
    // onto the null space along range(L), using the left/right singular
    // null vectors.
    let svd = sup
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::IllConditioned {
            delta: params.delta,
            detail: "SVD of the Liouvillian did not converge".into(),
        })?;
    let u = svd.u.as_ref().unwrap();
    let v = svd.v_t.as_ref().unwrap().adjoint();
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let null_idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= 1e-10 * sigma_max)
        .collect();
    if null_idx.is_empty() {
        return Err(Error::IllConditioned {
            delta: params.delta,
            detail: "no Liouvillian null vector found".into(),
        });
    }

    let k = null_idx.len();
    let mut overlap = DMatrix::<Complex64>::zeros(k, k);
    let mut proj = DVector::<Complex64>::zeros(k);
    for (row, &j) in null_idx.iter().enumerate() {
        for (col, &i) in null_idx.iter().enumerate() {
            overlap[(row, col)] = u.column(j).dotc(&v.column(i));
        }
        // vec(|1,0⟩⟨1,0|) = e₀.
        proj[row] = u[(0, j)].conj();
    }
    let coeff = overlap
        .full_piv_lu()
        .solve(&proj)
        .ok_or_else(|| Error::IllConditioned {
            delta: params.delta,
            detail: "null-space projection is singular".into(),
        })?;
    let mut candidate = DVector::<Complex64>::zeros(d2);
    for (row, &i) in null_idx.iter().enumerate() {
        candidate += v.column(i) * coeff[row];
    }
    let trace: Complex64 = (0..d).map(|n| candidate[n * d + n]).sum();
    if trace.norm() < 0.1 {
        return Err(Error::IllConditioned {
            delta: params.delta,
            detail: format!("projected steady state has trace {trace}"),
        });
    }
    candidate /= trace;

    let (rho, residual) = finish_candidate(&sup, &candidate, d);
    if !residual.is_finite() || residual > RESIDUAL_TOL * rate_scale {
        return Err(Error::IllConditioned {
            delta: params.delta,
            detail: format!(
                "residual {residual:.3e} exceeds {:.1e} * rate scale {rate_scale:.3e}",
                RESIDUAL_TOL
            ),
        });
    }
    Ok(DensityMatrix { mat: rho, residual })
}

/// Hermitize a vectorized candidate and measure its Liouvillian residual.
fn finish_candidate(
    sup: &DMatrix<Complex64>,
    solved: &DVector<Complex64>,
    d: usize,
) -> (DMatrix<Complex64>, f64) {
    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            rho[(i, j)] = solved[j * d + i];
        }
    }
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let mut vec_rho = DVector::<Complex64>::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            vec_rho[j * d + i] = rho[(i, j)];
        }
    }
    let residual = (sup * &vec_rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (rho, residual)
}

/// Output-field amplitude, phase, and photon number for a steady state.
///
/// The phase is arg⟨a_out⟩ − arg⟨a_in⟩ wrapped to (−π, π]; a vanishing
/// output amplitude (|⟨a_out⟩| < 10⁻¹²) is reported as an error rather than
/// a silent zero.
pub fn output_field(rho: &DensityMatrix, params: &SystemParams) -> Result<SpectrumPoint> {
    let space_dim = rho.dim();
    let space = HilbertSpace::new(space_dim / 3 - 1)?;
    let a = space.annihilation();
    let a_mean = rho.expectation(&a);
    let n_intra = rho.expectation(&(a.adjoint() * &a)).re;

    let a_in = params.input_amplitude();
    let a_out = Complex64::new((2.0 * params.kappa_a).sqrt(), 0.0) * a_mean - a_in;
    if a_out.norm() < 1e-12 {
        return Err(Error::PhaseUndefined {
            magnitude: a_out.norm(),
        });
    }
    Ok(SpectrumPoint {
        delta: params.delta,
        phase: wrap_phase(a_out.arg() - a_in.arg()),
        n_intra,
        a_out_mean: a_out,
        residual: rho.residual,
    })
}

/// Solve at one detuning and extract the output field.
pub fn spectrum_point(params: &SystemParams, space: &HilbertSpace, delta: f64) -> Result<SpectrumPoint> {
    let p = params.with_delta(delta);
    let rho = solve_steady_state(&p, space)?;
    output_field(&rho, &p)
}

/// Reflected-field spectrum over a detuning grid.
///
/// Grid points are independent and evaluated in parallel; the assembled
/// output order follows the input grid.
pub fn phase_spectrum(
    params: &SystemParams,
    space: &HilbertSpace,
    delta_grid: &[f64],
) -> Result<Vec<SpectrumPoint>> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidParam {
            name: "delta_grid",
            reason: "must be nonempty".into(),
        });
    }
    if delta_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParam {
            name: "delta_grid",
            reason: "must be sorted ascending".into(),
        });
    }
    delta_grid
        .par_iter()
        .map(|&delta| spectrum_point(params, space, delta))
        .collect()
}

/// Paired spectra (control on / control off) on an identical grid, with the
/// pointwise phase difference Φ(Δ) = φ(off) − φ(on).
pub fn phase_spectrum_paired(
    params: &SystemParams,
    space: &HilbertSpace,
    delta_grid: &[f64],
) -> Result<PairedSpectrum> {
    let on = phase_spectrum(params, space, delta_grid)?;
    let off = phase_spectrum(&params.with_omega_c(0.0), space, delta_grid)?;
    let phase_diff = off
        .iter()
        .zip(&on)
        .map(|(o, n)| wrap_phase(o.phase - n.phase))
        .collect();
    Ok(PairedSpectrum {
        on,
        off,
        phase_diff,
    })
}

/// Largest change in (⟨a⟩, ⟨a†a⟩) when the Fock truncation grows by one.
///
/// Used to certify that a truncation is converged: the weak-drive default
/// should give a change well below 10⁻⁶.
pub fn truncation_change(params: &SystemParams, space: &HilbertSpace) -> Result<f64> {
    let bigger = HilbertSpace::new(space.n_fock + 1)?;
    let (small, large) = (
        spectrum_observables(params, space)?,
        spectrum_observables(params, &bigger)?,
    );
    Ok((small.0 - large.0).norm().max((small.1 - large.1).abs()))
}

fn spectrum_observables(params: &SystemParams, space: &HilbertSpace) -> Result<(Complex64, f64)> {
    let rho = solve_steady_state(params, space)?;
    let a = space.annihilation();
    Ok((
        rho.expectation(&a),
        rho.expectation(&(a.adjoint() * &a)).re,
    ))
}
