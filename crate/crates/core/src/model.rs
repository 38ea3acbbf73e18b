//! Physical parameters, the effective and lab-frame Hamiltonians, the Fourier
//! reduction of the drive, and the collapse operators of the dissipator.
//!
//! Everything is expressed in units of the cavity frequency `ω = 1`, with both
//! qubits exactly on resonance. The coupling is split by the shape parameter
//! `θ ∈ [0, 1]` between the excitation-conserving channel
//! `V₁ = Σ_j (σ_{j,+} a + σ_{j,-} a†)` with weight `θ` and the counterrotating
//! channel `V₂ = Σ_j (σ_{j,+} a† + σ_{j,-} a)` with weight `1 − θ`.

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpec, Operator, OperatorSet};
use crate::scalar::{cast, re, Real, C};

/// Physical parameters of the driven qubits-cavity system.
///
/// All rates and couplings are dimensionless multiples of the cavity
/// frequency; time is in units of `1/ω`. The cavity and qubit frequencies are
/// hard-wired to resonance (`ε_j = ω = 1`), matching the regime in which the
/// effective model is derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T: Real> {
    /// Coupling amplitude `g`.
    pub g: T,
    /// Drive-shape parameter `θ ∈ [0, 1]` splitting the coupling between the
    /// excitation-conserving (`θ`) and counterrotating (`1 − θ`) channels.
    pub theta: T,
    /// Cavity decay rate `κ`.
    pub kappa: T,
    /// Relaxation rate `γ` of each qubit.
    pub gamma: T,
    /// Pure dephasing rate `γφ` of each qubit.
    pub gamma_phi: T,
    /// Fock truncation of the cavity mode (a convergence parameter).
    pub n_max: usize,
}

impl<T: Real> SystemParams<T> {
    pub fn new(g: T, theta: T, kappa: T, gamma: T, gamma_phi: T, n_max: usize) -> Result<Self> {
        let params = SystemParams {
            g,
            theta,
            kappa,
            gamma,
            gamma_phi,
            n_max,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta < T::zero() || self.theta > T::one() {
            return Err(Error::invalid_argument(format!(
                "theta must lie in [0, 1], got {:e}",
                self.theta
            )));
        }
        for (name, v) in [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
        ] {
            if v < T::zero() {
                return Err(Error::invalid_argument(format!(
                    "{name} must be non-negative, got {v:e}"
                )));
            }
        }
        HilbertSpec::new(self.n_max).map(|_| ())
    }

    /// Cavity/qubit frequency (the unit of every rate; always 1).
    pub fn omega(&self) -> T {
        T::one()
    }

    /// The Hilbert space implied by `n_max`.
    pub fn space(&self) -> HilbertSpec {
        HilbertSpec::new(self.n_max).expect("validated n_max")
    }

    /// Whether every dissipation channel is off.
    pub fn is_closed(&self) -> bool {
        self.kappa == T::zero() && self.gamma == T::zero() && self.gamma_phi == T::zero()
    }

    pub fn with_theta(mut self, theta: T) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_kappa(mut self, kappa: T) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_gamma_phi(mut self, gamma_phi: T) -> Self {
        self.gamma_phi = gamma_phi;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }
}

/// The two Fourier components of the drive that govern the effective model:
/// the mean `p = ⟨G⟩` and the second harmonic `q = ⟨G e^{−2iωt}⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveWaveform<T: Real> {
    /// Time average `p` over one period (feeds the excitation-conserving channel).
    pub mean: T,
    /// Second-harmonic component `q` (feeds the counterrotating channel).
    pub second_harmonic: T,
}

/// The canonical modulation waveform `G(t) = gθ + 2g(1−θ)·cos(2ωt)`.
///
/// This is the minimal two-harmonic signal with Fourier components
/// `(p, q) = (gθ, g(1−θ))`; any time-reversal-symmetric waveform with the same
/// components produces the same effective dynamics. It is even in `t`.
pub fn drive_value<T: Real>(params: &SystemParams<T>, t: T) -> T {
    let two = cast::<T>(2.0);
    params.g * params.theta
        + two * params.g * (T::one() - params.theta) * (two * params.omega() * t).cos()
}

/// Interaction-picture Hamiltonian at exact resonance:
/// `H_eff = g Σ_j [θ(σ_{j,+}a + σ_{j,-}a†) + (1−θ)(σ_{j,+}a† + σ_{j,-}a)]`.
///
/// There is no free-evolution term; the operator is Hermitian by construction
/// and linear in `θ`.
pub fn effective_hamiltonian<T: Real>(params: &SystemParams<T>, space: HilbertSpec) -> Operator<T> {
    let ops = OperatorSet::build(space);
    effective_hamiltonian_from(params, &ops)
}

/// [`effective_hamiltonian`] reusing an already-built operator set.
pub fn effective_hamiltonian_from<T: Real>(
    params: &SystemParams<T>,
    ops: &OperatorSet<T>,
) -> Operator<T> {
    let g = re(params.g);
    let th = re(params.theta);
    let one_m_th = re(T::one() - params.theta);
    let mut h = Operator::zeros(ops.space);
    for j in 0..2 {
        let rotating =
            &(&ops.sigma_plus[j] * &ops.annihilation) + &(&ops.sigma_minus[j] * &ops.creation);
        let counter =
            &(&ops.sigma_plus[j] * &ops.creation) + &(&ops.sigma_minus[j] * &ops.annihilation);
        h = &h + &(&rotating.scaled(g * th) + &counter.scaled(g * one_m_th));
    }
    h
}

/// Lab-frame Hamiltonian at time `t`:
/// `H(t) = ω a†a + Σ_j ω σ_{j,+}σ_{j,-} + G(t) Σ_j (σ_{j,+}+σ_{j,-})(a†+a)`
/// with the canonical waveform `G(t)`.
pub fn lab_hamiltonian<T: Real>(params: &SystemParams<T>, space: HilbertSpec, t: T) -> Operator<T> {
    let (h0, v) = lab_hamiltonian_parts(params, space);
    &h0 + &v.scaled(re(drive_value(params, t)))
}

/// The static part `H₀ = ω a†a + Σ_j ω σ_{j,+}σ_{j,-}` and the drive operator
/// `V = Σ_j (σ_{j,+}+σ_{j,-})(a†+a)`, so that `H(t) = H₀ + G(t)·V`.
pub fn lab_hamiltonian_parts<T: Real>(
    params: &SystemParams<T>,
    space: HilbertSpec,
) -> (Operator<T>, Operator<T>) {
    let ops = OperatorSet::build(space);
    let omega = re(params.omega());
    let mut h0 = ops.number.scaled(omega);
    let mut v = Operator::zeros(space);
    for j in 0..2 {
        h0 = &h0 + &(&ops.sigma_plus[j] * &ops.sigma_minus[j]).scaled(omega);
        let sx = &ops.sigma_plus[j] + &ops.sigma_minus[j];
        let x = &ops.creation + &ops.annihilation;
        v = &v + &(&sx * &x);
    }
    (h0, v)
}

/// Extract the governing Fourier components `(p, q)` from a drive waveform
/// sampled on a uniform grid covering exactly one period `π/ω`.
///
/// The samples are interpreted as covering `[t₀, t₀ + π/ω)`; a closing sample
/// at `t₀ + π/ω` duplicating the first point is accepted and dropped. For a
/// time-reversal-symmetric waveform the second harmonic is real; its imaginary
/// residue must stay below 1e-9 of the drive scale and the real part is
/// reported.
pub fn fourier_components<T: Real>(times: &[T], values: &[T]) -> Result<DriveWaveform<T>> {
    if times.len() != values.len() {
        return Err(Error::invalid_argument(format!(
            "times ({}) and values ({}) length mismatch",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 2 {
        return Err(Error::invalid_argument(
            "need at least two samples over the period".to_string(),
        ));
    }
    let period = T::pi(); // π/ω with ω = 1
    let step = times[1] - times[0];
    if step <= T::zero() {
        return Err(Error::invalid_argument(
            "times must be increasing".to_string(),
        ));
    }
    let uniform_tol = cast::<T>(1e-9) * period;
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        if (dt - step).abs() > uniform_tol {
            return Err(Error::invalid_argument(format!(
                "non-uniform grid: spacing {dt:e} vs {step:e} at sample {k}"
            )));
        }
    }
    // Accept either n samples over [0, P) or n+1 samples closing the period.
    let span = times[times.len() - 1] - times[0];
    let (count, closes) = if (span + step - period).abs() <= uniform_tol {
        (times.len(), false)
    } else if (span - period).abs() <= uniform_tol {
        (times.len() - 1, true)
    } else {
        return Err(Error::invalid_argument(format!(
            "samples span {span:e}, expected one period {period:e}"
        )));
    };
    let scale = values
        .iter()
        .map(|v| v.abs())
        .fold(T::one(), |a, b| if b > a { b } else { a });
    if closes {
        let wrap = (values[count] - values[0]).abs();
        if wrap > cast::<T>(1e-9) * scale {
            return Err(Error::invalid_argument(
                "closing sample does not match the first (waveform not periodic)".to_string(),
            ));
        }
    }

    let n = cast::<T>(count as f64);
    let two = cast::<T>(2.0);
    let mut p = T::zero();
    let mut q = C::new(T::zero(), T::zero());
    for k in 0..count {
        p += values[k];
        let phase = -two * times[k];
        q += re(values[k]) * C::new(phase.cos(), phase.sin());
    }
    p /= n;
    q /= re(n);

    if q.im.abs() > cast::<T>(1e-9) * scale {
        log::warn!(
            "drive second harmonic has imaginary residue {:e}; waveform not time-symmetric?",
            q.im
        );
    }
    Ok(DriveWaveform {
        mean: p,
        second_harmonic: q.re,
    })
}

/// One Lindblad channel: rate and jump operator.
#[derive(Clone, Debug)]
pub struct CollapseChannel<T: Real> {
    pub rate: T,
    pub operator: Operator<T>,
    pub label: &'static str,
}

/// The collapse operators reproducing the dissipator
/// `Γ[ρ] = κ 𝔇[a]ρ + Σ_j (γ 𝔇[σ_{j,-}]ρ + γφ(σ_{j,z} ρ σ_{j,z} − ρ))`
/// with `𝔇[L]ρ = LρL† − ½{L†L, ρ}`.
///
/// Since `σ_z² = 1`, the dephasing term is itself of the standard form with
/// `L = σ_z` and rate exactly `γφ`: `γφ(σ_z ρ σ_z − ½{1, ρ})`. A single-qubit
/// coherence then decays as `e^{−2γφ t}`, which pins the normalization.
/// Channels with zero rate are omitted.
pub fn collapse_operators<T: Real>(
    params: &SystemParams<T>,
    space: HilbertSpec,
) -> Vec<CollapseChannel<T>> {
    let ops = OperatorSet::build(space);
    collapse_operators_from(params, &ops)
}

/// [`collapse_operators`] reusing an already-built operator set.
pub fn collapse_operators_from<T: Real>(
    params: &SystemParams<T>,
    ops: &OperatorSet<T>,
) -> Vec<CollapseChannel<T>> {
    let mut channels = Vec::new();
    if params.kappa > T::zero() {
        channels.push(CollapseChannel {
            rate: params.kappa,
            operator: ops.annihilation.clone(),
            label: "cavity decay",
        });
    }
    if params.gamma > T::zero() {
        for j in 0..2 {
            channels.push(CollapseChannel {
                rate: params.gamma,
                operator: ops.sigma_minus[j].clone(),
                label: if j == 0 {
                    "qubit 1 relaxation"
                } else {
                    "qubit 2 relaxation"
                },
            });
        }
    }
    if params.gamma_phi > T::zero() {
        for j in 0..2 {
            channels.push(CollapseChannel {
                rate: params.gamma_phi,
                operator: ops.sigma_z[j].clone(),
                label: if j == 0 {
                    "qubit 1 dephasing"
                } else {
                    "qubit 2 dephasing"
                },
            });
        }
    }
    channels
}

/// Total-excitation parity operator `(−1)^{N_exc}` with
/// `N_exc = a†a + Σ_j σ_{j,+}σ_{j,-}`; the effective Hamiltonian commutes with
/// it for every `θ`.
pub fn excitation_parity<T: Real>(space: HilbertSpec) -> Operator<T> {
    let dim = space.dim();
    let mut m = crate::scalar::CMatrix::<T>::zeros(dim, dim);
    for idx in 0..dim {
        let (q1, q2, n) = space.decode(idx);
        let exc = n
            + usize::from(q1 == crate::hilbert::Spin::Up)
            + usize::from(q2 == crate::hilbert::Spin::Up);
        let sign = if exc % 2 == 0 { T::one() } else { -T::one() };
        m[(idx, idx)] = re(sign);
    }
    Operator::new(space, m).expect("square matrix of matching dimension")
}
