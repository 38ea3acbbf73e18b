//! Entanglement and correlation metrics: concurrence, conditional concurrence,
//! von Neumann entropy, quantum mutual information, and basic observables.
//!
//! Conventions: natural logarithm throughout (entropies and mutual information
//! in nats); two-qubit matrices live in the basis (↑↑, ↑↓, ↓↑, ↓↓).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hilbert::{
    partial_trace, photon_block, DensityMatrix, HilbertSpec, Subsystem, QUBIT_SECTOR_DIM,
};
use crate::linalg;
use crate::scalar::{cast, modulus, re, CMatrix, CVector, Real, C};

/// Eigenvalues below this floor are treated as exact zeros in entropies.
const ENTROPY_EIGENVALUE_FLOOR: f64 = 1e-12;
/// Warn when the Wootters eigenvalues carry more imaginary residue than this.
const CONCURRENCE_IMAG_WARN: f64 = 1e-8;

/// A two-qubit state: either a reduced density matrix (unit trace) or a raw
/// fixed-photon-number block (trace = probability of that photon number).
#[derive(Clone, Debug)]
pub struct QubitPairState<T: Real> {
    matrix: CMatrix<T>,
    normalized: bool,
}

impl<T: Real> QubitPairState<T> {
    /// Wrap a 4×4 matrix. `normalized` asserts unit trace.
    pub fn new(matrix: CMatrix<T>, normalized: bool) -> Result<Self> {
        if matrix.nrows() != QUBIT_SECTOR_DIM || matrix.ncols() != QUBIT_SECTOR_DIM {
            return Err(Error::invalid_argument(format!(
                "two-qubit state must be 4x4, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > cast(1e-10) {
            return Err(Error::InvalidState(format!(
                "two-qubit state hermiticity error {herm:e} exceeds 1e-10"
            )));
        }
        if normalized {
            let tr: C<T> = (0..4).map(|k| matrix[(k, k)]).sum();
            let err = modulus(tr - re(T::one()));
            if err > cast(1e-8) {
                return Err(Error::InvalidState(format!(
                    "normalized two-qubit state trace error {err:e} exceeds 1e-8"
                )));
            }
        }
        Ok(QubitPairState { matrix, normalized })
    }

    /// Reduced two-qubit state of a composite state (photons traced out).
    pub fn from_composite(rho: &DensityMatrix<T>) -> Self {
        QubitPairState {
            matrix: partial_trace(rho, Subsystem::Qubits),
            normalized: true,
        }
    }

    /// Fixed-photon-number block, optionally renormalized to unit trace.
    ///
    /// If the block trace is numerically zero the raw (zero) block is returned
    /// even when renormalization was requested.
    pub fn from_photon_block(rho: &DensityMatrix<T>, i: usize, renormalize: bool) -> Result<Self> {
        let mut block = photon_block(rho, i)?;
        let mut normalized = false;
        if renormalize {
            let tr: T = (0..4).map(|k| block[(k, k)].re).fold(T::zero(), |a, b| a + b);
            if tr > cast(1e-14) {
                block /= re(tr);
                normalized = true;
            }
        }
        Ok(QubitPairState {
            matrix: block,
            normalized,
        })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// The spin-flip matrix `σ_y ⊗ σ_y` in the basis (↑↑, ↑↓, ↓↑, ↓↓): the real
/// anti-diagonal matrix `antidiag(−1, 1, 1, −1)`.
fn spin_flip<T: Real>() -> CMatrix<T> {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 3)] = re(-T::one());
    m[(1, 2)] = re(T::one());
    m[(2, 1)] = re(T::one());
    m[(3, 0)] = re(-T::one());
    m
}

/// Eigenvalue moduli of the Wootters product, `√λ_i` sorted descending.
///
/// The λ_i are the eigenvalues of `R = ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`; they are
/// mathematically real and non-negative, so real parts are taken and negatives
/// clamped before the square root. If the Schur iteration fails to converge
/// (possible on defective near-nilpotent R) the equivalent Hermitian form
/// `√ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y) √ρ` is diagonalized instead.
fn wootters_roots<T: Real>(rho: &CMatrix<T>) -> [T; 4] {
    let sigma = spin_flip::<T>();
    let r = rho * &sigma * rho.conjugate() * &sigma;
    let scale = r.iter().map(|z| modulus(*z)).fold(T::zero(), |a, b| if b > a { b } else { a });
    let mut lambdas: Option<[T; 4]> = None;
    if scale == T::zero() {
        lambdas = Some([T::zero(); 4]);
    } else {
        let scaled = &r / re(scale);
        let eps = T::default_epsilon() * cast::<T>(64.0);
        if let Some(schur) = scaled.try_schur(eps, 4000) {
            if let Some(eigs) = schur.eigenvalues() {
                let mut vals = [T::zero(); 4];
                let mut worst_im = T::zero();
                for (k, e) in eigs.iter().enumerate() {
                    if e.im.abs() > worst_im {
                        worst_im = e.im.abs();
                    }
                    vals[k] = e.re * scale;
                }
                if worst_im > cast(CONCURRENCE_IMAG_WARN) {
                    log::warn!(
                        "Wootters eigenvalues carry imaginary residue {:e}",
                        worst_im * scale
                    );
                }
                lambdas = Some(vals);
            }
        }
    }
    let mut lambdas = lambdas.unwrap_or_else(|| {
        // Hermitian fallback: λ_i(ρ ρ̃) = eig(√ρ ρ̃ √ρ) with ρ̃ = σ ρ* σ
        let eig = rho.clone().symmetric_eigen();
        let mut sqrt_rho = CMatrix::<T>::zeros(4, 4);
        for k in 0..4 {
            let lam = if eig.eigenvalues[k] > T::zero() {
                eig.eigenvalues[k].sqrt()
            } else {
                T::zero()
            };
            let v = eig.eigenvectors.column(k);
            for a in 0..4 {
                for b in 0..4 {
                    sqrt_rho[(a, b)] += v[a] * v[b].conj() * re(lam);
                }
            }
        }
        let tilde = &sigma * rho.conjugate() * &sigma;
        let prod = &sqrt_rho * tilde * &sqrt_rho;
        let hermitian_eigs = prod.symmetric_eigen().eigenvalues;
        let mut vals = [T::zero(); 4];
        for k in 0..4 {
            vals[k] = hermitian_eigs[k];
        }
        vals
    });
    for v in lambdas.iter_mut() {
        *v = if *v > T::zero() { v.sqrt() } else { T::zero() };
    }
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    lambdas
}

/// Wootters concurrence `max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄)`.
///
/// On a normalized state the result lies in [0, 1]; on a raw photon-number
/// block it scales linearly with the block trace.
pub fn concurrence<T: Real>(state: &QubitPairState<T>) -> T {
    let s = wootters_roots(&state.matrix);
    let c = s[0] - s[1] - s[2] - s[3];
    if c > T::zero() {
        c
    } else {
        T::zero()
    }
}

/// Concurrence of the qubit block at fixed photon number `i`.
///
/// With `normalize = false` (the default convention here) the formula is
/// applied to the raw block, so the value carries the photon-number
/// probability as a linear factor; `normalize = true` divides it out first.
pub fn conditional_concurrence<T: Real>(
    rho: &DensityMatrix<T>,
    i: usize,
    normalize: bool,
) -> Result<T> {
    let block = QubitPairState::from_photon_block(rho, i, normalize)?;
    Ok(concurrence(&block))
}

/// Von Neumann entropy `S = −Tr ρ ln ρ` (natural log) of a density matrix of
/// any dimension.
///
/// Eigenvalues below 1e-12 are treated as exact zeros. The trace must be
/// within 1e-6 of unity.
pub fn von_neumann_entropy<T: Real>(rho: &CMatrix<T>) -> Result<T> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::invalid_argument("entropy of a non-square matrix".to_string()));
    }
    let tr: C<T> = (0..rho.nrows()).map(|k| rho[(k, k)]).sum();
    let tr_err = modulus(tr - re(T::one()));
    if tr_err > cast(1e-6) {
        return Err(Error::invalid_argument(format!(
            "entropy input trace deviates from 1 by {tr_err:e} (> 1e-6)"
        )));
    }
    let herm = linalg::hermiticity_error(rho);
    if herm > cast(1e-8) {
        return Err(Error::invalid_argument(format!(
            "entropy input hermiticity error {herm:e} (> 1e-8)"
        )));
    }
    let eigs = rho.clone().symmetric_eigen().eigenvalues;
    let floor = cast::<T>(ENTROPY_EIGENVALUE_FLOOR);
    let mut s = T::zero();
    for lam in eigs.iter() {
        if *lam > floor {
            s -= *lam * lam.ln();
        }
    }
    Ok(if s > T::zero() { s } else { T::zero() })
}

/// Quantum mutual information `I = S₁ + S₂ − S₁₂` between the two qubits,
/// with the photon mode traced out first. Reported in nats; clamped at 0.
pub fn mutual_information<T: Real>(rho: &DensityMatrix<T>) -> T {
    let qq = partial_trace(rho, Subsystem::Qubits);
    mutual_information_of_pair(&qq)
}

/// [`mutual_information`] on an already-reduced two-qubit matrix.
pub fn mutual_information_of_pair<T: Real>(qq: &CMatrix<T>) -> T {
    let mut q1 = CMatrix::<T>::zeros(2, 2);
    let mut q2 = CMatrix::<T>::zeros(2, 2);
    for s in 0..2 {
        for sp in 0..2 {
            for o in 0..2 {
                q1[(s, sp)] += qq[(2 * s + o, 2 * sp + o)];
                q2[(s, sp)] += qq[(2 * o + s, 2 * o + sp)];
            }
        }
    }
    let s12 = von_neumann_entropy(qq).unwrap_or(T::zero());
    let s1 = von_neumann_entropy(&q1).unwrap_or(T::zero());
    let s2 = von_neumann_entropy(&q2).unwrap_or(T::zero());
    let info = s1 + s2 - s12;
    if info < T::zero() {
        if info < -cast::<T>(1e-9) {
            log::warn!("mutual information {info:e} below the -1e-9 clamp window");
        }
        T::zero()
    } else {
        info
    }
}

/// Basic single-shot observables of a composite state.
#[derive(Clone, Copy, Debug)]
pub struct Observables<T: Real> {
    /// Mean photon number `Tr(a†a ρ)`.
    pub n_ph: T,
    /// Excited-state population of each qubit, `Tr(σ_{j,+}σ_{j,-} ρ)`.
    pub p_excited: [T; 2],
    /// Populations of the qubit basis states (↑↑, ↑↓, ↓↑, ↓↓).
    pub populations: [T; 4],
}

/// Compute [`Observables`] from diagonal marginals (no operator products).
pub fn observables<T: Real>(rho: &DensityMatrix<T>) -> Observables<T> {
    let space = rho.space();
    let m = rho.matrix();
    let mut n_ph = T::zero();
    let mut populations = [T::zero(); 4];
    for n in 0..space.fock_levels() {
        for q in 0..QUBIT_SECTOR_DIM {
            let p = m[(4 * n + q, 4 * n + q)].re;
            n_ph += cast::<T>(n as f64) * p;
            populations[q] += p;
        }
    }
    Observables {
        n_ph,
        p_excited: [
            populations[0] + populations[1],
            populations[0] + populations[2],
        ],
        populations,
    }
}

/// Named scalar channels derivable from a state; used by trajectories, sweeps,
/// and the CSV layer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum MetricKind {
    /// Wootters concurrence of the reduced two-qubit state.
    Concurrence,
    /// Concurrence of the raw qubit block at fixed photon number.
    ConditionalConcurrence(usize),
    /// Quantum mutual information between the qubits (nats).
    MutualInformation,
    /// Mean photon number.
    PhotonNumber,
    /// Excited-state population of qubit 1.
    ExcitedPopulationQ1,
    /// Excited-state population of qubit 2.
    ExcitedPopulationQ2,
    PopulationUpUp,
    PopulationUpDown,
    PopulationDownUp,
    PopulationDownDown,
    /// `Tr ρ²` of the composite state.
    Purity,
    /// Von Neumann entropy of the reduced two-qubit state (nats).
    QubitEntropy,
}

impl MetricKind {
    /// All channels that need no photon-number argument.
    pub const BASIC: [MetricKind; 11] = [
        MetricKind::Concurrence,
        MetricKind::MutualInformation,
        MetricKind::PhotonNumber,
        MetricKind::ExcitedPopulationQ1,
        MetricKind::ExcitedPopulationQ2,
        MetricKind::PopulationUpUp,
        MetricKind::PopulationUpDown,
        MetricKind::PopulationDownUp,
        MetricKind::PopulationDownDown,
        MetricKind::Purity,
        MetricKind::QubitEntropy,
    ];

    pub fn name(&self) -> String {
        match self {
            MetricKind::Concurrence => "concurrence".to_string(),
            MetricKind::ConditionalConcurrence(i) => format!("cond-concurrence-{i}"),
            MetricKind::MutualInformation => "mutual-information".to_string(),
            MetricKind::PhotonNumber => "n-ph".to_string(),
            MetricKind::ExcitedPopulationQ1 => "p-exc-q1".to_string(),
            MetricKind::ExcitedPopulationQ2 => "p-exc-q2".to_string(),
            MetricKind::PopulationUpUp => "pop-uu".to_string(),
            MetricKind::PopulationUpDown => "pop-ud".to_string(),
            MetricKind::PopulationDownUp => "pop-du".to_string(),
            MetricKind::PopulationDownDown => "pop-dd".to_string(),
            MetricKind::Purity => "purity".to_string(),
            MetricKind::QubitEntropy => "entropy-qq".to_string(),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("cond-concurrence-") {
            let i: usize = rest.parse().map_err(|_| {
                Error::invalid_argument(format!("bad photon index in metric '{s}'"))
            })?;
            return Ok(MetricKind::ConditionalConcurrence(i));
        }
        match s {
            "concurrence" | "C" => Ok(MetricKind::Concurrence),
            "mutual-information" | "I" => Ok(MetricKind::MutualInformation),
            "n-ph" => Ok(MetricKind::PhotonNumber),
            "p-exc-q1" => Ok(MetricKind::ExcitedPopulationQ1),
            "p-exc-q2" => Ok(MetricKind::ExcitedPopulationQ2),
            "pop-uu" => Ok(MetricKind::PopulationUpUp),
            "pop-ud" => Ok(MetricKind::PopulationUpDown),
            "pop-du" => Ok(MetricKind::PopulationDownUp),
            "pop-dd" => Ok(MetricKind::PopulationDownDown),
            "purity" => Ok(MetricKind::Purity),
            "entropy-qq" => Ok(MetricKind::QubitEntropy),
            other => Err(Error::invalid_argument(format!("unknown metric '{other}'"))),
        }
    }
}

/// A state observed mid-computation: either a full density matrix or a pure
/// ket (closed-system fast path), evaluated without forming `|ψ⟩⟨ψ|`.
#[derive(Clone, Copy)]
pub enum StateRef<'a, T: Real> {
    Density(&'a DensityMatrix<T>),
    Pure {
        psi: &'a CVector<T>,
        space: HilbertSpec,
    },
}

impl<'a, T: Real> StateRef<'a, T> {
    fn qubit_pair(&self) -> CMatrix<T> {
        match self {
            StateRef::Density(rho) => partial_trace(rho, Subsystem::Qubits),
            StateRef::Pure { psi, space } => {
                let mut qq = CMatrix::<T>::zeros(4, 4);
                for n in 0..space.fock_levels() {
                    for a in 0..QUBIT_SECTOR_DIM {
                        for b in 0..QUBIT_SECTOR_DIM {
                            qq[(a, b)] += psi[4 * n + a] * psi[4 * n + b].conj();
                        }
                    }
                }
                qq
            }
        }
    }

    fn photon_block_raw(&self, i: usize) -> CMatrix<T> {
        match self {
            StateRef::Density(rho) => photon_block(rho, i).unwrap_or_else(|_| CMatrix::zeros(4, 4)),
            StateRef::Pure { psi, space } => {
                let mut block = CMatrix::<T>::zeros(4, 4);
                if i < space.fock_levels() {
                    for a in 0..QUBIT_SECTOR_DIM {
                        for b in 0..QUBIT_SECTOR_DIM {
                            block[(a, b)] = psi[4 * i + a] * psi[4 * i + b].conj();
                        }
                    }
                }
                block
            }
        }
    }

    fn observables(&self) -> Observables<T> {
        match self {
            StateRef::Density(rho) => observables(rho),
            StateRef::Pure { psi, space } => {
                let mut n_ph = T::zero();
                let mut populations = [T::zero(); 4];
                for n in 0..space.fock_levels() {
                    for q in 0..QUBIT_SECTOR_DIM {
                        let p = psi[4 * n + q].norm_sqr();
                        n_ph += cast::<T>(n as f64) * p;
                        populations[q] += p;
                    }
                }
                Observables {
                    n_ph,
                    p_excited: [
                        populations[0] + populations[1],
                        populations[0] + populations[2],
                    ],
                    populations,
                }
            }
        }
    }

    fn purity(&self) -> T {
        match self {
            StateRef::Density(rho) => rho.purity(),
            StateRef::Pure { .. } => T::one(),
        }
    }
}

/// Evaluate the requested channels, sharing intermediate reductions.
pub fn evaluate_metrics<T: Real>(state: StateRef<'_, T>, kinds: &[MetricKind]) -> Vec<T> {
    let needs_pair = kinds.iter().any(|k| {
        matches!(
            k,
            MetricKind::Concurrence | MetricKind::MutualInformation | MetricKind::QubitEntropy
        )
    });
    let needs_obs = kinds.iter().any(|k| {
        matches!(
            k,
            MetricKind::PhotonNumber
                | MetricKind::ExcitedPopulationQ1
                | MetricKind::ExcitedPopulationQ2
                | MetricKind::PopulationUpUp
                | MetricKind::PopulationUpDown
                | MetricKind::PopulationDownUp
                | MetricKind::PopulationDownDown
        )
    });
    let pair = needs_pair.then(|| state.qubit_pair());
    let obs = needs_obs.then(|| state.observables());

    kinds
        .iter()
        .map(|kind| match kind {
            MetricKind::Concurrence => {
                let qq = pair.as_ref().expect("pair computed");
                concurrence(&QubitPairState {
                    matrix: qq.clone(),
                    normalized: true,
                })
            }
            MetricKind::ConditionalConcurrence(i) => {
                let block = state.photon_block_raw(*i);
                concurrence(&QubitPairState {
                    matrix: block,
                    normalized: false,
                })
            }
            MetricKind::MutualInformation => {
                mutual_information_of_pair(pair.as_ref().expect("pair computed"))
            }
            MetricKind::QubitEntropy => {
                von_neumann_entropy(pair.as_ref().expect("pair computed")).unwrap_or(T::zero())
            }
            MetricKind::PhotonNumber => obs.as_ref().expect("obs computed").n_ph,
            MetricKind::ExcitedPopulationQ1 => obs.as_ref().expect("obs computed").p_excited[0],
            MetricKind::ExcitedPopulationQ2 => obs.as_ref().expect("obs computed").p_excited[1],
            MetricKind::PopulationUpUp => obs.as_ref().expect("obs computed").populations[0],
            MetricKind::PopulationUpDown => obs.as_ref().expect("obs computed").populations[1],
            MetricKind::PopulationDownUp => obs.as_ref().expect("obs computed").populations[2],
            MetricKind::PopulationDownDown => obs.as_ref().expect("obs computed").populations[3],
            MetricKind::Purity => state.purity(),
        })
        .collect()
}
