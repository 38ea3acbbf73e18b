//! The composite Hilbert space of two qubits and one truncated bosonic mode,
//! embedded operators, partial traces, and fixed-photon-number blocks.
//!
//! # Index layout
//!
//! Basis states are `|q₁ q₂, n⟩` with qubit spins `q ∈ {↑, ↓}` and photon
//! number `n ∈ 0..=n_max`. The flat index is
//!
//! ```text
//! index = 4·n + q,    q: 0 = ↑↑, 1 = ↑↓, 2 = ↓↑, 3 = ↓↓
//! ```
//!
//! so the 4×4 qubit sector at fixed photon number `n` is the contiguous block
//! `4n..4n+4`. The truncation is a hard cutoff: `a†|n_max⟩ = 0`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{c, cast, re, CMatrix, CVector, Real, C};

/// Number of qubits in the model (fixed).
pub const QUBIT_COUNT: usize = 2;
/// Dimension of the two-qubit sector.
pub const QUBIT_SECTOR_DIM: usize = 4;

/// Spin state of a single qubit.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn bit(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    fn from_bit(b: usize) -> Spin {
        if b == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

/// Dimensions and index layout of the composite two-qubit ⊗ Fock space.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct HilbertSpec {
    n_max: usize,
}

impl HilbertSpec {
    /// Build the space for a given Fock truncation.
    ///
    /// `n_max` must be at least 1: the counterrotating terms create photon
    /// pairs out of the vacuum, so a space without at least one photon level
    /// has no dynamics at all.
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::invalid_argument(format!(
                "n_max must be >= 1, got {n_max}"
            )));
        }
        Ok(HilbertSpec { n_max })
    }

    /// Maximum Fock occupation.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of retained Fock levels, `n_max + 1`.
    pub fn fock_levels(&self) -> usize {
        self.n_max + 1
    }

    /// Number of qubits (always 2).
    pub fn qubit_count(&self) -> usize {
        QUBIT_COUNT
    }

    /// Total dimension `4·(n_max + 1)`.
    pub fn dim(&self) -> usize {
        QUBIT_SECTOR_DIM * self.fock_levels()
    }

    /// Flat index of `|q₁ q₂, n⟩`.
    pub fn encode(&self, q1: Spin, q2: Spin, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        QUBIT_SECTOR_DIM * n + 2 * q1.bit() + q2.bit()
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(&self, index: usize) -> (Spin, Spin, usize) {
        debug_assert!(index < self.dim());
        let q = index % QUBIT_SECTOR_DIM;
        (
            Spin::from_bit(q / 2),
            Spin::from_bit(q % 2),
            index / QUBIT_SECTOR_DIM,
        )
    }

    /// Basis ket `|q₁ q₂, n⟩` as a state vector.
    pub fn basis_ket<T: Real>(&self, q1: Spin, q2: Spin, n: usize) -> CVector<T> {
        let mut v = CVector::zeros(self.dim());
        v[self.encode(q1, q2, n)] = re(T::one());
        v
    }
}

/// A linear operator on the composite space.
#[derive(Clone, Debug)]
pub struct Operator<T: Real> {
    space: HilbertSpec,
    matrix: CMatrix<T>,
}

impl<T: Real> Operator<T> {
    /// Wrap a matrix, checking that its dimensions match the space.
    pub fn new(space: HilbertSpec, matrix: CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::invalid_argument(format!(
                "operator shape {}x{} does not match space dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                space.dim()
            )));
        }
        Ok(Operator { space, matrix })
    }

    pub fn zeros(space: HilbertSpec) -> Self {
        Operator {
            space,
            matrix: CMatrix::zeros(space.dim(), space.dim()),
        }
    }

    pub fn identity(space: HilbertSpec) -> Self {
        Operator {
            space,
            matrix: CMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn space(&self) -> HilbertSpec {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scaled(&self, factor: C<T>) -> Self {
        Operator {
            space: self.space,
            matrix: &self.matrix * factor,
        }
    }

    /// Max deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> T {
        linalg::hermiticity_error(&self.matrix)
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        Operator {
            space: self.space,
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        }
    }

    pub fn apply(&self, v: &CVector<T>) -> CVector<T> {
        &self.matrix * v
    }
}

impl<T: Real> std::ops::Add for &Operator<T> {
    type Output = Operator<T>;
    fn add(self, rhs: &Operator<T>) -> Operator<T> {
        assert_eq!(self.space, rhs.space);
        Operator {
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<T: Real> std::ops::Sub for &Operator<T> {
    type Output = Operator<T>;
    fn sub(self, rhs: &Operator<T>) -> Operator<T> {
        assert_eq!(self.space, rhs.space);
        Operator {
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl<T: Real> std::ops::Mul for &Operator<T> {
    type Output = Operator<T>;
    fn mul(self, rhs: &Operator<T>) -> Operator<T> {
        assert_eq!(self.space, rhs.space);
        Operator {
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

/// The standard embedded operators on the composite space.
#[derive(Clone, Debug)]
pub struct OperatorSet<T: Real> {
    pub space: HilbertSpec,
    /// Photon annihilation `a`.
    pub annihilation: Operator<T>,
    /// Photon creation `a†` (annihilates `|n_max⟩` under truncation).
    pub creation: Operator<T>,
    /// Photon number `a†a`.
    pub number: Operator<T>,
    /// Qubit raising operators `σ_{j,+}`, `j = 0, 1`.
    pub sigma_plus: [Operator<T>; 2],
    /// Qubit lowering operators `σ_{j,-}`.
    pub sigma_minus: [Operator<T>; 2],
    /// Qubit `σ_{j,z}` (+1 on ↑, −1 on ↓).
    pub sigma_z: [Operator<T>; 2],
}

impl<T: Real> OperatorSet<T> {
    /// Build all embedded operators for `space`.
    pub fn build(space: HilbertSpec) -> Self {
        let dim = space.dim();
        let spins = [Spin::Up, Spin::Down];

        let mut a = CMatrix::<T>::zeros(dim, dim);
        for n in 1..=space.n_max() {
            let amp = re(cast::<T>(n as f64).sqrt());
            for &q1 in &spins {
                for &q2 in &spins {
                    a[(space.encode(q1, q2, n - 1), space.encode(q1, q2, n))] = amp;
                }
            }
        }
        let a = Operator { space, matrix: a };
        let creation = a.adjoint();
        let number = &creation * &a;

        let mut sigma_plus = Vec::with_capacity(2);
        let mut sigma_minus = Vec::with_capacity(2);
        let mut sigma_z = Vec::with_capacity(2);
        for j in 0..QUBIT_COUNT {
            let mut sp = CMatrix::<T>::zeros(dim, dim);
            let mut sz = CMatrix::<T>::zeros(dim, dim);
            for n in 0..space.fock_levels() {
                for &other in &spins {
                    let (up, down) = if j == 0 {
                        (
                            space.encode(Spin::Up, other, n),
                            space.encode(Spin::Down, other, n),
                        )
                    } else {
                        (
                            space.encode(other, Spin::Up, n),
                            space.encode(other, Spin::Down, n),
                        )
                    };
                    sp[(up, down)] = re(T::one());
                    sz[(up, up)] = re(T::one());
                    sz[(down, down)] = -re(T::one());
                }
            }
            let sp = Operator { space, matrix: sp };
            sigma_minus.push(sp.adjoint());
            sigma_plus.push(sp);
            sigma_z.push(Operator { space, matrix: sz });
        }

        OperatorSet {
            space,
            annihilation: a,
            creation,
            number,
            sigma_plus: [sigma_plus.remove(0), sigma_plus.remove(0)],
            sigma_minus: [sigma_minus.remove(0), sigma_minus.remove(0)],
            sigma_z: [sigma_z.remove(0), sigma_z.remove(0)],
        }
    }
}

/// Tolerances used when validating a density matrix.
///
/// Defaults are tuned for `f64`; for `f32` they are far below the working
/// precision and must be relaxed explicitly.
#[derive(Clone, Copy, Debug)]
pub struct ValidationTolerances<T: Real> {
    /// Max allowed `|ρ − ρ†|` entrywise.
    pub hermiticity: T,
    /// Max allowed `|Tr ρ − 1|`.
    pub trace: T,
    /// Eigenvalues must stay above `−positivity`.
    pub positivity: T,
}

impl<T: Real> Default for ValidationTolerances<T> {
    fn default() -> Self {
        ValidationTolerances {
            hermiticity: cast(1e-10),
            trace: cast(1e-8),
            positivity: cast(1e-7),
        }
    }
}

/// A Hermitian, unit-trace, positive-semidefinite matrix on the composite space.
#[derive(Clone, Debug)]
pub struct DensityMatrix<T: Real> {
    space: HilbertSpec,
    matrix: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Wrap a matrix and check the density-matrix invariants with default
    /// tolerances.
    pub fn new(space: HilbertSpec, matrix: CMatrix<T>) -> Result<Self> {
        let dm = DensityMatrix::from_matrix_unchecked(space, matrix);
        dm.validate(&ValidationTolerances::default())?;
        Ok(dm)
    }

    /// Wrap a matrix without validation. The caller is responsible for the
    /// invariants.
    pub fn from_matrix_unchecked(space: HilbertSpec, matrix: CMatrix<T>) -> Self {
        assert_eq!(matrix.nrows(), space.dim());
        assert_eq!(matrix.ncols(), space.dim());
        DensityMatrix { space, matrix }
    }

    /// Pure state `|ψ⟩⟨ψ|` (the ket is normalized first).
    pub fn from_pure(space: HilbertSpec, psi: &CVector<T>) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::invalid_argument(format!(
                "ket length {} does not match space dimension {}",
                psi.len(),
                space.dim()
            )));
        }
        let norm = psi.norm();
        if norm <= T::zero() {
            return Err(Error::invalid_argument("zero ket".to_string()));
        }
        let psi = psi / re(norm);
        let matrix = &psi * psi.adjoint();
        Ok(DensityMatrix { space, matrix })
    }

    /// The joint ground state `|↓↓, 0⟩⟨↓↓, 0|`.
    pub fn ground(space: HilbertSpec) -> Self {
        let ket = space.basis_ket(Spin::Down, Spin::Down, 0);
        DensityMatrix::from_pure(space, &ket).expect("basis ket is a valid state")
    }

    pub fn space(&self) -> HilbertSpec {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn trace(&self) -> C<T> {
        let mut t = C::new(T::zero(), T::zero());
        for i in 0..self.matrix.nrows() {
            t += self.matrix[(i, i)];
        }
        t
    }

    /// `|Tr ρ − 1|`.
    pub fn trace_error(&self) -> T {
        crate::scalar::modulus(self.trace() - re(T::one()))
    }

    /// Max deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> T {
        linalg::hermiticity_error(&self.matrix)
    }

    /// `Tr ρ²` (real for Hermitian input).
    pub fn purity(&self) -> T {
        let mut p = T::zero();
        for j in 0..self.matrix.ncols() {
            for i in 0..self.matrix.nrows() {
                p += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        p
    }

    /// Smallest eigenvalue (dense computation; diagnostics).
    pub fn min_eigenvalue(&self) -> T {
        linalg::hermitian_min_eigenvalue(&self.matrix)
    }

    /// Replace the matrix with its Hermitian part.
    pub fn hermitize(&mut self) {
        linalg::hermitize_in_place(&mut self.matrix);
    }

    /// Check Hermiticity, unit trace, and positive semidefiniteness.
    pub fn validate(&self, tol: &ValidationTolerances<T>) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(Error::InvalidState(format!(
                "hermiticity error {herm:e} exceeds {:e}",
                tol.hermiticity
            )));
        }
        let tr = self.trace_error();
        if tr > tol.trace {
            return Err(Error::InvalidState(format!(
                "trace error {tr:e} exceeds {:e}",
                tol.trace
            )));
        }
        if !linalg::is_psd_within(&self.matrix, tol.positivity) {
            let min = self.min_eigenvalue();
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min:e} below -{:e}",
                tol.positivity
            )));
        }
        Ok(())
    }

    /// Population of the top Fock level, `Σ_q ⟨q, n_max|ρ|q, n_max⟩`.
    pub fn top_fock_population(&self) -> T {
        self.fock_population(self.space.n_max())
    }

    /// Population of Fock level `n`, `Σ_q ⟨q, n|ρ|q, n⟩`.
    pub fn fock_population(&self, n: usize) -> T {
        let mut p = T::zero();
        for q in 0..QUBIT_SECTOR_DIM {
            p += self.matrix[(4 * n + q, 4 * n + q)].re;
        }
        p
    }
}

/// Which subsystem a partial trace keeps.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Subsystem {
    /// Both qubits (4×4 result).
    Qubits,
    /// The photon mode ((n_max+1)² result).
    Photon,
    /// Qubit 1 only (2×2 result).
    Qubit1,
    /// Qubit 2 only (2×2 result).
    Qubit2,
}

/// Reduced density matrix of the selected subsystem.
///
/// Trace and Hermiticity are preserved exactly (up to roundoff in the sums).
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: Subsystem) -> CMatrix<T> {
    partial_trace_matrix(rho.matrix(), rho.space(), keep)
}

/// [`partial_trace`] on a raw matrix (used internally on non-validated input).
pub fn partial_trace_matrix<T: Real>(
    rho: &CMatrix<T>,
    space: HilbertSpec,
    keep: Subsystem,
) -> CMatrix<T> {
    let levels = space.fock_levels();
    match keep {
        Subsystem::Qubits => {
            let mut out = CMatrix::zeros(QUBIT_SECTOR_DIM, QUBIT_SECTOR_DIM);
            for n in 0..levels {
                for b in 0..QUBIT_SECTOR_DIM {
                    for a in 0..QUBIT_SECTOR_DIM {
                        out[(a, b)] += rho[(4 * n + a, 4 * n + b)];
                    }
                }
            }
            out
        }
        Subsystem::Photon => {
            let mut out = CMatrix::zeros(levels, levels);
            for n in 0..levels {
                for m in 0..levels {
                    for q in 0..QUBIT_SECTOR_DIM {
                        out[(m, n)] += rho[(4 * m + q, 4 * n + q)];
                    }
                }
            }
            out
        }
        Subsystem::Qubit1 | Subsystem::Qubit2 => {
            let mut out = CMatrix::zeros(2, 2);
            let spins = [Spin::Up, Spin::Down];
            for n in 0..levels {
                for &other in &spins {
                    for (r, &sr) in spins.iter().enumerate() {
                        for (c_, &sc) in spins.iter().enumerate() {
                            let (row, col) = match keep {
                                Subsystem::Qubit1 => {
                                    (space.encode(sr, other, n), space.encode(sc, other, n))
                                }
                                _ => (space.encode(other, sr, n), space.encode(other, sc, n)),
                            };
                            out[(r, c_)] += rho[(row, col)];
                        }
                    }
                }
            }
            out
        }
    }
}

/// The raw (unnormalized) 4×4 qubit-sector block of `ρ` at photon number `i`.
///
/// The block trace is the probability of finding `i` photons; summed over all
/// `i` the traces add to 1. No renormalization is applied here — the
/// concurrence is degree-1 homogeneous in the block, so normalization rescales
/// conditional concurrences without moving their zeros.
pub fn photon_block<T: Real>(rho: &DensityMatrix<T>, i: usize) -> Result<CMatrix<T>> {
    if i > rho.space().n_max() {
        return Err(Error::invalid_argument(format!(
            "photon number {i} out of range 0..={}",
            rho.space().n_max()
        )));
    }
    Ok(rho
        .matrix()
        .view((4 * i, 4 * i), (QUBIT_SECTOR_DIM, QUBIT_SECTOR_DIM))
        .into_owned())
}

/// Deterministic random density matrix (Ginibre construction), for tests and
/// cross-checks.
pub fn random_density_matrix<T: Real>(space: HilbertSpec, seed: u64) -> DensityMatrix<T> {
    let dim = space.dim();
    let mut state = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let g = CMatrix::<T>::from_fn(dim, dim, |_, _| c(next(), next()));
    let mut m = &g * g.adjoint();
    let tr: T = (0..dim).map(|i| m[(i, i)].re).fold(T::zero(), |a, b| a + b);
    m /= re(tr);
    linalg::hermitize_in_place(&mut m);
    DensityMatrix::from_matrix_unchecked(space, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type Spc = HilbertSpec;

    #[test]
    fn dimensions() {
        assert_eq!(Spc::new(1).unwrap().dim(), 8);
        assert_eq!(Spc::new(20).unwrap().dim(), 84);
        assert!(matches!(Spc::new(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn index_layout_is_a_bijection() {
        let space = Spc::new(7).unwrap();
        let mut seen = vec![false; space.dim()];
        for n in 0..=7 {
            for q1 in [Spin::Up, Spin::Down] {
                for q2 in [Spin::Up, Spin::Down] {
                    let idx = space.encode(q1, q2, n);
                    assert!(!seen[idx]);
                    seen[idx] = true;
                    assert_eq!(space.decode(idx), (q1, q2, n));
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn photon_block_is_contiguous_slice() {
        let space = Spc::new(3).unwrap();
        // layout puts the qubit sector at fixed n in rows 4n..4n+4
        assert_eq!(space.encode(Spin::Up, Spin::Up, 2), 8);
        assert_eq!(space.encode(Spin::Down, Spin::Down, 2), 11);
    }

    #[test]
    fn ladder_matrix_elements() {
        let space = Spc::new(4).unwrap();
        let ops = OperatorSet::<f64>::build(space);
        let ket2 = space.basis_ket::<f64>(Spin::Down, Spin::Down, 2);
        let bra1 = space.basis_ket::<f64>(Spin::Down, Spin::Down, 1);
        let amp = bra1.dotc(&ops.annihilation.apply(&ket2));
        assert_relative_eq!(amp.re, 2.0_f64.sqrt(), max_relative = 1e-15);
        assert_eq!(amp.im, 0.0);
    }

    #[test]
    fn truncated_creation_annihilates_top_level() {
        let space = Spc::new(3).unwrap();
        let ops = OperatorSet::<f64>::build(space);
        let top = space.basis_ket::<f64>(Spin::Up, Spin::Down, 3);
        // a a†|n_max⟩ = 0 under the hard cutoff (not n_max + 1)
        let v = ops
            .annihilation
            .apply(&ops.creation.apply(&top));
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn raising_is_nilpotent() {
        let space = Spc::new(2).unwrap();
        let ops = OperatorSet::<f64>::build(space);
        let sq = &ops.sigma_plus[0] * &ops.sigma_plus[0];
        assert_eq!(crate::scalar::frobenius_norm(sq.matrix()), 0.0);
    }

    #[test]
    fn embedded_operators_commute_across_factors() {
        let space = Spc::new(3).unwrap();
        let ops = OperatorSet::<f64>::build(space);
        let pairs = [
            (&ops.sigma_plus[0], &ops.sigma_minus[1]),
            (&ops.sigma_plus[0], &ops.sigma_plus[1]),
            (&ops.sigma_z[0], &ops.sigma_minus[1]),
            (&ops.sigma_plus[0], &ops.annihilation),
            (&ops.sigma_z[1], &ops.creation),
        ];
        for (a, b) in pairs {
            let comm = a.commutator(b);
            assert_eq!(crate::scalar::frobenius_norm(comm.matrix()), 0.0);
        }
    }

    #[test]
    fn sigma_plus_raises_lower_spin() {
        let space = Spc::new(1).unwrap();
        let ops = OperatorSet::<f64>::build(space);
        let down = space.basis_ket::<f64>(Spin::Down, Spin::Up, 0);
        let raised = ops.sigma_plus[0].apply(&down);
        let expect = space.basis_ket::<f64>(Spin::Up, Spin::Up, 0);
        assert_eq!((raised - expect).norm(), 0.0);
    }

    #[test]
    fn commutator_identity_on_confined_states() {
        // [a, a†] acts as identity on states with negligible top-level weight
        let space = Spc::new(12).unwrap();
        let ops = OperatorSet::<f64>::build(space);
        let comm = ops.annihilation.commutator(&ops.creation);
        let mut psi = CVector::<f64>::zeros(space.dim());
        for n in 0..=4 {
            psi[space.encode(Spin::Down, Spin::Down, n)] = re(0.5_f64.powi(n as i32 + 1));
        }
        psi /= re(psi.norm());
        let diff = comm.apply(&psi) - &psi;
        assert!(diff.norm() < 1e-6);
    }

    #[test]
    fn partial_trace_product_state() {
        let space = Spc::new(2).unwrap();
        let rho = DensityMatrix::<f64>::ground(space);
        let qq = partial_trace(&rho, Subsystem::Qubits);
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a == 3 && b == 3 { 1.0 } else { 0.0 };
                assert_relative_eq!(qq[(a, b)].re, expect, epsilon = 1e-15);
                assert_eq!(qq[(a, b)].im, 0.0);
            }
        }
    }

    #[test]
    fn partial_trace_kills_orthogonally_tagged_coherence() {
        // (|↓↓,0⟩ + |↑↑,2⟩)/√2 reduces to an incoherent qubit mixture
        let space = Spc::new(2).unwrap();
        let mut psi = CVector::<f64>::zeros(space.dim());
        psi[space.encode(Spin::Down, Spin::Down, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[space.encode(Spin::Up, Spin::Up, 2)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = DensityMatrix::from_pure(space, &psi).unwrap();
        let qq = partial_trace(&rho, Subsystem::Qubits);
        assert_relative_eq!(qq[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(qq[(3, 3)].re, 0.5, epsilon = 1e-15);
        assert_eq!(qq[(0, 3)].norm(), 0.0);
        assert_eq!(qq[(3, 0)].norm(), 0.0);
    }

    /// Brute-force oracle: partial trace by direct summation over decoded
    /// index tuples, written independently of the production loops.
    fn brute_force_reduce(
        rho: &CMatrix<f64>,
        space: HilbertSpec,
        keep: Subsystem,
    ) -> CMatrix<f64> {
        let dim = space.dim();
        let out_dim = match keep {
            Subsystem::Qubits => 4,
            Subsystem::Photon => space.fock_levels(),
            _ => 2,
        };
        let mut out = CMatrix::<f64>::zeros(out_dim, out_dim);
        for row in 0..dim {
            for col in 0..dim {
                let (r1, r2, rn) = space.decode(row);
                let (c1, c2, cn) = space.decode(col);
                let (keep_row, keep_col, traced_equal) = match keep {
                    Subsystem::Qubits => {
                        (2 * r1.bit() + r2.bit(), 2 * c1.bit() + c2.bit(), rn == cn)
                    }
                    Subsystem::Photon => (rn, cn, r1 == c1 && r2 == c2),
                    Subsystem::Qubit1 => (r1.bit(), c1.bit(), r2 == c2 && rn == cn),
                    Subsystem::Qubit2 => (r2.bit(), c2.bit(), r1 == c1 && rn == cn),
                };
                if traced_equal {
                    out[(keep_row, keep_col)] += rho[(row, col)];
                }
            }
        }
        out
    }

    #[test]
    fn partial_trace_matches_brute_force_on_random_states() {
        let space = Spc::new(4).unwrap();
        for seed in 0..6 {
            let rho = random_density_matrix::<f64>(space, seed);
            for keep in [
                Subsystem::Qubits,
                Subsystem::Photon,
                Subsystem::Qubit1,
                Subsystem::Qubit2,
            ] {
                let fast = partial_trace(&rho, keep);
                let slow = brute_force_reduce(rho.matrix(), space, keep);
                assert!(crate::scalar::max_abs_diff(&fast, &slow) < 1e-14);
            }
            // reducing qubits first then qubit 1 equals tracing over {qubit2, photon}
            let qq = partial_trace(&rho, Subsystem::Qubits);
            let mut q1_via_qq = CMatrix::<f64>::zeros(2, 2);
            for s in 0..2 {
                for sp in 0..2 {
                    for o in 0..2 {
                        q1_via_qq[(s, sp)] += qq[(2 * s + o, 2 * sp + o)];
                    }
                }
            }
            let q1_direct = partial_trace(&rho, Subsystem::Qubit1);
            assert!(crate::scalar::max_abs_diff(&q1_via_qq, &q1_direct) < 1e-14);
        }
    }

    #[test]
    fn partial_trace_preserves_trace_and_hermiticity() {
        let space = Spc::new(5).unwrap();
        let rho = random_density_matrix::<f64>(space, 42);
        for keep in [
            Subsystem::Qubits,
            Subsystem::Photon,
            Subsystem::Qubit1,
            Subsystem::Qubit2,
        ] {
            let red = partial_trace(&rho, keep);
            let tr: C<f64> = (0..red.nrows()).map(|i| red[(i, i)]).sum();
            assert_relative_eq!(tr.re, 1.0, epsilon = 1e-13);
            assert!(linalg::hermiticity_error(&red) < 1e-14);
        }
    }

    #[test]
    fn photon_block_examples() {
        let space = Spc::new(3).unwrap();
        let rho = DensityMatrix::<f64>::ground(space);
        let b0 = photon_block(&rho, 0).unwrap();
        for q in 0..4 {
            let expect = if q == 3 { 1.0 } else { 0.0 };
            assert_eq!(b0[(q, q)].re, expect);
        }
        let b1 = photon_block(&rho, 1).unwrap();
        assert_eq!(crate::scalar::frobenius_norm(&b1), 0.0);
        assert!(photon_block(&rho, 4).is_err());

        // block traces sum to one on any valid state
        let rho = random_density_matrix::<f64>(space, 7);
        let mut total = 0.0;
        for i in 0..=3 {
            let b = photon_block(&rho, i).unwrap();
            total += (0..4).map(|q| b[(q, q)].re).sum::<f64>();
        }
        assert_relative_eq!(total, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn density_matrix_validation() {
        let space = Spc::new(1).unwrap();
        let rho = DensityMatrix::<f64>::ground(space);
        assert!(rho.validate(&ValidationTolerances::default()).is_ok());
        assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-15);

        let mut bad = rho.matrix().clone();
        bad[(0, 0)] += c(0.1, 0.0);
        let bad = DensityMatrix::from_matrix_unchecked(space, bad);
        assert!(bad.validate(&ValidationTolerances::default()).is_err());
    }

    #[test]
    fn f32_instantiation_smoke() {
        let space = Spc::new(2).unwrap();
        let ops = OperatorSet::<f32>::build(space);
        let rho = DensityMatrix::<f32>::ground(space);
        let qq = partial_trace(&rho, Subsystem::Qubits);
        assert!((qq[(3, 3)].re - 1.0).abs() < 1e-6);
        assert!(ops.number.hermiticity_error() == 0.0);
    }
}
