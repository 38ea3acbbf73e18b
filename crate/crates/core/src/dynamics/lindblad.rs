//! The master-equation right-hand side
//! `dρ/dt = −i[H, ρ] + Σ_k r_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`
//! evaluated through sparse operator application.
//!
//! All the physical operators here (ladder and Pauli embeddings, their sums)
//! have O(dim) nonzeros, so one right-hand side costs O(dim²) instead of the
//! O(dim³) of dense products. Public types remain dense; sparsity is an
//! internal representation extracted on construction.

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, Operator};
use crate::model::{drive_value, CollapseChannel, SystemParams};
use crate::scalar::{re, CMatrix, CVector, Real, C};

/// Compressed-row sparse matrix over complex scalars.
#[derive(Clone, Debug)]
pub struct SparseOp<T: Real> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C<T>>,
}

impl<T: Real> SparseOp<T> {
    /// Extract the nonzero pattern of a dense square matrix.
    pub fn from_dense(m: &CMatrix<T>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = m[(i, j)];
                if v.re != T::zero() || v.im != T::zero() {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOp {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Build from triplets (duplicates are summed).
    pub fn from_triplets(dim: usize, triplets: &mut Vec<(usize, usize, C<T>)>) -> Self {
        triplets.sort_by_key(|(i, j, _)| (*i, *j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in triplets.iter() {
            if last == Some((i, j)) {
                let idx = vals.len() - 1;
                vals[idx] += v;
            } else {
                row_ptr[i + 1] += 1;
                cols.push(j);
                vals.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseOp {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn adjoint(&self) -> Self {
        let mut triplets: Vec<(usize, usize, C<T>)> = self
            .iter()
            .map(|(i, j, v)| (j, i, v.conj()))
            .collect();
        SparseOp::from_triplets(self.dim, &mut triplets)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C<T>)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] += v;
        }
        m
    }

    /// `out += factor · self · rho`.
    pub fn apply_left_into(&self, rho: &CMatrix<T>, factor: C<T>, out: &mut CMatrix<T>) {
        let dim = self.dim;
        for j in 0..rho.ncols() {
            let col_in = rho.column(j);
            let mut col_out = out.column_mut(j);
            for i in 0..dim {
                let mut acc = C::new(T::zero(), T::zero());
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[k] * col_in[self.cols[k]];
                }
                col_out[i] += factor * acc;
            }
        }
    }

    /// `out += factor · rho · self`.
    pub fn apply_right_into(&self, rho: &CMatrix<T>, factor: C<T>, out: &mut CMatrix<T>) {
        let rows = rho.nrows();
        for k in 0..self.dim {
            for idx in self.row_ptr[k]..self.row_ptr[k + 1] {
                let j = self.cols[idx];
                let w = factor * self.vals[idx];
                let col_in = rho.column(k);
                let mut col_out = out.column_mut(j);
                for i in 0..rows {
                    col_out[i] += w * col_in[i];
                }
            }
        }
    }

    /// `out += factor · self · psi`.
    pub fn apply_vec_into(&self, psi: &CVector<T>, factor: C<T>, out: &mut CVector<T>) {
        for i in 0..self.dim {
            let mut acc = C::new(T::zero(), T::zero());
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * psi[self.cols[k]];
            }
            out[i] += factor * acc;
        }
    }
}

/// A Hamiltonian in sparse form: a static part plus, in the lab frame, the
/// drive operator modulated by the canonical waveform.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian<T: Real> {
    pub(crate) h0: SparseOp<T>,
    pub(crate) drive: Option<(SparseOp<T>, SystemParams<T>)>,
}

impl<T: Real> SparseHamiltonian<T> {
    pub fn static_part(h: &Operator<T>) -> Self {
        SparseHamiltonian {
            h0: SparseOp::from_dense(h.matrix()),
            drive: None,
        }
    }

    pub fn driven(h0: &Operator<T>, v: &Operator<T>, params: SystemParams<T>) -> Self {
        SparseHamiltonian {
            h0: SparseOp::from_dense(h0.matrix()),
            drive: Some((SparseOp::from_dense(v.matrix()), params)),
        }
    }

    pub fn is_static(&self) -> bool {
        self.drive.is_none()
    }

    /// `out += factor · H(t) · psi`.
    pub fn apply_vec_into(&self, t: T, psi: &CVector<T>, factor: C<T>, out: &mut CVector<T>) {
        self.h0.apply_vec_into(psi, factor, out);
        if let Some((v, params)) = &self.drive {
            v.apply_vec_into(psi, factor * re(drive_value(params, t)), out);
        }
    }
}

/// Prepared evaluator of the Lindblad right-hand side.
///
/// Internally holds `H_nh = H_static − (i/2) Σ_k r_k L_k†L_k` so that
/// `dρ/dt = −i(H_nh(t) ρ − ρ H_nh(t)†) + Σ_k r_k L_k ρ L_k†`, which is valid
/// for arbitrary (not necessarily Hermitian) ρ.
pub struct LindbladGenerator<T: Real> {
    dim: usize,
    h_nh: SparseOp<T>,
    h_nh_adj: SparseOp<T>,
    drive: Option<(SparseOp<T>, SystemParams<T>)>,
    /// `(√r·L, (√r·L)†)` pairs.
    jumps: Vec<(SparseOp<T>, SparseOp<T>)>,
}

impl<T: Real> LindbladGenerator<T> {
    /// Build from a (possibly driven) Hamiltonian and collapse channels.
    pub fn new(hamiltonian: &SparseHamiltonian<T>, collapse: &[CollapseChannel<T>]) -> Self {
        let dim = hamiltonian.h0.dim();
        let mut h_nh_dense = hamiltonian.h0.to_dense();
        let mut jumps = Vec::with_capacity(collapse.len());
        let half = re(crate::scalar::cast::<T>(0.5));
        for channel in collapse {
            let l = channel.operator.matrix();
            let sqrt_rate = re(channel.rate.sqrt());
            let scaled = l * sqrt_rate;
            // H_nh −= (i/2) (√r L)†(√r L)
            let ll = scaled.adjoint() * &scaled;
            h_nh_dense += ll * C::new(T::zero(), -T::one()) * half;
            let sp = SparseOp::from_dense(&scaled);
            let sp_adj = sp.adjoint();
            jumps.push((sp, sp_adj));
        }
        let h_nh = SparseOp::from_dense(&h_nh_dense);
        let h_nh_adj = SparseOp::from_dense(&h_nh_dense.adjoint());
        LindbladGenerator {
            dim,
            h_nh,
            h_nh_adj,
            drive: hamiltonian.drive.clone(),
            jumps,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = dρ/dt` at time `t`; `work` is a scratch matrix of the same shape.
    pub fn rhs_into(&self, t: T, rho: &CMatrix<T>, out: &mut CMatrix<T>, work: &mut CMatrix<T>) {
        let minus_i = C::new(T::zero(), -T::one());
        let plus_i = C::new(T::zero(), T::one());
        out.fill(C::new(T::zero(), T::zero()));
        self.h_nh.apply_left_into(rho, minus_i, out);
        self.h_nh_adj.apply_right_into(rho, plus_i, out);
        if let Some((v, params)) = &self.drive {
            let g = re(drive_value(params, t));
            v.apply_left_into(rho, minus_i * g, out);
            v.apply_right_into(rho, plus_i * g, out);
        }
        let one = C::new(T::one(), T::zero());
        for (jump, jump_adj) in &self.jumps {
            work.fill(C::new(T::zero(), T::zero()));
            jump.apply_left_into(rho, one, work);
            jump_adj.apply_right_into(work, one, out);
        }
    }

    /// Allocating version of [`rhs_into`].
    pub fn rhs(&self, t: T, rho: &CMatrix<T>) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        let mut work = CMatrix::zeros(self.dim, self.dim);
        self.rhs_into(t, rho, &mut out, &mut work);
        out
    }

    /// Frobenius norm of the static right-hand side, `‖dρ/dt‖_F` at `t = 0`.
    pub fn residual_norm(&self, rho: &CMatrix<T>) -> T {
        crate::scalar::frobenius_norm(&self.rhs(T::zero(), rho))
    }
}

/// One-shot evaluation of the master-equation right-hand side
/// `−i[H, ρ] + Γ[ρ]` for a static Hamiltonian.
///
/// The output is traceless always and Hermitian for Hermitian input.
pub fn lindblad_rhs<T: Real>(
    rho: &DensityMatrix<T>,
    h: &Operator<T>,
    collapse: &[CollapseChannel<T>],
) -> Result<CMatrix<T>> {
    if h.space().dim() != rho.space().dim() {
        return Err(Error::invalid_argument(format!(
            "Hamiltonian dimension {} does not match state dimension {}",
            h.space().dim(),
            rho.space().dim()
        )));
    }
    for channel in collapse {
        if channel.operator.space().dim() != rho.space().dim() {
            return Err(Error::invalid_argument(format!(
                "collapse operator '{}' dimension mismatch",
                channel.label
            )));
        }
    }
    let generator = LindbladGenerator::new(&SparseHamiltonian::static_part(h), collapse);
    Ok(generator.rhs(T::zero(), rho.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random_density_matrix, HilbertSpec, Spin};
    use crate::model::{collapse_operators, effective_hamiltonian};
    use crate::scalar::{c, frobenius_norm, max_abs_diff};
    use approx::assert_relative_eq;

    fn params(theta: f64, kappa: f64, gamma: f64, gamma_phi: f64) -> SystemParams<f64> {
        SystemParams::new(0.05, theta, kappa, gamma, gamma_phi, 3).unwrap()
    }

    /// Dense textbook evaluation of the same right-hand side.
    fn dense_rhs(
        rho: &CMatrix<f64>,
        h: &CMatrix<f64>,
        collapse: &[CollapseChannel<f64>],
    ) -> CMatrix<f64> {
        let i = c::<f64>(0.0, 1.0);
        let mut out = (h * rho - rho * h) * (-i);
        for ch in collapse {
            let l = ch.operator.matrix();
            let ld = l.adjoint();
            let ll = &ld * l;
            out += (l * rho * &ld - (&ll * rho + rho * &ll) * c(0.5, 0.0)) * c(ch.rate, 0.0);
        }
        out
    }

    #[test]
    fn sparse_apply_matches_dense_products() {
        let space = HilbertSpec::new(3).unwrap();
        let p = params(0.3, 0.01, 0.004, 0.001);
        let h = effective_hamiltonian(&p, space);
        let sp = SparseOp::from_dense(h.matrix());
        assert!(sp.nnz() < 5 * space.dim());

        let rho = random_density_matrix::<f64>(space, 5);
        let mut left = CMatrix::<f64>::zeros(space.dim(), space.dim());
        sp.apply_left_into(rho.matrix(), c(1.0, -0.5), &mut left);
        let expect = h.matrix() * rho.matrix() * c(1.0, -0.5);
        assert!(max_abs_diff(&left, &expect) < 1e-15);

        let mut right = CMatrix::<f64>::zeros(space.dim(), space.dim());
        sp.apply_right_into(rho.matrix(), c(-0.3, 0.2), &mut right);
        let expect = rho.matrix() * h.matrix() * c(-0.3, 0.2);
        assert!(max_abs_diff(&right, &expect) < 1e-15);

        let psi = space.basis_ket::<f64>(Spin::Down, Spin::Up, 2);
        let mut out = CVector::<f64>::zeros(space.dim());
        sp.apply_vec_into(&psi, c(1.0, 0.0), &mut out);
        assert!((out - h.apply(&psi)).norm() < 1e-15);
    }

    #[test]
    fn generator_matches_dense_formula() {
        let space = HilbertSpec::new(3).unwrap();
        let p = params(0.4, 0.012, 0.003, 0.0007);
        let h = effective_hamiltonian(&p, space);
        let collapse = collapse_operators(&p, space);
        let generator = LindbladGenerator::new(&SparseHamiltonian::static_part(&h), &collapse);
        for seed in 0..5 {
            let rho = random_density_matrix::<f64>(space, 100 + seed);
            let fast = generator.rhs(0.0, rho.matrix());
            let slow = dense_rhs(rho.matrix(), h.matrix(), &collapse);
            assert!(max_abs_diff(&fast, &slow) < 1e-14);
        }
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let space = HilbertSpec::new(3).unwrap();
        let p = params(0.7, 0.02, 0.01, 0.002);
        let h = effective_hamiltonian(&p, space);
        let collapse = collapse_operators(&p, space);
        for seed in 0..10 {
            let rho = random_density_matrix::<f64>(space, seed);
            let out = lindblad_rhs(&rho, &h, &collapse).unwrap();
            let tr: C<f64> = (0..out.nrows()).map(|k| out[(k, k)]).sum();
            assert!(crate::scalar::modulus(tr) < 1e-12);
            assert!(crate::linalg::hermiticity_error(&out) < 1e-14);
        }
    }

    #[test]
    fn ground_state_is_stationary_in_tc_limit() {
        let space = HilbertSpec::new(2).unwrap();
        let p = params(1.0, 0.0, 0.0, 0.0);
        let h = effective_hamiltonian(&p, space);
        let rho = DensityMatrix::<f64>::ground(space);
        let out = lindblad_rhs(&rho, &h, &[]).unwrap();
        assert_eq!(frobenius_norm(&out), 0.0);
    }

    #[test]
    fn counterrotating_rhs_on_ground_state() {
        // θ=0, no dissipation: dρ/dt = −ig[(|↑↓,1⟩+|↓↑,1⟩)⟨↓↓,0| − h.c.]
        let space = HilbertSpec::new(2).unwrap();
        let p = params(0.0, 0.0, 0.0, 0.0);
        let h = effective_hamiltonian(&p, space);
        let rho = DensityMatrix::<f64>::ground(space);
        let out = lindblad_rhs(&rho, &h, &[]).unwrap();

        let ground = space.encode(Spin::Down, Spin::Down, 0);
        let ud1 = space.encode(Spin::Up, Spin::Down, 1);
        let du1 = space.encode(Spin::Down, Spin::Up, 1);
        let mut expect = CMatrix::<f64>::zeros(space.dim(), space.dim());
        expect[(ud1, ground)] = c(0.0, -p.g);
        expect[(du1, ground)] = c(0.0, -p.g);
        expect[(ground, ud1)] = c(0.0, p.g);
        expect[(ground, du1)] = c(0.0, p.g);
        assert!(max_abs_diff(&out, &expect) < 1e-16);
    }

    #[test]
    fn photon_number_decays_at_kappa() {
        // d⟨n⟩/dt = −κ⟨n⟩ on a one-photon state
        let space = HilbertSpec::new(2).unwrap();
        let p = SystemParams::new(0.0, 1.0, 0.013, 0.0, 0.0, 2).unwrap();
        let h = effective_hamiltonian(&p, space);
        let collapse = collapse_operators(&p, space);
        let one_photon =
            DensityMatrix::from_pure(space, &space.basis_ket(Spin::Down, Spin::Down, 1)).unwrap();
        let out = lindblad_rhs(&one_photon, &h, &collapse).unwrap();
        let number = crate::hilbert::OperatorSet::<f64>::build(space).number;
        let dn: C<f64> = (number.matrix() * &out).diagonal().iter().copied().sum();
        assert_relative_eq!(dn.re, -p.kappa, epsilon = 1e-14);
    }

    #[test]
    fn dephasing_damps_single_qubit_coherence_at_2_gamma_phi() {
        // dρ/dt = γφ(σzρσz − ρ) gives dρ_{↑↓}/dt = −2γφ ρ_{↑↓} on qubit 1
        let space = HilbertSpec::new(1).unwrap();
        let p = SystemParams::new(0.0, 1.0, 0.0, 0.0, 0.0045, 1).unwrap();
        let h = effective_hamiltonian(&p, space);
        let collapse = collapse_operators(&p, space);
        let mut psi = CVector::<f64>::zeros(space.dim());
        psi[space.encode(Spin::Up, Spin::Down, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[space.encode(Spin::Down, Spin::Down, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = DensityMatrix::from_pure(space, &psi).unwrap();
        let out = lindblad_rhs(&rho, &h, &collapse).unwrap();
        let up = space.encode(Spin::Up, Spin::Down, 0);
        let down = space.encode(Spin::Down, Spin::Down, 0);
        let coh = rho.matrix()[(up, down)];
        let dcoh = out[(up, down)];
        assert_relative_eq!(dcoh.re, -2.0 * p.gamma_phi * coh.re, epsilon = 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let small = HilbertSpec::new(1).unwrap();
        let big = HilbertSpec::new(2).unwrap();
        let p = params(0.5, 0.0, 0.0, 0.0);
        let h = effective_hamiltonian(&p, big);
        let rho = DensityMatrix::<f64>::ground(small);
        assert!(matches!(
            lindblad_rhs(&rho, &h, &[]),
            Err(Error::InvalidArgument(_))
        ));
    }
}
