//! Direct wavefunction integration of the Schrödinger equation
//! `i·dψ/dt = H(t)ψ`, used as the closed-system fast path and as an
//! independent oracle for the density-matrix integrator.

use crate::error::Result;
use crate::scalar::{re, CVector, Real, C};

use super::lindblad::SparseHamiltonian;
use super::ode::{integrate_grid, OdeOptions, OdeStats};

/// Integrate a pure state over `t_grid`, renormalizing after every accepted
/// step, and call `observe` at each grid point.
pub fn schrodinger_evolve<T, O>(
    hamiltonian: &SparseHamiltonian<T>,
    psi0: &CVector<T>,
    t_grid: &[T],
    opts: &OdeOptions<T>,
    observe: O,
) -> Result<(CVector<T>, OdeStats<T>)>
where
    T: Real,
    O: FnMut(usize, T, &CVector<T>) -> Result<()>,
{
    let minus_i = C::new(T::zero(), -T::one());
    let dim = psi0.len();
    let mut psi0 = psi0.clone();
    let norm = psi0.norm();
    if norm > T::zero() {
        psi0 /= re(norm);
    }
    integrate_grid(
        opts,
        move |t, psi: &CVector<T>| {
            let mut out = CVector::zeros(dim);
            hamiltonian.apply_vec_into(t, psi, minus_i, &mut out);
            out
        },
        psi0,
        t_grid,
        |psi: &mut CVector<T>| {
            let norm = psi.norm();
            if norm > T::zero() {
                *psi /= re(norm);
            }
        },
        observe,
    )
}
