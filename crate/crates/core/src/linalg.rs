//! Small internal linear-algebra helpers shared across modules.

use crate::scalar::{re, CMatrix, Real};

/// Replace `m` with its Hermitian part `(m + m†)/2`.
pub fn hermitize_in_place<T: Real>(m: &mut CMatrix<T>) {
    let n = m.nrows();
    let half = crate::scalar::cast::<T>(0.5);
    for j in 0..n {
        for i in 0..=j {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            let avg = (a + b) * re(half);
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Max absolute deviation from Hermiticity, `max |m − m†|`.
pub fn hermiticity_error<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for j in 0..n {
        for i in 0..=j {
            let d = crate::scalar::modulus(m[(i, j)] - m[(j, i)].conj());
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Whether the Hermitian matrix `m` is positive semidefinite up to `-tol`.
///
/// Runs an unpivoted LDLᴴ factorization of `m + (tol + slack)·I` and checks
/// that every pivot stays positive; by Sylvester's law of inertia a negative
/// pivot certifies a negative eigenvalue. The slack absorbs elimination
/// roundoff so states sitting exactly on the PSD boundary (pure states) pass.
/// Much cheaper than an eigendecomposition.
pub fn is_psd_within<T: Real>(m: &CMatrix<T>, tol: T) -> bool {
    let n = m.nrows();
    if n == 0 {
        return true;
    }
    let mut scale = T::zero();
    for i in 0..n {
        let d = m[(i, i)].re.abs();
        if d > scale {
            scale = d;
        }
    }
    let slack = T::default_epsilon() * crate::scalar::cast::<T>(256.0) * (T::one() + scale);
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] += re(tol + slack);
    }
    for k in 0..n {
        let d = a[(k, k)].re;
        if d <= T::zero() {
            return false;
        }
        for j in (k + 1)..n {
            let f = a[(j, k)].conj() / re(d);
            for i in j..n {
                let update = a[(i, k)] * f;
                a[(i, j)] -= update;
            }
        }
    }
    true
}

/// Smallest eigenvalue of a Hermitian matrix (dense; diagnostics and tests).
pub fn hermitian_min_eigenvalue<T: Real>(m: &CMatrix<T>) -> T {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(T::max_value().unwrap_or_else(T::one), |a, b| if b < a { b } else { a })
}
