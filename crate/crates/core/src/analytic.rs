//! Closed-form solutions of the solvable limits of the closed (decoherence-free)
//! system, used as independent cross-checks of the numerical engine.
//!
//! Three regimes admit compact results for the quench from `|↓↓, 0⟩`:
//!
//! - `θ` near 1: the counterrotating channel is a weak perturbation on top of
//!   the excitation-conserving one ([`tc_concurrence`]);
//! - `θ` near 0: the roles are swapped ([`atc_concurrence`],
//!   [`atc_zero_order_amplitudes`]);
//! - `θ = 1/2`: the full propagator can be resummed, giving exact qubit
//!   populations and a photon number growing as `g²t²/2`
//!   ([`half_theta_closed_forms`]).

use crate::scalar::{c, cast, Real, C};

/// Leading-order concurrence near the excitation-conserving limit:
/// `C(t) ≈ (2/3)(1−θ)(1 − cos(√6·gθ·t))`, valid for `θ` close to 1.
///
/// The entangling coherence lives between `|↓↓⟩` and `|↑↑⟩`; at `θ = 1` the
/// joint ground state is stationary and the concurrence vanishes identically.
pub fn tc_concurrence<T: Real>(theta: T, g: T, t: T) -> T {
    let six: T = cast(6.0);
    let two_thirds: T = cast(2.0 / 3.0);
    let phase = six.sqrt() * g * theta * t;
    two_thirds * (T::one() - theta) * (T::one() - phase.cos())
}

/// Leading-order concurrence near the counterrotating limit (`θ` close to 0):
///
/// `C(t) ≈ max(0, −(1/3)sin²(√6·τ) + (2/7)θ(1 − cos(√6·τ))(cos(√14·τ) + 4/3))`
///
/// with `τ = g(1−θ)t`. The first term is non-positive; the θ-linear term wins
/// only in finite windows around odd multiples of `√6·τ = π`, so the
/// concurrence is nonzero only inside those intervals (and vanishes everywhere
/// at `θ = 0`).
pub fn atc_concurrence<T: Real>(theta: T, g: T, t: T) -> T {
    let tau = g * (T::one() - theta) * t;
    let six: T = cast(6.0);
    let fourteen: T = cast(14.0);
    let third: T = cast(1.0 / 3.0);
    let two_sevenths: T = cast(2.0 / 7.0);
    let four_thirds: T = cast(4.0 / 3.0);
    let s6 = (six.sqrt() * tau).sin();
    let c6 = (six.sqrt() * tau).cos();
    let c14 = (fourteen.sqrt() * tau).cos();
    let value = -third * s6 * s6 + two_sevenths * theta * (T::one() - c6) * (c14 + four_thirds);
    if value > T::zero() {
        value
    } else {
        T::zero()
    }
}

/// Zero-order wavefunction amplitudes in the counterrotating limit at rescaled
/// time `τ = g(1−θ)t`.
///
/// The quench from `|↓↓, 0⟩` populates only the pair-excitation triple
/// `{|↓↓,0⟩, (|↑↓,1⟩+|↓↑,1⟩)/…, |↑↑,2⟩}`.
#[derive(Clone, Copy, Debug)]
pub struct PerturbativeAmplitudes<T: Real> {
    /// Rescaled time `τ`.
    pub tau: T,
    /// Amplitude of `|↓↓, 0⟩`.
    pub alpha_0: C<T>,
    /// Amplitude of `|↑↓, 1⟩` (equals that of `|↓↑, 1⟩`).
    pub beta_1: C<T>,
    /// Amplitude of `|↓↑, 1⟩`.
    pub beta_2: C<T>,
    /// Amplitude of `|↑↑, 2⟩`.
    pub gamma_2: C<T>,
}

impl<T: Real> PerturbativeAmplitudes<T> {
    /// `|α₀|² + |β₁|² + |β₂|² + |γ₂|²`, identically 1 for the zero-order
    /// solution.
    pub fn norm_sqr(&self) -> T {
        self.alpha_0.norm_sqr()
            + self.beta_1.norm_sqr()
            + self.beta_2.norm_sqr()
            + self.gamma_2.norm_sqr()
    }
}

/// Zero-order amplitudes of the counterrotating quench:
///
/// `α₀ = (2 + cos√6τ)/3`, `β₁ = β₂ = −(i/√6)·sin√6τ`,
/// `γ₂ = (√2/3)(cos√6τ − 1)`, with `τ = g(1−θ)t`.
///
/// The `(cos√6τ − 1)` form of `γ₂` is fixed by the initial condition
/// `γ₂(0) = 0` together with unit normalization (`α₀² + 2β² + γ₂²` reduces to
/// 1 algebraically only with the −1 present); both checks are enforced in the
/// tests against a direct integration of the `θ = 0` model.
pub fn atc_zero_order_amplitudes<T: Real>(g: T, theta: T, t: T) -> PerturbativeAmplitudes<T> {
    let tau = g * (T::one() - theta) * t;
    let six: T = cast(6.0);
    let sqrt6 = six.sqrt();
    let phase = sqrt6 * tau;
    let third: T = cast(1.0 / 3.0);
    let alpha_0 = c::<T>(0.0, 0.0) + C::new((cast::<T>(2.0) + phase.cos()) * third, T::zero());
    let beta = C::new(T::zero(), -phase.sin() / sqrt6);
    let gamma_2 = C::new(cast::<T>(2.0).sqrt() * third * (phase.cos() - T::one()), T::zero());
    PerturbativeAmplitudes {
        tau,
        alpha_0,
        beta_1: beta,
        beta_2: beta,
        gamma_2,
    }
}

/// Exact closed-system results at `θ = 1/2` for the quench from `|↓↓, 0⟩`.
#[derive(Clone, Copy, Debug)]
pub struct HalfThetaClosedForms<T: Real> {
    /// `ρ_{↑↑,↑↑}(t) = 3/8 + (1/8)e^{−2g²t²} − (1/2)e^{−g²t²/2}`.
    pub pop_up_up: T,
    /// `ρ_{↓↓,↓↓}(t) = 3/8 + (1/8)e^{−2g²t²} + (1/2)e^{−g²t²/2}`.
    pub pop_down_down: T,
    /// `ρ_{↑↓,↑↓}(t) = ρ_{↓↑,↓↑}(t) = 1/8 − (1/8)e^{−2g²t²}`.
    pub pop_up_down: T,
    /// Mean photon number `n_ph = g²t²/2`, growing without bound.
    pub n_ph: T,
    /// The concurrence is identically zero at `θ = 1/2`.
    pub concurrence: T,
}

/// Evaluate the exact `θ = 1/2` forms at time `t`.
pub fn half_theta_closed_forms<T: Real>(g: T, t: T) -> HalfThetaClosedForms<T> {
    let gt2 = g * g * t * t;
    let half: T = cast(0.5);
    let eighth: T = cast(0.125);
    let three_eighths: T = cast(0.375);
    let fast = (-cast::<T>(2.0) * gt2).exp();
    let slow = (-half * gt2).exp();
    HalfThetaClosedForms {
        pop_up_up: three_eighths + eighth * fast - half * slow,
        pop_down_down: three_eighths + eighth * fast + half * slow,
        pop_up_down: eighth - eighth * fast,
        n_ph: half * gt2,
        concurrence: T::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tc_concurrence_limits() {
        for t in [0.0, 3.0, 17.0, 120.0] {
            assert_eq!(tc_concurrence(1.0, 0.05, t), 0.0);
        }
        assert_eq!(tc_concurrence(0.84, 0.05, 0.0), 0.0);
        // maximum (4/3)(1−θ) at √6·gθt = π
        let theta = 0.84_f64;
        let g = 0.05;
        let t_peak = std::f64::consts::PI / (6.0_f64.sqrt() * g * theta);
        assert_relative_eq!(
            tc_concurrence(theta, g, t_peak),
            4.0 / 3.0 * 0.16,
            epsilon = 1e-12
        );
        assert_relative_eq!(tc_concurrence(theta, g, t_peak), 0.2133, epsilon = 1e-4);
    }

    #[test]
    fn atc_concurrence_limits() {
        // θ = 0: the θ-linear term vanishes and the rest is non-positive
        for t in [0.0, 1.0, 8.0, 55.0, 200.0] {
            assert_eq!(atc_concurrence(0.0, 0.05, t), 0.0);
        }
        assert_eq!(atc_concurrence(0.16, 0.05, 0.0), 0.0);
    }

    #[test]
    fn atc_concurrence_confined_to_windows() {
        // at θ = 0.16 the value is nonzero only in finite windows around
        // odd multiples of √6 τ = π
        let theta = 0.16;
        let g = 0.05;
        let tau_of = |t: f64| g * (1.0 - theta) * t;
        let mut saw_zero_inside = false;
        let mut saw_positive = false;
        let t_end = 4.0 * std::f64::consts::PI / (6.0_f64.sqrt() * g * (1.0 - theta));
        let n = 4000;
        for k in 0..n {
            let t = t_end * k as f64 / n as f64;
            let v = atc_concurrence(theta, g, t);
            let phase = 6.0_f64.sqrt() * tau_of(t);
            if v > 0.01 {
                saw_positive = true;
            }
            // far from the odd-π windows the value must vanish
            let dist = (phase / std::f64::consts::PI).rem_euclid(2.0);
            if (0.4..=1.6).contains(&dist) && phase > 0.1 {
                // no constraint here; windows live near dist ≈ 1
            } else if v == 0.0 && phase > 0.3 {
                saw_zero_inside = true;
            }
        }
        assert!(saw_positive, "no positive window found");
        assert!(saw_zero_inside, "value never returned to zero");
    }

    #[test]
    fn atc_amplitudes_initial_condition_and_normalization() {
        let amp0 = atc_zero_order_amplitudes(0.05, 0.0, 0.0);
        assert_relative_eq!(amp0.alpha_0.re, 1.0, epsilon = 1e-15);
        assert_eq!(amp0.beta_1.norm_sqr(), 0.0);
        assert_eq!(amp0.gamma_2.norm_sqr(), 0.0);

        // |α₀|² + 2|β|² + |γ₂|² = 1 for all τ (algebraic identity)
        for k in 0..200 {
            let t = k as f64 * 1.7;
            let amp = atc_zero_order_amplitudes(0.05, 0.1, t);
            assert_relative_eq!(amp.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn atc_amplitudes_at_pi() {
        // √6 τ = π → α₀ = 1/3, γ₂ = −2√2/3
        let g = 0.05;
        let theta = 0.0;
        let t = std::f64::consts::PI / (6.0_f64.sqrt() * g);
        let amp = atc_zero_order_amplitudes(g, theta, t);
        assert_relative_eq!(amp.alpha_0.re, 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(amp.gamma_2.re, -2.0 * 2.0_f64.sqrt() / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn half_theta_limits() {
        let at0 = half_theta_closed_forms(0.05, 0.0);
        assert_relative_eq!(at0.pop_down_down, 1.0, epsilon = 1e-15);
        assert_eq!(at0.pop_up_up, 0.0);
        assert_eq!(at0.pop_up_down, 0.0);
        assert_eq!(at0.n_ph, 0.0);

        // populations → (3/8, 3/8, 1/8, 1/8) as gt → ∞
        let late = half_theta_closed_forms(0.05, 1.0e4);
        assert_relative_eq!(late.pop_up_up, 0.375, epsilon = 1e-12);
        assert_relative_eq!(late.pop_down_down, 0.375, epsilon = 1e-12);
        assert_relative_eq!(late.pop_up_down, 0.125, epsilon = 1e-12);

        // n_ph = g²t²/2: at g·t = 1 → 0.5
        let gt1 = half_theta_closed_forms(0.05, 20.0);
        assert_relative_eq!(gt1.n_ph, 0.5, epsilon = 1e-14);

        // population value quoted at gt = 1
        assert_relative_eq!(
            half_theta_closed_forms(0.05, 20.0).pop_up_up,
            0.375 + 0.125 * (-2.0_f64).exp() - 0.5 * (-0.5_f64).exp(),
            epsilon = 1e-15
        );
        assert_relative_eq!(half_theta_closed_forms(0.05, 20.0).pop_up_up, 0.0886, epsilon = 1e-4);

        for t in [0.0, 5.0, 40.0] {
            assert_eq!(half_theta_closed_forms(0.05, t).concurrence, 0.0);
        }

        // populations always sum to one
        for t in [0.0, 3.0, 11.0, 60.0] {
            let f = half_theta_closed_forms(0.05, t);
            assert_relative_eq!(
                f.pop_up_up + f.pop_down_down + 2.0 * f.pop_up_down,
                1.0,
                epsilon = 1e-13
            );
        }
    }
}
