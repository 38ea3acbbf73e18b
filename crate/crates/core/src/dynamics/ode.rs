//! Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)) over
//! complex matrix- or vector-valued states.
//!
//! The integrator lands exactly on every requested grid point (the step is
//! clipped, never interpolated), calls a projection hook after each accepted
//! step (used to re-Hermitize density matrices or renormalize kets), and
//! reports an accumulated local-error estimate.

use crate::error::{Error, Result};
use crate::scalar::{cast, re, Real, C};

/// Integration state: anything supporting the few linear operations the
/// stepper needs. Error norms treat every complex entry as two reals.
pub trait OdeState<T: Real>: Clone {
    /// `self += a · other`.
    fn add_scaled(&mut self, a: T, other: &Self);
    /// Scale all entries by `a` in place (named to avoid colliding with
    /// nalgebra's inherent `scale`, which returns a copy).
    fn scale_assign(&mut self, a: T);
    /// Entry count (complex entries).
    fn len(&self) -> usize;
    /// Plain 2-norm.
    fn norm2(&self) -> T;
    /// RMS of `|err_i| / (atol + rtol·max(|y0_i|, |y1_i|))`.
    fn weighted_error_norm(&self, y0: &Self, y1: &Self, atol: T, rtol: T) -> T;
}

impl<T, R, S> OdeState<T> for nalgebra::OMatrix<C<T>, R, S>
where
    T: Real,
    R: nalgebra::Dim,
    S: nalgebra::Dim,
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<R, S>,
{
    fn add_scaled(&mut self, a: T, other: &Self) {
        self.zip_apply(other, |s, o| *s += o * re(a));
    }

    fn scale_assign(&mut self, a: T) {
        self.apply(|s| *s *= re(a));
    }

    fn len(&self) -> usize {
        self.nrows() * self.ncols()
    }

    fn norm2(&self) -> T {
        self.iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |acc, v| acc + v)
            .sqrt()
    }

    fn weighted_error_norm(&self, y0: &Self, y1: &Self, atol: T, rtol: T) -> T {
        let mut acc = T::zero();
        for ((e, a), b) in self.iter().zip(y0.iter()).zip(y1.iter()) {
            let scale_re = atol + rtol * a.re.abs().max(b.re.abs());
            let scale_im = atol + rtol * a.im.abs().max(b.im.abs());
            let er = e.re / scale_re;
            let ei = e.im / scale_im;
            acc += er * er + ei * ei;
        }
        (acc / cast(2.0 * self.len() as f64)).sqrt()
    }
}

/// Integrator configuration.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T: Real> {
    /// Relative tolerance per step.
    pub rtol: T,
    /// Absolute tolerance per step.
    pub atol: T,
    /// Hard cap on the step size (e.g. to resolve an explicit drive).
    pub max_step: Option<T>,
    /// Initial step; estimated from the first right-hand side when absent.
    pub initial_step: Option<T>,
    /// Abort after this many accepted + rejected steps.
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            rtol: cast(1e-8),
            atol: cast(1e-10),
            max_step: None,
            initial_step: None,
            max_steps: 50_000_000,
        }
    }
}

impl<T: Real> OdeOptions<T> {
    pub fn with_tolerances(mut self, rtol: T, atol: T) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }
}

/// Counters and error bookkeeping from one integration.
#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats<T: Real> {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    /// Sum of the 2-norms of the accepted local error estimates; an upper
    /// bound proxy for the accumulated integration error.
    pub accumulated_error: T,
    /// Step size in use when integration finished.
    pub final_step: T,
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 4th-order weights (including the FSAL stage).
const D1: f64 = 5179.0 / 57600.0;
const D3: f64 = 7571.0 / 16695.0;
const D4: f64 = 393.0 / 640.0;
const D5: f64 = -92097.0 / 339200.0;
const D6: f64 = 187.0 / 2100.0;
const D7: f64 = 1.0 / 40.0;

fn combine<T: Real, S: OdeState<T>>(base: &S, h: T, terms: &[(f64, &S)]) -> S {
    let mut out = base.clone();
    for (w, k) in terms {
        out.add_scaled(h * cast(*w), k);
    }
    out
}

/// Integrate `y' = rhs(t, y)` from `t_grid[0]`, calling `observe` at every
/// grid point (including the first) and `project` after every accepted step.
///
/// The projection is assumed to be an `O(roundoff)`-sized correction
/// (Hermitization, norm restoration); the FSAL stage is reused across it.
/// Returns the final state and the run statistics; `observe` may abort the
/// run by returning an error.
pub fn integrate_grid<T, S, F, P, O>(
    opts: &OdeOptions<T>,
    mut rhs: F,
    y0: S,
    t_grid: &[T],
    mut project: P,
    mut observe: O,
) -> Result<(S, OdeStats<T>)>
where
    T: Real,
    S: OdeState<T>,
    F: FnMut(T, &S) -> S,
    P: FnMut(&mut S),
    O: FnMut(usize, T, &S) -> Result<()>,
{
    if t_grid.is_empty() {
        return Err(Error::invalid_argument("empty time grid".to_string()));
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid_argument(
                "time grid must be strictly increasing".to_string(),
            ));
        }
    }

    let mut stats = OdeStats::<T>::default();
    let mut t = t_grid[0];
    let mut y = y0;
    observe(0, t, &y)?;
    if t_grid.len() == 1 {
        stats.final_step = T::zero();
        return Ok((y, stats));
    }

    let mut k1 = rhs(t, &y);
    stats.rhs_evaluations += 1;

    // initial step: aim roughly at the local frequency scale ‖f‖/‖y‖
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let fnorm = k1.norm2();
        let ynorm = y.norm2();
        let lam = if ynorm > T::zero() && fnorm > T::zero() {
            fnorm / ynorm
        } else {
            T::one()
        };
        (cast::<T>(0.1) / lam).min(t_grid[1] - t_grid[0])
    });
    if let Some(cap) = opts.max_step {
        h = h.min(cap);
    }

    let order_scale = cast::<T>(0.2); // 1/5, embedded order + 1
    let safety = cast::<T>(0.9);
    let mut just_rejected = false;

    for (gi, &t_target) in t_grid.iter().enumerate().skip(1) {
        while t < t_target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::IntegrationFailure(format!(
                    "step budget {} exhausted at t = {:e}",
                    opts.max_steps, t
                )));
            }
            let h_min = T::default_epsilon() * cast::<T>(32.0) * t.abs().max(T::one());
            let mut h_eff = h.min(t_target - t);
            if let Some(cap) = opts.max_step {
                h_eff = h_eff.min(cap);
            }
            if h_eff < h_min {
                h_eff = h_min.min(t_target - t);
            }

            let y2 = combine(&y, h_eff, &[(A21, &k1)]);
            let k2 = rhs(t + cast::<T>(C2) * h_eff, &y2);
            let y3 = combine(&y, h_eff, &[(A31, &k1), (A32, &k2)]);
            let k3 = rhs(t + cast::<T>(C3) * h_eff, &y3);
            let y4 = combine(&y, h_eff, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            let k4 = rhs(t + cast::<T>(C4) * h_eff, &y4);
            let y5 = combine(&y, h_eff, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            let k5 = rhs(t + cast::<T>(C5) * h_eff, &y5);
            let y6 = combine(
                &y,
                h_eff,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            let k6 = rhs(t + h_eff, &y6);
            let y_new = combine(
                &y,
                h_eff,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let k7 = rhs(t + h_eff, &y_new);
            stats.rhs_evaluations += 6;

            // error = h Σ (b5 − b4)_i k_i
            let mut err = combine(
                &y_new,
                h_eff,
                &[
                    (B1 - D1, &k1),
                    (B3 - D3, &k3),
                    (B4 - D4, &k4),
                    (B5 - D5, &k5),
                    (B6 - D6, &k6),
                    (-D7, &k7),
                ],
            );
            err.add_scaled(-T::one(), &y_new);

            let err_norm = err.weighted_error_norm(&y, &y_new, opts.atol, opts.rtol);
            let finite = err_norm == err_norm && err_norm < cast(1e12);

            if finite && err_norm <= T::one() {
                t = t + h_eff;
                if (t_target - t).abs() <= h_min {
                    t = t_target;
                }
                y = y_new;
                project(&mut y);
                k1 = k7;
                stats.accepted += 1;
                stats.accumulated_error += err.norm2();
                let growth = if err_norm > T::zero() {
                    (safety * err_norm.powf(-order_scale)).min(cast(5.0))
                } else {
                    cast(5.0)
                };
                let growth = if just_rejected {
                    growth.min(T::one())
                } else {
                    growth
                };
                h = h_eff * growth.max(cast(0.2));
                just_rejected = false;
            } else {
                stats.rejected += 1;
                just_rejected = true;
                let shrink = if finite {
                    (safety * err_norm.powf(-order_scale)).clamp(cast(0.1), cast(0.5))
                } else {
                    cast(0.25)
                };
                if h_eff * shrink < h_min {
                    return Err(Error::IntegrationFailure(format!(
                        "step size underflow at t = {:e} (err = {:e})",
                        t, err_norm
                    )));
                }
                h = h_eff * shrink;
            }
        }
        observe(gi, t, &y)?;
    }
    stats.final_step = h;
    Ok((y, stats))
}
