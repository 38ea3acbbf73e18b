//! Time evolution of the master equation and steady-state solvers.
//!
//! [`evolve`] integrates the density matrix over a requested time grid in
//! either the effective (time-independent) or lab (explicitly driven) frame,
//! recording metric channels and truncation diagnostics. Closed systems
//! starting from a pure state are integrated as wavefunctions — results are
//! identical within tolerance, at a fraction of the cost; the equivalence is
//! itself one of the cross-checks in the test suite.
//!
//! [`steady_state`] finds the state annihilated by the Liouvillian either by
//! long-time integration (with residual-gated geometric extrapolation across
//! checkpoints) or through the null space of the sparse superoperator.

pub mod lindblad;
pub mod liouvillian;
pub mod ode;
pub mod schrodinger;

pub use lindblad::{lindblad_rhs, LindbladGenerator, SparseHamiltonian, SparseOp};
pub use liouvillian::{liouvillian_matrix, Liouvillian, DEFAULT_SUPEROP_CAP};
pub use ode::{integrate_grid, OdeOptions, OdeStats, OdeState};
pub use schrodinger::schrodinger_evolve;

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::linalg;
use crate::metrics::{evaluate_metrics, MetricKind, StateRef};
use crate::model::{
    collapse_operators, effective_hamiltonian, lab_hamiltonian_parts, SystemParams,
};
use crate::scalar::{cast, re, CMatrix, CVector, Real, C};

/// Which Hamiltonian drives the evolution.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Frame {
    /// Time-independent interaction-picture Hamiltonian.
    Effective,
    /// Explicit lab-frame Hamiltonian with the `2ω` drive resolved in time.
    Lab,
}

/// Abort thresholds applied to every stored state of a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct ValidationOptions<T: Real> {
    pub enabled: bool,
    /// Abort when `|Tr ρ − 1|` exceeds this.
    pub trace_tol: T,
    /// Abort when an eigenvalue falls below `−positivity_tol` (signals a
    /// too-coarse tolerance or truncation overflow).
    pub positivity_tol: T,
}

impl<T: Real> Default for ValidationOptions<T> {
    fn default() -> Self {
        ValidationOptions {
            enabled: true,
            trace_tol: cast(1e-6),
            positivity_tol: cast(1e-5),
        }
    }
}

/// Configuration for [`evolve`].
#[derive(Clone, Debug)]
pub struct EvolveOptions<T: Real> {
    pub ode: OdeOptions<T>,
    /// Store the density matrix at every grid point (memory-heavy for long
    /// grids; metric channels are available either way).
    pub keep_states: bool,
    /// Metric channels recorded at every grid point.
    pub metrics: Vec<MetricKind>,
    /// Integrate closed-system pure states as wavefunctions.
    pub allow_pure_fast_path: bool,
    pub validation: ValidationOptions<T>,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        EvolveOptions {
            ode: OdeOptions::default(),
            keep_states: true,
            metrics: vec![
                MetricKind::Concurrence,
                MetricKind::MutualInformation,
                MetricKind::PhotonNumber,
                MetricKind::ExcitedPopulationQ1,
                MetricKind::ExcitedPopulationQ2,
            ],
            allow_pure_fast_path: true,
            validation: ValidationOptions::default(),
        }
    }
}

/// Populations of the two highest retained Fock levels at one stored time.
#[derive(Clone, Copy, Debug)]
pub struct TruncationSample<T: Real> {
    pub top: T,
    pub second: T,
}

/// Time series produced by [`evolve`].
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    /// Stored states (empty unless `keep_states`).
    pub states: Vec<DensityMatrix<T>>,
    /// Metric channels in the order requested.
    pub observables: Vec<(MetricKind, Vec<T>)>,
    /// Top-two Fock-level populations per stored time.
    pub truncation: Vec<TruncationSample<T>>,
    pub stats: OdeStats<T>,
    /// Whether the wavefunction fast path was taken.
    pub used_pure_path: bool,
}

impl<T: Real> Trajectory<T> {
    pub fn observable(&self, kind: MetricKind) -> Option<&[T]> {
        self.observables
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, v)| v.as_slice())
    }

    /// Largest top-level Fock population seen along the trajectory.
    pub fn max_top_population(&self) -> T {
        self.truncation
            .iter()
            .map(|s| s.top)
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }
}

fn check_grid_starts_at_zero<T: Real>(t_grid: &[T]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::invalid_argument("empty time grid".to_string()));
    }
    if t_grid[0] != T::zero() {
        return Err(Error::invalid_argument(format!(
            "time grid must start at 0, got {:e}",
            t_grid[0]
        )));
    }
    Ok(())
}

fn principal_pure_component<T: Real>(rho: &DensityMatrix<T>) -> Option<CVector<T>> {
    let one = T::one();
    if (rho.purity() - one).abs() > cast(1e-12) {
        return None;
    }
    let eig = rho.matrix().clone().symmetric_eigen();
    let mut best = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k] > eig.eigenvalues[best] {
            best = k;
        }
    }
    Some(eig.eigenvectors.column(best).into_owned())
}

fn truncation_sample_pure<T: Real>(psi: &CVector<T>, levels: usize) -> TruncationSample<T> {
    let pop = |n: usize| {
        (0..4)
            .map(|q| psi[4 * n + q].norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    };
    TruncationSample {
        top: pop(levels - 1),
        second: if levels >= 2 { pop(levels - 2) } else { T::zero() },
    }
}

fn truncation_sample_density<T: Real>(rho: &DensityMatrix<T>) -> TruncationSample<T> {
    let levels = rho.space().fock_levels();
    TruncationSample {
        top: rho.fock_population(levels - 1),
        second: if levels >= 2 {
            rho.fock_population(levels - 2)
        } else {
            T::zero()
        },
    }
}

/// Integrate the master equation over `t_grid` (which must start at 0).
pub fn evolve<T: Real>(
    rho0: &DensityMatrix<T>,
    params: &SystemParams<T>,
    t_grid: &[T],
    frame: Frame,
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    params.validate()?;
    let space = params.space();
    if rho0.space() != space {
        return Err(Error::invalid_argument(format!(
            "initial state lives on n_max = {}, parameters request n_max = {}",
            rho0.space().n_max(),
            space.n_max()
        )));
    }
    check_grid_starts_at_zero(t_grid)?;

    let mut ode_opts = opts.ode;
    if frame == Frame::Lab {
        // resolve the 2ω drive: at least ~16 steps per modulation period π/ω
        let drive_cap = cast::<T>(std::f64::consts::PI / 16.0);
        ode_opts.max_step = Some(match ode_opts.max_step {
            Some(cap) => cap.min(drive_cap),
            None => drive_cap,
        });
    }

    let hamiltonian = match frame {
        Frame::Effective => SparseHamiltonian::static_part(&effective_hamiltonian(params, space)),
        Frame::Lab => {
            let (h0, v) = lab_hamiltonian_parts(params, space);
            SparseHamiltonian::driven(&h0, &v, *params)
        }
    };

    let n_points = t_grid.len();
    let mut times = Vec::with_capacity(n_points);
    let mut states = Vec::new();
    let mut channels: Vec<Vec<T>> = opts
        .metrics
        .iter()
        .map(|_| Vec::with_capacity(n_points))
        .collect();
    let mut truncation = Vec::with_capacity(n_points);

    let pure0 = (params.is_closed() && opts.allow_pure_fast_path)
        .then(|| principal_pure_component(rho0))
        .flatten();

    let (stats, used_pure_path) = if let Some(psi0) = pure0 {
        let levels = space.fock_levels();
        let (_, stats) = schrodinger_evolve(
            &hamiltonian,
            &psi0,
            t_grid,
            &ode_opts,
            |_, t, psi: &CVector<T>| {
                times.push(t);
                let values = evaluate_metrics(StateRef::Pure { psi, space }, &opts.metrics);
                for (channel, v) in channels.iter_mut().zip(values) {
                    channel.push(v);
                }
                truncation.push(truncation_sample_pure(psi, levels));
                if opts.keep_states {
                    states.push(DensityMatrix::from_pure(space, psi)?);
                }
                Ok(())
            },
        )?;
        (stats, true)
    } else {
        let collapse = collapse_operators(params, space);
        let generator = LindbladGenerator::new(&hamiltonian, &collapse);
        let dim = space.dim();
        let mut work = CMatrix::<T>::zeros(dim, dim);
        let mut out_buf = CMatrix::<T>::zeros(dim, dim);
        let validation = opts.validation;
        let (_, stats) = integrate_grid(
            &ode_opts,
            move |t, rho: &CMatrix<T>| {
                generator.rhs_into(t, rho, &mut out_buf, &mut work);
                out_buf.clone()
            },
            rho0.matrix().clone(),
            t_grid,
            |rho: &mut CMatrix<T>| linalg::hermitize_in_place(rho),
            |_, t, rho: &CMatrix<T>| {
                times.push(t);
                let dm = DensityMatrix::from_matrix_unchecked(space, rho.clone());
                if validation.enabled {
                    let tr_err = dm.trace_error();
                    if tr_err > validation.trace_tol {
                        return Err(Error::IntegrationFailure(format!(
                            "trace error {tr_err:e} at t = {t:e}"
                        )));
                    }
                    if !linalg::is_psd_within(rho, validation.positivity_tol) {
                        return Err(Error::IntegrationFailure(format!(
                            "positivity violation beyond {:e} at t = {:e} \
                             (too-coarse tolerance or truncation overflow)",
                            validation.positivity_tol, t
                        )));
                    }
                }
                let values = evaluate_metrics(StateRef::Density(&dm), &opts.metrics);
                for (channel, v) in channels.iter_mut().zip(values) {
                    channel.push(v);
                }
                truncation.push(truncation_sample_density(&dm));
                if opts.keep_states {
                    states.push(dm);
                }
                Ok(())
            },
        )?;
        (stats, false)
    };

    Ok(Trajectory {
        times,
        states,
        observables: opts.metrics.iter().copied().zip(channels).collect(),
        truncation,
        stats,
        used_pure_path,
    })
}

/// Steady-state solver selection.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SteadyMethod {
    /// Integrate from the initial state until the residual criterion.
    LongTime,
    /// Null space of the sparse superoperator (desk-scale cross-check).
    NullSpace,
}

impl std::fmt::Display for SteadyMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SteadyMethod::LongTime => f.write_str("long-time-integration"),
            SteadyMethod::NullSpace => f.write_str("null-space"),
        }
    }
}

/// Configuration for [`steady_state`].
#[derive(Clone, Debug)]
pub struct SteadyOptions<T: Real> {
    /// Residual criterion on `‖dρ/dt‖_F`.
    pub tol: T,
    /// Integration horizon; default `50 / max(κ + γ, 1e-3)`.
    pub t_max: Option<T>,
    /// Residual check spacing for the long-time method.
    pub check_interval: T,
    pub ode: OdeOptions<T>,
    /// Jump ahead with geometric extrapolation across checkpoints whenever
    /// the extrapolated state halves the residual.
    pub extrapolate: bool,
    /// Cap on `dim²` for the null-space method.
    pub superop_cap: usize,
    /// Start state for the long-time method (default: joint ground state).
    pub initial: Option<DensityMatrix<T>>,
}

impl<T: Real> Default for SteadyOptions<T> {
    fn default() -> Self {
        SteadyOptions {
            tol: cast(1e-9),
            t_max: None,
            check_interval: cast(10.0),
            // the residual of the numerical fixed point floors at roughly the
            // per-step error injection rate, so integrate tighter than `tol`
            ode: OdeOptions::default().with_tolerances(cast(1e-10), cast(1e-12)),
            extrapolate: true,
            superop_cap: DEFAULT_SUPEROP_CAP,
            initial: None,
        }
    }
}

/// Outcome of a steady-state solve.
#[derive(Clone, Debug)]
pub struct SteadyStateResult<T: Real> {
    pub state: DensityMatrix<T>,
    /// `‖dρ/dt‖_F` of the returned state.
    pub residual: T,
    pub method: SteadyMethod,
    /// `residual ≤ tol`.
    pub converged: bool,
    /// Time integrated (long-time method only).
    pub time_integrated: Option<T>,
}

/// Frobenius norm of the effective-model right-hand side at `rho`.
pub fn steady_residual<T: Real>(params: &SystemParams<T>, rho: &DensityMatrix<T>) -> T {
    let space = params.space();
    let h = effective_hamiltonian(params, space);
    let collapse = collapse_operators(params, space);
    let generator = LindbladGenerator::new(&SparseHamiltonian::static_part(&h), &collapse);
    generator.residual_norm(rho.matrix())
}

fn geometric_extrapolate<T: Real>(history: &VecDeque<CMatrix<T>>) -> Option<CMatrix<T>> {
    let n = history.len();
    if n < 3 {
        return None;
    }
    let x0 = &history[n - 3];
    let x1 = &history[n - 2];
    let x2 = &history[n - 1];
    let mut num = C::new(T::zero(), T::zero());
    let mut den = T::zero();
    for ((a2, a1), a0) in x2.iter().zip(x1.iter()).zip(x0.iter()) {
        let d1 = a2 - a1;
        let d0 = a1 - a0;
        num += d0.conj() * d1;
        den += d0.norm_sqr();
    }
    if den <= T::default_epsilon() {
        return None;
    }
    let ratio = num / re(den);
    if crate::scalar::modulus(ratio) >= cast(0.995) {
        return None;
    }
    let one = C::new(T::one(), T::zero());
    let factor = ratio / (one - ratio);
    let mut candidate = x2.clone();
    for (c_entry, (a2, a1)) in candidate.iter_mut().zip(x2.iter().zip(x1.iter())) {
        *c_entry += (a2 - a1) * factor;
    }
    Some(candidate)
}

/// Solve for the steady state of the effective model.
///
/// Requires at least one nonzero dissipation rate; with every channel off the
/// closed dynamics has no unique stationary state.
pub fn steady_state<T: Real>(
    params: &SystemParams<T>,
    method: SteadyMethod,
    opts: &SteadyOptions<T>,
) -> Result<SteadyStateResult<T>> {
    params.validate()?;
    if params.is_closed() {
        return Err(Error::NoUniqueSteadyState);
    }
    let space = params.space();
    let h = effective_hamiltonian(params, space);
    let collapse = collapse_operators(params, space);
    let generator = LindbladGenerator::new(&SparseHamiltonian::static_part(&h), &collapse);

    match method {
        SteadyMethod::NullSpace => {
            let lv = Liouvillian::from_parts(&h, &collapse, opts.superop_cap)?;
            let rho = lv.steady_state_null_space()?;
            let state = DensityMatrix::from_matrix_unchecked(space, rho);
            state.validate(&crate::hilbert::ValidationTolerances::default())?;
            let residual = generator.residual_norm(state.matrix());
            Ok(SteadyStateResult {
                converged: residual <= opts.tol,
                residual,
                state,
                method,
                time_integrated: None,
            })
        }
        SteadyMethod::LongTime => {
            let floor = cast::<T>(1e-3);
            let rate = (params.kappa + params.gamma).max(floor);
            let t_max = opts.t_max.unwrap_or(cast::<T>(50.0) / rate);
            let mut rho = opts
                .initial
                .as_ref()
                .map(|dm| dm.matrix().clone())
                .unwrap_or_else(|| DensityMatrix::ground(space).into_matrix());
            let dim = space.dim();
            let mut work = CMatrix::<T>::zeros(dim, dim);
            let mut out_buf = CMatrix::<T>::zeros(dim, dim);
            let mut residual = generator.residual_norm(&rho);
            let mut t = T::zero();
            let mut history: VecDeque<CMatrix<T>> = VecDeque::with_capacity(4);
            history.push_back(rho.clone());
            let mut ode_opts = opts.ode;
            let mut best_recent = residual;
            let mut checks_since_progress = 0usize;

            while t < t_max && residual > opts.tol {
                let t_next = (t + opts.check_interval).min(t_max);
                let grid = [t, t_next];
                let (next, stats) = integrate_grid(
                    &ode_opts,
                    |tt, m: &CMatrix<T>| {
                        generator.rhs_into(tt, m, &mut out_buf, &mut work);
                        out_buf.clone()
                    },
                    rho,
                    &grid,
                    |m: &mut CMatrix<T>| linalg::hermitize_in_place(m),
                    |_, _, _| Ok(()),
                )?;
                rho = next;
                t = t_next;
                ode_opts.initial_step = Some(stats.final_step);
                residual = generator.residual_norm(&rho);

                if history.len() == 4 {
                    history.pop_front();
                }
                history.push_back(rho.clone());

                // stop early once the residual stops improving: the iterate
                // has reached the integrator's fixed-point accuracy floor
                if residual < best_recent * cast(0.9) {
                    best_recent = residual;
                    checks_since_progress = 0;
                } else {
                    checks_since_progress += 1;
                    if checks_since_progress >= 30 {
                        break;
                    }
                }

                if opts.extrapolate && residual > opts.tol {
                    if let Some(mut candidate) = geometric_extrapolate(&history) {
                        linalg::hermitize_in_place(&mut candidate);
                        let tr: T = (0..dim)
                            .map(|k| candidate[(k, k)].re)
                            .fold(T::zero(), |a, b| a + b);
                        if tr > cast(0.5) {
                            candidate /= re(tr);
                            if linalg::is_psd_within(&candidate, cast(1e-9)) {
                                let cand_residual = generator.residual_norm(&candidate);
                                if cand_residual < residual * cast(0.5) {
                                    rho = candidate;
                                    residual = cand_residual;
                                    history.clear();
                                    history.push_back(rho.clone());
                                }
                            }
                        }
                    }
                }
            }

            linalg::hermitize_in_place(&mut rho);
            let tr: T = (0..dim).map(|k| rho[(k, k)].re).fold(T::zero(), |a, b| a + b);
            rho /= re(tr);
            let state = DensityMatrix::from_matrix_unchecked(space, rho);
            state.validate(&crate::hilbert::ValidationTolerances::default())?;
            let residual = generator.residual_norm(state.matrix());
            Ok(SteadyStateResult {
                converged: residual <= opts.tol,
                residual,
                state,
                method,
                time_integrated: Some(t),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{HilbertSpec, Spin};
    use crate::scalar::{c, frobenius_norm, max_abs_diff};
    use approx::assert_relative_eq;

    fn grid(t_end: f64, points: usize) -> Vec<f64> {
        (0..=points)
            .map(|k| t_end * k as f64 / points as f64)
            .collect()
    }

    #[test]
    fn tc_ground_state_is_frozen() {
        let p = SystemParams::new(0.05, 1.0, 0.0, 0.0, 0.0, 3).unwrap();
        let rho0 = DensityMatrix::<f64>::ground(p.space());
        for fast in [true, false] {
            let opts = EvolveOptions {
                allow_pure_fast_path: fast,
                ..Default::default()
            };
            let traj = evolve(&rho0, &p, &grid(60.0, 12), Frame::Effective, &opts).unwrap();
            assert_eq!(traj.used_pure_path, fast);
            for state in &traj.states {
                assert!(max_abs_diff(state.matrix(), rho0.matrix()) < 1e-9);
            }
            let conc = traj.observable(MetricKind::Concurrence).unwrap();
            assert!(conc.iter().all(|&v| v < 1e-9));
        }
    }

    #[test]
    fn half_theta_matches_closed_forms() {
        let p = SystemParams::new(0.05, 0.5, 0.0, 0.0, 0.0, 20).unwrap();
        let rho0 = DensityMatrix::<f64>::ground(p.space());
        let mut opts = EvolveOptions::<f64>::default();
        opts.metrics = vec![
            MetricKind::PopulationUpUp,
            MetricKind::PopulationDownDown,
            MetricKind::PopulationUpDown,
            MetricKind::PhotonNumber,
            MetricKind::Concurrence,
        ];
        opts.keep_states = false;
        let t_grid = grid(30.0, 30); // up to g·t = 1.5
        let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
        assert!(traj.used_pure_path);
        assert!(traj.max_top_population() < 1e-8);
        for (k, &t) in t_grid.iter().enumerate() {
            let exact = crate::analytic::half_theta_closed_forms(p.g, t);
            let uu = traj.observable(MetricKind::PopulationUpUp).unwrap()[k];
            let dd = traj.observable(MetricKind::PopulationDownDown).unwrap()[k];
            let ud = traj.observable(MetricKind::PopulationUpDown).unwrap()[k];
            let nph = traj.observable(MetricKind::PhotonNumber).unwrap()[k];
            let conc = traj.observable(MetricKind::Concurrence).unwrap()[k];
            assert!((uu - exact.pop_up_up).abs() < 1e-6, "t={t}");
            assert!((dd - exact.pop_down_down).abs() < 1e-6, "t={t}");
            assert!((ud - exact.pop_up_down).abs() < 1e-6, "t={t}");
            assert!((nph - exact.n_ph).abs() < 1e-6, "t={t}");
            assert!(conc < 1e-6, "t={t}: C = {conc}");
        }
    }

    #[test]
    fn dephasing_decays_coherence_at_2_gamma_phi() {
        // the analytic oracle fixing the Lindblad normalization
        let p = SystemParams::new(0.0, 1.0, 0.0, 0.0, 0.005, 1).unwrap();
        let space = p.space();
        let mut psi = crate::scalar::CVector::<f64>::zeros(space.dim());
        psi[space.encode(Spin::Up, Spin::Down, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[space.encode(Spin::Down, Spin::Down, 0)] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho0 = DensityMatrix::from_pure(space, &psi).unwrap();
        let t_grid = grid(120.0, 12);
        let traj = evolve(
            &rho0,
            &p,
            &t_grid,
            Frame::Effective,
            &EvolveOptions::default(),
        )
        .unwrap();
        assert!(!traj.used_pure_path);
        let up = space.encode(Spin::Up, Spin::Down, 0);
        let down = space.encode(Spin::Down, Spin::Down, 0);
        for (k, &t) in t_grid.iter().enumerate() {
            let coh = traj.states[k].matrix()[(up, down)].re;
            let expect = 0.5 * (-2.0 * p.gamma_phi * t).exp();
            assert!((coh - expect).abs() < 1e-7, "t={t}: {coh} vs {expect}");
        }
    }

    #[test]
    fn photon_number_relaxes_at_kappa() {
        let p = SystemParams::new(0.0, 1.0, 0.02, 0.0, 0.0, 2).unwrap();
        let space = p.space();
        let rho0 =
            DensityMatrix::from_pure(space, &space.basis_ket(Spin::Down, Spin::Down, 1)).unwrap();
        let mut opts = EvolveOptions::<f64>::default();
        opts.metrics = vec![MetricKind::PhotonNumber];
        let t_grid = grid(200.0, 20);
        let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
        for (k, &t) in t_grid.iter().enumerate() {
            let nph = traj.observable(MetricKind::PhotonNumber).unwrap()[k];
            assert!((nph - (-p.kappa * t).exp()).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn density_path_agrees_with_wavefunction_oracle() {
        let p = SystemParams::new(0.05, 0.3, 0.0, 0.0, 0.0, 6).unwrap();
        let space = p.space();
        let rho0 = DensityMatrix::<f64>::ground(space);
        let t_grid = grid(40.0, 8);
        let opts = EvolveOptions {
            allow_pure_fast_path: false,
            ..Default::default()
        };
        let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
        assert!(!traj.used_pure_path);

        let h = effective_hamiltonian(&p, space);
        let ham = SparseHamiltonian::static_part(&h);
        let psi0 = space.basis_ket::<f64>(Spin::Down, Spin::Down, 0);
        let mut overlaps = Vec::new();
        schrodinger_evolve(
            &ham,
            &psi0,
            &t_grid,
            &OdeOptions::default(),
            |k, _, psi| {
                let rho = traj.states[k].matrix();
                let overlap = psi.dotc(&(rho * psi)).re;
                overlaps.push(overlap);
                Ok(())
            },
        )
        .unwrap();
        for (k, overlap) in overlaps.iter().enumerate() {
            assert!(
                (overlap - 1.0).abs() < 1e-6,
                "overlap {overlap} at point {k}"
            );
            assert!((traj.states[k].purity() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn trajectory_invariants_under_dissipation() {
        let p = SystemParams::new(0.05, 0.6, 0.02, 0.01, 0.002, 6).unwrap();
        let rho0 = DensityMatrix::<f64>::ground(p.space());
        let traj = evolve(
            &rho0,
            &p,
            &grid(150.0, 15),
            Frame::Effective,
            &EvolveOptions::default(),
        )
        .unwrap();
        for state in &traj.states {
            assert!(state.trace_error() < 1e-7);
            assert!(state.hermiticity_error() < 1e-10);
            assert!(state.purity() <= 1.0 + 1e-9);
            assert!(state.min_eigenvalue() > -1e-7);
        }
    }

    #[test]
    fn grid_must_start_at_zero() {
        let p = SystemParams::new(0.05, 0.5, 0.0, 0.0, 0.0, 2).unwrap();
        let rho0 = DensityMatrix::<f64>::ground(p.space());
        let err = evolve(
            &rho0,
            &p,
            &[1.0, 2.0],
            Frame::Effective,
            &EvolveOptions::default(),
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn lab_and_effective_frames_agree_on_concurrence() {
        let p = SystemParams::new(0.05, 0.8, 0.0, 0.0, 0.0, 4).unwrap();
        let rho0 = DensityMatrix::<f64>::ground(p.space());
        let t_grid = grid(40.0, 20);
        let mut opts = EvolveOptions::<f64>::default();
        opts.metrics = vec![MetricKind::Concurrence];
        opts.keep_states = false;
        let eff = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
        let lab = evolve(&rho0, &p, &t_grid, Frame::Lab, &opts).unwrap();
        let ce = eff.observable(MetricKind::Concurrence).unwrap();
        let cl = lab.observable(MetricKind::Concurrence).unwrap();
        for (a, b) in ce.iter().zip(cl.iter()) {
            assert!((a - b).abs() < 0.05, "effective {a} vs lab {b}");
        }
    }

    #[test]
    fn steady_state_requires_dissipation() {
        let p = SystemParams::new(0.05, 0.5, 0.0, 0.0, 0.0, 2).unwrap();
        assert!(matches!(
            steady_state(&p, SteadyMethod::LongTime, &SteadyOptions::default()),
            Err(Error::NoUniqueSteadyState)
        ));
    }

    #[test]
    fn tc_steady_state_is_ground_state() {
        let p = SystemParams::new(0.05, 1.0, 0.015, 0.008, 0.0, 2).unwrap();
        let ground = DensityMatrix::<f64>::ground(p.space());
        for method in [SteadyMethod::LongTime, SteadyMethod::NullSpace] {
            let result = steady_state(&p, method, &SteadyOptions::default()).unwrap();
            assert!(result.converged, "{method}: residual {}", result.residual);
            assert!(
                max_abs_diff(result.state.matrix(), ground.matrix()) < 1e-7,
                "{method}"
            );
        }
    }

    #[test]
    fn methods_cross_validate() {
        let p = SystemParams::new(0.06, 0.75, 0.05, 0.03, 0.005, 3).unwrap();
        let null = steady_state(&p, SteadyMethod::NullSpace, &SteadyOptions::default()).unwrap();
        let long = steady_state(&p, SteadyMethod::LongTime, &SteadyOptions::default()).unwrap();
        assert!(null.converged);
        assert!(long.converged, "long-time residual {:e}", long.residual);
        let diff = frobenius_norm(&(null.state.matrix() - long.state.matrix()));
        assert!(diff <= 1e-6, "‖Δρ‖_F = {diff:e}");
    }

    #[test]
    fn unconverged_run_is_flagged() {
        let p = SystemParams::new(0.05, 0.7, 0.01, 0.01, 0.0, 3).unwrap();
        let opts = SteadyOptions {
            t_max: Some(5.0),
            ..Default::default()
        };
        let result = steady_state(&p, SteadyMethod::LongTime, &opts).unwrap();
        assert!(!result.converged);
        assert!(result.residual > opts.tol);
        assert_relative_eq!(result.time_integrated.unwrap(), 5.0);
        let _ = HilbertSpec::new(1).unwrap();
    }
}
