//! 2-D parameter sweeps: time-θ evolution maps and steady-state maps over
//! (θ, κ), with per-cell convergence and truncation flags.
//!
//! Cells are independent and evaluated in parallel; results are stored in a
//! fixed y-major order regardless of scheduling, so repeated runs produce
//! bit-identical output at any thread count.

use rayon::prelude::*;

use crate::dynamics::{
    evolve, steady_state, EvolveOptions, Frame, SteadyMethod, SteadyOptions, Trajectory,
};
use crate::error::Result;
use crate::hilbert::DensityMatrix;
use crate::metrics::{evaluate_metrics, MetricKind, StateRef};
use crate::model::SystemParams;
use crate::scalar::{cast, Real};

/// A named, ordered set of grid values for one sweep axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisSpec<T: Real> {
    pub name: String,
    pub values: Vec<T>,
}

impl<T: Real> AxisSpec<T> {
    pub fn new(name: impl Into<String>, values: Vec<T>) -> Self {
        AxisSpec {
            name: name.into(),
            values,
        }
    }

    /// Uniform grid of `count ≥ 1` points from `start` to `stop` inclusive.
    pub fn linspace(name: impl Into<String>, start: T, stop: T, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(crate::error::Error::invalid_argument(
                "axis needs at least one point".to_string(),
            ));
        }
        let values = if count == 1 {
            vec![start]
        } else {
            let step = (stop - start) / cast::<T>((count - 1) as f64);
            (0..count)
                .map(|k| start + step * cast::<T>(k as f64))
                .collect()
        };
        Ok(AxisSpec {
            name: name.into(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Quality flag attached to every sweep cell.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CellStatus {
    Ok,
    /// The state reached the Fock-truncation ceiling; values beyond this
    /// point reflect the truncated model, not the physical one.
    TruncationWarning,
    /// The steady-state residual criterion was not met within the horizon.
    NotConverged,
    /// The solver failed outright; values are NaN.
    Failed,
}

impl CellStatus {
    pub fn is_ok(self) -> bool {
        self == CellStatus::Ok
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::TruncationWarning => "truncation-warning",
            CellStatus::NotConverged => "not-converged",
            CellStatus::Failed => "failed",
        }
    }
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CellStatus {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(CellStatus::Ok),
            "truncation-warning" => Ok(CellStatus::TruncationWarning),
            "not-converged" => Ok(CellStatus::NotConverged),
            "failed" => Ok(CellStatus::Failed),
            other => Err(crate::error::Error::invalid_argument(format!(
                "unknown cell status '{other}'"
            ))),
        }
    }
}

/// Scalar results on an x × y grid, one value per cell per metric channel.
#[derive(Clone, Debug)]
pub struct SweepGrid<T: Real> {
    pub x: AxisSpec<T>,
    pub y: AxisSpec<T>,
    /// Per-channel cell values in y-major order (`index = iy·nx + ix`).
    pub channels: Vec<(MetricKind, Vec<T>)>,
    /// Per-cell flags, same order.
    pub status: Vec<CellStatus>,
}

impl<T: Real> SweepGrid<T> {
    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx() && iy < self.ny());
        iy * self.nx() + ix
    }

    pub fn channel(&self, kind: MetricKind) -> Option<&[T]> {
        self.channels
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, v)| v.as_slice())
    }

    pub fn value(&self, kind: MetricKind, ix: usize, iy: usize) -> Option<T> {
        self.channel(kind).map(|v| v[self.index(ix, iy)])
    }

    pub fn status_at(&self, ix: usize, iy: usize) -> CellStatus {
        self.status[self.index(ix, iy)]
    }

    /// Maximum of a channel over cells with `Ok` status, with its location.
    pub fn max_over_ok(&self, kind: MetricKind) -> Option<(T, usize, usize)> {
        let values = self.channel(kind)?;
        let mut best: Option<(T, usize, usize)> = None;
        for iy in 0..self.ny() {
            for ix in 0..self.nx() {
                let idx = iy * self.nx() + ix;
                if !self.status[idx].is_ok() {
                    continue;
                }
                let v = values[idx];
                if best.map_or(true, |(b, _, _)| v > b) {
                    best = Some((v, ix, iy));
                }
            }
        }
        best
    }
}

/// Options for [`time_theta_map`].
#[derive(Clone, Debug)]
pub struct TimeThetaOptions<T: Real> {
    pub evolve: EvolveOptions<T>,
    pub frame: Frame,
    /// Flag cells once the top Fock-level population first exceeds this.
    pub truncation_top_tol: T,
}

impl<T: Real> Default for TimeThetaOptions<T> {
    fn default() -> Self {
        let mut evolve = EvolveOptions::default();
        evolve.keep_states = false;
        TimeThetaOptions {
            evolve,
            frame: Frame::Effective,
            truncation_top_tol: cast(1e-6),
        }
    }
}

/// Evolution map over a time × θ grid: one trajectory per θ row from the
/// joint ground state, sampled on `time_axis`.
///
/// Failed rows are filled with NaN and flagged; once a row touches the
/// truncation ceiling every later cell of that row carries
/// [`CellStatus::TruncationWarning`].
pub fn time_theta_map<T: Real>(
    template: &SystemParams<T>,
    time_axis: &AxisSpec<T>,
    theta_axis: &AxisSpec<T>,
    metrics: &[MetricKind],
    opts: &TimeThetaOptions<T>,
) -> SweepGrid<T> {
    let nx = time_axis.len();
    let mut evolve_opts = opts.evolve.clone();
    evolve_opts.metrics = metrics.to_vec();
    evolve_opts.keep_states = false;

    struct Row<T: Real> {
        values: Vec<Vec<T>>,
        status: Vec<CellStatus>,
    }

    let rows: Vec<Row<T>> = theta_axis
        .values
        .par_iter()
        .map(|&theta| {
            let params = template.with_theta(theta);
            let rho0 = DensityMatrix::ground(params.space());
            match evolve(&rho0, &params, &time_axis.values, opts.frame, &evolve_opts) {
                Ok(traj) => {
                    let mut status = vec![CellStatus::Ok; nx];
                    let mut ceiling_hit = false;
                    for (k, sample) in traj.truncation.iter().enumerate() {
                        if sample.top > opts.truncation_top_tol {
                            ceiling_hit = true;
                        }
                        if ceiling_hit {
                            status[k] = CellStatus::TruncationWarning;
                        }
                    }
                    let values = metrics
                        .iter()
                        .map(|&kind| traj.observable(kind).expect("requested metric").to_vec())
                        .collect();
                    Row { values, status }
                }
                Err(err) => {
                    log::warn!("time-theta row θ = {theta:e} failed: {err}");
                    Row {
                        values: vec![vec![cast(f64::NAN); nx]; metrics.len()],
                        status: vec![CellStatus::Failed; nx],
                    }
                }
            }
        })
        .collect();

    let mut channels: Vec<(MetricKind, Vec<T>)> = metrics
        .iter()
        .map(|&k| (k, Vec::with_capacity(nx * theta_axis.len())))
        .collect();
    let mut status = Vec::with_capacity(nx * theta_axis.len());
    for row in rows {
        for (ci, (_, channel)) in channels.iter_mut().enumerate() {
            channel.extend_from_slice(&row.values[ci]);
        }
        status.extend_from_slice(&row.status);
    }

    SweepGrid {
        x: time_axis.clone(),
        y: theta_axis.clone(),
        channels,
        status,
    }
}

/// Options for [`steady_map`].
#[derive(Clone, Debug)]
pub struct SteadyMapOptions<T: Real> {
    pub steady: SteadyOptions<T>,
    pub method: SteadyMethod,
    /// Flag cells whose steady state leans on the truncation ceiling.
    pub truncation_top_tol: T,
}

impl<T: Real> Default for SteadyMapOptions<T> {
    fn default() -> Self {
        SteadyMapOptions {
            steady: SteadyOptions::default(),
            method: SteadyMethod::LongTime,
            truncation_top_tol: cast(1e-6),
        }
    }
}

/// Steady-state map over a κ × θ grid.
pub fn steady_map<T: Real>(
    template: &SystemParams<T>,
    kappa_axis: &AxisSpec<T>,
    theta_axis: &AxisSpec<T>,
    metrics: &[MetricKind],
    opts: &SteadyMapOptions<T>,
) -> SweepGrid<T> {
    let nx = kappa_axis.len();
    let ny = theta_axis.len();

    let cells: Vec<(Vec<T>, CellStatus)> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let ix = idx % nx;
            let iy = idx / nx;
            let params = template
                .with_theta(theta_axis.values[iy])
                .with_kappa(kappa_axis.values[ix]);
            match steady_state(&params, opts.method, &opts.steady) {
                Ok(result) => {
                    let values = evaluate_metrics(StateRef::Density(&result.state), metrics);
                    let top = result.state.top_fock_population();
                    let status = if !result.converged {
                        CellStatus::NotConverged
                    } else if top > opts.truncation_top_tol {
                        CellStatus::TruncationWarning
                    } else {
                        CellStatus::Ok
                    };
                    (values, status)
                }
                Err(err) => {
                    log::warn!(
                        "steady cell θ = {:e}, κ = {:e} failed: {err}",
                        theta_axis.values[iy],
                        kappa_axis.values[ix]
                    );
                    (vec![cast(f64::NAN); metrics.len()], CellStatus::Failed)
                }
            }
        })
        .collect();

    let mut channels: Vec<(MetricKind, Vec<T>)> = metrics
        .iter()
        .map(|&k| (k, Vec::with_capacity(nx * ny)))
        .collect();
    let mut status = Vec::with_capacity(nx * ny);
    for (values, cell_status) in cells {
        for (ci, (_, channel)) in channels.iter_mut().enumerate() {
            channel.push(values[ci]);
        }
        status.push(cell_status);
    }

    SweepGrid {
        x: kappa_axis.clone(),
        y: theta_axis.clone(),
        channels,
        status,
    }
}

/// What a truncation ladder evaluates at each `n_max`.
#[derive(Clone, Debug)]
pub enum ConvergenceTarget<T: Real> {
    /// Maximum of the metric over an evolution window sampled at `samples`
    /// points up to `t_max`.
    EvolveMax { t_max: T, samples: usize, frame: Frame },
    /// The metric evaluated on the steady state.
    SteadyState,
}

/// Options for [`truncation_convergence`].
#[derive(Clone, Debug)]
pub struct TruncationOptions<T: Real> {
    pub evolve: EvolveOptions<T>,
    pub steady: SteadyOptions<T>,
    /// Successive metric values must agree within this.
    pub value_tol: T,
    /// Top-two Fock populations must stay below this.
    pub population_tol: T,
}

impl<T: Real> Default for TruncationOptions<T> {
    fn default() -> Self {
        let mut evolve = EvolveOptions::default();
        evolve.keep_states = false;
        TruncationOptions {
            evolve,
            steady: SteadyOptions::default(),
            value_tol: cast(1e-4),
            population_tol: cast(1e-6),
        }
    }
}

/// Result of a Fock-cutoff ladder.
#[derive(Clone, Debug)]
pub struct TruncationReport<T: Real> {
    pub n_max: Vec<usize>,
    /// Metric value at each `n_max`.
    pub values: Vec<T>,
    /// Largest (top, second) Fock populations seen at each `n_max`.
    pub top_two: Vec<(T, T)>,
    /// `Some(true)` when the last two values agree within `value_tol` and the
    /// final top-two populations are below `population_tol`; `None` when the
    /// ladder has fewer than two rungs (undetermined).
    pub converged: Option<bool>,
}

impl<T: Real> TruncationReport<T> {
    /// First `n_max` at which the ladder had already converged, if any.
    pub fn converged_n_max(&self, value_tol: T, population_tol: T) -> Option<usize> {
        for k in 1..self.n_max.len() {
            let (top, second) = self.top_two[k];
            if (self.values[k] - self.values[k - 1]).abs() < value_tol
                && top < population_tol
                && second < population_tol
            {
                return Some(self.n_max[k]);
            }
        }
        None
    }
}

/// Run the same computation across a ladder of Fock truncations and report
/// per-rung metric values and truncation diagnostics.
pub fn truncation_convergence<T: Real>(
    template: &SystemParams<T>,
    metric: MetricKind,
    n_max_list: &[usize],
    target: &ConvergenceTarget<T>,
    opts: &TruncationOptions<T>,
) -> Result<TruncationReport<T>> {
    let mut values = Vec::with_capacity(n_max_list.len());
    let mut top_two = Vec::with_capacity(n_max_list.len());
    for &n_max in n_max_list {
        let params = template.with_n_max(n_max);
        params.validate()?;
        match target {
            ConvergenceTarget::EvolveMax {
                t_max,
                samples,
                frame,
            } => {
                let mut evolve_opts = opts.evolve.clone();
                evolve_opts.metrics = vec![metric];
                evolve_opts.keep_states = false;
                let t_grid: Vec<T> = (0..=*samples)
                    .map(|k| *t_max * cast::<T>(k as f64) / cast::<T>(*samples as f64))
                    .collect();
                let rho0 = DensityMatrix::ground(params.space());
                let traj: Trajectory<T> = evolve(&rho0, &params, &t_grid, *frame, &evolve_opts)?;
                let peak = traj
                    .observable(metric)
                    .expect("requested metric")
                    .iter()
                    .copied()
                    .fold(T::zero(), |a, b| if b > a { b } else { a });
                values.push(peak);
                let top = traj
                    .truncation
                    .iter()
                    .map(|s| s.top)
                    .fold(T::zero(), |a, b| if b > a { b } else { a });
                let second = traj
                    .truncation
                    .iter()
                    .map(|s| s.second)
                    .fold(T::zero(), |a, b| if b > a { b } else { a });
                top_two.push((top, second));
            }
            ConvergenceTarget::SteadyState => {
                let result = steady_state(&params, SteadyMethod::LongTime, &opts.steady)?;
                let v = evaluate_metrics(StateRef::Density(&result.state), &[metric])[0];
                values.push(v);
                let levels = params.space().fock_levels();
                let top = result.state.fock_population(levels - 1);
                let second = if levels >= 2 {
                    result.state.fock_population(levels - 2)
                } else {
                    T::zero()
                };
                top_two.push((top, second));
            }
        }
    }

    let converged = if n_max_list.len() < 2 {
        None
    } else {
        let k = values.len() - 1;
        let (top, second) = top_two[k];
        Some(
            (values[k] - values[k - 1]).abs() < opts.value_tol
                && top < opts.population_tol
                && second < opts.population_tol,
        )
    };

    Ok(TruncationReport {
        n_max: n_max_list.to_vec(),
        values,
        top_two,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> SystemParams<f64> {
        SystemParams::new(0.05, 0.5, 0.0, 0.0, 0.0, 8).unwrap()
    }

    fn time_axis(t_end: f64, points: usize) -> AxisSpec<f64> {
        AxisSpec::linspace("time", 0.0, t_end, points).unwrap()
    }

    #[test]
    fn linspace_endpoints() {
        let axis = AxisSpec::<f64>::linspace("x", 0.0, 1.0, 11).unwrap();
        assert_eq!(axis.len(), 11);
        assert_eq!(axis.values[0], 0.0);
        assert_eq!(axis.values[10], 1.0);
        assert!((axis.values[3] - 0.3).abs() < 1e-15);
        assert!(AxisSpec::<f64>::linspace("x", 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn map_is_deterministic_and_cells_are_independent() {
        let thetas = AxisSpec::new("theta", vec![0.3, 0.5, 0.8]);
        let times = time_axis(40.0, 20);
        let metrics = [MetricKind::Concurrence, MetricKind::PhotonNumber];
        let opts = TimeThetaOptions::default();
        let a = time_theta_map(&template(), &times, &thetas, &metrics, &opts);
        let b = time_theta_map(&template(), &times, &thetas, &metrics, &opts);
        for ((_, va), (_, vb)) in a.channels.iter().zip(b.channels.iter()) {
            assert!(va.iter().zip(vb.iter()).all(|(x, y)| x == y), "not bit-identical");
        }

        // recompute the θ = 0.8 row in isolation
        let single = AxisSpec::new("theta", vec![0.8]);
        let solo = time_theta_map(&template(), &times, &single, &metrics, &opts);
        for ix in 0..times.len() {
            assert_eq!(
                solo.value(MetricKind::Concurrence, ix, 0),
                a.value(MetricKind::Concurrence, ix, 2)
            );
        }
    }

    #[test]
    fn half_theta_row_has_zero_concurrence_and_tc_row_is_frozen() {
        let thetas = AxisSpec::new("theta", vec![0.5, 1.0]);
        let times = time_axis(40.0, 30);
        let metrics = [MetricKind::Concurrence, MetricKind::PhotonNumber];
        let grid = time_theta_map(
            &template().with_n_max(20),
            &times,
            &thetas,
            &metrics,
            &TimeThetaOptions::default(),
        );
        for ix in 0..times.len() {
            assert!(grid.value(MetricKind::Concurrence, ix, 0).unwrap() < 1e-6);
            // θ = 1: nothing moves
            assert!(grid.value(MetricKind::Concurrence, ix, 1).unwrap() < 1e-9);
            assert!(grid.value(MetricKind::PhotonNumber, ix, 1).unwrap() < 1e-9);
        }
        assert!(grid.status.iter().all(|s| s.is_ok()));
    }

    #[test]
    fn truncation_ceiling_is_flagged() {
        // θ = 0.5 grows photons without bound; a tiny n_max must get flagged
        let thetas = AxisSpec::new("theta", vec![0.5]);
        let times = time_axis(120.0, 40);
        let grid = time_theta_map(
            &template().with_n_max(3),
            &times,
            &thetas,
            &[MetricKind::PhotonNumber],
            &TimeThetaOptions::default(),
        );
        assert!(grid
            .status
            .iter()
            .any(|s| *s == CellStatus::TruncationWarning));
        // early cells are fine, late ones flagged
        assert!(grid.status_at(0, 0).is_ok());
        assert_eq!(
            grid.status_at(times.len() - 1, 0),
            CellStatus::TruncationWarning
        );
    }

    #[test]
    fn steady_map_smoke() {
        let template = SystemParams::new(0.05, 0.8, 0.0, 0.02, 0.0, 4).unwrap();
        let kappas = AxisSpec::new("kappa", vec![0.01, 0.05]);
        let thetas = AxisSpec::new("theta", vec![0.8, 1.0]);
        let opts = SteadyMapOptions {
            steady: SteadyOptions {
                tol: 1e-8,
                ..Default::default()
            },
            ..Default::default()
        };
        let grid = steady_map(
            &template,
            &kappas,
            &thetas,
            &[MetricKind::Concurrence, MetricKind::PhotonNumber],
            &opts,
        );
        // θ = 1 rows: ground steady state regardless of κ
        for ix in 0..2 {
            assert!(grid.value(MetricKind::PhotonNumber, ix, 1).unwrap() < 1e-6);
            assert!(grid.value(MetricKind::Concurrence, ix, 1).unwrap() < 1e-6);
        }
        assert!(grid.status.iter().all(|s| *s != CellStatus::Failed));
    }

    #[test]
    fn truncation_ladder_converges_in_weak_drive() {
        let p = SystemParams::new(0.05, 0.9, 0.0, 0.0, 0.0, 4).unwrap();
        let report = truncation_convergence(
            &p,
            MetricKind::Concurrence,
            &[4, 6, 8],
            &ConvergenceTarget::EvolveMax {
                t_max: 80.0,
                samples: 40,
                frame: Frame::Effective,
            },
            &TruncationOptions::default(),
        )
        .unwrap();
        assert_eq!(report.converged, Some(true), "report: {report:?}");
        assert!(report.converged_n_max(1e-4, 1e-6).is_some());
    }

    #[test]
    fn single_rung_ladder_is_undetermined() {
        let p = SystemParams::new(0.05, 0.9, 0.0, 0.0, 0.0, 4).unwrap();
        let report = truncation_convergence(
            &p,
            MetricKind::Concurrence,
            &[6],
            &ConvergenceTarget::EvolveMax {
                t_max: 20.0,
                samples: 10,
                frame: Frame::Effective,
            },
            &TruncationOptions::default(),
        )
        .unwrap();
        assert_eq!(report.converged, None);
    }
}
