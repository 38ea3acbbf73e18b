//! The `verify` subcommand: a quick oracle suite pitting the numerical engine
//! against closed forms and cross-validating the two steady-state solvers,
//! printed as a pass/fail table. Exit status 0 only if every check passes.
//!
//! The heavyweight acceptance suite lives in the library's integration tests;
//! this is the fast field check.

use anyhow::Result;
use parqed::analytic;
use parqed::dynamics::{
    evolve, schrodinger_evolve, steady_state, EvolveOptions, Frame, OdeOptions, SparseHamiltonian,
    SteadyMethod, SteadyOptions,
};
use parqed::hilbert::{DensityMatrix, Spin};
use parqed::metrics::MetricKind;
use parqed::model::{drive_value, effective_hamiltonian, fourier_components, SystemParams};
use parqed::scalar::{frobenius_norm, CVector};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn grid(t_end: f64, points: usize) -> Vec<f64> {
    (0..=points)
        .map(|k| t_end * k as f64 / points as f64)
        .collect()
}

fn check_half_theta() -> Check {
    let p = SystemParams::new(0.05, 0.5, 0.0, 0.0, 0.0, 24).unwrap();
    let rho0 = DensityMatrix::ground(p.space());
    let t_grid = grid(2.0 / p.g, 40);
    let mut opts = EvolveOptions::<f64>::default();
    opts.metrics = vec![
        MetricKind::PopulationUpUp,
        MetricKind::PopulationDownDown,
        MetricKind::PhotonNumber,
        MetricKind::Concurrence,
    ];
    opts.keep_states = false;
    let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    for (k, &t) in t_grid.iter().enumerate() {
        let exact = analytic::half_theta_closed_forms(p.g, t);
        worst = worst
            .max((traj.observable(MetricKind::PopulationUpUp).unwrap()[k] - exact.pop_up_up).abs())
            .max(
                (traj.observable(MetricKind::PopulationDownDown).unwrap()[k]
                    - exact.pop_down_down)
                    .abs(),
            )
            .max((traj.observable(MetricKind::PhotonNumber).unwrap()[k] - exact.n_ph).abs());
        worst_c = worst_c.max(traj.observable(MetricKind::Concurrence).unwrap()[k]);
    }
    Check {
        name: "theta=1/2 closed forms (populations, n_ph, C=0)",
        passed: worst <= 1e-4 && worst_c <= 1e-6,
        detail: format!("worst error {worst:.2e}, max C {worst_c:.1e}"),
    }
}

fn check_tc_oracle() -> Check {
    let theta = 0.95;
    let p = SystemParams::new(0.05, theta, 0.0, 0.0, 0.0, 6).unwrap();
    let rho0 = DensityMatrix::ground(p.space());
    let period = 2.0 * std::f64::consts::PI / (6.0_f64.sqrt() * p.g * theta);
    let t_grid = grid(3.0 * period, 200);
    let mut opts = EvolveOptions::<f64>::default();
    opts.metrics = vec![MetricKind::Concurrence];
    opts.keep_states = false;
    let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
    let c = traj.observable(MetricKind::Concurrence).unwrap();
    let worst = t_grid
        .iter()
        .zip(c.iter())
        .map(|(&t, &v)| (v - analytic::tc_concurrence(theta, p.g, t)).abs())
        .fold(0.0_f64, f64::max);
    Check {
        name: "near-TC perturbative concurrence (theta=0.95)",
        passed: worst <= 0.02,
        detail: format!("worst |dC| {worst:.2e} (band 0.02)"),
    }
}

fn check_atc_oracle() -> Check {
    let theta = 0.16;
    let p = SystemParams::new(0.05, theta, 0.0, 0.0, 0.0, 10).unwrap();
    let rho0 = DensityMatrix::ground(p.space());
    let period = 2.0 * std::f64::consts::PI / (6.0_f64.sqrt() * p.g * (1.0 - theta));
    let t_grid = grid(2.0 * period, 300);
    let mut opts = EvolveOptions::<f64>::default();
    opts.metrics = vec![MetricKind::Concurrence];
    opts.keep_states = false;
    let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
    let c = traj.observable(MetricKind::Concurrence).unwrap();
    let worst = t_grid
        .iter()
        .zip(c.iter())
        .map(|(&t, &v)| (v - analytic::atc_concurrence(theta, p.g, t)).abs())
        .fold(0.0_f64, f64::max);
    let windowed = c.iter().filter(|&&v| v < 1e-9).count() > c.len() / 3
        && c.iter().filter(|&&v| v > 0.02).count() > 10;
    // the first-order formula itself is good to ~0.07 at theta = 0.16
    Check {
        name: "near-ATC perturbative concurrence (theta=0.16)",
        passed: worst <= 0.08 && windowed,
        detail: format!("worst |dC| {worst:.2e} (band 0.08), windowed structure {windowed}"),
    }
}

fn check_dephasing_rate() -> Check {
    let p = SystemParams::new(0.0, 1.0, 0.0, 0.0, 0.006, 1).unwrap();
    let space = p.space();
    let mut psi = CVector::<f64>::zeros(space.dim());
    psi[space.encode(Spin::Up, Spin::Down, 0)] = parqed::scalar::c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[space.encode(Spin::Down, Spin::Down, 0)] =
        parqed::scalar::c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rho0 = DensityMatrix::from_pure(space, &psi).unwrap();
    let t_grid = grid(100.0, 10);
    let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &EvolveOptions::default()).unwrap();
    let up = space.encode(Spin::Up, Spin::Down, 0);
    let down = space.encode(Spin::Down, Spin::Down, 0);
    let mut worst: f64 = 0.0;
    for (k, &t) in t_grid.iter().enumerate() {
        let coh = traj.states[k].matrix()[(up, down)].re;
        worst = worst.max((coh - 0.5 * (-2.0 * p.gamma_phi * t).exp()).abs());
    }
    Check {
        name: "pure dephasing: coherence decays as exp(-2*gphi*t)",
        passed: worst <= 1e-6,
        detail: format!("worst deviation {worst:.2e}"),
    }
}

fn check_photon_decay() -> Check {
    let p = SystemParams::new(0.0, 1.0, 0.017, 0.0, 0.0, 2).unwrap();
    let space = p.space();
    let rho0 =
        DensityMatrix::from_pure(space, &space.basis_ket(Spin::Down, Spin::Down, 1)).unwrap();
    let t_grid = grid(150.0, 15);
    let mut opts = EvolveOptions::<f64>::default();
    opts.metrics = vec![MetricKind::PhotonNumber];
    opts.keep_states = false;
    let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
    let mut worst: f64 = 0.0;
    for (k, &t) in t_grid.iter().enumerate() {
        let nph = traj.observable(MetricKind::PhotonNumber).unwrap()[k];
        worst = worst.max((nph - (-p.kappa * t).exp()).abs());
    }
    Check {
        name: "cavity decay: <n>(t) = exp(-kappa t)",
        passed: worst <= 1e-7,
        detail: format!("worst deviation {worst:.2e}"),
    }
}

fn check_fourier() -> Check {
    let p = SystemParams::new(0.05, 0.37, 0.0, 0.0, 0.0, 1).unwrap();
    let n = 256;
    let times: Vec<f64> = (0..n)
        .map(|k| k as f64 * std::f64::consts::PI / n as f64)
        .collect();
    let values: Vec<f64> = times.iter().map(|&t| drive_value(&p, t)).collect();
    let w = fourier_components(&times, &values).unwrap();
    let err = (w.mean - p.g * p.theta)
        .abs()
        .max((w.second_harmonic - p.g * (1.0 - p.theta)).abs());
    Check {
        name: "drive Fourier components recover (g*theta, g*(1-theta))",
        passed: err <= 1e-10,
        detail: format!("worst component error {err:.2e}"),
    }
}

fn check_method_cross() -> Check {
    let mut worst: f64 = 0.0;
    for p in [
        SystemParams::new(0.05, 0.75, 0.04, 0.02, 0.004, 4).unwrap(),
        SystemParams::new(0.06, 0.6, 0.03, 0.03, 0.0, 5).unwrap(),
    ] {
        let opts = SteadyOptions {
            tol: 1e-9,
            t_max: Some(20000.0),
            ..Default::default()
        };
        let a = steady_state(&p, SteadyMethod::NullSpace, &opts).unwrap();
        let b = steady_state(&p, SteadyMethod::LongTime, &opts).unwrap();
        worst = worst.max(frobenius_norm(&(a.state.matrix() - b.state.matrix())));
    }
    Check {
        name: "steady state: null-space vs long-time integration",
        passed: worst <= 1e-6,
        detail: format!("worst ||drho||_F {worst:.2e}"),
    }
}

fn check_schrodinger_overlap() -> Check {
    let p = SystemParams::new(0.05, 0.3, 0.0, 0.0, 0.0, 6).unwrap();
    let space = p.space();
    let rho0 = DensityMatrix::ground(space);
    let t_grid = grid(40.0, 8);
    let opts = EvolveOptions {
        allow_pure_fast_path: false,
        ..Default::default()
    };
    let traj = evolve(&rho0, &p, &t_grid, Frame::Effective, &opts).unwrap();
    let h = effective_hamiltonian(&p, space);
    let ham = SparseHamiltonian::static_part(&h);
    let psi0 = space.basis_ket::<f64>(Spin::Down, Spin::Down, 0);
    let mut worst: f64 = 0.0;
    schrodinger_evolve(&ham, &psi0, &t_grid, &OdeOptions::default(), |k, _, psi| {
        let overlap = psi.dotc(&(traj.states[k].matrix() * psi)).re;
        worst = worst.max((overlap - 1.0).abs());
        Ok(())
    })
    .unwrap();
    Check {
        name: "closed system: density path vs wavefunction oracle",
        passed: worst <= 1e-6,
        detail: format!("worst overlap deviation {worst:.2e}"),
    }
}

/// Run the oracle suite, print the table, and report overall success.
pub fn run_verification() -> Result<bool> {
    let checks: Vec<Check> = vec![
        check_half_theta(),
        check_tc_oracle(),
        check_atc_oracle(),
        check_dephasing_rate(),
        check_photon_decay(),
        check_fourier(),
        check_method_cross(),
        check_schrodinger_overlap(),
    ];
    let name_width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut all_ok = true;
    println!("{:-<width$}", "", width = name_width + 50);
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<name_width$}  {}", check.name, check.detail);
        all_ok &= check.passed;
    }
    println!("{:-<width$}", "", width = name_width + 50);
    println!(
        "verification: {}",
        if all_ok { "all checks passed" } else { "FAILURES present" }
    );
    Ok(all_ok)
}
