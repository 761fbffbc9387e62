//! Path-length comparison of GD and ITE on a single bosonic mode
//! `H = ω b†b`, swept over initial covariances `Γ_b(a, b)`.
//!
//! Lengths are accumulated per step: Euclidean for `Δ_R`, Frobenius (trace
//! inner product) for `Γ_b`. Both drivers receive the same numeric step
//! (`κ` for GD, `dτ` for ITE).

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{run_to_convergence, Boson, Guard, Method, Sector, StepperConfig, Trajectory};
use crate::gaussian::BosonicGaussianState;
use crate::hamiltonian::QuadraticBosonHamiltonian;
use crate::linalg::Mat;

/// `Σ_k ‖Δ_R^{(k+1)} − Δ_R^{(k)}‖₂`.
pub fn path_length_delta<S: Sector>(traj: &Trajectory<S>) -> f64 {
    traj.delta_increments.iter().sum()
}

/// `Σ_k ‖Γ^{(k+1)} − Γ^{(k)}‖_F`.
pub fn path_length_gamma<S: Sector>(traj: &Trajectory<S>) -> f64 {
    traj.gamma_increments.iter().sum()
}

/// Tolerance of the path-length inequality.
pub const CLAIM_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub omega: f64,
    pub delta_r_init: [f64; 2],
    pub kappa: f64,
    pub d_tau: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Re-run every cell with both steps halved.
    pub richardson: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            a_values: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            b_values: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            omega: 1.0,
            delta_r_init: [1.0, 1.0],
            kappa: 1e-3,
            d_tau: 1e-3,
            grad_tol: 1e-9,
            max_iters: 5_000_000,
            richardson: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if let Some(a) = self.a_values.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return bad(format!("every a must be positive and finite, got {a}"));
        }
        if self.b_values.iter().any(|b| !b.is_finite()) {
            return bad("every b must be finite".into());
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) || !(self.d_tau > 0.0 && self.d_tau.is_finite()) {
            return bad(format!("kappa and d_tau must be positive, got {} and {}", self.kappa, self.d_tau));
        }
        if !(self.grad_tol > 0.0) {
            return bad(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if !self.omega.is_finite() || self.delta_r_init.iter().any(|x| !x.is_finite()) {
            return bad("omega and delta_r_init must be finite".into());
        }
        Ok(())
    }

    fn stepper(&self, step: f64) -> StepperConfig {
        StepperConfig {
            step,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            guard: Guard::default(),
            keep_states: false,
        }
    }
}

/// Outcome of one method on one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub len_delta: f64,
    pub len_gamma: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_energy: f64,
    /// `max(‖Δ_R‖₂, ‖Γ_b − 𝟙‖_F)` at the last state.
    pub distance_to_vacuum: f64,
    pub max_energy_increase: f64,
    pub max_symplectic_residual: f64,
    /// Set when the run stopped on a step failure.
    pub failure: Option<String>,
}

fn distance_to_vacuum(state: &BosonicGaussianState) -> f64 {
    let n = state.dim();
    state.delta_r().norm().max((state.gamma_b() - Mat::identity(n, n)).norm())
}

fn summarize(
    method: Method,
    initial: &BosonicGaussianState,
    ham: &QuadraticBosonHamiltonian,
    config: &StepperConfig,
) -> RunSummary {
    match run_to_convergence::<Boson>(method, initial, ham, config) {
        Ok(t) => RunSummary {
            len_delta: path_length_delta(&t),
            len_gamma: path_length_gamma(&t),
            iterations: t.iterations,
            converged: t.converged,
            final_energy: t.final_energy(),
            distance_to_vacuum: distance_to_vacuum(t.final_state()),
            max_energy_increase: t.max_energy_increase(),
            max_symplectic_residual: t.max_manifold_residual,
            failure: None,
        },
        Err(e) => RunSummary {
            len_delta: f64::NAN,
            len_gamma: f64::NAN,
            iterations: 0,
            converged: false,
            final_energy: f64::NAN,
            distance_to_vacuum: f64::NAN,
            max_energy_increase: f64::NAN,
            max_symplectic_residual: f64::NAN,
            failure: Some(e.to_string()),
        },
    }
}

/// `−1`, `0` or `+1` with a dead zone of [`CLAIM_EPS`].
pub fn sign_class(x: f64) -> i8 {
    if x > CLAIM_EPS {
        1
    } else if x < -CLAIM_EPS {
        -1
    } else {
        0
    }
}

fn relative_change(full: f64, half: f64) -> f64 {
    let scale = full.abs().max(half.abs());
    if scale < 1e-12 {
        0.0
    } else {
        (half - full).abs() / scale
    }
}

/// Same cell re-run with `κ/2` and `dτ/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RichardsonCheck {
    pub gd: RunSummary,
    pub ite: RunSummary,
    pub diff_delta: f64,
    pub diff_gamma: f64,
    /// Largest relative change over the four path lengths.
    pub max_relative_change: f64,
    pub signs_stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub a: f64,
    pub b: f64,
    pub gd: RunSummary,
    pub ite: RunSummary,
    /// ITE minus GD.
    pub diff_delta: f64,
    pub diff_gamma: f64,
    pub richardson: Option<RichardsonCheck>,
}

impl SweepRecord {
    pub fn converged(&self) -> bool {
        self.gd.converged && self.ite.converged
    }

    /// `diff ≥ −ε` for both parameter sectors. Meaningless unless converged.
    pub fn satisfies_inequality(&self) -> bool {
        self.diff_delta >= -CLAIM_EPS && self.diff_gamma >= -CLAIM_EPS
    }

    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            a: self.a,
            b: self.b,
            len_delta_gd: self.gd.len_delta,
            len_gamma_gd: self.gd.len_gamma,
            len_delta_ite: self.ite.len_delta,
            len_gamma_ite: self.ite.len_gamma,
            diff_delta: self.diff_delta,
            diff_gamma: self.diff_gamma,
            iters_gd: self.gd.iterations,
            iters_ite: self.ite.iterations,
            converged_gd: self.gd.converged,
            converged_ite: self.ite.converged,
        }
    }
}

/// One line of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub a: f64,
    pub b: f64,
    pub len_delta_gd: f64,
    pub len_gamma_gd: f64,
    pub len_delta_ite: f64,
    pub len_gamma_ite: f64,
    pub diff_delta: f64,
    pub diff_gamma: f64,
    pub iters_gd: usize,
    pub iters_ite: usize,
    pub converged_gd: bool,
    pub converged_ite: bool,
}

pub const CSV_HEADER: [&str; 12] = [
    "a",
    "b",
    "len_delta_gd",
    "len_gamma_gd",
    "len_delta_ite",
    "len_gamma_ite",
    "diff_delta",
    "diff_gamma",
    "iters_gd",
    "iters_ite",
    "converged_gd",
    "converged_ite",
];

/// Runs GD and ITE from the same initial state for one `(a, b)` cell.
pub fn run_cell(config: &SweepConfig, a: f64, b: f64) -> Result<SweepRecord> {
    let initial = BosonicGaussianState::single_mode(a, b, config.delta_r_init)?;
    let ham = QuadraticBosonHamiltonian::single_mode(config.omega);
    let pair = |kappa: f64, d_tau: f64| {
        let gd = summarize(Method::Gd, &initial, &ham, &config.stepper(kappa));
        let ite = summarize(Method::Ite, &initial, &ham, &config.stepper(d_tau));
        (gd, ite)
    };
    let (gd, ite) = pair(config.kappa, config.d_tau);
    let diff_delta = ite.len_delta - gd.len_delta;
    let diff_gamma = ite.len_gamma - gd.len_gamma;
    let richardson = config.richardson.then(|| {
        let (hgd, hite) = pair(0.5 * config.kappa, 0.5 * config.d_tau);
        let h_diff_delta = hite.len_delta - hgd.len_delta;
        let h_diff_gamma = hite.len_gamma - hgd.len_gamma;
        let max_relative_change = [
            relative_change(gd.len_delta, hgd.len_delta),
            relative_change(gd.len_gamma, hgd.len_gamma),
            relative_change(ite.len_delta, hite.len_delta),
            relative_change(ite.len_gamma, hite.len_gamma),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let signs_stable =
            sign_class(diff_delta) == sign_class(h_diff_delta) && sign_class(diff_gamma) == sign_class(h_diff_gamma);
        RichardsonCheck {
            gd: hgd,
            ite: hite,
            diff_delta: h_diff_delta,
            diff_gamma: h_diff_gamma,
            max_relative_change,
            signs_stable,
        }
    });
    Ok(SweepRecord { a, b, gd, ite, diff_delta, diff_gamma, richardson })
}

/// Runs every `(a, b)` cell, `a`-major. Cells run in parallel; the output
/// order is the grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let cells: Vec<(f64, f64)> =
        config.a_values.iter().flat_map(|&a| config.b_values.iter().map(move |&b| (a, b))).collect();
    cells.par_iter().map(|&(a, b)| run_cell(config, a, b)).collect()
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let wrap = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(wrap)?;
    w.write_record(CSV_HEADER).map_err(wrap)?;
    for r in records {
        w.serialize(r.csv_row()).map_err(wrap)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let wrap = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    r.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>().map_err(wrap)
}
