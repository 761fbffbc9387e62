use std::fs;
use std::path::{Path, PathBuf};

use gaussvar::evolve::{gd_step_fermion, ite_step_fermion, run_to_convergence, Fermion, Method, StepperConfig};
use gaussvar::experiment::{run_sweep, write_csv, SweepConfig, CLAIM_EPS};
use gaussvar::gaussian::{random_pure_fermionic, random_pure_fermionic_with_parity};
use gaussvar::linalg::max_abs;
use gaussvar::oracle;
use gaussvar::single_particle::{
    energy_grid, gd_step_sp, ite_step_sp, run_ite_sp, stability_bound, Grid, GridPotential, GridWavefunction,
};
use gaussvar::validation::{run_checks, ValidateConfig};
use gaussvar::{FermionicGaussianState, Guard, QuadraticMajoranaHamiltonian};
use serde::Serialize;

use crate::config::{FermionCompareConfig, SpConfig, ValidateSection};

/// How a subcommand ended; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1: a checked property did not hold.
    Science(String),
    /// Exit 2: bad input or unusable output location.
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Science(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Science(m) | Failure::Usage(m) => m,
        }
    }
}

pub type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn science(e: impl ToString) -> Failure {
    Failure::Science(e.to_string())
}

/// Creates `dir` and checks that files can be written there.
pub fn prepare_out_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| usage(format!("output directory {} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(usage)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SpReport {
    max_elementwise_diff: f64,
    final_energy: f64,
    ed_energy: f64,
    converged: bool,
    iterations: usize,
    alpha: f64,
    d_tau: f64,
    stability_bound: f64,
    warnings: Vec<String>,
    passed: bool,
}

pub fn equivalence_sp(cfg: &SpConfig, seed: u64, steps: Option<f64>, out: &Path) -> Outcome {
    cfg.validate().map_err(usage)?;
    let grid = Grid::interior(cfg.left, cfg.right, cfg.n_points).map_err(usage)?;
    let pot = GridPotential::harmonic(grid, cfg.mass, cfg.omega).map_err(usage)?;
    let lambda_max = oracle::grid_max_eigenvalue(&pot.v, pot.hbar2_over_2m, grid.dx);
    let ed = oracle::grid_ed(&pot.v, pot.hbar2_over_2m, grid.dx).map_err(science)?.ground_energy;
    let d_tau = steps.or(cfg.d_tau).unwrap_or(1.0 / lambda_max);
    let alpha = steps.map(|s| 0.5 * s).or(cfg.alpha).unwrap_or(0.2 / lambda_max);
    let bound = stability_bound(lambda_max, ed);

    let mut warnings = Vec::new();
    for (name, step) in [("d_tau", d_tau), ("2 alpha", 2.0 * alpha)] {
        if step >= bound {
            warnings.push(format!("{name} = {step:e} is at or above the stability bound {bound:e}"));
        }
    }

    let mut max_diff = 0.0_f64;
    for k in 0..cfg.instances as u64 {
        let psi = GridWavefunction::random(grid, seed.wrapping_add(k));
        let gd = gd_step_sp(&psi, &pot, alpha).map_err(science)?;
        let ite = ite_step_sp(&psi, &pot, 2.0 * alpha).map_err(science)?;
        max_diff = max_diff.max(gd.max_abs_diff(&ite));
    }
    let start = GridWavefunction::random(grid, seed.wrapping_add(cfg.instances as u64));
    let run = run_ite_sp(&start, &pot, d_tau, cfg.max_iters, cfg.residual_tol).map_err(science)?;
    let final_energy = energy_grid(&run.psi, &pot).map_err(science)?;
    if !run.converged {
        warnings.push(format!("ITE did not reach residual {:e} in {} iterations", cfg.residual_tol, cfg.max_iters));
    }
    let passed = max_diff <= 1e-14 && final_energy.is_finite() && (final_energy - ed).abs() <= 1e-6;
    let report = SpReport {
        max_elementwise_diff: max_diff,
        final_energy,
        ed_energy: ed,
        converged: run.converged,
        iterations: run.iterations,
        alpha,
        d_tau,
        stability_bound: bound,
        warnings,
        passed,
    };
    write_json(out.join("equivalence_sp.json"), &report)?;
    println!("max |GD(α) − ITE(2α)|   {max_diff:.3e}");
    println!("ITE energy              {final_energy:.12}");
    println!("grid ED energy          {ed:.12}");
    for w in &report.warnings {
        println!("warning: {w}");
    }
    if passed {
        Ok(())
    } else {
        Err(science("single-particle equivalence check failed"))
    }
}

#[derive(Serialize)]
struct FermionInstance {
    n_modes: usize,
    max_step_diff: f64,
    final_energy: f64,
    ed_energy: f64,
    converged: bool,
    iterations: usize,
    failure: Option<String>,
    passed: bool,
}

#[derive(Serialize)]
struct FermionReport {
    kappa: f64,
    max_step_diff: f64,
    max_energy_error: f64,
    passed: bool,
    instances: Vec<FermionInstance>,
}

fn compare_instance(n: usize, seed: u64, cfg: &FermionCompareConfig) -> Result<FermionInstance, Failure> {
    let h = QuadraticMajoranaHamiltonian::random(n, seed).map_err(science)?;
    let guard = Guard::default();
    let state = random_pure_fermionic(n, seed ^ 0x9e37_79b9).map_err(science)?;
    let gd = gd_step_fermion(&state, &h, cfg.kappa, &guard).map_err(science)?;
    let ite = ite_step_fermion(&state, &h, cfg.kappa / 8.0, &guard).map_err(science)?;
    let max_step_diff = max_abs(&(gd.gamma_m() - ite.gamma_m()));

    let ed = oracle::fermion_ed(&h).map_err(usage)?.ground_energy;
    let ground = oracle::fermion_ground_covariance(&h)
        .and_then(FermionicGaussianState::new)
        .map_err(science)?;
    let start = random_pure_fermionic_with_parity(n, ground.parity(), seed ^ 0x7f4a_7c15).map_err(science)?;
    let stepper = StepperConfig {
        step: cfg.kappa,
        max_iters: cfg.max_iters,
        grad_tol: cfg.grad_tol,
        guard,
        keep_states: false,
    };
    let (final_energy, converged, iterations, failure) =
        match run_to_convergence::<Fermion>(Method::Gd, &start, &h, &stepper) {
            Ok(t) => (t.final_energy(), t.converged, t.iterations, None),
            Err(e) => (f64::NAN, false, 0, Some(e.to_string())),
        };
    let passed = max_step_diff <= 1e-15 && converged && (final_energy - ed).abs() <= 1e-8;
    Ok(FermionInstance {
        n_modes: n,
        max_step_diff,
        final_energy,
        ed_energy: ed,
        converged,
        iterations,
        failure,
        passed,
    })
}

pub fn fermion_compare(cfg: &FermionCompareConfig, seed: u64, steps: Option<f64>, out: &Path) -> Outcome {
    let mut cfg = cfg.clone();
    if let Some(s) = steps {
        cfg.kappa = s;
    }
    cfg.validate().map_err(usage)?;
    let mut instances = Vec::with_capacity(cfg.instances);
    for k in 0..cfg.instances {
        let n = cfg.modes[k % cfg.modes.len()];
        instances.push(compare_instance(n, seed.wrapping_mul(1_000_003).wrapping_add(k as u64), &cfg)?);
    }
    let max_step_diff = instances.iter().map(|i| i.max_step_diff).fold(0.0, f64::max);
    let max_energy_error = instances.iter().map(|i| (i.final_energy - i.ed_energy).abs()).fold(0.0, f64::max);
    let passed = instances.iter().all(|i| i.passed);
    let failed = instances.iter().filter(|i| !i.passed).count();
    write_json(
        out.join("fermion_compare.json"),
        &FermionReport { kappa: cfg.kappa, max_step_diff, max_energy_error, passed, instances },
    )?;
    println!("instances               {}", cfg.instances);
    println!("max |GD(κ) − ITE(κ/8)|  {max_step_diff:.3e}");
    println!("max |E − E_ED|          {max_energy_error:.3e}");
    if passed {
        Ok(())
    } else {
        Err(science(format!("{failed} of {} instances failed", cfg.instances)))
    }
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    config: &'a SweepConfig,
    claim_eps: f64,
    cells: usize,
    non_converged: Vec<[f64; 2]>,
    violations: Vec<[f64; 2]>,
    richardson_signs_stable: Option<bool>,
    richardson_max_relative_change: Option<f64>,
    passed: bool,
}

pub fn boson_sweep(cfg: &SweepConfig, steps: Option<f64>, out: &Path) -> Outcome {
    let mut cfg = cfg.clone();
    if let Some(s) = steps {
        cfg.kappa = s;
        cfg.d_tau = s;
    }
    cfg.validate().map_err(usage)?;
    let records = run_sweep(&cfg).map_err(science)?;
    write_csv(&records, &out.join("boson_sweep.csv")).map_err(usage)?;

    let cell = |r: &gaussvar::experiment::SweepRecord| [r.a, r.b];
    let non_converged: Vec<_> = records.iter().filter(|r| !r.converged()).map(cell).collect();
    let violations: Vec<_> =
        records.iter().filter(|r| r.converged() && !r.satisfies_inequality()).map(cell).collect();
    let rich: Vec<_> = records.iter().filter_map(|r| r.richardson.as_ref()).collect();
    let (stable, moved) = if cfg.richardson {
        (
            Some(rich.iter().all(|c| c.signs_stable)),
            Some(rich.iter().map(|c| c.max_relative_change).fold(0.0, f64::max)),
        )
    } else {
        (None, None)
    };
    let passed = violations.is_empty();
    let meta = SweepMeta {
        config: &cfg,
        claim_eps: CLAIM_EPS,
        cells: records.len(),
        non_converged: non_converged.clone(),
        violations: violations.clone(),
        richardson_signs_stable: stable,
        richardson_max_relative_change: moved,
        passed,
    };
    write_json(out.join("boson_sweep_meta.json"), &meta)?;

    println!("{:>6} {:>6} {:>12} {:>12} {:>9}", "a", "b", "diff_delta", "diff_gamma", "converged");
    for r in &records {
        println!("{:>6} {:>6} {:>12.4e} {:>12.4e} {:>9}", r.a, r.b, r.diff_delta, r.diff_gamma, r.converged());
    }
    if !non_converged.is_empty() {
        println!("warning: {} cells did not converge", non_converged.len());
    }
    if let (Some(s), Some(m)) = (stable, moved) {
        println!("halved steps: signs stable {s}, largest length change {:.3}%", 100.0 * m);
    }
    if passed {
        Ok(())
    } else {
        Err(science(format!("{} converged cells have a negative difference", violations.len())))
    }
}

pub fn validate(section: &ValidateSection, seed: u64, filter: Option<&str>, out: &Path) -> Outcome {
    section.validate().map_err(usage)?;
    let cfg = ValidateConfig {
        instances: section.instances,
        seed,
        fd_step: section.fd_step,
        inject_fault: section.inject_fault,
    };
    let results = run_checks(&cfg, filter).map_err(science)?;
    if results.is_empty() {
        return Err(usage(format!("filter {:?} matches no check", filter.unwrap_or(""))));
    }
    write_json(out.join("validate.json"), &results)?;
    println!("{:<46} {:>11} {:>11}  result", "check", "value", "threshold");
    for r in &results {
        println!(
            "{:<46} {:>11.3e} {:>11.1e}  {}",
            r.full_name(),
            r.value,
            r.threshold,
            if r.passed { "ok" } else { "FAILED" }
        );
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.full_name()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(science(format!("failed checks: {}", failed.join(", "))))
    }
}
