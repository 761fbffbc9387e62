//! Named invariant checks, grouped by category. `gaussvar validate` runs
//! these and prints one line per check.

use serde::Serialize;

use crate::error::Result;
use crate::evolve::{
    self, boson_tangent_residual, fermion_tangent_residual, project_tangent_boson, project_tangent_fermion,
    run_to_convergence, Boson, Fermion, Guard, Method, Sector, StepperConfig,
};
use crate::gaussian::{
    random_pure_fermionic, random_pure_fermionic_with_parity, BosonicGaussianState, FermionicGaussianState,
    SymplecticForm,
};
use crate::hamiltonian::{QuadraticBosonHamiltonian, QuadraticMajoranaHamiltonian};
use crate::linalg::{self, Mat, Vector};
use crate::oracle;
use crate::single_particle::{gd_update_sp, ite_update_sp, Grid, GridPotential, GridWavefunction};

/// Deliberate corruption of an analytic gradient, used to confirm that the
/// finite-difference checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    NegateHDelta,
    NegateHB,
    NegateHM,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub instances: usize,
    pub seed: u64,
    pub fd_step: f64,
    pub inject_fault: Option<Fault>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { instances: 200, seed: 0, fd_step: 1e-5, inject_fault: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub category: &'static str,
    pub name: &'static str,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    fn at_most(category: &'static str, name: &'static str, value: f64, threshold: f64) -> Self {
        Self { category, name, value, threshold, passed: value <= threshold }
    }

    fn at_least(category: &'static str, name: &'static str, value: f64, threshold: f64) -> Self {
        Self { category, name, value, threshold, passed: value >= threshold }
    }

    pub fn full_name(&self) -> String {
        format!("{}.{}", self.category, self.name)
    }
}

pub const CATEGORIES: [&str; 5] = ["gradient", "tangency", "drift", "oracle", "equivalence"];

fn selected(filter: Option<&str>, category: &str) -> bool {
    filter.map_or(true, |f| category.contains(f) || f.contains(category))
}

/// Runs every check whose category matches `filter` (all when `None`).
pub fn run_checks(config: &ValidateConfig, filter: Option<&str>) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    if selected(filter, "gradient") {
        out.extend(gradient_checks(config)?);
    }
    if selected(filter, "tangency") {
        out.extend(tangency_checks(config)?);
    }
    if selected(filter, "drift") {
        out.extend(drift_checks(config)?);
    }
    if selected(filter, "oracle") {
        out.extend(oracle_checks(config)?);
    }
    if selected(filter, "equivalence") {
        out.extend(equivalence_checks(config)?);
    }
    Ok(out)
}

fn rel_err(fd: &[f64], analytic: &[f64]) -> f64 {
    let scale = analytic.iter().fold(0.0_f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    fd.iter().zip(analytic).map(|(f, a)| (f - a).abs()).fold(0.0, f64::max) / scale
}

/// Relative errors `(h_Δ, h_b)` of a bosonic instance.
pub fn boson_gradient_errors(
    ham: &QuadraticBosonHamiltonian,
    state: &BosonicGaussianState,
    h: f64,
    fault: Option<Fault>,
) -> Result<(f64, f64)> {
    let mut g = ham.gradients(state)?;
    match fault {
        Some(Fault::NegateHDelta) => g.h_delta = -g.h_delta,
        Some(Fault::NegateHB) => g.h_b = -g.h_b,
        _ => {}
    }
    let dim = state.dim();
    let gamma = state.gamma_b();
    let delta = state.delta_r();
    let fd_delta: Vec<f64> = (0..dim)
        .map(|i| oracle::fd_gradient(|d: &Vector| ham.energy_unchecked(d, gamma), delta, i, h))
        .collect();
    let an_delta: Vec<f64> = g.h_delta.iter().map(|x| 0.5 * x).collect();
    let entries: Vec<(usize, usize)> = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).collect();
    let fd_b: Vec<f64> = entries
        .iter()
        .map(|&e| oracle::fd_gradient_entry(|m: &Mat| ham.energy_unchecked(delta, m), gamma, e, h))
        .collect();
    let an_b: Vec<f64> = entries.iter().map(|&e| 0.25 * g.h_b[e]).collect();
    Ok((rel_err(&fd_delta, &an_delta), rel_err(&fd_b, &an_b)))
}

pub fn fermion_gradient_error(
    ham: &QuadraticMajoranaHamiltonian,
    gamma_m: &Mat,
    h: f64,
    fault: Option<Fault>,
) -> Result<f64> {
    let state = FermionicGaussianState::new(gamma_m.clone())?;
    let mut hm = ham.gradient(&state)?;
    if fault == Some(Fault::NegateHM) {
        hm = -hm;
    }
    let dim = gamma_m.nrows();
    let entries: Vec<(usize, usize)> = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).collect();
    let fd: Vec<f64> = entries
        .iter()
        .map(|&e| oracle::fd_gradient_entry(|m: &Mat| ham.energy_unchecked(m), gamma_m, e, h))
        .collect();
    let an: Vec<f64> = entries.iter().map(|&e| 0.25 * hm[e]).collect();
    Ok(rel_err(&fd, &an))
}

/// Random positive-definite quadrature Hamiltonian on `n` modes.
pub fn random_boson_hamiltonian(n: usize, seed: u64) -> Result<QuadraticBosonHamiltonian> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = linalg::random_normal_matrix(2 * n, 2 * n, &mut rng);
    let h = linalg::symmetrize(&(&a * a.transpose() / (2 * n) as f64 + Mat::identity(2 * n, 2 * n) * 0.5));
    QuadraticBosonHamiltonian::new(h, -0.5)
}

fn gradient_checks(config: &ValidateConfig) -> Result<Vec<CheckResult>> {
    let (mut e_delta, mut e_b, mut e_m) = (0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..config.instances as u64 {
        let seed = config.seed.wrapping_mul(1_000_003).wrapping_add(k);
        let n = 1 + (k % 3) as usize;
        let ham = random_boson_hamiltonian(n, seed)?;
        let state = BosonicGaussianState::random(n, 0.5, seed ^ 0x5eed)?;
        let (d, b) = boson_gradient_errors(&ham, &state, config.fd_step, config.inject_fault)?;
        e_delta = e_delta.max(d);
        e_b = e_b.max(b);
        let nf = 1 + (k % 4) as usize;
        let fh = QuadraticMajoranaHamiltonian::random(nf, seed)?;
        let fs = random_pure_fermionic(nf, seed ^ 0xfe)?;
        e_m = e_m.max(fermion_gradient_error(&fh, fs.gamma_m(), config.fd_step, config.inject_fault)?);
    }
    Ok(vec![
        CheckResult::at_most("gradient", "fd_h_delta", e_delta, 1e-6),
        CheckResult::at_most("gradient", "fd_h_b", e_b, 1e-6),
        CheckResult::at_most("gradient", "fd_h_m", e_m, 1e-6),
    ])
}

fn tangency_checks(config: &ValidateConfig) -> Result<Vec<CheckResult>> {
    let (mut f_res, mut f_inner, mut b_res, mut b_inner) = (0.0_f64, f64::INFINITY, 0.0_f64, f64::INFINITY);
    for k in 0..config.instances as u64 {
        let seed = config.seed.wrapping_mul(7_919).wrapping_add(k);
        let nf = 1 + (k % 4) as usize;
        let g = random_pure_fermionic(nf, seed)?;
        let h = QuadraticMajoranaHamiltonian::random(nf, seed ^ 0xab)?;
        let m = project_tangent_fermion(g.gamma_m(), h.h_maj());
        f_res = f_res.max(fermion_tangent_residual(g.gamma_m(), &m));
        f_inner = f_inner.min(linalg::frobenius_inner(h.h_maj(), &m));

        let nb = 1 + (k % 3) as usize;
        let s = BosonicGaussianState::random(nb, 0.3, seed)?;
        let sigma = SymplecticForm::new(nb)?;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed ^ 0xcd);
        let hb = linalg::random_symmetric(2 * nb, &mut rng);
        let (mb, _) = project_tangent_boson(s.gamma_b(), &hb, &sigma)?;
        b_res = b_res.max(boson_tangent_residual(s.gamma_b(), &mb, &sigma)?);
        b_inner = b_inner.min(linalg::frobenius_inner(&hb, &mb));
    }
    Ok(vec![
        CheckResult::at_most("tangency", "fermion_residual", f_res, 1e-10),
        CheckResult::at_least("tangency", "fermion_inner_product", f_inner, -1e-12),
        CheckResult::at_most("tangency", "boson_residual", b_res, 1e-10),
        CheckResult::at_least("tangency", "boson_inner_product", b_inner, -1e-12),
    ])
}

/// Euler steps without retraction leave the manifold by an amount that
/// scales with the step and decays again near the minimum; these checks
/// bound the residual at convergence.
fn drift_checks(config: &ValidateConfig) -> Result<Vec<CheckResult>> {
    let mut boson_drift = 0.0_f64;
    let mut fermion_drift = 0.0_f64;
    let mut all_converged = true;
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    for (k, (a, b)) in [(0.5, 1.0), (2.0, -0.5), (4.0, 2.0)].into_iter().enumerate() {
        let s = BosonicGaussianState::single_mode(a, b, [1.0, -0.5])?;
        for method in [Method::Gd, Method::Ite] {
            let cfg = StepperConfig { step: 1e-2, grad_tol: 1e-9, keep_states: false, ..StepperConfig::default() };
            let t = run_to_convergence::<Boson>(method, &s, &ham, &cfg)?;
            all_converged &= t.converged;
            boson_drift = boson_drift.max(Boson::manifold_residual(t.final_state()));
        }
        let nf = 2 + k % 2;
        let fh = QuadraticMajoranaHamiltonian::random(nf, config.seed + k as u64)?;
        let parity = FermionicGaussianState::new(oracle::fermion_ground_covariance(&fh)?)?.parity();
        let fs = random_pure_fermionic_with_parity(nf, parity, config.seed + 100 + k as u64)?;
        let step = 0.05 / linalg::max_abs(fh.h_maj()).max(1.0);
        let cfg = StepperConfig { step, grad_tol: 1e-9, keep_states: false, ..StepperConfig::default() };
        let t = run_to_convergence::<Fermion>(Method::Ite, &fs, &fh, &cfg)?;
        all_converged &= t.converged;
        fermion_drift = fermion_drift.max(Fermion::manifold_residual(t.final_state()));
    }
    Ok(vec![
        CheckResult::at_most("drift", "boson_symplectic_at_convergence", boson_drift, 1e-6),
        CheckResult::at_most("drift", "fermion_purity_at_convergence", fermion_drift, 1e-6),
        CheckResult::at_least("drift", "runs_converged", if all_converged { 1.0 } else { 0.0 }, 1.0),
    ])
}

fn oracle_checks(config: &ValidateConfig) -> Result<Vec<CheckResult>> {
    let mut algebra = 0.0_f64;
    for n in 1..=4 {
        let ops = oracle::majorana_operators(n);
        let dim = 1 << n;
        for i in 0..2 * n {
            for j in 0..2 * n {
                let target = if i == j { 2.0 } else { 0.0 };
                let ac = &ops[i] * &ops[j] + &ops[j] * &ops[i];
                let id = oracle::CMat::identity(dim, dim) * num_complex::Complex64::new(target, 0.0);
                algebra = algebra.max((ac - id).camax());
            }
        }
    }
    let mut fermion_agree = 0.0_f64;
    for k in 0..20u64 {
        let n = 1 + (k % 4) as usize;
        let h = QuadraticMajoranaHamiltonian::random(n, config.seed + k)?;
        let ed = oracle::fermion_ed(&h)?.ground_energy;
        fermion_agree = fermion_agree.max((ed - oracle::fermion_ground_energy_canonical(&h)).abs());
    }
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let vac = oracle::boson_ed(&ham, 30)?;
    let stable = (vac.ground_energy - oracle::boson_ed(&ham, 40)?.ground_energy).abs();
    Ok(vec![
        CheckResult::at_most("oracle", "majorana_algebra", algebra, 1e-13),
        CheckResult::at_most("oracle", "fermion_ed_vs_canonical", fermion_agree, 1e-10),
        CheckResult::at_most("oracle", "boson_ed_cutoff_stable", stable, 1e-10),
    ])
}

fn equivalence_checks(config: &ValidateConfig) -> Result<Vec<CheckResult>> {
    let mut fermion = 0.0_f64;
    for k in 0..config.instances as u64 {
        let n = 1 + (k % 4) as usize;
        let s = random_pure_fermionic(n, config.seed + k)?;
        let h = QuadraticMajoranaHamiltonian::random(n, config.seed + 10_000 + k)?;
        let gd = evolve::gd_direction_fermion(&s, &h)?;
        let ite = evolve::ite_flow_fermion(&s, &h)?;
        fermion = fermion.max(linalg::max_abs(&(gd - ite / 8.0)));
    }
    let grid = Grid::interior(-8.0, 8.0, 512)?;
    let pot = GridPotential::harmonic(grid, 1.0, 1.0)?;
    let mut sp = 0.0_f64;
    for k in 0..10u64 {
        let psi = GridWavefunction::random(grid, config.seed + k);
        let alpha = 1e-4;
        let gd = gd_update_sp(&psi, &pot, alpha)?.normalized();
        let ite = ite_update_sp(&psi, &pot, 2.0 * alpha)?.normalized();
        sp = sp.max(gd.max_abs_diff(&ite));
    }
    let guard = Guard::default();
    let vac = BosonicGaussianState::vacuum(1)?;
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let mut fixed = 0.0_f64;
    for method in [Method::Gd, Method::Ite] {
        let next = evolve::step::<Boson>(method, &vac, &ham, 0.1, &guard)?;
        fixed = fixed
            .max(linalg::max_abs(&(next.gamma_b() - vac.gamma_b())))
            .max((next.delta_r() - vac.delta_r()).amax());
    }
    Ok(vec![
        CheckResult::at_most("equivalence", "fermion_gd_vs_ite", fermion, 1e-14),
        CheckResult::at_most("equivalence", "single_particle_gd_vs_ite", sp, 1e-14),
        CheckResult::at_most("equivalence", "boson_vacuum_fixed_point", fixed, 1e-14),
    ])
}
