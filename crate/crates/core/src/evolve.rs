//! Imaginary-time evolution and projected gradient descent on the Gaussian
//! manifolds, plus a convergence driver.
//!
//! ITE flows (per unit `τ`):
//! - `∂τ Δ_R = −Γ_b h_Δ`
//! - `∂τ Γ_b = σᵀ h_b σ − Γ_b h_b Γ_b`
//! - `∂τ Γ_m = −h_m − Γ_m h_m Γ_m`
//!
//! GD updates (per unit learning rate `κ`):
//! - `Δ_R ← Δ_R − (κ/2) h_Δ`
//! - `Γ_b ← Γ_b − (ακ/8)[h_b + Γ_b σ h_b σ Γ_b]`
//! - `Γ_m ← Γ_m − (κ/8)[h_m + Γ_m h_m Γ_m]`
//!
//! Every step is explicit Euler followed by exact re-symmetrization (bosons)
//! or re-antisymmetrization (fermions). Nothing retracts onto the manifold;
//! drift is only bounded by the step guard.

use std::fmt;
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gaussian::{purified_covariance, purity_residual, BosonicGaussianState, FermionicGaussianState, SymplecticForm};
use crate::hamiltonian::{QuadraticBosonHamiltonian, QuadraticMajoranaHamiltonian};
use crate::linalg::{self, Mat, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ite,
    Gd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ite => "ITE",
            Method::Gd => "GD",
        })
    }
}

/// Step-halving safeguard. A bosonic step is rejected when `Γ_b` loses
/// positive definiteness; a fermionic step is rejected when it changes
/// `Γ_m² + 𝟙` by more than `max_purity_change` in max-abs norm, or leaves a
/// purity residual above `max_purity_residual`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guard {
    pub max_halvings: u32,
    pub max_purity_change: f64,
    pub max_purity_residual: f64,
}

impl Default for Guard {
    fn default() -> Self {
        Self { max_halvings: 30, max_purity_change: 1e-2, max_purity_residual: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    /// `κ` for GD, `dτ` for ITE.
    pub step: f64,
    pub max_iters: usize,
    /// Threshold on the unscaled update-direction norm.
    pub grad_tol: f64,
    pub guard: Guard,
    /// Keep every intermediate state; otherwise only the endpoints.
    pub keep_states: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self { step: 1e-3, max_iters: 1_000_000, grad_tol: 1e-10, guard: Guard::default(), keep_states: true }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {}", self.step)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if !(self.guard.max_purity_change > 0.0 && self.guard.max_purity_residual > 0.0) {
            return Err(Error::InvalidParameter("guard purity limits must be positive".into()));
        }
        Ok(())
    }
}

fn check_step(step: f64) -> Result<()> {
    if step >= 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("step must be non-negative and finite, got {step}")))
    }
}

/// Tangent projection of a fermionic gradient, `M′ = ½[h_m + Γ_m h_m Γ_m]`.
/// On pure states this equals `½[h_m − Γ_m h_mᵀ (Γ_m⁻¹)ᵀ]` and
/// `Tr(h_mᵀ M′) ≥ 0`, so the sign factor is always `+1`.
pub fn project_tangent_fermion(gamma_m: &Mat, h_m: &Mat) -> Mat {
    (h_m + gamma_m * h_m * gamma_m) * 0.5
}

/// `‖M Γ_mᵀ + Γ_m Mᵀ‖` (max-abs entry).
pub fn fermion_tangent_residual(gamma_m: &Mat, m: &Mat) -> f64 {
    linalg::max_abs(&(m * gamma_m.transpose() + gamma_m * m.transpose()))
}

/// Tangent projection of a bosonic gradient,
/// `M′ = (α/2)[h_b + Γ_b σ h_bᵀ σ Γ_b]` with
/// `α = sgn(½ Tr[h_b (h_b + Γ_b σ h_b σ Γ_b)])`, taking `α = +1` at zero.
///
/// The sign trace is evaluated at [`purified_covariance`] of `Γ_b`. It
/// vanishes quadratically at the minimum, so off-manifold drift from earlier
/// Euler steps, or rounding, would otherwise decide the sign and stall the
/// iteration. When it is below its rounding bound, `α` is chosen so that
/// moving along `−αM` does not increase `‖M‖` to first order.
pub fn project_tangent_boson(gamma_b: &Mat, h_b: &Mat, sigma: &SymplecticForm) -> Result<(Mat, f64)> {
    check_dim(sigma.dim(), gamma_b.nrows())?;
    check_dim(sigma.dim(), h_b.nrows())?;
    let s = sigma.matrix();
    let shs = s * h_b * s;
    let raw = h_b + gamma_b * s * h_b.transpose() * s * gamma_b;
    let pure = purified_covariance(gamma_b, sigma)?;
    let pure_term = &pure * &shs * &pure;
    let sign_trace = 0.5 * (h_b * (h_b + &pure_term)).trace();
    let floor = SIGN_TRACE_ULPS * f64::EPSILON * h_b.norm() * (h_b.norm() + pure_term.norm());
    let alpha = if sign_trace.abs() > floor {
        sign_trace.signum()
    } else {
        let growth = (&raw * &raw * (&shs * gamma_b + gamma_b * &shs)).trace();
        if growth < 0.0 { -1.0 } else { 1.0 }
    };
    Ok((raw * (0.5 * alpha), alpha))
}

/// Multiple of machine epsilon below which the bosonic sign trace is treated
/// as unresolved.
const SIGN_TRACE_ULPS: f64 = 64.0;

/// `‖M − σ (Γ_bᵀ)⁻¹ Mᵀ (Γ_bᵀ)⁻¹ σ‖` (max-abs entry).
pub fn boson_tangent_residual(gamma_b: &Mat, m: &Mat, sigma: &SymplecticForm) -> Result<f64> {
    let inv = gamma_b
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameter("Γ_b is singular".into()))?;
    let s = sigma.matrix();
    Ok(linalg::max_abs(&(m - s * &inv * m.transpose() * &inv * s)))
}

/// Bosonic update direction per unit step.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonDirection {
    pub delta: Vector,
    pub gamma: Mat,
}

impl BosonDirection {
    /// `max(‖delta‖₂, ‖gamma‖_F)`.
    pub fn norm(&self) -> f64 {
        self.delta.norm().max(self.gamma.norm())
    }
}

pub fn ite_flow_boson(state: &BosonicGaussianState, ham: &QuadraticBosonHamiltonian) -> Result<BosonDirection> {
    let g = ham.gradients(state)?;
    let sigma = SymplecticForm::new(state.n_modes())?;
    let s = sigma.matrix();
    let gamma = state.gamma_b();
    Ok(BosonDirection {
        delta: -(gamma * &g.h_delta),
        gamma: s.transpose() * &g.h_b * s - gamma * &g.h_b * gamma,
    })
}

pub fn gd_direction_boson(
    state: &BosonicGaussianState,
    ham: &QuadraticBosonHamiltonian,
) -> Result<BosonDirection> {
    let g = ham.gradients(state)?;
    let sigma = SymplecticForm::new(state.n_modes())?;
    let (m, _alpha) = project_tangent_boson(state.gamma_b(), &g.h_b, &sigma)?;
    // (ακ/8)[…] = (κ/4) M′
    Ok(BosonDirection { delta: &g.h_delta * -0.5, gamma: m * -0.25 })
}

pub fn ite_flow_fermion(state: &FermionicGaussianState, ham: &QuadraticMajoranaHamiltonian) -> Result<Mat> {
    let h = ham.gradient(state)?;
    let g = state.gamma_m();
    Ok(-(&h + g * &h * g))
}

pub fn gd_direction_fermion(state: &FermionicGaussianState, ham: &QuadraticMajoranaHamiltonian) -> Result<Mat> {
    let h = ham.gradient(state)?;
    // (κ/8)[h + ΓhΓ] = (κ/4) M′
    Ok(project_tangent_fermion(state.gamma_m(), &h) * -0.25)
}

/// One of the two Gaussian families, with everything the driver needs.
pub trait Sector {
    type State: Clone + fmt::Debug;
    type Hamiltonian;
    type Direction;

    const NAME: &'static str;

    fn direction(method: Method, state: &Self::State, ham: &Self::Hamiltonian) -> Result<Self::Direction>;
    fn direction_norm(dir: &Self::Direction) -> f64;
    /// Euler update followed by structural re-(anti)symmetrization.
    fn advance(state: &Self::State, dir: &Self::Direction, step: f64) -> Self::State;
    fn admissible(before: &Self::State, after: &Self::State, guard: &Guard) -> bool;
    fn energy(ham: &Self::Hamiltonian, state: &Self::State) -> Result<f64>;
    fn delta_increment(a: &Self::State, b: &Self::State) -> f64;
    fn gamma_increment(a: &Self::State, b: &Self::State) -> f64;
    /// Symplectic residual for bosons, purity residual for fermions.
    fn manifold_residual(state: &Self::State) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct Boson;

#[derive(Debug, Clone, Copy)]
pub struct Fermion;

impl Sector for Boson {
    type State = BosonicGaussianState;
    type Hamiltonian = QuadraticBosonHamiltonian;
    type Direction = BosonDirection;

    const NAME: &'static str = "boson";

    fn direction(method: Method, state: &Self::State, ham: &Self::Hamiltonian) -> Result<BosonDirection> {
        match method {
            Method::Ite => ite_flow_boson(state, ham),
            Method::Gd => gd_direction_boson(state, ham),
        }
    }

    fn direction_norm(dir: &BosonDirection) -> f64 {
        dir.norm()
    }

    fn advance(state: &Self::State, dir: &BosonDirection, step: f64) -> Self::State {
        let delta = state.delta_r() + &dir.delta * step;
        let gamma = linalg::symmetrize(&(state.gamma_b() + &dir.gamma * step));
        BosonicGaussianState::new(delta, gamma).expect("shape is preserved by the update")
    }

    fn admissible(_before: &Self::State, after: &Self::State, _guard: &Guard) -> bool {
        after.delta_r().iter().all(|x| x.is_finite()) && linalg::is_positive_definite(after.gamma_b())
    }

    fn energy(ham: &Self::Hamiltonian, state: &Self::State) -> Result<f64> {
        ham.energy(state)
    }

    fn delta_increment(a: &Self::State, b: &Self::State) -> f64 {
        (b.delta_r() - a.delta_r()).norm()
    }

    fn gamma_increment(a: &Self::State, b: &Self::State) -> f64 {
        (b.gamma_b() - a.gamma_b()).norm()
    }

    fn manifold_residual(state: &Self::State) -> f64 {
        let sigma = SymplecticForm::new(state.n_modes()).expect("state has at least one mode");
        crate::gaussian::symplectic_residual(state.gamma_b(), &sigma)
    }
}

impl Sector for Fermion {
    type State = FermionicGaussianState;
    type Hamiltonian = QuadraticMajoranaHamiltonian;
    type Direction = Mat;

    const NAME: &'static str = "fermion";

    fn direction(method: Method, state: &Self::State, ham: &Self::Hamiltonian) -> Result<Mat> {
        match method {
            Method::Ite => ite_flow_fermion(state, ham),
            Method::Gd => gd_direction_fermion(state, ham),
        }
    }

    fn direction_norm(dir: &Mat) -> f64 {
        dir.norm()
    }

    fn advance(state: &Self::State, dir: &Mat, step: f64) -> Self::State {
        let gamma = linalg::antisymmetrize(&(state.gamma_m() + dir * step));
        FermionicGaussianState::new(gamma).expect("shape is preserved by the update")
    }

    fn admissible(before: &Self::State, after: &Self::State, guard: &Guard) -> bool {
        let (a, b) = (after.gamma_m(), before.gamma_m());
        let change = linalg::max_abs(&(a * a - b * b));
        change.is_finite() && change <= guard.max_purity_change && purity_residual(a) <= guard.max_purity_residual
    }

    fn energy(ham: &Self::Hamiltonian, state: &Self::State) -> Result<f64> {
        ham.energy(state)
    }

    fn delta_increment(_a: &Self::State, _b: &Self::State) -> f64 {
        0.0
    }

    fn gamma_increment(a: &Self::State, b: &Self::State) -> f64 {
        (b.gamma_m() - a.gamma_m()).norm()
    }

    fn manifold_residual(state: &Self::State) -> f64 {
        purity_residual(state.gamma_m())
    }
}

/// Applies `dir` with step `step`, halving on guard violations. Returns the
/// new state and the number of halvings used.
pub fn guarded_advance<S: Sector>(
    state: &S::State,
    dir: &S::Direction,
    step: f64,
    guard: &Guard,
) -> Result<(S::State, u32)> {
    let mut h = step;
    for halvings in 0..=guard.max_halvings {
        let next = S::advance(state, dir, h);
        if S::admissible(state, &next, guard) {
            return Ok((next, halvings));
        }
        h *= 0.5;
    }
    Err(Error::StepFailure {
        halvings: guard.max_halvings,
        reason: format!("{} step of size {step:e} leaves the admissible region", S::NAME),
    })
}

/// One guarded step of `method`; gradients are taken at the pre-step state.
pub fn step<S: Sector>(
    method: Method,
    state: &S::State,
    ham: &S::Hamiltonian,
    step: f64,
    guard: &Guard,
) -> Result<S::State> {
    check_step(step)?;
    if step == 0.0 {
        return Ok(state.clone());
    }
    let dir = S::direction(method, state, ham)?;
    guarded_advance::<S>(state, &dir, step, guard).map(|(s, _)| s)
}

pub fn ite_step_boson(
    state: &BosonicGaussianState,
    ham: &QuadraticBosonHamiltonian,
    d_tau: f64,
    guard: &Guard,
) -> Result<BosonicGaussianState> {
    step::<Boson>(Method::Ite, state, ham, d_tau, guard)
}

pub fn gd_step_boson(
    state: &BosonicGaussianState,
    ham: &QuadraticBosonHamiltonian,
    kappa: f64,
    guard: &Guard,
) -> Result<BosonicGaussianState> {
    step::<Boson>(Method::Gd, state, ham, kappa, guard)
}

pub fn ite_step_fermion(
    state: &FermionicGaussianState,
    ham: &QuadraticMajoranaHamiltonian,
    d_tau: f64,
    guard: &Guard,
) -> Result<FermionicGaussianState> {
    step::<Fermion>(Method::Ite, state, ham, d_tau, guard)
}

pub fn gd_step_fermion(
    state: &FermionicGaussianState,
    ham: &QuadraticMajoranaHamiltonian,
    kappa: f64,
    guard: &Guard,
) -> Result<FermionicGaussianState> {
    step::<Fermion>(Method::Gd, state, ham, kappa, guard)
}

/// Iterates produced by [`run_to_convergence`]. `energies` has one entry per
/// visited state; the increment vectors have one entry per step.
#[derive(Debug, Clone)]
pub struct Trajectory<S: Sector> {
    pub method: Method,
    /// Every visited state when `keep_states` is set, otherwise the endpoints.
    pub states: Vec<S::State>,
    pub energies: Vec<f64>,
    pub delta_increments: Vec<f64>,
    pub gamma_increments: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub halvings: u64,
    /// Largest manifold residual over visited states.
    pub max_manifold_residual: f64,
    pub final_direction_norm: f64,
    _sector: PhantomData<S>,
}

impl<S: Sector> Trajectory<S> {
    /// Builds a trajectory from an explicit list of states.
    pub fn from_states(method: Method, ham: &S::Hamiltonian, states: Vec<S::State>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidParameter("trajectory needs at least one state".into()));
        }
        let energies = states.iter().map(|s| S::energy(ham, s)).collect::<Result<Vec<_>>>()?;
        let delta_increments = states.windows(2).map(|w| S::delta_increment(&w[0], &w[1])).collect();
        let gamma_increments = states.windows(2).map(|w| S::gamma_increment(&w[0], &w[1])).collect();
        let max_manifold_residual = states.iter().map(S::manifold_residual).fold(0.0, f64::max);
        Ok(Self {
            method,
            iterations: states.len() - 1,
            states,
            energies,
            delta_increments,
            gamma_increments,
            converged: false,
            halvings: 0,
            max_manifold_residual,
            final_direction_norm: f64::NAN,
            _sector: PhantomData,
        })
    }

    pub fn initial_state(&self) -> &S::State {
        &self.states[0]
    }

    pub fn final_state(&self) -> &S::State {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("trajectory is never empty")
    }

    /// Largest single-step energy increase (0 for a monotone descent).
    pub fn max_energy_increase(&self) -> f64 {
        self.energies.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Steps until the update-direction norm drops below `grad_tol` or
/// `max_iters` steps have been taken. Non-convergence is reported through
/// `converged = false`; only step failures are errors.
pub fn run_to_convergence<S: Sector>(
    method: Method,
    initial: &S::State,
    ham: &S::Hamiltonian,
    config: &StepperConfig,
) -> Result<Trajectory<S>> {
    config.validate()?;
    let mut traj = Trajectory::<S>::from_states(method, ham, vec![initial.clone()])?;
    let mut current = initial.clone();
    for _ in 0..config.max_iters {
        let dir = S::direction(method, &current, ham)?;
        let norm = S::direction_norm(&dir);
        traj.final_direction_norm = norm;
        if norm < config.grad_tol {
            traj.converged = true;
            break;
        }
        let (next, halvings) = guarded_advance::<S>(&current, &dir, config.step, &config.guard)?;
        traj.halvings += u64::from(halvings);
        traj.delta_increments.push(S::delta_increment(&current, &next));
        traj.gamma_increments.push(S::gamma_increment(&current, &next));
        traj.energies.push(S::energy(ham, &next)?);
        traj.max_manifold_residual = traj.max_manifold_residual.max(S::manifold_residual(&next));
        traj.iterations += 1;
        if config.keep_states {
            traj.states.push(next.clone());
        }
        current = next;
    }
    if !config.keep_states && traj.iterations > 0 {
        traj.states.push(current);
    }
    Ok(traj)
}
