//! A single particle on a uniform 1-D grid, written in terms of the real
//! quadrature functions `ψ = κ₁ + iκ₂`.
//!
//! The grid Hamiltonian is `−(ħ²/2m) ∂²ₓ + V` with the three-point Laplacian
//! and zero values just outside both ends. ITE takes
//! `ψ ← ψ − dτ (Ĥ − E) ψ`; projected GD takes `κᵢ ← κᵢ − α (gᵢ − λ κᵢ)` with
//! `gᵢ = −(ħ²/m) ∂²ₓ κᵢ + 2V κᵢ` and `λ = ∫ Σᵢ κᵢ gᵢ = 2E`. Both renormalize
//! after every step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// Uniform grid of interior points `x_j = x0 + j dx`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub x0: f64,
    pub dx: f64,
}

impl Grid {
    /// `n` interior points of `[left, right]`; the endpoints carry the
    /// Dirichlet zeros.
    pub fn interior(left: f64, right: f64, n: usize) -> Result<Self> {
        if n < 2 || !(right > left) {
            return Err(Error::InvalidParameter(format!(
                "grid needs n ≥ 2 and right > left, got n={n}, [{left}, {right}]"
            )));
        }
        let dx = (right - left) / (n + 1) as f64;
        Ok(Self { n, x0: left + dx, dx })
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.x(j))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub dx: f64,
    pub x0: f64,
}

impl GridWavefunction {
    pub fn new(kappa1: Vec<f64>, kappa2: Vec<f64>, grid: Grid) -> Result<Self> {
        check_dim(grid.n, kappa1.len())?;
        check_dim(grid.n, kappa2.len())?;
        Ok(Self { kappa1, kappa2, dx: grid.dx, x0: grid.x0 })
    }

    pub fn from_fn<F: Fn(f64) -> (f64, f64)>(grid: Grid, f: F) -> Self {
        let (kappa1, kappa2) = grid.points().map(f).unzip();
        Self { kappa1, kappa2, dx: grid.dx, x0: grid.x0 }
    }

    /// Standard-normal entries, normalized.
    pub fn random(grid: Grid, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k1 = linalg::random_normal_vector(grid.n, &mut rng);
        let k2 = linalg::random_normal_vector(grid.n, &mut rng);
        Self { kappa1: k1.as_slice().to_vec(), kappa2: k2.as_slice().to_vec(), dx: grid.dx, x0: grid.x0 }
            .normalized()
    }

    pub fn len(&self) -> usize {
        self.kappa1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa1.is_empty()
    }

    pub fn grid(&self) -> Grid {
        Grid { n: self.len(), x0: self.x0, dx: self.dx }
    }

    /// `dx Σ_j (κ₁_j² + κ₂_j²)`.
    pub fn norm_sqr(&self) -> f64 {
        self.dx * self.kappa1.iter().chain(&self.kappa2).map(|k| k * k).sum::<f64>()
    }

    pub fn normalized(mut self) -> Self {
        let scale = self.norm_sqr().sqrt().recip();
        self.kappa1.iter_mut().chain(self.kappa2.iter_mut()).for_each(|k| *k *= scale);
        self
    }

    /// Multiplies `ψ` by `e^{iθ}`.
    pub fn rotate_phase(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let kappa1 = self.kappa1.iter().zip(&self.kappa2).map(|(a, b)| c * a - s * b).collect();
        let kappa2 = self.kappa1.iter().zip(&self.kappa2).map(|(a, b)| s * a + c * b).collect();
        Self { kappa1, kappa2, dx: self.dx, x0: self.x0 }
    }

    /// Largest elementwise difference over both quadratures.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.kappa1
            .iter()
            .zip(&other.kappa1)
            .chain(self.kappa2.iter().zip(&other.kappa2))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPotential {
    pub v: Vec<f64>,
    pub hbar2_over_2m: f64,
}

impl GridPotential {
    pub fn new(v: Vec<f64>, hbar2_over_2m: f64) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) || !hbar2_over_2m.is_finite() {
            return Err(Error::InvalidParameter("potential entries must be finite".into()));
        }
        Ok(Self { v, hbar2_over_2m })
    }

    /// `V = ½ m ω² x²` in units with `ħ = 1`.
    pub fn harmonic(grid: Grid, mass: f64, omega: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        Self::new(grid.points().map(|x| 0.5 * mass * omega * omega * x * x).collect(), 0.5 / mass)
    }

    pub fn free(grid: Grid, hbar2_over_2m: f64) -> Result<Self> {
        Self::new(vec![0.0; grid.n], hbar2_over_2m)
    }
}

fn laplacian(k: &[f64], dx: f64) -> Vec<f64> {
    let n = k.len();
    let inv = 1.0 / (dx * dx);
    (0..n)
        .map(|j| {
            let left = if j > 0 { k[j - 1] } else { 0.0 };
            let right = if j + 1 < n { k[j + 1] } else { 0.0 };
            (right - 2.0 * k[j] + left) * inv
        })
        .collect()
}

fn apply_hamiltonian(k: &[f64], pot: &GridPotential, dx: f64) -> Vec<f64> {
    laplacian(k, dx)
        .iter()
        .zip(k)
        .zip(&pot.v)
        .map(|((lap, k), v)| -pot.hbar2_over_2m * lap + v * k)
        .collect()
}

fn check(psi: &GridWavefunction, pot: &GridPotential) -> Result<()> {
    check_dim(psi.len(), pot.v.len())?;
    check_dim(psi.len(), psi.kappa2.len())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `E = dx Σᵢ Σ_j κᵢ_j (Ĥ κᵢ)_j`.
pub fn energy_grid(psi: &GridWavefunction, pot: &GridPotential) -> Result<f64> {
    check(psi, pot)?;
    let h1 = apply_hamiltonian(&psi.kappa1, pot, psi.dx);
    let h2 = apply_hamiltonian(&psi.kappa2, pot, psi.dx);
    Ok(psi.dx * (dot(&psi.kappa1, &h1) + dot(&psi.kappa2, &h2)))
}

/// `‖(Ĥ − E)ψ‖` in the grid `L²` norm.
pub fn residual_norm(psi: &GridWavefunction, pot: &GridPotential) -> Result<f64> {
    let e = energy_grid(psi, pot)?;
    let r = |k: &[f64]| -> f64 {
        apply_hamiltonian(k, pot, psi.dx).iter().zip(k).map(|(h, k)| (h - e * k).powi(2)).sum()
    };
    Ok((psi.dx * (r(&psi.kappa1) + r(&psi.kappa2))).sqrt())
}

/// ITE update `ψ − dτ (Ĥ − E) ψ` without renormalization.
pub fn ite_update_sp(psi: &GridWavefunction, pot: &GridPotential, d_tau: f64) -> Result<GridWavefunction> {
    let e = energy_grid(psi, pot)?;
    let update = |k: &[f64]| -> Vec<f64> {
        apply_hamiltonian(k, pot, psi.dx).iter().zip(k).map(|(h, k)| k - d_tau * (h - e * k)).collect()
    };
    Ok(GridWavefunction { kappa1: update(&psi.kappa1), kappa2: update(&psi.kappa2), dx: psi.dx, x0: psi.x0 })
}

/// Projected-gradient update `κᵢ − α (gᵢ − λ κᵢ)` without renormalization.
pub fn gd_update_sp(psi: &GridWavefunction, pot: &GridPotential, alpha: f64) -> Result<GridWavefunction> {
    check(psi, pot)?;
    let hbar2_over_m = 2.0 * pot.hbar2_over_2m;
    let gradient = |k: &[f64]| -> Vec<f64> {
        laplacian(k, psi.dx)
            .iter()
            .zip(k)
            .zip(&pot.v)
            .map(|((lap, k), v)| -hbar2_over_m * lap + 2.0 * v * k)
            .collect()
    };
    let g1 = gradient(&psi.kappa1);
    let g2 = gradient(&psi.kappa2);
    let lambda = psi.dx * (dot(&psi.kappa1, &g1) + dot(&psi.kappa2, &g2));
    let descend = |k: &[f64], g: &[f64]| -> Vec<f64> {
        k.iter().zip(g).map(|(k, g)| k - alpha * (g - lambda * k)).collect()
    };
    Ok(GridWavefunction {
        kappa1: descend(&psi.kappa1, &g1),
        kappa2: descend(&psi.kappa2, &g2),
        dx: psi.dx,
        x0: psi.x0,
    })
}

pub fn ite_step_sp(psi: &GridWavefunction, pot: &GridPotential, d_tau: f64) -> Result<GridWavefunction> {
    Ok(ite_update_sp(psi, pot, d_tau)?.normalized())
}

pub fn gd_step_sp(psi: &GridWavefunction, pot: &GridPotential, alpha: f64) -> Result<GridWavefunction> {
    Ok(gd_update_sp(psi, pot, alpha)?.normalized())
}

/// Largest stable ITE step `2 / (λ_max − E)`.
pub fn stability_bound(lambda_max: f64, energy: f64) -> f64 {
    2.0 / (lambda_max - energy)
}

#[derive(Debug, Clone)]
pub struct SpRun {
    pub psi: GridWavefunction,
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs ITE (`method_step` = `dτ`) until `‖(Ĥ − E)ψ‖ < tol` or `max_iters`.
pub fn run_ite_sp(
    psi: &GridWavefunction,
    pot: &GridPotential,
    d_tau: f64,
    max_iters: usize,
    tol: f64,
) -> Result<SpRun> {
    let mut current = psi.clone().normalized();
    let mut energies = vec![energy_grid(&current, pot)?];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        if residual_norm(&current, pot)? < tol {
            converged = true;
            break;
        }
        current = ite_step_sp(&current, pot, d_tau)?;
        energies.push(energy_grid(&current, pot)?);
        iterations += 1;
    }
    Ok(SpRun { psi: current, energies, iterations, converged })
}
