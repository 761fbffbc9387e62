//! Gaussian state representations and their validity checks.
//!
//! A pure bosonic Gaussian state is fixed by its displacement `Δ_R = ⟨R⟩` and
//! covariance `Γ_b = ½⟨{R_i − Δ_i, R_j − Δ_j}⟩`, where `Γ_b` is real,
//! symmetric, positive definite and symplectic (`Γ_b σ Γ_b = σ`). A pure
//! fermionic Gaussian state is fixed by its Majorana covariance
//! `Γ_m = (i/2)⟨[A_i, A_j]⟩`, real antisymmetric with `Γ_m² = −𝟙`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Mat, Vector};

/// The block matrix `[[0, 𝟙], [−𝟙, 0]]` on `2 n_b` quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: Mat,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidDimension("symplectic form needs at least one mode".into()));
        }
        let dim = 2 * n_modes;
        let matrix = Mat::from_fn(dim, dim, |i, j| {
            if j == i + n_modes {
                1.0
            } else if i == j + n_modes {
                -1.0
            } else {
                0.0
            }
        });
        Ok(Self { n_modes, matrix })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }
}

/// Single-mode covariance `[[a, b], [b, (1 + b²)/a]]`, which has unit
/// determinant and is therefore a pure state for every `a > 0`.
pub fn covariance_from_ab(a: f64, b: f64) -> Result<Mat> {
    if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "covariance parameters need a > 0 and finite b, got a={a}, b={b}"
        )));
    }
    Ok(Mat::from_row_slice(2, 2, &[a, b, b, (1.0 + b * b) / a]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BosonicGaussianState {
    delta_r: Vector,
    gamma_b: Mat,
}

impl BosonicGaussianState {
    /// Checks only shapes; use [`validate_bosonic`] for the physical invariants.
    pub fn new(delta_r: Vector, gamma_b: Mat) -> Result<Self> {
        let dim = delta_r.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "displacement length must be a positive even number, got {dim}"
            )));
        }
        check_dim(dim, gamma_b.nrows())?;
        check_dim(dim, gamma_b.ncols())?;
        Ok(Self { delta_r, gamma_b })
    }

    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidDimension("need at least one mode".into()));
        }
        Self::new(Vector::zeros(2 * n_modes), Mat::identity(2 * n_modes, 2 * n_modes))
    }

    /// Single-mode state with covariance [`covariance_from_ab`] and displacement `(x, p)`.
    pub fn single_mode(a: f64, b: f64, displacement: [f64; 2]) -> Result<Self> {
        Self::new(Vector::from_column_slice(&displacement), covariance_from_ab(a, b)?)
    }

    pub fn n_modes(&self) -> usize {
        self.delta_r.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.delta_r.len()
    }

    pub fn delta_r(&self) -> &Vector {
        &self.delta_r
    }

    pub fn gamma_b(&self) -> &Mat {
        &self.gamma_b
    }

    /// Random pure state `Γ_b = S Sᵀ` with `S = exp(scale · σK)` for a
    /// standard-normal symmetric `K`, and a standard-normal displacement.
    pub fn random(n_modes: usize, scale: f64, seed: u64) -> Result<Self> {
        let sigma = SymplecticForm::new(n_modes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = linalg::random_symmetric(sigma.dim(), &mut rng);
        let s = (sigma.matrix() * k * scale).exp();
        let gamma = linalg::symmetrize(&(&s * s.transpose()));
        let delta = linalg::random_normal_vector(sigma.dim(), &mut rng);
        Self::new(delta, gamma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionicGaussianState {
    gamma_m: Mat,
}

impl FermionicGaussianState {
    pub fn new(gamma_m: Mat) -> Result<Self> {
        let dim = gamma_m.nrows();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "Majorana covariance dimension must be a positive even number, got {dim}"
            )));
        }
        check_dim(dim, gamma_m.ncols())?;
        Ok(Self { gamma_m })
    }

    /// Fock vacuum: `(Γ_m)_{a_{1,i}, a_{2,i}} = −1`, i.e. `Γ_m = −σ`.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        let sigma = SymplecticForm::new(n_modes)?;
        Self::new(-sigma.matrix())
    }

    pub fn n_modes(&self) -> usize {
        self.gamma_m.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.gamma_m.nrows()
    }

    pub fn gamma_m(&self) -> &Mat {
        &self.gamma_m
    }

    /// Conjugates by the reflection of the first Majorana, which maps a pure
    /// state onto the opposite fermion-parity sector.
    pub fn parity_flipped(&self) -> Self {
        let mut g = self.gamma_m.clone();
        g.row_mut(0).neg_mut();
        g.column_mut(0).neg_mut();
        Self { gamma_m: g }
    }

    /// Fermion-number parity of a pure state: `+1` in the vacuum's sector,
    /// `−1` in the other, from the sign of the Pfaffian of `Γ_m`.
    pub fn parity(&self) -> i8 {
        let vac = Self::vacuum(self.n_modes()).expect("a constructed state has at least one mode");
        if linalg::pfaffian(&self.gamma_m) * linalg::pfaffian(&vac.gamma_m) >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// `Γ_m = O J Oᵀ` with `J` block-diagonal in `[[0, 1], [−1, 0]]` and `O` a
/// seeded random orthogonal matrix.
pub fn random_pure_fermionic(n_modes: usize, seed: u64) -> Result<FermionicGaussianState> {
    if n_modes == 0 {
        return Err(Error::InvalidDimension("need at least one fermionic mode".into()));
    }
    let dim = 2 * n_modes;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = linalg::random_orthogonal(dim, &mut rng);
    let mut j = Mat::zeros(dim, dim);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    let gamma = linalg::antisymmetrize(&(&o * j * o.transpose()));
    FermionicGaussianState::new(gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub tol: f64,
    pub checks: Vec<InvariantCheck>,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.residual)
    }

    /// Largest residual among the checks that are tolerance-based.
    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.name != POSITIVE_DEFINITE)
            .fold(0.0, |acc, c| acc.max(c.residual))
    }
}

pub const SYMMETRY: &str = "symmetry";
pub const SYMPLECTIC: &str = "symplectic";
pub const POSITIVE_DEFINITE: &str = "positive_definite";
pub const ANTISYMMETRY: &str = "antisymmetry";
pub const PURITY: &str = "purity";

pub fn symplectic_residual(gamma_b: &Mat, sigma: &SymplecticForm) -> f64 {
    let s = sigma.matrix();
    linalg::max_abs(&(gamma_b * s * gamma_b - s))
}

pub fn purity_residual(gamma_m: &Mat) -> f64 {
    let n = gamma_m.nrows();
    linalg::max_abs(&(gamma_m * gamma_m + Mat::identity(n, n)))
}

/// Like [`random_pure_fermionic`], moved into the requested parity sector
/// (`+1` is the vacuum's) when needed.
pub fn random_pure_fermionic_with_parity(n_modes: usize, parity: i8, seed: u64) -> Result<FermionicGaussianState> {
    let s = random_pure_fermionic(n_modes, seed)?;
    Ok(if s.parity() == parity { s } else { s.parity_flipped() })
}

/// Pure covariance sharing the Williamson frame of `gamma_b`: with
/// `Γ = S D Sᵀ` this returns `S Sᵀ`, computed as `Γ^½ K^(−½) Γ^½` where
/// `K = Γ^½ σᵀ Γ σ Γ^½`. Fails unless `gamma_b` is positive definite.
pub fn purified_covariance(gamma_b: &Mat, sigma: &SymplecticForm) -> Result<Mat> {
    check_dim(sigma.dim(), gamma_b.nrows())?;
    let not_pd = || Error::InvalidParameter("Γ_b is not positive definite".into());
    let root = linalg::spd_power(gamma_b, 0.5).ok_or_else(not_pd)?;
    let s = sigma.matrix();
    let k = &root * s.transpose() * gamma_b * s * &root;
    let k_inv_root = linalg::spd_power(&k, -0.5).ok_or_else(not_pd)?;
    Ok(linalg::symmetrize(&(&root * k_inv_root * &root)))
}

/// Residuals are max-abs entry norms. The positive-definiteness residual is
/// `max(0, −λ_min)`; the check itself requires `λ_min > 0`.
pub fn validate_bosonic(state: &BosonicGaussianState, tol: f64) -> Result<ValidityReport> {
    let sigma = SymplecticForm::new(state.n_modes())?;
    let g = state.gamma_b();
    let sym = linalg::max_abs(&(g - g.transpose()));
    let symp = symplectic_residual(g, &sigma);
    let min_eig = linalg::sorted_symmetric_eigenvalues(g)[0];
    let pd = linalg::is_positive_definite(g) && min_eig > 0.0;
    Ok(ValidityReport {
        tol,
        checks: vec![
            InvariantCheck { name: SYMMETRY, residual: sym, passed: sym <= tol },
            InvariantCheck { name: SYMPLECTIC, residual: symp, passed: symp <= tol },
            InvariantCheck { name: POSITIVE_DEFINITE, residual: (-min_eig).max(0.0), passed: pd },
        ],
    })
}

pub fn validate_fermionic(state: &FermionicGaussianState, tol: f64) -> Result<ValidityReport> {
    let g = state.gamma_m();
    if g.nrows() % 2 != 0 {
        return Err(Error::InvalidDimension(format!("odd Majorana dimension {}", g.nrows())));
    }
    let anti = linalg::max_abs(&(g + g.transpose()));
    let pur = purity_residual(g);
    Ok(ValidityReport {
        tol,
        checks: vec![
            InvariantCheck { name: ANTISYMMETRY, residual: anti, passed: anti <= tol },
            InvariantCheck { name: PURITY, residual: pur, passed: pur <= tol },
        ],
    })
}
