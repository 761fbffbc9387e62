//! Quadratic Hamiltonians with closed-form energies and gradient matrices.
//!
//! Bosons: `H = ¼ Rᵀ h_r R + c0` with `R = (x, p)`, `x = b† + b`,
//! `p = i(b† − b)`. Using `⟨R_i R_j⟩_sym = Γ_ij + Δ_i Δ_j`,
//! `E = ¼[Tr(h_r Γ_b) + Δᵀ h_r Δ] + c0`, so `h_Δ = h_r Δ` and `h_b = h_r`.
//!
//! Fermions: `H = (i/4) Aᵀ h_maj A`. Using `⟨A_i A_j⟩ = δ_ij − i(Γ_m)_ij`,
//! `E = ¼ Σ_ij (h_maj)_ij (Γ_m)_ij` and `h_m = h_maj`. For one mode,
//! `h_maj = ε[[0, 1], [−1, 0]]` is `ε(c†c − ½)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::gaussian::{BosonicGaussianState, FermionicGaussianState};
use crate::linalg::{self, Mat, Vector};

const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBosonHamiltonian {
    h_r: Mat,
    c0: f64,
}

impl QuadraticBosonHamiltonian {
    pub fn new(h_r: Mat, c0: f64) -> Result<Self> {
        let dim = h_r.nrows();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "quadrature Hamiltonian dimension must be a positive even number, got {dim}"
            )));
        }
        check_dim(dim, h_r.ncols())?;
        let asym = linalg::max_abs(&(&h_r - h_r.transpose()));
        if asym > STRUCTURE_TOL * linalg::max_abs(&h_r).max(1.0) {
            return Err(Error::InvalidParameter(format!("h_r is not symmetric (residual {asym:e})")));
        }
        Ok(Self { h_r: linalg::symmetrize(&h_r), c0 })
    }

    /// `ω b†b = (ω/4)(x² + p²) − ω/2`.
    pub fn single_mode(omega: f64) -> Self {
        Self { h_r: Mat::identity(2, 2) * omega, c0: -0.5 * omega }
    }

    /// `Σ_ij b†_i ω_ij b_j` for real symmetric `ω`, which in quadratures is
    /// `¼ Rᵀ (ω ⊕ ω) R − ½ Tr ω`.
    pub fn from_mode_matrix(omega: &Mat) -> Result<Self> {
        let n = omega.nrows();
        check_dim(n, omega.ncols())?;
        let mut h_r = Mat::zeros(2 * n, 2 * n);
        h_r.view_mut((0, 0), (n, n)).copy_from(omega);
        h_r.view_mut((n, n), (n, n)).copy_from(omega);
        Self::new(h_r, -0.5 * omega.trace())
    }

    pub fn h_r(&self) -> &Mat {
        &self.h_r
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn dim(&self) -> usize {
        self.h_r.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.dim() / 2
    }

    fn check(&self, state: &BosonicGaussianState) -> Result<()> {
        check_dim(self.dim(), state.dim())
    }

    pub fn energy(&self, state: &BosonicGaussianState) -> Result<f64> {
        self.check(state)?;
        Ok(self.energy_unchecked(state.delta_r(), state.gamma_b()))
    }

    /// Energy as a function of arbitrary (possibly off-manifold) moments.
    pub fn energy_unchecked(&self, delta_r: &Vector, gamma_b: &Mat) -> f64 {
        let quad = delta_r.dot(&(&self.h_r * delta_r));
        0.25 * (linalg::frobenius_inner(&self.h_r, gamma_b) + quad) + self.c0
    }

    pub fn gradients(&self, state: &BosonicGaussianState) -> Result<BosonGradients> {
        self.check(state)?;
        Ok(BosonGradients { h_delta: &self.h_r * state.delta_r(), h_b: self.h_r.clone() })
    }
}

/// `h_Δ = 2 ∂E/∂Δ_R` and `h_b = 4 ∂E/∂Γ_b`, entries of `Γ_b` treated as independent.
#[derive(Debug, Clone, PartialEq)]
pub struct BosonGradients {
    pub h_delta: Vector,
    pub h_b: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMajoranaHamiltonian {
    h_maj: Mat,
}

impl QuadraticMajoranaHamiltonian {
    pub fn new(h_maj: Mat) -> Result<Self> {
        let dim = h_maj.nrows();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "Majorana Hamiltonian dimension must be a positive even number, got {dim}"
            )));
        }
        check_dim(dim, h_maj.ncols())?;
        let sym = linalg::max_abs(&(&h_maj + h_maj.transpose()));
        if sym > STRUCTURE_TOL * linalg::max_abs(&h_maj).max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "h_maj is not antisymmetric (residual {sym:e})"
            )));
        }
        Ok(Self { h_maj: linalg::antisymmetrize(&h_maj) })
    }

    /// `ε(c†c − ½)` on a single mode.
    pub fn single_mode(epsilon: f64) -> Self {
        Self { h_maj: Mat::from_row_slice(2, 2, &[0.0, epsilon, -epsilon, 0.0]) }
    }

    /// Antisymmetric part of a standard-normal matrix.
    pub fn random(n_modes: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(linalg::random_antisymmetric(2 * n_modes, &mut rng))
    }

    pub fn h_maj(&self) -> &Mat {
        &self.h_maj
    }

    pub fn dim(&self) -> usize {
        self.h_maj.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.dim() / 2
    }

    pub fn energy(&self, state: &FermionicGaussianState) -> Result<f64> {
        check_dim(self.dim(), state.dim())?;
        Ok(self.energy_unchecked(state.gamma_m()))
    }

    pub fn energy_unchecked(&self, gamma_m: &Mat) -> f64 {
        0.25 * linalg::frobenius_inner(&self.h_maj, gamma_m)
    }

    /// `h_m = 4 ∂E/∂Γ_m`, antisymmetrized.
    pub fn gradient(&self, state: &FermionicGaussianState) -> Result<Mat> {
        check_dim(self.dim(), state.dim())?;
        Ok(linalg::antisymmetrize(&self.h_maj))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SymplecticForm;

    #[test]
    fn single_mode_mapping() {
        let h = QuadraticBosonHamiltonian::single_mode(1.0);
        assert_eq!(h.h_r(), &Mat::identity(2, 2));
        assert_eq!(h.c0(), -0.5);
        let h = QuadraticBosonHamiltonian::single_mode(0.0);
        assert_eq!(h.h_r(), &Mat::zeros(2, 2));
        assert_eq!(h.c0(), 0.0);
        let h = QuadraticBosonHamiltonian::single_mode(2.0);
        assert_eq!(h.h_r(), &(Mat::identity(2, 2) * 2.0));
        assert_eq!(h.c0(), -1.0);
        assert_eq!(
            QuadraticBosonHamiltonian::from_mode_matrix(&Mat::from_element(1, 1, 2.0)).unwrap(),
            h
        );
    }

    #[test]
    fn boson_energy_examples() {
        let h = QuadraticBosonHamiltonian::single_mode(1.0);
        let vac = BosonicGaussianState::vacuum(1).unwrap();
        assert_eq!(h.energy(&vac).unwrap(), 0.0);
        let coherent = BosonicGaussianState::single_mode(1.0, 0.0, [2.0, 0.0]).unwrap();
        assert!((h.energy(&coherent).unwrap() - 1.0).abs() < 1e-15);
        let squeezed = BosonicGaussianState::single_mode(2.0, 0.0, [0.0, 0.0]).unwrap();
        assert!((h.energy(&squeezed).unwrap() - 0.125).abs() < 1e-15);
        let two_mode = BosonicGaussianState::vacuum(2).unwrap();
        assert!(matches!(h.energy(&two_mode), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn boson_gradient_examples() {
        let h = QuadraticBosonHamiltonian::single_mode(1.0);
        let vac = BosonicGaussianState::vacuum(1).unwrap();
        assert_eq!(h.gradients(&vac).unwrap().h_delta, Vector::zeros(2));
        let coherent = BosonicGaussianState::single_mode(1.0, 0.0, [2.0, 0.0]).unwrap();
        assert_eq!(h.gradients(&coherent).unwrap().h_delta, Vector::from_column_slice(&[2.0, 0.0]));
        let h3 = QuadraticBosonHamiltonian::single_mode(3.0);
        let s = BosonicGaussianState::single_mode(0.7, -0.3, [0.1, 0.4]).unwrap();
        assert_eq!(h3.gradients(&s).unwrap().h_b, Mat::identity(2, 2) * 3.0);
    }

    #[test]
    fn rejects_malformed_hamiltonians() {
        let bad = Mat::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(QuadraticBosonHamiltonian::new(bad.clone(), 0.0).is_err());
        assert!(QuadraticMajoranaHamiltonian::new(bad).is_err());
        assert!(QuadraticBosonHamiltonian::new(Mat::identity(3, 3), 0.0).is_err());
    }

    #[test]
    fn fermion_energy_examples() {
        let zero = QuadraticMajoranaHamiltonian::new(Mat::zeros(4, 4)).unwrap();
        let s = crate::gaussian::random_pure_fermionic(2, 3).unwrap();
        assert_eq!(zero.energy(&s).unwrap(), 0.0);
        assert_eq!(zero.gradient(&s).unwrap(), Mat::zeros(4, 4));

        let eps = 1.7;
        let h = QuadraticMajoranaHamiltonian::single_mode(eps);
        let j = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let up = FermionicGaussianState::new(j.clone()).unwrap();
        let down = FermionicGaussianState::new(-j.clone()).unwrap();
        assert!((h.energy(&up).unwrap() - eps / 2.0).abs() < 1e-15);
        assert!((h.energy(&down).unwrap() + eps / 2.0).abs() < 1e-15);
        // the Fock vacuum is the lower state for ε > 0
        assert_eq!(FermionicGaussianState::vacuum(1).unwrap(), down);

        let unit = QuadraticMajoranaHamiltonian::single_mode(1.0);
        let hm = unit.gradient(&up).unwrap();
        assert_eq!(hm, j);
        assert_eq!(&hm + hm.transpose(), Mat::zeros(2, 2));
    }

    #[test]
    fn boson_energy_invariant_under_symplectic_orthogonal_rotation() {
        // O = [[X, Y], [−Y, X]] with X + iY unitary commutes with σ.
        let theta: f64 = 0.37;
        let phi: f64 = -1.1;
        let (c, s) = (theta.cos(), theta.sin());
        let x = Mat::from_row_slice(2, 2, &[c * phi.cos(), -s, s * phi.cos(), c]);
        let y = Mat::from_row_slice(2, 2, &[c * phi.sin(), 0.0, s * phi.sin(), 0.0]);
        let mut o = Mat::zeros(4, 4);
        o.view_mut((0, 0), (2, 2)).copy_from(&x);
        o.view_mut((0, 2), (2, 2)).copy_from(&y);
        o.view_mut((2, 0), (2, 2)).copy_from(&(-&y));
        o.view_mut((2, 2), (2, 2)).copy_from(&x);
        let sigma = SymplecticForm::new(2).unwrap();
        assert!(linalg::max_abs(&(&o * o.transpose() - Mat::identity(4, 4))) < 1e-14);
        assert!(linalg::max_abs(&(&o * sigma.matrix() * o.transpose() - sigma.matrix())) < 1e-14);

        let omega = Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        let ham = QuadraticBosonHamiltonian::from_mode_matrix(&omega).unwrap();
        for seed in 0..10 {
            let st = BosonicGaussianState::random(2, 0.5, seed).unwrap();
            let e = ham.energy(&st).unwrap();
            let rot_h = QuadraticBosonHamiltonian::new(&o * ham.h_r() * o.transpose(), ham.c0()).unwrap();
            let rot_s = BosonicGaussianState::new(&o * st.delta_r(), &o * st.gamma_b() * o.transpose()).unwrap();
            let e_rot = rot_h.energy(&rot_s).unwrap();
            assert!((e - e_rot).abs() < 1e-12 * e.abs().max(1.0));
            // gradients transform covariantly
            let g = ham.gradients(&st).unwrap();
            let g_rot = rot_h.gradients(&rot_s).unwrap();
            assert!((&o * &g.h_delta - &g_rot.h_delta).amax() < 1e-12);
            assert!(linalg::max_abs(&(&o * &g.h_b * o.transpose() - &g_rot.h_b)) < 1e-12);
        }
    }

    #[test]
    fn boson_energy_bounded_below_by_vacuum() {
        let h = QuadraticBosonHamiltonian::single_mode(1.0);
        for seed in 0..100 {
            let st = BosonicGaussianState::random(1, 0.8, seed).unwrap();
            assert!(h.energy(&st).unwrap() >= -1e-12);
        }
    }
}
