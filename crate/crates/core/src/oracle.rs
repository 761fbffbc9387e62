//! Brute-force ground truth: Fock-space exact diagonalization for one bosonic
//! mode and for a few fermionic modes, dense diagonalization of grid
//! Hamiltonians, and central finite differences.
//!
//! The bosonic Hamiltonian is assembled from normal-ordered expressions,
//! `x² = b² + b†² + 2b†b + 1`, `p² = −b² − b†² + 2b†b + 1` and
//! `(xp + px)/2 = i(b†² − b²)`, so each truncated matrix element is exact.
//! Jordan-Wigner strings run in mode-index order.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{QuadraticBosonHamiltonian, QuadraticMajoranaHamiltonian};
use crate::linalg::{self, Mat, Vector};

pub type CMat = DMatrix<Complex64>;

/// Largest fermionic mode count accepted by [`fermion_ed`].
pub const MAX_FERMION_MODES: usize = 6;

/// Number of eigenvalues kept in [`EdResult::spectrum_head`].
pub const SPECTRUM_HEAD: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EdResult {
    pub ground_energy: f64,
    /// Lowest eigenvalues, ascending.
    pub spectrum_head: Vec<f64>,
    /// Bosonic Fock cutoff `n_max`, or the fermionic Hilbert-space dimension.
    pub truncation: usize,
}

impl EdResult {
    fn from_eigenvalues(mut ev: Vec<f64>, truncation: usize) -> Self {
        ev.sort_by(f64::total_cmp);
        ev.truncate(SPECTRUM_HEAD);
        Self { ground_energy: ev[0], spectrum_head: ev, truncation }
    }
}

fn hermitian_eigenvalues(m: CMat) -> Vec<f64> {
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    m.symmetric_eigenvalues().iter().copied().collect()
}

pub fn boson_ed(ham: &QuadraticBosonHamiltonian, n_max: usize) -> Result<EdResult> {
    if ham.n_modes() != 1 {
        return Err(Error::Unsupported(format!(
            "bosonic exact diagonalization is single-mode only, got {} modes",
            ham.n_modes()
        )));
    }
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!("Fock cutoff n_max must be at least 2, got {n_max}")));
    }
    let dim = n_max + 1;
    let h = ham.h_r();
    let (hxx, hpp, hxp) = (h[(0, 0)], h[(1, 1)], h[(0, 1)]);
    let mut m = CMat::zeros(dim, dim);
    for n in 0..dim {
        let nf = n as f64;
        // 2b†b + 1 appears in both x² and p²
        m[(n, n)] += Complex64::new(0.25 * (hxx + hpp) * (2.0 * nf + 1.0) + ham.c0(), 0.0);
        if n + 2 < dim {
            // ⟨n+2| b†² |n⟩
            let amp = ((nf + 1.0) * (nf + 2.0)).sqrt();
            let up = Complex64::new(0.25 * (hxx - hpp) * amp, 0.5 * hxp * amp);
            m[(n + 2, n)] += up;
            m[(n, n + 2)] += up.conj();
        }
    }
    Ok(EdResult::from_eigenvalues(hermitian_eigenvalues(m), n_max))
}

/// Jordan-Wigner Majorana operators in the order
/// `(a_{1,1}..a_{1,N}, a_{2,1}..a_{2,N})`, with `a_1 = c† + c` and
/// `a_2 = i(c† − c)`. Basis state `k` has mode `j` occupied iff bit `j` is set.
pub fn majorana_operators(n_modes: usize) -> Vec<CMat> {
    let dim = 1usize << n_modes;
    let annihilators: Vec<Mat> = (0..n_modes)
        .map(|j| {
            let mut c = Mat::zeros(dim, dim);
            for k in 0..dim {
                if k & (1 << j) != 0 {
                    let below = (k & ((1 << j) - 1)).count_ones();
                    c[(k ^ (1 << j), k)] = if below % 2 == 0 { 1.0 } else { -1.0 };
                }
            }
            c
        })
        .collect();
    let first = annihilators.iter().map(|c| (c.transpose() + c).map(|x| Complex64::new(x, 0.0)));
    let second = annihilators.iter().map(|c| (c.transpose() - c).map(|x| Complex64::new(0.0, x)));
    first.chain(second).collect()
}

fn fermion_many_body_matrix(ham: &QuadraticMajoranaHamiltonian) -> Result<CMat> {
    let n = ham.n_modes();
    if n > MAX_FERMION_MODES {
        return Err(Error::Unsupported(format!(
            "fermionic exact diagonalization is limited to {MAX_FERMION_MODES} modes, got {n}"
        )));
    }
    let ops = majorana_operators(n);
    let dim = 1usize << n;
    let h = ham.h_maj();
    let mut m = CMat::zeros(dim, dim);
    for i in 0..2 * n {
        for j in 0..2 * n {
            if h[(i, j)] != 0.0 {
                m += &ops[i] * &ops[j] * Complex64::new(0.0, 0.25 * h[(i, j)]);
            }
        }
    }
    Ok(m)
}

pub fn fermion_ed(ham: &QuadraticMajoranaHamiltonian) -> Result<EdResult> {
    let m = fermion_many_body_matrix(ham)?;
    let dim = m.nrows();
    Ok(EdResult::from_eigenvalues(hermitian_eigenvalues(m), dim))
}

/// Ground energies restricted to even and odd total occupation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityGroundEnergies {
    pub even: f64,
    pub odd: f64,
}

pub fn fermion_ed_by_parity(ham: &QuadraticMajoranaHamiltonian) -> Result<ParityGroundEnergies> {
    let m = fermion_many_body_matrix(ham)?;
    let dim = m.nrows();
    let ground = |parity: u32| {
        let idx: Vec<usize> = (0..dim).filter(|k| k.count_ones() % 2 == parity).collect();
        let block = CMat::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
        hermitian_eigenvalues(block).into_iter().fold(f64::INFINITY, f64::min)
    };
    Ok(ParityGroundEnergies { even: ground(0), odd: ground(1) })
}

/// Positive canonical frequencies `ε_k` of an antisymmetric `h`: the
/// eigenvalues of `hᵀh` come in pairs `ε_k²`.
pub fn canonical_frequencies(h_maj: &Mat) -> Vec<f64> {
    let mut ev: Vec<f64> = (h_maj.transpose() * h_maj).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.iter().step_by(2).map(|x| x.max(0.0).sqrt()).collect()
}

/// `E_0 = −½ Σ_k ε_k`, independent of the Fock-space construction.
pub fn fermion_ground_energy_canonical(ham: &QuadraticMajoranaHamiltonian) -> f64 {
    -0.5 * canonical_frequencies(ham.h_maj()).iter().sum::<f64>()
}

/// Covariance of the Gaussian ground state, `Γ_m = −h (hᵀh)^(−1/2)`.
/// Fails when `h_maj` has a zero canonical frequency (degenerate ground
/// state).
pub fn fermion_ground_covariance(ham: &QuadraticMajoranaHamiltonian) -> Result<Mat> {
    let h = ham.h_maj();
    let eig = (h.transpose() * h).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 1e-24) {
        return Err(Error::InvalidParameter("hamiltonian has a zero mode".into()));
    }
    let inv_sqrt = Mat::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let root = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    Ok(linalg::antisymmetrize(&(-h * root)))
}

/// Dense symmetric matrix of `−(ħ²/2m) ∂²ₓ + V` with the three-point
/// Laplacian and zero (Dirichlet) boundaries.
pub fn grid_hamiltonian(v: &[f64], hbar2_over_2m: f64, dx: f64) -> Mat {
    let n = v.len();
    let t = hbar2_over_2m / (dx * dx);
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * t + v[i]
        } else if i + 1 == j || j + 1 == i {
            -t
        } else {
            0.0
        }
    })
}

pub fn grid_ed(v: &[f64], hbar2_over_2m: f64, dx: f64) -> Result<EdResult> {
    if v.len() < 2 {
        return Err(Error::InvalidDimension("grid needs at least two points".into()));
    }
    let ev: Vec<f64> = grid_hamiltonian(v, hbar2_over_2m, dx).symmetric_eigenvalues().iter().copied().collect();
    Ok(EdResult::from_eigenvalues(ev, v.len()))
}

/// Largest eigenvalue of the grid Hamiltonian.
pub fn grid_max_eigenvalue(v: &[f64], hbar2_over_2m: f64, dx: f64) -> f64 {
    grid_hamiltonian(v, hbar2_over_2m, dx)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Central difference `(f(x + h e_i) − f(x − h e_i)) / 2h`.
pub fn fd_gradient<F: Fn(&Vector) -> f64>(f: F, x: &Vector, index: usize, h: f64) -> f64 {
    let mut plus = x.clone();
    let mut minus = x.clone();
    plus[index] += h;
    minus[index] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// Central difference in one matrix entry, all other entries held fixed.
pub fn fd_gradient_entry<F: Fn(&Mat) -> f64>(f: F, m: &Mat, entry: (usize, usize), h: f64) -> f64 {
    let mut plus = m.clone();
    let mut minus = m.clone();
    plus[entry] += h;
    minus[entry] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn boson_ed_number_spectrum() {
        let r = boson_ed(&QuadraticBosonHamiltonian::single_mode(1.0), 20).unwrap();
        assert_eq!(r.truncation, 20);
        for (k, e) in r.spectrum_head.iter().enumerate() {
            assert!((e - k as f64).abs() < 1e-12, "level {k}: {e}");
        }
        let r = boson_ed(&QuadraticBosonHamiltonian::single_mode(2.0), 20).unwrap();
        for w in r.spectrum_head.windows(2) {
            assert!((w[1] - w[0] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boson_ed_errors() {
        let two = QuadraticBosonHamiltonian::new(Mat::identity(4, 4), 0.0).unwrap();
        assert!(matches!(boson_ed(&two, 10), Err(Error::Unsupported(_))));
        assert!(boson_ed(&QuadraticBosonHamiltonian::single_mode(1.0), 1).is_err());
    }

    #[test]
    fn boson_ed_squeezing_hamiltonian_is_cutoff_stable() {
        let h = QuadraticBosonHamiltonian::new(Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]), -0.5).unwrap();
        let e40 = boson_ed(&h, 40).unwrap().ground_energy;
        let e50 = boson_ed(&h, 50).unwrap().ground_energy;
        assert!((e40 - e50).abs() < 1e-10);
        // ¼(2x² + ½p²) is an oscillator of frequency 1 with zero-point ½
        assert!(e40.abs() < 1e-10, "{e40}");
    }

    #[test]
    fn boson_ed_handles_xp_coupling() {
        // h_r with off-diagonal entries: compare with the symplectic eigenvalue
        // formula E_0 = ½ √det(h_r) + c0 for a positive-definite 2×2 h_r.
        let h_r = Mat::from_row_slice(2, 2, &[1.3, 0.4, 0.4, 0.9]);
        let h = QuadraticBosonHamiltonian::new(h_r.clone(), 0.0).unwrap();
        let e = boson_ed(&h, 60).unwrap().ground_energy;
        assert!((e - 0.5 * h_r.determinant().sqrt()).abs() < 1e-10, "{e}");
    }

    #[test]
    fn majorana_algebra() {
        for n in 1..=4 {
            let ops = majorana_operators(n);
            let dim = 1 << n;
            for i in 0..2 * n {
                for j in 0..2 * n {
                    let ac = &ops[i] * &ops[j] + &ops[j] * &ops[i];
                    let expected = if i == j { 2.0 } else { 0.0 };
                    let res = (ac - CMat::identity(dim, dim) * Complex64::new(expected, 0.0)).camax();
                    assert!(res <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn fermion_ed_single_mode() {
        let eps = 1.3;
        let r = fermion_ed(&QuadraticMajoranaHamiltonian::single_mode(eps)).unwrap();
        // ε(c†c − ½): levels −ε/2 and ε/2
        assert!((r.spectrum_head[0] + eps / 2.0).abs() < 1e-14);
        assert!((r.spectrum_head[1] - eps / 2.0).abs() < 1e-14);
        assert_eq!(r.truncation, 2);
        let p = fermion_ed_by_parity(&QuadraticMajoranaHamiltonian::single_mode(eps)).unwrap();
        assert!((p.even + eps / 2.0).abs() < 1e-14);
        assert!((p.odd - eps / 2.0).abs() < 1e-14);
    }

    #[test]
    fn fermion_ed_zero_hamiltonian() {
        let r = fermion_ed(&QuadraticMajoranaHamiltonian::new(Mat::zeros(6, 6)).unwrap()).unwrap();
        assert!(r.spectrum_head.iter().all(|e| e.abs() < 1e-15));
    }

    #[test]
    fn fermion_ed_size_limit() {
        let big = QuadraticMajoranaHamiltonian::new(Mat::zeros(14, 14)).unwrap();
        assert!(matches!(fermion_ed(&big), Err(Error::Unsupported(_))));
    }

    #[test]
    fn fermion_oracles_agree() {
        for n in 1..=4 {
            for seed in 0..5 {
                let h = QuadraticMajoranaHamiltonian::random(n, 100 * n as u64 + seed).unwrap();
                let ed = fermion_ed(&h).unwrap().ground_energy;
                let canon = fermion_ground_energy_canonical(&h);
                assert!((ed - canon).abs() < 1e-10, "n={n}: {ed} vs {canon}");
                let p = fermion_ed_by_parity(&h).unwrap();
                assert!((p.even.min(p.odd) - ed).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn grid_ed_particle_in_box() {
        let n = 512;
        let l = 1.0;
        let dx = l / (n + 1) as f64;
        let r = grid_ed(&vec![0.0; n], 0.5, dx).unwrap();
        let exact = 0.5 * std::f64::consts::PI.powi(2) / (l * l);
        assert!((r.ground_energy - exact).abs() / exact < 1e-4);
    }

    #[test]
    fn fd_examples() {
        let x = Vector::from_column_slice(&[3.0]);
        assert_eq!(fd_gradient(|_| 4.2, &x, 0, 1e-5), 0.0);
        let g = fd_gradient(|v| v[0] * v[0], &x, 0, 1e-5);
        assert!((g - 6.0).abs() < 1e-9);
        let m = Mat::identity(2, 2);
        let g = fd_gradient_entry(|m| m[(0, 1)] * 2.0, &m, (0, 1), 1e-5);
        assert!((g - 2.0).abs() < 1e-9);
        assert!(max_abs(&m) == 1.0);
    }

    #[test]
    fn ground_covariance_is_pure_and_optimal() {
        use crate::gaussian::{purity_residual, FermionicGaussianState};
        for seed in 0..20 {
            let n = 1 + (seed % 4) as usize;
            let h = QuadraticMajoranaHamiltonian::random(n, seed).unwrap();
            let g = fermion_ground_covariance(&h).unwrap();
            assert!(purity_residual(&g) < 1e-12);
            let e0 = fermion_ground_energy_canonical(&h);
            assert!((h.energy_unchecked(&g) - e0).abs() < 1e-12);
            let by_parity = fermion_ed_by_parity(&h).unwrap();
            let sector = match FermionicGaussianState::new(g).unwrap().parity() {
                1 => by_parity.even,
                _ => by_parity.odd,
            };
            assert!((sector - e0).abs() < 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn squeezing_ed_matches_gaussian_minimum() {
        use crate::evolve::{run_to_convergence, Boson, Method, StepperConfig};
        use crate::gaussian::BosonicGaussianState;
        let ham = QuadraticBosonHamiltonian::new(Mat::from_diagonal(&Vector::from_vec(vec![2.0, 0.5])), -0.5).unwrap();
        let ed = boson_ed(&ham, 40).unwrap().ground_energy;
        let start = BosonicGaussianState::single_mode(1.0, 0.3, [0.5, -0.5]).unwrap();
        let cfg = StepperConfig { step: 1e-2, grad_tol: 1e-11, keep_states: false, ..StepperConfig::default() };
        let traj = run_to_convergence::<Boson>(Method::Ite, &start, &ham, &cfg).unwrap();
        assert!(traj.converged);
        assert!((traj.final_energy() - ed).abs() < 1e-8, "{} vs {ed}", traj.final_energy());
        let g = traj.final_state().gamma_b();
        assert!((g[(0, 0)] - 0.5).abs() < 1e-8 && (g[(1, 1)] - 2.0).abs() < 1e-8);
    }
}
