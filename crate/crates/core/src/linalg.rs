//! Small dense-matrix helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Frobenius inner product `Σ_ij a_ij b_ij = Tr(aᵀ b)`.
pub fn frobenius_inner(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn antisymmetrize(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

pub fn is_positive_definite(m: &Mat) -> bool {
    m.iter().all(|x| x.is_finite()) && m.clone().cholesky().is_some()
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn sorted_symmetric_eigenvalues(m: &Mat) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn random_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_normal_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vector {
    Vector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// Orthonormalizes a standard-normal matrix. The sign fix on the diagonal of
/// `R` makes the result Haar-distributed.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let qr = random_normal_matrix(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

pub fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    symmetrize(&random_normal_matrix(n, n, rng))
}

pub fn random_antisymmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    antisymmetrize(&random_normal_matrix(n, n, rng))
}

/// `m^p` for symmetric positive-definite `m`, or `None` when `m` has a
/// non-positive eigenvalue.
pub fn spd_power(m: &Mat, p: f64) -> Option<Mat> {
    let eig = symmetrize(m).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let d = Mat::from_diagonal(&eig.eigenvalues.map(|l| l.powf(p)));
    Some(symmetrize(&(&eig.eigenvectors * d * eig.eigenvectors.transpose())))
}

/// Pfaffian of an antisymmetric matrix by skew-symmetric elimination with
/// partial pivoting. Zero for odd dimension.
pub fn pfaffian(a: &Mat) -> f64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut a = a.clone();
    let mut pf = 1.0;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let kp = (k + 1..n).max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs())).unwrap_or(k + 1);
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == 0.0 {
            return 0.0;
        }
        pf *= pivot;
        if k + 2 < n {
            let m = n - k - 2;
            let tau = a.view((k, k + 2), (1, m)).transpose() / pivot;
            let col = a.view((k + 2, k + 1), (m, 1)).into_owned();
            let update = &tau * col.transpose() - &col * tau.transpose();
            let mut block = a.view_mut((k + 2, k + 2), (m, m));
            block += update;
        }
    }
    pf
}
