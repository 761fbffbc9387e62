use gaussvar::evolve::*;
use gaussvar::gaussian::{covariance_from_ab, random_pure_fermionic, random_pure_fermionic_with_parity};
use gaussvar::linalg::{self, max_abs, Mat, Vector};
use gaussvar::oracle;
use gaussvar::validation::random_boson_hamiltonian;
use gaussvar::{
    BosonicGaussianState, Error, FermionicGaussianState, QuadraticBosonHamiltonian, QuadraticMajoranaHamiltonian,
    SymplecticForm,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn guard() -> Guard {
    Guard::default()
}

fn displaced_vacuum(x: f64, p: f64) -> BosonicGaussianState {
    BosonicGaussianState::new(Vector::from_vec(vec![x, p]), Mat::identity(2, 2)).unwrap()
}

fn boson_diff(a: &BosonicGaussianState, b: &BosonicGaussianState) -> f64 {
    max_abs(&(a.gamma_b() - b.gamma_b())).max((a.delta_r() - b.delta_r()).amax())
}

fn ground_parity(h: &QuadraticMajoranaHamiltonian) -> i8 {
    FermionicGaussianState::new(oracle::fermion_ground_covariance(h).unwrap()).unwrap().parity()
}

#[test]
fn vacuum_is_fixed_point_of_boson_steppers() {
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let vac = BosonicGaussianState::vacuum(1).unwrap();
    let ite = ite_step_boson(&vac, &ham, 0.1, &guard()).unwrap();
    let gd = gd_step_boson(&vac, &ham, 0.1, &guard()).unwrap();
    assert!(boson_diff(&ite, &vac) <= 1e-14);
    assert!(boson_diff(&gd, &vac) <= 1e-14);
}

#[test]
fn displaced_vacuum_single_steps() {
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let s = displaced_vacuum(2.0, 0.0);
    let ite = ite_step_boson(&s, &ham, 0.1, &guard()).unwrap();
    assert!((ite.delta_r() - Vector::from_vec(vec![1.8, 0.0])).amax() < 1e-14);
    assert!(max_abs(&(ite.gamma_b() - Mat::identity(2, 2))) < 1e-14);
    let gd = gd_step_boson(&s, &ham, 0.2, &guard()).unwrap();
    assert!((gd.delta_r() - Vector::from_vec(vec![1.8, 0.0])).amax() < 1e-14);
    assert!(max_abs(&(gd.gamma_b() - Mat::identity(2, 2))) < 1e-14);
}

#[test]
fn zero_step_is_identity() {
    let bham = QuadraticBosonHamiltonian::single_mode(1.3);
    let b = BosonicGaussianState::single_mode(2.0, 0.5, [1.0, 1.0]).unwrap();
    assert_eq!(ite_step_boson(&b, &bham, 0.0, &guard()).unwrap(), b);
    assert_eq!(gd_step_boson(&b, &bham, 0.0, &guard()).unwrap(), b);
    let fham = QuadraticMajoranaHamiltonian::random(2, 4).unwrap();
    let f = random_pure_fermionic(2, 5).unwrap();
    assert_eq!(ite_step_fermion(&f, &fham, 0.0, &guard()).unwrap(), f);
    assert_eq!(gd_step_fermion(&f, &fham, 0.0, &guard()).unwrap(), f);
}

#[test]
fn negative_step_is_rejected() {
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let vac = BosonicGaussianState::vacuum(1).unwrap();
    assert!(matches!(ite_step_boson(&vac, &ham, -0.1, &guard()), Err(Error::InvalidParameter(_))));
}

#[test]
fn boson_guard_reports_step_failure() {
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let s = BosonicGaussianState::single_mode(4.0, 0.0, [0.0, 0.0]).unwrap();
    let strict = Guard { max_halvings: 0, ..Guard::default() };
    assert!(matches!(ite_step_boson(&s, &ham, 10.0, &strict), Err(Error::StepFailure { .. })));
    // halving recovers the same step
    assert!(ite_step_boson(&s, &ham, 10.0, &guard()).is_ok());
}

#[test]
fn fermion_fixed_points() {
    let f = random_pure_fermionic(3, 1).unwrap();
    let zero = QuadraticMajoranaHamiltonian::new(Mat::zeros(6, 6)).unwrap();
    assert_eq!(ite_step_fermion(&f, &zero, 0.1, &guard()).unwrap(), f);

    let along = QuadraticMajoranaHamiltonian::new(f.gamma_m() * 0.7).unwrap();
    let next = ite_step_fermion(&f, &along, 0.1, &guard()).unwrap();
    assert!(max_abs(&(next.gamma_m() - f.gamma_m())) < 1e-14);

    let h = QuadraticMajoranaHamiltonian::single_mode(1.5);
    let ground = FermionicGaussianState::new(oracle::fermion_ground_covariance(&h).unwrap()).unwrap();
    assert!((h.energy(&ground).unwrap() - oracle::fermion_ed(&h).unwrap().ground_energy).abs() < 1e-14);
    let next = ite_step_fermion(&ground, &h, 0.1, &guard()).unwrap();
    assert!(max_abs(&(next.gamma_m() - ground.gamma_m())) < 1e-14);
}

#[test]
fn fermion_projection_examples() {
    let g = random_pure_fermionic(2, 9).unwrap();
    assert_eq!(project_tangent_fermion(g.gamma_m(), &Mat::zeros(4, 4)), Mat::zeros(4, 4));
    assert!(max_abs(&project_tangent_fermion(g.gamma_m(), g.gamma_m())) < 1e-14);
}

#[test]
fn fermion_projection_is_tangent_and_ascending() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..1000 {
        let g = random_pure_fermionic(3, seed).unwrap();
        let h = linalg::random_antisymmetric(6, &mut rng);
        let m = project_tangent_fermion(g.gamma_m(), &h);
        assert!(fermion_tangent_residual(g.gamma_m(), &m) <= 1e-12, "seed {seed}");
        assert!(linalg::frobenius_inner(&h, &m) >= -1e-12, "seed {seed}");
    }
}

#[test]
fn fermion_gd_step_is_ite_step_at_one_eighth() {
    for seed in 0..200 {
        let n = 1 + (seed % 4) as usize;
        let f = random_pure_fermionic(n, seed).unwrap();
        let h = QuadraticMajoranaHamiltonian::random(n, seed + 1000).unwrap();
        let kappa = 0.04;
        let gd = gd_step_fermion(&f, &h, kappa, &guard()).unwrap();
        let ite = ite_step_fermion(&f, &h, kappa / 8.0, &guard()).unwrap();
        assert!(max_abs(&(gd.gamma_m() - ite.gamma_m())) <= 1e-15, "seed {seed}");
    }
}

#[test]
fn fermion_gd_reaches_ed_ground_energy() {
    let h = QuadraticMajoranaHamiltonian::random(2, 2024).unwrap();
    let start = random_pure_fermionic_with_parity(2, ground_parity(&h), 7).unwrap();
    // the slowest canonical mode of this instance is 0.18, so 2000 steps are
    // not enough; run to the direction tolerance instead
    let cfg = StepperConfig { step: 0.05, grad_tol: 1e-12, keep_states: false, ..Default::default() };
    let traj = run_to_convergence::<Fermion>(Method::Gd, &start, &h, &cfg).unwrap();
    assert!(traj.converged);
    let ed = oracle::fermion_ed(&h).unwrap().ground_energy;
    assert!((traj.final_energy() - ed).abs() < 1e-8, "{} vs {ed}", traj.final_energy());
}

#[test]
fn boson_projection_examples() {
    let sigma = SymplecticForm::new(1).unwrap();
    let g = covariance_from_ab(2.0, 0.5).unwrap();
    let (m, alpha) = project_tangent_boson(&g, &Mat::zeros(2, 2), &sigma).unwrap();
    assert_eq!(m, Mat::zeros(2, 2));
    assert_eq!(alpha, 1.0);
    let (m, _) = project_tangent_boson(&Mat::identity(2, 2), &Mat::identity(2, 2), &sigma).unwrap();
    assert!(max_abs(&m) < 1e-15);
}

#[test]
fn boson_projection_is_tangent_and_ascending() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for seed in 0..1000 {
        let n = 1 + (seed % 3) as usize;
        let sigma = SymplecticForm::new(n).unwrap();
        let s = BosonicGaussianState::random(n, 0.3, seed).unwrap();
        let h = linalg::random_symmetric(2 * n, &mut rng);
        let (m, _) = project_tangent_boson(s.gamma_b(), &h, &sigma).unwrap();
        assert!(boson_tangent_residual(s.gamma_b(), &m, &sigma).unwrap() <= 1e-10, "seed {seed}");
        assert!(linalg::frobenius_inner(&h, &m) >= -1e-12, "seed {seed}");
    }
}

#[test]
fn gd_displacement_direction_ignores_covariance() {
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let s = BosonicGaussianState::single_mode(3.0, -1.0, [1.0, 2.0]).unwrap();
    let h_delta = ham.gradients(&s).unwrap().h_delta;
    let gd = gd_direction_boson(&s, &ham).unwrap();
    assert!((&gd.delta + &h_delta * 0.5).amax() < 1e-15);
    let ite = ite_flow_boson(&s, &ham).unwrap();
    assert!((&ite.delta + s.gamma_b() * &h_delta).amax() < 1e-15);
    assert!((&ite.delta - &gd.delta * 2.0).amax() > 0.1);
}

#[test]
fn boson_runs_reach_vacuum() {
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let start = BosonicGaussianState::single_mode(2.0, 0.5, [1.0, 1.0]).unwrap();
    let vac = BosonicGaussianState::vacuum(1).unwrap();
    for method in [Method::Gd, Method::Ite] {
        let cfg = StepperConfig { step: 0.01, grad_tol: 1e-10, keep_states: false, ..Default::default() };
        let traj = run_to_convergence::<Boson>(method, &start, &ham, &cfg).unwrap();
        assert!(traj.converged, "{method}");
        assert!(boson_diff(traj.final_state(), &vac) < 1e-8, "{method}");
        assert!(traj.final_energy().abs() < 1e-10, "{method}");
        assert_eq!(traj.energies.len(), traj.iterations + 1);
        assert_eq!(traj.gamma_increments.len(), traj.iterations);
    }
}

#[test]
fn zero_iterations_is_not_converged() {
    let ham = QuadraticBosonHamiltonian::single_mode(1.0);
    let start = BosonicGaussianState::single_mode(2.0, 0.5, [1.0, 1.0]).unwrap();
    let cfg = StepperConfig { max_iters: 0, ..Default::default() };
    let traj = run_to_convergence::<Boson>(Method::Ite, &start, &ham, &cfg).unwrap();
    assert!(!traj.converged);
    assert_eq!(traj.states, vec![start]);
    assert_eq!(traj.iterations, 0);
}

fn spectral_norm(m: &Mat) -> f64 {
    (m.transpose() * m).symmetric_eigenvalues().max().sqrt()
}

#[test]
fn small_steps_descend() {
    for seed in 0..10u64 {
        let n = 1 + (seed % 3) as usize;
        let ham = random_boson_hamiltonian(n, seed).unwrap();
        let start = BosonicGaussianState::random(n, 0.5, seed + 50).unwrap();
        let step = 1e-3 / spectral_norm(ham.h_r());
        for method in [Method::Gd, Method::Ite] {
            let cfg = StepperConfig { step, max_iters: 2000, keep_states: false, ..Default::default() };
            let traj = run_to_convergence::<Boson>(method, &start, &ham, &cfg).unwrap();
            assert!(traj.max_energy_increase() <= 1e-10, "boson {method} seed {seed}");
        }
        let nf = 1 + (seed % 4) as usize;
        let h = QuadraticMajoranaHamiltonian::random(nf, seed).unwrap();
        let start = random_pure_fermionic(nf, seed + 60).unwrap();
        let step = 1e-3 / spectral_norm(h.h_maj());
        for method in [Method::Gd, Method::Ite] {
            let cfg = StepperConfig { step, max_iters: 2000, keep_states: false, ..Default::default() };
            let traj = run_to_convergence::<Fermion>(method, &start, &h, &cfg).unwrap();
            assert!(traj.max_energy_increase() <= 1e-10, "fermion {method} seed {seed}");
        }
    }
}

#[test]
fn fixed_points_have_vanishing_projected_gradient() {
    let ham = QuadraticBosonHamiltonian::single_mode(0.8);
    let sigma = SymplecticForm::new(1).unwrap();
    let cases = [
        (BosonicGaussianState::vacuum(1).unwrap(), true),
        (BosonicGaussianState::single_mode(1.5, 0.2, [0.0, 0.0]).unwrap(), false),
        (displaced_vacuum(0.3, 0.0), false),
    ];
    for (s, fixed) in cases {
        let g = ham.gradients(&s).unwrap();
        let (m, _) = project_tangent_boson(s.gamma_b(), &g.h_b, &sigma).unwrap();
        let projected = max_abs(&m).max(g.h_delta.amax());
        for method in [Method::Gd, Method::Ite] {
            let next = step::<Boson>(method, &s, &ham, 0.01, &guard()).unwrap();
            let moved = boson_diff(&next, &s);
            assert_eq!(moved <= 1e-12, fixed, "{method}");
            assert_eq!(projected <= 1e-12, fixed, "{method}");
        }
    }
}
