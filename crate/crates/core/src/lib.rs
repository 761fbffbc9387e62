//! Imaginary-time evolution and manifold-projected gradient descent for
//! pure Gaussian variational states.
//!
//! States are represented directly by their moments: the displacement vector
//! and symmetric covariance matrix for bosons, and the Majorana covariance
//! matrix for fermions. Quadratures are ordered `(x_1..x_N, p_1..p_N)` and
//! Majoranas `(a_{1,1}..a_{1,N}, a_{2,1}..a_{2,N})`.
//!
//! Modules:
//! - [`gaussian`]: state types, symplectic form, validity checks.
//! - [`hamiltonian`]: quadratic Hamiltonians, energies and gradient matrices.
//! - [`evolve`]: ITE and GD steppers, tangent projections, convergence driver.
//! - [`single_particle`]: grid wavefunction steppers.
//! - [`oracle`]: exact diagonalization and finite-difference ground truth.
//! - [`experiment`]: path lengths, the `(a, b)` sweep and CSV output.
//! - [`validation`]: the named invariant checks run by `gaussvar validate`.

pub mod error;
pub mod evolve;
pub mod experiment;
pub mod gaussian;
pub mod hamiltonian;
pub mod linalg;
pub mod oracle;
pub mod single_particle;
pub mod validation;

pub use error::{Error, Result};
pub use evolve::{Boson, Fermion, Guard, Method, Sector, StepperConfig, Trajectory};
pub use gaussian::{BosonicGaussianState, FermionicGaussianState, SymplecticForm, ValidityReport};
pub use hamiltonian::{BosonGradients, QuadraticBosonHamiltonian, QuadraticMajoranaHamiltonian};

/// Default tolerance used by the validity checks.
pub const DEFAULT_TOL: f64 = 1e-9;
