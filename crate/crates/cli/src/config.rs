//! Run configuration: one TOML document with a section per subcommand.
//! Every key is optional; an empty file gives the canonical experiments.

use std::path::Path;

use gaussvar::experiment::SweepConfig;
use gaussvar::oracle::MAX_FERMION_MODES;
use gaussvar::validation::Fault;
use serde::{Deserialize, Serialize};

/// Largest mode count accepted by `fermion-compare`.
pub const MAX_COMPARE_MODES: usize = 4;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub equivalence_sp: SpConfig,
    pub fermion_compare: FermionCompareConfig,
    pub boson_sweep: SweepConfig,
    pub validate: ValidateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpConfig {
    pub n_points: usize,
    pub left: f64,
    pub right: f64,
    pub mass: f64,
    pub omega: f64,
    /// Random states used for the step comparison.
    pub instances: usize,
    /// GD step; ITE is compared at `2 α`. Defaults to `0.2 / λ_max`.
    pub alpha: Option<f64>,
    /// ITE step for the convergence run. Defaults to `1 / λ_max`.
    pub d_tau: Option<f64>,
    pub max_iters: usize,
    pub residual_tol: f64,
}

impl Default for SpConfig {
    fn default() -> Self {
        Self {
            n_points: 512,
            left: -8.0,
            right: 8.0,
            mass: 1.0,
            omega: 1.0,
            instances: 100,
            alpha: None,
            d_tau: None,
            max_iters: 1_000_000,
            residual_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FermionCompareConfig {
    pub instances: usize,
    /// Mode counts, cycled over the instances.
    pub modes: Vec<usize>,
    /// GD step `κ`; the matching ITE step is `κ/8`.
    pub kappa: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for FermionCompareConfig {
    fn default() -> Self {
        Self { instances: 100, modes: vec![1, 2, 3], kappa: 0.4, grad_tol: 1e-11, max_iters: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub instances: usize,
    pub fd_step: f64,
    /// Corrupts one analytic gradient so the finite-difference checks can be
    /// seen to fail: `negate_h_delta`, `negate_h_b` or `negate_h_m`.
    pub inject_fault: Option<Fault>,
}

impl Default for ValidateSection {
    fn default() -> Self {
        let d = gaussvar::validation::ValidateConfig::default();
        Self { instances: d.instances, fd_step: d.fd_step, inject_fault: d.inject_fault }
    }
}

fn positive(name: &str, x: f64) -> Result<(), String> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive and finite, got {x}"))
    }
}

impl SpConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_points < 3 {
            return Err(format!("n_points must be at least 3, got {}", self.n_points));
        }
        if !(self.left.is_finite() && self.right.is_finite() && self.right > self.left) {
            return Err(format!("need finite left < right, got {} and {}", self.left, self.right));
        }
        positive("mass", self.mass)?;
        positive("omega", self.omega)?;
        positive("residual_tol", self.residual_tol)?;
        if self.instances == 0 {
            return Err("instances must be at least 1".into());
        }
        if let Some(a) = self.alpha {
            positive("alpha", a)?;
        }
        if let Some(t) = self.d_tau {
            positive("d_tau", t)?;
        }
        Ok(())
    }
}

impl FermionCompareConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.instances == 0 {
            return Err("instances must be at least 1".into());
        }
        if self.modes.is_empty() {
            return Err("modes must not be empty".into());
        }
        if let Some(&n) = self.modes.iter().find(|&&n| n == 0 || n > MAX_COMPARE_MODES) {
            return Err(format!(
                "mode count {n} outside 1..={MAX_COMPARE_MODES} (exact diagonalization handles at most \
                 {MAX_FERMION_MODES} modes; comparisons are limited to {MAX_COMPARE_MODES})"
            ));
        }
        positive("kappa", self.kappa)?;
        positive("grad_tol", self.grad_tol)
    }
}

impl ValidateSection {
    pub fn validate(&self) -> Result<(), String> {
        if self.instances == 0 {
            return Err("instances must be at least 1".into());
        }
        positive("fd_step", self.fd_step)
    }
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, String> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("malformed config {}: {e}", path.display()))
}
