//! Control laws for single- and double-integrator teams.
//!
//! Every law is a pure function of a [`TeamState`], the per-agent derivative
//! bundles and the current graph. Rates for adaptive gains and estimator
//! internals are returned alongside the inputs and integrated by `sim`.

mod conditions;
mod estimator;
mod laws;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EdgeGains;
use crate::linalg::symmetric_eigen;
use crate::switching::LayerSpec;

pub use conditions::{
    check_gain_conditions, fixed_layer_error_bound, p_matrix_spectrum, ConditionCheck,
    ConditionReport,
};
pub(crate) use conditions::short;
pub use estimator::{
    double_estimates, estimator_double_step, estimator_single_step, single_estimates,
    DoubleEstimatorOutput, SingleEstimatorOutput,
};
pub use laws::{
    centralized_double, centralized_single, continuous_double_step, distributed_double_step,
    distributed_single_step, phi_double, phi_single, CouplingOutput,
};

/// Internals of one agent's single-integrator estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleEstimator {
    /// Tracks the average gradient.
    pub xi: DVector<f64>,
    /// Tracks the average Hessian.
    pub psi: DMatrix<f64>,
    /// Tracks the average `∂ₜ∇f`.
    pub phi: DVector<f64>,
}

impl SingleEstimator {
    pub fn zeros(m: usize) -> Self {
        SingleEstimator {
            xi: DVector::zeros(m),
            psi: DMatrix::zeros(m, m),
            phi: DVector::zeros(m),
        }
    }

    pub fn add_scaled(&self, h: f64, rate: &SingleEstimator) -> Self {
        SingleEstimator {
            xi: &self.xi + &rate.xi * h,
            psi: &self.psi + &rate.psi * h,
            phi: &self.phi + &rate.phi * h,
        }
    }
}

/// Internals of one agent's double-integrator estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleEstimator {
    /// `4m` entries tracking `[∇f; ∂ₜ∇f; d/dt∇f; ∂ₜ d/dt∇f]`.
    pub xi: DVector<f64>,
    /// `2m × m`, tracking `[H; dH/dt]`.
    pub phi: DMatrix<f64>,
}

impl DoubleEstimator {
    pub fn zeros(m: usize) -> Self {
        DoubleEstimator {
            xi: DVector::zeros(4 * m),
            phi: DMatrix::zeros(2 * m, m),
        }
    }

    pub fn add_scaled(&self, h: f64, rate: &DoubleEstimator) -> Self {
        DoubleEstimator {
            xi: &self.xi + &rate.xi * h,
            phi: &self.phi + &rate.phi * h,
        }
    }
}

/// Full closed-loop state. Positions are one `m`-vector per agent; `v` is
/// `None` for single-integrator teams.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamState {
    pub t: f64,
    pub x: Vec<DVector<f64>>,
    pub v: Option<Vec<DVector<f64>>>,
    pub gains: EdgeGains,
    pub est_single: Option<Vec<SingleEstimator>>,
    pub est_double: Option<Vec<DoubleEstimator>>,
}

impl TeamState {
    pub fn single(x: Vec<DVector<f64>>) -> Self {
        TeamState {
            t: 0.0,
            x,
            v: None,
            gains: EdgeGains::new(),
            est_single: None,
            est_double: None,
        }
    }

    pub fn double(x: Vec<DVector<f64>>, v: Vec<DVector<f64>>) -> Self {
        TeamState {
            v: Some(v),
            ..TeamState::single(x)
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, |x| x.len())
    }

    /// Velocity of agent `i`, zero for single-integrator teams.
    pub fn velocity(&self, i: usize) -> DVector<f64> {
        match &self.v {
            Some(v) => v[i].clone(),
            None => DVector::zeros(self.dim()),
        }
    }

    /// `self + h·rate`, where `rate` holds time derivatives in the same shape
    /// (its `t` field is the clock rate, normally 1).
    pub fn add_scaled(&self, h: f64, rate: &TeamState) -> TeamState {
        fn vecs(a: &[DVector<f64>], b: &[DVector<f64>], h: f64) -> Vec<DVector<f64>> {
            a.iter().zip(b).map(|(a, b)| a + b * h).collect()
        }
        TeamState {
            t: self.t + h * rate.t,
            x: vecs(&self.x, &rate.x, h),
            v: match (&self.v, &rate.v) {
                (Some(a), Some(b)) => Some(vecs(a, b, h)),
                (a, _) => a.clone(),
            },
            gains: self.gains.add_scaled(h, &rate.gains),
            est_single: match (&self.est_single, &rate.est_single) {
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(a, b)| a.add_scaled(h, b)).collect()),
                (a, _) => a.clone(),
            },
            est_double: match (&self.est_double, &rate.est_double) {
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(a, b)| a.add_scaled(h, b)).collect()),
                (a, _) => a.clone(),
            },
        }
    }

    pub fn is_finite(&self) -> bool {
        let vec_ok = |v: &[DVector<f64>]| v.iter().all(|x| x.iter().all(|c| c.is_finite()));
        vec_ok(&self.x)
            && self.v.as_deref().is_none_or(vec_ok)
            && self.gains.values().iter().all(|b| b.is_finite())
            && self.est_single.as_ref().is_none_or(|e| {
                e.iter().all(|s| {
                    s.xi.iter().chain(s.psi.iter()).chain(s.phi.iter()).all(|c| c.is_finite())
                })
            })
            && self.est_double.as_ref().is_none_or(|e| {
                e.iter().all(|s| s.xi.iter().chain(s.phi.iter()).all(|c| c.is_finite()))
            })
    }
}

/// Controller coefficients. Each law reads the subset it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainParams {
    pub tau: f64,
    pub mu: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub zeta: f64,
    /// Exponent of the single-integrator estimator's consensus term.
    pub eta: f64,
    pub alpha1: f64,
    /// Defaults to `2·alpha1 / (alpha1 + 1)`.
    pub alpha2: Option<f64>,
    pub kappa: f64,
    pub rho: f64,
    pub est_alpha: f64,
    pub est_beta: f64,
    pub est_gamma: f64,
    pub layer: Option<LayerSpec>,
    pub psi: Option<f64>,
    pub pd_floor: f64,
}

impl Default for GainParams {
    fn default() -> Self {
        GainParams {
            tau: 1.0,
            mu: 1.0,
            alpha: 1.0,
            gamma: 1.0,
            zeta: 1.0,
            eta: 0.5,
            alpha1: 0.5,
            alpha2: None,
            kappa: 1.0,
            rho: 1.0,
            est_alpha: 1.0,
            est_beta: 1.0,
            est_gamma: 1.0,
            layer: None,
            psi: None,
            pd_floor: 1e-6,
        }
    }
}

impl GainParams {
    pub fn alpha2(&self) -> f64 {
        self.alpha2
            .unwrap_or(2.0 * self.alpha1 / (self.alpha1 + 1.0))
    }
}

/// Nearest symmetric matrix with every eigenvalue at least `floor`.
pub fn pd_project(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    assert!(floor > 0.0, "pd_project floor must be positive");
    let sym = (m + m.transpose()) * 0.5;
    let n = sym.nrows();
    // λ_min ≥ floor exactly when sym − floor·I admits a Cholesky factor.
    if (&sym - DMatrix::identity(n, n) * floor).cholesky().is_some() {
        return sym;
    }
    let mut e = symmetric_eigen(&sym);
    for v in &mut e.values {
        *v = v.max(floor);
    }
    e.recompose()
}

pub(crate) fn invert(h: &DMatrix<f64>, context: &'static str) -> Result<DMatrix<f64>> {
    h.clone().try_inverse().ok_or(Error::SingularHessian {
        context,
        requirement: "each local Hessian must be invertible",
    })
}
