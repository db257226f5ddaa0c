use nalgebra::{DMatrix, DVector};

use super::{pd_project, DoubleEstimator, GainParams, SingleEstimator, TeamState};
use crate::costs::DerivativeBundle;
use crate::graph::Graph;
use crate::switching::{sgn_mat, sgn_vec, sig_alpha};

#[derive(Debug, Clone, PartialEq)]
pub struct SingleEstimatorOutput {
    /// `(ξ̇_i, ψ̇_i, φ̇_i)` per agent.
    pub rates: Vec<SingleEstimator>,
    /// Each agent's estimate of the centralized input.
    pub s: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleEstimatorOutput {
    /// `(ξ̇_i, φ̇_i)` per agent.
    pub rates: Vec<DoubleEstimator>,
    pub s: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
}

/// Tracked signals `w_i = ξ_i + ∇f_i`, `θ_i = ψ_i + H_i`, `ς_i = φ_i + ∂ₜ∇f_i`.
pub fn single_estimates(
    est: &[SingleEstimator],
    bundles: &[DerivativeBundle],
) -> (Vec<DVector<f64>>, Vec<DMatrix<f64>>, Vec<DVector<f64>>) {
    let w = est.iter().zip(bundles).map(|(e, b)| &e.xi + &b.grad).collect();
    let theta = est.iter().zip(bundles).map(|(e, b)| &e.psi + &b.hess).collect();
    let sigma = est.iter().zip(bundles).map(|(e, b)| &e.phi + &b.pt_grad).collect();
    (w, theta, sigma)
}

/// Tracked signals `w_i = ξ_i + [∇f; ∂ₜ∇f; d/dt∇f; ∂ₜ d/dt∇f]` and
/// `ς_i = φ_i + [H; dH/dt]`.
pub fn double_estimates(
    est: &[DoubleEstimator],
    bundles: &[DerivativeBundle],
) -> (Vec<DVector<f64>>, Vec<DMatrix<f64>>) {
    let w = est
        .iter()
        .zip(bundles)
        .map(|(e, b)| {
            let stacked = DVector::from_iterator(
                4 * b.dim(),
                b.grad
                    .iter()
                    .chain(b.pt_grad.iter())
                    .chain(b.dt_grad.iter())
                    .chain(b.pt_dt_grad.iter())
                    .copied(),
            );
            &e.xi + stacked
        })
        .collect();
    let sigma = est
        .iter()
        .zip(bundles)
        .map(|(e, b)| {
            let m = b.dim();
            let mut stacked = DMatrix::zeros(2 * m, m);
            stacked.rows_mut(0, m).copy_from(&b.hess);
            stacked.rows_mut(m, m).copy_from(&b.dt_hess);
            &e.phi + stacked
        })
        .collect();
    (w, sigma)
}

fn position_coupling(x: &[DVector<f64>], g: &Graph, exponent: f64) -> Vec<DVector<f64>> {
    let mut u = vec![DVector::zeros(x[0].len()); x.len()];
    for &(i, j) in g.edges() {
        let s = sig_alpha(&(&x[i] - &x[j]), exponent);
        u[i] -= &s;
        u[j] += &s;
    }
    u
}

/// Three signum average trackers feeding `S_i = −θ̃_i⁻¹(τw_i + ς_i)`, plus the
/// finite-time consensus input `u_i = −Σ sig(x_i − x_j)^η + S_i`.
pub fn estimator_single_step(
    state: &TeamState,
    bundles: &[DerivativeBundle],
    g: &Graph,
    p: &GainParams,
) -> SingleEstimatorOutput {
    let est = state
        .est_single
        .as_ref()
        .expect("estimator law needs estimator state");
    let m = state.dim();
    let (w, theta, sigma) = single_estimates(est, bundles);
    let mut rates = vec![SingleEstimator::zeros(m); state.n()];
    for &(i, j) in g.edges() {
        let dw = sgn_vec(&(&w[j] - &w[i])) * p.est_alpha;
        let dth = sgn_mat(&(&theta[j] - &theta[i])) * p.est_beta;
        let ds = sgn_vec(&(&sigma[j] - &sigma[i])) * p.est_gamma;
        rates[i].xi += &dw;
        rates[j].xi -= &dw;
        rates[i].psi += &dth;
        rates[j].psi -= &dth;
        rates[i].phi += &ds;
        rates[j].phi -= &ds;
    }
    let s: Vec<DVector<f64>> = (0..state.n())
        .map(|i| {
            let inv = pd_project(&theta[i], p.pd_floor)
                .try_inverse()
                .expect("projected matrix is positive definite");
            -(inv * (&w[i] * p.tau + &sigma[i]))
        })
        .collect();
    let u = position_coupling(&state.x, g, p.eta)
        .into_iter()
        .zip(&s)
        .map(|(c, s)| c + s)
        .collect();
    SingleEstimatorOutput { rates, s, u }
}

/// Signum average trackers on the stacked gradient terms and Hessian terms,
/// feeding `S_i = ς̃₁⁻¹ς₂ς̃₁⁻¹(w₁+w₂) − ς̃₁⁻¹(w₃+w₄) − ς̃₁w₁` and
/// `u_i = −Σ sig(Δx)^{α₁} − Σ sig(Δv)^{α₂} + S_i`.
pub fn estimator_double_step(
    state: &TeamState,
    bundles: &[DerivativeBundle],
    g: &Graph,
    p: &GainParams,
) -> DoubleEstimatorOutput {
    let est = state
        .est_double
        .as_ref()
        .expect("estimator law needs estimator state");
    let v = state
        .v
        .as_ref()
        .expect("double-integrator law needs velocities");
    let m = state.dim();
    let (w, sigma) = double_estimates(est, bundles);
    let mut rates = vec![DoubleEstimator::zeros(m); state.n()];
    for &(i, j) in g.edges() {
        let dw = sgn_vec(&(&w[j] - &w[i])) * p.kappa;
        let ds = sgn_mat(&(&sigma[j] - &sigma[i])) * p.rho;
        rates[i].xi += &dw;
        rates[j].xi -= &dw;
        rates[i].phi += &ds;
        rates[j].phi -= &ds;
    }
    let s: Vec<DVector<f64>> = (0..state.n())
        .map(|i| {
            let wi = &w[i];
            let (w1, w2, w3, w4) = (wi.rows(0, m), wi.rows(m, m), wi.rows(2 * m, m), wi.rows(3 * m, m));
            let s1 = pd_project(&sigma[i].rows(0, m).into_owned(), p.pd_floor);
            let s2 = sigma[i].rows(m, m);
            let inv = s1
                .clone()
                .try_inverse()
                .expect("projected matrix is positive definite");
            &inv * s2 * &inv * (w1 + w2) - &inv * (w3 + w4) - s1 * w1
        })
        .collect();
    let cx = position_coupling(&state.x, g, p.alpha1);
    let cv = position_coupling(v, g, p.alpha2());
    let u = cx
        .into_iter()
        .zip(cv)
        .zip(&s)
        .map(|((a, b), s)| a + b + s)
        .collect();
    DoubleEstimatorOutput { rates, s, u }
}
