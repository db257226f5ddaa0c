//! Conservative gain certificates computed from the initial state and sup
//! bounds on the cost offsets `b_i(t) = 2A_iᵀg_i(t)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::consensus_errors;
use crate::controllers::{invert, p_matrix_spectrum, GainParams, TeamState};
use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{inf_norm, spectral_norm, symmetric_eigen};
use crate::swarm::{swarm_beta_bound, PotentialSpec, SwarmBound, SwarmParams};

/// Positive slack added to every bound.
pub const GAMMA_MARGIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixBounds {
    /// Bound on every `‖x_i − x_j‖`.
    pub beta_x: f64,
    /// Bound on every `‖v_i − v_j‖`; zero for single integrators.
    pub beta_v: f64,
    /// Bound on every `‖φ_i − φ_j‖₂`.
    pub phi_bar: f64,
    /// Edge gain that dominates the internal-signal mismatch.
    pub beta_bar: f64,
}

fn common_hessian(costs: &[CostModel]) -> Result<DMatrix<f64>> {
    let h0 = costs[0].hessian();
    let tol = 1e-12 * (1.0 + h0.amax());
    for (i, c) in costs.iter().enumerate().skip(1) {
        if (c.hessian() - &h0).amax() > tol {
            return Err(Error::NonIdenticalHessians(1, i + 1));
        }
    }
    Ok(h0)
}

fn norm_of_bounds(b: impl IntoIterator<Item = f64>) -> f64 {
    b.into_iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `max_i sup_t ‖b_i^{(k)}(t)‖₂` for `k = 0, 1, 2`.
pub fn offset_bounds(costs: &[CostModel]) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for c in costs {
        let scale = 2.0 * spectral_norm(&c.a);
        let sup: Vec<[f64; 3]> = c.g.iter().map(|s| s.sup_bounds()).collect();
        for (k, o) in out.iter_mut().enumerate() {
            *o = o.max(scale * norm_of_bounds(sup.iter().map(|s| s[k])));
        }
    }
    out
}

/// `max_{i,j} sup_t ‖b_i^{(k)} − b_j^{(k)}‖₂` for `k = 0, 1, 2`.
pub fn offset_difference_bounds(costs: &[CostModel]) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for i in 0..costs.len() {
        for j in (i + 1)..costs.len() {
            let (ci, cj) = (&costs[i], &costs[j]);
            let pair: [f64; 3] = if ci.a == cj.a {
                let scale = 2.0 * spectral_norm(&ci.a);
                let diff: Vec<[f64; 3]> = ci.g.iter().zip(&cj.g).map(|(a, b)| a.sup_difference(b)).collect();
                std::array::from_fn(|k| scale * norm_of_bounds(diff.iter().map(|d| d[k])))
            } else {
                let (bi, bj) = (offset_bounds(std::slice::from_ref(ci)), offset_bounds(std::slice::from_ref(cj)));
                std::array::from_fn(|k| bi[k] + bj[k])
            };
            for k in 0..3 {
                out[k] = out[k].max(pair[k]);
            }
        }
    }
    out
}

/// `φ̄ = dx + ‖H⁻¹‖(D_b + D_ḃ)` for `φ_i = −H⁻¹(∇f_i + ∂ₜ∇f_i)`, given
/// `‖x_i − x_j‖ ≤ dx`.
pub fn phi_bar_single(costs: &[CostModel], dx: f64) -> Result<f64> {
    let h = common_hessian(costs)?;
    let hinv = spectral_norm(&invert(&h, "the internal-signal bound")?);
    let d = offset_difference_bounds(costs);
    Ok(dx + hinv * (d[0] + d[1]))
}

/// `φ̄ = ‖H⁻¹‖(D_b̈ + D_ḃ) + dv + ‖H‖²dx + ‖H‖D_b` for the double-integrator
/// internal signal, given `‖x_i − x_j‖ ≤ dx` and `‖v_i − v_j‖ ≤ dv`.
pub fn phi_bar_double(costs: &[CostModel], dx: f64, dv: f64) -> Result<f64> {
    let h = common_hessian(costs)?;
    let hn = spectral_norm(&h);
    let hinv = spectral_norm(&invert(&h, "the internal-signal bound")?);
    let d = offset_difference_bounds(costs);
    Ok(hinv * (d[2] + d[1]) + dv + hn * hn * dx + hn * d[0])
}

fn max_row_sum_inf(x: &[DVector<f64>]) -> f64 {
    let n = x.len() as f64;
    // Σ_j (x_i − x_j) = N·(x_i − mean)
    consensus_errors(x).iter().map(|e| inf_norm(e) * n).fold(0.0, f64::max)
}

/// Gains `(β_x, β_v, φ̄, β̄)` from the initial state. Double-integrator teams
/// use the extreme eigenvalues of `P` on the consensus subspace, single
/// integrators `P = I`. Requires identical Hessians.
pub fn appendix_gain_bounds(
    state: &TeamState,
    costs: &[CostModel],
    p: &GainParams,
    g: &Graph,
    margin: f64,
) -> Result<AppendixBounds> {
    let n = state.n() as f64;
    let m = state.dim();
    let (beta_x, beta_v, phi_bar) = match &state.v {
        None => {
            let bx = 2.0 * (m as f64 / n).sqrt() * max_row_sum_inf(&state.x) + margin;
            (bx, 0.0, phi_bar_single(costs, bx)?)
        }
        Some(v) => {
            let (lmin, lmax) = p_matrix_spectrum(p, 0.0, g, m);
            if lmin <= 0.0 {
                return Err(Error::NotPositiveDefinite {
                    what: "P",
                    min_eigenvalue: lmin,
                });
            }
            let scale = 2.0 * (m as f64 * lmax / (n * lmin)).sqrt();
            let b = scale * (max_row_sum_inf(&state.x) + max_row_sum_inf(v)) + margin;
            (b, b, phi_bar_double(costs, b, b)?)
        }
    };
    let beta_bar = (n - 1.0) * phi_bar / 2.0 + margin;
    Ok(AppendixBounds {
        beta_x,
        beta_v,
        phi_bar,
        beta_bar,
    })
}

/// Swarm certificates: the single-integrator gain bound, and for
/// double-integrator teams the internal-signal spread bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwarmReport {
    pub single: SwarmBound,
    pub configured_beta: f64,
    /// `W(0) = (1/N)ΣΣV_ij + ½‖e_V‖²`.
    pub w0: f64,
    /// `‖x_i − x_j‖ ≤ (N−1)R` while the initial links hold.
    pub dx: f64,
    /// `‖v_i − v_j‖ ≤ 2·sqrt(2W(0))`.
    pub dv: f64,
    pub phi_bar: f64,
}

pub fn swarm_bounds(
    state: &TeamState,
    costs: &[CostModel],
    params: &SwarmParams,
    margin: f64,
) -> Result<SwarmReport> {
    let h = common_hessian(costs)?;
    let sigma = symmetric_eigen(&h).min();
    let b = offset_bounds(costs);
    let single = swarm_beta_bound(&state.x, b[0], b[1], sigma, params.r, margin);
    let spec = PotentialSpec::new(params.r, params.d, &state.x)?;
    let n = state.n() as f64;
    let ev = state.v.as_deref().map(consensus_errors).unwrap_or_default();
    let w0 = spec.total(&state.x) / n + 0.5 * ev.iter().map(|e| e.norm_squared()).sum::<f64>();
    let dx = (n - 1.0) * params.r;
    let dv = 2.0 * (2.0 * w0).sqrt();
    let phi_bar = if state.v.is_some() {
        phi_bar_double(costs, dx, dv)?
    } else {
        phi_bar_single(costs, dx)?
    };
    Ok(SwarmReport {
        single,
        configured_beta: params.beta,
        w0,
        dx,
        dv,
        phi_bar,
    })
}
