use nalgebra::DVector;

use super::{invert, GainParams, TeamState};
use crate::costs::DerivativeBundle;
use crate::error::{Error, Result};
use crate::graph::{EdgeGains, Graph};
use crate::linalg::l1_norm;
use crate::switching::{boundary_layer, sgn_vec, LayerSpec};

/// Inputs and adaptive-gain rates of a distributed law.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOutput {
    pub u: Vec<DVector<f64>>,
    pub beta_dot: EdgeGains,
}

/// Single-integrator internal signal `−H⁻¹(∇f + ∂ₜ∇f)`.
pub fn phi_single(b: &DerivativeBundle) -> Result<DVector<f64>> {
    let hinv = invert(&b.hess, "internal signal")?;
    Ok(-(hinv * (&b.grad + &b.pt_grad)))
}

/// `−H⁻¹(τ∇f + ∂ₜ∇f)`. Applied to the summed team bundle this drives the
/// team gradient to zero at rate `τ`.
pub fn centralized_single(b: &DerivativeBundle, tau: f64) -> Result<DVector<f64>> {
    let hinv = invert(&b.hess, "centralized law")?;
    Ok(-(hinv * (&b.grad * tau + &b.pt_grad)))
}

/// Double-integrator internal signal
/// `−H⁻¹(∂ₜ ḋ∇f + ḋ∇f) − H∇f + H⁻¹ḢH⁻¹(∂ₜ∇f + ∇f)`.
pub fn phi_double(b: &DerivativeBundle) -> Result<DVector<f64>> {
    let hinv = invert(&b.hess, "internal signal")?;
    let drift = &hinv * &b.dt_hess * &hinv * (&b.pt_grad + &b.grad);
    Ok(-(&hinv * (&b.pt_dt_grad + &b.dt_grad)) - &b.hess * &b.grad + drift)
}

/// The double-integrator centralized law; the internal signal of the summed
/// team bundle.
pub fn centralized_double(b: &DerivativeBundle) -> Result<DVector<f64>> {
    phi_double(b).map_err(|_| Error::SingularHessian {
        context: "centralized law",
        requirement: "the summed Hessian of the team cost must be invertible",
    })
}

fn edge_gain(state: &TeamState, i: usize, j: usize) -> Result<f64> {
    state
        .gains
        .get(i, j)
        .ok_or(Error::MissingEdgeGain(i + 1, j + 1))
}

/// `u_i = −Σ β_ij·sgn(x_i − x_j) + φ_i`, `β̇_ij = ‖x_i − x_j‖₁`.
pub fn distributed_single_step(
    state: &TeamState,
    bundles: &[DerivativeBundle],
    g: &Graph,
) -> Result<CouplingOutput> {
    let mut u = bundles.iter().map(phi_single).collect::<Result<Vec<_>>>()?;
    let mut beta_dot = EdgeGains::new();
    for &(i, j) in g.edges() {
        let beta = edge_gain(state, i, j)?;
        let z = &state.x[i] - &state.x[j];
        let s = sgn_vec(&z) * beta;
        u[i] -= &s;
        u[j] += &s;
        beta_dot.set(i, j, l1_norm(&z));
    }
    Ok(CouplingOutput { u, beta_dot })
}

#[derive(Clone, Copy)]
enum Switch {
    Signum,
    Layer(LayerSpec),
}

fn double_coupling(
    state: &TeamState,
    bundles: &[DerivativeBundle],
    g: &Graph,
    p: &GainParams,
    switch: Switch,
) -> Result<CouplingOutput> {
    let v = state
        .v
        .as_ref()
        .expect("double-integrator law needs velocities");
    let mut u = bundles.iter().map(phi_double).collect::<Result<Vec<_>>>()?;
    let mut beta_dot = EdgeGains::new();
    for &(i, j) in g.edges() {
        let beta = edge_gain(state, i, j)?;
        let dx = &state.x[i] - &state.x[j];
        let dv = &v[i] - &v[j];
        let z = &dx * p.gamma + &dv * p.zeta;
        let (s, rate) = match switch {
            Switch::Signum => (sgn_vec(&z), l1_norm(&z)),
            Switch::Layer(spec) => {
                let h = boundary_layer(&z, spec, state.t);
                let rate = z.dot(&h);
                (h, rate)
            }
        };
        let f = dx * p.mu + dv * p.alpha + s * beta;
        u[i] -= &f;
        u[j] += &f;
        beta_dot.set(i, j, rate);
    }
    Ok(CouplingOutput { u, beta_dot })
}

/// `u_i = −Σ[μΔx + αΔv] − Σ β_ij·sgn(γΔx + ζΔv) + φ_i` with
/// `β̇_ij = ‖γΔx + ζΔv‖₁`.
pub fn distributed_double_step(
    state: &TeamState,
    bundles: &[DerivativeBundle],
    g: &Graph,
    p: &GainParams,
) -> Result<CouplingOutput> {
    double_coupling(state, bundles, g, p, Switch::Signum)
}

/// As [`distributed_double_step`] with `sgn` replaced by the boundary layer
/// `h(z)`, and `β̇_ij = zᵀh(z)`.
pub fn continuous_double_step(
    state: &TeamState,
    bundles: &[DerivativeBundle],
    g: &Graph,
    p: &GainParams,
    layer: LayerSpec,
) -> Result<CouplingOutput> {
    double_coupling(state, bundles, g, p, Switch::Layer(layer))
}
