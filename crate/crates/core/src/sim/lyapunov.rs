use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{team_bundles, TrajectoryLog};
use crate::controllers::invert;
use crate::costs::DerivativeBundle;
use crate::error::Result;
use crate::scenario::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovKind {
    /// `W = ½‖∇f‖²`.
    CentralizedSingle,
    /// `W = ½‖∇f‖² + ½‖v − S₀‖²` with `S₀ = −H⁻¹(∂ₜ∇f + ∇f)`.
    CentralizedDouble,
    /// `W = ½‖Σ_i ∇f_i(x_i)‖²`.
    GradientSum,
}

impl LyapunovKind {
    pub fn for_algorithm(a: Algorithm) -> Self {
        match a {
            Algorithm::CentralizedSingle => LyapunovKind::CentralizedSingle,
            Algorithm::CentralizedDouble => LyapunovKind::CentralizedDouble,
            _ => LyapunovKind::GradientSum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePoint {
    pub t: f64,
    pub w: f64,
    /// Forward difference to the next sample (backward at the last one).
    pub slope: f64,
}

pub(crate) fn value(kind: LyapunovKind, bundles: &[DerivativeBundle], v: Option<&DVector<f64>>) -> Result<f64> {
    let b = DerivativeBundle::sum(bundles).expect("at least one bundle");
    let half_sq = 0.5 * b.grad.norm_squared();
    Ok(match kind {
        LyapunovKind::CentralizedSingle | LyapunovKind::GradientSum => half_sq,
        LyapunovKind::CentralizedDouble => {
            let s0 = -(invert(&b.hess, "the Lyapunov probe")? * (&b.pt_grad + &b.grad));
            let v = v.cloned().unwrap_or_else(|| DVector::zeros(b.dim()));
            half_sq + 0.5 * (v - s0).norm_squared()
        }
    })
}

/// Sample `W` along a log, with its finite-difference slope.
pub fn lyapunov_probe(log: &TrajectoryLog, kind: LyapunovKind) -> Result<Vec<ProbePoint>> {
    let w = log
        .samples
        .iter()
        .map(|s| {
            let bundles = team_bundles(&log.costs, &s.x, s.v.as_deref(), s.t);
            value(kind, &bundles, s.v.as_ref().map(|v| &v[0]))
        })
        .collect::<Result<Vec<f64>>>()?;
    let t = log.times();
    let n = w.len();
    Ok((0..n)
        .map(|k| {
            let slope = match (k + 1 < n, k > 0) {
                (true, _) => (w[k + 1] - w[k]) / (t[k + 1] - t[k]),
                (false, true) => (w[k] - w[k - 1]) / (t[k] - t[k - 1]),
                _ => 0.0,
            };
            ProbePoint { t: t[k], w: w[k], slope }
        })
        .collect())
}
