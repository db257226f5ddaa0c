//! Signum-type nonlinearities and their boundary-layer smoothing.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Scalar signum with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn sgn_vec(z: &DVector<f64>) -> DVector<f64> {
    z.map(sgn)
}

/// Componentwise signum of a matrix.
pub fn sgn_mat(z: &DMatrix<f64>) -> DMatrix<f64> {
    z.map(sgn)
}

/// `|z_k|^α · sgn(z_k)` per component. `alpha = 0` is the plain signum.
pub fn sig_alpha(z: &DVector<f64>, alpha: f64) -> DVector<f64> {
    assert!(alpha >= 0.0, "sig_alpha needs a nonnegative exponent");
    if alpha == 0.0 {
        return sgn_vec(z);
    }
    z.map(|x| sgn(x) * x.abs().powf(alpha))
}

/// Boundary-layer width `ε·e^{−ct}`; `c = 0` keeps it fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub epsilon: f64,
    #[serde(default)]
    pub c: f64,
}

impl LayerSpec {
    pub fn fixed(epsilon: f64) -> Self {
        LayerSpec { epsilon, c: 0.0 }
    }

    pub fn width(&self, t: f64) -> f64 {
        self.epsilon * (-self.c * t).exp()
    }
}

/// `z / (‖z‖ + ε·e^{−ct})`, with 0 at `z = 0`.
pub fn boundary_layer(z: &DVector<f64>, spec: LayerSpec, t: f64) -> DVector<f64> {
    let norm = z.norm();
    if norm == 0.0 {
        return DVector::zeros(z.len());
    }
    z / (norm + spec.width(t))
}
