use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use super::GainParams;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{disagreement_basis, symmetric_eigen};

/// Points in the ψ search grid.
const PSI_GRID: usize = 1000;

/// One strict inequality `lhs < rhs` with both sides evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub lhs_label: String,
    pub lhs: f64,
    pub rhs_label: String,
    pub rhs: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn less(lhs_label: &str, lhs: f64, rhs_label: &str, rhs: f64) -> Self {
        ConditionCheck {
            lhs_label: lhs_label.to_string(),
            lhs,
            rhs_label: rhs_label.to_string(),
            rhs,
            pass: lhs < rhs,
        }
    }

    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Four decimals with trailing zeros dropped, keeping one digit after the point.
pub(crate) fn short(x: f64) -> String {
    let s = format!("{x:.4}");
    let trimmed = s.trim_end_matches('0');
    if trimmed.ends_with('.') {
        format!("{trimmed}0")
    } else {
        trimmed.to_string()
    }
}

impl fmt::Display for ConditionCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} < {} = {} : {}",
            self.lhs_label,
            short(self.lhs),
            self.rhs_label,
            short(self.rhs),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub lambda2: f64,
    pub checks: Vec<ConditionCheck>,
    /// ψ used for the boundary-layer conditions: the supplied value, or the
    /// largest feasible grid value.
    pub psi: Option<f64>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn layer_checks(p: &GainParams, lambda2: f64, psi: f64) -> Vec<ConditionCheck> {
    vec![
        ConditionCheck::less("γ/(αζ) + ψ/α", p.gamma / (p.alpha * p.zeta) + psi / p.alpha, "λ₂", lambda2),
        ConditionCheck::less("ψ", psi, "μ/(2α)", p.mu / (2.0 * p.alpha)),
        ConditionCheck::less("ψ", psi, "γ/(2ζ)", p.gamma / (2.0 * p.zeta)),
    ]
}

/// Consensus condition `γ/(αζ) < λ₂`, plus the three boundary-layer conditions
/// when `params.layer` is set. Without a ψ (argument or `params.psi`), the
/// largest feasible ψ on a uniform grid below `min(μ/(2α), γ/(2ζ))` is used.
pub fn check_gain_conditions(p: &GainParams, lambda2: f64, psi: Option<f64>) -> ConditionReport {
    let mut checks = vec![ConditionCheck::less(
        "γ/(αζ)",
        p.gamma / (p.alpha * p.zeta),
        "λ₂",
        lambda2,
    )];
    let mut chosen = None;
    if p.layer.is_some() {
        chosen = psi.or(p.psi).or_else(|| {
            let cap = (p.mu / (2.0 * p.alpha)).min(p.gamma / (2.0 * p.zeta));
            (1..PSI_GRID)
                .rev()
                .map(|k| cap * k as f64 / PSI_GRID as f64)
                .find(|&s| s > 0.0 && layer_checks(p, lambda2, s).iter().all(|c| c.pass))
        });
        match chosen {
            Some(s) => checks.extend(layer_checks(p, lambda2, s)),
            None => checks.push(ConditionCheck::less("no feasible ψ", 0.0, "0", 0.0)),
        }
    }
    ConditionReport {
        lambda2,
        checks,
        psi: chosen,
    }
}

/// Extreme eigenvalues of
/// `P = [[(αγ+μζ)(L⊗I) − 2ψγI, γI], [γI, ζI]]` restricted to consensus
/// errors, i.e. to stacked vectors whose agent components sum to zero.
pub fn p_matrix_spectrum(p: &GainParams, psi: f64, g: &Graph, m: usize) -> (f64, f64) {
    let n = g.n();
    let q = disagreement_basis(n);
    let lr = q.transpose() * g.laplacian() * &q;
    let k = (n - 1) * m;
    let eye = DMatrix::<f64>::identity(k, k);
    let top = lr.kronecker(&DMatrix::identity(m, m)) * (p.alpha * p.gamma + p.mu * p.zeta)
        - &eye * (2.0 * psi * p.gamma);
    let mut full = DMatrix::zeros(2 * k, 2 * k);
    full.view_mut((0, 0), (k, k)).copy_from(&top);
    full.view_mut((0, k), (k, k)).copy_from(&(&eye * p.gamma));
    full.view_mut((k, 0), (k, k)).copy_from(&(&eye * p.gamma));
    full.view_mut((k, k), (k, k)).copy_from(&(&eye * p.zeta));
    let e = symmetric_eigen(&full);
    (e.min(), e.max())
}

/// Steady tracking-error bound under a fixed boundary layer of width
/// `params.layer.epsilon`:
/// `sqrt(φ̄·N(N−1)²·ε / (4ψ·λ_min[P]))`.
pub fn fixed_layer_error_bound(
    p: &GainParams,
    m: usize,
    phi_bar: f64,
    psi: f64,
    g: &Graph,
) -> Result<f64> {
    let (lmin, _) = p_matrix_spectrum(p, psi, g, m);
    if lmin <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            what: "P",
            min_eigenvalue: lmin,
        });
    }
    let eps = p.layer.map_or(0.0, |l| l.epsilon);
    let n = g.n() as f64;
    Ok((phi_bar * n * (n - 1.0).powi(2) * eps / (4.0 * psi * lmin)).sqrt())
}
