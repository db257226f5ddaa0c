//! Time-varying quadratic costs `f(x, t) = ‖A·x + g(t)‖²` and their exact
//! derivative bundles.
//!
//! Every controller consumes a [`DerivativeBundle`] and never looks at the
//! cost family directly, so adding a family means adding one bundle function.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar signal of time with closed-form first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TimeSignal {
    /// `amp·sin(omega·t + phase) + offset`
    Sin {
        amp: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amp·cos(omega·t + phase) + offset`
    Cos {
        amp: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amp·sin(omega·t) / (t + 1)`, meant for `t ≥ 0`.
    Damped {
        amp: f64,
        #[serde(default = "one")]
        omega: f64,
    },
    Const { value: f64 },
}

fn one() -> f64 {
    1.0
}

impl TimeSignal {
    pub fn sin(amp: f64, omega: f64) -> Self {
        TimeSignal::Sin {
            amp,
            omega,
            phase: 0.0,
            offset: 0.0,
        }
    }

    pub fn cos(amp: f64, omega: f64) -> Self {
        TimeSignal::Cos {
            amp,
            omega,
            phase: 0.0,
            offset: 0.0,
        }
    }

    pub fn damped(amp: f64, omega: f64) -> Self {
        TimeSignal::Damped { amp, omega }
    }

    /// `[value, first derivative, second derivative]` at `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        match *self {
            TimeSignal::Sin {
                amp,
                omega,
                phase,
                offset,
            } => {
                let (s, c) = (omega * t + phase).sin_cos();
                [amp * s + offset, amp * omega * c, -amp * omega * omega * s]
            }
            TimeSignal::Cos {
                amp,
                omega,
                phase,
                offset,
            } => {
                let (s, c) = (omega * t + phase).sin_cos();
                [amp * c + offset, -amp * omega * s, -amp * omega * omega * c]
            }
            TimeSignal::Damped { amp, omega } => {
                let (s, c) = (omega * t).sin_cos();
                let r = 1.0 / (t + 1.0);
                [
                    amp * s * r,
                    amp * (omega * c * r - s * r * r),
                    amp * (-omega * omega * s * r - 2.0 * omega * c * r * r + 2.0 * s * r * r * r),
                ]
            }
            TimeSignal::Const { value } => [value, 0.0, 0.0],
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    /// Upper bounds on `sup_t |g|`, `sup_t |ġ|`, `sup_t |g̈|` for `t ≥ 0`.
    pub fn sup_bounds(&self) -> [f64; 3] {
        match *self {
            TimeSignal::Sin {
                amp, omega, offset, ..
            }
            | TimeSignal::Cos {
                amp, omega, offset, ..
            } => {
                let a = amp.abs();
                [a + offset.abs(), a * omega.abs(), a * omega * omega]
            }
            TimeSignal::Damped { amp, omega } => {
                let (a, w) = (amp.abs(), omega.abs());
                [a, a * (w + 1.0), a * (w * w + 2.0 * w + 2.0)]
            }
            TimeSignal::Const { value } => [value.abs(), 0.0, 0.0],
        }
    }

    /// Bounds on `sup_t |g − h|` and its first two derivatives. Signals of the
    /// same shape (kind, frequency, phase) differ by a signal of that shape with
    /// the amplitude difference, which is much tighter than the triangle bound.
    pub fn sup_difference(&self, other: &TimeSignal) -> [f64; 3] {
        use TimeSignal::*;
        match (*self, *other) {
            (
                Sin {
                    amp: a1,
                    omega: w1,
                    phase: p1,
                    offset: o1,
                },
                Sin {
                    amp: a2,
                    omega: w2,
                    phase: p2,
                    offset: o2,
                },
            ) if w1 == w2 && p1 == p2 => Sin {
                amp: a1 - a2,
                omega: w1,
                phase: p1,
                offset: o1 - o2,
            }
            .sup_bounds(),
            (
                Cos {
                    amp: a1,
                    omega: w1,
                    phase: p1,
                    offset: o1,
                },
                Cos {
                    amp: a2,
                    omega: w2,
                    phase: p2,
                    offset: o2,
                },
            ) if w1 == w2 && p1 == p2 => Cos {
                amp: a1 - a2,
                omega: w1,
                phase: p1,
                offset: o1 - o2,
            }
            .sup_bounds(),
            (Damped { amp: a1, omega: w1 }, Damped { amp: a2, omega: w2 }) if w1 == w2 => Damped {
                amp: a1 - a2,
                omega: w1,
            }
            .sup_bounds(),
            (Const { value: v1 }, Const { value: v2 }) => [(v1 - v2).abs(), 0.0, 0.0],
            _ => {
                let (a, b) = (self.sup_bounds(), other.sup_bounds());
                [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
            }
        }
    }
}

/// Exact derivative bundle of one cost at `(x, v, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    pub f: f64,
    /// ∇f
    pub grad: DVector<f64>,
    /// H = ∇²f
    pub hess: DMatrix<f64>,
    /// ∂ₜ∇f
    pub pt_grad: DVector<f64>,
    /// d/dt ∇f = H·v + ∂ₜ∇f
    pub dt_grad: DVector<f64>,
    /// ∂ₜ(d/dt ∇f)
    pub pt_dt_grad: DVector<f64>,
    /// dH/dt
    pub dt_hess: DMatrix<f64>,
}

impl DerivativeBundle {
    /// Term-by-term sum; the bundle of `Σ f_i` evaluated at a common point.
    pub fn sum<'a>(bundles: impl IntoIterator<Item = &'a DerivativeBundle>) -> Option<Self> {
        let mut it = bundles.into_iter();
        let first = it.next()?.clone();
        Some(it.fold(first, |mut acc, b| {
            acc.f += b.f;
            acc.grad += &b.grad;
            acc.hess += &b.hess;
            acc.pt_grad += &b.pt_grad;
            acc.dt_grad += &b.dt_grad;
            acc.pt_dt_grad += &b.pt_dt_grad;
            acc.dt_hess += &b.dt_hess;
            acc
        }))
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }
}

/// `f(x, t) = ‖A·x + g(t)‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub a: DMatrix<f64>,
    pub g: Vec<TimeSignal>,
}

impl CostModel {
    pub fn new(a: DMatrix<f64>, g: Vec<TimeSignal>) -> Result<Self> {
        if !a.is_square() || a.nrows() != g.len() {
            return Err(Error::validation(
                "cost",
                format!(
                    "A is {}x{} but g has {} components",
                    a.nrows(),
                    a.ncols(),
                    g.len()
                ),
            ));
        }
        Ok(CostModel { a, g })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// `(g(t), ġ(t), g̈(t))`.
    pub fn offset(&self, t: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let m = self.dim();
        let (mut g, mut g1, mut g2) = (DVector::zeros(m), DVector::zeros(m), DVector::zeros(m));
        for (k, s) in self.g.iter().enumerate() {
            let [a, b, c] = s.eval(t);
            g[k] = a;
            g1[k] = b;
            g2[k] = c;
        }
        (g, g1, g2)
    }

    pub fn value(&self, x: &DVector<f64>, t: f64) -> f64 {
        let (g, _, _) = self.offset(t);
        (&self.a * x + g).norm_squared()
    }

    /// Constant Hessian `2AᵀA`.
    pub fn hessian(&self) -> DMatrix<f64> {
        self.a.transpose() * &self.a * 2.0
    }

    pub fn has_invertible_hessian(&self) -> bool {
        self.hessian().try_inverse().is_some()
    }

    pub fn derivatives(&self, x: &DVector<f64>, v: &DVector<f64>, t: f64) -> DerivativeBundle {
        let (g, g1, g2) = self.offset(t);
        let at2 = self.a.transpose() * 2.0;
        let residual = &self.a * x + &g;
        let hess = &at2 * &self.a;
        let pt_grad = &at2 * g1;
        let dt_grad = &hess * v + &pt_grad;
        let m = self.dim();
        DerivativeBundle {
            f: residual.norm_squared(),
            grad: &at2 * residual,
            pt_dt_grad: &at2 * g2,
            dt_hess: DMatrix::zeros(m, m),
            hess,
            pt_grad,
            dt_grad,
        }
    }
}

/// Minimizer of `Σ f_i(·, t)` and its time derivative.
pub fn team_optimum(costs: &[CostModel], t: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let m = costs.first().map(CostModel::dim).unwrap_or(0);
    let mut ata = DMatrix::zeros(m, m);
    let mut atg = DVector::zeros(m);
    let mut atg1 = DVector::zeros(m);
    for c in costs {
        let (g, g1, _) = c.offset(t);
        ata += c.a.transpose() * &c.a;
        atg += c.a.transpose() * g;
        atg1 += c.a.transpose() * g1;
    }
    let inv = ata.try_inverse().ok_or(Error::SingularHessian {
        context: "team optimum",
        requirement: "the summed Hessian of the team cost must be invertible",
    })?;
    Ok((-(&inv * atg), -(inv * atg1)))
}

/// Worst relative discrepancy between the analytic bundle and central finite
/// differences of `f` and `∇f` in `x` and `t`. Each component's error is
/// divided by `max(1, |analytic|)`.
pub fn fd_check(c: &CostModel, x: &DVector<f64>, v: &DVector<f64>, t: f64, h: f64) -> f64 {
    assert!(h > 0.0, "finite-difference step must be positive");
    let m = c.dim();
    let b = c.derivatives(x, v, t);
    let grad_at = |x: &DVector<f64>, t: f64| c.derivatives(x, v, t).grad;
    let mut worst = 0.0f64;
    let mut compare = |fd: f64, exact: f64| {
        worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
    };

    for k in 0..m {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += h;
        xm[k] -= h;
        compare((c.value(&xp, t) - c.value(&xm, t)) / (2.0 * h), b.grad[k]);
        let col = (grad_at(&xp, t) - grad_at(&xm, t)) / (2.0 * h);
        for r in 0..m {
            compare(col[r], b.hess[(r, k)]);
        }
    }

    let pt = (grad_at(x, t + h) - grad_at(x, t - h)) / (2.0 * h);
    let total = (grad_at(&(x + v * h), t + h) - grad_at(&(x - v * h), t - h)) / (2.0 * h);
    let pt_total = (c.derivatives(x, v, t + h).dt_grad - c.derivatives(x, v, t - h).dt_grad) / (2.0 * h);
    let dh = (c.derivatives(x, v, t + h).hess - c.derivatives(x, v, t - h).hess) / (2.0 * h);
    for r in 0..m {
        compare(pt[r], b.pt_grad[r]);
        compare(total[r], b.dt_grad[r]);
        compare(pt_total[r], b.pt_dt_grad[r]);
        for k in 0..m {
            compare(dh[(r, k)], b.dt_hess[(r, k)]);
        }
    }
    worst
}

/// The named cost families used by the shipped scenarios. Agents are numbered
/// from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostPreset {
    /// `(x − i·sin t)² + (y − i·cos t)²`; optimum on a circle of radius 3.5
    /// for six agents.
    #[serde(rename = "fig1")]
    Circle,
    /// `(x/i − sin t)² + (y/i − cos t)²`; non-identical Hessians `2/i²·I`.
    #[serde(rename = "fig3")]
    ScaledCircle,
    /// `(x + 2i·sin(0.5t)/(t+1))² + (y + i·sin(0.1t))²`.
    #[serde(rename = "fig5")]
    Damped,
}

impl CostPreset {
    pub fn build(self, n: usize) -> Vec<CostModel> {
        (1..=n)
            .map(|i| {
                let k = i as f64;
                let (a, g) = match self {
                    CostPreset::Circle => (
                        DMatrix::identity(2, 2),
                        vec![TimeSignal::sin(-k, 1.0), TimeSignal::cos(-k, 1.0)],
                    ),
                    CostPreset::ScaledCircle => (
                        DMatrix::identity(2, 2) / k,
                        vec![TimeSignal::sin(-1.0, 1.0), TimeSignal::cos(-1.0, 1.0)],
                    ),
                    CostPreset::Damped => (
                        DMatrix::identity(2, 2),
                        vec![TimeSignal::damped(2.0 * k, 0.5), TimeSignal::sin(k, 0.1)],
                    ),
                };
                CostModel { a, g }
            })
            .collect()
    }
}
