//! Pairwise potentials with collision avoidance and connectivity maintenance,
//! and the swarm-tracking laws built on them.
//!
//! The potential of a pair depends only on its distance `s`, and its gradient
//! with respect to `x_i` is `p(s)·(x_i − x_j)/s`. Pairs that start within the
//! sensing radius `R` get a profile that blows up at `R`, so they can never
//! separate; other pairs get a profile that fades to zero at `R`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::controllers::{phi_double, phi_single, TeamState};
use crate::costs::DerivativeBundle;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::switching::sgn_vec;

/// Swarm parameters as they appear in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmParams {
    #[serde(rename = "R")]
    pub r: f64,
    pub d: f64,
    pub beta: f64,
    /// Relative-velocity damping of the double-integrator law; 0 disables it.
    #[serde(default = "default_damping")]
    pub alpha: f64,
}

fn default_damping() -> f64 {
    1.0
}

/// Radius, desired spacing and the pair classification frozen at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    r: f64,
    d: f64,
    n: usize,
    initially_connected: Vec<bool>,
}

impl PotentialSpec {
    pub fn new(r: f64, d: f64, initial: &[DVector<f64>]) -> Result<Self> {
        if !(d > 0.0 && d < r) {
            return Err(Error::validation(
                "swarm",
                format!("need 0 < d < R, got d = {d}, R = {r}"),
            ));
        }
        let n = initial.len();
        let mut initially_connected = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                initially_connected[i * n + j] = i != j && (&initial[i] - &initial[j]).norm() < r;
            }
        }
        Ok(PotentialSpec {
            r,
            d,
            n,
            initially_connected,
        })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn spacing(&self) -> f64 {
        self.d
    }

    pub fn initially_connected(&self, i: usize, j: usize) -> bool {
        self.initially_connected[i * self.n + j]
    }

    /// Pairs `(i, j)`, `i < j`, that started within the radius.
    pub fn connected_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.initially_connected(i, j))
            .collect()
    }

    /// `∂V_ij/∂x_i` for agents `i` and `j` at time `t`.
    pub fn gradient(
        &self,
        i: usize,
        j: usize,
        xi: &DVector<f64>,
        xj: &DVector<f64>,
        t: f64,
    ) -> Result<DVector<f64>> {
        let diff = xi - xj;
        let s = diff.norm();
        if s == 0.0 {
            return Err(Error::Collision {
                i: i + 1,
                j: j + 1,
                t,
            });
        }
        Ok(diff * (profile(s, self.initially_connected(i, j), self.r, self.d) / s))
    }

    /// `V_ij` at distance `s`; zero at `s = d`, infinite at collision and, for
    /// initially connected pairs, at `s ≥ R`.
    pub fn value(&self, i: usize, j: usize, s: f64) -> f64 {
        potential(s, self.initially_connected(i, j), self.r, self.d)
    }

    /// `Σ_i Σ_{j≠i} V_ij` over all ordered pairs.
    pub fn total(&self, x: &[DVector<f64>]) -> f64 {
        let mut sum = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                if i != j {
                    sum += self.value(i, j, (&x[i] - &x[j]).norm());
                }
            }
        }
        sum
    }
}

/// Scalar profile `p(s)` with `∂V/∂x_i = p(s)·(x_i − x_j)/s`.
pub fn profile(s: f64, initially_connected: bool, r: f64, d: f64) -> f64 {
    if s >= r {
        return 0.0;
    }
    if initially_connected {
        (s - d) * (1.0 / (s * s) + 1.0 / ((r - s) * (r - s)))
    } else {
        (s - d) * (r - s) / (s * s * (r - d))
    }
}

/// Closed-form antiderivative of [`profile`] from `d` to `s`.
pub fn potential(s: f64, initially_connected: bool, r: f64, d: f64) -> f64 {
    if s <= 0.0 {
        return f64::INFINITY;
    }
    if initially_connected {
        if s >= r {
            return f64::INFINITY;
        }
        let f = |x: f64| x.ln() + d / x + (r - d) / (r - x) + (r - x).ln();
        f(s) - f(d)
    } else {
        let f = |x: f64| -x + (r + d) * x.ln() + r * d / x;
        (f(s.min(r)) - f(d)) / (r - d)
    }
}

fn potential_force(
    state: &TeamState,
    g: &Graph,
    spec: &PotentialSpec,
) -> Result<Vec<DVector<f64>>> {
    let mut f = vec![DVector::zeros(state.dim()); state.n()];
    for &(i, j) in g.edges() {
        let grad = spec.gradient(i, j, &state.x[i], &state.x[j], state.t)?;
        f[i] += &grad;
        f[j] -= &grad;
    }
    Ok(f)
}

/// `u_i = −β·sgn(Σ_{j∈N_i} ∂V_ij/∂x_i) + φ_i` with the single-integrator
/// internal signal.
pub fn swarm_single_step(
    state: &TeamState,
    bundles: &[DerivativeBundle],
    g: &Graph,
    spec: &PotentialSpec,
    beta: f64,
) -> Result<Vec<DVector<f64>>> {
    let f = potential_force(state, g, spec)?;
    f.iter()
        .zip(bundles)
        .map(|(f, b)| Ok(phi_single(b)? - sgn_vec(f) * beta))
        .collect()
}

/// `u_i = −Σ ∂V_ij/∂x_i − αΣ(v_i − v_j) − βΣ sgn(v_i − v_j) + φ_i` with the
/// double-integrator internal signal; sums run over current neighbours.
pub fn swarm_double_step(
    state: &TeamState,
    bundles: &[DerivativeBundle],
    g: &Graph,
    spec: &PotentialSpec,
    alpha: f64,
    beta: f64,
) -> Result<Vec<DVector<f64>>> {
    let v = state
        .v
        .as_ref()
        .expect("double-integrator law needs velocities");
    let mut u = bundles.iter().map(phi_double).collect::<Result<Vec<_>>>()?;
    for &(i, j) in g.edges() {
        let grad = spec.gradient(i, j, &state.x[i], &state.x[j], state.t)?;
        let dv = &v[i] - &v[j];
        let c = grad + &dv * alpha + sgn_vec(&dv) * beta;
        u[i] -= &c;
        u[j] += &c;
    }
    Ok(u)
}

/// Conservative gain for the single-integrator swarm law, fixed from the
/// initial positions and bounds on the gradient offset `b_i(t)` of
/// `∇f_i = σx_i + b_i(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwarmBound {
    /// Bound on every `‖x_i(t)‖₂`.
    pub beta_x: f64,
    /// Bound on every `‖φ_i(t)‖₁` plus the margin.
    pub beta: f64,
}

/// `β_x = (1/N)‖Σx_i(0)‖ + (2/σ)b̄ + (N−1)R + γ` and
/// `β = √m·(β_x + (b̄ + ḃ̄)/σ) + γ`, which exceeds `‖φ_i‖₁` whenever every
/// `‖x_i‖ ≤ β_x`, since `φ_i = −x_i − (b_i + ḃ_i)/σ`.
pub fn swarm_beta_bound(
    x0: &[DVector<f64>],
    b_bar: f64,
    bdot_bar: f64,
    sigma: f64,
    r: f64,
    margin: f64,
) -> SwarmBound {
    let n = x0.len() as f64;
    let m = x0.first().map_or(0, |x| x.len()) as f64;
    let sum = x0.iter().fold(DVector::zeros(m as usize), |acc, x| acc + x);
    let beta_x = sum.norm() / n + 2.0 * b_bar / sigma + (n - 1.0) * r + margin;
    let beta = m.sqrt() * (beta_x + (b_bar + bdot_bar) / sigma) + margin;
    SwarmBound { beta_x, beta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostPreset;
    use crate::graph::EdgeGains;
    use proptest::prelude::*;

    const R: f64 = 5.0;
    const D: f64 = 0.5;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn pair_spec(s0: f64) -> PotentialSpec {
        PotentialSpec::new(R, D, &[dv(&[0.0, 0.0]), dv(&[s0, 0.0])]).unwrap()
    }

    #[test]
    fn zero_gradient_at_desired_spacing() {
        for s0 in [1.0, 6.0] {
            let spec = pair_spec(s0);
            let g = spec.gradient(0, 1, &dv(&[D, 0.0]), &dv(&[0.0, 0.0]), 0.0).unwrap();
            assert_eq!(g, dv(&[0.0, 0.0]));
        }
    }

    #[test]
    fn unconnected_pairs_ignore_each_other_beyond_radius() {
        let spec = pair_spec(6.0);
        assert!(!spec.initially_connected(0, 1));
        for s in [R, 5.5, 40.0] {
            let g = spec.gradient(0, 1, &dv(&[s, 0.0]), &dv(&[0.0, 0.0]), 0.0).unwrap();
            assert_eq!(g, dv(&[0.0, 0.0]));
        }
        // Continuous at R from below.
        assert!(profile(R - 1e-9, false, R, D).abs() < 1e-8);
    }

    #[test]
    fn connected_pairs_blow_up_at_radius() {
        let a = profile(R - 1e-3, true, R, D);
        let b = profile(R - 1e-4, true, R, D);
        assert!(a > 1e5 && b > 50.0 * a);
    }

    #[test]
    fn collision_is_an_error() {
        let spec = pair_spec(1.0);
        let err = spec.gradient(0, 1, &dv(&[1.0, 1.0]), &dv(&[1.0, 1.0]), 2.5).unwrap_err();
        assert!(matches!(err, Error::Collision { i: 1, j: 2, .. }));
    }

    #[test]
    fn spacing_must_be_below_radius() {
        assert!(PotentialSpec::new(1.0, 2.0, &[dv(&[0.0])]).is_err());
    }

    #[test]
    fn close_pairs_repel() {
        for connected in [true, false] {
            for s in [0.05, 0.2, 0.45] {
                assert!(profile(s, connected, R, D) < 0.0);
            }
            for s in [0.6, 2.0, 4.9] {
                assert!(profile(s, connected, R, D) > 0.0);
            }
        }
    }

    #[test]
    fn potential_is_antiderivative_of_profile() {
        let h = 1e-6;
        for connected in [true, false] {
            for s in [0.1, 0.5, 1.3, 3.0, 4.7] {
                let fd = (potential(s + h, connected, R, D) - potential(s - h, connected, R, D)) / (2.0 * h);
                let p = profile(s, connected, R, D);
                assert!((fd - p).abs() < 1e-5 * p.abs().max(1.0), "s = {s}");
            }
            assert_eq!(potential(D, connected, R, D), 0.0);
        }
        assert!(potential(R, true, R, D).is_infinite());
        assert!(potential(0.0, false, R, D).is_infinite());
    }

    proptest! {
        #[test]
        fn potentials_are_nonnegative_with_minimum_at_spacing(s in 1e-3..(R - 1e-3), connected: bool) {
            prop_assert!(potential(s, connected, R, D) >= 0.0);
        }

        #[test]
        fn pair_gradients_are_antisymmetric(
            a in prop::collection::vec(-3.0..3.0f64, 2),
            b in prop::collection::vec(-3.0..3.0f64, 2),
        ) {
            let (xa, xb) = (dv(&a), dv(&b));
            prop_assume!((&xa - &xb).norm() > 1e-6);
            let spec = PotentialSpec::new(R, D, &[xa.clone(), xb.clone()]).unwrap();
            let gij = spec.gradient(0, 1, &xa, &xb, 0.0).unwrap();
            let gji = spec.gradient(1, 0, &xb, &xa, 0.0).unwrap();
            prop_assert!((gij + gji).amax() < 1e-12);
        }
    }

    fn line_state(xs: &[f64]) -> (TeamState, Vec<DerivativeBundle>, PotentialSpec, Graph) {
        let x: Vec<_> = xs.iter().map(|&a| dv(&[a, 0.0])).collect();
        let v = vec![dv(&[0.0, 0.0]); xs.len()];
        let spec = PotentialSpec::new(R, D, &x).unwrap();
        let g = Graph::proximity(&x, R);
        let costs = CostPreset::Damped.build(xs.len());
        let s = TeamState::double(x, v);
        let b = costs
            .iter()
            .enumerate()
            .map(|(i, c)| c.derivatives(&s.x[i], &s.velocity(i), 0.0))
            .collect();
        (s, b, spec, g)
    }

    #[test]
    fn spaced_pair_only_feels_internal_signals() {
        let (s, b, spec, g) = line_state(&[0.0, D]);
        let u = swarm_double_step(&s, &b, &g, &spec, 1.0, 20.0).unwrap();
        let us = swarm_single_step(&s, &b, &g, &spec, 20.0).unwrap();
        for i in 0..2 {
            assert!((&u[i] - phi_double(&b[i]).unwrap()).amax() < 1e-12);
            assert!((&us[i] - phi_single(&b[i]).unwrap()).amax() < 1e-12);
        }
    }

    #[test]
    fn isolated_agent_follows_its_signal() {
        let (s, b, spec, g) = line_state(&[0.0, 10.0]);
        assert!(g.edges().is_empty());
        let u = swarm_single_step(&s, &b, &g, &spec, 20.0).unwrap();
        assert_eq!(u[1], phi_single(&b[1]).unwrap());
    }

    #[test]
    fn close_pair_is_pushed_apart() {
        let (s, b, spec, g) = line_state(&[0.0, 0.2]);
        let u = swarm_double_step(&s, &b, &g, &spec, 1.0, 20.0).unwrap();
        let push0 = &u[0] - phi_double(&b[0]).unwrap();
        let push1 = &u[1] - phi_double(&b[1]).unwrap();
        assert!(push0[0] < 0.0 && push1[0] > 0.0);
        let us = swarm_single_step(&s, &b, &g, &spec, 20.0).unwrap();
        assert!((&us[0] - phi_single(&b[0]).unwrap())[0] < 0.0);
    }

    #[test]
    fn double_couplings_cancel() {
        let (mut s, b, spec, g) = line_state(&[0.0, 0.9, 2.1, 2.4]);
        s.v = Some((0..4).map(|i| dv(&[i as f64 * 0.3, -(i as f64)])).collect());
        s.gains = EdgeGains::new();
        let u = swarm_double_step(&s, &b, &g, &spec, 1.0, 20.0).unwrap();
        let mut total = DVector::zeros(2);
        for i in 0..4 {
            total += &u[i] - phi_double(&b[i]).unwrap();
        }
        assert!(total.amax() < 1e-10);
    }

    #[test]
    fn beta_bound_examples() {
        let x0 = vec![dv(&[0.0, 0.0]); 6];
        let b = swarm_beta_bound(&x0, 0.0, 0.0, 2.0, R, 1.0);
        assert_eq!(b.beta_x, 5.0 * R + 1.0);
        let b2 = swarm_beta_bound(&x0, 3.0, 0.0, 2.0, R, 1.0);
        assert!((b2.beta_x - b.beta_x - 3.0).abs() < 1e-12);
        assert!(b2.beta > b.beta);
    }
}
