//! Fixed-step integration of the closed loops, per-sample metrics and the
//! post-hoc probes used to check the analysis.

mod bounds;
mod lyapunov;
mod report;

pub use bounds::{
    appendix_gain_bounds, offset_bounds, offset_difference_bounds, phi_bar_double, phi_bar_single,
    swarm_bounds, AppendixBounds, SwarmReport, GAMMA_MARGIN,
};
pub use lyapunov::{lyapunov_probe, LyapunovKind, ProbePoint};
pub use report::{check_scenario, CheckReport};

use std::borrow::Cow;

use nalgebra::DVector;
use serde::Serialize;

use crate::controllers::{
    centralized_double, centralized_single, continuous_double_step, distributed_double_step,
    distributed_single_step, double_estimates, estimator_double_step, estimator_single_step,
    phi_double, phi_single, single_estimates, TeamState,
};
use crate::costs::{team_optimum, CostModel, DerivativeBundle};
use crate::error::{Error, Result};
use crate::graph::{EdgeGains, Graph};
use crate::linalg::{inf_norm, l1_norm};
use crate::scenario::{Algorithm, Method, ScenarioConfig};
use crate::swarm::{swarm_double_step, swarm_single_step, PotentialSpec};

/// Everything a run needs, built once from a validated scenario.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: ScenarioConfig,
    pub costs: Vec<CostModel>,
    /// `None` for proximity graphs.
    pub graph: Option<Graph>,
    pub potential: Option<PotentialSpec>,
    pub initial: TeamState,
}

impl Problem {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        let config = config.clone().resolve()?;
        let costs = config.cost_models()?;
        let graph = config.graph.build_static()?;
        let initial = config.initial_state()?;
        let potential = match (config.algorithm.is_swarm(), config.swarm) {
            (true, Some(s)) => Some(PotentialSpec::new(s.r, s.d, &initial.x)?),
            _ => None,
        };
        Ok(Problem {
            config,
            costs,
            graph,
            potential,
            initial,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.config.algorithm
    }

    /// Communication graph at `state`; rebuilt from positions for swarms.
    pub fn graph_at(&self, state: &TeamState) -> Option<Cow<'_, Graph>> {
        match (&self.graph, &self.potential) {
            (Some(g), _) => Some(Cow::Borrowed(g)),
            (None, Some(p)) => Some(Cow::Owned(Graph::proximity(&state.x, p.radius()))),
            _ => None,
        }
    }

    /// Per-agent derivative bundles; a centralized state gets the team sum.
    pub fn bundles(&self, state: &TeamState) -> Vec<DerivativeBundle> {
        team_bundles(&self.costs, &state.x, state.v.as_deref(), state.t)
    }
}

/// Per-agent derivative bundles, or one summed bundle when a single state carries every cost.
pub fn team_bundles(
    costs: &[CostModel],
    x: &[DVector<f64>],
    v: Option<&[DVector<f64>]>,
    t: f64,
) -> Vec<DerivativeBundle> {
    let m = x[0].len();
    let vel = |i: usize| v.map_or_else(|| DVector::zeros(m), |v| v[i].clone());
    if x.len() == 1 && costs.len() > 1 {
        let parts: Vec<_> = costs.iter().map(|c| c.derivatives(&x[0], &vel(0), t)).collect();
        vec![DerivativeBundle::sum(&parts).expect("at least one cost")]
    } else {
        costs
            .iter()
            .enumerate()
            .map(|(i, c)| c.derivatives(&x[i], &vel(i), t))
            .collect()
    }
}

/// Right-hand side at one state.
struct Evaluation<'a> {
    rate: TeamState,
    u: Vec<DVector<f64>>,
    phi: Vec<DVector<f64>>,
    bundles: Vec<DerivativeBundle>,
    graph: Option<Cow<'a, Graph>>,
}

fn evaluate<'a>(pb: &'a Problem, state: &TeamState) -> Result<Evaluation<'a>> {
    let bundles = pb.bundles(state);
    let graph = pb.graph_at(state);
    let p = &pb.config.gains;
    let need_graph = || graph.as_deref().expect("distributed laws have a graph");
    let mut beta_dot = EdgeGains::new();
    let mut est_single = None;
    let mut est_double = None;
    let (u, phi) = match pb.algorithm() {
        Algorithm::CentralizedSingle => {
            let u = vec![centralized_single(&bundles[0], p.tau)?];
            (u.clone(), u)
        }
        Algorithm::CentralizedDouble => {
            let u = vec![centralized_double(&bundles[0])?];
            (u.clone(), u)
        }
        Algorithm::DistributedSingle => {
            let out = distributed_single_step(state, &bundles, need_graph())?;
            beta_dot = out.beta_dot;
            (out.u, phis(&bundles, phi_single)?)
        }
        Algorithm::DistributedDouble => {
            let out = distributed_double_step(state, &bundles, need_graph(), p)?;
            beta_dot = out.beta_dot;
            (out.u, phis(&bundles, phi_double)?)
        }
        Algorithm::BoundaryFixed | Algorithm::BoundaryTimevarying => {
            let layer = p.layer.expect("validated boundary scenario has a layer");
            let out = continuous_double_step(state, &bundles, need_graph(), p, layer)?;
            beta_dot = out.beta_dot;
            (out.u, phis(&bundles, phi_double)?)
        }
        Algorithm::EstimatorSingle => {
            let out = estimator_single_step(state, &bundles, need_graph(), p);
            est_single = Some(out.rates);
            (out.u, out.s)
        }
        Algorithm::EstimatorDouble => {
            let out = estimator_double_step(state, &bundles, need_graph(), p);
            est_double = Some(out.rates);
            (out.u, out.s)
        }
        Algorithm::SwarmSingle => {
            let spec = pb.potential.as_ref().expect("swarm scenario has a potential");
            let beta = pb.config.swarm.expect("validated swarm scenario").beta;
            let u = swarm_single_step(state, &bundles, need_graph(), spec, beta)?;
            (u, phis(&bundles, phi_single)?)
        }
        Algorithm::SwarmDouble => {
            let spec = pb.potential.as_ref().expect("swarm scenario has a potential");
            let s = pb.config.swarm.expect("validated swarm scenario");
            let u = swarm_double_step(state, &bundles, need_graph(), spec, s.alpha, s.beta)?;
            (u, phis(&bundles, phi_double)?)
        }
    };
    let (x_rate, v_rate) = match &state.v {
        Some(v) => (v.clone(), Some(u.clone())),
        None => (u.clone(), None),
    };
    let rate = TeamState {
        t: 1.0,
        x: x_rate,
        v: v_rate,
        gains: beta_dot,
        est_single,
        est_double,
    };
    Ok(Evaluation {
        rate,
        u,
        phi,
        bundles,
        graph,
    })
}

fn phis(
    bundles: &[DerivativeBundle],
    f: fn(&DerivativeBundle) -> Result<DVector<f64>>,
) -> Result<Vec<DVector<f64>>> {
    bundles.iter().map(f).collect()
}

/// Quantities logged at every sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// `‖e_X‖₂`.
    pub consensus_x: f64,
    /// `‖e_V‖₂`, zero for single integrators.
    pub consensus_v: f64,
    /// `max_i ‖x_i − x*‖₂`.
    pub tracking: f64,
    /// `‖mean_i x_i − x*‖₂`.
    pub center_error: f64,
    /// `‖Σ_i ∇f_i(x_i, t)‖₂`.
    pub grad_sum: f64,
    /// Smallest pairwise distance (infinite for one agent).
    pub min_dist: f64,
    /// 1 when the current graph is connected.
    pub connected: f64,
    /// The default Lyapunov function for the algorithm (see [`LyapunovKind::for_algorithm`]).
    pub lyapunov: f64,
    /// `max_i ‖w_i − avg w‖∞` over every tracked estimator signal.
    pub est_error: f64,
    /// Mean of `Σ_i ‖u_i(k) − u_i(k−1)‖₁` over the steps since the last sample.
    pub control_tv: f64,
    /// `max_{i,j} ‖φ_i − φ_j‖₂`.
    pub phi_spread: f64,
    /// `max_i ‖φ_i‖₁`.
    pub phi_l1_max: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 12] = [
        "consensus_x",
        "consensus_v",
        "tracking",
        "center_error",
        "grad_sum",
        "min_dist",
        "connected",
        "lyapunov",
        "est_error",
        "control_tv",
        "phi_spread",
        "phi_l1_max",
    ];

    pub fn values(&self) -> [f64; 12] {
        [
            self.consensus_x,
            self.consensus_v,
            self.tracking,
            self.center_error,
            self.grad_sum,
            self.min_dist,
            self.connected,
            self.lyapunov,
            self.est_error,
            self.control_tv,
            self.phi_spread,
            self.phi_l1_max,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<DVector<f64>>,
    pub v: Option<Vec<DVector<f64>>>,
    pub u: Vec<DVector<f64>>,
    /// Edge gains in edge order.
    pub beta: Vec<f64>,
    /// Tracked estimator signals per agent, stacked.
    pub estimates: Option<Vec<DVector<f64>>>,
    pub xstar: DVector<f64>,
    pub vstar: DVector<f64>,
    pub metrics: Metrics,
}

/// Running extremes over every integration step, not only logged samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremes {
    pub phi_spread: f64,
    pub phi_l1_max: f64,
    /// Tracked for swarms only.
    pub min_dist: f64,
    /// Largest distance between initially connected swarm agents.
    pub max_connected_dist: f64,
    pub max_beta: f64,
}

impl Default for Extremes {
    fn default() -> Self {
        Extremes {
            phi_spread: 0.0,
            phi_l1_max: 0.0,
            min_dist: f64::INFINITY,
            max_connected_dist: 0.0,
            max_beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub name: String,
    pub algorithm: Algorithm,
    pub dim: usize,
    pub costs: Vec<CostModel>,
    pub samples: Vec<Sample>,
    pub extremes: Extremes,
    pub final_state: TeamState,
}

impl TrajectoryLog {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn agents(&self) -> usize {
        self.samples.first().map_or(0, |s| s.x.len())
    }

    pub fn is_double(&self) -> bool {
        self.algorithm.is_double()
    }

    /// Samples with `t ∈ [from, to]`.
    pub fn window(&self, from: f64, to: f64) -> impl Iterator<Item = &Sample> {
        self.samples
            .iter()
            .filter(move |s| s.t >= from - 1e-9 && s.t <= to + 1e-9)
    }

    /// Largest value of a metric over `t ∈ [from, to]`.
    pub fn window_max(&self, from: f64, to: f64, f: impl Fn(&Metrics) -> f64) -> f64 {
        self.window(from, to).map(|s| f(&s.metrics)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Deviations from the agent average: `e_X = (Π ⊗ I)X`.
pub fn consensus_errors(x: &[DVector<f64>]) -> Vec<DVector<f64>> {
    if x.is_empty() {
        return Vec::new();
    }
    let mean = mean(x);
    x.iter().map(|xi| xi - &mean).collect()
}

/// `(e_X, e_V)`; `e_V` is empty when `v` is absent.
pub fn consensus_pair(
    x: &[DVector<f64>],
    v: Option<&[DVector<f64>]>,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    (consensus_errors(x), v.map(consensus_errors).unwrap_or_default())
}

pub(crate) fn mean(x: &[DVector<f64>]) -> DVector<f64> {
    let sum = x.iter().skip(1).fold(x[0].clone(), |acc, v| acc + v);
    sum / x.len() as f64
}

fn stacked_norm(v: &[DVector<f64>]) -> f64 {
    v.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn pairwise_max(v: &[DVector<f64>]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            best = best.max((&v[i] - &v[j]).norm());
        }
    }
    best
}

fn min_distance(x: &[DVector<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            best = best.min((&x[i] - &x[j]).norm());
        }
    }
    best
}

fn estimator_error(state: &TeamState, bundles: &[DerivativeBundle]) -> (f64, Option<Vec<DVector<f64>>>) {
    fn spread(v: &[DVector<f64>]) -> f64 {
        consensus_errors(v).iter().map(inf_norm).fold(0.0, f64::max)
    }
    let flat = |m: &nalgebra::DMatrix<f64>| DVector::from_column_slice(m.as_slice());
    if let Some(est) = &state.est_single {
        let (w, theta, sigma) = single_estimates(est, bundles);
        let theta: Vec<_> = theta.iter().map(flat).collect();
        let err = spread(&w).max(spread(&theta)).max(spread(&sigma));
        let stacked = (0..w.len())
            .map(|i| {
                DVector::from_iterator(
                    w[i].len() + theta[i].len() + sigma[i].len(),
                    w[i].iter().chain(theta[i].iter()).chain(sigma[i].iter()).copied(),
                )
            })
            .collect();
        (err, Some(stacked))
    } else if let Some(est) = &state.est_double {
        let (w, sigma) = double_estimates(est, bundles);
        let sigma: Vec<_> = sigma.iter().map(flat).collect();
        let err = spread(&w).max(spread(&sigma));
        let stacked = (0..w.len())
            .map(|i| {
                DVector::from_iterator(w[i].len() + sigma[i].len(), w[i].iter().chain(sigma[i].iter()).copied())
            })
            .collect();
        (err, Some(stacked))
    } else {
        (0.0, None)
    }
}

fn sample(pb: &Problem, state: &TeamState, ev: &Evaluation, control_tv: f64) -> Result<Sample> {
    let (xstar, vstar) = team_optimum(&pb.costs, state.t)?;
    let ex = consensus_errors(&state.x);
    let ev_v = state.v.as_deref().map(consensus_errors).unwrap_or_default();
    let center = mean(&state.x);
    let grad_sum = ev
        .bundles
        .iter()
        .skip(1)
        .fold(ev.bundles[0].grad.clone(), |acc, b| acc + &b.grad);
    let lyapunov = lyapunov::value(
        LyapunovKind::for_algorithm(pb.algorithm()),
        &ev.bundles,
        state.v.as_ref().map(|v| &v[0]),
    )?;
    let (est_error, estimates) = estimator_error(state, &ev.bundles);
    let connected = match &ev.graph {
        Some(g) => g.is_connected(),
        None => true,
    };
    let metrics = Metrics {
        consensus_x: stacked_norm(&ex),
        consensus_v: stacked_norm(&ev_v),
        tracking: state.x.iter().map(|x| (x - &xstar).norm()).fold(0.0, f64::max),
        center_error: (&center - &xstar).norm(),
        grad_sum: grad_sum.norm(),
        min_dist: min_distance(&state.x),
        connected: if connected { 1.0 } else { 0.0 },
        lyapunov,
        est_error,
        control_tv,
        phi_spread: pairwise_max(&ev.phi),
        phi_l1_max: ev.phi.iter().map(l1_norm).fold(0.0, f64::max),
    };
    Ok(Sample {
        t: state.t,
        x: state.x.clone(),
        v: state.v.clone(),
        u: ev.u.clone(),
        beta: state.gains.values(),
        estimates,
        xstar,
        vstar,
        metrics,
    })
}

fn track_extremes(pb: &Problem, state: &TeamState, ev: &Evaluation, ext: &mut Extremes) {
    ext.phi_spread = ext.phi_spread.max(pairwise_max(&ev.phi));
    ext.phi_l1_max = ext.phi_l1_max.max(ev.phi.iter().map(l1_norm).fold(0.0, f64::max));
    if let Some(spec) = &pb.potential {
        ext.min_dist = ext.min_dist.min(min_distance(&state.x));
        for (i, j) in spec.connected_pairs() {
            ext.max_connected_dist = ext.max_connected_dist.max((&state.x[i] - &state.x[j]).norm());
        }
    }
    ext.max_beta = state.gains.values().into_iter().fold(ext.max_beta, f64::max);
}

fn step(pb: &Problem, state: &TeamState, k1: &Evaluation, dt: f64) -> Result<TeamState> {
    Ok(match pb.config.integrator.method() {
        Method::Euler => state.add_scaled(dt, &k1.rate),
        Method::Rk4 => {
            let k2 = evaluate(pb, &state.add_scaled(dt / 2.0, &k1.rate))?.rate;
            let k3 = evaluate(pb, &state.add_scaled(dt / 2.0, &k2))?.rate;
            let k4 = evaluate(pb, &state.add_scaled(dt, &k3))?.rate;
            state
                .add_scaled(dt / 6.0, &k1.rate)
                .add_scaled(dt / 3.0, &k2)
                .add_scaled(dt / 3.0, &k3)
                .add_scaled(dt / 6.0, &k4)
        }
    })
}

/// Run a scenario from its initial state to `t_end`.
pub fn integrate(config: &ScenarioConfig) -> Result<TrajectoryLog> {
    integrate_problem(&Problem::new(config)?)
}

pub fn integrate_problem(pb: &Problem) -> Result<TrajectoryLog> {
    let it = &pb.config.integrator;
    let (dt, steps, stride) = (it.dt(), it.steps(), it.log_stride());
    let mut state = pb.initial.clone();
    let mut samples = Vec::with_capacity(steps / stride + 2);
    let mut ext = Extremes::default();
    let mut prev_u: Option<Vec<DVector<f64>>> = None;
    let mut tv_sum = 0.0;
    let mut tv_count = 0usize;

    for k in 0..=steps {
        let ev = evaluate(pb, &state)?;
        if let Some(prev) = &prev_u {
            tv_sum += prev.iter().zip(&ev.u).map(|(a, b)| l1_norm(&(b - a))).sum::<f64>();
            tv_count += 1;
        }
        track_extremes(pb, &state, &ev, &mut ext);
        if k % stride == 0 || k == steps {
            let tv = if tv_count > 0 { tv_sum / tv_count as f64 } else { 0.0 };
            samples.push(sample(pb, &state, &ev, tv)?);
            tv_sum = 0.0;
            tv_count = 0;
        }
        if k == steps {
            break;
        }
        let mut next = step(pb, &state, &ev, dt)?;
        next.t = (k + 1) as f64 * dt;
        if !next.is_finite() {
            return Err(Error::NonFinite { step: k + 1, t: next.t });
        }
        prev_u = Some(ev.u);
        state = next;
    }

    Ok(TrajectoryLog {
        name: pb.config.name.clone(),
        algorithm: pb.algorithm(),
        dim: state.dim(),
        costs: pb.costs.clone(),
        samples,
        extremes: ext,
        final_state: state,
    })
}

/// Headline numbers for a finished run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub t_end: f64,
    pub final_metrics: Metrics,
    /// Window used for the steady-state figures: the last quarter of the run.
    pub steady_from: f64,
    pub steady_tracking: f64,
    pub steady_consensus: f64,
    pub tracking_pass: bool,
    pub consensus_pass: bool,
    pub extremes: Extremes,
}

pub fn summarize(log: &TrajectoryLog, config: &ScenarioConfig) -> Summary {
    let last = log.samples.last().expect("a log has at least one sample");
    let t_end = last.t;
    let steady_from = 0.75 * t_end;
    let steady_tracking = log.window_max(steady_from, t_end, |m| m.tracking);
    let steady_consensus = log.window_max(steady_from, t_end, |m| m.consensus_x);
    Summary {
        t_end,
        final_metrics: last.metrics,
        steady_from,
        steady_tracking,
        steady_consensus,
        tracking_pass: steady_tracking < config.tolerances.tracking,
        consensus_pass: steady_consensus < config.tolerances.consensus,
        extremes: log.extremes,
    }
}
