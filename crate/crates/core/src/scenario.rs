//! Scenario files: algorithm choice, graph, costs, initial state, gains and
//! integrator settings, with named presets for the five shipped experiments.
//!
//! A scenario may start from a preset (`{"preset": "fig2", ...}`); the
//! remaining keys are merged over it recursively before validation.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::controllers::{DoubleEstimator, GainParams, SingleEstimator, TeamState};
use crate::costs::{CostModel, CostPreset, TimeSignal};
use crate::error::{Error, Result};
use crate::graph::{EdgeGains, Graph};
use crate::swarm::SwarmParams;
use crate::switching::LayerSpec;

/// Default step for laws with signum terms.
pub const SIGNUM_DT: f64 = 1e-4;
/// Default step for smooth laws.
pub const SMOOTH_DT: f64 = 1e-3;
/// Default logging interval in simulated time.
const LOG_INTERVAL: f64 = 0.01;
const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    CentralizedSingle,
    DistributedSingle,
    EstimatorSingle,
    CentralizedDouble,
    DistributedDouble,
    EstimatorDouble,
    BoundaryTimevarying,
    BoundaryFixed,
    SwarmSingle,
    SwarmDouble,
}

impl Algorithm {
    pub const ALL: [Algorithm; 10] = [
        Algorithm::CentralizedSingle,
        Algorithm::DistributedSingle,
        Algorithm::EstimatorSingle,
        Algorithm::CentralizedDouble,
        Algorithm::DistributedDouble,
        Algorithm::EstimatorDouble,
        Algorithm::BoundaryTimevarying,
        Algorithm::BoundaryFixed,
        Algorithm::SwarmSingle,
        Algorithm::SwarmDouble,
    ];

    pub fn is_double(self) -> bool {
        !matches!(
            self,
            Algorithm::CentralizedSingle
                | Algorithm::DistributedSingle
                | Algorithm::EstimatorSingle
                | Algorithm::SwarmSingle
        )
    }

    /// Whether the right-hand side contains signum terms.
    pub fn uses_signum(self) -> bool {
        !matches!(
            self,
            Algorithm::CentralizedSingle
                | Algorithm::CentralizedDouble
                | Algorithm::BoundaryTimevarying
                | Algorithm::BoundaryFixed
        )
    }

    pub fn is_centralized(self) -> bool {
        matches!(self, Algorithm::CentralizedSingle | Algorithm::CentralizedDouble)
    }

    pub fn is_swarm(self) -> bool {
        matches!(self, Algorithm::SwarmSingle | Algorithm::SwarmDouble)
    }

    pub fn is_estimator(self) -> bool {
        matches!(self, Algorithm::EstimatorSingle | Algorithm::EstimatorDouble)
    }

    /// Laws with adaptive per-edge gains.
    pub fn is_adaptive(self) -> bool {
        matches!(
            self,
            Algorithm::DistributedSingle
                | Algorithm::DistributedDouble
                | Algorithm::BoundaryTimevarying
                | Algorithm::BoundaryFixed
        )
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, Algorithm::BoundaryTimevarying | Algorithm::BoundaryFixed)
    }

    pub fn default_method(self) -> Method {
        if self.uses_signum() {
            Method::Euler
        } else {
            Method::Rk4
        }
    }

    pub fn default_dt(self) -> f64 {
        if self.uses_signum() {
            SIGNUM_DT
        } else {
            SMOOTH_DT
        }
    }

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSpec {
    Ring {
        n: usize,
    },
    Path {
        n: usize,
    },
    Complete {
        n: usize,
    },
    /// 1-based edge list.
    Edges {
        n: usize,
        edges: Vec<[usize; 2]>,
    },
    /// Recomputed from positions at every evaluation.
    Proximity {
        #[serde(rename = "R")]
        r: f64,
    },
}

impl GraphSpec {
    fn n(&self) -> Option<usize> {
        match *self {
            GraphSpec::Ring { n }
            | GraphSpec::Path { n }
            | GraphSpec::Complete { n }
            | GraphSpec::Edges { n, .. } => Some(n),
            GraphSpec::Proximity { .. } => None,
        }
    }

    /// The fixed topology, or `None` for proximity graphs.
    pub fn build_static(&self) -> Result<Option<Graph>> {
        Ok(Some(match self {
            GraphSpec::Ring { n } => Graph::ring(*n),
            GraphSpec::Path { n } => Graph::path(*n),
            GraphSpec::Complete { n } => Graph::complete(*n),
            GraphSpec::Edges { n, edges } => {
                let mut zero_based = Vec::with_capacity(edges.len());
                for (k, &[i, j]) in edges.iter().enumerate() {
                    if i == 0 || j == 0 || i > *n || j > *n || i == j {
                        return Err(Error::validation(
                            format!("graph.edges[{k}]"),
                            format!("edge ({i}, {j}) must join two distinct agents in 1..={n}"),
                        ));
                    }
                    zero_based.push((i - 1, j - 1));
                }
                Graph::from_edges(*n, &zero_based)?
            }
            GraphSpec::Proximity { .. } => return Ok(None),
        }))
    }
}

/// One agent's cost `‖A·x + g(t)‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostEntry {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub g: Vec<TimeSignal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSpec {
    Preset(CostPreset),
    Explicit(Vec<CostEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    Explicit {
        x: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v: Option<Vec<Vec<f64>>>,
        /// Initial edge gains in edge order; defaults to 1 on every edge.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<Vec<f64>>,
    },
    /// Uniform draws from a ChaCha8 stream seeded with `seed`: positions in
    /// `[-x_box, x_box]^m`, velocities in `[-v_box, v_box]^m`, edge gains in
    /// `beta_range`. Positions closer than `min_separation` are redrawn.
    Random {
        seed: u64,
        #[serde(default = "default_x_box")]
        x_box: f64,
        #[serde(default = "default_v_box")]
        v_box: f64,
        #[serde(default = "default_beta_range")]
        beta_range: [f64; 2],
        #[serde(default)]
        min_separation: f64,
    },
}

fn default_x_box() -> f64 {
    2.0
}

fn default_v_box() -> f64 {
    1.0
}

fn default_beta_range() -> [f64; 2] {
    [0.1, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Defaults to euler for signum laws and rk4 otherwise.
    #[serde(default)]
    pub method: Option<Method>,
    /// Defaults to 1e-4 for signum laws and 1e-3 otherwise.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Defaults to one sample per 0.01 time units.
    #[serde(default)]
    pub log_stride: Option<usize>,
}

fn default_t_end() -> f64 {
    20.0
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: None,
            dt: None,
            t_end: default_t_end(),
            log_stride: None,
        }
    }
}

impl IntegratorConfig {
    pub fn method(&self) -> Method {
        self.method.expect("integrator settings are resolved")
    }

    pub fn dt(&self) -> f64 {
        self.dt.expect("integrator settings are resolved")
    }

    pub fn log_stride(&self) -> usize {
        self.log_stride.expect("integrator settings are resolved")
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt()).round() as usize
    }
}

/// Thresholds used for the pass flags in the run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tracking: f64,
    pub consensus: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tracking: 0.1,
            consensus: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub algorithm: Algorithm,
    pub graph: GraphSpec,
    pub costs: CostSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub gains: GainParams,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swarm: Option<SwarmParams>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Run even when a theorem hypothesis fails; the report still flags it.
    #[serde(default)]
    pub expect_violation: bool,
}

pub const PRESETS: [&str; 5] = ["fig1", "fig2", "fig3", "fig4", "fig5"];

/// The shipped experiments: six agents on a ring (or a proximity graph for
/// the swarm run) with the published cost families and coefficients.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let ring6 = GraphSpec::Ring { n: 6 };
    let random = |seed| InitialSpec::Random {
        seed,
        x_box: default_x_box(),
        v_box: default_v_box(),
        beta_range: default_beta_range(),
        min_separation: 0.0,
    };
    let base = ScenarioConfig {
        name: name.to_string(),
        algorithm: Algorithm::DistributedSingle,
        graph: ring6,
        costs: CostSpec::Preset(CostPreset::Circle),
        initial: random(1),
        gains: GainParams::default(),
        integrator: IntegratorConfig::default(),
        swarm: None,
        tolerances: Tolerances::default(),
        expect_violation: false,
    };
    Some(match name {
        "fig1" => base,
        "fig2" => ScenarioConfig {
            algorithm: Algorithm::DistributedDouble,
            initial: random(2),
            gains: GainParams {
                mu: 5.0,
                alpha: 12.0,
                gamma: 5.0,
                zeta: 12.0,
                ..GainParams::default()
            },
            ..base
        },
        "fig3" => ScenarioConfig {
            algorithm: Algorithm::EstimatorDouble,
            costs: CostSpec::Preset(CostPreset::ScaledCircle),
            initial: random(3),
            gains: GainParams {
                kappa: 12.0,
                rho: 2.0,
                alpha1: 0.1,
                alpha2: Some(0.2 / 1.1),
                ..GainParams::default()
            },
            integrator: IntegratorConfig {
                dt: Some(1e-5),
                log_stride: Some(1000),
                ..IntegratorConfig::default()
            },
            ..base
        },
        "fig4" => ScenarioConfig {
            algorithm: Algorithm::BoundaryFixed,
            initial: random(4),
            gains: GainParams {
                mu: 5.0,
                alpha: 10.0,
                gamma: 5.0,
                zeta: 5.0,
                layer: Some(LayerSpec::fixed(2.0)),
                ..GainParams::default()
            },
            ..base
        },
        "fig5" => ScenarioConfig {
            algorithm: Algorithm::SwarmDouble,
            graph: GraphSpec::Proximity { r: 5.0 },
            costs: CostSpec::Preset(CostPreset::Damped),
            initial: InitialSpec::Random {
                seed: 5,
                x_box: 1.5,
                v_box: 0.0,
                beta_range: default_beta_range(),
                min_separation: 0.3,
            },
            swarm: Some(SwarmParams {
                r: 5.0,
                d: 0.5,
                beta: 20.0,
                alpha: 1.0,
            }),
            integrator: IntegratorConfig {
                t_end: 50.0,
                ..IntegratorConfig::default()
            },
            ..base
        },
        _ => return None,
    })
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() && same_kind(slot, &v) => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Tagged objects of a different `kind` replace rather than merge.
fn same_kind(a: &Value, b: &Value) -> bool {
    match (a.get("kind"), b.get("kind")) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    }
}

fn from_value(value: Value) -> Result<ScenarioConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::validation(if path == "." { "<root>".into() } else { path }, e.into_inner())
    })
}

/// Parse, expand a preset if present, fill defaults and validate.
pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| Error::validation("<root>", format!("malformed JSON: {e}")))?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(p) = obj.remove("preset") {
            let name = p
                .as_str()
                .ok_or_else(|| Error::validation("preset", "expected a preset name"))?;
            let base = preset(name).ok_or_else(|| {
                Error::validation("preset", format!("unknown preset `{name}`, expected one of {PRESETS:?}"))
            })?;
            let mut merged = serde_json::to_value(base)?;
            merge(&mut merged, value);
            value = merged;
        }
    }
    from_value(value)?.resolve()
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    parse_scenario_str(&std::fs::read_to_string(path)?)
}

/// Set one dotted path (e.g. `gains.layer.epsilon`) and re-validate.
pub fn with_override(cfg: &ScenarioConfig, path: &str, value: Value) -> Result<ScenarioConfig> {
    with_overrides(cfg, [(path, value)])
}

/// Set several dotted paths, validating only the final combination.
pub fn with_overrides<'a>(
    cfg: &ScenarioConfig,
    changes: impl IntoIterator<Item = (&'a str, Value)>,
) -> Result<ScenarioConfig> {
    let mut root = serde_json::to_value(cfg)?;
    for (path, value) in changes {
        let mut slot = &mut root;
        for key in path.split('.') {
            let obj = slot
                .as_object_mut()
                .ok_or_else(|| Error::validation(path, "path runs through a non-object"))?;
            slot = obj.entry(key.to_string()).or_insert(Value::Null);
        }
        *slot = value;
    }
    from_value(root)?.resolve()
}

fn square_matrix(rows: &[Vec<f64>], path: &str) -> Result<DMatrix<f64>> {
    let m = rows.len();
    if m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::validation(path, "A must be a non-empty square matrix"));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

impl ScenarioConfig {
    /// Agent count: from the graph, or from the costs for proximity graphs.
    pub fn n(&self) -> usize {
        self.graph.n().unwrap_or(match &self.costs {
            CostSpec::Explicit(v) => v.len(),
            CostSpec::Preset(_) => 6,
        })
    }

    pub fn cost_models(&self) -> Result<Vec<CostModel>> {
        match &self.costs {
            CostSpec::Preset(p) => Ok(p.build(self.n())),
            CostSpec::Explicit(entries) => entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let a = square_matrix(&e.a, &format!("costs[{i}].A"))?;
                    CostModel::new(a, e.g.clone())
                        .map_err(|err| Error::validation(format!("costs[{i}].g"), err))
                })
                .collect(),
        }
    }

    /// Fill integrator defaults and check every cross-field constraint.
    pub fn resolve(mut self) -> Result<Self> {
        let alg = self.algorithm;
        let it = &mut self.integrator;
        let method = *it.method.get_or_insert(alg.default_method());
        let dt = *it.dt.get_or_insert(alg.default_dt());
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation("integrator.dt", "must be positive"));
        }
        if !(it.t_end > 0.0 && it.t_end.is_finite()) {
            return Err(Error::validation("integrator.t_end", "must be positive"));
        }
        let stride = *it
            .log_stride
            .get_or_insert(((LOG_INTERVAL / dt).round() as usize).max(1));
        if stride == 0 {
            return Err(Error::validation("integrator.log_stride", "must be at least 1"));
        }
        if alg.uses_signum() && method == Method::Rk4 {
            return Err(Error::validation(
                "integrator.method",
                format!("{} has signum terms and must use euler", alg.name()),
            ));
        }

        let n = self.n();
        if n == 0 {
            return Err(Error::validation("graph.n", "need at least one agent"));
        }
        if let CostSpec::Explicit(entries) = &self.costs {
            if entries.len() != n {
                return Err(Error::validation(
                    "costs",
                    format!("{} cost entries for {n} agents", entries.len()),
                ));
            }
        }
        let costs = self.cost_models()?;
        let m = costs[0].dim();
        if let Some(i) = costs.iter().position(|c| c.dim() != m) {
            return Err(Error::validation(
                format!("costs[{i}]"),
                format!("dimension {} differs from {m}", costs[i].dim()),
            ));
        }
        self.graph.build_static()?;

        let p = &self.gains;
        if alg == Algorithm::EstimatorDouble {
            if !(p.alpha1 > 0.0 && p.alpha1 < 1.0) {
                return Err(Error::validation("gains.alpha1", "must lie in (0, 1)"));
            }
            let expected = 2.0 * p.alpha1 / (p.alpha1 + 1.0);
            if let Some(a2) = p.alpha2 {
                if (a2 - expected).abs() > 1e-12 {
                    return Err(Error::validation(
                        "gains.alpha2",
                        format!("must equal 2·alpha1/(alpha1+1) = {expected}"),
                    ));
                }
            }
        }
        if !(p.pd_floor > 0.0) {
            return Err(Error::validation("gains.pd_floor", "must be positive"));
        }
        if alg.is_boundary() {
            let layer = p
                .layer
                .ok_or_else(|| Error::validation("gains.layer", "boundary-layer laws need {\"epsilon\", \"c\"}"))?;
            if layer.epsilon < 0.0 || layer.c < 0.0 {
                return Err(Error::validation("gains.layer", "epsilon and c must be nonnegative"));
            }
            if alg == Algorithm::BoundaryFixed && layer.c != 0.0 {
                return Err(Error::validation("gains.layer.c", "boundary-fixed needs c = 0"));
            }
            if alg == Algorithm::BoundaryTimevarying && layer.c <= 0.0 {
                return Err(Error::validation("gains.layer.c", "boundary-timevarying needs c > 0"));
            }
        }
        if alg.is_swarm() {
            let s = self
                .swarm
                .ok_or_else(|| Error::validation("swarm", "swarm laws need {\"R\", \"d\", \"beta\"}"))?;
            match self.graph {
                GraphSpec::Proximity { r } if r == s.r => {}
                _ => {
                    return Err(Error::validation(
                        "graph",
                        "swarm laws need {\"kind\": \"proximity\"} with the same R as the swarm block",
                    ))
                }
            }
            if !(s.d > 0.0 && s.d < s.r) {
                return Err(Error::validation("swarm.d", "need 0 < d < R"));
            }
        } else if matches!(self.graph, GraphSpec::Proximity { .. }) {
            return Err(Error::validation("graph.kind", "proximity graphs are only supported for swarm laws"));
        }

        self.check_initial(n, m)?;
        Ok(self)
    }

    fn check_initial(&self, n: usize, m: usize) -> Result<()> {
        let agents = if self.algorithm.is_centralized() { 1 } else { n };
        match &self.initial {
            InitialSpec::Explicit { x, v, beta } => {
                let rows = |rows: &[Vec<f64>], field: &str| -> Result<()> {
                    if rows.len() != agents {
                        return Err(Error::validation(
                            format!("initial.{field}"),
                            format!("expected {agents} rows, got {}", rows.len()),
                        ));
                    }
                    if let Some(i) = rows.iter().position(|r| r.len() != m) {
                        return Err(Error::validation(
                            format!("initial.{field}[{i}]"),
                            format!("expected {m} components"),
                        ));
                    }
                    Ok(())
                };
                rows(x, "x")?;
                match (v, self.algorithm.is_double()) {
                    (Some(v), true) => rows(v, "v")?,
                    (Some(_), false) => {
                        return Err(Error::validation("initial.v", "single-integrator laws take no velocities"))
                    }
                    _ => {}
                }
                if let (Some(beta), Some(g)) = (beta, self.graph.build_static()?) {
                    if beta.len() != g.edges().len() {
                        return Err(Error::validation(
                            "initial.beta",
                            format!("expected {} edge gains", g.edges().len()),
                        ));
                    }
                    if beta.iter().any(|b| *b < 0.0) {
                        return Err(Error::validation("initial.beta", "gains must be nonnegative"));
                    }
                }
            }
            InitialSpec::Random {
                x_box,
                v_box,
                beta_range,
                min_separation,
                ..
            } => {
                if *x_box < 0.0 || *v_box < 0.0 || *min_separation < 0.0 {
                    return Err(Error::validation("initial", "box sizes and separation must be nonnegative"));
                }
                if !(0.0 <= beta_range[0] && beta_range[0] < beta_range[1]) {
                    return Err(Error::validation("initial.beta_range", "need 0 <= low < high"));
                }
            }
        }
        Ok(())
    }

    /// The initial team state. Centralized laws carry a single team state.
    pub fn initial_state(&self) -> Result<TeamState> {
        let n = self.n();
        let m = self.cost_models()?[0].dim();
        let agents = if self.algorithm.is_centralized() { 1 } else { n };
        let graph = self.graph.build_static()?;
        let double = self.algorithm.is_double();
        let to_vecs = |rows: &[Vec<f64>]| rows.iter().map(|r| DVector::from_column_slice(r)).collect::<Vec<_>>();

        let mut state = match &self.initial {
            InitialSpec::Explicit { x, v, beta } => {
                let x = to_vecs(x);
                let mut s = if double {
                    let v = v.as_deref().map(to_vecs).unwrap_or_else(|| vec![DVector::zeros(m); agents]);
                    TeamState::double(x, v)
                } else {
                    TeamState::single(x)
                };
                if let Some(g) = &graph {
                    s.gains = match beta {
                        Some(b) => EdgeGains::from_values(g, b.iter().copied()),
                        None => EdgeGains::uniform(g, 1.0),
                    };
                }
                s
            }
            InitialSpec::Random {
                seed,
                x_box,
                v_box,
                beta_range,
                min_separation,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let draw = |rng: &mut ChaCha8Rng, half: f64| {
                    DVector::from_fn(m, |_, _| if half > 0.0 { rng.random_range(-half..half) } else { 0.0 })
                };
                let mut x: Vec<DVector<f64>> = Vec::with_capacity(agents);
                let mut tries = 0;
                while x.len() < agents {
                    let cand = draw(&mut rng, *x_box);
                    if x.iter().all(|p| (p - &cand).norm() >= *min_separation) {
                        x.push(cand);
                    } else {
                        tries += 1;
                        if tries > MAX_REJECTIONS {
                            return Err(Error::validation(
                                "initial.min_separation",
                                "cannot place agents that far apart inside the box",
                            ));
                        }
                    }
                }
                let mut s = if double {
                    let v = (0..agents).map(|_| draw(&mut rng, *v_box)).collect();
                    TeamState::double(x, v)
                } else {
                    TeamState::single(x)
                };
                if let Some(g) = &graph {
                    let [lo, hi] = *beta_range;
                    let values: Vec<f64> = g.edges().iter().map(|_| rng.random_range(lo..hi)).collect();
                    s.gains = EdgeGains::from_values(g, values);
                }
                s
            }
        };
        if !self.algorithm.is_adaptive() {
            state.gains = EdgeGains::new();
        }
        match self.algorithm {
            Algorithm::EstimatorSingle => state.est_single = Some(vec![SingleEstimator::zeros(m); n]),
            Algorithm::EstimatorDouble => state.est_double = Some(vec![DoubleEstimator::zeros(m); n]),
            _ => {}
        }
        Ok(state)
    }
}
