use std::fmt;

use serde::Serialize;

use super::bounds::{appendix_gain_bounds, swarm_bounds, AppendixBounds, SwarmReport, GAMMA_MARGIN};
use crate::controllers::{check_gain_conditions, fixed_layer_error_bound, short, ConditionReport};
use crate::error::Result;
use crate::graph::Graph;
use crate::scenario::{Algorithm, ScenarioConfig};

/// Hypothesis checks and certificates for a scenario, without running it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub algorithm: Algorithm,
    pub agents: usize,
    /// Connectivity of the static graph, or of the initial proximity graph.
    pub connected: Option<bool>,
    pub lambda2: Option<f64>,
    pub conditions: Option<ConditionReport>,
    pub appendix: Option<AppendixBounds>,
    pub layer_error_bound: Option<f64>,
    pub swarm: Option<SwarmReport>,
    /// Failed hypotheses and bounds that could not be computed.
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.warnings.is_empty()
    }
}

pub fn check_scenario(config: &ScenarioConfig) -> Result<CheckReport> {
    let config = config.clone().resolve()?;
    let alg = config.algorithm;
    let costs = config.cost_models()?;
    let state = config.initial_state()?;
    let m = state.dim();
    let mut warnings = Vec::new();
    let mut report = CheckReport {
        name: config.name.clone(),
        algorithm: alg,
        agents: config.n(),
        connected: None,
        lambda2: None,
        conditions: None,
        appendix: None,
        layer_error_bound: None,
        swarm: None,
        warnings: Vec::new(),
    };
    if alg.is_centralized() {
        return Ok(report);
    }

    let graph = match (config.graph.build_static()?, config.swarm) {
        (Some(g), _) => g,
        (None, Some(s)) => Graph::proximity(&state.x, s.r),
        (None, None) => unreachable!("validated scenarios without a static graph are swarms"),
    };
    let connected = graph.is_connected();
    report.connected = Some(connected);
    if !connected {
        warnings.push("disconnected: theorems inapplicable".to_string());
    } else {
        let l2 = graph.lambda2()?;
        report.lambda2 = Some(l2);
        if matches!(
            alg,
            Algorithm::DistributedDouble | Algorithm::BoundaryFixed | Algorithm::BoundaryTimevarying
        ) {
            let cond = check_gain_conditions(&config.gains, l2, None);
            for c in cond.checks.iter().filter(|c| !c.pass) {
                warnings.push(format!("gain condition violated: {c}"));
            }
            report.conditions = Some(cond);
        }
    }

    if alg.is_adaptive() && connected {
        match appendix_gain_bounds(&state, &costs, &config.gains, &graph, GAMMA_MARGIN) {
            Ok(b) => {
                report.appendix = Some(b);
                if alg == Algorithm::BoundaryFixed {
                    if let Some(psi) = report.conditions.as_ref().and_then(|c| c.psi) {
                        match fixed_layer_error_bound(&config.gains, m, b.phi_bar, psi, &graph) {
                            Ok(e) => report.layer_error_bound = Some(e),
                            Err(e) => warnings.push(format!("layer error bound unavailable: {e}")),
                        }
                    }
                }
            }
            Err(e) => warnings.push(format!("appendix bounds unavailable: {e}")),
        }
    }

    if let (true, Some(params)) = (alg.is_swarm(), &config.swarm) {
        match swarm_bounds(&state, &costs, params, GAMMA_MARGIN) {
            Ok(s) => {
                if alg == Algorithm::SwarmSingle && s.single.beta >= params.beta {
                    warnings.push(format!(
                        "configured β = {} is below the certified {}",
                        short(params.beta),
                        short(s.single.beta)
                    ));
                }
                report.swarm = Some(s);
            }
            Err(e) => warnings.push(format!("swarm bounds unavailable: {e}")),
        }
    }
    report.warnings = warnings;
    Ok(report)
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {} ({}), {} agents", self.name, self.algorithm.name(), self.agents)?;
        match self.connected {
            None => writeln!(f, "centralized law: no graph conditions")?,
            Some(false) => writeln!(f, "disconnected: theorems inapplicable")?,
            Some(true) => writeln!(
                f,
                "connected, λ₂ = {}",
                self.lambda2.map_or_else(|| "?".into(), short)
            )?,
        }
        if let Some(c) = &self.conditions {
            for check in &c.checks {
                writeln!(f, "{check}  (margin {})", short(check.margin()))?;
            }
            if let Some(psi) = c.psi {
                writeln!(f, "ψ = {}", short(psi))?;
            }
        }
        if let Some(b) = &self.appendix {
            writeln!(
                f,
                "appendix bounds: β_x = {}, β_v = {}, φ̄ = {}, β̄ = {}",
                short(b.beta_x),
                short(b.beta_v),
                short(b.phi_bar),
                short(b.beta_bar)
            )?;
        }
        if let Some(e) = self.layer_error_bound {
            writeln!(f, "fixed-layer error bound: {}", short(e))?;
        }
        if let Some(s) = &self.swarm {
            let verdict = if s.single.beta < s.configured_beta { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "single-integrator swarm certificate β = {} (β_x = {}) vs configured β = {} : {verdict}",
                short(s.single.beta),
                short(s.single.beta_x),
                short(s.configured_beta)
            )?;
            writeln!(
                f,
                "swarm φ̄ = {} (W(0) = {}, dx = {}, dv = {})",
                short(s.phi_bar),
                short(s.w0),
                short(s.dx),
                short(s.dv)
            )?;
        }
        for w in &self.warnings {
            if w != "disconnected: theorems inapplicable" {
                writeln!(f, "warning: {w}")?;
            }
        }
        Ok(())
    }
}
