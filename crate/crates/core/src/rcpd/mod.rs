//! Reflector-link planning (R-CPD): an integer program per rolling window of
//! periods, solved by branch and bound.

mod bnb;
mod model;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::RcpdError;
use crate::types::{LinkSet, NodeKind, NodeSet, ReflectorPlan, ReflectorPlanParams, VisibilitySet};

pub use bnb::{solve_with, Solution, SolveLimits};
pub use model::{build_model, DegreeConstraint, GroundFloor, IlpModel, IlpVar, VarKind, WindowConstraint};

/// How access windows that cannot be covered are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessMode {
    /// A window with no candidate satellite is an error.
    Strict,
    /// Windows with no candidate satellite become soft (cost P) and are
    /// reported in the plan's waived list; all others stay hard.
    #[default]
    Relaxed,
    /// Every window is soft.
    Soft,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RcpdParams {
    /// r, reflector terminals per satellite.
    pub terminals: u32,
    /// f, access-frequency window in periods.
    pub access_window: usize,
    /// L_G, desired satellite-ground links per period.
    pub gs_links: u32,
    /// P, penalty per unit of ground-link deficit or uncovered soft window.
    pub penalty: i64,
    /// Periods solved jointly per rolling window.
    pub horizon: usize,
    /// Wall-clock budget per window solve, seconds. Runs with a budget are
    /// only reproducible if every solve finishes inside it.
    pub time_limit: Option<f64>,
    /// Search-node budget per window solve (deterministic).
    pub node_limit: u64,
    pub access_mode: AccessMode,
}

impl Default for RcpdParams {
    fn default() -> Self {
        RcpdParams {
            terminals: 2,
            access_window: 2,
            gs_links: 2,
            penalty: 1000,
            horizon: 6,
            time_limit: None,
            node_limit: SolveLimits::default().node_limit,
            access_mode: AccessMode::Relaxed,
        }
    }
}

impl RcpdParams {
    pub fn plan_params(&self) -> ReflectorPlanParams {
        ReflectorPlanParams {
            terminals: self.terminals,
            access_window: self.access_window,
            gs_links: self.gs_links,
            penalty: self.penalty,
        }
    }

    pub fn limits(&self) -> SolveLimits {
        SolveLimits {
            node_limit: self.node_limit,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
        }
    }

    pub fn validate(&self, nodes: &NodeSet) -> Result<(), RcpdError> {
        if self.terminals < 1 {
            return Err(RcpdError::Params("terminals must be at least 1".into()));
        }
        if self.access_window < 1 {
            return Err(RcpdError::Params("access_window must be at least 1".into()));
        }
        if self.horizon < self.access_window {
            return Err(RcpdError::Params(format!(
                "horizon ({}) must be at least the access window ({})",
                self.horizon, self.access_window
            )));
        }
        if self.node_limit == 0 {
            return Err(RcpdError::Params("node_limit must be positive".into()));
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0 && t.is_finite()) {
                return Err(RcpdError::Params(format!("time_limit {t} must be positive")));
            }
        }
        let n = nodes.satellite_count() as i64;
        let ss_links = n * (n - 1) / 2 * self.horizon as i64;
        if self.penalty <= ss_links {
            return Err(RcpdError::Params(format!(
                "penalty {} must exceed the {} inter-satellite links a window can hold",
                self.penalty, ss_links
            )));
        }
        Ok(())
    }
}

fn kinds(nodes: &NodeSet) -> Vec<NodeKind> {
    nodes.iter().map(|n| n.kind).collect()
}

/// Solves one model with the limits of `params`.
pub fn solve(model: &IlpModel, nodes: &NodeSet, params: &RcpdParams) -> Result<Solution, RcpdError> {
    solve_with(model, &kinds(nodes), params.terminals, params.limits())
}

/// Outcome of [`plan_horizon`] beyond the plan itself.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HorizonReport {
    pub solves: usize,
    /// Every window solve was proven optimal.
    pub optimal: bool,
    pub nodes: u64,
}

/// Plans every period with a rolling horizon: windows of `horizon` periods
/// overlapping by f - 1, the overlap pinned to the previous window's
/// decisions so every global access window is checked by some solve.
pub fn plan_horizon(
    vis: &VisibilitySet,
    nodes: &NodeSet,
    params: &RcpdParams,
) -> Result<(ReflectorPlan, HorizonReport), RcpdError> {
    params.validate(nodes)?;
    let total = vis.periods();
    let mut plan = ReflectorPlan::new(params.plan_params(), total);
    let mut report = HorizonReport {
        optimal: true,
        ..HorizonReport::default()
    };
    if total == 0 {
        return Ok((plan, report));
    }
    let overlap = params.access_window - 1;
    let mut start = 0;
    loop {
        let end = (start + params.horizon).min(total);
        let pinned: Vec<LinkSet> = if start == 0 {
            Vec::new()
        } else {
            (start..start + overlap).map(|m| plan.links(m).clone()).collect()
        };
        let model = build_model(vis, nodes, params, start..end, &pinned)?;
        let sol = solve(&model, nodes, params)?;
        report.solves += 1;
        report.nodes += sol.nodes;
        report.optimal &= sol.optimal;
        for (offset, links) in model.links(&sol.values).into_iter().enumerate() {
            *plan.links_mut(start + offset) = links;
        }
        for (offset, d) in model.deficits(&sol.values).into_iter().enumerate() {
            plan.set_deficit(start + offset, d);
        }
        for w in model.uncovered(&sol.values) {
            if !plan.waived.contains(&w) {
                plan.waived.push(w);
            }
        }
        if end == total {
            break;
        }
        start = end - overlap;
    }
    plan.waived.sort();
    Ok((plan, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Pair;
    use crate::validate::validate_reflector_plan;

    #[test]
    fn params_are_validated() {
        let nodes = NodeSet::anonymous(2, 4, 0, 0, 1);
        assert!(RcpdParams::default().validate(&nodes).is_ok());
        let weak = RcpdParams {
            penalty: 36,
            ..RcpdParams::default()
        };
        assert!(weak.validate(&nodes).is_err());
        let short = RcpdParams {
            horizon: 1,
            ..RcpdParams::default()
        };
        assert!(short.validate(&nodes).is_err());
    }

    #[test]
    fn full_horizon_equals_joint_solve() {
        let nodes = NodeSet::anonymous(2, 3, 2, 0, 1);
        let vis = VisibilitySet::full(&nodes, 4, 1);
        let params = RcpdParams {
            horizon: 4,
            ..RcpdParams::default()
        };
        let (plan, report) = plan_horizon(&vis, &nodes, &params).unwrap();
        assert_eq!(report.solves, 1);
        let model = build_model(&vis, &nodes, &params, 0..4, &[]).unwrap();
        let sol = solve(&model, &nodes, &params).unwrap();
        assert_eq!(plan.objective(&nodes), sol.objective);
    }

    #[test]
    fn stitched_plan_covers_every_window() {
        let nodes = NodeSet::anonymous(2, 2, 2, 0, 1);
        let vis = VisibilitySet::full(&nodes, 4, 1);
        let params = RcpdParams {
            horizon: 2,
            gs_links: 1,
            ..RcpdParams::default()
        };
        let (plan, report) = plan_horizon(&vis, &nodes, &params).unwrap();
        assert_eq!(report.solves, 3);
        assert!(validate_reflector_plan(&plan, &vis, &nodes).unwrap().is_empty());
    }

    #[test]
    fn starved_user_is_waived() {
        let nodes = NodeSet::anonymous(2, 2, 1, 0, 1);
        let mut vis = VisibilitySet::full(&nodes, 4, 1);
        for m in 1..3 {
            vis.set_period(m, Pair::of(0, 2), false);
            vis.set_period(m, Pair::of(1, 2), false);
        }
        let (plan, _) = plan_horizon(&vis, &nodes, &RcpdParams::default()).unwrap();
        assert_eq!(plan.waived.len(), 1);
        assert_eq!(plan.waived[0].start, 1);
        assert!(validate_reflector_plan(&plan, &vis, &nodes).unwrap().is_empty());
    }
}
