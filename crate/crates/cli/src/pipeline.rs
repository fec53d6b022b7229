//! Geometry -> reflector planner -> phased-array planner -> metrics.

use std::collections::BTreeMap;

use cpd_core::geometry::compute_trace;
use cpd_core::{
    dfcp_plan, evaluate, laa_pmm_plan, plan_horizon, plan_phased_array, validate_phased_array_plan,
    validate_reflector_plan, HorizonReport, MetricReport, NodeSet, PhasedArrayPlan, ReflectorPlan,
    TimeGrid, Violation, VisibilitySet, VisibilityTrace,
};

use crate::error::CliError;
use crate::scenario::{PhasedPlanner, ReflectorPlanner, Scenario, Scheme};

/// A scenario with its nodes and visibility resolved.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub scenario: Scenario,
    pub grid: TimeGrid,
    pub nodes: NodeSet,
    pub trace: VisibilityTrace,
    pub vis: VisibilitySet,
}

/// Resolves nodes and visibility. With `trace` the geometry is skipped and
/// the trace (restricted to the scenario's nodes) is used instead.
pub fn prepare(scenario: &Scenario, trace: Option<&VisibilityTrace>) -> Result<Prepared, CliError> {
    let catalog = scenario.catalog()?;
    let nodes = scenario.nodes(&catalog)?;
    scenario.validate(&nodes)?;
    let grid = scenario.grid()?;
    let trace = match trace {
        Some(t) => t.restricted_to(&nodes),
        None => compute_trace(&nodes, &catalog, &grid, &scenario.geometry_config())?,
    };
    let vis = trace.to_visibility(&nodes, &grid)?;
    Ok(Prepared {
        scenario: scenario.clone(),
        grid,
        nodes,
        trace,
        vis,
    })
}

#[derive(Clone, Debug)]
pub struct ReflectorOutcome {
    pub plan: ReflectorPlan,
    /// Solver statistics (R-CPD only).
    pub report: Option<HorizonReport>,
    /// Link-program constraints the planner does not enforce and broke
    /// (LAA-PMM only; always empty for R-CPD).
    pub unenforced: Vec<Violation>,
}

pub fn plan_reflector(p: &Prepared, planner: ReflectorPlanner) -> Result<ReflectorOutcome, CliError> {
    let params = &p.scenario.rcpd;
    let (plan, report) = match planner {
        ReflectorPlanner::Rcpd => {
            let (plan, report) = plan_horizon(&p.vis, &p.nodes, params)?;
            (plan, Some(report))
        }
        ReflectorPlanner::LaaPmm => (laa_pmm_plan(&p.vis, &p.nodes, &params.plan_params())?, None),
    };
    let violations = validate_reflector_plan(&plan, &p.vis, &p.nodes)?;
    let (structural, unenforced): (Vec<_>, Vec<_>) = violations.into_iter().partition(|v| {
        planner == ReflectorPlanner::Rcpd || v.is_structural()
    });
    if let Some(v) = structural.first() {
        return Err(CliError::Validation(format!(
            "{planner} plan violates `{}` ({} violations), first: {v}",
            v.constraint(),
            structural.len()
        )));
    }
    Ok(ReflectorOutcome {
        plan,
        report,
        unenforced,
    })
}

pub fn plan_phased(p: &Prepared, rplan: &ReflectorPlan, planner: PhasedPlanner) -> Result<PhasedArrayPlan, CliError> {
    let s = &p.scenario;
    let plan = match planner {
        PhasedPlanner::Pcpd => plan_phased_array(&p.vis, &p.nodes, &p.grid, rplan, &s.weights, s.seed)?,
        PhasedPlanner::Dfcp => dfcp_plan(&p.vis, &p.nodes, &p.grid, &s.weights, &s.baseline)?,
    };
    check_phased(p, &plan, planner)?;
    Ok(plan)
}

pub fn check_phased(p: &Prepared, plan: &PhasedArrayPlan, planner: PhasedPlanner) -> Result<(), CliError> {
    let violations = validate_phased_array_plan(plan, &p.vis, &p.nodes, &p.grid);
    match violations.first() {
        None => Ok(()),
        Some(v) => Err(CliError::Validation(format!(
            "{planner} plan has {} matching violations, first: {v}",
            violations.len()
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct SchemeResult {
    pub scheme: Scheme,
    pub plan: PhasedArrayPlan,
    pub report: MetricReport,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub reflector: BTreeMap<ReflectorPlanner, ReflectorOutcome>,
    pub schemes: Vec<SchemeResult>,
}

/// Runs every scheme of the scenario. Each reflector planner runs once and
/// is shared by the schemes that use it.
pub fn run(p: &Prepared) -> Result<RunOutput, CliError> {
    let mut reflector = BTreeMap::new();
    for s in &p.scenario.schemes {
        if let std::collections::btree_map::Entry::Vacant(e) = reflector.entry(s.reflector) {
            e.insert(plan_reflector(p, s.reflector)?);
        }
    }
    let mut schemes = Vec::new();
    for &scheme in &p.scenario.schemes {
        let rplan = &reflector[&scheme.reflector].plan;
        let plan = plan_phased(p, rplan, scheme.phased)?;
        let report = evaluate(rplan, &plan, &p.grid, &p.nodes)?;
        schemes.push(SchemeResult { scheme, plan, report });
    }
    Ok(RunOutput { reflector, schemes })
}
