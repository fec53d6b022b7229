//! Parameter grids over |U_P|, |U_R| and L_G.

use std::path::Path;

use cpd_core::geometry::compute_trace;
use cpd_core::VisibilityTrace;
use rayon::prelude::*;

use crate::error::CliError;
use crate::export;
use crate::pipeline::{self, Prepared, RunOutput};
use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepAxes {
    pub p_users: Vec<usize>,
    pub r_users: Vec<usize>,
    pub gs_links: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell {
    pub p_users: usize,
    pub r_users: usize,
    pub gs_links: u32,
}

impl Cell {
    pub fn dir_name(&self) -> String {
        format!("up{}_ur{}_lg{}", self.p_users, self.r_users, self.gs_links)
    }

    pub fn apply(&self, base: &Scenario) -> Scenario {
        let mut s = base.clone();
        s.users.p_users = self.p_users;
        s.users.r_users = self.r_users;
        s.rcpd.gs_links = self.gs_links;
        s
    }
}

impl SweepAxes {
    /// Axes left empty take the scenario's own value.
    pub fn cells(&self, base: &Scenario) -> Vec<Cell> {
        let or = |v: &Vec<usize>, d: usize| if v.is_empty() { vec![d] } else { v.clone() };
        let gs = if self.gs_links.is_empty() {
            vec![base.rcpd.gs_links]
        } else {
            self.gs_links.clone()
        };
        let mut out = Vec::new();
        for &p_users in &or(&self.p_users, base.users.p_users) {
            for &r_users in &or(&self.r_users, base.users.r_users) {
                for &gs_links in &gs {
                    out.push(Cell {
                        p_users,
                        r_users,
                        gs_links,
                    });
                }
            }
        }
        out
    }
}

pub const SWEEP_HEADER: &str = "p_users,r_users,gs_links,reflector,phased,metric,value";

/// Geometry for the largest population of the sweep; every cell's users
/// are a prefix of it, so each cell restricts this one trace.
pub fn sweep_trace(base: &Scenario, cells: &[Cell]) -> Result<VisibilityTrace, CliError> {
    let mut widest = base.clone();
    widest.users.p_users = cells.iter().map(|c| c.p_users).max().unwrap_or(0);
    widest.users.r_users = cells.iter().map(|c| c.r_users).max().unwrap_or(0);
    let catalog = widest.catalog()?;
    let nodes = widest.nodes(&catalog)?;
    Ok(compute_trace(&nodes, &catalog, &widest.grid()?, &widest.geometry_config())?)
}

/// Runs one cell; plans and the cell report go to `out/<cell>/` when `out`
/// is given.
pub fn run_cell(base: &Scenario, cell: Cell, trace: &VisibilityTrace, out: Option<&Path>) -> Result<(Prepared, RunOutput), CliError> {
    let scenario = cell.apply(base);
    let prepared = pipeline::prepare(&scenario, Some(trace))?;
    let output = pipeline::run(&prepared)?;
    if let Some(dir) = out {
        let name = if base.name.is_empty() { "scenario" } else { &base.name };
        export::write_run(&dir.join(cell.dir_name()), name, &output, &prepared.nodes)?;
    }
    Ok((prepared, output))
}

/// Runs every cell (in parallel) and returns the combined report lines in
/// cell order. With `out`, also writes each cell's plans and
/// `sweep_report.csv`.
pub fn run_sweep(
    base: &Scenario,
    axes: &SweepAxes,
    trace: Option<&VisibilityTrace>,
    out: Option<&Path>,
) -> Result<Vec<String>, CliError> {
    run_sweep_with(base, axes, trace, out, |_, _, _| ()).map(|(lines, _)| lines)
}

/// [`run_sweep`] that also hands every cell's plans to `inspect` before
/// they are dropped, returning its results in cell order.
pub fn run_sweep_with<R, F>(
    base: &Scenario,
    axes: &SweepAxes,
    trace: Option<&VisibilityTrace>,
    out: Option<&Path>,
    inspect: F,
) -> Result<(Vec<String>, Vec<R>), CliError>
where
    R: Send,
    F: Fn(Cell, &Prepared, &RunOutput) -> R + Sync,
{
    let cells = axes.cells(base);
    let computed;
    let trace = match trace {
        Some(t) => t,
        None => {
            computed = sweep_trace(base, &cells)?;
            &computed
        }
    };
    let per_cell: Vec<Result<(Vec<String>, R), CliError>> = cells
        .par_iter()
        .map(|&cell| {
            let (prepared, output) = run_cell(base, cell, trace, out)?;
            let key = format!("{},{},{},", cell.p_users, cell.r_users, cell.gs_links);
            let lines = export::report_lines(&key, &output, &prepared.nodes);
            Ok((lines, inspect(cell, &prepared, &output)))
        })
        .collect();
    let mut lines = Vec::new();
    let mut inspected = Vec::new();
    for r in per_cell {
        let (l, x) = r?;
        lines.extend(l);
        inspected.push(x);
    }
    if let Some(dir) = out {
        export::write_lines(&dir.join("sweep_report.csv"), SWEEP_HEADER, &lines)?;
    }
    Ok((lines, inspected))
}
