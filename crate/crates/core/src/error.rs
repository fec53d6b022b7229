use thiserror::Error;

use crate::types::{AccessWindow, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("time grid field `{field}` must be positive")]
    NonPositive { field: &'static str },
    #[error("switching superframes ({switching}) must be fewer than superframes per period ({total})")]
    SwitchingTooLong { switching: u32, total: u32 },
    #[error("`{what}` ({len} s) is not a whole multiple of `{unit}` ({unit_len} s)")]
    NotDivisible {
        what: &'static str,
        len: u64,
        unit: &'static str,
        unit_len: u64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("mass ratio {0} outside (0, 0.5)")]
    MassRatio(f64),
    #[error("integration step must be positive and finite, got {0}")]
    Step(f64),
    #[error("propagation duration must be non-negative and finite, got {0}")]
    Duration(f64),
    #[error("state became non-finite at t = {epoch} (passed too close to a primary?)")]
    NonFinite { epoch: f64 },
    #[error("node `{0}` has no trajectory")]
    MissingTrajectory(String),
    #[error("orbit `{0}` is not in the catalog")]
    UnknownOrbit(String),
    #[error("pointing half-cone `{field}` = {value} deg outside (0, 90]")]
    Pointing { field: &'static str, value: f64 },
    #[error("orbit catalog: {0}")]
    Catalog(String),
    #[error("visibility trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RcpdError {
    #[error("invalid R-CPD parameter: {0}")]
    Params(String),
    #[error("R-user {user} sees no satellite throughout access window starting at period {start}", user = .window.user, start = .window.start)]
    StarvedWindow { window: AccessWindow },
    #[error("access constraints cannot all be met; violated windows: {}", fmt_windows(.windows))]
    Infeasible { windows: Vec<AccessWindow> },
    #[error("visibility covers {visibility} periods but the plan needs {needed}")]
    Dimension { visibility: usize, needed: usize },
}

fn fmt_windows(windows: &[AccessWindow]) -> String {
    windows
        .iter()
        .map(|w| format!("(user {}, periods {}..{})", w.user, w.start, w.start + w.len))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// Errors of the phased-array planners and of the metrics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid parameter: {0}")]
    Params(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
