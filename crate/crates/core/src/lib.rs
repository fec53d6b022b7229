//! Contact plan design for cislunar networks whose satellites carry slow,
//! mechanically steered reflector terminals and one fast phased-array
//! terminal.
//!
//! The crate is organised around the planning pipeline:
//!
//! * [`geometry`] turns orbits and ground sites into a [`VisibilitySet`].
//! * [`rcpd`] plans the reflector topology with an exact branch-and-bound
//!   solver over the link integer program.
//! * [`partition`] splits satellites into grounded and ungrounded groups for
//!   a reflector topology.
//! * [`pcpd`] schedules phased-array links slot by slot with maximum weight
//!   matching ([`matching`]).
//! * [`baselines`] holds the reference planners used for comparison.
//! * [`eval`] measures to-ground delays, ranging and link usage.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod matching;
pub mod partition;
pub mod pcpd;
pub mod rcpd;
pub mod types;
pub mod validate;

pub use baselines::{dfcp_plan, laa_pmm_plan, BaselineConfig};
pub use error::{GeometryError, GridError, PlanError, RcpdError, ValidationError};
pub use eval::{evaluate, DelayStats, MetricReport};
pub use geometry::{
    compute_trace, compute_visibility, GeometryConfig, OrbitCatalog, PointingSpec, VisibilityTrace,
};
pub use matching::{max_weight_matching, WeightedEdge};
pub use partition::{partition_topology, representative_seed, TopologyPartition};
pub use pcpd::{plan_phased_array, DiversityRule, TendencyState, WeightParams};
pub use rcpd::{plan_horizon, AccessMode, HorizonReport, RcpdParams};
pub use types::{
    AccessWindow, LinkSet, Node, NodeId, NodeKind, NodeSet, Pair, PhasedArrayPlan,
    ReflectorPlan, ReflectorPlanParams, SuperframePlan, TerminalCount, TimeGrid, Trajectory,
    VisibilitySet,
};
pub use validate::{
    validate_matching, validate_phased_array_plan, validate_reflector_plan, MatchingViolation,
    Violation,
};
