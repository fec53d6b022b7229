//! Scenario files: TOML with explicit units. Every section is optional and
//! defaults to the reference constellation (satellites at L3, L4, L5 and a
//! DRO, three Chinese ground stations, 30 days of hourly reflector periods).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cpd_core::geometry::{GeometryConfig, OrbitCatalog, PointingSpec, DEFAULT_STEP};
use cpd_core::{BaselineConfig, NodeSet, RcpdParams, TimeGrid, Trajectory, WeightParams};
use cpd_core::types::NodeSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReflectorPlanner {
    Rcpd,
    LaaPmm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhasedPlanner {
    Pcpd,
    Dfcp,
}

impl ReflectorPlanner {
    pub fn as_str(self) -> &'static str {
        match self {
            ReflectorPlanner::Rcpd => "rcpd",
            ReflectorPlanner::LaaPmm => "laa-pmm",
        }
    }
}

impl PhasedPlanner {
    pub fn as_str(self) -> &'static str {
        match self {
            PhasedPlanner::Pcpd => "pcpd",
            PhasedPlanner::Dfcp => "dfcp",
        }
    }
}

impl fmt::Display for ReflectorPlanner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for PhasedPlanner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReflectorPlanner {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rcpd" => Ok(ReflectorPlanner::Rcpd),
            "laa-pmm" => Ok(ReflectorPlanner::LaaPmm),
            _ => Err(format!("unknown reflector planner `{s}` (rcpd, laa-pmm)")),
        }
    }
}

impl FromStr for PhasedPlanner {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pcpd" => Ok(PhasedPlanner::Pcpd),
            "dfcp" => Ok(PhasedPlanner::Dfcp),
            _ => Err(format!("unknown phased-array planner `{s}` (pcpd, dfcp)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    pub reflector: ReflectorPlanner,
    pub phased: PhasedPlanner,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.reflector, self.phased)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub periods: usize,
    pub period_minutes: u64,
    pub superframe_minutes: u64,
    /// Reflector re-pointing time at the start of each period.
    pub switching_minutes: u64,
    pub slot_seconds: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            periods: 720,
            period_minutes: 60,
            superframe_minutes: 5,
            switching_minutes: 10,
            slot_seconds: 10,
        }
    }
}

impl GridSpec {
    pub fn to_grid(&self) -> Result<TimeGrid, CliError> {
        let bad = |field: &str, why: String| CliError::Validation(format!("grid.{field}: {why}"));
        if self.superframe_minutes == 0 {
            return Err(bad("superframe_minutes", "must be positive".into()));
        }
        if !self.period_minutes.is_multiple_of(self.superframe_minutes) {
            return Err(bad(
                "period_minutes",
                format!("{} is not a multiple of superframe_minutes ({})", self.period_minutes, self.superframe_minutes),
            ));
        }
        if !self.switching_minutes.is_multiple_of(self.superframe_minutes) {
            return Err(bad(
                "switching_minutes",
                format!("{} is not a multiple of superframe_minutes ({})", self.switching_minutes, self.superframe_minutes),
            ));
        }
        let grid = TimeGrid {
            period_count: self.periods,
            period_seconds: self.period_minutes * 60,
            superframes_per_period: (self.period_minutes / self.superframe_minutes) as u32,
            switching_superframes: (self.switching_minutes / self.superframe_minutes) as u32,
            slot_seconds: self.slot_seconds,
        };
        grid.validate().map_err(|e| CliError::Validation(format!("grid: {e}")))?;
        Ok(grid)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySpec {
    /// RK4 step in nondimensional time units.
    pub step_tu: f64,
    /// Orbit catalog TOML replacing the built-in one.
    pub catalog: Option<PathBuf>,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec {
            step_tu: DEFAULT_STEP,
            catalog: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitNode {
    pub name: String,
    pub orbit: String,
    /// Offset along the orbit, nondimensional time units.
    #[serde(default)]
    pub phase_tu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundNode {
    pub name: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
}

/// Users are generated round-robin over `families`; the k-th pass over the
/// families advances each orbit by `phase_step` of its period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserSpec {
    pub r_users: usize,
    pub p_users: usize,
    pub families: Vec<String>,
    /// Fraction of an orbit period between successive users of one family.
    pub phase_step: f64,
}

impl Default for UserSpec {
    fn default() -> Self {
        UserSpec {
            r_users: 4,
            p_users: 16,
            families: ["L1", "L2", "L3-user", "L4-user", "L5-user", "DRO", "NRHO", "ELFO"]
                .into_iter()
                .map(String::from)
                .collect(),
            phase_step: 0.382,
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_schemes() -> Vec<Scheme> {
    let mut out = Vec::new();
    for reflector in [ReflectorPlanner::Rcpd, ReflectorPlanner::LaaPmm] {
        for phased in [PhasedPlanner::Pcpd, PhasedPlanner::Dfcp] {
            out.push(Scheme { reflector, phased });
        }
    }
    out
}

fn default_satellites() -> Vec<OrbitNode> {
    ["L3", "L4", "L5", "DRO"]
        .into_iter()
        .map(|o| OrbitNode {
            name: o.to_string(),
            orbit: o.to_string(),
            phase_tu: 0.0,
        })
        .collect()
}

fn default_ground_stations() -> Vec<GroundNode> {
    [("Jiamusi", 46.8, 130.3), ("Kashi", 39.47, 75.99), ("Sanya", 18.23, 109.02)]
        .into_iter()
        .map(|(name, lat_deg, lon_deg)| GroundNode {
            name: name.to_string(),
            lat_deg,
            lon_deg,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub pointing: PointingSpec,
    #[serde(default)]
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub rcpd: RcpdParams,
    #[serde(default)]
    pub weights: WeightParams,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_satellites")]
    pub satellites: Vec<OrbitNode>,
    #[serde(default = "default_ground_stations")]
    pub ground_stations: Vec<GroundNode>,
    #[serde(default)]
    pub users: UserSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        toml::from_str("").expect("empty scenario uses defaults")
    }
}

/// Environment variable overriding `rcpd.time_limit` (seconds).
pub const TIME_LIMIT_ENV: &str = "CPD_TIME_LIMIT";

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut s = Scenario::from_toml(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let Some(rel) = &s.geometry.catalog {
            if rel.is_relative() {
                if let Some(dir) = path.parent() {
                    s.geometry.catalog = Some(dir.join(rel));
                }
            }
        }
        Ok(s)
    }

    /// Applies the time-limit environment override, if set.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(v) = std::env::var(TIME_LIMIT_ENV) {
            let t: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("{TIME_LIMIT_ENV}=`{v}` is not a number of seconds")))?;
            self.rcpd.time_limit = Some(t);
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        self.grid.to_grid()
    }

    pub fn geometry_config(&self) -> GeometryConfig {
        GeometryConfig {
            pointing: self.pointing,
            step: self.geometry.step_tu,
        }
    }

    pub fn catalog(&self) -> Result<OrbitCatalog, CliError> {
        match &self.geometry.catalog {
            None => Ok(OrbitCatalog::builtin()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                OrbitCatalog::from_toml(&text, cpd_core::geometry::cr3bp::earth_moon_mu())
                    .map_err(|e| CliError::Parse(format!("geometry.catalog {}: {e}", path.display())))
            }
        }
    }

    fn user_specs(&self, prefix: &str, count: usize, offset: f64, catalog: &OrbitCatalog) -> Result<Vec<NodeSpec>, CliError> {
        let fams = &self.users.families;
        if count > 0 && fams.is_empty() {
            return Err(CliError::Validation("users.families must not be empty".into()));
        }
        (0..count)
            .map(|k| {
                let family = &fams[k % fams.len()];
                let (_, period) = catalog
                    .initial_state(family)
                    .map_err(|e| CliError::Validation(format!("users.families: {e}")))?;
                // libration points and ELFO have no catalog period; use the
                // synodic month (2 pi time units)
                let period = period.unwrap_or(std::f64::consts::TAU);
                let pass = (k / fams.len()) as f64 + offset;
                let phase = (pass * self.users.phase_step).fract() * period;
                Ok(NodeSpec::new(
                    format!("{prefix}{k}-{family}"),
                    Some(Trajectory::Orbit {
                        orbit: family.clone(),
                        phase,
                    }),
                ))
            })
            .collect()
    }

    /// The scenario's nodes: satellites, R-users, P-users, ground stations.
    pub fn nodes(&self, catalog: &OrbitCatalog) -> Result<NodeSet, CliError> {
        if self.satellites.is_empty() {
            return Err(CliError::Validation("satellites: at least one satellite is required".into()));
        }
        if !(self.users.phase_step >= 0.0 && self.users.phase_step.is_finite()) {
            return Err(CliError::Validation(format!(
                "users.phase_step: {} must be a non-negative fraction",
                self.users.phase_step
            )));
        }
        let mut sats = Vec::new();
        for s in &self.satellites {
            if catalog.get(&s.orbit).is_none() {
                return Err(CliError::Validation(format!(
                    "satellites.{}: orbit `{}` is not in the catalog",
                    s.name, s.orbit
                )));
            }
            sats.push(NodeSpec::new(
                s.name.clone(),
                Some(Trajectory::Orbit {
                    orbit: s.orbit.clone(),
                    phase: s.phase_tu,
                }),
            ));
        }
        let r = self.user_specs("RU", self.users.r_users, 0.0, catalog)?;
        let p = self.user_specs("PU", self.users.p_users, 0.5, catalog)?;
        let g = self
            .ground_stations
            .iter()
            .map(|g| {
                if !(-90.0..=90.0).contains(&g.lat_deg) {
                    return Err(CliError::Validation(format!(
                        "ground_stations.{}.lat_deg: {} outside [-90, 90]",
                        g.name, g.lat_deg
                    )));
                }
                Ok(NodeSpec::new(
                    g.name.clone(),
                    Some(Trajectory::Ground {
                        lat_deg: g.lat_deg,
                        lon_deg: g.lon_deg,
                    }),
                ))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let nodes = NodeSet::new(self.rcpd.terminals, sats, r, p, g);
        let mut names = std::collections::BTreeSet::new();
        for n in nodes.iter() {
            if !names.insert(n.name.as_str()) {
                return Err(CliError::Validation(format!("node name `{}` is used twice", n.name)));
            }
        }
        Ok(nodes)
    }

    /// Cross-field checks that do not need geometry.
    pub fn validate(&self, nodes: &NodeSet) -> Result<(), CliError> {
        self.grid()?;
        self.pointing
            .validate()
            .map_err(|e| CliError::Validation(format!("pointing: {e}")))?;
        if !(self.geometry.step_tu > 0.0 && self.geometry.step_tu.is_finite()) {
            return Err(CliError::Validation(format!(
                "geometry.step_tu: {} must be positive",
                self.geometry.step_tu
            )));
        }
        self.rcpd
            .validate(nodes)
            .map_err(|e| CliError::Validation(format!("rcpd: {e}")))?;
        self.weights
            .validate(nodes)
            .map_err(|e| CliError::Validation(format!("weights: {e}")))?;
        self.baseline
            .validate()
            .map_err(|e| CliError::Validation(format!("baseline: {e}")))?;
        if self.schemes.is_empty() {
            return Err(CliError::Validation("schemes: at least one scheme is required".into()));
        }
        Ok(())
    }
}
