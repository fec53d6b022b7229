//! Orbits to visibility: CR3BP propagation, rotating ground sites, line of
//! sight and pointing cones. Scenario files can skip all of this and hand
//! in a visibility trace instead.

pub mod catalog;
pub mod cr3bp;
pub mod trace;
pub mod visibility;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

pub use catalog::{OrbitCatalog, OrbitEntry, OrbitSampler};
pub use cr3bp::{propagate, Cr3bpState, LibrationPoint};
pub use trace::{Terminal, TraceInterval, VisibilityTrace};
pub use visibility::{compute_trace, compute_visibility, GeometryConfig};

pub const R_EARTH_KM: f64 = 6371.0;
pub const R_MOON_KM: f64 = 1737.4;
/// Sidereal rotation rate of the Earth, rad/s.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;

/// Default RK4 step, nondimensional time units.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Pointing half-cones, degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointingSpec {
    pub rl_half_cone_deg: f64,
    pub pl_half_cone_deg: f64,
    /// Measured from the local zenith; the elevation mask is its complement.
    pub gs_half_cone_deg: f64,
}

impl Default for PointingSpec {
    fn default() -> Self {
        PointingSpec {
            rl_half_cone_deg: 75.0,
            pl_half_cone_deg: 75.0,
            gs_half_cone_deg: 85.0,
        }
    }
}

impl PointingSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        for (field, value) in [
            ("rl_half_cone_deg", self.rl_half_cone_deg),
            ("pl_half_cone_deg", self.pl_half_cone_deg),
            ("gs_half_cone_deg", self.gs_half_cone_deg),
        ] {
            if !(value > 0.0 && value <= 90.0) {
                return Err(GeometryError::Pointing { field, value });
            }
        }
        Ok(())
    }
}
