//! Orbit catalog: named initial conditions in the rotating frame.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::cr3bp::{self, LibrationPoint};
use crate::error::GeometryError;

const DEFAULT_CATALOG: &str = include_str!("../../data/default_catalog.toml");

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct OrbitEntry {
    pub name: String,
    pub family: String,
    /// Equilibrium the entry is parked at (libration family only).
    #[serde(default)]
    pub point: Option<String>,
    /// Out-of-plane offset added to the equilibrium, length units.
    #[serde(default)]
    pub z_offset: Option<f64>,
    #[serde(default)]
    pub state: Option<[f64; 6]>,
    /// Present for periodic orbits; sampling then wraps modulo the period.
    #[serde(default)]
    pub period: Option<f64>,
}

#[derive(Deserialize)]
struct CatalogFile {
    orbits: Vec<OrbitEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCatalog {
    mu: f64,
    orbits: BTreeMap<String, OrbitEntry>,
}

impl OrbitCatalog {
    /// The built-in catalog: equilibria L3-L5, a DRO, planar Lyapunov orbits
    /// about L1 and L2, a southern L2 NRHO and an elliptical lunar orbit.
    pub fn builtin() -> Self {
        Self::from_toml(DEFAULT_CATALOG, cr3bp::earth_moon_mu()).expect("builtin catalog parses")
    }

    pub fn from_toml(text: &str, mu: f64) -> Result<Self, GeometryError> {
        let file: CatalogFile =
            toml::from_str(text).map_err(|e| GeometryError::Catalog(e.to_string()))?;
        let mut orbits = BTreeMap::new();
        for entry in file.orbits {
            match (&entry.point, &entry.state) {
                (Some(p), None) => {
                    p.parse::<LibrationPoint>()?;
                }
                (None, Some(s)) => {
                    if !s.iter().all(|c| c.is_finite()) {
                        return Err(GeometryError::Catalog(format!(
                            "orbit `{}` has a non-finite state",
                            entry.name
                        )));
                    }
                }
                _ => {
                    return Err(GeometryError::Catalog(format!(
                        "orbit `{}` needs exactly one of `point` or `state`",
                        entry.name
                    )))
                }
            }
            if let Some(period) = entry.period {
                if !(period > 0.0 && period.is_finite()) {
                    return Err(GeometryError::Catalog(format!(
                        "orbit `{}` has period {period}",
                        entry.name
                    )));
                }
            }
            if orbits.insert(entry.name.clone(), entry.clone()).is_some() {
                return Err(GeometryError::Catalog(format!("orbit `{}` listed twice", entry.name)));
            }
        }
        Ok(OrbitCatalog { mu, orbits })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn get(&self, name: &str) -> Option<&OrbitEntry> {
        self.orbits.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.orbits.keys().map(String::as_str)
    }

    /// Initial rotating-frame state of an orbit and its period, if periodic.
    pub fn initial_state(&self, name: &str) -> Result<([f64; 6], Option<f64>), GeometryError> {
        let entry = self
            .get(name)
            .ok_or_else(|| GeometryError::UnknownOrbit(name.to_string()))?;
        let state = match (&entry.point, entry.state) {
            (Some(p), _) => {
                let pos = cr3bp::libration_point(self.mu, p.parse()?);
                let dz = entry.z_offset.unwrap_or(0.0);
                [pos[0], pos[1], pos[2] + dz, 0.0, 0.0, 0.0]
            }
            (None, Some(s)) => s,
            (None, None) => unreachable!("checked at load"),
        };
        Ok((state, entry.period))
    }

    /// Sampler for an orbit, offset by `phase` time units along it.
    pub fn sampler(&self, name: &str, phase: f64, step: f64) -> Result<OrbitSampler, GeometryError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(GeometryError::Step(step));
        }
        if !(phase >= 0.0 && phase.is_finite()) {
            return Err(GeometryError::Duration(phase));
        }
        let (initial, period) = self.initial_state(name)?;
        let mut s = OrbitSampler {
            mu: self.mu,
            step,
            phase,
            period,
            initial,
            state: initial,
            tau: 0.0,
            last: 0.0,
        };
        // settle at t = 0
        s.position_at(0.0)?;
        Ok(s)
    }
}

/// Positions along one orbit at non-decreasing times. Periodic orbits are
/// re-entered from the initial condition every revolution, so unstable
/// families never accumulate integration error beyond one period.
#[derive(Clone, Debug)]
pub struct OrbitSampler {
    mu: f64,
    step: f64,
    phase: f64,
    period: Option<f64>,
    initial: [f64; 6],
    state: [f64; 6],
    /// Orbit time of `state`.
    tau: f64,
    last: f64,
}

impl OrbitSampler {
    /// Position at scenario time `t` (time units). Times must not decrease
    /// between calls.
    pub fn position_at(&mut self, t: f64) -> Result<[f64; 3], GeometryError> {
        assert!(t >= self.last, "sampler times must be non-decreasing");
        self.last = t;
        let mut target = t + self.phase;
        if let Some(period) = self.period {
            let revs = (target / period).floor();
            let local = target - revs * period;
            let current_rev = (self.tau / period).floor();
            if revs > current_rev {
                self.state = self.initial;
                self.tau = revs * period;
            }
            target = revs * period + local;
        }
        let dt = target - self.tau;
        if dt > 0.0 {
            self.state = cr3bp::advance(self.mu, &self.state, self.tau, dt, self.step)?;
            self.tau = target;
        }
        Ok([self.state[0], self.state[1], self.state[2]])
    }
}
