//! Line-of-sight and pointing checks sampled at slot midpoints.

use rayon::prelude::*;

use super::catalog::{OrbitCatalog, OrbitSampler};
use super::cr3bp::{self, LENGTH_UNIT_KM};
use super::trace::{Terminal, TraceInterval, VisibilityTrace};
use super::{PointingSpec, DEFAULT_STEP, EARTH_ROTATION_RAD_S, R_EARTH_KM, R_MOON_KM};
use crate::error::GeometryError;
use crate::types::{all_pairs, NodeKind, NodeSet, Pair, TimeGrid, Trajectory, VisibilitySet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryConfig {
    pub pointing: PointingSpec,
    /// RK4 step, nondimensional time.
    pub step: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            pointing: PointingSpec::default(),
            step: DEFAULT_STEP,
        }
    }
}

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

/// Whether the segment a-b passes through the sphere (c, r).
pub fn segment_hits_sphere(a: V3, b: V3, c: V3, r: f64) -> bool {
    let d = sub(b, a);
    let len2 = dot(d, d);
    let s = if len2 == 0.0 {
        0.0
    } else {
        (dot(sub(c, a), d) / len2).clamp(0.0, 1.0)
    };
    let closest = [a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]];
    norm(sub(closest, c)) < r
}

/// Sample of one node at one instant.
#[derive(Clone, Copy, Debug)]
struct Sample {
    pos: V3,
    /// Unit boresight: towards the Earth centre for space nodes, local
    /// zenith for ground stations.
    axis: V3,
}

enum Track {
    Orbit(OrbitSampler),
    Ground { lat: f64, lon: f64 },
}

struct Frame {
    mu: f64,
    earth: V3,
    moon: V3,
    r_earth: f64,
    r_moon: f64,
    /// Ground-site spin relative to the rotating frame, rad per second.
    spin: f64,
    tu: f64,
}

impl Frame {
    fn new(mu: f64) -> Self {
        let tu = cr3bp::time_unit_seconds();
        Frame {
            mu,
            earth: [-mu, 0.0, 0.0],
            moon: [1.0 - mu, 0.0, 0.0],
            r_earth: R_EARTH_KM / LENGTH_UNIT_KM,
            r_moon: R_MOON_KM / LENGTH_UNIT_KM,
            spin: EARTH_ROTATION_RAD_S - 1.0 / tu,
            tu,
        }
    }

    fn sample(&self, track: &mut Track, seconds: f64) -> Result<Sample, GeometryError> {
        match track {
            Track::Orbit(s) => {
                let pos = s.position_at(seconds / self.tu)?;
                let to_earth = sub(self.earth, pos);
                let n = norm(to_earth);
                Ok(Sample {
                    pos,
                    axis: [to_earth[0] / n, to_earth[1] / n, to_earth[2] / n],
                })
            }
            Track::Ground { lat, lon } => {
                // Greenwich on +x at the epoch
                let theta = *lon + self.spin * seconds;
                let zenith = [lat.cos() * theta.cos(), lat.cos() * theta.sin(), lat.sin()];
                let pos = [
                    -self.mu + self.r_earth * zenith[0],
                    self.r_earth * zenith[1],
                    self.r_earth * zenith[2],
                ];
                Ok(Sample { pos, axis: zenith })
            }
        }
    }
}

fn within(axis: V3, from: V3, to: V3, cos_cone: f64) -> bool {
    let d = sub(to, from);
    dot(axis, d) >= cos_cone * norm(d)
}

struct PairCheck {
    pair: Pair,
    rl: bool,
    pl: bool,
    ground: bool,
}

struct Cones {
    rl: f64,
    pl: f64,
    gs: f64,
}

fn check(frame: &Frame, c: &PairCheck, cones: &Cones, a: &Sample, b: &Sample) -> (bool, bool) {
    if !c.ground && segment_hits_sphere(a.pos, b.pos, frame.earth, frame.r_earth) {
        return (false, false);
    }
    if segment_hits_sphere(a.pos, b.pos, frame.moon, frame.r_moon) {
        return (false, false);
    }
    if c.ground {
        // lo is the satellite, hi the ground station
        let ok = within(b.axis, b.pos, a.pos, cones.gs) && within(a.axis, a.pos, b.pos, cones.rl);
        return (ok && c.rl, false);
    }
    let rl = c.rl && within(a.axis, a.pos, b.pos, cones.rl) && within(b.axis, b.pos, a.pos, cones.rl);
    let pl = c.pl && within(a.axis, a.pos, b.pos, cones.pl) && within(b.axis, b.pos, a.pos, cones.pl);
    (rl, pl)
}

/// Samples every capable pair at each slot midpoint and returns the
/// maximal runs of visibility as a trace, ordered by pair index then start.
pub fn compute_trace(
    nodes: &NodeSet,
    catalog: &OrbitCatalog,
    grid: &TimeGrid,
    config: &GeometryConfig,
) -> Result<VisibilityTrace, GeometryError> {
    grid.validate()?;
    config.pointing.validate()?;
    if !(config.step > 0.0 && config.step.is_finite()) {
        return Err(GeometryError::Step(config.step));
    }
    let mut tracks = Vec::with_capacity(nodes.len());
    for node in nodes.iter() {
        let track = match &node.trajectory {
            None => return Err(GeometryError::MissingTrajectory(node.name.clone())),
            Some(Trajectory::Orbit { orbit, phase }) => {
                Track::Orbit(catalog.sampler(orbit, *phase, config.step)?)
            }
            Some(Trajectory::Ground { lat_deg, lon_deg }) => Track::Ground {
                lat: lat_deg.to_radians(),
                lon: lon_deg.to_radians(),
            },
        };
        tracks.push(track);
    }

    let frame = Frame::new(catalog.mu());
    let cones = Cones {
        rl: config.pointing.rl_half_cone_deg.to_radians().cos(),
        pl: config.pointing.pl_half_cone_deg.to_radians().cos(),
        gs: config.pointing.gs_half_cone_deg.to_radians().cos(),
    };
    let checks: Vec<PairCheck> = all_pairs(nodes.len())
        .filter_map(|pair| {
            let rl = nodes.reflector_capable(pair);
            let pl = nodes.phased_array_capable(pair);
            (rl || pl).then(|| PairCheck {
                pair,
                rl,
                pl,
                ground: nodes.kind(pair.hi()) == NodeKind::GroundStation,
            })
        })
        .collect();

    let spp = grid.slots_per_period();
    let mut open: Vec<Option<(Terminal, usize)>> = vec![None; checks.len()];
    let mut runs: Vec<Vec<(Terminal, usize, usize)>> = vec![Vec::new(); checks.len()];
    for m in 0..grid.period_count {
        let slots = grid.period_slots(m);
        let samples: Vec<Vec<Sample>> = tracks
            .par_iter_mut()
            .map(|track| {
                slots
                    .clone()
                    .map(|s| frame.sample(track, grid.slot_midpoint_seconds(s)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let states: Vec<Vec<Option<Terminal>>> = checks
            .par_iter()
            .map(|c| {
                let (a, b) = (&samples[c.pair.lo().0], &samples[c.pair.hi().0]);
                (0..spp)
                    .map(|k| {
                        let (rl, pl) = check(&frame, c, &cones, &a[k], &b[k]);
                        Terminal::from_flags(rl, pl)
                    })
                    .collect()
            })
            .collect();
        for (idx, row) in states.iter().enumerate() {
            for (k, &state) in row.iter().enumerate() {
                let slot = slots.start + k;
                let current = open[idx].map(|(t, _)| t);
                if current != state {
                    if let Some((t, start)) = open[idx].take() {
                        runs[idx].push((t, start, slot));
                    }
                    open[idx] = state.map(|t| (t, slot));
                }
            }
        }
    }
    let end = grid.total_slots();
    let mut intervals = Vec::new();
    for (idx, c) in checks.iter().enumerate() {
        if let Some((t, start)) = open[idx].take() {
            runs[idx].push((t, start, end));
        }
        for &(terminal, start_slot, end_slot) in &runs[idx] {
            intervals.push(TraceInterval {
                node_i: nodes.get(c.pair.lo()).name.clone(),
                node_j: nodes.get(c.pair.hi()).name.clone(),
                start_slot,
                end_slot,
                terminal,
            });
        }
    }
    Ok(VisibilityTrace { intervals })
}

/// Geometry to visibility: [`compute_trace`] lifted to period and
/// superframe resolution.
pub fn compute_visibility(
    nodes: &NodeSet,
    catalog: &OrbitCatalog,
    grid: &TimeGrid,
    config: &GeometryConfig,
) -> Result<VisibilitySet, GeometryError> {
    compute_trace(nodes, catalog, grid, config)?.to_visibility(nodes, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{NodeId, NodeSpec};

    #[test]
    fn sphere_between_endpoints_blocks() {
        let c = [0.0, 0.0, 0.0];
        assert!(segment_hits_sphere([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], c, 0.1));
        assert!(!segment_hits_sphere([-1.0, 0.2, 0.0], [1.0, 0.2, 0.0], c, 0.1));
        // sphere beyond the segment end
        assert!(!segment_hits_sphere([-1.0, 0.0, 0.0], [-0.5, 0.0, 0.0], c, 0.1));
    }

    fn grid(periods: usize) -> TimeGrid {
        TimeGrid::with_periods(periods)
    }

    fn orbit(name: &str) -> Option<Trajectory> {
        Some(Trajectory::Orbit {
            orbit: name.into(),
            phase: 0.0,
        })
    }

    #[test]
    fn moon_between_satellites_blocks() {
        let mu = cr3bp::earth_moon_mu();
        let frame = Frame::new(mu);
        // cones wide open so only occlusion decides
        let cones = Cones { rl: -1.0, pl: -1.0, gs: -1.0 };
        let c = PairCheck { pair: Pair::of(0, 1), rl: true, pl: true, ground: false };
        let at = |x: f64, y: f64| Sample { pos: [x, y, 0.0], axis: [-1.0, 0.0, 0.0] };
        let l1 = cr3bp::libration_point(mu, cr3bp::LibrationPoint::L1)[0];
        let l2 = cr3bp::libration_point(mu, cr3bp::LibrationPoint::L2)[0];
        assert_eq!(check(&frame, &c, &cones, &at(l1, 0.0), &at(l2, 0.0)), (false, false));
        assert_eq!(check(&frame, &c, &cones, &at(l1, 0.1), &at(l2, 0.1)), (true, true));
        // Earth between L3 and the Moon side
        assert_eq!(check(&frame, &c, &cones, &at(-1.0, 0.0), &at(l1, 0.0)), (false, false));
    }

    #[test]
    fn zenith_pass_is_visible() {
        // A satellite parked at L3 sits on the -x axis, and a site on the
        // equator at longitude 180 deg faces it at the epoch.
        let nodes = NodeSet::new(
            2,
            vec![NodeSpec::new("S", orbit("L3"))],
            vec![],
            vec![],
            vec![NodeSpec::new(
                "G",
                Some(Trajectory::Ground {
                    lat_deg: 0.0,
                    lon_deg: 180.0,
                }),
            )],
        );
        let g = TimeGrid {
            period_count: 1,
            period_seconds: 60,
            superframes_per_period: 1,
            switching_superframes: 0,
            slot_seconds: 10,
        };
        let vis =
            compute_visibility(&nodes, &OrbitCatalog::builtin(), &g, &GeometryConfig::default())
                .unwrap();
        assert!(vis.period_visible(0, NodeId(0), NodeId(1)));
        // on the far side of the Earth instead
        let nodes = NodeSet::new(
            2,
            vec![NodeSpec::new("S", orbit("L3"))],
            vec![],
            vec![],
            vec![NodeSpec::new(
                "G",
                Some(Trajectory::Ground {
                    lat_deg: 0.0,
                    lon_deg: 0.0,
                }),
            )],
        );
        let vis =
            compute_visibility(&nodes, &OrbitCatalog::builtin(), &g, &GeometryConfig::default())
                .unwrap();
        assert!(!vis.period_visible(0, NodeId(0), NodeId(1)));
    }

    #[test]
    fn missing_trajectory_is_an_error() {
        let nodes = NodeSet::anonymous(2, 2, 0, 0, 0);
        let err = compute_visibility(
            &nodes,
            &OrbitCatalog::builtin(),
            &grid(1),
            &GeometryConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, GeometryError::MissingTrajectory("S0".into()));
    }
}
