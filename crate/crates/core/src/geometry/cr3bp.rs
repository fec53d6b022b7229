//! Circular restricted three-body dynamics in the Earth-Moon rotating frame.
//!
//! Units are nondimensional: the Earth-Moon distance is 1, the mean motion
//! is 1, and the total mass is 1. The Earth sits at (-mu, 0, 0) and the Moon
//! at (1 - mu, 0, 0).

use crate::error::GeometryError;

pub const GM_EARTH_KM3_S2: f64 = 398_600.441_8;
pub const GM_MOON_KM3_S2: f64 = 4_902.800_066;

/// Earth-Moon mean distance, km (one length unit).
pub const LENGTH_UNIT_KM: f64 = 384_400.0;

/// Earth-Moon mass ratio derived from the two gravitational parameters.
pub fn earth_moon_mu() -> f64 {
    GM_MOON_KM3_S2 / (GM_EARTH_KM3_S2 + GM_MOON_KM3_S2)
}

/// Seconds per nondimensional time unit, sqrt(L^3 / (GM_E + GM_M)).
pub fn time_unit_seconds() -> f64 {
    (LENGTH_UNIT_KM.powi(3) / (GM_EARTH_KM3_S2 + GM_MOON_KM3_S2)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cr3bpState {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub mu: f64,
    pub epoch: f64,
}

impl Cr3bpState {
    pub fn new(position: [f64; 3], velocity: [f64; 3], mu: f64) -> Result<Self, GeometryError> {
        let s = Cr3bpState {
            position,
            velocity,
            mu,
            epoch: 0.0,
        };
        s.check()?;
        Ok(s)
    }

    pub fn from_array(x: [f64; 6], mu: f64) -> Result<Self, GeometryError> {
        Self::new([x[0], x[1], x[2]], [x[3], x[4], x[5]], mu)
    }

    pub fn to_array(&self) -> [f64; 6] {
        let (p, v) = (self.position, self.velocity);
        [p[0], p[1], p[2], v[0], v[1], v[2]]
    }

    fn check(&self) -> Result<(), GeometryError> {
        if !(self.mu > 0.0 && self.mu < 0.5) {
            return Err(GeometryError::MassRatio(self.mu));
        }
        if !self.to_array().iter().all(|c| c.is_finite()) || !self.epoch.is_finite() {
            return Err(GeometryError::NonFinite { epoch: self.epoch });
        }
        Ok(())
    }

    pub fn jacobi(&self) -> f64 {
        jacobi_constant(self.mu, &self.to_array())
    }
}

/// Time derivative of the rotating-frame state.
pub fn derivative(mu: f64, s: &[f64; 6]) -> [f64; 6] {
    let [x, y, z, vx, vy, vz] = *s;
    let dx1 = x + mu;
    let dx2 = x - 1.0 + mu;
    let r1 = (dx1 * dx1 + y * y + z * z).sqrt();
    let r2 = (dx2 * dx2 + y * y + z * z).sqrt();
    let k1 = (1.0 - mu) / (r1 * r1 * r1);
    let k2 = mu / (r2 * r2 * r2);
    let ax = 2.0 * vy + x - k1 * dx1 - k2 * dx2;
    let ay = -2.0 * vx + y - k1 * y - k2 * y;
    let az = -k1 * z - k2 * z;
    [vx, vy, vz, ax, ay, az]
}

pub fn jacobi_constant(mu: f64, s: &[f64; 6]) -> f64 {
    let [x, y, z, vx, vy, vz] = *s;
    let r1 = ((x + mu).powi(2) + y * y + z * z).sqrt();
    let r2 = ((x - 1.0 + mu).powi(2) + y * y + z * z).sqrt();
    let omega = 0.5 * (x * x + y * y) + (1.0 - mu) / r1 + mu / r2;
    2.0 * omega - (vx * vx + vy * vy + vz * vz)
}

fn axpy(s: &[f64; 6], k: &[f64; 6], h: f64) -> [f64; 6] {
    let mut out = *s;
    for i in 0..6 {
        out[i] += h * k[i];
    }
    out
}

/// One classical RK4 step.
pub fn rk4_step(mu: f64, s: &[f64; 6], h: f64) -> [f64; 6] {
    let k1 = derivative(mu, s);
    let k2 = derivative(mu, &axpy(s, &k1, 0.5 * h));
    let k3 = derivative(mu, &axpy(s, &k2, 0.5 * h));
    let k4 = derivative(mu, &axpy(s, &k3, h));
    let mut out = *s;
    for i in 0..6 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Advances `s` by `dt` using `ceil(dt / step)` equal RK4 sub-steps.
pub fn advance(mu: f64, s: &[f64; 6], epoch: f64, dt: f64, step: f64) -> Result<[f64; 6], GeometryError> {
    if dt == 0.0 {
        return Ok(*s);
    }
    let n = (dt / step).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut cur = *s;
    for i in 0..n {
        cur = rk4_step(mu, &cur, h);
        if !cur.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::NonFinite {
                epoch: epoch + (i + 1) as f64 * h,
            });
        }
    }
    Ok(cur)
}

/// Propagates a state forward by `dt` with a fixed-step RK4 integrator.
pub fn propagate(state: &Cr3bpState, dt: f64, step: f64) -> Result<Cr3bpState, GeometryError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(GeometryError::Step(step));
    }
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(GeometryError::Duration(dt));
    }
    state.check()?;
    let out = advance(state.mu, &state.to_array(), state.epoch, dt, step)?;
    Ok(Cr3bpState {
        position: [out[0], out[1], out[2]],
        velocity: [out[3], out[4], out[5]],
        mu: state.mu,
        epoch: state.epoch + dt,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LibrationPoint {
    L1,
    L2,
    L3,
    L4,
    L5,
}

impl std::str::FromStr for LibrationPoint {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L1" => Ok(LibrationPoint::L1),
            "L2" => Ok(LibrationPoint::L2),
            "L3" => Ok(LibrationPoint::L3),
            "L4" => Ok(LibrationPoint::L4),
            "L5" => Ok(LibrationPoint::L5),
            other => Err(GeometryError::Catalog(format!("unknown libration point `{other}`"))),
        }
    }
}

/// Position of an equilibrium point. Collinear points by Newton iteration on
/// the x-axis force balance.
pub fn libration_point(mu: f64, which: LibrationPoint) -> [f64; 3] {
    let half_sqrt3 = 3f64.sqrt() / 2.0;
    match which {
        LibrationPoint::L4 => [0.5 - mu, half_sqrt3, 0.0],
        LibrationPoint::L5 => [0.5 - mu, -half_sqrt3, 0.0],
        _ => {
            let guess = match which {
                LibrationPoint::L1 => 1.0 - mu - (mu / 3.0).cbrt(),
                LibrationPoint::L2 => 1.0 - mu + (mu / 3.0).cbrt(),
                _ => -1.0 - 5.0 * mu / 12.0,
            };
            let force = |x: f64| {
                let d1 = x + mu;
                let d2 = x - 1.0 + mu;
                x - (1.0 - mu) * d1 / d1.abs().powi(3) - mu * d2 / d2.abs().powi(3)
            };
            let mut x = guess;
            for _ in 0..50 {
                let h = 1e-7;
                let slope = (force(x + h) - force(x - h)) / (2.0 * h);
                let dx = force(x) / slope;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            [x, 0.0, 0.0]
        }
    }
}
