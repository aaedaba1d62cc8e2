//! Two-body propagation and the analytic lunar ephemeris.
//!
//! Everything here is expressed in an Earth-centered inertial frame (km, km/s,
//! seconds from scenario start). Lunar orbits are propagated about the Moon in
//! a Moon-centered frame whose axes are parallel to the Earth-centered one and
//! then translated by the ephemeris position.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::{normalize_angle, Vec3};

/// Newton iteration cap for Kepler's equation.
pub const KEPLER_MAX_ITERATIONS: usize = 50;
/// Convergence tolerance for Kepler's equation, rad.
pub const KEPLER_TOLERANCE: f64 = 1e-12;
/// Orbits about the Moon must stay well inside its sphere of influence.
pub const LUNAR_SOI_LIMIT_KM: f64 = 60_000.0;

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitalError {
    #[error("invalid {field} = {value}: {reason}")]
    InvalidElement {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid central body {name}: {reason}")]
    InvalidBody { name: String, reason: &'static str },
    #[error(
        "semi_major_axis = {semi_major_axis} km does not clear the {body} radius of {radius} km"
    )]
    BelowSurface {
        semi_major_axis: f64,
        radius: f64,
        body: String,
    },
    #[error("semi_major_axis = {0} km lies outside the lunar sphere of influence")]
    OutsideSphereOfInfluence(f64),
    #[error(
        "Kepler solver did not converge after {iterations} iterations (residual {residual:e} rad)"
    )]
    KeplerNonConvergence { iterations: usize, residual: f64 },
    #[error("requested time {t} s precedes the element epoch {epoch} s")]
    TimeBeforeEpoch { t: f64, epoch: f64 },
    #[error("state vector cannot be converted to a closed orbit: {0}")]
    DegenerateState(&'static str),
}

pub type OrbitalResult<T> = Result<T, OrbitalError>;

/// Point-mass gravitating body.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralBody {
    name: String,
    gravitational_parameter: f64,
    radius: f64,
}

impl CentralBody {
    pub fn new(
        name: impl Into<String>,
        gravitational_parameter: f64,
        radius: f64,
    ) -> OrbitalResult<Self> {
        let name = name.into();
        if !(gravitational_parameter.is_finite() && gravitational_parameter > 0.0) {
            return Err(OrbitalError::InvalidBody {
                name,
                reason: "gravitational_parameter must be positive",
            });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(OrbitalError::InvalidBody {
                name,
                reason: "radius must be positive",
            });
        }
        Ok(Self {
            name,
            gravitational_parameter,
            radius,
        })
    }

    /// μ = 398 600.4418 km³/s², R = 6378.1 km.
    pub fn earth() -> Self {
        Self {
            name: "Earth".into(),
            gravitational_parameter: 398_600.441_8,
            radius: 6378.1,
        }
    }

    /// μ = 4902.800 km³/s², R = 1737.4 km.
    pub fn moon() -> Self {
        Self {
            name: "Moon".into(),
            gravitational_parameter: 4902.800,
            radius: 1737.4,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// km³/s²
    pub fn gravitational_parameter(&self) -> f64 {
        self.gravitational_parameter
    }

    /// km
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Classical Keplerian elements. Angles are radians, lengths km, epoch in
/// seconds from scenario start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements {
    semi_major_axis: f64,
    eccentricity: f64,
    inclination: f64,
    raan: f64,
    arg_perigee: f64,
    true_anomaly: f64,
    epoch: f64,
}

impl OrbitalElements {
    /// Validates the element set and normalizes the node, perigee and anomaly
    /// angles into `[0, 2π)`.
    pub fn new(
        semi_major_axis: f64,
        eccentricity: f64,
        inclination: f64,
        raan: f64,
        arg_perigee: f64,
        true_anomaly: f64,
        epoch: f64,
    ) -> OrbitalResult<Self> {
        let invalid = |field, value, reason| OrbitalError::InvalidElement {
            field,
            value,
            reason,
        };
        if !(semi_major_axis.is_finite() && semi_major_axis > 0.0) {
            return Err(invalid(
                "semi_major_axis",
                semi_major_axis,
                "must be positive and finite",
            ));
        }
        if !(eccentricity.is_finite() && (0.0..1.0).contains(&eccentricity)) {
            return Err(invalid(
                "eccentricity",
                eccentricity,
                "closed orbits need 0 <= e < 1",
            ));
        }
        if !(inclination.is_finite() && (0.0..=PI).contains(&inclination)) {
            return Err(invalid("inclination", inclination, "must lie in [0, pi]"));
        }
        for (field, value) in [
            ("raan", raan),
            ("arg_perigee", arg_perigee),
            ("true_anomaly", true_anomaly),
            ("epoch", epoch),
        ] {
            if !value.is_finite() {
                return Err(invalid(field, value, "must be finite"));
            }
        }
        Ok(Self {
            semi_major_axis,
            eccentricity,
            inclination,
            raan: normalize_angle(raan),
            arg_perigee: normalize_angle(arg_perigee),
            true_anomaly: normalize_angle(true_anomaly),
            epoch,
        })
    }

    /// Circular orbit shorthand (e = 0, ω = 0).
    pub fn circular(
        semi_major_axis: f64,
        inclination: f64,
        raan: f64,
        true_anomaly: f64,
    ) -> OrbitalResult<Self> {
        Self::new(
            semi_major_axis,
            0.0,
            inclination,
            raan,
            0.0,
            true_anomaly,
            0.0,
        )
    }

    pub fn semi_major_axis(&self) -> f64 {
        self.semi_major_axis
    }
    pub fn eccentricity(&self) -> f64 {
        self.eccentricity
    }
    pub fn inclination(&self) -> f64 {
        self.inclination
    }
    pub fn raan(&self) -> f64 {
        self.raan
    }
    pub fn arg_perigee(&self) -> f64 {
        self.arg_perigee
    }
    pub fn true_anomaly(&self) -> f64 {
        self.true_anomaly
    }
    pub fn epoch(&self) -> f64 {
        self.epoch
    }

    /// Checks the orbit against the body it is meant to circle.
    pub fn check_body(&self, body: &CentralBody) -> OrbitalResult<()> {
        if self.semi_major_axis <= body.radius {
            return Err(OrbitalError::BelowSurface {
                semi_major_axis: self.semi_major_axis,
                radius: body.radius,
                body: body.name.clone(),
            });
        }
        Ok(())
    }

    /// Mean motion n = √(μ/a³), rad/s.
    pub fn mean_motion(&self, body: &CentralBody) -> f64 {
        (body.gravitational_parameter / self.semi_major_axis.powi(3)).sqrt()
    }

    /// Orbital period T = 2π√(a³/μ), s.
    pub fn period(&self, body: &CentralBody) -> f64 {
        TAU * (self.semi_major_axis.powi(3) / body.gravitational_parameter).sqrt()
    }

    pub fn eccentric_anomaly(&self) -> f64 {
        true_to_eccentric(self.true_anomaly, self.eccentricity)
    }

    pub fn mean_anomaly(&self) -> f64 {
        let e_anom = self.eccentric_anomaly();
        normalize_angle(e_anom - self.eccentricity * e_anom.sin())
    }
}

/// Position and velocity in an inertial frame at `epoch` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub position: Vec3,
    pub velocity: Vec3,
    pub epoch: f64,
}

impl StateVector {
    pub fn radius(&self) -> f64 {
        self.position.norm()
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    /// ε = v²/2 − μ/r
    pub fn specific_energy(&self, body: &CentralBody) -> f64 {
        0.5 * self.velocity.norm_squared() - body.gravitational_parameter / self.radius()
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.position.cross(&self.velocity)
    }
}

/// Circular lunar ephemeris: the Moon moves uniformly on a circle whose plane
/// is tilted about the inertial x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LunarEphemerisModel {
    orbit_radius: f64,
    sidereal_period: f64,
    inclination: f64,
    phase_at_epoch: f64,
}

impl LunarEphemerisModel {
    /// Mean distance of the default model, km.
    pub const MEAN_RADIUS_KM: f64 = 384_400.0;
    /// Sidereal month of the default model, days.
    pub const SIDEREAL_MONTH_DAYS: f64 = 27.321_661;
    /// Tilt of the default lunar plane against the equator, degrees.
    pub const INCLINATION_DEG: f64 = 5.145;

    pub fn new(
        orbit_radius: f64,
        sidereal_period: f64,
        inclination: f64,
        phase_at_epoch: f64,
    ) -> OrbitalResult<Self> {
        let invalid = |field, value, reason| OrbitalError::InvalidElement {
            field,
            value,
            reason,
        };
        if !(orbit_radius.is_finite() && orbit_radius > 0.0) {
            return Err(invalid("orbit_radius", orbit_radius, "must be positive"));
        }
        if !(sidereal_period.is_finite() && sidereal_period > 0.0) {
            return Err(invalid(
                "sidereal_period",
                sidereal_period,
                "must be positive",
            ));
        }
        if !(inclination.is_finite() && (0.0..=PI).contains(&inclination)) {
            return Err(invalid("inclination", inclination, "must lie in [0, pi]"));
        }
        if !phase_at_epoch.is_finite() {
            return Err(invalid("phase_at_epoch", phase_at_epoch, "must be finite"));
        }
        Ok(Self {
            orbit_radius,
            sidereal_period,
            inclination,
            phase_at_epoch: normalize_angle(phase_at_epoch),
        })
    }

    pub fn orbit_radius(&self) -> f64 {
        self.orbit_radius
    }
    pub fn sidereal_period(&self) -> f64 {
        self.sidereal_period
    }
    pub fn inclination(&self) -> f64 {
        self.inclination
    }
    pub fn phase_at_epoch(&self) -> f64 {
        self.phase_at_epoch
    }

    fn phase(&self, t: f64) -> f64 {
        self.phase_at_epoch + TAU * (t / self.sidereal_period)
    }

    fn angular_rate(&self) -> f64 {
        TAU / self.sidereal_period
    }
}

impl Default for LunarEphemerisModel {
    fn default() -> Self {
        Self {
            orbit_radius: Self::MEAN_RADIUS_KM,
            sidereal_period: Self::SIDEREAL_MONTH_DAYS * SECONDS_PER_DAY,
            inclination: Self::INCLINATION_DEG.to_radians(),
            phase_at_epoch: 0.0,
        }
    }
}

/// Solves M = E − e·sin(E) for the eccentric anomaly by Newton–Raphson
/// starting from E₀ = M. The result is wrapped into `[0, 2π)`.
pub fn solve_kepler_equation(mean_anomaly: f64, eccentricity: f64) -> OrbitalResult<f64> {
    if !(eccentricity.is_finite() && (0.0..1.0).contains(&eccentricity)) {
        return Err(OrbitalError::InvalidElement {
            field: "eccentricity",
            value: eccentricity,
            reason: "closed orbits need 0 <= e < 1",
        });
    }
    if !mean_anomaly.is_finite() {
        return Err(OrbitalError::InvalidElement {
            field: "mean_anomaly",
            value: mean_anomaly,
            reason: "must be finite",
        });
    }
    let m = normalize_angle(mean_anomaly);
    let residual = |e_anom: f64| wrap_pi(e_anom - eccentricity * e_anom.sin() - m);

    let mut e_anom = m;
    for _ in 0..KEPLER_MAX_ITERATIONS {
        let f = e_anom - eccentricity * e_anom.sin() - m;
        let step = f / (1.0 - eccentricity * e_anom.cos());
        e_anom -= step;
        if step.abs() < KEPLER_TOLERANCE {
            let wrapped = normalize_angle(e_anom);
            if residual(wrapped).abs() < KEPLER_TOLERANCE {
                return Ok(wrapped);
            }
        }
    }
    Err(OrbitalError::KeplerNonConvergence {
        iterations: KEPLER_MAX_ITERATIONS,
        residual: residual(e_anom).abs(),
    })
}

/// Inertial state at the element epoch.
pub fn elements_to_state(
    elements: &OrbitalElements,
    body: &CentralBody,
) -> OrbitalResult<StateVector> {
    elements.check_body(body)?;
    Ok(state_at_true_anomaly(
        elements,
        body,
        elements.true_anomaly,
        elements.epoch,
    ))
}

/// Exact two-body state at time `t`.
pub fn propagate(
    elements: &OrbitalElements,
    body: &CentralBody,
    t: f64,
) -> OrbitalResult<StateVector> {
    elements.check_body(body)?;
    if !(t >= elements.epoch) {
        return Err(OrbitalError::TimeBeforeEpoch {
            t,
            epoch: elements.epoch,
        });
    }
    let dt = t - elements.epoch;
    if dt == 0.0 {
        return Ok(state_at_true_anomaly(
            elements,
            body,
            elements.true_anomaly,
            t,
        ));
    }
    // Whole revolutions are removed before forming the angle so the mean
    // anomaly stays accurate over long horizons.
    let period = elements.period(body);
    let revolutions = (dt / period).floor();
    let mean_anomaly = elements.mean_anomaly() + TAU * ((dt - revolutions * period) / period);
    let e_anom = solve_kepler_equation(mean_anomaly, elements.eccentricity)?;
    let nu = eccentric_to_true(e_anom, elements.eccentricity);
    Ok(state_at_true_anomaly(elements, body, nu, t))
}

/// Recovers classical elements from an inertial state. Circular orbits get
/// ω = 0 with the anomaly measured from the node; equatorial orbits get Ω = 0.
pub fn state_to_elements(
    state: &StateVector,
    body: &CentralBody,
) -> OrbitalResult<OrbitalElements> {
    const SMALL: f64 = 1e-11;
    let mu = body.gravitational_parameter;
    let r = state.position;
    let v = state.velocity;
    let r_norm = r.norm();
    if !(r_norm > 0.0 && r_norm.is_finite()) {
        return Err(OrbitalError::DegenerateState("zero or non-finite position"));
    }
    let h = r.cross(&v);
    let h_norm = h.norm();
    if h_norm == 0.0 {
        return Err(OrbitalError::DegenerateState("rectilinear motion"));
    }
    let energy = 0.5 * v.norm_squared() - mu / r_norm;
    if energy >= 0.0 {
        return Err(OrbitalError::DegenerateState("unbound trajectory"));
    }
    let a = -mu / (2.0 * energy);
    let e_vec = ((v.norm_squared() - mu / r_norm) * r - r.dot(&v) * v) / mu;
    let e = e_vec.norm();
    let inc = (h.z / h_norm).clamp(-1.0, 1.0).acos();
    let node = Vec3::new(-h.y, h.x, 0.0);
    let node_norm = node.norm();

    let equatorial = node_norm < SMALL * h_norm;
    let circular = e < SMALL;

    let raan = if equatorial {
        0.0
    } else {
        node.y.atan2(node.x)
    };
    // Reference direction for ω and ν.
    let reference = if equatorial {
        Vec3::x()
    } else {
        node / node_norm
    };
    let in_plane_normal = h / h_norm;
    let signed_angle = |from: &Vec3, to: &Vec3| -> f64 {
        let sin = in_plane_normal.dot(&from.cross(to));
        let cos = from.dot(to);
        sin.atan2(cos)
    };

    let (arg_perigee, true_anomaly) = if circular {
        (0.0, signed_angle(&reference, &r))
    } else {
        let omega = signed_angle(&reference, &e_vec);
        let nu = signed_angle(&e_vec, &r);
        (omega, nu)
    };
    OrbitalElements::new(
        a,
        if circular { 0.0 } else { e },
        inc,
        raan,
        arg_perigee,
        true_anomaly,
        state.epoch,
    )
}

/// Earth-centered position of the Moon's center at time `t`.
pub fn moon_position(model: &LunarEphemerisModel, t: f64) -> Vec3 {
    let (sin_u, cos_u) = model.phase(t).sin_cos();
    let (sin_i, cos_i) = model.inclination.sin_cos();
    model.orbit_radius * Vec3::new(cos_u, sin_u * cos_i, sin_u * sin_i)
}

/// Earth-centered velocity of the Moon's center at time `t`.
pub fn moon_velocity(model: &LunarEphemerisModel, t: f64) -> Vec3 {
    let (sin_u, cos_u) = model.phase(t).sin_cos();
    let (sin_i, cos_i) = model.inclination.sin_cos();
    model.orbit_radius * model.angular_rate() * Vec3::new(-sin_u, cos_u * cos_i, cos_u * sin_i)
}

/// Earth-centered state of a satellite whose elements are given about the Moon.
pub fn llo_state_eci(
    elements: &OrbitalElements,
    moon: &CentralBody,
    moon_model: &LunarEphemerisModel,
    t: f64,
) -> OrbitalResult<StateVector> {
    if elements.semi_major_axis >= LUNAR_SOI_LIMIT_KM {
        return Err(OrbitalError::OutsideSphereOfInfluence(
            elements.semi_major_axis,
        ));
    }
    let relative = propagate(elements, moon, t)?;
    Ok(StateVector {
        position: moon_position(moon_model, t) + relative.position,
        velocity: moon_velocity(moon_model, t) + relative.velocity,
        epoch: t,
    })
}

fn state_at_true_anomaly(
    elements: &OrbitalElements,
    body: &CentralBody,
    true_anomaly: f64,
    epoch: f64,
) -> StateVector {
    let e = elements.eccentricity;
    let p = elements.semi_major_axis * (1.0 - e * e);
    let (sin_nu, cos_nu) = true_anomaly.sin_cos();
    let r = p / (1.0 + e * cos_nu);
    let speed_scale = (body.gravitational_parameter / p).sqrt();

    let pos_pf = (r * cos_nu, r * sin_nu);
    let vel_pf = (-speed_scale * sin_nu, speed_scale * (e + cos_nu));

    let (sin_o, cos_o) = elements.raan.sin_cos();
    let (sin_w, cos_w) = elements.arg_perigee.sin_cos();
    let (sin_i, cos_i) = elements.inclination.sin_cos();
    // Columns of the perifocal-to-inertial rotation.
    let p_hat = Vec3::new(
        cos_o * cos_w - sin_o * sin_w * cos_i,
        sin_o * cos_w + cos_o * sin_w * cos_i,
        sin_w * sin_i,
    );
    let q_hat = Vec3::new(
        -cos_o * sin_w - sin_o * cos_w * cos_i,
        -sin_o * sin_w + cos_o * cos_w * cos_i,
        cos_w * sin_i,
    );
    StateVector {
        position: pos_pf.0 * p_hat + pos_pf.1 * q_hat,
        velocity: vel_pf.0 * p_hat + vel_pf.1 * q_hat,
        epoch,
    }
}

fn true_to_eccentric(true_anomaly: f64, e: f64) -> f64 {
    let (sin_nu, cos_nu) = true_anomaly.sin_cos();
    normalize_angle(((1.0 - e * e).sqrt() * sin_nu).atan2(e + cos_nu))
}

fn eccentric_to_true(e_anom: f64, e: f64) -> f64 {
    let (sin_e, cos_e) = e_anom.sin_cos();
    normalize_angle(((1.0 - e * e).sqrt() * sin_e).atan2(cos_e - e))
}

fn wrap_pi(angle: f64) -> f64 {
    let wrapped = normalize_angle(angle);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}
