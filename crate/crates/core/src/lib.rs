//! Simulation core for an Earth to GEO-mounted reflecting surface to Moon link.
//!
//! The crate is split along the physical pipeline:
//!
//! - [`orbital`]: two-body propagation of GEO and low-lunar-orbit satellites
//!   plus a circular lunar ephemeris.
//! - [`geometry`]: distances, occlusion by a spherical body and the
//!   reflection angle between the uplink and downlink legs.
//! - [`ris`]: per-element phase configuration and the effective-area law.
//! - [`linkbudget`]: path loss, received power and SNR.
//! - [`linkselect`]: per-step availability, shortest-link selection and the
//!   month-long time series.

// `!(x > 0.0)` style checks are kept so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geometry;
pub mod linkbudget;
pub mod linkselect;
pub mod orbital;
pub mod ris;

/// Cartesian 3-vector in km unless stated otherwise.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(std::f64::consts::TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if wrapped >= std::f64::consts::TAU {
        0.0
    } else {
        wrapped
    }
}
