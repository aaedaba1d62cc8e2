//! Distances, spherical occlusion and the uplink/downlink reflection angle.

use thiserror::Error;

use crate::Vec3;

/// Legs shorter than this cannot define a direction.
pub const DEGENERATE_LEG_KM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate geometry: {leg} leg has length {length:e} km")]
    DegenerateLeg { leg: &'static str, length: f64 },
}

/// Earth station, reflecting platform and destination of one relayed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub earth_station: Vec3,
    pub ris_platform: Vec3,
    pub destination: Vec3,
    /// Station to platform, km.
    pub d_er: f64,
    /// Platform to destination, km.
    pub d_rm: f64,
    /// Angle between the two legs, rad in `[0, π]`.
    pub phi_opt: f64,
}

impl LinkGeometry {
    pub fn new(
        earth_station: Vec3,
        ris_platform: Vec3,
        destination: Vec3,
    ) -> Result<Self, GeometryError> {
        let phi_opt = optimal_reflection_angle(&earth_station, &ris_platform, &destination)?;
        Ok(Self {
            earth_station,
            ris_platform,
            destination,
            d_er: euclidean_distance(&earth_station, &ris_platform),
            d_rm: euclidean_distance(&ris_platform, &destination),
            phi_opt,
        })
    }
}

pub fn euclidean_distance(p: &Vec3, q: &Vec3) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Angle between the station→platform and platform→destination vectors.
///
/// The cosine is clamped into `[-1, 1]` so collinear inputs give exactly 0 or π.
pub fn optimal_reflection_angle(
    earth: &Vec3,
    ris: &Vec3,
    moon: &Vec3,
) -> Result<f64, GeometryError> {
    let uplink = ris - earth;
    let downlink = moon - ris;
    let up_len = uplink.norm();
    let down_len = downlink.norm();
    if !(up_len >= DEGENERATE_LEG_KM) {
        return Err(GeometryError::DegenerateLeg {
            leg: "earth-ris",
            length: up_len,
        });
    }
    if !(down_len >= DEGENERATE_LEG_KM) {
        return Err(GeometryError::DegenerateLeg {
            leg: "ris-destination",
            length: down_len,
        });
    }
    let cos_phi = uplink.dot(&downlink) / (up_len * down_len);
    Ok(cos_phi.clamp(-1.0, 1.0).acos())
}

/// True when the closed segment `p`–`q` stays out of the open ball around
/// `occluder_center`. Endpoints on the surface count as visible.
pub fn line_of_sight(p: &Vec3, q: &Vec3, occluder_center: &Vec3, occluder_radius: f64) -> bool {
    // Fixed endpoint order makes the result bit-symmetric in p and q.
    let (a, b) = if lex_le(p, q) { (p, q) } else { (q, p) };
    let seg = b - a;
    let len2 = seg.norm_squared();
    let to_center = occluder_center - a;
    let s = if len2 > 0.0 {
        (to_center.dot(&seg) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let closest = if s == 0.0 {
        *a
    } else if s == 1.0 {
        *b
    } else {
        a + s * seg
    };
    euclidean_distance(&closest, occluder_center) >= occluder_radius
}

fn lex_le(p: &Vec3, q: &Vec3) -> bool {
    (p.x, p.y, p.z) <= (q.x, q.y, q.z)
}
