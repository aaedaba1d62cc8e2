//! Per-step GEO↔LLO availability and shortest-link selection.
//!
//! At every sample time all GEO and LLO satellites are propagated, each pair
//! is tested for line of sight past the Moon, and the shortest visible pair
//! carries the reflected link whose budget is then evaluated.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{euclidean_distance, line_of_sight, GeometryError, LinkGeometry};
use crate::linkbudget::{snr, BudgetError, LinkBudgetParams, SnrResult};
use crate::orbital::{
    llo_state_eci, moon_position, propagate, CentralBody, LunarEphemerisModel, OrbitalElements,
    OrbitalError,
};
use crate::ris::{effective_area, EffectiveArea, RisError, RisParams};
use crate::Vec3;

/// Upper bound on the number of samples in one run.
pub const MAX_STEPS: f64 = 1e7;

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Orbital(#[from] OrbitalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Ris(#[from] RisError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("time {t} s lies outside the scenario horizon [0, {duration}] s")]
    OutsideHorizon { t: f64, duration: f64 },
}

/// One candidate GEO→LLO link at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub time: f64,
    pub geo_id: usize,
    pub llo_id: usize,
    /// km
    pub distance: f64,
    pub visible: bool,
    pub selected: bool,
}

/// Everything needed to simulate one month of relaying.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub earth: CentralBody,
    pub moon: CentralBody,
    pub geo_elements: Vec<OrbitalElements>,
    pub llo_elements: Vec<OrbitalElements>,
    pub moon_model: LunarEphemerisModel,
    /// km, Earth-centered inertial.
    pub ground_station: Vec3,
    /// s
    pub duration: f64,
    /// s
    pub sampling_interval: f64,
    pub budget: LinkBudgetParams,
    pub ris: RisParams,
}

impl Scenario {
    /// Three inclined GEO platforms and four polar low lunar orbiters over
    /// 27.3 days at one-minute sampling.
    pub fn reference() -> Self {
        let geo_inclination = 23.44f64.to_radians();
        let geo_elements = [0.0f64, 120.0, 240.0]
            .iter()
            .map(|nu| {
                OrbitalElements::circular(42_378.1, geo_inclination, 0.0, nu.to_radians())
                    .expect("valid GEO elements")
            })
            .collect();
        let llo_elements = [
            (0.0f64, 0.0f64),
            (90.0, 180.0),
            (225.0, 90.0),
            (315.0, 270.0),
        ]
        .iter()
        .map(|(node, nu)| {
            OrbitalElements::circular(
                1837.4,
                90f64.to_radians(),
                node.to_radians(),
                nu.to_radians(),
            )
            .expect("valid LLO elements")
        })
        .collect();
        Self {
            earth: CentralBody::earth(),
            moon: CentralBody::moon(),
            geo_elements,
            llo_elements,
            moon_model: LunarEphemerisModel::default(),
            ground_station: Vec3::zeros(),
            duration: 27.3 * SECONDS_PER_DAY,
            sampling_interval: 60.0,
            budget: LinkBudgetParams::reference(),
            ris: RisParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let invalid = |msg: String| Err(SimError::InvalidScenario(msg));
        if self.geo_elements.is_empty() {
            return invalid("at least one GEO satellite is required".into());
        }
        if self.llo_elements.is_empty() {
            return invalid("at least one LLO satellite is required".into());
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return invalid(format!(
                "duration = {} s must be non-negative",
                self.duration
            ));
        }
        if !(self.sampling_interval.is_finite() && self.sampling_interval > 0.0) {
            return invalid(format!(
                "sampling_interval = {} s must be positive",
                self.sampling_interval
            ));
        }
        if self.duration / self.sampling_interval > MAX_STEPS {
            return invalid(format!(
                "duration / sampling_interval = {} exceeds the cap of {MAX_STEPS}",
                self.duration / self.sampling_interval
            ));
        }
        if !self.ground_station.iter().all(|c| c.is_finite()) {
            return invalid("ground_station must be finite".into());
        }
        for el in &self.geo_elements {
            el.check_body(&self.earth)?;
        }
        for el in &self.llo_elements {
            el.check_body(&self.moon)?;
        }
        self.ris.validate()?;
        Ok(())
    }

    /// Sample count with inclusive endpoints.
    pub fn step_count(&self) -> usize {
        step_count(self.duration, self.sampling_interval)
    }

    pub fn time_at(&self, step: usize) -> f64 {
        step as f64 * self.sampling_interval
    }
}

/// `floor(duration / interval) + 1`, treating ratios within 1e-9 of an
/// integer as that integer so decimal horizons do not lose their last step.
pub fn step_count(duration: f64, interval: f64) -> usize {
    let ratio = duration / interval;
    let nearest = ratio.round();
    let whole = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    whole as usize + 1
}

/// Inertial positions of everything at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub moon: Vec3,
    pub geo: Vec<Vec3>,
    pub llo: Vec<Vec3>,
}

pub fn snapshot(scenario: &Scenario, t: f64) -> Result<Snapshot, SimError> {
    let geo = scenario
        .geo_elements
        .iter()
        .map(|el| propagate(el, &scenario.earth, t).map(|s| s.position))
        .collect::<Result<Vec<_>, _>>()?;
    let llo = scenario
        .llo_elements
        .iter()
        .map(|el| llo_state_eci(el, &scenario.moon, &scenario.moon_model, t).map(|s| s.position))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Snapshot {
        time: t,
        moon: moon_position(&scenario.moon_model, t),
        geo,
        llo,
    })
}

fn samples_from(snapshot: &Snapshot, moon_radius: f64) -> Vec<LinkSample> {
    let mut samples = Vec::with_capacity(snapshot.geo.len() * snapshot.llo.len());
    for (geo_id, geo) in snapshot.geo.iter().enumerate() {
        for (llo_id, llo) in snapshot.llo.iter().enumerate() {
            samples.push(LinkSample {
                time: snapshot.time,
                geo_id,
                llo_id,
                distance: euclidean_distance(geo, llo),
                visible: line_of_sight(geo, llo, &snapshot.moon, moon_radius),
                selected: false,
            });
        }
    }
    samples
}

/// One sample per GEO×LLO pair, ordered by `(geo_id, llo_id)`. The Moon is the
/// only occluder.
pub fn availability_matrix(scenario: &Scenario, t: f64) -> Result<Vec<LinkSample>, SimError> {
    check_time(scenario, t)?;
    let snap = snapshot(scenario, t)?;
    Ok(samples_from(&snap, scenario.moon.radius()))
}

/// Shortest visible link, marked selected. Equal distances go to the smallest
/// `(geo_id, llo_id)`.
pub fn select_shortest(samples: &[LinkSample]) -> Option<LinkSample> {
    let mut best: Option<&LinkSample> = None;
    for s in samples.iter().filter(|s| s.visible) {
        best = match best {
            None => Some(s),
            Some(b) if s.distance < b.distance => Some(s),
            Some(b) if s.distance == b.distance && (s.geo_id, s.llo_id) < (b.geo_id, b.llo_id) => {
                Some(s)
            }
            keep => keep,
        };
    }
    best.map(|s| LinkSample {
        selected: true,
        ..*s
    })
}

/// Budget of the relayed link at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedLink {
    pub sample: LinkSample,
    pub geometry: LinkGeometry,
    pub a_eff: EffectiveArea,
    pub snr: SnrResult,
}

/// One row of the time series. `link` is `None` on outage steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub time: f64,
    pub visible_count: usize,
    pub link: Option<SelectedLink>,
}

impl StepRecord {
    pub fn is_outage(&self) -> bool {
        self.link.is_none()
    }
}

/// Evaluates the reflected link for a chosen GEO→LLO pair with the surface
/// aligned to the pair's reflection angle.
pub fn evaluate_link(
    ground_station: &Vec3,
    ris: &RisParams,
    budget: &LinkBudgetParams,
    sample: LinkSample,
    geo: &Vec3,
    llo: &Vec3,
) -> Result<SelectedLink, SimError> {
    let geometry = LinkGeometry::new(*ground_station, *geo, *llo)?;
    let config = ris.optimal_for(geometry.phi_opt)?;
    let a_eff = effective_area(&config, geometry.phi_opt);
    let snr = snr(budget, a_eff, geometry.d_er, geometry.d_rm)?;
    Ok(SelectedLink {
        sample,
        geometry,
        a_eff,
        snr,
    })
}

/// Selects and evaluates the link at time `t`.
pub fn step(scenario: &Scenario, t: f64) -> Result<StepRecord, SimError> {
    check_time(scenario, t)?;
    let snap = snapshot(scenario, t)?;
    let samples = samples_from(&snap, scenario.moon.radius());
    let visible_count = samples.iter().filter(|s| s.visible).count();
    let link = select_shortest(&samples)
        .map(|sample| {
            evaluate_link(
                &scenario.ground_station,
                &scenario.ris,
                &scenario.budget,
                sample,
                &snap.geo[sample.geo_id],
                &snap.llo[sample.llo_id],
            )
        })
        .transpose()?;
    Ok(StepRecord {
        time: t,
        visible_count,
        link,
    })
}

/// Every visible pair at time `t` with its geometry, sorted by downlink
/// distance then `(geo_id, llo_id)`.
pub fn visible_links(
    scenario: &Scenario,
    t: f64,
) -> Result<Vec<(LinkSample, LinkGeometry)>, SimError> {
    check_time(scenario, t)?;
    let snap = snapshot(scenario, t)?;
    let mut links = samples_from(&snap, scenario.moon.radius())
        .into_iter()
        .filter(|s| s.visible)
        .map(|s| {
            LinkGeometry::new(
                scenario.ground_station,
                snap.geo[s.geo_id],
                snap.llo[s.llo_id],
            )
            .map(|g| (s, g))
        })
        .collect::<Result<Vec<_>, _>>()?;
    links.sort_by(|(a, _), (b, _)| {
        a.distance
            .total_cmp(&b.distance)
            .then((a.geo_id, a.llo_id).cmp(&(b.geo_id, b.llo_id)))
    });
    Ok(links)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Full time series, one record per sample time.
pub fn run_timeseries(scenario: &Scenario) -> Result<Vec<StepRecord>, SimError> {
    run_timeseries_with(scenario, Execution::default())
}

/// Steps are independent, so the parallel run gives the same records in the
/// same order as the sequential one.
pub fn run_timeseries_with(
    scenario: &Scenario,
    execution: Execution,
) -> Result<Vec<StepRecord>, SimError> {
    scenario.validate()?;
    let n = scenario.step_count();
    match execution {
        Execution::Sequential => (0..n)
            .map(|k| step(scenario, scenario.time_at(k)))
            .collect(),
        Execution::Parallel => (0..n)
            .into_par_iter()
            .map(|k| step(scenario, scenario.time_at(k)))
            .collect(),
    }
}

fn check_time(scenario: &Scenario, t: f64) -> Result<(), SimError> {
    if t >= 0.0 && t <= scenario.duration {
        Ok(())
    } else {
        Err(SimError::OutsideHorizon {
            t,
            duration: scenario.duration,
        })
    }
}
