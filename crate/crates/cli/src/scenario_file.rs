//! Scenario files: TOML documents with physical-unit suffixes.
//!
//! Angles are degrees, orbit sizes km. Power, gain, wavelength and time values
//! may be bare numbers in base units (W, linear ratio, m, s) or strings with
//! a unit such as `"40 kW"`, `"30 dBi"`, `"-100 dBm"` or `"27.3 d"`.
//! Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cislunar_core::linkbudget::{db, LinkBudgetParams};
use cislunar_core::linkselect::Scenario;
use cislunar_core::orbital::{CentralBody, LunarEphemerisModel, OrbitalElements};
use cislunar_core::ris::{AreaMode, RisParams};
use cislunar_core::Vec3;

use crate::error::ScenarioError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bodies: Option<BodiesSection>,
    pub moon: MoonSection,
    pub geo: Vec<ElementsSection>,
    pub llo: Vec<ElementsSection>,
    pub budget: BudgetSection,
    pub ris: RisSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodiesSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub earth: Option<BodySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moon: Option<BodySection>,
}

/// `mu` in km³/s², `radius` in km.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySection {
    pub mu: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoonSection {
    /// km
    pub orbit_radius: f64,
    pub sidereal_period: Quantity,
    /// deg
    pub inclination: f64,
    /// deg
    #[serde(default)]
    pub phase_at_epoch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementsSection {
    /// km
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    /// deg
    pub inclination: f64,
    /// deg
    pub raan: f64,
    /// deg
    pub arg_perigee: f64,
    /// deg
    pub true_anomaly: f64,
    /// s
    #[serde(default)]
    pub epoch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub transmit_power: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_transmit_power: Option<Quantity>,
    pub gain_tx: Quantity,
    pub gain_rx: Quantity,
    pub wavelength: Quantity,
    pub noise_power: Quantity,
    pub ris_insertion_loss: Quantity,
    pub snr_threshold: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisSection {
    pub elements: usize,
    pub area_mode: String,
    pub k: f64,
    /// m²
    pub a_max: f64,
    /// m², used in fixed-element mode
    #[serde(default = "default_element_area")]
    pub element_area: f64,
}

fn default_element_area() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub duration: Quantity,
    pub sampling_interval: Quantity,
    /// km
    #[serde(default)]
    pub ground_station: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// A bare number in base units or a `"<number> <unit>"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Number(x) => write!(f, "{x}"),
            Quantity::Text(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    /// W
    Power,
    /// linear power ratio
    Ratio,
    /// m
    Length,
    /// s
    Time,
}

impl Quantity {
    fn to_base(&self, key: &str, dim: Dimension) -> Result<f64, ScenarioError> {
        let bad = |reason: String| ScenarioError::Validation(format!("{key} = {self}: {reason}"));
        let (number, unit) = match self {
            Quantity::Number(x) => (*x, ""),
            Quantity::Text(text) => {
                let text = text.trim();
                let split = text
                    .find(|c: char| {
                        c.is_whitespace() || (c.is_ascii_alphabetic() && c != 'e' && c != 'E')
                    })
                    .unwrap_or(text.len());
                let (num, unit) = text.split_at(split);
                let number: f64 = num
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("cannot read a number from {num:?}")))?;
                (number, unit.trim())
            }
        };
        if !number.is_finite() {
            return Err(bad("value must be finite".into()));
        }
        let value = match (dim, unit) {
            (Dimension::Power, "" | "W") => number,
            (Dimension::Power, "mW") => number * 1e-3,
            (Dimension::Power, "kW") => number * 1e3,
            (Dimension::Power, "MW") => number * 1e6,
            (Dimension::Power, "dBW") => db::dbw_to_watts(number),
            (Dimension::Power, "dBm") => db::dbm_to_watts(number),
            (Dimension::Ratio, "") => number,
            (Dimension::Ratio, "dB" | "dBi") => db::db_to_linear(number),
            (Dimension::Length, "" | "m") => number,
            (Dimension::Length, "cm") => number * 1e-2,
            (Dimension::Length, "mm") => number * 1e-3,
            (Dimension::Length, "km") => number * 1e3,
            (Dimension::Time, "" | "s") => number,
            (Dimension::Time, "min") => number * 60.0,
            (Dimension::Time, "h") => number * 3600.0,
            (Dimension::Time, "d") => number * 86_400.0,
            (_, unit) => return Err(bad(format!("unit {unit:?} is not valid here"))),
        };
        Ok(value)
    }
}

/// Validated scenario plus the output path named in the file, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub output: Option<PathBuf>,
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<LoadedScenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario_str(&text)
}

pub fn parse_scenario_str(text: &str) -> Result<LoadedScenario, ScenarioError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    file.into_scenario()
}

fn context<E: fmt::Display>(prefix: impl fmt::Display) -> impl FnOnce(E) -> ScenarioError {
    move |e| ScenarioError::Validation(format!("{prefix}: {e}"))
}

impl ElementsSection {
    fn to_elements(&self) -> Result<OrbitalElements, String> {
        OrbitalElements::new(
            self.semi_major_axis,
            self.eccentricity,
            self.inclination.to_radians(),
            self.raan.to_radians(),
            self.arg_perigee.to_radians(),
            self.true_anomaly.to_radians(),
            self.epoch,
        )
        .map_err(|e| e.to_string())
    }

    fn from_elements(el: &OrbitalElements) -> Self {
        Self {
            semi_major_axis: el.semi_major_axis(),
            eccentricity: el.eccentricity(),
            inclination: degrees_for(el.inclination()),
            raan: degrees_for(el.raan()),
            arg_perigee: degrees_for(el.arg_perigee()),
            true_anomaly: degrees_for(el.true_anomaly()),
            epoch: el.epoch(),
        }
    }
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<LoadedScenario, ScenarioError> {
        let body = |name: &str, section: Option<&BodySection>, default: CentralBody| match section {
            Some(b) => CentralBody::new(default.name(), b.mu, b.radius)
                .map_err(context(format!("bodies.{name}"))),
            None => Ok(default),
        };
        let bodies = self.bodies.as_ref();
        let earth = body(
            "earth",
            bodies.and_then(|b| b.earth.as_ref()),
            CentralBody::earth(),
        )?;
        let moon = body(
            "moon",
            bodies.and_then(|b| b.moon.as_ref()),
            CentralBody::moon(),
        )?;

        let moon_model = LunarEphemerisModel::new(
            self.moon.orbit_radius,
            self.moon
                .sidereal_period
                .to_base("moon.sidereal_period", Dimension::Time)?,
            self.moon.inclination.to_radians(),
            self.moon.phase_at_epoch.to_radians(),
        )
        .map_err(context("moon"))?;

        let mut geo_elements = Vec::with_capacity(self.geo.len());
        for (i, g) in self.geo.iter().enumerate() {
            let el = g.to_elements().map_err(context(format!("geo[{i}]")))?;
            el.check_body(&earth)
                .map_err(context(format!("geo[{i}]")))?;
            geo_elements.push(el);
        }
        let mut llo_elements = Vec::with_capacity(self.llo.len());
        for (i, l) in self.llo.iter().enumerate() {
            let el = l.to_elements().map_err(context(format!("llo[{i}]")))?;
            el.check_body(&moon).map_err(context(format!("llo[{i}]")))?;
            if el.semi_major_axis() >= cislunar_core::orbital::LUNAR_SOI_LIMIT_KM {
                return Err(ScenarioError::Validation(format!(
                    "llo[{i}]: semi_major_axis = {} km lies outside the lunar sphere of influence",
                    el.semi_major_axis()
                )));
            }
            llo_elements.push(el);
        }

        let b = &self.budget;
        let transmit_power = b
            .transmit_power
            .to_base("budget.transmit_power", Dimension::Power)?;
        let max_transmit_power = match &b.max_transmit_power {
            Some(q) => q.to_base("budget.max_transmit_power", Dimension::Power)?,
            None => transmit_power,
        };
        let budget = LinkBudgetParams::new(
            transmit_power,
            max_transmit_power,
            b.gain_tx.to_base("budget.gain_tx", Dimension::Ratio)?,
            b.gain_rx.to_base("budget.gain_rx", Dimension::Ratio)?,
            b.wavelength
                .to_base("budget.wavelength", Dimension::Length)?,
            b.noise_power
                .to_base("budget.noise_power", Dimension::Power)?,
            b.ris_insertion_loss
                .to_base("budget.ris_insertion_loss", Dimension::Ratio)?,
            b.snr_threshold
                .to_base("budget.snr_threshold", Dimension::Ratio)?,
        )
        .map_err(context("budget"))?;

        let area_mode: AreaMode = self
            .ris
            .area_mode
            .parse()
            .map_err(|e| ScenarioError::Validation(format!("ris.area_mode: {e}")))?;
        let ris = RisParams {
            elements: self.ris.elements,
            area_mode,
            directivity_constant: self.ris.k,
            max_area: self.ris.a_max,
            element_area: self.ris.element_area,
        };
        ris.validate().map_err(context("ris"))?;

        let scenario = Scenario {
            earth,
            moon,
            geo_elements,
            llo_elements,
            moon_model,
            ground_station: Vec3::from(self.run.ground_station),
            duration: self.run.duration.to_base("run.duration", Dimension::Time)?,
            sampling_interval: self
                .run
                .sampling_interval
                .to_base("run.sampling_interval", Dimension::Time)?,
            budget,
            ris,
        };
        scenario
            .validate()
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        Ok(LoadedScenario {
            scenario,
            output: self.run.output.map(PathBuf::from),
        })
    }

    /// Canonical document for a scenario: base units throughout and degrees
    /// chosen so that reloading reproduces the same radians.
    pub fn from_scenario(scenario: &Scenario, output: Option<&Path>) -> Self {
        let s = scenario;
        let body = |b: &CentralBody| BodySection {
            mu: b.gravitational_parameter(),
            radius: b.radius(),
        };
        let budget = &s.budget;
        Self {
            bodies: Some(BodiesSection {
                earth: Some(body(&s.earth)),
                moon: Some(body(&s.moon)),
            }),
            moon: MoonSection {
                orbit_radius: s.moon_model.orbit_radius(),
                sidereal_period: Quantity::Number(s.moon_model.sidereal_period()),
                inclination: degrees_for(s.moon_model.inclination()),
                phase_at_epoch: degrees_for(s.moon_model.phase_at_epoch()),
            },
            geo: s
                .geo_elements
                .iter()
                .map(ElementsSection::from_elements)
                .collect(),
            llo: s
                .llo_elements
                .iter()
                .map(ElementsSection::from_elements)
                .collect(),
            budget: BudgetSection {
                transmit_power: Quantity::Number(budget.transmit_power()),
                max_transmit_power: Some(Quantity::Number(budget.max_transmit_power())),
                gain_tx: Quantity::Number(budget.gain_tx()),
                gain_rx: Quantity::Number(budget.gain_rx()),
                wavelength: Quantity::Number(budget.wavelength()),
                noise_power: Quantity::Number(budget.noise_power()),
                ris_insertion_loss: Quantity::Number(budget.ris_insertion_loss()),
                snr_threshold: Quantity::Number(budget.snr_threshold()),
            },
            ris: RisSection {
                elements: s.ris.elements,
                area_mode: s.ris.area_mode.to_string(),
                k: s.ris.directivity_constant,
                a_max: s.ris.max_area,
                element_area: s.ris.element_area,
            },
            run: RunSection {
                duration: Quantity::Number(s.duration),
                sampling_interval: Quantity::Number(s.sampling_interval),
                ground_station: [s.ground_station.x, s.ground_station.y, s.ground_station.z],
                output: output.map(|p| p.display().to_string()),
            },
        }
    }
}

pub fn dump_scenario(scenario: &Scenario, output: Option<&Path>) -> String {
    toml::to_string(&ScenarioFile::from_scenario(scenario, output))
        .expect("scenario documents always serialize")
}

/// Degree value whose `to_radians` is exactly `rad`, when one exists within a
/// few ulps of `rad.to_degrees()`.
fn degrees_for(rad: f64) -> f64 {
    let guess = rad.to_degrees();
    let mut down = guess;
    let mut up = guess;
    for _ in 0..16 {
        if down.to_radians() == rad {
            return down;
        }
        if up.to_radians() == rad {
            return up;
        }
        down = down.next_down();
        up = up.next_up();
    }
    guess
}
