//! Passive reflecting surface model.
//!
//! Each element `i` carries a phase `φᵢ` and an area `aᵢ`. Its contribution to
//! the coherent aperture follows the cos² alignment law
//!
//! ```text
//! A_eff = Σᵢ k · aᵢ · cos²(φ_opt − φᵢ)
//! ```
//!
//! where `k` converts physical area into directivity and `φ_opt` is the
//! geometric reflection angle of the current link.

use thiserror::Error;

use crate::normalize_angle;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RisError {
    #[error("a reflecting surface needs at least one element")]
    NoElements,
    #[error("phase and area lists differ in length ({phases} vs {areas})")]
    LengthMismatch { phases: usize, areas: usize },
    #[error("element {index} has invalid area {value} m^2")]
    InvalidArea { index: usize, value: f64 },
    #[error("element {index} has non-finite phase {value}")]
    InvalidPhase { index: usize, value: f64 },
    #[error("directivity constant must be positive, got {0}")]
    InvalidDirectivity(f64),
    #[error("total element area {total} m^2 exceeds the budget of {budget} m^2")]
    AreaBudgetExceeded { total: f64, budget: f64 },
    #[error("invalid area budget {0} m^2")]
    InvalidBudget(f64),
}

/// Phase and area of every element plus the directivity constant `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisConfiguration {
    element_phases: Vec<f64>,
    element_areas: Vec<f64>,
    directivity_constant: f64,
}

impl RisConfiguration {
    /// Phases are wrapped into `[0, 2π)`.
    pub fn new(
        element_phases: Vec<f64>,
        element_areas: Vec<f64>,
        directivity_constant: f64,
    ) -> Result<Self, RisError> {
        if element_phases.is_empty() {
            return Err(RisError::NoElements);
        }
        if element_phases.len() != element_areas.len() {
            return Err(RisError::LengthMismatch {
                phases: element_phases.len(),
                areas: element_areas.len(),
            });
        }
        if !(directivity_constant.is_finite() && directivity_constant > 0.0) {
            return Err(RisError::InvalidDirectivity(directivity_constant));
        }
        if let Some((index, &value)) = element_areas
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a > 0.0))
        {
            return Err(RisError::InvalidArea { index, value });
        }
        if let Some((index, &value)) = element_phases
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite())
        {
            return Err(RisError::InvalidPhase { index, value });
        }
        Ok(Self {
            element_phases: element_phases.into_iter().map(normalize_angle).collect(),
            element_areas,
            directivity_constant,
        })
    }

    /// Like [`RisConfiguration::new`] but also enforces `Σ aᵢ ≤ a_max`.
    pub fn with_area_budget(
        element_phases: Vec<f64>,
        element_areas: Vec<f64>,
        directivity_constant: f64,
        a_max: f64,
    ) -> Result<Self, RisError> {
        if !(a_max.is_finite() && a_max > 0.0) {
            return Err(RisError::InvalidBudget(a_max));
        }
        let config = Self::new(element_phases, element_areas, directivity_constant)?;
        let total = config.total_area();
        // One part in 1e12 absorbs the rounding of an equal A_max/M split.
        if total > a_max * (1.0 + 1e-12) {
            return Err(RisError::AreaBudgetExceeded {
                total,
                budget: a_max,
            });
        }
        Ok(config)
    }

    pub fn len(&self) -> usize {
        self.element_phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element_phases.is_empty()
    }

    pub fn element_phases(&self) -> &[f64] {
        &self.element_phases
    }

    pub fn element_areas(&self) -> &[f64] {
        &self.element_areas
    }

    pub fn directivity_constant(&self) -> f64 {
        self.directivity_constant
    }

    /// Σ aᵢ, m².
    pub fn total_area(&self) -> f64 {
        compensated_sum(self.element_areas.iter().copied())
    }

    /// Upper bound k·Σaᵢ reached when every element is aligned.
    pub fn max_effective_area(&self) -> f64 {
        self.directivity_constant * self.total_area()
    }
}

/// Coherent reflecting aperture in m².
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EffectiveArea(f64);

impl EffectiveArea {
    pub fn new(value: f64) -> Option<Self> {
        (value.is_finite() && value >= 0.0).then_some(Self(value))
    }

    pub fn zero() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `Σ k·aᵢ·cos²(φ_opt − φᵢ)` with compensated summation.
pub fn effective_area(config: &RisConfiguration, phi_opt: f64) -> EffectiveArea {
    let weighted = compensated_sum(config.element_phases.iter().zip(&config.element_areas).map(
        |(&phase, &area)| {
            let c = (phi_opt - phase).cos();
            area * (c * c)
        },
    ));
    EffectiveArea(config.directivity_constant * weighted)
}

/// Every element set to `φ_opt` wrapped into `[0, 2π)`.
pub fn optimal_configuration(
    element_areas: Vec<f64>,
    directivity_constant: f64,
    phi_opt: f64,
) -> Result<RisConfiguration, RisError> {
    let phase = normalize_angle(phi_opt);
    RisConfiguration::new(
        vec![phase; element_areas.len()],
        element_areas,
        directivity_constant,
    )
}

/// Shifts every phase by `delta`; areas and `k` are untouched.
pub fn apply_misalignment(config: &RisConfiguration, delta: f64) -> RisConfiguration {
    RisConfiguration {
        element_phases: config
            .element_phases
            .iter()
            .map(|&p| normalize_angle(p + delta))
            .collect(),
        element_areas: config.element_areas.clone(),
        directivity_constant: config.directivity_constant,
    }
}

/// How element areas scale with the element count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaMode {
    /// `aᵢ = A_max / M`; total aperture pinned to the budget.
    FixedTotal,
    /// Every element has the same fixed area; aperture grows with M.
    FixedElement,
}

impl AreaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AreaMode::FixedTotal => "fixed-total",
            AreaMode::FixedElement => "fixed-element",
        }
    }
}

impl std::str::FromStr for AreaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed-total" => Ok(AreaMode::FixedTotal),
            "fixed-element" => Ok(AreaMode::FixedElement),
            other => Err(format!(
                "unknown area mode {other:?} (expected fixed-total or fixed-element)"
            )),
        }
    }
}

impl std::fmt::Display for AreaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Surface sizing parameters from which a configuration is built at each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisParams {
    pub elements: usize,
    pub area_mode: AreaMode,
    pub directivity_constant: f64,
    /// A_max, m².
    pub max_area: f64,
    /// Per-element area in [`AreaMode::FixedElement`], m².
    pub element_area: f64,
}

impl Default for RisParams {
    fn default() -> Self {
        Self {
            elements: 100,
            area_mode: AreaMode::FixedTotal,
            directivity_constant: 0.1,
            max_area: 100.0,
            element_area: 1.0,
        }
    }
}

impl RisParams {
    pub fn validate(&self) -> Result<(), RisError> {
        if self.elements == 0 {
            return Err(RisError::NoElements);
        }
        if !(self.directivity_constant.is_finite() && self.directivity_constant > 0.0) {
            return Err(RisError::InvalidDirectivity(self.directivity_constant));
        }
        if !(self.max_area.is_finite() && self.max_area > 0.0) {
            return Err(RisError::InvalidBudget(self.max_area));
        }
        if !(self.element_area.is_finite() && self.element_area > 0.0) {
            return Err(RisError::InvalidArea {
                index: 0,
                value: self.element_area,
            });
        }
        Ok(())
    }

    pub fn with_elements(self, elements: usize) -> Self {
        Self { elements, ..self }
    }

    pub fn with_area_mode(self, area_mode: AreaMode) -> Self {
        Self { area_mode, ..self }
    }

    pub fn element_areas(&self) -> Vec<f64> {
        let area = match self.area_mode {
            AreaMode::FixedTotal => self.max_area / self.elements as f64,
            AreaMode::FixedElement => self.element_area,
        };
        vec![area; self.elements]
    }

    /// Aligned configuration for the given reflection angle. The area budget
    /// only binds in [`AreaMode::FixedTotal`].
    pub fn optimal_for(&self, phi_opt: f64) -> Result<RisConfiguration, RisError> {
        self.validate()?;
        let config =
            optimal_configuration(self.element_areas(), self.directivity_constant, phi_opt)?;
        if self.area_mode == AreaMode::FixedTotal {
            let total = config.total_area();
            if total > self.max_area * (1.0 + 1e-12) {
                return Err(RisError::AreaBudgetExceeded {
                    total,
                    budget: self.max_area,
                });
            }
        }
        Ok(config)
    }
}

// Neumaier summation.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}
