//! Free-space loss, reflected received power and SNR.
//!
//! Distances enter in km and are converted to metres once; everything else is
//! SI (W, m). The reflected-path received power is
//!
//! ```text
//! P_r = L_ris · P_t·G_t·G_r·λ²·A_eff / ((4π)³ · d_er² · d_rm²)
//! ```

use std::f64::consts::PI;

use thiserror::Error;

use crate::ris::EffectiveArea;

/// Reported SNR never drops below this, dB.
pub const SNR_DB_FLOOR: f64 = -300.0;
/// Linear SNR at or below which the floor applies.
pub const SNR_LINEAR_FLOOR: f64 = 1e-30;

const METRES_PER_KM: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BudgetError {
    #[error("{quantity} must be positive, got {value}")]
    NonPositive { quantity: &'static str, value: f64 },
    #[error("{quantity} = {value} is out of range: {reason}")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        reason: &'static str,
    },
}

pub mod db {
    //! Decibel conversions. Log-domain conversions reject non-positive input.

    use super::BudgetError;

    pub fn db_to_linear(db: f64) -> f64 {
        10f64.powf(db / 10.0)
    }

    pub fn linear_to_db(linear: f64) -> Result<f64, BudgetError> {
        if !(linear > 0.0) {
            return Err(BudgetError::NonPositive {
                quantity: "linear ratio",
                value: linear,
            });
        }
        Ok(10.0 * linear.log10())
    }

    /// Antenna gain in dBi to a linear power ratio.
    pub fn dbi_to_linear(dbi: f64) -> f64 {
        db_to_linear(dbi)
    }

    pub fn dbm_to_watts(dbm: f64) -> f64 {
        10f64.powf((dbm - 30.0) / 10.0)
    }

    pub fn watts_to_dbm(watts: f64) -> Result<f64, BudgetError> {
        if !(watts > 0.0) {
            return Err(BudgetError::NonPositive {
                quantity: "power",
                value: watts,
            });
        }
        Ok(10.0 * watts.log10() + 30.0)
    }

    pub fn dbw_to_watts(dbw: f64) -> f64 {
        db_to_linear(dbw)
    }
}

/// Link parameters in SI units and linear ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetParams {
    transmit_power: f64,
    max_transmit_power: f64,
    gain_tx: f64,
    gain_rx: f64,
    wavelength: f64,
    noise_power: f64,
    ris_insertion_loss: f64,
    snr_threshold: f64,
}

impl LinkBudgetParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        transmit_power: f64,
        max_transmit_power: f64,
        gain_tx: f64,
        gain_rx: f64,
        wavelength: f64,
        noise_power: f64,
        ris_insertion_loss: f64,
        snr_threshold: f64,
    ) -> Result<Self, BudgetError> {
        let positive = |quantity: &'static str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(BudgetError::NonPositive { quantity, value })
            }
        };
        positive("gain_tx", gain_tx)?;
        positive("gain_rx", gain_rx)?;
        positive("wavelength", wavelength)?;
        positive("noise_power", noise_power)?;
        positive("snr_threshold", snr_threshold)?;
        if !(max_transmit_power.is_finite() && max_transmit_power >= 0.0) {
            return Err(BudgetError::OutOfRange {
                quantity: "max_transmit_power",
                value: max_transmit_power,
                reason: "must be finite and non-negative",
            });
        }
        if !(transmit_power.is_finite() && (0.0..=max_transmit_power).contains(&transmit_power)) {
            return Err(BudgetError::OutOfRange {
                quantity: "transmit_power",
                value: transmit_power,
                reason: "must satisfy 0 <= P_t <= max_transmit_power",
            });
        }
        if !(ris_insertion_loss > 0.0 && ris_insertion_loss <= 1.0) {
            return Err(BudgetError::OutOfRange {
                quantity: "ris_insertion_loss",
                value: ris_insertion_loss,
                reason: "must lie in (0, 1]",
            });
        }
        Ok(Self {
            transmit_power,
            max_transmit_power,
            gain_tx,
            gain_rx,
            wavelength,
            noise_power,
            ris_insertion_loss,
            snr_threshold,
        })
    }

    /// 40 kW, 30 dBi / 20 dBi, λ = 0.03 m, N = −100 dBm, L_ris = 0.9, γ_th = 2 dB.
    pub fn reference() -> Self {
        Self::new(
            40_000.0,
            40_000.0,
            db::dbi_to_linear(30.0),
            db::dbi_to_linear(20.0),
            0.03,
            db::dbm_to_watts(-100.0),
            0.9,
            db::db_to_linear(2.0),
        )
        .expect("reference parameters are valid")
    }

    /// Same parameters at a different transmit power.
    pub fn with_transmit_power(self, transmit_power: f64) -> Result<Self, BudgetError> {
        Self::new(
            transmit_power,
            self.max_transmit_power,
            self.gain_tx,
            self.gain_rx,
            self.wavelength,
            self.noise_power,
            self.ris_insertion_loss,
            self.snr_threshold,
        )
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }
    pub fn max_transmit_power(&self) -> f64 {
        self.max_transmit_power
    }
    pub fn gain_tx(&self) -> f64 {
        self.gain_tx
    }
    pub fn gain_rx(&self) -> f64 {
        self.gain_rx
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
    pub fn ris_insertion_loss(&self) -> f64 {
        self.ris_insertion_loss
    }
    pub fn snr_threshold(&self) -> f64 {
        self.snr_threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrResult {
    pub snr_linear: f64,
    /// Floored at [`SNR_DB_FLOOR`].
    pub snr_db: f64,
    /// W
    pub received_power: f64,
    /// `snr_linear >= γ_th`
    pub feasible: bool,
}

/// `(4π·d/λ)²` with `d` in km and `λ` in m.
pub fn free_space_path_loss(distance_km: f64, wavelength_m: f64) -> Result<f64, BudgetError> {
    check_distance("distance", distance_km)?;
    if !(wavelength_m.is_finite() && wavelength_m > 0.0) {
        return Err(BudgetError::NonPositive {
            quantity: "wavelength",
            value: wavelength_m,
        });
    }
    let ratio = 4.0 * PI * (distance_km * METRES_PER_KM) / wavelength_m;
    Ok(ratio * ratio)
}

/// Received power (W) over the reflected path, including the surface
/// insertion loss.
pub fn received_power(
    params: &LinkBudgetParams,
    a_eff: EffectiveArea,
    d_er_km: f64,
    d_rm_km: f64,
) -> Result<f64, BudgetError> {
    check_distance("d_er", d_er_km)?;
    check_distance("d_rm", d_rm_km)?;
    let d_er = d_er_km * METRES_PER_KM;
    let d_rm = d_rm_km * METRES_PER_KM;
    let numerator = params.ris_insertion_loss
        * params.transmit_power
        * params.gain_tx
        * params.gain_rx
        * (params.wavelength * params.wavelength)
        * a_eff.value();
    // The distance product is formed first so swapping the legs is exact.
    let spreading = (d_er * d_er) * (d_rm * d_rm);
    Ok(numerator / ((4.0 * PI).powi(3) * spreading))
}

pub fn snr(
    params: &LinkBudgetParams,
    a_eff: EffectiveArea,
    d_er_km: f64,
    d_rm_km: f64,
) -> Result<SnrResult, BudgetError> {
    let received_power = received_power(params, a_eff, d_er_km, d_rm_km)?;
    let snr_linear = received_power / params.noise_power;
    Ok(SnrResult {
        snr_linear,
        snr_db: floored_db(snr_linear),
        received_power,
        feasible: snr_linear >= params.snr_threshold,
    })
}

/// SNR grows monotonically with `P_t`, so the power constraint binds at its
/// upper end.
pub fn optimal_transmit_power(params: &LinkBudgetParams) -> f64 {
    params.max_transmit_power
}

/// `10·log₁₀(x)` above [`SNR_LINEAR_FLOOR`], otherwise [`SNR_DB_FLOOR`].
pub fn floored_db(linear: f64) -> f64 {
    if linear > SNR_LINEAR_FLOOR {
        10.0 * linear.log10()
    } else {
        SNR_DB_FLOOR
    }
}

fn check_distance(quantity: &'static str, km: f64) -> Result<(), BudgetError> {
    if km.is_finite() && km > 0.0 {
        Ok(())
    } else {
        Err(BudgetError::NonPositive {
            quantity,
            value: km,
        })
    }
}
