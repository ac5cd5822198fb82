//! Down-tilted BS vertical antenna pattern and urban-macro path loss.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Vertical pattern of the BS antenna.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaParams {
    /// Electrical down-tilt, degrees below the horizon.
    pub downtilt_deg: f64,
    /// Half-power beamwidth scale, degrees.
    pub theta3db_deg: f64,
    /// Side-lobe attenuation floor, dB (positive).
    pub sla_db: f64,
}

impl Default for AntennaParams {
    fn default() -> Self {
        Self {
            downtilt_deg: 15.0,
            theta3db_deg: 10.0,
            sla_db: 20.0,
        }
    }
}

impl AntennaParams {
    /// Angular offset from boresight at which the pattern reaches the
    /// side-lobe floor: `theta3db * sqrt(sla / 12)`.
    pub fn main_lobe_half_width_deg(&self) -> f64 {
        self.theta3db_deg * (self.sla_db / 12.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossParams {
    pub f_ghz: f64,
    /// Receiver heights at or above this use the aerial NLoS formula.
    pub breakpoint_height_m: f64,
}

impl Default for PathlossParams {
    fn default() -> Self {
        Self {
            f_ghz: 2.0,
            breakpoint_height_m: 22.5,
        }
    }
}

/// Vertical antenna gain in dB at depression angle `theta_deg`:
/// `-min(12 ((theta - tilt) / theta3db)^2, SLA)`.
pub fn vertical_gain(theta_deg: f64, params: &AntennaParams) -> f64 {
    let x = (theta_deg - params.downtilt_deg) / params.theta3db_deg;
    -(12.0 * x * x).min(params.sla_db)
}

/// Transmit power radiated toward `theta_deg`, dBm.
pub fn effective_tx_power(p_t_dbm: f64, theta_deg: f64, params: &AntennaParams) -> f64 {
    p_t_dbm + vertical_gain(theta_deg, params)
}

fn check_distance(d_m: f64) -> Result<()> {
    if d_m.is_finite() && d_m > 0.0 {
        Ok(())
    } else {
        Err(SimError::InvalidDistance(d_m))
    }
}

/// LoS path loss, dB: `28 + 22 log10(d) + 20 log10(f)`.
pub fn pl_los(d_m: f64, params: &PathlossParams) -> Result<f64> {
    check_distance(d_m)?;
    Ok(28.0 + 22.0 * d_m.log10() + 20.0 * params.f_ghz.log10())
}

/// Ground-level NLoS term used below the breakpoint height.
pub fn pl_nlos_ground(d_m: f64, receiver_height_m: f64, params: &PathlossParams) -> f64 {
    13.54 + 39.08 * d_m.log10() + 20.0 * params.f_ghz.log10() - 0.6 * (receiver_height_m - 1.5)
}

/// Aerial NLoS term used at or above the breakpoint height.
pub fn pl_nlos_aerial(d_m: f64, receiver_height_m: f64, params: &PathlossParams) -> f64 {
    -17.5
        + (46.0 - 7.0 * receiver_height_m.log10()) * d_m.log10()
        + 20.0 * (40.0 * std::f64::consts::PI * params.f_ghz / 3.0).log10()
}

/// NLoS path loss, dB. Receivers strictly below the breakpoint height get
/// `max(PL_LoS, PL_ground)`; the breakpoint itself belongs to the aerial
/// branch.
pub fn pl_nlos(d_m: f64, receiver_height_m: f64, params: &PathlossParams) -> Result<f64> {
    check_distance(d_m)?;
    if !(receiver_height_m.is_finite() && receiver_height_m > 0.0) {
        return Err(SimError::invalid(
            "receiver_height_m",
            format!("must be > 0, got {receiver_height_m}"),
        ));
    }
    if receiver_height_m < params.breakpoint_height_m {
        Ok(pl_los(d_m, params)?.max(pl_nlos_ground(d_m, receiver_height_m, params)))
    } else {
        Ok(pl_nlos_aerial(d_m, receiver_height_m, params))
    }
}

/// Loss of the BS -> element segment of a reflected path.
pub fn pl_bs_to_element(d1_m: f64, receiver_height_m: f64, params: &PathlossParams) -> Result<f64> {
    pl_nlos(d1_m, receiver_height_m, params)
}

/// Distance-related loss added by the element -> UAV segment:
/// `PL_NLoS(d1 + d2) - PL_NLoS(d1)` at the same receiver height.
pub fn pl_element_to_uav(
    d1_m: f64,
    d2_m: f64,
    receiver_height_m: f64,
    params: &PathlossParams,
) -> Result<f64> {
    check_distance(d2_m)?;
    Ok(pl_nlos(d1_m + d2_m, receiver_height_m, params)?
        - pl_nlos(d1_m, receiver_height_m, params)?)
}
