//! Scenario configuration: every physical parameter of the BS / IRS / UAV
//! layout, with the default deployment used throughout the experiments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ReflectionParams;
use crate::error::{Result, SimError};
use crate::propagation::{AntennaParams, PathlossParams};

/// How the passive-wall reference rays are phased when they reach the UAV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineMode {
    /// Every wall ray arrives in phase with the LoS ray (amplitude sum).
    #[default]
    InPhase,
    /// Ray phase follows its own BS -> scatter point -> UAV path length.
    Geometric,
    /// Ray phase drawn uniformly in [0, 2pi) each run.
    UniformPhase,
}

impl BaselineMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMode::InPhase => "in-phase",
            BaselineMode::Geometric => "geometric",
            BaselineMode::UniformPhase => "uniform-phase",
        }
    }
}

impl fmt::Display for BaselineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "in-phase" | "in_phase" => Ok(BaselineMode::InPhase),
            "geometric" => Ok(BaselineMode::Geometric),
            "uniform-phase" | "uniform_phase" => Ok(BaselineMode::UniformPhase),
            other => Err(format!(
                "unknown baseline mode `{other}` (expected in-phase, geometric or uniform-phase)"
            )),
        }
    }
}

/// All physical parameters of one deployment.
///
/// Heights and distances are in meters, powers in dBm, losses in dB and the
/// carrier frequency in GHz. `uav_x_m = None` places the UAV half way
/// between the BS and the IRS wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub f_ghz: f64,
    pub p_t_dbm: f64,
    pub theta_etilt_deg: f64,
    pub theta_3db_deg: f64,
    pub sla_db: f64,
    pub breakpoint_height_m: f64,
    pub pl_irs_db: f64,
    pub pl_wall_db: f64,
    pub h_bs_m: f64,
    pub h_uav_m: f64,
    pub h_irs_m: f64,
    pub irs_rows: usize,
    pub irs_cols: usize,
    pub element_pitch_m: f64,
    pub l_m: f64,
    pub uav_x_m: Option<f64>,
    pub uav_y_m: f64,
    pub baseline_mode: BaselineMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            f_ghz: 2.0,
            p_t_dbm: 46.0,
            theta_etilt_deg: 15.0,
            theta_3db_deg: 10.0,
            sla_db: 20.0,
            breakpoint_height_m: 22.5,
            pl_irs_db: 1.0,
            pl_wall_db: 10.0,
            h_bs_m: 25.0,
            h_uav_m: 50.0,
            h_irs_m: 10.0,
            irs_rows: 10,
            irs_cols: 10,
            element_pitch_m: 0.02,
            l_m: 50.0,
            uav_x_m: None,
            uav_y_m: 0.0,
            baseline_mode: BaselineMode::InPhase,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SimError::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(SimError::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SimError::invalid(name, format!("must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    /// Number of IRS elements (rows x cols). Zero means no IRS is deployed.
    pub fn k(&self) -> usize {
        self.irs_rows * self.irs_cols
    }

    pub fn uav_x(&self) -> f64 {
        self.uav_x_m.unwrap_or(self.l_m / 2.0)
    }

    /// Sets the IRS to a near-square `rows x cols` grid holding exactly `k`
    /// elements: rows is the largest divisor of `k` not above sqrt(k).
    pub fn set_k_near_square(&mut self, k: usize) {
        let (rows, cols) = near_square(k);
        self.irs_rows = rows;
        self.irs_cols = cols;
    }

    pub fn antenna(&self) -> AntennaParams {
        AntennaParams {
            downtilt_deg: self.theta_etilt_deg,
            theta3db_deg: self.theta_3db_deg,
            sla_db: self.sla_db,
        }
    }

    pub fn pathloss(&self) -> PathlossParams {
        PathlossParams {
            f_ghz: self.f_ghz,
            breakpoint_height_m: self.breakpoint_height_m,
        }
    }

    pub fn reflection(&self) -> ReflectionParams {
        ReflectionParams {
            pl_irs_db: self.pl_irs_db,
            pl_wall_db: self.pl_wall_db,
        }
    }

    /// Range checks on every field. A zero-element IRS is accepted here.
    pub fn validate(&self) -> Result<()> {
        positive("f_ghz", self.f_ghz)?;
        finite("p_t_dbm", self.p_t_dbm)?;
        finite("theta_etilt_deg", self.theta_etilt_deg)?;
        positive("theta_3db_deg", self.theta_3db_deg)?;
        positive("sla_db", self.sla_db)?;
        positive("breakpoint_height_m", self.breakpoint_height_m)?;
        non_negative("pl_irs_db", self.pl_irs_db)?;
        non_negative("pl_wall_db", self.pl_wall_db)?;
        positive("h_bs_m", self.h_bs_m)?;
        positive("h_uav_m", self.h_uav_m)?;
        positive("h_irs_m", self.h_irs_m)?;
        positive("element_pitch_m", self.element_pitch_m)?;
        positive("l_m", self.l_m)?;
        if let Some(x) = self.uav_x_m {
            finite("uav_x_m", x)?;
        }
        finite("uav_y_m", self.uav_y_m)?;
        let half_height = self.irs_rows.saturating_sub(1) as f64 * self.element_pitch_m / 2.0;
        if self.h_irs_m - half_height < 0.0 {
            return Err(SimError::invalid(
                "h_irs_m",
                format!("IRS patch extends below ground (half height {half_height} m)"),
            ));
        }
        Ok(())
    }
}

/// `(rows, cols)` with `rows * cols == k` and rows the largest divisor of
/// `k` that does not exceed sqrt(k). `k = 0` maps to `(0, 0)`.
pub fn near_square(k: usize) -> (usize, usize) {
    if k == 0 {
        return (0, 0);
    }
    let mut rows = (k as f64).sqrt().floor() as usize;
    while rows * rows > k {
        rows -= 1;
    }
    while k % rows != 0 {
        rows -= 1;
    }
    (rows, k / rows)
}
