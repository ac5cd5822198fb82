//! Link-level simulator for a cellular downlink to a UAV, assisted by an
//! intelligent reflecting surface (IRS) on a building wall.
//!
//! The BS antenna is tilted down toward ground users, so a UAV flying above
//! the BS sits in the side lobes. An IRS placed inside the main lobe can
//! collect energy and re-phase it onto the UAV. The crate computes that
//! link, compares it with a passive wall of the same size, and sweeps or
//! optimises the deployment.
//!
//! ```
//! use irs_uav::{irs_gain, MonteCarloConfig, ScenarioConfig};
//!
//! let mc = MonteCarloConfig { n_runs: 100, ..Default::default() };
//! let r = irs_gain(&ScenarioConfig::default(), &mc).unwrap();
//! assert!(r.gain_db > 15.0);
//! ```

pub mod channel;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod propagation;
pub mod scenario;
pub mod simulator;

pub use channel::{combine, dbm_to_amplitude, ChannelCoefficient, ChannelModel, PhaseMode, ReflectionParams};
pub use error::{Result, SimError};
pub use experiments::{
    component_amplitudes, optimal_distance, run_sweep, ComponentAmplitudes, PlacementOptimum, SweepParam,
    SweepResult, SweepSpec,
};
pub use geometry::{Position3D, ScenarioGeometry};
pub use propagation::{AntennaParams, PathlossParams};
pub use scenario::{BaselineMode, ScenarioConfig};
pub use simulator::{irs_amplitude, irs_gain, wall_power_estimate, GainResult, MonteCarloConfig};
