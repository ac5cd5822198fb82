//! IRS-assisted link evaluation and the Monte Carlo passive-wall reference.
//!
//! The IRS link is deterministic: every element is re-phased onto the LoS
//! arrival, so the received amplitude is the plain sum of path amplitudes.
//! The wall reference re-samples its scatter points on every run. Run `r`
//! draws from its own generator, seeded by [`run_seed`], so results do not
//! depend on how runs are scheduled across threads.

use std::f64::consts::{LN_10, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{combine, ChannelCoefficient, ChannelModel, PhaseMode};
use crate::error::{Result, SimError};
use crate::geometry::{sample_scatter_point, ScenarioGeometry};
use crate::scenario::{BaselineMode, ScenarioConfig};

pub const DEFAULT_MASTER_SEED: u64 = 2020;

/// Identity of the per-run random stream, recorded in run manifests.
pub const GENERATOR_ID: &str =
    "rand_chacha::ChaCha8Rng::seed_from_u64(splitmix64 stream of master_seed, output run+1)";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of Monte Carlo run `run`: output `run + 1` of a SplitMix64
/// generator whose state starts at `master_seed`.
pub fn run_seed(master_seed: u64, run: u64) -> u64 {
    splitmix64_mix(master_seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(run.wrapping_add(1))))
}

pub fn run_rng(master_seed: u64, run: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(run_seed(master_seed, run))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub n_runs: usize,
    pub n_rays: usize,
    pub master_seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            n_runs: 10_000,
            n_rays: 20,
            master_seed: DEFAULT_MASTER_SEED,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(SimError::invalid("n_runs", "must be >= 1"));
        }
        Ok(())
    }
}

/// Amplitudes of the IRS-assisted link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrsLink {
    pub los_amplitude: f64,
    pub irs_sum_amplitude: f64,
    pub gamma_irs: f64,
}

pub fn irs_link(cfg: &ScenarioConfig) -> Result<IrsLink> {
    let geom = ScenarioGeometry::from_config(cfg)?;
    let model = ChannelModel::new(&geom, cfg);
    let los = model.los_coefficient()?;
    let elements = model.element_coefficients(PhaseMode::AlignedToLos)?;
    let irs_sum_amplitude = elements.iter().map(|c| c.amplitude).sum();
    let mut paths = Vec::with_capacity(elements.len() + 1);
    paths.push(los);
    paths.extend(elements);
    Ok(IrsLink {
        los_amplitude: los.amplitude,
        irs_sum_amplitude,
        gamma_irs: combine(&paths)?,
    })
}

/// Received amplitude with the IRS in place (LoS plus all aligned elements).
pub fn irs_amplitude(cfg: &ScenarioConfig) -> Result<f64> {
    Ok(irs_link(cfg)?.gamma_irs)
}

/// One Monte Carlo realisation of the wall reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallRun {
    /// `|LoS + wall rays|^2`, mW.
    pub total_power_mw: f64,
    /// `|wall rays|^2` alone, mW.
    pub reflection_power_mw: f64,
}

fn simulate_wall_run(
    model: &ChannelModel<'_>,
    los: ChannelCoefficient,
    mode: BaselineMode,
    n_rays: usize,
    rng: &mut ChaCha8Rng,
) -> Result<WallRun> {
    let mut wall = Complex64::new(0.0, 0.0);
    for _ in 0..n_rays {
        let point = sample_scatter_point(model.geom, rng);
        let ray = model.wall_ray_coefficient(point)?;
        let ray = match mode {
            BaselineMode::Geometric => ray,
            BaselineMode::InPhase => ray.with_phase(los.phase),
            BaselineMode::UniformPhase => ray.with_phase(rng.random::<f64>() * TAU),
        };
        wall += ray.to_complex();
    }
    Ok(WallRun {
        total_power_mw: (los.to_complex() + wall).norm_sqr(),
        reflection_power_mw: wall.norm_sqr(),
    })
}

/// Every wall-reference run, in run order.
///
/// Each ray consumes two uniform draws (scatter point y, then z); in
/// uniform-phase mode a third draw sets its phase.
pub fn wall_runs(cfg: &ScenarioConfig, mc: &MonteCarloConfig) -> Result<Vec<WallRun>> {
    mc.validate()?;
    let geom = ScenarioGeometry::from_config(cfg)?;
    let model = ChannelModel::new(&geom, cfg);
    let los = model.los_coefficient()?;
    (0..mc.n_runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = run_rng(mc.master_seed, r);
            simulate_wall_run(&model, los, cfg.baseline_mode, mc.n_rays, &mut rng)
        })
        .collect()
}

/// Sample statistics of the wall reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallEstimate {
    pub mean_power_mw: f64,
    pub std_error_mw: f64,
    /// Mean of the reflected-only power, mW.
    pub mean_reflection_power_mw: f64,
}

fn mean_and_std_error(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    // sequential sums keep the result independent of the thread count;
    // shifting by the first sample makes constant data exact
    let shift = xs.clone().next().unwrap_or(0.0);
    let mean = shift + xs.clone().map(|x| x - shift).sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt())
}

pub fn wall_power_estimate(cfg: &ScenarioConfig, mc: &MonteCarloConfig) -> Result<WallEstimate> {
    let runs = wall_runs(cfg, mc)?;
    let (mean_power_mw, std_error_mw) =
        mean_and_std_error(runs.iter().map(|r| r.total_power_mw), runs.len());
    let mean_reflection_power_mw =
        runs.iter().map(|r| r.reflection_power_mw).sum::<f64>() / runs.len() as f64;
    Ok(WallEstimate {
        mean_power_mw,
        std_error_mw,
        mean_reflection_power_mw,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainResult {
    pub gamma_irs: f64,
    pub mean_wall_power_mw: f64,
    pub gain_db: f64,
    pub std_error_db: f64,
    pub los_amplitude: f64,
    pub irs_sum_amplitude: f64,
    /// RMS amplitude of the wall rays alone over all runs.
    pub mean_wall_reflection_amplitude: f64,
}

/// IRS gain: `10 log10(gamma_irs^2 / E[gamma_wall^2])`, with the standard
/// error of the wall-power mean carried into dB.
pub fn irs_gain(cfg: &ScenarioConfig, mc: &MonteCarloConfig) -> Result<GainResult> {
    let link = irs_link(cfg)?;
    let wall = wall_power_estimate(cfg, mc)?;
    let gain_db = 10.0 * (link.gamma_irs * link.gamma_irs / wall.mean_power_mw).log10();
    Ok(GainResult {
        gamma_irs: link.gamma_irs,
        mean_wall_power_mw: wall.mean_power_mw,
        gain_db,
        std_error_db: 10.0 / LN_10 * wall.std_error_mw / wall.mean_power_mw,
        los_amplitude: link.los_amplitude,
        irs_sum_amplitude: link.irs_sum_amplitude,
        mean_wall_reflection_amplitude: wall.mean_reflection_power_mw.sqrt(),
    })
}
