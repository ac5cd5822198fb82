//! Parameter sweeps over the deployment and the search for the BS-IRS
//! distance that maximises the IRS gain.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scenario::ScenarioConfig;
use crate::simulator::{irs_gain, GainResult, MonteCarloConfig, GENERATOR_ID};

/// A scenario parameter that a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    /// Number of IRS elements, laid out as a near-square grid.
    K,
    HUav,
    /// BS-IRS distance; the UAV stays at the midpoint unless pinned.
    L,
    HIrs,
    F,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [
        SweepParam::K,
        SweepParam::HUav,
        SweepParam::L,
        SweepParam::HIrs,
        SweepParam::F,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::K => "k",
            SweepParam::HUav => "h-uav",
            SweepParam::L => "l",
            SweepParam::HIrs => "h-irs",
            SweepParam::F => "f",
        }
    }

    /// Configuration key, also used as the CSV column name.
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::K => "k",
            SweepParam::HUav => "h_uav_m",
            SweepParam::L => "l_m",
            SweepParam::HIrs => "h_irs_m",
            SweepParam::F => "f_ghz",
        }
    }

    pub fn axis_label(self) -> &'static str {
        match self {
            SweepParam::K => "Number of IRS elements K",
            SweepParam::HUav => "UAV height H_UAV (m)",
            SweepParam::L => "BS-IRS distance L (m)",
            SweepParam::HIrs => "IRS height H_IRS (m)",
            SweepParam::F => "Carrier frequency f (GHz)",
        }
    }

    pub fn value_in(self, cfg: &ScenarioConfig) -> f64 {
        match self {
            SweepParam::K => cfg.k() as f64,
            SweepParam::HUav => cfg.h_uav_m,
            SweepParam::L => cfg.l_m,
            SweepParam::HIrs => cfg.h_irs_m,
            SweepParam::F => cfg.f_ghz,
        }
    }

    pub fn apply(self, cfg: &mut ScenarioConfig, value: f64) -> Result<()> {
        match self {
            SweepParam::K => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= 1e7) {
                    return Err(SimError::invalid("k", format!("must be a positive integer, got {value}")));
                }
                cfg.set_k_near_square(value as usize);
            }
            SweepParam::HUav => cfg.h_uav_m = value,
            SweepParam::L => cfg.l_m = value,
            SweepParam::HIrs => cfg.h_irs_m = value,
            SweepParam::F => cfg.f_ghz = value,
        }
        Ok(())
    }

    /// Grid used when a sweep does not give explicit values.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::K => vec![25.0, 36.0, 49.0, 64.0, 81.0, 100.0],
            SweepParam::HUav => default_h_uav_grid(),
            SweepParam::L => default_l_grid(),
            SweepParam::HIrs => (1..=10).map(|i| 2.0 * i as f64).collect(),
            SweepParam::F => vec![2.0, 4.0, 5.0],
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let norm = norm
            .strip_suffix("-m")
            .or_else(|| norm.strip_suffix("-ghz"))
            .unwrap_or(&norm);
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| format!("unknown sweep parameter `{s}` (expected k, h-uav, l, h-irs or f)"))
    }
}

/// 1 m steps over [20, 30] m followed by 10 m steps up to 150 m.
pub fn default_h_uav_grid() -> Vec<f64> {
    (20..=30)
        .map(f64::from)
        .chain((4..=15).map(|i| 10.0 * i as f64))
        .collect()
}

/// 5 m steps over [10, 100] m.
pub fn default_l_grid() -> Vec<f64> {
    (2..=20).map(|i| 5.0 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub overlay: Option<Overlay>,
    pub base: ScenarioConfig,
    pub mc: MonteCarloConfig,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>, base: ScenarioConfig, mc: MonteCarloConfig) -> Self {
        Self {
            param,
            values,
            overlay: None,
            base,
            mc,
        }
    }

    pub fn with_overlay(mut self, param: SweepParam, values: Vec<f64>) -> Self {
        self.overlay = Some(Overlay { param, values });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(SimError::invalid("values", "sweep grid is empty"));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SimError::invalid("values", "sweep grid must be strictly increasing"));
        }
        if let Some(ov) = &self.overlay {
            if ov.param == self.param {
                return Err(SimError::invalid("overlay", "overlay parameter equals the swept parameter"));
            }
            if ov.values.is_empty() {
                return Err(SimError::invalid("overlay", "overlay has no values"));
            }
            for (i, a) in ov.values.iter().enumerate() {
                if ov.values[i + 1..].contains(a) {
                    return Err(SimError::invalid("overlay", format!("duplicate overlay value {a}")));
                }
            }
        }
        self.mc.validate()
    }

    /// Grid points in output order: overlay-major, then swept value.
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        match &self.overlay {
            None => self.values.iter().map(|&v| (v, None)).collect(),
            Some(ov) => ov
                .values
                .iter()
                .flat_map(|&o| self.values.iter().map(move |&v| (v, Some(o))))
                .collect(),
        }
    }

    /// Scenario evaluated at one grid point.
    pub fn scenario_at(&self, value: f64, overlay: Option<f64>) -> Result<ScenarioConfig> {
        let mut cfg = self.base.clone();
        if let (Some(ov), Some(o)) = (&self.overlay, overlay) {
            ov.param.apply(&mut cfg, o)?;
        }
        self.param.apply(&mut cfg, value)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub overlay: Option<f64>,
    pub irs_rows: usize,
    pub irs_cols: usize,
    pub result: GainResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub spec: SweepSpec,
    pub generator: String,
    pub version: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    /// Rows belonging to one overlay value (or all rows without overlay).
    pub fn curve(&self, overlay: Option<f64>) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.overlay == overlay)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = spec
        .points()
        .into_par_iter()
        .map(|(value, overlay)| {
            let cfg = spec.scenario_at(value, overlay)?;
            Ok(SweepRow {
                value,
                overlay,
                irs_rows: cfg.irs_rows,
                irs_cols: cfg.irs_cols,
                result: irs_gain(&cfg, &spec.mc)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut notes = vec![format!("baseline mode: {}", spec.base.baseline_mode)];
    let touches_k = spec.param == SweepParam::K
        || spec.overlay.as_ref().is_some_and(|o| o.param == SweepParam::K);
    if touches_k && rows.iter().any(|r| r.irs_rows != r.irs_cols) {
        notes.push(
            "K values that are not perfect squares use a near-square rows x cols grid".to_string(),
        );
    }
    Ok(SweepResult {
        rows,
        metadata: SweepMetadata {
            spec: spec.clone(),
            generator: GENERATOR_ID.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            notes,
        },
    })
}

/// Per-link amplitudes at the UAV, sqrt(mW).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentAmplitudes {
    pub los: f64,
    pub wall_mean: f64,
    pub irs: f64,
}

impl From<&GainResult> for ComponentAmplitudes {
    fn from(r: &GainResult) -> Self {
        Self {
            los: r.los_amplitude,
            wall_mean: r.mean_wall_reflection_amplitude,
            irs: r.irs_sum_amplitude,
        }
    }
}

pub fn component_amplitudes(cfg: &ScenarioConfig, mc: &MonteCarloConfig) -> Result<ComponentAmplitudes> {
    Ok((&irs_gain(cfg, mc)?).into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementOptimum {
    pub l_star: f64,
    pub gain_at_star: f64,
    pub grid: Vec<(f64, GainResult)>,
}

/// Best BS-IRS distance on `l_grid`. Ties go to the smaller distance.
pub fn optimal_distance(
    base: &ScenarioConfig,
    l_grid: &[f64],
    mc: &MonteCarloConfig,
) -> Result<PlacementOptimum> {
    if l_grid.is_empty() {
        return Err(SimError::invalid("l_grid", "distance grid is empty"));
    }
    if l_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SimError::invalid("l_grid", "distance grid must be strictly increasing"));
    }
    let grid = l_grid
        .par_iter()
        .map(|&l| Ok((l, gain_at_distance(base, l, mc)?)))
        .collect::<Result<Vec<_>>>()?;
    let gains: Vec<f64> = grid.iter().map(|(_, r)| r.gain_db).collect();
    let best = argmax_first(&gains);
    Ok(PlacementOptimum {
        l_star: grid[best].0,
        gain_at_star: grid[best].1.gain_db,
        grid,
    })
}

/// Index of the largest value; the first one wins on ties.
fn argmax_first(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn gain_at_distance(base: &ScenarioConfig, l: f64, mc: &MonteCarloConfig) -> Result<GainResult> {
    let mut cfg = base.clone();
    SweepParam::L.apply(&mut cfg, l)?;
    irs_gain(&cfg, mc)
}

/// Golden-section refinement of `opt.l_star` between its grid neighbours.
/// With a fixed master seed the gain is a pure function of L.
pub fn refine_distance(
    base: &ScenarioConfig,
    opt: &PlacementOptimum,
    mc: &MonteCarloConfig,
    tol_m: f64,
) -> Result<(f64, f64)> {
    let i = opt
        .grid
        .iter()
        .position(|(l, _)| *l == opt.l_star)
        .expect("l_star comes from the grid");
    let lo = opt.grid[i.saturating_sub(1)].0;
    let hi = opt.grid[(i + 1).min(opt.grid.len() - 1)].0;
    if hi - lo <= tol_m {
        return Ok((opt.l_star, opt.gain_at_star));
    }
    let (l, g) = golden_section_max(|l| Ok(gain_at_distance(base, l, mc)?.gain_db), lo, hi, tol_m)?;
    // the bracket end points were already evaluated on the grid
    if g >= opt.gain_at_star {
        Ok((l, g))
    } else {
        Ok((opt.l_star, opt.gain_at_star))
    }
}

/// Maximises a unimodal `f` on `[a, b]` by golden-section search, stopping
/// once the bracket is narrower than `tol`. Returns `(x, f(x))`.
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) || !(tol > 0.0) {
        return Err(SimError::invalid("bracket", format!("need a < b and tol > 0, got [{a}, {b}], tol {tol}")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_mc() -> MonteCarloConfig {
        MonteCarloConfig {
            n_runs: 200,
            ..Default::default()
        }
    }

    #[test]
    fn param_names_parse() {
        for p in SweepParam::ALL {
            assert_eq!(p.name().parse::<SweepParam>().unwrap(), p);
        }
        assert_eq!("h_uav".parse::<SweepParam>().unwrap(), SweepParam::HUav);
        assert_eq!("h-uav-m".parse::<SweepParam>().unwrap(), SweepParam::HUav);
        assert_eq!("f_ghz".parse::<SweepParam>().unwrap(), SweepParam::F);
        assert!("theta".parse::<SweepParam>().is_err());
    }

    #[test]
    fn default_grids() {
        let h = default_h_uav_grid();
        assert_eq!(h.len(), 11 + 12);
        assert_eq!(h[0], 20.0);
        assert_eq!(h[10], 30.0);
        assert_eq!(h[11], 40.0);
        assert_eq!(*h.last().unwrap(), 150.0);
        let l = default_l_grid();
        assert_eq!(l.len(), 19);
        assert_eq!((l[0], l[18]), (10.0, 100.0));
    }

    #[test]
    fn applying_k_uses_near_square_grid() {
        let mut cfg = ScenarioConfig::default();
        SweepParam::K.apply(&mut cfg, 50.0).unwrap();
        assert_eq!((cfg.irs_rows, cfg.irs_cols), (5, 10));
        assert!(SweepParam::K.apply(&mut cfg, 2.5).is_err());
        assert!(SweepParam::K.apply(&mut cfg, 0.0).is_err());
    }

    #[test]
    fn overlay_major_ordering() {
        let spec = SweepSpec::new(SweepParam::K, vec![25.0, 50.0], ScenarioConfig::default(), quick_mc())
            .with_overlay(SweepParam::HUav, vec![30.0, 40.0, 50.0]);
        let pts = spec.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], (25.0, Some(30.0)));
        assert_eq!(pts[1], (50.0, Some(30.0)));
        assert_eq!(pts[5], (50.0, Some(50.0)));
    }

    #[test]
    fn invalid_specs_rejected() {
        let base = ScenarioConfig::default();
        let bad = SweepSpec::new(SweepParam::L, vec![], base.clone(), quick_mc());
        assert!(run_sweep(&bad).is_err());
        let bad = SweepSpec::new(SweepParam::L, vec![50.0, 40.0], base.clone(), quick_mc());
        assert!(run_sweep(&bad).is_err());
        let bad = SweepSpec::new(SweepParam::L, vec![40.0], base.clone(), quick_mc())
            .with_overlay(SweepParam::HIrs, vec![5.0, 5.0]);
        assert!(run_sweep(&bad).is_err());
        let bad = SweepSpec::new(SweepParam::L, vec![40.0], base, quick_mc())
            .with_overlay(SweepParam::L, vec![5.0]);
        assert!(run_sweep(&bad).is_err());
    }

    #[test]
    fn single_point_sweep_equals_direct_call() {
        let base = ScenarioConfig::default();
        let spec = SweepSpec::new(SweepParam::HUav, vec![50.0], base.clone(), quick_mc());
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.rows[0].result, irs_gain(&base, &quick_mc()).unwrap());
    }

    #[test]
    fn l_sweep_moves_uav_to_midpoint() {
        let spec = SweepSpec::new(SweepParam::L, vec![30.0], ScenarioConfig::default(), quick_mc());
        let cfg = spec.scenario_at(30.0, None).unwrap();
        assert_eq!(cfg.uav_x(), 15.0);
        let pinned = ScenarioConfig {
            uav_x_m: Some(20.0),
            ..Default::default()
        };
        let spec = SweepSpec::new(SweepParam::L, vec![30.0], pinned, quick_mc());
        assert_eq!(spec.scenario_at(30.0, None).unwrap().uav_x(), 20.0);
    }

    #[test]
    fn no_rays_components() {
        let mc = MonteCarloConfig {
            n_rays: 0,
            n_runs: 10,
            ..Default::default()
        };
        let c = component_amplitudes(&ScenarioConfig::default(), &mc).unwrap();
        assert_eq!(c.wall_mean, 0.0);
        let link = crate::simulator::irs_link(&ScenarioConfig::default()).unwrap();
        assert_eq!(c.los, link.los_amplitude);
        assert_eq!(c.irs, link.irs_sum_amplitude);
    }

    #[test]
    fn los_drop_across_main_lobe_edge() {
        // 18.366 dB from the pattern alone: -1.634 dB at 20 m, floor at 30 m
        let mc = MonteCarloConfig {
            n_runs: 1,
            ..Default::default()
        };
        let at = |h| {
            component_amplitudes(
                &ScenarioConfig {
                    h_uav_m: h,
                    ..Default::default()
                },
                &mc,
            )
            .unwrap()
            .los
        };
        let drop_db = 20.0 * (at(20.0) / at(30.0)).log10();
        assert!((drop_db - 18.366_008_198_445_13).abs() < 1e-9, "{drop_db}");
    }

    #[test]
    fn single_point_grid_optimum() {
        let opt = optimal_distance(&ScenarioConfig::default(), &[42.0], &quick_mc()).unwrap();
        assert_eq!(opt.l_star, 42.0);
        let direct = irs_gain(
            &ScenarioConfig {
                l_m: 42.0,
                ..Default::default()
            },
            &quick_mc(),
        )
        .unwrap();
        assert_eq!(opt.gain_at_star, direct.gain_db);
        assert!(optimal_distance(&ScenarioConfig::default(), &[], &quick_mc()).is_err());
    }

    #[test]
    fn ties_break_toward_smaller_distance() {
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax_first(&[5.0, 5.0]), 0);
        assert_eq!(argmax_first(&[1.0, 2.0, 7.0]), 2);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| Ok(-(x - 1.3) * (x - 1.3) + 2.0), -4.0, 5.0, 1e-9).unwrap();
        // the peak location is only resolvable to ~sqrt(machine epsilon)
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
        let (x, _) = golden_section_max(|x: f64| Ok(x.sin()), 0.0, 3.0, 1e-10).unwrap();
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
        assert!(golden_section_max(|x| Ok(x), 1.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn refinement_never_worse_than_grid() {
        let base = ScenarioConfig::default();
        let grid: Vec<f64> = (8..=12).map(|i| 5.0 * i as f64).collect();
        let opt = optimal_distance(&base, &grid, &quick_mc()).unwrap();
        let (l, g) = refine_distance(&base, &opt, &quick_mc(), 0.05).unwrap();
        assert!(g >= opt.gain_at_star);
        assert!((opt.l_star - 5.0..=opt.l_star + 5.0).contains(&l));
    }
}
