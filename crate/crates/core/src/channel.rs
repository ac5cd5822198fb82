//! Per-path channel coefficients and coherent combining at the UAV.
//!
//! Link budgets are computed in dB, converted to milliwatts and carried as
//! square-root-milliwatt amplitudes so that paths can be summed as phasors.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::{depression_angle, distance, Position3D, ScenarioGeometry};
use crate::propagation::{
    effective_tx_power, pl_bs_to_element, pl_element_to_uav, pl_los, AntennaParams, PathlossParams,
};
use crate::scenario::ScenarioConfig;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Amplitude (sqrt(mW)) and arrival phase (radians, in `[0, 2pi)`) of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCoefficient {
    pub amplitude: f64,
    pub phase: f64,
}

impl ChannelCoefficient {
    pub fn new(amplitude: f64, phase: f64) -> Self {
        debug_assert!(amplitude >= 0.0);
        Self {
            amplitude,
            phase: normalize_phase(phase),
        }
    }

    pub fn from_power_dbm(p_dbm: f64, phase: f64) -> Self {
        Self::new(dbm_to_amplitude(p_dbm), phase)
    }

    pub fn power_dbm(&self) -> f64 {
        20.0 * self.amplitude.log10()
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }

    pub fn with_phase(self, phase: f64) -> Self {
        Self::new(self.amplitude, phase)
    }
}

/// Wraps an angle into `[0, 2pi)`.
pub fn normalize_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Phase accumulated over `d_m` meters at wavelength `lambda_m`:
/// `-2pi d / lambda (mod 2pi)`. The cycle count is reduced before scaling
/// to keep precision on long paths.
pub fn propagation_phase(d_m: f64, lambda_m: f64) -> f64 {
    let cycles = d_m / lambda_m;
    normalize_phase(-TAU * (cycles - cycles.floor()))
}

pub fn wavelength_m(f_ghz: f64) -> f64 {
    SPEED_OF_LIGHT_M_S / (f_ghz * 1e9)
}

/// `sqrt(10^(p/10))`, the amplitude of a path carrying `p_dbm`.
pub fn dbm_to_amplitude(p_dbm: f64) -> f64 {
    10f64.powf(p_dbm / 20.0)
}

/// Reflection losses of the programmable surface and of a bare wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionParams {
    pub pl_irs_db: f64,
    pub pl_wall_db: f64,
}

impl Default for ReflectionParams {
    fn default() -> Self {
        Self {
            pl_irs_db: 1.0,
            pl_wall_db: 10.0,
        }
    }
}

/// Phase assigned to an IRS element's reflected arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// Ideal control: the element re-phases its reflection onto the LoS arrival.
    AlignedToLos,
    /// No control: phase follows the BS -> element -> UAV path length.
    Geometric,
}

/// Link-budget context for one scene.
#[derive(Debug, Clone, Copy)]
pub struct ChannelModel<'a> {
    pub geom: &'a ScenarioGeometry,
    pub antenna: AntennaParams,
    pub pathloss: PathlossParams,
    pub p_t_dbm: f64,
    pub refl: ReflectionParams,
}

impl<'a> ChannelModel<'a> {
    pub fn new(geom: &'a ScenarioGeometry, cfg: &ScenarioConfig) -> Self {
        Self {
            geom,
            antenna: cfg.antenna(),
            pathloss: cfg.pathloss(),
            p_t_dbm: cfg.p_t_dbm,
            refl: cfg.reflection(),
        }
    }

    pub fn wavelength_m(&self) -> f64 {
        wavelength_m(self.pathloss.f_ghz)
    }

    /// Direct BS -> UAV path.
    pub fn los_coefficient(&self) -> Result<ChannelCoefficient> {
        let (bs, uav) = (self.geom.bs, self.geom.uav);
        let theta = depression_angle(bs, uav)?;
        let d = distance(bs, uav);
        let p = effective_tx_power(self.p_t_dbm, theta, &self.antenna) - pl_los(d, &self.pathloss)?;
        Ok(ChannelCoefficient::from_power_dbm(
            p,
            propagation_phase(d, self.wavelength_m()),
        ))
    }

    /// Received power (dBm) and total length of the BS -> `point` -> UAV
    /// path for a reflection with `loss_db` at `point`.
    fn reflected_path(&self, point: Position3D, loss_db: f64) -> Result<(f64, f64)> {
        let (bs, uav) = (self.geom.bs, self.geom.uav);
        if point == bs || point == uav {
            return Err(SimError::DegenerateGeometry(format!(
                "reflection point {point:?} coincides with an endpoint"
            )));
        }
        let theta = depression_angle(bs, point)?;
        let d1 = distance(bs, point);
        let d2 = distance(point, uav);
        let h = uav.z;
        let p = effective_tx_power(self.p_t_dbm, theta, &self.antenna)
            - pl_bs_to_element(d1, h, &self.pathloss)?
            - loss_db
            - pl_element_to_uav(d1, d2, h, &self.pathloss)?;
        Ok((p, d1 + d2))
    }

    /// Path reflected by IRS element `k`.
    pub fn element_coefficient(&self, k: usize, mode: PhaseMode) -> Result<ChannelCoefficient> {
        let point = *self.geom.elements.get(k).ok_or_else(|| {
            SimError::invalid(
                "element_index",
                format!("{k} out of range for {} elements", self.geom.elements.len()),
            )
        })?;
        let (p, len) = self.reflected_path(point, self.refl.pl_irs_db)?;
        let phase = match mode {
            PhaseMode::AlignedToLos => self.los_coefficient()?.phase,
            PhaseMode::Geometric => propagation_phase(len, self.wavelength_m()),
        };
        Ok(ChannelCoefficient::from_power_dbm(p, phase))
    }

    /// All element paths, in lattice order.
    pub fn element_coefficients(&self, mode: PhaseMode) -> Result<Vec<ChannelCoefficient>> {
        let los_phase = match mode {
            PhaseMode::AlignedToLos => Some(self.los_coefficient()?.phase),
            PhaseMode::Geometric => None,
        };
        let lambda = self.wavelength_m();
        self.geom
            .elements
            .iter()
            .map(|&pt| {
                let (p, len) = self.reflected_path(pt, self.refl.pl_irs_db)?;
                let phase = los_phase.unwrap_or_else(|| propagation_phase(len, lambda));
                Ok(ChannelCoefficient::from_power_dbm(p, phase))
            })
            .collect()
    }

    /// Ray scattered by the bare wall at `scatter_point`; its phase always
    /// follows the path length.
    pub fn wall_ray_coefficient(&self, scatter_point: Position3D) -> Result<ChannelCoefficient> {
        let (p, len) = self.reflected_path(scatter_point, self.refl.pl_wall_db)?;
        Ok(ChannelCoefficient::from_power_dbm(
            p,
            propagation_phase(len, self.wavelength_m()),
        ))
    }
}

/// Magnitude of the phasor sum of `coeffs`.
pub fn combine(coeffs: &[ChannelCoefficient]) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(SimError::invalid("coeffs", "cannot combine an empty path list"));
    }
    Ok(coeffs
        .iter()
        .map(|c| c.to_complex())
        .sum::<Complex64>()
        .norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const LOS_POWER_DEFAULT: f64 = -42.086_610_056_368_24;
    const CENTER_ELEMENT_POWER_DEFAULT: f64 = -44.429_883_732_445_07;

    fn circ_dist(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    }

    fn single_element_cfg() -> ScenarioConfig {
        ScenarioConfig {
            irs_rows: 1,
            irs_cols: 1,
            ..Default::default()
        }
    }

    #[test]
    fn dbm_to_amplitude_examples() {
        assert_eq!(dbm_to_amplitude(0.0), 1.0);
        assert!((dbm_to_amplitude(20.0) - 10.0).abs() < 1e-12);
        assert!((dbm_to_amplitude(-42.1) - 7.852_356_346_100_718e-3).abs() < 1e-15);
    }

    #[test]
    fn default_los_coefficient() {
        let cfg = ScenarioConfig::default();
        let g = ScenarioGeometry::from_config(&cfg).unwrap();
        let los = ChannelModel::new(&g, &cfg).los_coefficient().unwrap();
        assert!((los.power_dbm() - LOS_POWER_DEFAULT).abs() < 1e-9);
    }

    #[test]
    fn boresight_los_coefficient() {
        // UAV 100 m from the BS along the 15 degree boresight ray
        let t = 15f64.to_radians();
        let cfg = ScenarioConfig {
            h_bs_m: 40.0,
            uav_x_m: Some(100.0 * t.cos()),
            h_uav_m: 40.0 - 100.0 * t.sin(),
            ..Default::default()
        };
        let g = ScenarioGeometry::from_config(&cfg).unwrap();
        let los = ChannelModel::new(&g, &cfg).los_coefficient().unwrap();
        assert!((los.power_dbm() - (46.0 - 78.020_599_913_279_62)).abs() < 1e-9);
    }

    #[test]
    fn wavelength_multiple_has_zero_phase() {
        let lambda = wavelength_m(2.0);
        for n in [1.0, 7.0, 250.0, 1234.0] {
            assert!(circ_dist(propagation_phase(n * lambda, lambda), 0.0) < 1e-9);
        }
        let half = propagation_phase(0.5 * lambda, lambda);
        assert!((half - PI).abs() < 1e-12);
    }

    #[test]
    fn center_element_link_budget() {
        let cfg = single_element_cfg();
        let g = ScenarioGeometry::from_config(&cfg).unwrap();
        let m = ChannelModel::new(&g, &cfg);
        let c = m.element_coefficient(0, PhaseMode::AlignedToLos).unwrap();
        assert!((c.power_dbm() - CENTER_ELEMENT_POWER_DEFAULT).abs() < 1e-9);
        let w = m.wall_ray_coefficient(g.irs_center).unwrap();
        assert!((w.power_dbm() - (CENTER_ELEMENT_POWER_DEFAULT - 9.0)).abs() < 1e-9);
        assert!(m.element_coefficient(1, PhaseMode::Geometric).is_err());
    }

    #[test]
    fn aligned_elements_share_los_phase() {
        let cfg = ScenarioConfig::default();
        let g = ScenarioGeometry::from_config(&cfg).unwrap();
        let m = ChannelModel::new(&g, &cfg);
        let los = m.los_coefficient().unwrap();
        let all = m.element_coefficients(PhaseMode::AlignedToLos).unwrap();
        assert_eq!(all.len(), 100);
        for (k, c) in all.iter().enumerate() {
            assert_eq!(c.phase, los.phase);
            assert_eq!(*c, m.element_coefficient(k, PhaseMode::AlignedToLos).unwrap());
        }
    }

    #[test]
    fn lossless_geometric_element_at_wavelength_multiple() {
        // pick the BS height so that d1 + d2 for a single element is a whole
        // number of wavelengths, then check phase 0 and the raw budget
        let lambda = wavelength_m(2.0);
        let mut cfg = ScenarioConfig {
            pl_irs_db: 0.0,
            ..single_element_cfg()
        };
        let uav = crate::geometry::Position3D::new(25.0, 0.0, 50.0);
        let el = crate::geometry::Position3D::new(50.0, 0.0, 10.0);
        let d2 = distance(el, uav);
        let target = ((50f64.hypot(15.0) + d2) / lambda).ceil() * lambda;
        let d1 = target - d2;
        cfg.h_bs_m = 10.0 + (d1 * d1 - 2500.0).sqrt();
        let g = ScenarioGeometry::from_config(&cfg).unwrap();
        let m = ChannelModel::new(&g, &cfg);
        let c = m.element_coefficient(0, PhaseMode::Geometric).unwrap();
        assert!(circ_dist(c.phase, 0.0) < 1e-6);
        let theta = depression_angle(g.bs, el).unwrap();
        let raw = effective_tx_power(46.0, theta, &cfg.antenna())
            - crate::propagation::pl_nlos(d1 + d2, 50.0, &cfg.pathloss()).unwrap();
        assert!((c.power_dbm() - raw).abs() < 1e-9);
    }

    #[test]
    fn wall_ray_matches_geometric_element_when_losses_match() {
        let cfg = ScenarioConfig {
            pl_wall_db: 1.0,
            ..Default::default()
        };
        let g = ScenarioGeometry::from_config(&cfg).unwrap();
        let m = ChannelModel::new(&g, &cfg);
        for k in [0, 17, 99] {
            let e = m.element_coefficient(k, PhaseMode::Geometric).unwrap();
            let w = m.wall_ray_coefficient(g.elements[k]).unwrap();
            assert_eq!(e, w);
        }
    }

    #[test]
    fn half_wavelength_offset_flips_phase() {
        let lambda = wavelength_m(2.0);
        let a = propagation_phase(99.37, lambda);
        let b = propagation_phase(99.37 + lambda / 2.0, lambda);
        assert!((circ_dist(a, b) - PI).abs() < 1e-9);
    }

    #[test]
    fn combine_examples() {
        let c = |a, p| ChannelCoefficient::new(a, p);
        assert!((combine(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap() - 2.0).abs() < 1e-15);
        assert!(combine(&[c(1.0, 0.0), c(1.0, PI)]).unwrap() < 1e-15);
        assert!((combine(&[c(3.0, 0.0), c(4.0, PI / 2.0)]).unwrap() - 5.0).abs() < 1e-12);
        assert!(combine(&[]).is_err());
    }

    #[test]
    fn aligned_phases_dominate_random_assignments() {
        let cfg = ScenarioConfig::default();
        let g = ScenarioGeometry::from_config(&cfg).unwrap();
        let m = ChannelModel::new(&g, &cfg);
        let mut paths = vec![m.los_coefficient().unwrap()];
        paths.extend(m.element_coefficients(PhaseMode::AlignedToLos).unwrap());
        let best = combine(&paths).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let shuffled: Vec<_> = paths
                .iter()
                .map(|c| c.with_phase(rng.random::<f64>() * TAU))
                .collect();
            assert!(combine(&shuffled).unwrap() <= best + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn amplitude_round_trip(p in -200.0..100.0f64) {
            let back = 20.0 * dbm_to_amplitude(p).log10();
            prop_assert!((back - p).abs() <= 1e-9 * p.abs().max(1.0));
        }

        #[test]
        fn combine_bounded_by_amplitude_sum(parts in prop::collection::vec((0.0..10.0f64, 0.0..TAU), 1..40)) {
            let cs: Vec<_> = parts.iter().map(|&(a, p)| ChannelCoefficient::new(a, p)).collect();
            let sum: f64 = cs.iter().map(|c| c.amplitude).sum();
            prop_assert!(combine(&cs).unwrap() <= sum * (1.0 + 1e-12) + 1e-12);
            let aligned: Vec<_> = cs.iter().map(|c| c.with_phase(1.0)).collect();
            prop_assert!((combine(&aligned).unwrap() - sum).abs() <= 1e-9 * sum.max(1.0));
        }

        #[test]
        fn phase_is_normalized(a in 0.0..5.0f64, p in -1e4..1e4f64) {
            let c = ChannelCoefficient::new(a, p);
            prop_assert!((0.0..TAU).contains(&c.phase));
        }

        #[test]
        fn path_amplitudes_scale_with_frequency(f1 in 0.5..8.0f64, f2 in 0.5..8.0f64,
                                                h_uav in 5.0..200.0f64, l in 10.0..150.0f64) {
            let mk = |f| ScenarioConfig { f_ghz: f, h_uav_m: h_uav, l_m: l, irs_rows: 3, irs_cols: 4,
                                          ..Default::default() };
            let (c1, c2) = (mk(f1), mk(f2));
            let (g1, g2) = (ScenarioGeometry::from_config(&c1).unwrap(), ScenarioGeometry::from_config(&c2).unwrap());
            let (m1, m2) = (ChannelModel::new(&g1, &c1), ChannelModel::new(&g2, &c2));
            let ratio = f1 / f2;
            let check = |a: f64, b: f64| (b / a - ratio).abs() < 1e-9 * ratio;
            prop_assert!(check(m1.los_coefficient().unwrap().amplitude, m2.los_coefficient().unwrap().amplitude));
            let e1 = m1.element_coefficients(PhaseMode::Geometric).unwrap();
            let e2 = m2.element_coefficients(PhaseMode::Geometric).unwrap();
            for (a, b) in e1.iter().zip(&e2) {
                prop_assert!(check(a.amplitude, b.amplitude));
            }
            let w1 = m1.wall_ray_coefficient(g1.irs_center).unwrap();
            let w2 = m2.wall_ray_coefficient(g2.irs_center).unwrap();
            prop_assert!(check(w1.amplitude, w2.amplitude));
        }
    }
}
