//! Scene layout: BS, UAV, the IRS element lattice on the wall and the
//! scatter points used by the passive-wall reference.
//!
//! Axes: `x` runs horizontally from the BS toward the wall, `y` runs along
//! the wall and `z` is height above ground. The wall is the plane `x = L`.

use std::ops::Sub;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn horizontal_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Sub for Position3D {
    type Output = Position3D;

    fn sub(self, rhs: Position3D) -> Position3D {
        Position3D::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position3D, b: Position3D) -> f64 {
    (b - a).norm()
}

/// Angle of the ray `from -> to` below the horizontal plane through `from`,
/// in degrees. Positive when `to` is lower than `from`.
pub fn depression_angle(from: Position3D, to: Position3D) -> Result<f64> {
    if from == to {
        return Err(SimError::DegenerateGeometry(format!(
            "depression angle between coincident points {from:?}"
        )));
    }
    let d = to - from;
    Ok((-d.z).atan2(d.horizontal_norm()).to_degrees())
}

/// Lays out a `rows x cols` lattice on the plane `x = center.x`.
///
/// Row `n` (1-based) sits at height `center.z + (n - (rows+1)/2) * pitch`
/// and column `m` at `center.y + (m - (cols+1)/2) * pitch`. Positions are
/// returned row by row.
pub fn element_positions(
    rows: usize,
    cols: usize,
    pitch: f64,
    center: Position3D,
) -> Result<Vec<Position3D>> {
    if rows == 0 {
        return Err(SimError::invalid("irs_rows", "must be >= 1"));
    }
    if cols == 0 {
        return Err(SimError::invalid("irs_cols", "must be >= 1"));
    }
    if !(pitch.is_finite() && pitch > 0.0) {
        return Err(SimError::invalid(
            "element_pitch_m",
            format!("must be > 0, got {pitch}"),
        ));
    }
    let row_mid = (rows as f64 + 1.0) / 2.0;
    let col_mid = (cols as f64 + 1.0) / 2.0;
    let mut out = Vec::with_capacity(rows * cols);
    for n in 1..=rows {
        let z = center.z + (n as f64 - row_mid) * pitch;
        for m in 1..=cols {
            let y = center.y + (m as f64 - col_mid) * pitch;
            out.push(Position3D::new(center.x, y, z));
        }
    }
    Ok(out)
}

/// Resolved positions of every object in the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGeometry {
    pub bs: Position3D,
    pub uav: Position3D,
    pub irs_center: Position3D,
    pub elements: Vec<Position3D>,
    pub patch_half_width_y: f64,
    pub patch_half_height_z: f64,
}

impl ScenarioGeometry {
    /// Builds the scene. The wall patch is the bounding rectangle of the
    /// element centres; a config with zero rows or columns has no elements
    /// and a zero-extent patch at the IRS centre.
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let bs = Position3D::new(0.0, 0.0, cfg.h_bs_m);
        let uav = Position3D::new(cfg.uav_x(), cfg.uav_y_m, cfg.h_uav_m);
        let irs_center = Position3D::new(cfg.l_m, 0.0, cfg.h_irs_m);
        let (elements, half_w, half_h) = if cfg.k() == 0 {
            (Vec::new(), 0.0, 0.0)
        } else {
            (
                element_positions(cfg.irs_rows, cfg.irs_cols, cfg.element_pitch_m, irs_center)?,
                (cfg.irs_cols - 1) as f64 * cfg.element_pitch_m / 2.0,
                (cfg.irs_rows - 1) as f64 * cfg.element_pitch_m / 2.0,
            )
        };
        let geom = Self {
            bs,
            uav,
            irs_center,
            elements,
            patch_half_width_y: half_w,
            patch_half_height_z: half_h,
        };
        if geom.bs == geom.uav {
            return Err(SimError::DegenerateGeometry("UAV coincides with the BS".into()));
        }
        Ok(geom)
    }

    /// Whether `p` lies on the wall patch (with a small absolute slack).
    pub fn on_patch(&self, p: Position3D) -> bool {
        const EPS: f64 = 1e-9;
        (p.x - self.irs_center.x).abs() <= EPS
            && (p.y - self.irs_center.y).abs() <= self.patch_half_width_y + EPS
            && (p.z - self.irs_center.z).abs() <= self.patch_half_height_z + EPS
    }
}

/// Draws `count` points uniformly over the wall patch.
///
/// Consumes exactly two `f64` draws per point from `rng`: first the `y`
/// offset, then the `z` offset.
pub fn sample_scatter_points<R: Rng + ?Sized>(
    geom: &ScenarioGeometry,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Position3D>> {
    if count == 0 {
        return Err(SimError::invalid("n_rays", "scatter sample count must be >= 1"));
    }
    Ok((0..count).map(|_| sample_scatter_point(geom, rng)).collect())
}

pub(crate) fn sample_scatter_point<R: Rng + ?Sized>(geom: &ScenarioGeometry, rng: &mut R) -> Position3D {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let c = geom.irs_center;
    Position3D::new(
        c.x,
        c.y + (2.0 * u - 1.0) * geom.patch_half_width_y,
        c.z + (2.0 * v - 1.0) * geom.patch_half_height_z,
    )
}
