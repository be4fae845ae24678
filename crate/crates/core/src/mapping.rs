//! Touchpad-to-VR coordinate mapping.
//!
//! A calibration fit relates panel pixels to view angles with one affine map
//! per axis (`x = ax * theta1 + bx`, `y = ay * theta2 + by`). At runtime the
//! fitted map drives the cursor in one of three modes:
//!
//! * absolute: the cursor sits at the inverse image of the finger;
//! * relative: finger motion is added to the cursor, touch-down leaves it put;
//! * hybrid: relative, except each touch-down removes a fixed fraction of the
//!   offset between the cursor and the absolute position.
//!
//! During a press all three modes keep the cursor at `absolute(p) + offset`
//! where the offset is fixed at touch-down; absolute mode is offset zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::input::{OffScreen, TouchAction, TouchEvent, TouchPoint};

/// View-relative cursor angles in degrees: horizontal (`theta1`) and
/// elevation (`theta2`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CursorAngles {
    pub theta1: f64,
    pub theta2: f64,
}

impl CursorAngles {
    pub const ZERO: CursorAngles = CursorAngles {
        theta1: 0.0,
        theta2: 0.0,
    };

    pub fn new(theta1: f64, theta2: f64) -> Self {
        CursorAngles { theta1, theta2 }
    }

    pub fn distance(&self, o: &CursorAngles) -> f64 {
        (self.theta1 - o.theta1).hypot(self.theta2 - o.theta2)
    }
}

/// One calibration selection: the target angles shown and where the
/// participant touched.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub target_theta1: f64,
    pub target_theta2: f64,
    pub x: i32,
    pub y: i32,
    #[serde(default)]
    pub participant_id: u32,
    #[serde(default)]
    pub session_index: u32,
}

impl CalibrationSample {
    pub fn touch(&self) -> Result<TouchPoint, OffScreen> {
        TouchPoint::new(self.x, self.y)
    }
}

/// Regression coefficients and fit diagnostics, in the on-disk JSON shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedMap {
    pub ax: f64,
    pub bx: f64,
    pub ay: f64,
    pub by: f64,
    pub r_x: f64,
    pub r_y: f64,
    pub dispersion_px: f64,
}

impl FittedMap {
    /// An exact map with perfect diagnostics; handy for tests and planted
    /// generators.
    pub fn exact(ax: f64, bx: f64, ay: f64, by: f64) -> FittedMap {
        FittedMap {
            ax,
            bx,
            ay,
            by,
            r_x: 1.0,
            r_y: 1.0,
            dispersion_px: 0.0,
        }
    }

    /// Pixel position `(x, y)` of the given angles.
    pub fn forward(&self, a: CursorAngles) -> (f64, f64) {
        (self.ax * a.theta1 + self.bx, self.ay * a.theta2 + self.by)
    }

    /// Angles of a (possibly fractional) pixel position.
    pub fn inverse(&self, x: f64, y: f64) -> CursorAngles {
        CursorAngles::new((x - self.bx) / self.ax, (y - self.by) / self.ay)
    }
}

impl Default for FittedMap {
    /// The model shipped in `config/default_model.json`.
    fn default() -> Self {
        crate::config::default_model()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

/// Ordinary least squares of pixels on target angles, per axis.
///
/// `r_x`/`r_y` are the regression correlation coefficients (the magnitude
/// of Pearson's r) between each target's angle and the centroid of the
/// touches made for it; the sign is carried by the slope. `dispersion_px` is the mean over
/// targets of the mean distance from each touch to its target centroid.
pub fn fit_linear_map(samples: &[CalibrationSample]) -> Result<FittedMap, FitError> {
    let distinct = |f: fn(&CalibrationSample) -> f64| {
        let mut v: Vec<u64> = samples.iter().map(|s| f(s).to_bits()).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    if distinct(|s| s.target_theta1) < 2 {
        return Err(FitError::DegenerateFit(
            "need at least two distinct horizontal angles".into(),
        ));
    }
    if distinct(|s| s.target_theta2) < 2 {
        return Err(FitError::DegenerateFit(
            "need at least two distinct elevation angles".into(),
        ));
    }
    let (ax, bx) = ols(samples.iter().map(|s| (s.target_theta1, s.x as f64)));
    let (ay, by) = ols(samples.iter().map(|s| (s.target_theta2, s.y as f64)));
    if ax == 0.0 || ay == 0.0 || !ax.is_finite() || !ay.is_finite() {
        return Err(FitError::DegenerateFit(
            "touches do not vary with the target".into(),
        ));
    }

    let groups = group_by_target(samples);
    let centroids: Vec<(f64, f64, f64, f64)> = groups
        .values()
        .map(|g| {
            let n = g.len() as f64;
            let cx = g.iter().map(|s| s.x as f64).sum::<f64>() / n;
            let cy = g.iter().map(|s| s.y as f64).sum::<f64>() / n;
            (g[0].target_theta1, g[0].target_theta2, cx, cy)
        })
        .collect();
    let r_x = pearson(centroids.iter().map(|c| (c.0, c.2))).abs();
    let r_y = pearson(centroids.iter().map(|c| (c.1, c.3))).abs();
    let dispersion_px = dispersion(&groups);
    Ok(FittedMap {
        ax,
        bx,
        ay,
        by,
        r_x,
        r_y,
        dispersion_px,
    })
}

/// Pearson correlation between target angle and touch coordinate over the
/// individual samples, `(r_x, r_y)`.
pub fn sample_correlation(samples: &[CalibrationSample]) -> (f64, f64) {
    (
        pearson(samples.iter().map(|s| (s.target_theta1, s.x as f64))),
        pearson(samples.iter().map(|s| (s.target_theta2, s.y as f64))),
    )
}

fn group_by_target(samples: &[CalibrationSample]) -> BTreeMap<(u64, u64), Vec<&CalibrationSample>> {
    let mut groups: BTreeMap<(u64, u64), Vec<&CalibrationSample>> = BTreeMap::new();
    for s in samples {
        groups
            .entry((s.target_theta1.to_bits(), s.target_theta2.to_bits()))
            .or_default()
            .push(s);
    }
    groups
}

fn dispersion(groups: &BTreeMap<(u64, u64), Vec<&CalibrationSample>>) -> f64 {
    let per_target: Vec<f64> = groups
        .values()
        .map(|g| {
            let n = g.len() as f64;
            let cx = g.iter().map(|s| s.x as f64).sum::<f64>() / n;
            let cy = g.iter().map(|s| s.y as f64).sum::<f64>() / n;
            g.iter()
                .map(|s| (s.x as f64 - cx).hypot(s.y as f64 - cy))
                .sum::<f64>()
                / n
        })
        .collect();
    per_target.iter().sum::<f64>() / per_target.len() as f64
}

/// Slope and intercept of `y` on `x`.
fn ols(points: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let n = points.clone().count() as f64;
    let (mx, my) = points
        .clone()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (sxy, sxx) = points.fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn pearson(points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let n = points.clone().count() as f64;
    let (sx, sy) = points
        .clone()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx, syy) = points.fold((0.0, 0.0, 0.0), |(a, b, c), (x, y)| {
        let (dx, dy) = (x - mx, y - my);
        (a + dx * dy, b + dx * dx, c + dy * dy)
    });
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum MappingMode {
    Absolute,
    Relative,
    Hybrid { correction_fraction: f64 },
}

impl MappingMode {
    pub const DEFAULT_CORRECTION_FRACTION: f64 = 0.25;

    /// Share of the cursor-to-absolute offset kept across a touch-down.
    fn kept_offset(&self) -> f64 {
        match *self {
            MappingMode::Absolute => 0.0,
            MappingMode::Relative => 1.0,
            MappingMode::Hybrid {
                correction_fraction,
            } => 1.0 - correction_fraction,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            MappingMode::Hybrid {
                correction_fraction: f,
            } if !(f > 0.0 && f <= 1.0) => {
                Err(format!("correction fraction must lie in (0, 1], got {f}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MappingMode::Absolute => "absolute",
            MappingMode::Relative => "relative",
            MappingMode::Hybrid { .. } => "hybrid",
        }
    }
}

/// Finger-speed to cursor-speed transfer. Only the linear map exists; the
/// enum marks where a velocity-dependent gain would plug in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainCurve {
    #[default]
    Linear,
}

/// Fitted map plus the live cursor state of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingModel {
    pub fit: FittedMap,
    pub mode: MappingMode,
    pub gain: GainCurve,
    cursor: CursorAngles,
    /// `cursor - absolute(finger)` while a finger is down.
    press_offset: Option<(f64, f64)>,
}

impl MappingModel {
    pub fn new(fit: FittedMap, mode: MappingMode) -> Self {
        MappingModel {
            fit,
            mode,
            gain: GainCurve::Linear,
            cursor: CursorAngles::ZERO,
            press_offset: None,
        }
    }

    pub fn cursor(&self) -> CursorAngles {
        self.cursor
    }

    pub fn set_cursor(&mut self, c: CursorAngles) {
        self.cursor = c;
    }

    pub fn absolute(&self, p: TouchPoint) -> CursorAngles {
        self.fit.inverse(p.x() as f64, p.y() as f64)
    }

    /// Advances the cursor for one front-pad event.
    pub fn map_touch(&mut self, event: &TouchEvent) -> Result<CursorAngles, OffScreen> {
        let p = match event.point() {
            Ok(p) => p,
            Err(e) => {
                if event.action == TouchAction::Up {
                    self.press_offset = None;
                }
                return Err(e);
            }
        };
        match event.action {
            TouchAction::Down => self.touch_down(p),
            TouchAction::Move => self.touch_move(p),
            TouchAction::Up => self.touch_up(),
        }
        Ok(self.cursor)
    }

    /// Starts a press at `p` (see the module docs for the per-mode rule).
    pub fn touch_down(&mut self, p: TouchPoint) {
        let abs = self.absolute(p);
        let keep = self.mode.kept_offset();
        if keep != 1.0 {
            self.cursor = CursorAngles::new(
                abs.theta1 + keep * (self.cursor.theta1 - abs.theta1),
                abs.theta2 + keep * (self.cursor.theta2 - abs.theta2),
            );
        }
        self.press_offset = Some((
            self.cursor.theta1 - abs.theta1,
            self.cursor.theta2 - abs.theta2,
        ));
    }

    /// Follows a pressed finger to `p`. Without an active press this starts
    /// one, as a Move can follow an off-screen Down.
    pub fn touch_move(&mut self, p: TouchPoint) {
        let Some((o1, o2)) = self.press_offset else {
            self.touch_down(p);
            return;
        };
        let abs = self.absolute(p);
        self.cursor = if self.mode.kept_offset() == 0.0 {
            abs
        } else {
            CursorAngles::new(abs.theta1 + o1, abs.theta2 + o2)
        };
    }

    pub fn touch_up(&mut self) {
        self.press_offset = None;
    }

    pub fn is_pressed(&self) -> bool {
        self.press_offset.is_some()
    }

    /// Angular distance the cursor would jump if a finger came down at the
    /// event's position now (zero in relative mode).
    pub fn jump_distance(
        &self,
        before: CursorAngles,
        event: &TouchEvent,
    ) -> Result<f64, OffScreen> {
        let abs = self.absolute(event.point()?);
        let keep = self.mode.kept_offset();
        Ok((1.0 - keep) * before.distance(&abs))
    }
}
