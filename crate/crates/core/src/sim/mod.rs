//! Simulated participants.
//!
//! The simulated user is a harness for exercising the engine end to end. Its
//! timing and error rates are invented and are not a model of real people.

mod agent;
pub mod calibration;
mod study;

pub use agent::{simulate_participant, SimError, SimOutcome};
pub use study::{participant_seed, run_study, ParticipantRun, StudyConfig, StudyOutcome};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::mapping::FittedMap;

/// Touch map the simulated hand follows: where a participant touches when
/// aiming at given view angles. Calibration data is generated from it.
pub const PLANTED_MAP: FittedMap = FittedMap {
    ax: 40.0,
    bx: 1280.0,
    ay: -35.0,
    by: 720.0,
    r_x: 1.0,
    r_y: 1.0,
    dispersion_px: 0.0,
};

/// Mean radial touch error the default noise reproduces, in pixels.
pub const TARGET_DISPERSION_PX: f64 = 184.0;

/// Every random perturbation the simulated user is subject to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Per-axis Gaussian scale of open-loop touches. The radial error is
    /// then Rayleigh with mean `sigma * sqrt(pi / 2)`.
    pub touch_sigma_px: f64,
    /// Vertical scale relative to horizontal.
    pub axis_ratio: f64,
    /// Standard deviation of when a tap lands relative to when it was meant
    /// to.
    pub tap_timing_jitter_ms: f64,
    /// Standard deviation of where a head turn comes to rest, per axis.
    pub head_settle_noise_deg: f64,
    /// Standard deviation of a visually guided correction, per axis.
    pub motor_noise_deg: f64,
    /// Relative error in the length of a drag.
    pub drag_gain_error: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            touch_sigma_px: sigma_for_mean_radial(TARGET_DISPERSION_PX),
            axis_ratio: 1.0,
            tap_timing_jitter_ms: 80.0,
            head_settle_noise_deg: 1.2,
            motor_noise_deg: 0.4,
            drag_gain_error: 0.08,
        }
    }
}

/// Per-axis sigma whose Rayleigh radial distribution has the given mean.
pub fn sigma_for_mean_radial(mean_px: f64) -> f64 {
    mean_px / (std::f64::consts::PI / 2.0).sqrt()
}

fn normal<R: Rng>(rng: &mut R, sd: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sd).expect("finite sd").sample(rng)
}

impl NoiseModel {
    pub fn zero() -> NoiseModel {
        NoiseModel {
            touch_sigma_px: 0.0,
            axis_ratio: 1.0,
            tap_timing_jitter_ms: 0.0,
            head_settle_noise_deg: 0.0,
            motor_noise_deg: 0.0,
            drag_gain_error: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.touch_sigma_px,
            self.axis_ratio,
            self.tap_timing_jitter_ms,
            self.head_settle_noise_deg,
            self.motor_noise_deg,
            self.drag_gain_error,
        ];
        if all.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err("noise scales must be finite and non-negative".into())
        }
    }

    /// Offset of an open-loop touch from its aim point, in pixels.
    pub fn touch_offset<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        (
            normal(rng, self.touch_sigma_px),
            normal(rng, self.touch_sigma_px * self.axis_ratio),
        )
    }

    pub fn tap_jitter<R: Rng>(&self, rng: &mut R) -> f64 {
        normal(rng, self.tap_timing_jitter_ms)
    }

    pub fn settle<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        (
            normal(rng, self.head_settle_noise_deg),
            normal(rng, self.head_settle_noise_deg),
        )
    }

    pub fn motor<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        (
            normal(rng, self.motor_noise_deg),
            normal(rng, self.motor_noise_deg),
        )
    }

    pub fn drag_gain<R: Rng>(&self, rng: &mut R) -> f64 {
        1.0 + normal(rng, self.drag_gain_error)
    }
}

/// Timing and strategy of the simulated user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UserModel {
    /// Delay before starting each selection.
    pub reaction_ms: u64,
    /// Delay between seeing the cursor and correcting it.
    pub perception_ms: u64,
    /// Gaze: pause between the head settling and the tap.
    pub verify_ms: u64,
    pub head_velocity_deg_s: f64,
    pub drag_velocity_px_s: f64,
    /// Visually guided corrections before committing regardless.
    pub corrective_iterations: u32,
    pub tap_ms: u64,
    /// Drag-n-Tap: pause between lifting the dragging finger and re-tapping.
    pub retap_delay_ms: u64,
    /// Two-Fingers: horizontal distance of the tapping finger from the
    /// dragging one.
    pub tapper_offset_px: i32,
    /// Input sampling period for head turns and drags.
    pub sample_ms: u64,
    /// Attempts on one goal before the trial is abandoned.
    pub attempt_budget: u32,
    pub touch_map: FittedMap,
}

impl Default for UserModel {
    fn default() -> Self {
        UserModel {
            reaction_ms: 400,
            perception_ms: 150,
            verify_ms: 150,
            head_velocity_deg_s: 90.0,
            drag_velocity_px_s: 1500.0,
            corrective_iterations: 3,
            tap_ms: 90,
            retap_delay_ms: 150,
            tapper_offset_px: 350,
            sample_ms: 16,
            attempt_budget: 30,
            touch_map: PLANTED_MAP,
        }
    }
}

impl UserModel {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.head_velocity_deg_s > 0.0) || !(self.drag_velocity_px_s > 0.0) {
            return Err("velocities must be positive".into());
        }
        if self.sample_ms == 0 || self.tap_ms == 0 {
            return Err("sample and tap durations must be positive".into());
        }
        if self.attempt_budget == 0 {
            return Err("attempt budget must be positive".into());
        }
        Ok(())
    }
}

/// SplitMix64 finalizer; derives independent child seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
