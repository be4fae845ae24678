//! Synthetic calibration sessions and their JSONL form.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mix_seed, NoiseModel, PLANTED_MAP};
use crate::input::{TouchPoint, PANEL_HEIGHT, PANEL_WIDTH};
use crate::mapping::{fit_linear_map, CalibrationSample, CursorAngles, FitError, FittedMap};
use crate::trace::TraceError;

/// Target grid shown during calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationGrid {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub sessions: u32,
}

impl Default for CalibrationGrid {
    /// 13 x 9 targets, six sessions: 702 samples.
    fn default() -> Self {
        CalibrationGrid {
            theta1: (0..13).map(|i| -24.0 + 4.0 * i as f64).collect(),
            theta2: (0..9).map(|i| -10.0 + 2.5 * i as f64).collect(),
            sessions: 6,
        }
    }
}

impl CalibrationGrid {
    pub fn samples_per_participant(&self) -> usize {
        self.theta1.len() * self.theta2.len() * self.sessions as usize
    }
}

/// Seed of the synthetic calibration behind the bundled default model.
pub const DEFAULT_MODEL_SEED: u64 = 2024;
pub const DEFAULT_MODEL_PARTICIPANTS: u32 = 10;

/// One participant's calibration: every grid target once per session, in
/// a shuffled order, touched at `map(target)` plus noise. Touches that fall
/// off the panel are redrawn, as the participant would touch again.
pub fn generate_calibration(
    grid: &CalibrationGrid,
    map: &FittedMap,
    noise: &NoiseModel,
    participant: u32,
    seed: u64,
) -> Vec<CalibrationSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, participant as u64));
    let mut out = Vec::with_capacity(grid.samples_per_participant());
    let targets: Vec<(f64, f64)> = grid
        .theta1
        .iter()
        .flat_map(|&a| grid.theta2.iter().map(move |&b| (a, b)))
        .collect();
    for session in 0..grid.sessions {
        let mut order = targets.clone();
        order.shuffle(&mut rng);
        for (t1, t2) in order {
            let (px, py) = map.forward(CursorAngles::new(t1, t2));
            let (x, y) = loop {
                let (dx, dy) = noise.touch_offset(&mut rng);
                let (x, y) = ((px + dx).round() as i32, (py + dy).round() as i32);
                if TouchPoint::new(x, y).is_ok() {
                    break (x, y);
                }
            };
            out.push(CalibrationSample {
                target_theta1: t1,
                target_theta2: t2,
                x,
                y,
                participant_id: participant,
                session_index: session,
            });
        }
    }
    debug_assert!(out.iter().all(|s| s.x < PANEL_WIDTH && s.y < PANEL_HEIGHT));
    out
}

/// Calibration of several participants with the planted map and default
/// noise.
pub fn generate_cohort(participants: u32, seed: u64, noise: &NoiseModel) -> Vec<CalibrationSample> {
    let grid = CalibrationGrid::default();
    (0..participants)
        .flat_map(|p| generate_calibration(&grid, &PLANTED_MAP, noise, p, seed))
        .collect()
}

/// Refits the bundled default model from its synthetic calibration.
pub fn synthetic_default_model() -> Result<FittedMap, FitError> {
    fit_linear_map(&generate_cohort(
        DEFAULT_MODEL_PARTICIPANTS,
        DEFAULT_MODEL_SEED,
        &NoiseModel::default(),
    ))
}

#[derive(Serialize)]
struct Header<'a> {
    #[serde(rename = "type")]
    kind: &'a str,
    task: &'a str,
    seed: u64,
}

/// Header line followed by one sample per line.
pub fn calibration_to_jsonl(samples: &[CalibrationSample], seed: u64) -> String {
    let mut s = serde_json::to_string(&Header {
        kind: "header",
        task: "calibration",
        seed,
    })
    .expect("header serializes");
    s.push('\n');
    for sample in samples {
        s.push_str(&serde_json::to_string(sample).expect("sample serializes"));
        s.push('\n');
    }
    s
}

/// Reads calibration samples; an optional header line is skipped.
pub fn parse_calibration(text: &str) -> Result<Vec<CalibrationSample>, TraceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let schema = |e: serde_json::Error| TraceError::Schema {
            line: i + 1,
            message: e.to_string(),
        };
        let v: serde_json::Value = serde_json::from_str(raw).map_err(schema)?;
        if v.get("type").and_then(|t| t.as_str()) == Some("header") {
            continue;
        }
        let sample: CalibrationSample = serde_json::from_value(v).map_err(schema)?;
        if !sample.target_theta1.is_finite() || !sample.target_theta2.is_finite() {
            return Err(TraceError::Schema {
                line: i + 1,
                message: "non-finite target angle".into(),
            });
        }
        out.push(sample);
    }
    Ok(out)
}
