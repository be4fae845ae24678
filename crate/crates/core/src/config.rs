//! Bundled defaults.

use crate::mapping::FittedMap;

/// JSON text of the shipped mapping model.
pub const DEFAULT_MODEL_JSON: &str = include_str!("../config/default_model.json");

/// The shipped mapping model, fitted from a seeded synthetic calibration
/// (see `sim::calibration`).
pub fn default_model() -> FittedMap {
    serde_json::from_str(DEFAULT_MODEL_JSON).expect("bundled model is valid JSON")
}
