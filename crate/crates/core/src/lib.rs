//! Headless engine for front-touch selection in head-mounted displays.
//!
//! The crate covers the scene graph and ray picking, touchpad-to-view
//! mapping, the selection technique state machines, the study tasks, text
//! entry metrics and statistics, and a simulated-user harness.

pub mod config;
pub mod connection;
pub mod geometry;
pub mod input;
pub mod mapping;
pub mod metrics;
pub mod picking;
pub mod protocol;
pub mod scene;
pub mod session;
pub mod sim;
pub mod stats;
pub mod task;
pub mod technique;
pub mod trace;

pub use geometry::{Aabb, Mat3, Transform, Vec3};
pub use input::{HeadPose, Input, OffScreen, PadSource, TouchAction, TouchEvent, TouchPoint};
pub use mapping::{
    fit_linear_map, CalibrationSample, CursorAngles, FitError, FittedMap, GainCurve, MappingMode,
    MappingModel,
};
pub use picking::{emit_ui_event, make_ray, pick, PickResult, Ray, UiEvent};
pub use scene::{Attachment, Camera, NodeId, Scene, SceneError, SceneNode, UiRole};
pub use session::{ConfigError, MonotonicityError, Session, SessionConfig};
pub use task::{TaskKind, TaskSpec, TrialRecord};
pub use technique::{Action, Technique, TechniqueConfig, TechniqueState};
pub use trace::{replay, Trace, TraceError, TraceHeader};
