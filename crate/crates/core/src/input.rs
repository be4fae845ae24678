//! Raw input events: touchpad contacts and head pose updates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Front touch panel resolution in pixels.
pub const PANEL_WIDTH: i32 = 2560;
pub const PANEL_HEIGHT: i32 = 1440;

/// Pixel on the front panel, always inside `[0, 2559] x [0, 1439]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TouchPoint {
    x: i32,
    y: i32,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("touch ({x}, {y}) is outside the panel")]
pub struct OffScreen {
    pub x: i32,
    pub y: i32,
}

impl TouchPoint {
    pub fn new(x: i32, y: i32) -> Result<TouchPoint, OffScreen> {
        if (0..PANEL_WIDTH).contains(&x) && (0..PANEL_HEIGHT).contains(&y) {
            Ok(TouchPoint { x, y })
        } else {
            Err(OffScreen { x, y })
        }
    }

    pub fn center() -> TouchPoint {
        TouchPoint {
            x: PANEL_WIDTH / 2,
            y: PANEL_HEIGHT / 2,
        }
    }

    pub fn x(&self) -> i32 {
        self.x
    }

    pub fn y(&self) -> i32 {
        self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TouchAction {
    Down,
    Move,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadSource {
    #[default]
    Front,
    Side,
}

/// One touch contact sample. Coordinates are raw panel pixels and may lie
/// outside the panel (an off-screen contact).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouchEvent {
    pub t_ms: u64,
    pub action: TouchAction,
    pub finger: u8,
    pub x: i32,
    pub y: i32,
    #[serde(default)]
    pub source: PadSource,
}

impl TouchEvent {
    pub fn new(t_ms: u64, action: TouchAction, finger: u8, x: i32, y: i32) -> Self {
        TouchEvent {
            t_ms,
            action,
            finger,
            x,
            y,
            source: PadSource::Front,
        }
    }

    pub fn side(t_ms: u64, action: TouchAction, finger: u8) -> Self {
        TouchEvent {
            t_ms,
            action,
            finger,
            x: 0,
            y: 0,
            source: PadSource::Side,
        }
    }

    /// Panel point, or [`OffScreen`] when outside the front panel. Side-pad
    /// positions are not bounds-checked.
    pub fn point(&self) -> Result<TouchPoint, OffScreen> {
        match self.source {
            PadSource::Front => TouchPoint::new(self.x, self.y),
            PadSource::Side => Ok(TouchPoint {
                x: self.x.clamp(0, PANEL_WIDTH - 1),
                y: self.y.clamp(0, PANEL_HEIGHT - 1),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadPose {
    pub t_ms: u64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
}

/// Anything a session consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Input {
    Touch(TouchEvent),
    Head(HeadPose),
}

impl Input {
    pub fn t_ms(&self) -> u64 {
        match self {
            Input::Touch(t) => t.t_ms,
            Input::Head(h) => h.t_ms,
        }
    }

    /// Channel used for timestamp monotonicity checks.
    pub fn channel(&self) -> Channel {
        match self {
            Input::Touch(t) => match t.source {
                PadSource::Front => Channel::Front,
                PadSource::Side => Channel::Side,
            },
            Input::Head(_) => Channel::Head,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Front,
    Side,
    Head,
}
