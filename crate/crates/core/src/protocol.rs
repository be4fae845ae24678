//! Session wire messages (JSON text frames).
//!
//! Every message is an object whose `type` field names the variant. Angles
//! are degrees, times are session-relative milliseconds.

use serde::{Deserialize, Serialize};

use crate::input::{HeadPose, Input, PadSource, TouchAction, TouchEvent};
use crate::mapping::MappingMode;
use crate::picking::UiEvent;
use crate::scene::{NodeId, NodeSnapshot};
use crate::task::{TaskKind, TrialRecord};
use crate::technique::Technique;

/// Mapping mode as written in traces and `start_session`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingModeName {
    Absolute,
    Relative,
    Hybrid,
}

impl MappingModeName {
    pub fn resolve(self, correction_fraction: Option<f64>) -> MappingMode {
        match self {
            MappingModeName::Absolute => MappingMode::Absolute,
            MappingModeName::Relative => MappingMode::Relative,
            MappingModeName::Hybrid => MappingMode::Hybrid {
                correction_fraction: correction_fraction
                    .unwrap_or(MappingMode::DEFAULT_CORRECTION_FRACTION),
            },
        }
    }

    /// Name and correction fraction of a mode.
    pub fn of(mode: MappingMode) -> (MappingModeName, Option<f64>) {
        match mode {
            MappingMode::Absolute => (MappingModeName::Absolute, None),
            MappingMode::Relative => (MappingModeName::Relative, None),
            MappingMode::Hybrid {
                correction_fraction,
            } => (MappingModeName::Hybrid, Some(correction_fraction)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    StartSession {
        task: TaskKind,
        technique: Technique,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mapping_mode: Option<MappingModeName>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        correction_fraction: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
    Touch {
        action: TouchAction,
        finger: u8,
        x: i32,
        y: i32,
        t_ms: u64,
        #[serde(default)]
        source: PadSource,
    },
    Head {
        yaw_deg: f64,
        pitch_deg: f64,
        t_ms: u64,
    },
    EndSession {},
}

impl ClientMessage {
    pub fn input(&self) -> Option<Input> {
        match *self {
            ClientMessage::Touch {
                action,
                finger,
                x,
                y,
                t_ms,
                source,
            } => Some(Input::Touch(TouchEvent {
                t_ms,
                action,
                finger,
                x,
                y,
                source,
            })),
            ClientMessage::Head {
                yaw_deg,
                pitch_deg,
                t_ms,
            } => Some(Input::Head(HeadPose {
                t_ms,
                yaw_deg,
                pitch_deg,
            })),
            _ => None,
        }
    }

    pub fn from_input(input: &Input) -> ClientMessage {
        match *input {
            Input::Touch(e) => ClientMessage::Touch {
                action: e.action,
                finger: e.finger,
                x: e.x,
                y: e.y,
                t_ms: e.t_ms,
                source: e.source,
            },
            Input::Head(h) => ClientMessage::Head {
                yaw_deg: h.yaw_deg,
                pitch_deg: h.pitch_deg,
                t_ms: h.t_ms,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UiEventKind {
    HoverEnter,
    HoverExit,
    Select,
    SelectMiss,
}

impl UiEventKind {
    pub fn split(e: UiEvent) -> (UiEventKind, Option<NodeId>) {
        match e {
            UiEvent::HoverEnter(n) => (UiEventKind::HoverEnter, Some(n)),
            UiEvent::HoverExit(n) => (UiEventKind::HoverExit, Some(n)),
            UiEvent::Select(n) => (UiEventKind::Select, Some(n)),
            UiEvent::SelectMiss => (UiEventKind::SelectMiss, None),
        }
    }
}

/// Running figures for the current session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiveMetrics {
    pub trials: usize,
    pub correct: usize,
    pub accuracy_pct: f64,
    pub mean_time_s: f64,
    /// Keyboard only.
    pub wpm: Option<f64>,
    pub error_rate_pct: Option<f64>,
    pub off_screen: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Scene {
        nodes: Vec<NodeSnapshot>,
    },
    Cursor {
        theta1_deg: f64,
        theta2_deg: f64,
    },
    UiEvent {
        kind: UiEventKind,
        node_id: Option<NodeId>,
        t_ms: u64,
    },
    KeyClick {
        t_ms: u64,
    },
    OffScreen {
        t_ms: u64,
    },
    Text {
        presented: String,
        transcribed: String,
    },
    Trial(TrialRecord),
    Metrics(LiveMetrics),
    Summary {
        records: Vec<TrialRecord>,
        abandoned: usize,
    },
    Error {
        code: ErrorCode,
        detail: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Unparseable or invalid message; it was dropped.
    Schema,
    /// Timestamp went backwards on its channel; the event was dropped.
    Monotonicity,
    /// Input before `start_session` or a second `start_session`.
    State,
    /// Invalid session configuration.
    Config,
}

impl ServerMessage {
    pub fn error(code: ErrorCode, detail: impl Into<String>) -> ServerMessage {
        ServerMessage::Error {
            code,
            detail: detail.into(),
        }
    }
}
