//! JSONL event traces and offline replay.
//!
//! The first line is a header naming the task, technique, seed and mapping
//! mode; every following line is one touch or head event.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::default_model;
use crate::input::{Channel, HeadPose, Input, PadSource, TouchAction, TouchEvent};
use crate::mapping::FittedMap;
use crate::protocol::{MappingModeName, ServerMessage};
use crate::session::{ConfigError, MonotonicityError, Session, SessionConfig};
use crate::task::{SceneConfig, TaskKind, TrialRecord};
use crate::technique::{Technique, TechniqueConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub task: TaskKind,
    pub technique: Technique,
    pub seed: u64,
    /// `null` for gaze techniques and for the technique default.
    pub mapping_mode: Option<MappingModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant: Option<u32>,
    /// Keyboard phrases, pinned so the trace does not depend on the corpus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phrases: Option<Vec<String>>,
    /// Mapping fit; the bundled default model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<FittedMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub technique_config: Option<TechniqueConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneConfig>,
}

impl TraceHeader {
    /// Header that reproduces `config`; settings equal to their defaults are
    /// left out.
    pub fn from_config(config: &SessionConfig) -> TraceHeader {
        let (mapping_mode, correction_fraction) = match config.mapping_mode {
            Some(m) => {
                let (name, f) = MappingModeName::of(m);
                (Some(name), f)
            }
            None => (None, None),
        };
        let phrases = if config.task == TaskKind::Keyboard {
            Some(config.task_spec().phrases)
        } else {
            None
        };
        TraceHeader {
            task: config.task,
            technique: config.technique,
            seed: config.seed,
            mapping_mode,
            correction_fraction,
            participant: Some(config.participant),
            phrases,
            model: (config.fit != default_model()).then_some(config.fit),
            technique_config: (config.technique_config != TechniqueConfig::default())
                .then_some(config.technique_config),
            scene: (config.scene != SceneConfig::default()).then(|| config.scene.clone()),
        }
    }

    pub fn session_config(&self) -> SessionConfig {
        let mut c = SessionConfig::new(self.task, self.technique, self.seed);
        c.mapping_mode = self
            .mapping_mode
            .map(|m| m.resolve(self.correction_fraction));
        c.participant = self.participant.unwrap_or(0);
        c.phrases = self.phrases.clone();
        if let Some(m) = self.model {
            c.fit = m;
        }
        if let Some(t) = self.technique_config {
            c.technique_config = t;
        }
        if let Some(s) = &self.scene {
            c.scene = s.clone();
        }
        c
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Header(TraceHeader),
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
}

impl Line {
    fn event(input: &Input) -> Line {
        match *input {
            Input::Touch(e) => Line::Touch {
                action: e.action,
                finger: e.finger,
                x: e.x,
                y: e.y,
                t_ms: e.t_ms,
                source: e.source,
            },
            Input::Head(h) => Line::Head {
                yaw_deg: h.yaw_deg,
                pitch_deg: h.pitch_deg,
                t_ms: h.t_ms,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<Input>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: {source}")]
    Monotonicity {
        line: usize,
        source: MonotonicityError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl TraceError {
    fn schema(line: usize, message: impl Into<String>) -> TraceError {
        TraceError::Schema {
            line,
            message: message.into(),
        }
    }
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut s =
            serde_json::to_string(&Line::Header(self.header.clone())).expect("header serializes");
        s.push('\n');
        for e in &self.events {
            s.push_str(&serde_json::to_string(&Line::event(e)).expect("event serializes"));
            s.push('\n');
        }
        s
    }

    /// Parses a trace and checks per-channel timestamp order. Line numbers
    /// in errors start at 1; blank lines are allowed anywhere.
    pub fn parse(text: &str) -> Result<Trace, TraceError> {
        let mut header = None;
        let mut events: Vec<Input> = Vec::new();
        let mut clock: HashMap<Channel, u64> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(raw).map_err(|e| TraceError::schema(line, e.to_string()))?;
            match (parsed, header.is_some()) {
                (Line::Header(h), false) => header = Some(h),
                (Line::Header(_), true) => return Err(TraceError::schema(line, "second header")),
                (_, false) => return Err(TraceError::schema(line, "expected header first")),
                (
                    Line::Touch {
                        action,
                        finger,
                        x,
                        y,
                        t_ms,
                        source,
                    },
                    true,
                ) => events.push(Input::Touch(TouchEvent {
                    t_ms,
                    action,
                    finger,
                    x,
                    y,
                    source,
                })),
                (
                    Line::Head {
                        yaw_deg,
                        pitch_deg,
                        t_ms,
                    },
                    true,
                ) => {
                    if !yaw_deg.is_finite() || !pitch_deg.is_finite() {
                        return Err(TraceError::schema(line, "non-finite head angle"));
                    }
                    events.push(Input::Head(HeadPose {
                        t_ms,
                        yaw_deg,
                        pitch_deg,
                    }))
                }
            }
            if let Some(e) = events.last() {
                let (channel, got) = (e.channel(), e.t_ms());
                match clock.insert(channel, got) {
                    Some(previous) if got < previous => {
                        return Err(TraceError::Monotonicity {
                            line,
                            source: MonotonicityError {
                                channel,
                                previous,
                                got,
                            },
                        })
                    }
                    _ => {}
                }
            }
        }
        let header = header.ok_or_else(|| TraceError::schema(1, "missing header"))?;
        Ok(Trace { header, events })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutput {
    pub records: Vec<TrialRecord>,
    pub abandoned: usize,
    pub messages: Vec<ServerMessage>,
}

/// Runs a trace through a fresh session. Unlike a live session, a
/// backwards timestamp is fatal; the reported line assumes a file without
/// blank lines.
pub fn replay(trace: &Trace) -> Result<ReplayOutput, TraceError> {
    let (mut session, mut messages) = Session::open(trace.header.session_config())?;
    for (i, e) in trace.events.iter().enumerate() {
        let out = session
            .handle(*e)
            .map_err(|source| TraceError::Monotonicity {
                line: i + 2,
                source,
            })?;
        messages.extend(out);
    }
    messages.push(session.summary());
    Ok(ReplayOutput {
        records: session.records().to_vec(),
        abandoned: session.abandoned(),
        messages,
    })
}

/// Trace of everything a session accepted so far.
pub fn session_trace(session: &Session) -> Trace {
    Trace {
        header: TraceHeader::from_config(session.config()),
        events: session.inputs().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MENU: &str = r#"{"type":"header","task":"menu15","technique":"two-fingers","seed":1,"mapping_mode":"absolute"}
{"type":"touch","action":"down","finger":0,"x":1280,"y":720,"t_ms":0,"source":"front"}
{"type":"touch","action":"up","finger":0,"x":1280,"y":720,"t_ms":50,"source":"front"}
"#;

    #[test]
    fn round_trip() {
        let t = Trace::parse(MENU).unwrap();
        assert_eq!(t.events.len(), 2);
        assert_eq!(t.header.mapping_mode, Some(MappingModeName::Absolute));
        assert_eq!(Trace::parse(&t.to_jsonl()).unwrap(), t);
    }

    #[test]
    fn schema_error_reports_line() {
        let bad = MENU.replace(r#""action":"up""#, r#""action":"sideways""#);
        match Trace::parse(&bad) {
            Err(TraceError::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match Trace::parse(r#"{"type":"head","yaw_deg":0,"pitch_deg":0,"t_ms":0}"#) {
            Err(TraceError::Schema { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn backwards_time_is_rejected() {
        let mut t = Trace::parse(MENU).unwrap();
        t.events.swap(0, 1);
        assert!(matches!(
            Trace::parse(&t.to_jsonl()),
            Err(TraceError::Monotonicity { line: 3, .. })
        ));
        assert!(matches!(
            replay(&t),
            Err(TraceError::Monotonicity { line: 3, .. })
        ));
    }

    #[test]
    fn header_round_trips_config() {
        let mut c = SessionConfig::new(TaskKind::Keyboard, Technique::DragNTap, 4);
        c.participant = 3;
        c.mapping_mode = Some(crate::mapping::MappingMode::Hybrid {
            correction_fraction: 0.5,
        });
        c.technique_config.debounce_ms = None;
        let h = TraceHeader::from_config(&c);
        assert!(h.model.is_none());
        let mut back = h.session_config();
        assert_eq!(back.phrases.as_deref(), Some(&c.task_spec().phrases[..]));
        back.phrases = None;
        assert_eq!(back, c);
    }
}
