//! One running session: inputs in, protocol messages out.
//!
//! Live serving and offline replay both drive this type, so their outputs
//! agree by construction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::default_model;
use crate::input::{Channel, Input};
use crate::mapping::{CursorAngles, FittedMap, MappingMode};
use crate::metrics::phrase_metrics;
use crate::picking::{emit_ui_event, make_ray, pick};
use crate::protocol::{LiveMetrics, ServerMessage, UiEventKind};
use crate::scene::{Camera, NodeId, Scene, SceneError};
use crate::task::{SceneConfig, TaskKind, TaskOutput, TaskRunner, TaskSpec, TrialRecord};
use crate::technique::{Action, Technique, TechniqueConfig, TechniqueState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub task: TaskKind,
    pub technique: Technique,
    /// `None` selects the technique default. Must be `None` for gaze
    /// techniques.
    pub mapping_mode: Option<MappingMode>,
    pub seed: u64,
    pub participant: u32,
    pub fit: FittedMap,
    pub technique_config: TechniqueConfig,
    pub scene: SceneConfig,
    /// Keyboard phrases; drawn from the bundled corpus with `seed` when
    /// absent.
    pub phrases: Option<Vec<String>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0} does not take a mapping mode")]
    GazeMapping(Technique),
    #[error("invalid mapping mode: {0}")]
    Mapping(String),
    #[error("invalid scene: {0}")]
    Scene(#[from] SceneError),
}

impl SessionConfig {
    pub fn new(task: TaskKind, technique: Technique, seed: u64) -> SessionConfig {
        SessionConfig {
            task,
            technique,
            mapping_mode: None,
            seed,
            participant: 0,
            fit: default_model(),
            technique_config: TechniqueConfig::default(),
            scene: SceneConfig::default(),
            phrases: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(mode) = self.mapping_mode {
            if self.technique.is_gaze() {
                return Err(ConfigError::GazeMapping(self.technique));
            }
            mode.validate().map_err(ConfigError::Mapping)?;
        }
        Ok(())
    }

    pub fn task_spec(&self) -> TaskSpec {
        let mut spec = TaskSpec::new(self.task, self.technique, self.seed);
        spec.scene = self.scene.clone();
        if self.task == TaskKind::Keyboard {
            if let Some(p) = &self.phrases {
                spec.phrases = p.clone();
            }
        }
        spec
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("{channel:?} timestamp went back from {previous} to {got} ms")]
pub struct MonotonicityError {
    pub channel: Channel,
    pub previous: u64,
    pub got: u64,
}

#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    spec: TaskSpec,
    scene: Scene,
    technique: TechniqueState,
    runner: TaskRunner,
    hover: Option<NodeId>,
    clock: HashMap<Channel, u64>,
    records: Vec<TrialRecord>,
    inputs: Vec<Input>,
    off_screen: usize,
}

impl Session {
    /// Builds the session and returns it with its opening messages, the
    /// first of which is always the scene snapshot.
    pub fn open(config: SessionConfig) -> Result<(Session, Vec<ServerMessage>), ConfigError> {
        config.validate()?;
        let spec = config.task_spec();
        let mut scene = spec.build_scene()?;
        scene.update_world_transforms(Camera::default());
        let mut runner = TaskRunner::new(&spec, config.participant, &scene);
        let technique = TechniqueState::new(
            config.technique,
            config.fit,
            config.mapping_mode,
            config.technique_config,
        );
        let begin = runner.begin(&mut scene);
        let mut session = Session {
            config,
            spec,
            scene,
            technique,
            runner,
            hover: None,
            clock: HashMap::new(),
            records: Vec::new(),
            inputs: Vec::new(),
            off_screen: 0,
        };
        let mut out = vec![session.scene_message()];
        for o in begin {
            session.task_output(o, &mut out);
        }
        Ok((session, out))
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn runner(&self) -> &TaskRunner {
        &self.runner
    }

    pub fn technique(&self) -> &TechniqueState {
        &self.technique
    }

    pub fn camera(&self) -> Camera {
        self.scene.camera()
    }

    pub fn cursor(&self) -> CursorAngles {
        self.technique.cursor()
    }

    pub fn hover(&self) -> Option<NodeId> {
        self.hover
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    /// Every accepted input, in order. Replaying these reproduces the
    /// session exactly.
    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn is_finished(&self) -> bool {
        self.runner.is_finished()
    }

    /// Node under the cursor for the current head pose.
    pub fn pick_cursor(&self) -> Option<NodeId> {
        let ray = make_ray(&self.scene.camera(), self.cursor());
        pick(&self.scene, &ray).map(|p| p.node_id)
    }

    /// Consumes one input. A timestamp earlier than the last one on the same
    /// channel is rejected and leaves the session untouched.
    pub fn handle(&mut self, input: Input) -> Result<Vec<ServerMessage>, MonotonicityError> {
        let channel = input.channel();
        let t = input.t_ms();
        if let Some(&previous) = self.clock.get(&channel) {
            if t < previous {
                return Err(MonotonicityError {
                    channel,
                    previous,
                    got: t,
                });
            }
        }
        self.clock.insert(channel, t);
        self.inputs.push(input);
        let mut out = Vec::new();
        if let Input::Head(h) = input {
            self.scene
                .update_world_transforms(Camera::new(h.yaw_deg, h.pitch_deg));
            if self.scene.has_view_fixed() {
                out.push(self.scene_message());
            }
            self.refresh_hover(t, false, &mut out);
            return Ok(out);
        }
        for action in self.technique.step(&input) {
            match action {
                Action::CursorMoved(c) => {
                    out.push(ServerMessage::Cursor {
                        theta1_deg: c.theta1,
                        theta2_deg: c.theta2,
                    });
                    self.refresh_hover(t, false, &mut out);
                }
                Action::Commit(c) => {
                    let ray = make_ray(&self.scene.camera(), c);
                    let hit = pick(&self.scene, &ray).map(|p| p.node_id);
                    let selected = self.ui_events(hit, t, true, &mut out);
                    for o in self.runner.on_commit(&mut self.scene, t, selected) {
                        self.task_output(o, &mut out);
                    }
                }
                Action::OffScreenCancel => {
                    self.off_screen += 1;
                    out.push(ServerMessage::OffScreen { t_ms: t });
                }
            }
        }
        Ok(out)
    }

    fn refresh_hover(&mut self, t: u64, commit: bool, out: &mut Vec<ServerMessage>) {
        let hit = self.pick_cursor();
        self.ui_events(hit, t, commit, out);
    }

    /// Emits hover and selection events, returning the selected node.
    fn ui_events(
        &mut self,
        hit: Option<NodeId>,
        t: u64,
        commit: bool,
        out: &mut Vec<ServerMessage>,
    ) -> Option<NodeId> {
        let mut selected = None;
        for e in emit_ui_event(&self.scene, self.hover, hit, commit) {
            let (kind, node_id) = UiEventKind::split(e);
            if kind == UiEventKind::Select {
                selected = node_id;
            }
            out.push(ServerMessage::UiEvent {
                kind,
                node_id,
                t_ms: t,
            });
        }
        self.hover = hit;
        selected
    }

    fn task_output(&mut self, o: TaskOutput, out: &mut Vec<ServerMessage>) {
        match o {
            TaskOutput::Trial(r) => {
                self.records.push(r.clone());
                out.push(ServerMessage::Trial(r));
                out.push(ServerMessage::Metrics(self.live_metrics()));
            }
            TaskOutput::KeyClick { t_ms } => out.push(ServerMessage::KeyClick { t_ms }),
            TaskOutput::Text {
                presented,
                transcribed,
            } => out.push(ServerMessage::Text {
                presented,
                transcribed,
            }),
            TaskOutput::SceneChanged => out.push(self.scene_message()),
            TaskOutput::Finished => {}
        }
    }

    fn scene_message(&self) -> ServerMessage {
        ServerMessage::Scene {
            nodes: self.scene.snapshot().nodes,
        }
    }

    pub fn live_metrics(&self) -> LiveMetrics {
        let n = self.records.len();
        let correct = self.records.iter().filter(|r| r.correct).count();
        let mean_time_s = if n == 0 {
            0.0
        } else {
            self.records
                .iter()
                .map(|r| r.duration_ms() as f64 / 1000.0)
                .sum::<f64>()
                / n as f64
        };
        let (wpm, error_rate_pct) = if self.config.task == TaskKind::Keyboard {
            let scored: Vec<(f64, f64)> = self.records.iter().filter_map(phrase_metrics).collect();
            if scored.is_empty() {
                (None, None)
            } else {
                let k = scored.len() as f64;
                (
                    Some(scored.iter().map(|s| s.0).sum::<f64>() / k),
                    Some(scored.iter().map(|s| s.1).sum::<f64>() / k),
                )
            }
        } else {
            (None, None)
        };
        LiveMetrics {
            trials: n,
            correct,
            accuracy_pct: if n == 0 {
                0.0
            } else {
                correct as f64 / n as f64 * 100.0
            },
            mean_time_s,
            wpm,
            error_rate_pct,
            off_screen: self.off_screen,
        }
    }

    /// Trials the task expected but never recorded.
    pub fn abandoned(&self) -> usize {
        self.spec
            .expected_records()
            .saturating_sub(self.records.len())
    }

    pub fn summary(&self) -> ServerMessage {
        ServerMessage::Summary {
            records: self.records.clone(),
            abandoned: self.abandoned(),
        }
    }
}
