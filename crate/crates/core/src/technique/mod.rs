//! Selection techniques as event-driven state machines.
//!
//! Each technique consumes touch events (and head poses, which it ignores:
//! the session moves the camera) and emits cursor updates, commits and
//! off-screen cancellations. [`TechniqueState::step`] is the implementation
//! used at runtime; [`table`] holds the same behaviour as a declarative
//! transition table, interpreted by [`TableMachine`] for cross-checking.

pub mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::input::{Input, PadSource, TouchAction, TouchEvent, TouchPoint};
use crate::mapping::{CursorAngles, FittedMap, MappingMode, MappingModel};

pub use table::{legal_transitions, TableMachine, TransitionTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Technique {
    SideGaze,
    FrontGaze,
    FrontWorld,
    FrontView,
    TwoFingers,
    DragNTap,
}

impl Technique {
    pub const ALL: [Technique; 6] = [
        Technique::SideGaze,
        Technique::FrontGaze,
        Technique::FrontWorld,
        Technique::FrontView,
        Technique::TwoFingers,
        Technique::DragNTap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Technique::SideGaze => "side-gaze",
            Technique::FrontGaze => "front-gaze",
            Technique::FrontWorld => "front-world",
            Technique::FrontView => "front-view",
            Technique::TwoFingers => "two-fingers",
            Technique::DragNTap => "drag-n-tap",
        }
    }

    pub fn is_gaze(&self) -> bool {
        matches!(self, Technique::SideGaze | Technique::FrontGaze)
    }

    /// The pad whose events the technique listens to.
    pub fn pad(&self) -> PadSource {
        match self {
            Technique::SideGaze => PadSource::Side,
            _ => PadSource::Front,
        }
    }

    /// Mapping mode used when none is configured; `None` for gaze techniques,
    /// whose cursor never leaves the view center.
    pub fn default_mapping(&self) -> Option<MappingMode> {
        match self {
            Technique::SideGaze | Technique::FrontGaze => None,
            Technique::DragNTap => Some(MappingMode::Relative),
            _ => Some(MappingMode::Absolute),
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown technique '{0}'")]
pub struct UnknownTechnique(pub String);

impl FromStr for Technique {
    type Err = UnknownTechnique;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| UnknownTechnique(s.to_string()))
    }
}

/// Tap and timing thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TechniqueConfig {
    /// A press is a tap if it lasts at most this long...
    pub tap_max_ms: u64,
    /// ...and never strays further than this from its touch-down point.
    pub tap_max_px: f64,
    /// Drag-n-Tap: how long after the drag lift a re-tap may start.
    pub retap_window_ms: u64,
    /// Drag-n-Tap: how close to the drag lift point a re-tap must land.
    pub retap_radius_px: f64,
    /// Commits closer together than this are dropped; `None` disables the
    /// guard.
    pub debounce_ms: Option<u64>,
}

impl Default for TechniqueConfig {
    fn default() -> Self {
        TechniqueConfig {
            tap_max_ms: 200,
            tap_max_px: 20.0,
            retap_window_ms: 400,
            retap_radius_px: 60.0,
            debounce_ms: Some(150),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "angles")]
pub enum Action {
    CursorMoved(CursorAngles),
    Commit(CursorAngles),
    /// A contact went outside the panel; pending taps are void.
    OffScreenCancel,
}

/// Drops commits that follow an earlier one within the debounce interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Debounce {
    last_commit: Option<u64>,
}

impl Debounce {
    pub fn filter(&mut self, window: Option<u64>, t_ms: u64, actions: &mut Vec<Action>) {
        actions.retain(|a| {
            if !matches!(a, Action::Commit(_)) {
                return true;
            }
            let blocked = match (window, self.last_commit) {
                (Some(w), Some(last)) => t_ms.saturating_sub(last) < w,
                _ => false,
            };
            if !blocked {
                self.last_commit = Some(t_ms);
            }
            !blocked
        });
    }

    pub fn last_commit(&self) -> Option<u64> {
        self.last_commit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Primary,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Press {
    finger: u8,
    role: Role,
    t_down: u64,
    down: TouchPoint,
    max_travel: f64,
    spoiled: bool,
}

/// Drag-n-Tap phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DragPhase {
    Idle,
    Dragging,
    Armed,
    Retap,
}

fn dist(a: TouchPoint, b: TouchPoint) -> f64 {
    ((a.x() - b.x()) as f64).hypot((a.y() - b.y()) as f64)
}

/// Live state of one technique in one session.
#[derive(Debug, Clone)]
pub struct TechniqueState {
    pub technique: Technique,
    pub config: TechniqueConfig,
    mapping: MappingModel,
    presses: Vec<Press>,
    /// Time and place of the last on-screen lift of a registered finger.
    last_lift: Option<(u64, TouchPoint)>,
    latched: Option<CursorAngles>,
    phase: DragPhase,
    debounce: Debounce,
}

impl TechniqueState {
    /// `mode` falls back to the technique default; gaze techniques ignore it.
    pub fn new(
        technique: Technique,
        fit: FittedMap,
        mode: Option<MappingMode>,
        config: TechniqueConfig,
    ) -> Self {
        let mode = mode
            .or(technique.default_mapping())
            .unwrap_or(MappingMode::Absolute);
        TechniqueState {
            technique,
            config,
            mapping: MappingModel::new(fit, mode),
            presses: Vec::new(),
            last_lift: None,
            latched: None,
            phase: DragPhase::Idle,
            debounce: Debounce::default(),
        }
    }

    pub fn with_defaults(technique: Technique, fit: FittedMap) -> Self {
        Self::new(technique, fit, None, TechniqueConfig::default())
    }

    pub fn mapping(&self) -> &MappingModel {
        &self.mapping
    }

    /// View-relative cursor; always the view center for gaze techniques.
    pub fn cursor(&self) -> CursorAngles {
        if self.technique.is_gaze() {
            CursorAngles::ZERO
        } else {
            self.mapping.cursor()
        }
    }

    pub fn fingers_down(&self) -> usize {
        self.presses.len()
    }

    pub fn last_commit(&self) -> Option<u64> {
        self.debounce.last_commit()
    }

    pub fn step(&mut self, input: &Input) -> Vec<Action> {
        let Input::Touch(ev) = input else {
            return Vec::new();
        };
        if ev.source != self.technique.pad() {
            return Vec::new();
        }
        let mut out = Vec::new();
        self.touch(ev, &mut out);
        self.debounce
            .filter(self.config.debounce_ms, ev.t_ms, &mut out);
        out
    }

    fn touch(&mut self, ev: &TouchEvent, out: &mut Vec<Action>) {
        let pos = ev.point().ok();
        let idx = self.presses.iter().position(|p| p.finger == ev.finger);
        match ev.action {
            TouchAction::Down => {
                if idx.is_some() {
                    return;
                }
                match pos {
                    Some(p) => self.on_down(ev.t_ms, ev.finger, p, out),
                    None => {
                        self.off_screen(out);
                        if self.phase == DragPhase::Armed {
                            self.phase = DragPhase::Idle;
                        }
                    }
                }
            }
            TouchAction::Move => {
                let Some(i) = idx else { return };
                match pos {
                    Some(p) => {
                        let travel = dist(p, self.presses[i].down);
                        let press = &mut self.presses[i];
                        press.max_travel = press.max_travel.max(travel);
                        self.on_move(i, p, out);
                    }
                    None => {
                        self.off_screen(out);
                        if self.phase == DragPhase::Retap {
                            self.phase = DragPhase::Dragging;
                        }
                    }
                }
            }
            TouchAction::Up => {
                let Some(i) = idx else { return };
                let press = self.presses.remove(i);
                match pos {
                    Some(p) => {
                        let tap = !press.spoiled
                            && ev.t_ms.saturating_sub(press.t_down) <= self.config.tap_max_ms
                            && press.max_travel.max(dist(p, press.down)) <= self.config.tap_max_px;
                        self.last_lift = Some((ev.t_ms, p));
                        self.on_up(press, Some(tap), out);
                    }
                    None => {
                        self.off_screen(out);
                        self.on_up(press, None, out);
                    }
                }
            }
        }
    }

    fn off_screen(&mut self, out: &mut Vec<Action>) {
        for p in &mut self.presses {
            p.spoiled = true;
        }
        self.last_lift = None;
        out.push(Action::OffScreenCancel);
    }

    fn register(&mut self, t_ms: u64, finger: u8, role: Role, p: TouchPoint) {
        self.presses.push(Press {
            finger,
            role,
            t_down: t_ms,
            down: p,
            max_travel: 0.0,
            spoiled: false,
        });
    }

    fn has(&self, role: Role) -> bool {
        self.presses.iter().any(|p| p.role == role)
    }

    fn start_drag(&mut self, p: TouchPoint, out: &mut Vec<Action>) {
        self.mapping.touch_down(p);
        out.push(Action::CursorMoved(self.mapping.cursor()));
    }

    fn on_down(&mut self, t: u64, finger: u8, p: TouchPoint, out: &mut Vec<Action>) {
        match self.technique {
            Technique::SideGaze | Technique::FrontGaze => {
                if self.presses.len() < 2 {
                    let role = if self.has(Role::Primary) {
                        Role::Secondary
                    } else {
                        Role::Primary
                    };
                    self.register(t, finger, role, p);
                }
            }
            Technique::FrontWorld | Technique::FrontView => {
                if self.presses.is_empty() {
                    self.register(t, finger, Role::Primary, p);
                    self.start_drag(p, out);
                }
            }
            Technique::TwoFingers => match (self.has(Role::Primary), self.has(Role::Secondary)) {
                (false, false) => {
                    self.register(t, finger, Role::Primary, p);
                    self.start_drag(p, out);
                }
                (true, false) => {
                    self.register(t, finger, Role::Secondary, p);
                    self.latched = Some(self.mapping.cursor());
                }
                _ => {}
            },
            Technique::DragNTap => {
                if !self.presses.is_empty() {
                    return;
                }
                self.register(t, finger, Role::Primary, p);
                let near = self.phase == DragPhase::Armed
                    && self.last_lift.is_some_and(|(lt, lp)| {
                        t.saturating_sub(lt) <= self.config.retap_window_ms
                            && dist(p, lp) <= self.config.retap_radius_px
                    });
                if near {
                    self.phase = DragPhase::Retap;
                } else {
                    self.phase = DragPhase::Dragging;
                    self.start_drag(p, out);
                }
            }
        }
    }

    fn on_move(&mut self, i: usize, p: TouchPoint, out: &mut Vec<Action>) {
        let press = self.presses[i];
        match self.technique {
            Technique::SideGaze | Technique::FrontGaze => {}
            Technique::FrontWorld | Technique::FrontView | Technique::TwoFingers => {
                if press.role == Role::Primary {
                    self.mapping.touch_move(p);
                    out.push(Action::CursorMoved(self.mapping.cursor()));
                }
            }
            Technique::DragNTap => match self.phase {
                DragPhase::Dragging => {
                    self.mapping.touch_move(p);
                    out.push(Action::CursorMoved(self.mapping.cursor()));
                }
                DragPhase::Retap if dist(p, press.down) > self.config.tap_max_px => {
                    self.phase = DragPhase::Dragging;
                    self.start_drag(p, out);
                }
                _ => {}
            },
        }
    }

    /// `tap` is `None` for an off-screen lift.
    fn on_up(&mut self, press: Press, tap: Option<bool>, out: &mut Vec<Action>) {
        match self.technique {
            Technique::SideGaze | Technique::FrontGaze => {
                if tap == Some(true) {
                    out.push(Action::Commit(CursorAngles::ZERO));
                }
            }
            Technique::FrontWorld | Technique::FrontView => {
                self.mapping.touch_up();
                if tap == Some(true) {
                    out.push(Action::Commit(self.mapping.cursor()));
                }
            }
            Technique::TwoFingers => match press.role {
                Role::Primary => self.mapping.touch_up(),
                Role::Secondary => {
                    let latched = self.latched.take();
                    if tap == Some(true) && self.has(Role::Primary) {
                        if let Some(c) = latched {
                            out.push(Action::Commit(c));
                        }
                    }
                }
            },
            Technique::DragNTap => {
                self.mapping.touch_up();
                self.phase = match (self.phase, tap) {
                    (_, None) => DragPhase::Idle,
                    (DragPhase::Retap, Some(true)) => {
                        out.push(Action::Commit(self.mapping.cursor()));
                        DragPhase::Idle
                    }
                    _ => DragPhase::Armed,
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit() -> FittedMap {
        FittedMap::exact(40.0, 1280.0, -35.0, 720.0)
    }

    fn front(t: u64, action: TouchAction, finger: u8, x: i32, y: i32) -> Input {
        Input::Touch(TouchEvent::new(t, action, finger, x, y))
    }

    fn commits(actions: &[Action]) -> usize {
        actions
            .iter()
            .filter(|a| matches!(a, Action::Commit(_)))
            .count()
    }

    fn run(state: &mut TechniqueState, inputs: &[Input]) -> Vec<Action> {
        inputs.iter().flat_map(|i| state.step(i)).collect()
    }

    use TouchAction::{Down, Move, Up};

    #[test]
    fn names_round_trip() {
        for t in Technique::ALL {
            assert_eq!(t.name().parse::<Technique>().unwrap(), t);
            assert_eq!(
                serde_json::to_string(&t).unwrap(),
                format!("\"{}\"", t.name())
            );
        }
        assert!("side".parse::<Technique>().is_err());
    }

    #[test]
    fn two_fingers_single_commit() {
        let mut s = TechniqueState::with_defaults(Technique::TwoFingers, fit());
        let out = run(
            &mut s,
            &[
                front(0, Down, 0, 1280, 720),
                front(16, Move, 0, 1320, 720),
                front(100, Down, 1, 1800, 900),
                front(150, Up, 1, 1800, 900),
            ],
        );
        assert_eq!(commits(&out), 1);
        assert_eq!(
            out.last(),
            Some(&Action::Commit(CursorAngles::new(1.0, 0.0)))
        );
        assert!(run(&mut s, &[front(400, Up, 0, 1320, 720)]).is_empty());
    }

    #[test]
    fn two_fingers_no_commit_when_dragger_lifts_first() {
        let mut s = TechniqueState::with_defaults(Technique::TwoFingers, fit());
        let out = run(
            &mut s,
            &[
                front(0, Down, 0, 1280, 720),
                front(50, Down, 1, 1800, 900),
                front(80, Up, 0, 1280, 720),
                front(120, Up, 1, 1800, 900),
            ],
        );
        assert_eq!(commits(&out), 0);
    }

    #[test]
    fn drag_n_tap_expired_window() {
        let mut s = TechniqueState::with_defaults(Technique::DragNTap, fit());
        let out = run(
            &mut s,
            &[
                front(0, Down, 0, 1000, 700),
                front(50, Move, 0, 1100, 700),
                front(100, Up, 0, 1100, 700),
                front(600, Down, 0, 1100, 700),
                front(650, Up, 0, 1100, 700),
            ],
        );
        assert_eq!(commits(&out), 0);
    }

    #[test]
    fn drag_n_tap_retap_commits_without_moving() {
        let mut s = TechniqueState::with_defaults(Technique::DragNTap, fit());
        let out = run(
            &mut s,
            &[
                front(0, Down, 0, 1000, 700),
                front(50, Move, 0, 1080, 700),
                front(100, Up, 0, 1080, 700),
            ],
        );
        let cursor = s.cursor();
        assert_eq!(cursor, CursorAngles::new(2.0, 0.0));
        assert_eq!(commits(&out), 0);
        let out = run(
            &mut s,
            &[front(300, Down, 0, 1090, 705), front(360, Up, 0, 1092, 705)],
        );
        assert_eq!(out, vec![Action::Commit(cursor)]);
    }

    #[test]
    fn side_gaze_commits_at_center_and_ignores_front() {
        let mut s = TechniqueState::with_defaults(Technique::SideGaze, fit());
        let head = Input::Head(crate::input::HeadPose {
            t_ms: 0,
            yaw_deg: 20.0,
            pitch_deg: 0.0,
        });
        assert!(s.step(&head).is_empty());
        assert!(run(&mut s, &[front(10, Down, 0, 5, 5), front(20, Up, 0, 5, 5)]).is_empty());
        let out = run(
            &mut s,
            &[
                Input::Touch(TouchEvent::side(30, Down, 0)),
                Input::Touch(TouchEvent::side(90, Up, 0)),
            ],
        );
        assert_eq!(out, vec![Action::Commit(CursorAngles::ZERO)]);
    }

    #[test]
    fn front_gaze_ignores_touch_position() {
        let mut s = TechniqueState::with_defaults(Technique::FrontGaze, fit());
        let out = run(
            &mut s,
            &[front(0, Down, 0, 2400, 100), front(50, Up, 0, 2400, 100)],
        );
        assert_eq!(out, vec![Action::Commit(CursorAngles::ZERO)]);
    }

    #[test]
    fn off_screen_cancels_pending_tap() {
        let mut s = TechniqueState::with_defaults(Technique::FrontWorld, fit());
        let out = run(
            &mut s,
            &[
                front(0, Down, 0, 2550, 720),
                front(20, Move, 0, 2570, 720),
                front(40, Move, 0, 2550, 720),
                front(60, Up, 0, 2550, 720),
            ],
        );
        assert!(out.contains(&Action::OffScreenCancel));
        assert_eq!(commits(&out), 0);
    }

    #[test]
    fn hold_is_not_a_tap() {
        let mut s = TechniqueState::with_defaults(Technique::FrontWorld, fit());
        let out = run(
            &mut s,
            &[front(0, Down, 0, 1280, 720), front(500, Up, 0, 1280, 720)],
        );
        assert_eq!(commits(&out), 0);
        let out = run(
            &mut s,
            &[front(600, Down, 0, 1280, 720), front(650, Up, 0, 1330, 720)],
        );
        assert_eq!(commits(&out), 0);
    }

    #[test]
    fn debounce_drops_quick_second_commit() {
        let taps = [
            front(0, Down, 0, 1280, 720),
            front(40, Up, 0, 1280, 720),
            front(60, Down, 0, 1280, 720),
            front(100, Up, 0, 1280, 720),
        ];
        let mut s = TechniqueState::with_defaults(Technique::FrontGaze, fit());
        assert_eq!(commits(&run(&mut s, &taps)), 1);
        let cfg = TechniqueConfig {
            debounce_ms: None,
            ..TechniqueConfig::default()
        };
        let mut s = TechniqueState::new(Technique::FrontGaze, fit(), None, cfg);
        assert_eq!(commits(&run(&mut s, &taps)), 2);
    }

    #[test]
    fn illegal_events_are_dropped() {
        let mut s = TechniqueState::with_defaults(Technique::FrontWorld, fit());
        assert!(run(
            &mut s,
            &[front(0, Up, 3, 10, 10), front(1, Move, 3, 10, 10)]
        )
        .is_empty());
        run(&mut s, &[front(2, Down, 0, 1280, 720)]);
        assert!(run(&mut s, &[front(3, Down, 0, 1300, 720)]).is_empty());
        assert_eq!(s.fingers_down(), 1);
    }
}
