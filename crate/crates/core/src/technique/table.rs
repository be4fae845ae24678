//! Declarative transition tables.
//!
//! Each row reads: in `from`, an event of kind `act` by finger `who` whose
//! facts match `qual` moves to `to` and performs `effects` in order.
//!
//! `who` is the finger's registered role (`New` for an unregistered finger,
//! which only matters on Down). The qualifier classes are per act:
//!
//! | act  | classes                                                  |
//! |------|----------------------------------------------------------|
//! | Down | `Off`, `Near` (within the re-tap window and radius), `Far` |
//! | Move | `Off`, `Still` (within tap radius of its Down), `Slid`     |
//! | Up   | `Off`, `Tap`, `Hold`                                       |
//!
//! `On` matches both on-screen classes and `Any` matches everything.
//! Down events from registered fingers and Move/Up events from unregistered
//! fingers never reach the table; events from the other pad are ignored.

use serde::Serialize;

use super::{Action, Debounce, Technique, TechniqueConfig};
use crate::input::{Input, TouchAction, TouchEvent, TouchPoint};
use crate::mapping::{CursorAngles, FittedMap, MappingMode, MappingModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Act {
    Down,
    Move,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Who {
    New,
    Primary,
    Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Qual {
    Any,
    On,
    Off,
    Near,
    Far,
    Still,
    Slid,
    Tap,
    Hold,
}

/// What an event actually was, as a qualifier class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Off,
    Near,
    Far,
    Still,
    Slid,
    Tap,
    Hold,
}

impl Class {
    pub fn for_act(act: Act) -> [Class; 3] {
        match act {
            Act::Down => [Class::Off, Class::Near, Class::Far],
            Act::Move => [Class::Off, Class::Still, Class::Slid],
            Act::Up => [Class::Off, Class::Tap, Class::Hold],
        }
    }
}

impl Qual {
    pub fn matches(self, c: Class) -> bool {
        match self {
            Qual::Any => true,
            Qual::On => c != Class::Off,
            Qual::Off => c == Class::Off,
            Qual::Near => c == Class::Near,
            Qual::Far => c == Class::Far,
            Qual::Still => c == Class::Still,
            Qual::Slid => c == Class::Slid,
            Qual::Tap => c == Class::Tap,
            Qual::Hold => c == Class::Hold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    /// Register the event's finger as the primary finger.
    BindPrimary,
    BindSecondary,
    /// Unregister the event's finger.
    Release,
    /// Start a cursor press at the event point; emits `CursorMoved`.
    CursorDown,
    /// Follow the press to the event point; emits `CursorMoved`.
    CursorMove,
    /// Remember the current cursor as the commit position.
    Latch,
    /// Emit `Commit` at the latched position if any, else at the cursor.
    Commit,
    /// Emit `OffScreenCancel`.
    Cancel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    pub from: &'static str,
    pub act: Act,
    pub who: Who,
    pub qual: Qual,
    pub to: &'static str,
    pub effects: &'static [Effect],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateInfo {
    pub name: &'static str,
    /// Roles registered while in this state.
    pub registered: &'static [Who],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionTable {
    pub technique: Technique,
    pub initial: &'static str,
    pub states: Vec<StateInfo>,
    pub rows: Vec<Transition>,
}

impl TransitionTable {
    pub fn state(&self, name: &str) -> Option<&StateInfo> {
        self.states.iter().find(|s| s.name == name)
    }

    pub fn lookup(&self, from: &str, act: Act, who: Who, class: Class) -> Option<&Transition> {
        self.rows
            .iter()
            .find(|r| r.from == from && r.act == act && r.who == who && r.qual.matches(class))
    }

    /// Pairs of rows that could both fire on the same event.
    pub fn overlaps(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.rows.iter().enumerate() {
            for (j, b) in self.rows.iter().enumerate().skip(i + 1) {
                if a.from == b.from
                    && a.act == b.act
                    && a.who == b.who
                    && Class::for_act(a.act)
                        .iter()
                        .any(|&c| a.qual.matches(c) && b.qual.matches(c))
                {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Legal `(state, act, who, class)` combinations without a row.
    pub fn gaps(&self) -> Vec<(&'static str, Act, Who, Class)> {
        let mut out = Vec::new();
        for s in &self.states {
            let mut keys = vec![(Act::Down, Who::New)];
            for &w in s.registered {
                keys.push((Act::Move, w));
                keys.push((Act::Up, w));
            }
            for (act, who) in keys {
                for c in Class::for_act(act) {
                    if self.lookup(s.name, act, who, c).is_none() {
                        out.push((s.name, act, who, c));
                    }
                }
            }
        }
        out
    }
}

use Act::{Down, Move, Up};
use Effect::*;
use Who::{New, Primary as P, Secondary as S};

const fn row(
    from: &'static str,
    act: Act,
    who: Who,
    qual: Qual,
    to: &'static str,
    effects: &'static [Effect],
) -> Transition {
    Transition {
        from,
        act,
        who,
        qual,
        to,
        effects,
    }
}

fn gaze_rows() -> Vec<Transition> {
    vec![
        row("idle", Down, New, Qual::On, "p", &[BindPrimary]),
        row("idle", Down, New, Qual::Off, "idle", &[Cancel]),
        // primary only
        row("p", Down, New, Qual::On, "ps", &[BindSecondary]),
        row("p", Down, New, Qual::Off, "p", &[Cancel]),
        row("p", Move, P, Qual::On, "p", &[]),
        row("p", Move, P, Qual::Off, "p", &[Cancel]),
        row("p", Up, P, Qual::Tap, "idle", &[Release, Commit]),
        row("p", Up, P, Qual::Hold, "idle", &[Release]),
        row("p", Up, P, Qual::Off, "idle", &[Release, Cancel]),
        // secondary only
        row("s", Down, New, Qual::On, "ps", &[BindPrimary]),
        row("s", Down, New, Qual::Off, "s", &[Cancel]),
        row("s", Move, S, Qual::On, "s", &[]),
        row("s", Move, S, Qual::Off, "s", &[Cancel]),
        row("s", Up, S, Qual::Tap, "idle", &[Release, Commit]),
        row("s", Up, S, Qual::Hold, "idle", &[Release]),
        row("s", Up, S, Qual::Off, "idle", &[Release, Cancel]),
        // both
        row("ps", Down, New, Qual::On, "ps", &[]),
        row("ps", Down, New, Qual::Off, "ps", &[Cancel]),
        row("ps", Move, P, Qual::On, "ps", &[]),
        row("ps", Move, P, Qual::Off, "ps", &[Cancel]),
        row("ps", Move, S, Qual::On, "ps", &[]),
        row("ps", Move, S, Qual::Off, "ps", &[Cancel]),
        row("ps", Up, P, Qual::Tap, "s", &[Release, Commit]),
        row("ps", Up, P, Qual::Hold, "s", &[Release]),
        row("ps", Up, P, Qual::Off, "s", &[Release, Cancel]),
        row("ps", Up, S, Qual::Tap, "p", &[Release, Commit]),
        row("ps", Up, S, Qual::Hold, "p", &[Release]),
        row("ps", Up, S, Qual::Off, "p", &[Release, Cancel]),
    ]
}

fn single_finger_rows() -> Vec<Transition> {
    vec![
        row(
            "idle",
            Down,
            New,
            Qual::On,
            "pressed",
            &[BindPrimary, CursorDown],
        ),
        row("idle", Down, New, Qual::Off, "idle", &[Cancel]),
        row("pressed", Down, New, Qual::On, "pressed", &[]),
        row("pressed", Down, New, Qual::Off, "pressed", &[Cancel]),
        row("pressed", Move, P, Qual::On, "pressed", &[CursorMove]),
        row("pressed", Move, P, Qual::Off, "pressed", &[Cancel]),
        row("pressed", Up, P, Qual::Tap, "idle", &[Release, Commit]),
        row("pressed", Up, P, Qual::Hold, "idle", &[Release]),
        row("pressed", Up, P, Qual::Off, "idle", &[Release, Cancel]),
    ]
}

fn two_finger_rows() -> Vec<Transition> {
    vec![
        row(
            "idle",
            Down,
            New,
            Qual::On,
            "drag",
            &[BindPrimary, CursorDown],
        ),
        row("idle", Down, New, Qual::Off, "idle", &[Cancel]),
        // dragger down
        row("drag", Down, New, Qual::On, "tap", &[BindSecondary, Latch]),
        row("drag", Down, New, Qual::Off, "drag", &[Cancel]),
        row("drag", Move, P, Qual::On, "drag", &[CursorMove]),
        row("drag", Move, P, Qual::Off, "drag", &[Cancel]),
        row("drag", Up, P, Qual::On, "idle", &[Release]),
        row("drag", Up, P, Qual::Off, "idle", &[Release, Cancel]),
        // dragger and tapper down
        row("tap", Down, New, Qual::On, "tap", &[]),
        row("tap", Down, New, Qual::Off, "tap", &[Cancel]),
        row("tap", Move, P, Qual::On, "tap", &[CursorMove]),
        row("tap", Move, P, Qual::Off, "tap", &[Cancel]),
        row("tap", Move, S, Qual::On, "tap", &[]),
        row("tap", Move, S, Qual::Off, "tap", &[Cancel]),
        row("tap", Up, S, Qual::Tap, "drag", &[Release, Commit]),
        row("tap", Up, S, Qual::Hold, "drag", &[Release]),
        row("tap", Up, S, Qual::Off, "drag", &[Release, Cancel]),
        row("tap", Up, P, Qual::On, "orphan", &[Release]),
        row("tap", Up, P, Qual::Off, "orphan", &[Release, Cancel]),
        // tapper left behind after the dragger lifted
        row("orphan", Down, New, Qual::On, "orphan", &[]),
        row("orphan", Down, New, Qual::Off, "orphan", &[Cancel]),
        row("orphan", Move, S, Qual::On, "orphan", &[]),
        row("orphan", Move, S, Qual::Off, "orphan", &[Cancel]),
        row("orphan", Up, S, Qual::On, "idle", &[Release]),
        row("orphan", Up, S, Qual::Off, "idle", &[Release, Cancel]),
    ]
}

fn drag_n_tap_rows() -> Vec<Transition> {
    vec![
        row(
            "idle",
            Down,
            New,
            Qual::On,
            "drag",
            &[BindPrimary, CursorDown],
        ),
        row("idle", Down, New, Qual::Off, "idle", &[Cancel]),
        row("drag", Down, New, Qual::On, "drag", &[]),
        row("drag", Down, New, Qual::Off, "drag", &[Cancel]),
        row("drag", Move, P, Qual::On, "drag", &[CursorMove]),
        row("drag", Move, P, Qual::Off, "drag", &[Cancel]),
        row("drag", Up, P, Qual::On, "armed", &[Release]),
        row("drag", Up, P, Qual::Off, "idle", &[Release, Cancel]),
        // lifted; a nearby quick re-tap commits
        row("armed", Down, New, Qual::Near, "retap", &[BindPrimary]),
        row(
            "armed",
            Down,
            New,
            Qual::Far,
            "drag",
            &[BindPrimary, CursorDown],
        ),
        row("armed", Down, New, Qual::Off, "idle", &[Cancel]),
        row("retap", Down, New, Qual::On, "retap", &[]),
        row("retap", Down, New, Qual::Off, "retap", &[Cancel]),
        row("retap", Move, P, Qual::Still, "retap", &[]),
        row("retap", Move, P, Qual::Slid, "drag", &[CursorDown]),
        row("retap", Move, P, Qual::Off, "drag", &[Cancel]),
        row("retap", Up, P, Qual::Tap, "idle", &[Release, Commit]),
        row("retap", Up, P, Qual::Hold, "armed", &[Release]),
        row("retap", Up, P, Qual::Off, "idle", &[Release, Cancel]),
    ]
}

const NONE: &[Who] = &[];
const ONLY_P: &[Who] = &[P];
const ONLY_S: &[Who] = &[S];
const BOTH: &[Who] = &[P, S];

const fn st(name: &'static str, registered: &'static [Who]) -> StateInfo {
    StateInfo { name, registered }
}

/// The hand-written transition table of `technique`.
pub fn legal_transitions(technique: Technique) -> TransitionTable {
    let (states, rows) = match technique {
        Technique::SideGaze | Technique::FrontGaze => (
            vec![
                st("idle", NONE),
                st("p", ONLY_P),
                st("s", ONLY_S),
                st("ps", BOTH),
            ],
            gaze_rows(),
        ),
        Technique::FrontWorld | Technique::FrontView => (
            vec![st("idle", NONE), st("pressed", ONLY_P)],
            single_finger_rows(),
        ),
        Technique::TwoFingers => (
            vec![
                st("idle", NONE),
                st("drag", ONLY_P),
                st("tap", BOTH),
                st("orphan", ONLY_S),
            ],
            two_finger_rows(),
        ),
        Technique::DragNTap => (
            vec![
                st("idle", NONE),
                st("drag", ONLY_P),
                st("armed", NONE),
                st("retap", ONLY_P),
            ],
            drag_n_tap_rows(),
        ),
    };
    TransitionTable {
        technique,
        initial: "idle",
        states,
        rows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Contact {
    finger: u8,
    who: Who,
    t_down: u64,
    down: TouchPoint,
    moved_far: bool,
    void: bool,
}

/// Interprets a [`TransitionTable`], computing qualifier classes from its
/// own contact bookkeeping.
#[derive(Debug, Clone)]
pub struct TableMachine {
    pub table: TransitionTable,
    config: TechniqueConfig,
    mapping: MappingModel,
    state: &'static str,
    contacts: Vec<Contact>,
    lift: Option<(u64, TouchPoint)>,
    latch: Option<CursorAngles>,
    debounce: Debounce,
}

impl TableMachine {
    pub fn new(
        technique: Technique,
        fit: FittedMap,
        mode: Option<MappingMode>,
        config: TechniqueConfig,
    ) -> Self {
        let table = legal_transitions(technique);
        let mode = mode
            .or(technique.default_mapping())
            .unwrap_or(MappingMode::Absolute);
        TableMachine {
            state: table.initial,
            table,
            config,
            mapping: MappingModel::new(fit, mode),
            contacts: Vec::new(),
            lift: None,
            latch: None,
            debounce: Debounce::default(),
        }
    }

    pub fn state(&self) -> &'static str {
        self.state
    }

    /// Roles currently registered, in the order of [`StateInfo::registered`].
    pub fn registered(&self) -> Vec<Who> {
        let mut v: Vec<Who> = self.contacts.iter().map(|c| c.who).collect();
        v.sort_by_key(|w| *w as u8);
        v
    }

    fn classify(&self, ev: &TouchEvent, contact: Option<&Contact>) -> Class {
        let Ok(p) = ev.point() else {
            return Class::Off;
        };
        let d = |a: TouchPoint, b: TouchPoint| {
            let (dx, dy) = ((a.x() - b.x()) as f64, (a.y() - b.y()) as f64);
            (dx * dx + dy * dy).sqrt()
        };
        match ev.action {
            TouchAction::Down => match self.lift {
                Some((t, lp))
                    if ev.t_ms - t.min(ev.t_ms) <= self.config.retap_window_ms
                        && d(p, lp) <= self.config.retap_radius_px =>
                {
                    Class::Near
                }
                _ => Class::Far,
            },
            TouchAction::Move => {
                let c = contact.expect("move of a registered finger");
                if d(p, c.down) <= self.config.tap_max_px {
                    Class::Still
                } else {
                    Class::Slid
                }
            }
            TouchAction::Up => {
                let c = contact.expect("lift of a registered finger");
                let quick = ev.t_ms - c.t_down.min(ev.t_ms) <= self.config.tap_max_ms;
                let short = d(p, c.down) <= self.config.tap_max_px;
                if quick && short && !c.moved_far && !c.void {
                    Class::Tap
                } else {
                    Class::Hold
                }
            }
        }
    }

    pub fn step(&mut self, input: &Input) -> Vec<Action> {
        let Input::Touch(ev) = input else {
            return Vec::new();
        };
        if ev.source != self.table.technique.pad() {
            return Vec::new();
        }
        let slot = self.contacts.iter().position(|c| c.finger == ev.finger);
        let act = match ev.action {
            TouchAction::Down => Act::Down,
            TouchAction::Move => Act::Move,
            TouchAction::Up => Act::Up,
        };
        let who = match (act, slot) {
            (Act::Down, None) => Who::New,
            (Act::Down, Some(_)) | (_, None) => return Vec::new(),
            (_, Some(i)) => self.contacts[i].who,
        };
        let class = self.classify(ev, slot.map(|i| &self.contacts[i]));

        // bookkeeping that does not depend on the row
        if class == Class::Off {
            for c in &mut self.contacts {
                c.void = true;
            }
            self.lift = None;
        } else if let (Act::Move, Some(i)) = (act, slot) {
            let p = ev.point().expect("on-screen");
            let c = &mut self.contacts[i];
            let (dx, dy) = ((p.x() - c.down.x()) as f64, (p.y() - c.down.y()) as f64);
            if (dx * dx + dy * dy).sqrt() > self.config.tap_max_px {
                c.moved_far = true;
            }
        } else if let (Act::Up, Ok(p)) = (act, ev.point()) {
            self.lift = Some((ev.t_ms, p));
        }

        let row = *self
            .table
            .lookup(self.state, act, who, class)
            .unwrap_or_else(|| {
                panic!(
                    "{}: no row for {} {act:?} {who:?} {class:?}",
                    self.table.technique, self.state
                )
            });
        let mut out = Vec::new();
        for effect in row.effects {
            match effect {
                BindPrimary | BindSecondary => self.contacts.push(Contact {
                    finger: ev.finger,
                    who: if *effect == BindPrimary { P } else { S },
                    t_down: ev.t_ms,
                    down: ev.point().expect("bind on-screen"),
                    moved_far: false,
                    void: false,
                }),
                Release => {
                    let i = slot.expect("release of a registered finger");
                    let c = self.contacts.remove(i);
                    if c.who == P && !self.table.technique.is_gaze() {
                        self.mapping.touch_up();
                    }
                }
                CursorDown => {
                    self.mapping.touch_down(ev.point().expect("on-screen"));
                    out.push(Action::CursorMoved(self.mapping.cursor()));
                }
                CursorMove => {
                    self.mapping.touch_move(ev.point().expect("on-screen"));
                    out.push(Action::CursorMoved(self.mapping.cursor()));
                }
                Latch => self.latch = Some(self.mapping.cursor()),
                Commit => {
                    let at = if self.table.technique.is_gaze() {
                        CursorAngles::ZERO
                    } else {
                        self.latch.unwrap_or(self.mapping.cursor())
                    };
                    out.push(Action::Commit(at));
                }
                Cancel => out.push(Action::OffScreenCancel),
            }
        }
        if !self.contacts.iter().any(|c| c.who == S) {
            self.latch = None;
        }
        self.state = row.to;
        self.debounce
            .filter(self.config.debounce_ms, ev.t_ms, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_deterministic_and_total() {
        for t in Technique::ALL {
            let table = legal_transitions(t);
            assert!(table.overlaps().is_empty(), "{t}: {:?}", table.overlaps());
            assert!(table.gaps().is_empty(), "{t}: {:?}", table.gaps());
            for r in &table.rows {
                assert!(table.state(r.from).is_some() && table.state(r.to).is_some());
            }
        }
    }

    #[test]
    fn gaze_tables_never_move_the_cursor() {
        for t in [Technique::SideGaze, Technique::FrontGaze] {
            for r in legal_transitions(t).rows {
                assert!(!r.effects.contains(&CursorMove) && !r.effects.contains(&CursorDown));
            }
        }
    }
}
