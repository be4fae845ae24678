//! Trial bookkeeping driven by selection commits.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{TaskKind, TaskSpec, TrialRecord};
use crate::scene::{ColorId, KeyCap, NodeId, PlaneSide, Scene, UiRole};
use crate::technique::Technique;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TaskOutput {
    Trial(TrialRecord),
    /// A key was hit; the UI plays a click.
    KeyClick {
        t_ms: u64,
    },
    /// Keyboard text changed.
    Text {
        presented: String,
        transcribed: String,
    },
    /// Node colors changed.
    SceneChanged,
    Finished,
}

#[derive(Debug, Clone)]
struct Binary {
    trials: u32,
    left: NodeId,
    right: NodeId,
    /// Side currently red.
    target: PlaneSide,
    started: bool,
    trial: u32,
    last_success: u64,
    errors: u32,
    clean: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MenuPhase {
    AwaitStart,
    Active,
}

#[derive(Debug, Clone)]
struct Menu {
    buttons: HashMap<u32, NodeId>,
    center: u32,
    orders: Vec<Vec<u32>>,
    session: usize,
    trial: usize,
    phase: MenuPhase,
    t_start: u64,
    errors: u32,
    clean: bool,
    /// Button flashed green after the previous success.
    flashed: Option<NodeId>,
}

#[derive(Debug, Clone)]
struct Keyboard {
    keys: HashMap<NodeId, KeyCap>,
    by_cap: HashMap<KeyCap, NodeId>,
    phrases: Vec<String>,
    phrase: usize,
    text: String,
    t_first: Option<u64>,
    t_last: u64,
    errors: u32,
}

#[derive(Debug, Clone)]
enum Kind {
    Binary(Binary),
    Menu(Menu),
    Keyboard(Keyboard),
}

/// Runs one task for one participant on a scene built from the same spec.
#[derive(Debug, Clone)]
pub struct TaskRunner {
    pub kind: TaskKind,
    pub technique: Technique,
    pub participant: u32,
    finished: bool,
    inner: Kind,
}

fn role_map(scene: &Scene) -> impl Iterator<Item = (NodeId, UiRole)> + '_ {
    scene
        .nodes()
        .iter()
        .filter_map(|n| n.ui_role.map(|r| (n.id, r)))
}

impl TaskRunner {
    /// Panics if `scene` lacks the nodes the task needs; build it with
    /// [`TaskSpec::build_scene`].
    pub fn new(spec: &TaskSpec, participant: u32, scene: &Scene) -> TaskRunner {
        let inner = match spec.kind {
            TaskKind::Binary => {
                let find = |side| {
                    scene
                        .find_role(UiRole::Plane { side })
                        .expect("binary scene has both planes")
                };
                Kind::Binary(Binary {
                    trials: spec.binary_trials,
                    left: find(PlaneSide::Left),
                    right: find(PlaneSide::Right),
                    target: PlaneSide::Left,
                    started: false,
                    trial: 0,
                    last_success: 0,
                    errors: 0,
                    clean: true,
                })
            }
            TaskKind::Menu15 => {
                let buttons: HashMap<u32, NodeId> = role_map(scene)
                    .filter_map(|(id, r)| match r {
                        UiRole::Button { label } => Some((label, id)),
                        _ => None,
                    })
                    .collect();
                let center = spec.scene.menu.center_label();
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                let others: Vec<u32> = (0..buttons.len() as u32).filter(|&l| l != center).collect();
                let orders = (0..spec.menu_sessions)
                    .map(|_| {
                        let mut o = others.clone();
                        o.shuffle(&mut rng);
                        o
                    })
                    .collect();
                Kind::Menu(Menu {
                    buttons,
                    center,
                    orders,
                    session: 0,
                    trial: 0,
                    phase: MenuPhase::AwaitStart,
                    t_start: 0,
                    errors: 0,
                    clean: true,
                    flashed: None,
                })
            }
            TaskKind::Keyboard => {
                let keys: HashMap<NodeId, KeyCap> = role_map(scene)
                    .filter_map(|(id, r)| match r {
                        UiRole::Key { key } => Some((id, key)),
                        _ => None,
                    })
                    .collect();
                let by_cap = keys.iter().map(|(&id, &k)| (k, id)).collect();
                Kind::Keyboard(Keyboard {
                    keys,
                    by_cap,
                    phrases: spec.phrases.clone(),
                    phrase: 0,
                    text: String::new(),
                    t_first: None,
                    t_last: 0,
                    errors: 0,
                })
            }
        };
        TaskRunner {
            kind: spec.kind,
            technique: spec.technique,
            participant,
            finished: false,
            inner,
        }
    }

    /// Sets the initial colors and text.
    pub fn begin(&mut self, scene: &mut Scene) -> Vec<TaskOutput> {
        match &mut self.inner {
            Kind::Binary(b) => {
                scene.set_color(b.left, ColorId::Red);
                scene.set_color(b.right, ColorId::Blue);
                vec![TaskOutput::SceneChanged]
            }
            Kind::Menu(m) => {
                for &id in m.buttons.values() {
                    scene.set_color(id, ColorId::Neutral);
                }
                scene.set_color(m.buttons[&m.center], ColorId::Red);
                vec![TaskOutput::SceneChanged]
            }
            Kind::Keyboard(k) => {
                if k.phrases.is_empty() {
                    self.finished = true;
                    return vec![TaskOutput::Finished];
                }
                vec![k.text_output()]
            }
        }
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Whether a trial has started and not yet produced its record.
    pub fn in_progress(&self) -> bool {
        if self.finished {
            return false;
        }
        match &self.inner {
            Kind::Binary(b) => b.started,
            Kind::Menu(m) => m.phase == MenuPhase::Active,
            Kind::Keyboard(k) => k.t_first.is_some() || !k.text.is_empty(),
        }
    }

    /// The node an error-free participant selects next.
    pub fn goal(&self) -> Option<NodeId> {
        if self.finished {
            return None;
        }
        match &self.inner {
            Kind::Binary(b) => Some(match b.target {
                PlaneSide::Left => b.left,
                PlaneSide::Right => b.right,
            }),
            Kind::Menu(m) => Some(match m.phase {
                MenuPhase::AwaitStart => m.buttons[&m.center],
                MenuPhase::Active => m.buttons[&m.orders[m.session][m.trial]],
            }),
            Kind::Keyboard(k) => {
                let presented = &k.phrases[k.phrase];
                let cap = if &k.text == presented {
                    KeyCap::Done
                } else if presented.starts_with(k.text.as_str()) {
                    match presented[k.text.len()..].chars().next() {
                        Some(' ') => KeyCap::Space,
                        Some(c) => KeyCap::Char(c),
                        None => KeyCap::Done,
                    }
                } else {
                    KeyCap::Backspace
                };
                k.by_cap.get(&cap).copied()
            }
        }
    }

    /// Menu target order of each session.
    pub fn menu_orders(&self) -> Option<&[Vec<u32>]> {
        match &self.inner {
            Kind::Menu(m) => Some(&m.orders),
            _ => None,
        }
    }

    /// Keyboard text typed so far in the current phrase.
    pub fn transcription(&self) -> Option<&str> {
        match &self.inner {
            Kind::Keyboard(k) => Some(&k.text),
            _ => None,
        }
    }

    fn record(
        &self,
        session_id: u32,
        trial: u32,
        target: String,
        start: u64,
        commit: u64,
    ) -> TrialRecord {
        TrialRecord {
            session_id,
            participant: self.participant,
            technique: self.technique,
            task: self.kind,
            trial,
            target,
            start_ms: start,
            commit_ms: commit,
            correct: false,
            errors: 0,
            presented: None,
            transcribed: None,
        }
    }

    /// Applies one commit. `hit` is the selected node, `None` for a miss.
    pub fn on_commit(
        &mut self,
        scene: &mut Scene,
        t_ms: u64,
        hit: Option<NodeId>,
    ) -> Vec<TaskOutput> {
        if self.finished {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut inner = std::mem::replace(&mut self.inner, Kind::Keyboard(Keyboard::empty()));
        match &mut inner {
            Kind::Binary(b) => {
                let red = match b.target {
                    PlaneSide::Left => b.left,
                    PlaneSide::Right => b.right,
                };
                if hit == Some(red) {
                    if b.started {
                        let mut r = self.record(
                            0,
                            b.trial,
                            side_name(b.target).into(),
                            b.last_success,
                            t_ms,
                        );
                        r.correct = b.clean;
                        r.errors = b.errors;
                        out.push(TaskOutput::Trial(r));
                        b.trial += 1;
                    }
                    b.started = true;
                    b.last_success = t_ms;
                    b.errors = 0;
                    b.clean = true;
                    b.target = match b.target {
                        PlaneSide::Left => PlaneSide::Right,
                        PlaneSide::Right => PlaneSide::Left,
                    };
                    let (now_red, now_blue) = match b.target {
                        PlaneSide::Left => (b.left, b.right),
                        PlaneSide::Right => (b.right, b.left),
                    };
                    scene.set_color(now_red, ColorId::Red);
                    scene.set_color(now_blue, ColorId::Blue);
                    out.push(TaskOutput::SceneChanged);
                    if b.trial >= b.trials {
                        self.finished = true;
                    }
                } else if b.started {
                    b.errors += 1;
                    b.clean = false;
                }
            }
            Kind::Menu(m) => match m.phase {
                MenuPhase::AwaitStart => {
                    let center = m.buttons[&m.center];
                    if hit == Some(center) {
                        if let Some(f) = m.flashed.take() {
                            scene.set_color(f, ColorId::Neutral);
                        }
                        scene.set_color(center, ColorId::Neutral);
                        let target = m.buttons[&m.orders[m.session][m.trial]];
                        scene.set_color(target, ColorId::Red);
                        m.phase = MenuPhase::Active;
                        m.t_start = t_ms;
                        m.errors = 0;
                        m.clean = true;
                        out.push(TaskOutput::SceneChanged);
                    }
                }
                MenuPhase::Active => {
                    let label = m.orders[m.session][m.trial];
                    let target = m.buttons[&label];
                    if hit == Some(target) {
                        let mut r = self.record(
                            m.session as u32,
                            m.trial as u32,
                            label.to_string(),
                            m.t_start,
                            t_ms,
                        );
                        r.correct = m.clean;
                        r.errors = m.errors;
                        out.push(TaskOutput::Trial(r));
                        scene.set_color(target, ColorId::Green);
                        m.flashed = Some(target);
                        m.phase = MenuPhase::AwaitStart;
                        m.trial += 1;
                        if m.trial == m.orders[m.session].len() {
                            m.trial = 0;
                            m.session += 1;
                        }
                        if m.session == m.orders.len() {
                            self.finished = true;
                        } else {
                            scene.set_color(m.buttons[&m.center], ColorId::Red);
                        }
                        out.push(TaskOutput::SceneChanged);
                    } else {
                        m.errors += 1;
                        m.clean = false;
                    }
                }
            },
            Kind::Keyboard(k) => match hit.and_then(|id| k.keys.get(&id).copied()) {
                None => k.errors += 1,
                Some(cap) => {
                    out.push(TaskOutput::KeyClick { t_ms });
                    match cap {
                        KeyCap::Char(c) => k.type_char(c, t_ms),
                        KeyCap::Space => k.type_char(' ', t_ms),
                        KeyCap::Backspace => {
                            k.text.pop();
                            k.errors += 1;
                            if k.t_first.is_some() {
                                k.t_last = t_ms;
                            }
                        }
                        KeyCap::Done => {
                            if let Some(t_first) = k.t_first {
                                let presented = k.phrases[k.phrase].clone();
                                let mut r = self.record(
                                    0,
                                    k.phrase as u32,
                                    k.phrase.to_string(),
                                    t_first,
                                    k.t_last,
                                );
                                r.correct = k.text == presented;
                                r.errors = k.errors;
                                r.presented = Some(presented);
                                r.transcribed = Some(std::mem::take(&mut k.text));
                                out.push(TaskOutput::Trial(r));
                                k.phrase += 1;
                                k.t_first = None;
                                k.errors = 0;
                                if k.phrase == k.phrases.len() {
                                    self.finished = true;
                                }
                            }
                        }
                    }
                    if !self.finished {
                        out.push(k.text_output());
                    }
                }
            },
        }
        self.inner = inner;
        if self.finished {
            out.push(TaskOutput::Finished);
        }
        out
    }
}

impl Keyboard {
    fn empty() -> Keyboard {
        Keyboard {
            keys: HashMap::new(),
            by_cap: HashMap::new(),
            phrases: Vec::new(),
            phrase: 0,
            text: String::new(),
            t_first: None,
            t_last: 0,
            errors: 0,
        }
    }

    fn type_char(&mut self, c: char, t_ms: u64) {
        self.text.push(c);
        self.t_first.get_or_insert(t_ms);
        self.t_last = t_ms;
    }

    fn text_output(&self) -> TaskOutput {
        TaskOutput::Text {
            presented: self.phrases[self.phrase].clone(),
            transcribed: self.text.clone(),
        }
    }
}

fn side_name(side: PlaneSide) -> &'static str {
    match side {
        PlaneSide::Left => "left",
        PlaneSide::Right => "right",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trials(out: &[TaskOutput]) -> Vec<TrialRecord> {
        out.iter()
            .filter_map(|o| match o {
                TaskOutput::Trial(r) => Some(r.clone()),
                _ => None,
            })
            .collect()
    }

    fn menu() -> (TaskSpec, Scene, TaskRunner) {
        let spec = TaskSpec::new(TaskKind::Menu15, Technique::TwoFingers, 4);
        let mut scene = spec.build_scene().unwrap();
        let mut r = TaskRunner::new(&spec, 0, &scene);
        r.begin(&mut scene);
        (spec, scene, r)
    }

    fn button(scene: &Scene, label: u32) -> Option<NodeId> {
        scene.find_role(UiRole::Button { label })
    }

    #[test]
    fn menu_clean_trial() {
        let (_, mut scene, mut r) = menu();
        let target = r.menu_orders().unwrap()[0][0];
        let (seven, hit) = (button(&scene, 7), button(&scene, target));
        r.on_commit(&mut scene, 1000, seven);
        let out = r.on_commit(&mut scene, 2500, hit);
        let rec = &trials(&out)[0];
        assert!(rec.correct);
        assert_eq!(rec.errors, 0);
        assert_eq!(rec.duration_ms(), 1500);
        assert_eq!(rec.target, target.to_string());
    }

    #[test]
    fn menu_error_trial() {
        let (_, mut scene, mut r) = menu();
        let target = r.menu_orders().unwrap()[0][0];
        let wrong = (0..15).find(|&l| l != 7 && l != target).unwrap();
        let (seven, miss, hit) = (
            button(&scene, 7),
            button(&scene, wrong),
            button(&scene, target),
        );
        r.on_commit(&mut scene, 1000, seven);
        r.on_commit(&mut scene, 1500, miss);
        let out = r.on_commit(&mut scene, 2500, hit);
        let rec = &trials(&out)[0];
        assert!(!rec.correct);
        assert_eq!(rec.errors, 1);
    }

    #[test]
    fn menu_targets_are_permutations() {
        let (_, _, r) = menu();
        let orders = r.menu_orders().unwrap();
        assert_eq!(orders.len(), 3);
        for o in orders {
            let mut s = o.clone();
            s.sort_unstable();
            assert_eq!(s, (0..15).filter(|&l| l != 7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn menu_full_run_by_goal() {
        let (_, mut scene, mut r) = menu();
        let mut records = Vec::new();
        let mut t = 0;
        while let Some(g) = r.goal() {
            t += 100;
            records.extend(trials(&r.on_commit(&mut scene, t, Some(g))));
        }
        assert_eq!(records.len(), 42);
        assert!(records.iter().all(|r| r.correct && r.errors == 0));
        assert!(r.is_finished() && !r.in_progress());
    }

    #[test]
    fn binary_alternates_and_times_from_previous_success() {
        let spec = TaskSpec::new(TaskKind::Binary, Technique::SideGaze, 0);
        let mut scene = spec.build_scene().unwrap();
        let mut r = TaskRunner::new(&spec, 2, &scene);
        r.begin(&mut scene);
        let left = scene.find_role(UiRole::Plane {
            side: PlaneSide::Left,
        });
        let right = scene.find_role(UiRole::Plane {
            side: PlaneSide::Right,
        });
        assert_eq!(r.goal(), left);
        r.on_commit(&mut scene, 500, left);
        assert_eq!(scene.node(right.unwrap()).unwrap().color, ColorId::Red);
        assert_eq!(scene.node(left.unwrap()).unwrap().color, ColorId::Blue);
        r.on_commit(&mut scene, 900, left);
        let out = r.on_commit(&mut scene, 1700, right);
        let rec = &trials(&out)[0];
        assert_eq!(rec.target, "right");
        assert_eq!((rec.start_ms, rec.commit_ms), (500, 1700));
        assert!(!rec.correct);
        assert_eq!(rec.errors, 1);
        let mut t = 2000;
        let mut n = 1;
        while let Some(g) = r.goal() {
            t += 300;
            n += trials(&r.on_commit(&mut scene, t, Some(g))).len();
        }
        assert_eq!(n, 20);
    }

    #[test]
    fn keyboard_transcription() {
        let mut spec = TaskSpec::new(TaskKind::Keyboard, Technique::SideGaze, 0);
        spec.phrases = vec!["the".into()];
        let mut scene = spec.build_scene().unwrap();
        let mut r = TaskRunner::new(&spec, 0, &scene);
        r.begin(&mut scene);
        let keys: Vec<_> = [
            KeyCap::Char('t'),
            KeyCap::Char('h'),
            KeyCap::Char('e'),
            KeyCap::Done,
        ]
        .into_iter()
        .map(|c| scene.find_role(UiRole::Key { key: c }))
        .collect();
        let mut out = Vec::new();
        for (i, k) in keys.into_iter().enumerate() {
            out.extend(r.on_commit(&mut scene, 1000 + 500 * i as u64, k));
        }
        let rec = &trials(&out)[0];
        assert_eq!(rec.transcribed.as_deref(), Some("the"));
        assert!(rec.correct);
        assert_eq!((rec.start_ms, rec.commit_ms), (1000, 2000));
        let clicks = out
            .iter()
            .filter(|o| matches!(o, TaskOutput::KeyClick { .. }))
            .count();
        assert_eq!(clicks, 4);
        assert!(r.is_finished());
    }

    #[test]
    fn keyboard_backspace_and_miss_count_as_errors() {
        let mut spec = TaskSpec::new(TaskKind::Keyboard, Technique::SideGaze, 0);
        spec.phrases = vec!["ab".into()];
        let mut scene = spec.build_scene().unwrap();
        let mut r = TaskRunner::new(&spec, 0, &scene);
        r.begin(&mut scene);
        let key = |c| scene.find_role(UiRole::Key { key: c });
        let (a, x, b, bs, done) = (
            key(KeyCap::Char('a')),
            key(KeyCap::Char('x')),
            key(KeyCap::Char('b')),
            key(KeyCap::Backspace),
            key(KeyCap::Done),
        );
        let mut out = Vec::new();
        for (t, k) in [(0, a), (1, None), (2, x), (3, bs), (4, b), (5, done)] {
            assert!(r.goal().is_some());
            out.extend(r.on_commit(&mut scene, t, k));
        }
        let rec = &trials(&out)[0];
        assert_eq!(rec.errors, 2);
        assert!(rec.correct);
    }
}
