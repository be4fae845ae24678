//! Independent reference implementations shared by the integration tests
//! and the acceptance run.

#![allow(dead_code)]

use fronttouch::input::{TouchAction, TouchEvent};
use fronttouch::picking::pick_traced;
use fronttouch::scene::{
    build_binary_scene, build_grid_scene, build_keyboard_scene, build_menu_scene, BinaryLayout,
    GridLayout, KeyboardLayout, MenuLayout,
};
use fronttouch::technique::table::TableMachine;
use fronttouch::{
    make_ray, Aabb, Action, Attachment, Camera, CursorAngles, FittedMap, Input, NodeId, Ray, Scene,
    Technique, TechniqueConfig, TechniqueState, Vec3,
};
use rand::Rng;

// ---------------------------------------------------------------- picking

/// Plane intersection followed by three edge-side tests.
pub fn oracle_triangle(ray: &Ray, a: Vec3, b: Vec3, c: Vec3) -> Option<f64> {
    let n = (b - a).cross(c - a);
    let nn = n.dot(n);
    if nn == 0.0 {
        return None;
    }
    let denom = n.dot(ray.direction);
    if denom.abs() < 1e-12 * nn.sqrt() {
        return None;
    }
    let t = n.dot(a - ray.origin) / denom;
    if !(t >= ray.t_min && t <= ray.t_max) {
        return None;
    }
    let p = ray.at(t);
    let tol = -1e-9 * nn;
    for (e0, e1) in [(a, b), (b, c), (c, a)] {
        if (e1 - e0).cross(p - e0).dot(n) < tol {
            return None;
        }
    }
    Some(t)
}

/// Every triangle of every node, no culling.
pub fn brute_pick(scene: &Scene, ray: &Ray) -> Option<(NodeId, f64)> {
    let mut best: Option<(NodeId, f64)> = None;
    for node in scene.nodes() {
        for [a, b, c] in node.world_triangles() {
            if let Some(t) = oracle_triangle(ray, a, b, c) {
                if best.is_none_or(|(id, bt)| t < bt || (t == bt && node.id < id)) {
                    best = Some((node.id, t));
                }
            }
        }
    }
    best
}

pub fn node_hit(scene: &Scene, id: NodeId, ray: &Ray) -> bool {
    scene
        .node(id)
        .unwrap()
        .world_triangles()
        .any(|[a, b, c]| oracle_triangle(ray, a, b, c).is_some())
}

pub fn subtree(scene: &Scene, root: NodeId) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        out.push(id);
        stack.extend(scene.node(id).unwrap().children.iter().copied());
    }
    out
}

/// Clip interval found by sorting every plane crossing and probing the
/// midpoint of each segment between them.
pub fn oracle_clip(ray: &Ray, b: &Aabb) -> Option<(f64, f64)> {
    if b.is_empty() {
        return None;
    }
    let mut ts = vec![ray.t_min, ray.t_max];
    for axis in 0..3 {
        let d = ray.direction[axis];
        if d != 0.0 {
            for plane in [b.min[axis], b.max[axis]] {
                let t = (plane - ray.origin[axis]) / d;
                if t > ray.t_min && t < ray.t_max {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    let inside = |t: f64| {
        let p = ray.at(t);
        (0..3).all(|i| {
            let slack = 1e-9 * (1.0 + b.max[i].abs().max(b.min[i].abs()));
            p[i] >= b.min[i] - slack && p[i] <= b.max[i] + slack
        })
    };
    let mut range: Option<(f64, f64)> = None;
    for w in ts.windows(2) {
        let probe = if w[0] == w[1] {
            w[0]
        } else {
            0.5 * (w[0] + w[1])
        };
        if inside(probe) {
            range = Some(match range {
                None => (w[0], w[1]),
                Some((lo, _)) => (lo, w[1]),
            });
        }
    }
    if range.is_none() && ts.iter().any(|&t| inside(t)) {
        let t = *ts.iter().find(|&&t| inside(t)).unwrap();
        range = Some((t, t));
    }
    range
}

pub fn test_scenes() -> Vec<(&'static str, Scene, f64)> {
    vec![
        (
            "binary",
            build_binary_scene(&BinaryLayout::default(), Attachment::WorldFixed).unwrap(),
            45.0,
        ),
        (
            "binary-view",
            build_binary_scene(&BinaryLayout::default(), Attachment::ViewFixed).unwrap(),
            45.0,
        ),
        (
            "menu15",
            build_menu_scene(&MenuLayout::default()).unwrap(),
            45.0,
        ),
        (
            "keyboard",
            build_keyboard_scene(&KeyboardLayout::qwerty()).unwrap(),
            45.0,
        ),
        (
            "grid10k",
            build_grid_scene(&GridLayout::stress()).unwrap(),
            70.0,
        ),
    ]
}

#[derive(Debug, Default, Clone, Copy)]
pub struct PickReport {
    pub rays: usize,
    pub hits: usize,
    pub mismatches: usize,
    pub max_dt: f64,
    pub culled_hits: usize,
}

/// Casts `rays` random rays from random head poses and compares the
/// hierarchical pick with the brute-force oracle.
pub fn check_picks<R: Rng>(scene: &mut Scene, span: f64, rays: usize, rng: &mut R) -> PickReport {
    let mut rep = PickReport::default();
    let poses = 8;
    for pose in 0..poses {
        let cam = Camera::new(rng.random_range(-20.0..20.0), rng.random_range(-15.0..15.0));
        scene.update_world_transforms(cam);
        let n = rays / poses + usize::from(pose < rays % poses);
        for _ in 0..n {
            let c = CursorAngles::new(
                rng.random_range(-span..span),
                rng.random_range(-span..span) * 0.8,
            );
            let ray = make_ray(&cam, c);
            let (hit, trace) = pick_traced(scene, &ray);
            let oracle = brute_pick(scene, &ray);
            rep.rays += 1;
            match (hit, oracle) {
                (None, None) => {}
                (Some(h), Some((id, t))) if h.node_id == id => {
                    rep.hits += 1;
                    rep.max_dt = rep.max_dt.max((h.t - t).abs());
                }
                _ => rep.mismatches += 1,
            }
            for &root in &trace.culled {
                rep.culled_hits += subtree(scene, root)
                    .into_iter()
                    .filter(|&id| node_hit(scene, id, &ray))
                    .count();
            }
        }
    }
    rep
}

// ---------------------------------------------------------------- metrics

/// Minimum over every edit script, enumerated without memoisation.
pub fn msd_exhaustive(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let keep = usize::from(x != y) + msd_exhaustive(ra, rb);
            let del = 1 + msd_exhaustive(ra, b);
            let ins = 1 + msd_exhaustive(a, rb);
            keep.min(del).min(ins)
        }
    }
}

// ------------------------------------------------------------- techniques

/// Both implementations of one technique, stepped in lock step.
#[derive(Clone)]
pub struct Pair {
    pub state: TechniqueState,
    pub table: TableMachine,
}

impl Pair {
    pub fn new(t: Technique) -> Pair {
        let fit = FittedMap::exact(40.0, 1280.0, -35.0, 720.0);
        let config = TechniqueConfig::default();
        Pair {
            state: TechniqueState::new(t, fit, None, config),
            table: TableMachine::new(t, fit, None, config),
        }
    }

    /// Steps both; returns the (shared) actions or a description of the
    /// first disagreement.
    pub fn step(&mut self, input: &Input) -> Result<Vec<Action>, String> {
        let a = self.state.step(input);
        let b = self.table.step(input);
        if a != b {
            return Err(format!("state {a:?} vs table {b:?}"));
        }
        let declared = self
            .table
            .table
            .state(self.table.state())
            .map(|s| s.registered.len());
        if declared != Some(self.table.registered().len()) {
            return Err(format!(
                "table state {} registers wrong fingers",
                self.table.state()
            ));
        }
        if self.state.fingers_down() != self.table.registered().len() {
            return Err(format!(
                "{} fingers down vs {} registered",
                self.state.fingers_down(),
                self.table.registered().len()
            ));
        }
        Ok(a)
    }
}

/// Physical state of two fingers, used to generate plausible events.
#[derive(Debug, Clone, Copy)]
pub struct Hand {
    pub t: u64,
    pub pos: [Option<(i32, i32)>; 2],
    pub last_lift: Option<(i32, i32)>,
}

pub const OFF: (i32, i32) = (-10, 600);
const BASE: [(i32, i32); 2] = [(800, 700), (1300, 700)];

impl Hand {
    pub fn new() -> Hand {
        Hand {
            t: 0,
            pos: [None, None],
            last_lift: None,
        }
    }

    /// Every next event in the enumeration alphabet: downs at the home
    /// point, next to the last lift, or off the panel; small and large moves
    /// and moves off the panel; lifts. Presses and lifts come either 80 or
    /// 260 ms after the previous event, moves 40 ms after.
    pub fn choices(&self, technique: Technique) -> Vec<(TouchEvent, Hand)> {
        let mut out = Vec::new();
        for f in 0..2u8 {
            let i = f as usize;
            match self.pos[i] {
                None => {
                    let near = self.last_lift.map(|(x, y)| (x + 30, y)).unwrap_or(BASE[i]);
                    for p in [BASE[i], near, OFF] {
                        for dt in [80, 260] {
                            let mut h = *self;
                            h.t += dt;
                            h.pos[i] = Some(p);
                            out.push((event(technique, h.t, TouchAction::Down, f, p), h));
                        }
                    }
                }
                Some(cur) => {
                    let moves = if cur == OFF {
                        vec![BASE[i], OFF]
                    } else {
                        vec![(cur.0 + 6, cur.1), (cur.0 + 150, cur.1 + 40), OFF]
                    };
                    for p in moves {
                        let mut h = *self;
                        h.t += 40;
                        h.pos[i] = Some(p);
                        out.push((event(technique, h.t, TouchAction::Move, f, p), h));
                    }
                    for dt in [80, 260] {
                        let mut h = *self;
                        h.t += dt;
                        h.pos[i] = None;
                        if cur != OFF {
                            h.last_lift = Some(cur);
                        }
                        out.push((event(technique, h.t, TouchAction::Up, f, cur), h));
                    }
                }
            }
        }
        out
    }
}

impl Default for Hand {
    fn default() -> Self {
        Hand::new()
    }
}

/// Touch on the pad the technique listens to.
pub fn event(
    technique: Technique,
    t: u64,
    action: TouchAction,
    finger: u8,
    p: (i32, i32),
) -> TouchEvent {
    let mut e = TouchEvent::new(t, action, finger, p.0, p.1);
    e.source = technique.pad();
    e
}

/// Depth-first walk over every sequence up to `max_len`; returns the number
/// of sequences visited and the first disagreement.
pub fn enumerate(technique: Technique, max_len: usize) -> (u64, Option<String>) {
    fn walk(
        technique: Technique,
        pair: &Pair,
        hand: &Hand,
        depth: usize,
        path: &mut Vec<TouchEvent>,
        count: &mut u64,
    ) -> Option<String> {
        *count += 1;
        if depth == 0 {
            return None;
        }
        for (ev, next) in hand.choices(technique) {
            let mut p = pair.clone();
            path.push(ev);
            if let Err(e) = p.step(&Input::Touch(ev)) {
                return Some(format!("{technique}: {e} after {path:?}"));
            }
            if let Some(e) = walk(technique, &p, &next, depth - 1, path, count) {
                return Some(e);
            }
            path.pop();
        }
        None
    }
    let mut count = 0;
    let err = walk(
        technique,
        &Pair::new(technique),
        &Hand::new(),
        max_len,
        &mut Vec::new(),
        &mut count,
    );
    (count, err)
}

/// Random sequence including events a well-behaved client would never
/// send: duplicate downs, lifts of fingers that are not down, long gaps.
pub fn fuzz_sequence<R: Rng>(technique: Technique, rng: &mut R, len: usize) -> Vec<TouchEvent> {
    fuzz(technique, rng, len, 0.1)
}

/// Random sequence in which every finger follows `(Down Move* Up)*`.
pub fn fuzz_well_formed<R: Rng>(technique: Technique, rng: &mut R, len: usize) -> Vec<TouchEvent> {
    fuzz(technique, rng, len, 0.0)
}

fn fuzz<R: Rng>(technique: Technique, rng: &mut R, len: usize, malformed: f64) -> Vec<TouchEvent> {
    let mut t = 0u64;
    let mut down = [false; 2];
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        t += match rng.random_range(0..10) {
            0 => 0,
            1..=6 => rng.random_range(1..120),
            7 | 8 => rng.random_range(120..450),
            _ => rng.random_range(450..2000),
        };
        let f = rng.random_range(0..2u8);
        let i = f as usize;
        let action = if rng.random_bool(malformed) {
            [TouchAction::Down, TouchAction::Move, TouchAction::Up][rng.random_range(0..3)]
        } else if down[i] {
            if rng.random_bool(0.7) {
                TouchAction::Move
            } else {
                TouchAction::Up
            }
        } else {
            TouchAction::Down
        };
        match action {
            TouchAction::Down => down[i] = true,
            TouchAction::Up => down[i] = false,
            TouchAction::Move => {}
        }
        let p = if rng.random_bool(0.05) {
            (rng.random_range(-200..0), rng.random_range(-100..1540))
        } else if rng.random_bool(0.5) {
            (
                1000 + rng.random_range(-40..40) + 300 * f as i32,
                700 + rng.random_range(-40..40),
            )
        } else {
            (rng.random_range(0..2560), rng.random_range(0..1440))
        };
        out.push(event(technique, t, action, f, p));
    }
    out
}

/// Checks the commit-safety invariants over one well-formed sequence;
/// `None` when they hold.
pub fn check_commit_safety(technique: Technique, events: &[TouchEvent]) -> Option<String> {
    let config = TechniqueConfig::default();
    let mut s = TechniqueState::new(
        technique,
        FittedMap::exact(40.0, 1280.0, -35.0, 720.0),
        None,
        config,
    );
    // Presses the observer sees on the panel: finger -> (t_down, down point,
    // travelled far, began alone). A press that began alone is the one a
    // single-finger technique drags with; later contacts are strays.
    let mut pressed: [Option<(u64, (i32, i32), bool, bool)>; 2] = [None, None];
    for (k, ev) in events.iter().enumerate() {
        let i = ev.finger as usize;
        let on = ev.point().is_ok();
        let before = pressed;
        match ev.action {
            TouchAction::Down if on && pressed[i].is_none() => {
                let alone = pressed.iter().all(Option::is_none);
                pressed[i] = Some((ev.t_ms, (ev.x, ev.y), false, alone));
            }
            TouchAction::Move => {
                if let Some((_, d, far, _)) = &mut pressed[i] {
                    let dist = ((ev.x - d.0) as f64).hypot((ev.y - d.1) as f64);
                    *far |= !on || dist > config.tap_max_px;
                }
            }
            TouchAction::Up => pressed[i] = None,
            _ => {}
        }
        let commits = s
            .step(&Input::Touch(*ev))
            .iter()
            .filter(|a| matches!(a, Action::Commit(_)))
            .count();
        if commits == 0 {
            continue;
        }
        let down_before = before.iter().flatten().count();
        let bad = match technique {
            Technique::TwoFingers => ev.action != TouchAction::Up || down_before < 2,
            Technique::DragNTap => {
                let tap = before[i].is_some_and(|(t0, d, far, _)| {
                    let dist = ((ev.x - d.0) as f64).hypot((ev.y - d.1) as f64);
                    on && !far && dist <= config.tap_max_px && ev.t_ms - t0 <= config.tap_max_ms
                });
                let dragging = before
                    .iter()
                    .enumerate()
                    .any(|(j, p)| j != i && p.is_some_and(|p| p.3));
                ev.action != TouchAction::Up || !tap || dragging
            }
            _ => false,
        };
        if bad {
            return Some(format!("{technique}: commit at event {k} of {events:?}"));
        }
    }
    None
}
