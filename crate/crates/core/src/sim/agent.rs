//! Closed-loop simulated participant driving a live session.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{NoiseModel, UserModel};
use crate::input::{
    HeadPose, Input, TouchAction, TouchEvent, TouchPoint, PANEL_HEIGHT, PANEL_WIDTH,
};
use crate::mapping::CursorAngles;
use crate::picking::{make_ray, pick};
use crate::scene::{Camera, NodeId};
use crate::session::{ConfigError, Session, SessionConfig};
use crate::task::TrialRecord;
use crate::technique::Technique;
use crate::trace::{session_trace, Trace};

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub trace: Trace,
    pub records: Vec<TrialRecord>,
    /// Trials never completed because the attempt budget ran out.
    pub abandoned: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid simulation parameters: {0}")]
    Model(String),
}

/// Runs one participant through one task with one technique. The same
/// inputs always give the same trace.
pub fn simulate_participant(
    config: &SessionConfig,
    user: &UserModel,
    noise: &NoiseModel,
    seed: u64,
) -> Result<SimOutcome, SimError> {
    user.validate().map_err(SimError::Model)?;
    noise.validate().map_err(SimError::Model)?;
    let (session, _) = Session::open(config.clone())?;
    let mut agent = Agent {
        s: session,
        user,
        noise,
        rng: ChaCha8Rng::seed_from_u64(seed),
        now: 0,
        head: (0.0, 0.0),
        finger: (0.0, 0.0),
    };
    agent.run();
    Ok(SimOutcome {
        trace: session_trace(&agent.s),
        records: agent.s.records().to_vec(),
        abandoned: agent.s.abandoned(),
    })
}

struct Agent<'a> {
    s: Session,
    user: &'a UserModel,
    noise: &'a NoiseModel,
    rng: ChaCha8Rng,
    /// Latest timestamp fed to the session.
    now: u64,
    head: (f64, f64),
    /// Position of the finger currently touching the front pad.
    finger: (f64, f64),
}

fn clamp_panel(p: (f64, f64)) -> (f64, f64) {
    (
        p.0.clamp(0.0, (PANEL_WIDTH - 1) as f64),
        p.1.clamp(0.0, (PANEL_HEIGHT - 1) as f64),
    )
}

fn touch(t: u64, action: TouchAction, finger: u8, p: (f64, f64)) -> Input {
    Input::Touch(TouchEvent::new(
        t,
        action,
        finger,
        p.0.round() as i32,
        p.1.round() as i32,
    ))
}

impl Agent<'_> {
    fn run(&mut self) {
        let expected = self.s.spec().expected_records();
        let cap = expected * 200 + 1000;
        let mut stall = 0;
        let mut attempts = 0;
        while let Some(goal) = self.s.runner().goal() {
            if stall >= self.user.attempt_budget || attempts >= cap {
                break;
            }
            let before = self.progress();
            self.select(goal);
            attempts += 1;
            if self.progress() == before {
                stall += 1;
            } else {
                stall = 0;
            }
        }
    }

    fn progress(&self) -> (usize, Option<String>, Option<NodeId>) {
        (
            self.s.records().len(),
            self.s.runner().transcription().map(str::to_string),
            self.s.runner().goal(),
        )
    }

    /// Feeds a batch in time order; head poses go first on ties so a tap
    /// sees the pose sampled at the same instant.
    fn feed(&mut self, mut batch: Vec<Input>) {
        batch.sort_by_key(|i| (i.t_ms(), matches!(i, Input::Touch(_))));
        for i in batch {
            debug_assert!(i.t_ms() >= self.now);
            self.now = self.now.max(i.t_ms());
            self.s
                .handle(i)
                .expect("simulated inputs are time-ordered per channel");
        }
    }

    fn goal_angles(&self, goal: NodeId) -> (f64, f64) {
        self.s
            .scene()
            .node(goal)
            .expect("goal node exists")
            .world_angles()
    }

    /// Cursor angles that put the goal under the cursor at the current head
    /// pose.
    fn cursor_target(&self, goal: NodeId) -> CursorAngles {
        let (y, p) = self.goal_angles(goal);
        let cam = self.s.camera();
        CursorAngles::new(y - cam.head_yaw, p - cam.head_pitch)
    }

    fn select(&mut self, goal: NodeId) {
        match self.s.config().technique {
            Technique::SideGaze | Technique::FrontGaze => self.gaze(goal),
            Technique::FrontWorld | Technique::FrontView => self.direct_tap(goal),
            Technique::TwoFingers => self.two_fingers(goal),
            Technique::DragNTap => self.drag_n_tap(goal),
        }
    }

    fn sweep(&self, from: (f64, f64), to: (f64, f64), t0: u64, out: &mut Vec<Input>) -> u64 {
        let dist = (to.0 - from.0).hypot(to.1 - from.1);
        let dur = (dist / self.user.head_velocity_deg_s * 1000.0).ceil() as u64;
        let mut k = 1;
        while k * self.user.sample_ms < dur {
            let f = (k * self.user.sample_ms) as f64 / dur as f64;
            out.push(Input::Head(HeadPose {
                t_ms: t0 + k * self.user.sample_ms,
                yaw_deg: from.0 + f * (to.0 - from.0),
                pitch_deg: from.1 + f * (to.1 - from.1),
            }));
            k += 1;
        }
        out.push(Input::Head(HeadPose {
            t_ms: t0 + dur,
            yaw_deg: to.0,
            pitch_deg: to.1,
        }));
        t0 + dur
    }

    /// Drags finger 0 from its current position to `to`, starting at `t0`.
    fn drag(&mut self, to: (f64, f64), t0: u64) {
        let from = self.finger;
        let dist = (to.0 - from.0).hypot(to.1 - from.1);
        let dur = (dist / self.user.drag_velocity_px_s * 1000.0).ceil() as u64;
        let steps = dur.div_ceil(self.user.sample_ms).max(1);
        let batch = (1..=steps)
            .map(|k| {
                let f = k as f64 / steps as f64;
                let p = (from.0 + f * (to.0 - from.0), from.1 + f * (to.1 - from.1));
                touch(t0 + k * self.user.sample_ms, TouchAction::Move, 0, p)
            })
            .collect();
        self.feed(batch);
        self.finger = to;
    }

    /// Open-loop touch aimed at `c`; redrawn while it misses the panel.
    fn landing(&mut self, c: CursorAngles) -> (f64, f64) {
        let (px, py) = self.user.touch_map.forward(c);
        let aim = clamp_panel((px, py));
        for _ in 0..100 {
            let (dx, dy) = self.noise.touch_offset(&mut self.rng);
            let p = (aim.0 + dx, aim.1 + dy);
            if TouchPoint::new(p.0.round() as i32, p.1.round() as i32).is_ok() {
                return p;
            }
        }
        aim
    }

    /// Pixel offset the hand produces when trying to move the cursor by
    /// `err` degrees.
    fn drag_vector(&mut self, err: (f64, f64)) -> (f64, f64) {
        let gain = self.noise.drag_gain(&mut self.rng);
        let (m1, m2) = self.noise.motor(&mut self.rng);
        let map = &self.user.touch_map;
        (map.ax * (err.0 + m1) * gain, map.ay * (err.1 + m2) * gain)
    }

    /// Visually guided drag corrections with the finger still down.
    fn correct(&mut self, goal: NodeId, target: CursorAngles) {
        for _ in 0..self.user.corrective_iterations {
            if self.s.pick_cursor() == Some(goal) {
                break;
            }
            let c = self.s.cursor();
            let v = self.drag_vector((target.theta1 - c.theta1, target.theta2 - c.theta2));
            let to = clamp_panel((self.finger.0 + v.0, self.finger.1 + v.1));
            let t0 = self.now + self.user.perception_ms;
            self.drag(to, t0);
        }
    }

    fn gaze(&mut self, goal: NodeId) {
        let target = self.goal_angles(goal);
        let mut batch = Vec::new();
        let mut t = self.now + self.user.reaction_ms;
        let (sy, sp) = self.noise.settle(&mut self.rng);
        let mut aim = (target.0 + sy, target.1 + sp);
        let mut final_start = t;
        t = self.sweep(self.head, aim, t, &mut batch);
        for _ in 0..self.user.corrective_iterations {
            let ray = make_ray(&Camera::new(aim.0, aim.1), CursorAngles::ZERO);
            if pick(self.s.scene(), &ray).map(|p| p.node_id) == Some(goal) {
                break;
            }
            let (m1, m2) = self.noise.motor(&mut self.rng);
            let next = (target.0 + m1, target.1 + m2);
            final_start = t + self.user.perception_ms;
            t = self.sweep(aim, next, final_start, &mut batch);
            aim = next;
        }
        let planned = (t + self.user.verify_ms) as f64 + self.noise.tap_jitter(&mut self.rng);
        let down = (planned.round().max(0.0) as u64)
            .max(final_start)
            .max(self.now);
        let up = down + self.user.tap_ms;
        let (d, u) = if self.s.config().technique == Technique::SideGaze {
            (
                TouchEvent::side(down, TouchAction::Down, 0),
                TouchEvent::side(up, TouchAction::Up, 0),
            )
        } else {
            let c = TouchPoint::center();
            (
                TouchEvent::new(down, TouchAction::Down, 0, c.x(), c.y()),
                TouchEvent::new(up, TouchAction::Up, 0, c.x(), c.y()),
            )
        };
        batch.push(Input::Touch(d));
        batch.push(Input::Touch(u));
        self.feed(batch);
        self.head = aim;
    }

    fn direct_tap(&mut self, goal: NodeId) {
        let target = self.cursor_target(goal);
        let p = self.landing(target);
        let t = self.now + self.user.reaction_ms;
        self.feed(vec![
            touch(t, TouchAction::Down, 0, p),
            touch(t + self.user.tap_ms, TouchAction::Up, 0, p),
        ]);
    }

    fn two_fingers(&mut self, goal: NodeId) {
        let target = self.cursor_target(goal);
        let p = self.landing(target);
        self.finger = p;
        let t = self.now + self.user.reaction_ms;
        self.feed(vec![touch(t, TouchAction::Down, 0, p)]);
        self.correct(goal, target);
        let off = self.user.tapper_offset_px as f64;
        let q = if self.finger.0 + off < PANEL_WIDTH as f64 {
            (self.finger.0 + off, self.finger.1)
        } else {
            (self.finger.0 - off, self.finger.1)
        };
        let t = self.now + self.user.perception_ms;
        self.feed(vec![
            touch(t, TouchAction::Down, 1, q),
            touch(t + self.user.tap_ms, TouchAction::Up, 1, q),
        ]);
        let t = self.now + self.user.sample_ms;
        self.feed(vec![touch(t, TouchAction::Up, 0, self.finger)]);
    }

    fn drag_n_tap(&mut self, goal: NodeId) {
        let target = self.cursor_target(goal);
        let c = self.s.cursor();
        let v = self.drag_vector((target.theta1 - c.theta1, target.theta2 - c.theta2));
        let center = (PANEL_WIDTH as f64 / 2.0, PANEL_HEIGHT as f64 / 2.0);
        let start = clamp_panel((center.0 - v.0 / 2.0, center.1 - v.1 / 2.0));
        let start = (start.0.round(), start.1.round());
        self.finger = start;
        let t = self.now + self.user.reaction_ms;
        self.feed(vec![touch(t, TouchAction::Down, 0, start)]);
        let to = clamp_panel((start.0 + v.0, start.1 + v.1));
        self.drag(to, t);
        self.correct(goal, target);
        let lift = self.now + self.user.sample_ms;
        let t = lift + self.user.retap_delay_ms;
        let p = self.finger;
        self.feed(vec![
            touch(lift, TouchAction::Up, 0, p),
            touch(t, TouchAction::Down, 0, p),
            touch(t + self.user.tap_ms, TouchAction::Up, 0, p),
        ]);
    }
}
