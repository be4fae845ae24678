//! Ray picking over the scene tree.
//!
//! The scene hierarchy doubles as the bounding volume hierarchy: traversal
//! starts at the root, clips the ray against each node's bounds, and skips
//! the whole subtree when the clipped interval is empty. Surviving nodes get
//! an exact ray/triangle test; the closest hit wins, ties broken by the
//! smaller node id.

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Vec3};
use crate::mapping::CursorAngles;
use crate::scene::{Camera, NodeId, Scene};

pub const DEFAULT_T_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    /// Normalizes `direction`; the interval is clamped so `0 <= t_min <= t_max`.
    pub fn new(origin: Vec3, direction: Vec3, t_min: f64, t_max: f64) -> Ray {
        let t_min = t_min.max(0.0);
        Ray {
            origin,
            direction: direction.normalized(),
            t_min,
            t_max: t_max.max(t_min),
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Center-eye ray at `yaw = head_yaw + theta1`, `pitch = head_pitch + theta2`.
pub fn make_ray(camera: &Camera, cursor: CursorAngles) -> Ray {
    let dir = Vec3::from_angles(
        camera.head_yaw + cursor.theta1,
        camera.head_pitch + cursor.theta2,
    );
    Ray::new(camera.position(), dir, 0.0, DEFAULT_T_MAX)
}

/// Slab test: the part of `[t_min, t_max]` inside the closed box.
pub fn ray_aabb_clip(ray: &Ray, aabb: &Aabb) -> Option<(f64, f64)> {
    if aabb.is_empty() {
        return None;
    }
    let (mut lo, mut hi) = (ray.t_min, ray.t_max);
    for axis in 0..3 {
        let o = ray.origin[axis];
        let d = ray.direction[axis];
        let (bmin, bmax) = (aabb.min[axis], aabb.max[axis]);
        if d == 0.0 {
            if o < bmin || o > bmax {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let (mut t0, mut t1) = ((bmin - o) * inv, (bmax - o) * inv);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        lo = lo.max(t0);
        hi = hi.min(t1);
        if lo > hi {
            return None;
        }
    }
    Some((lo, hi))
}

/// Barycentric slack that keeps shared edges watertight: a ray through the
/// diagonal of a quad must hit at least one of its two triangles despite
/// rounding.
pub const EDGE_EPSILON: f64 = 1e-9;

/// Möller–Trumbore intersection, inclusive of edges (widened by
/// [`EDGE_EPSILON`]). Degenerate triangles and rays parallel to the triangle
/// plane never hit.
pub fn ray_triangle(ray: &Ray, v0: Vec3, v1: Vec3, v2: Vec3) -> Option<f64> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let normal = e1.cross(e2);
    let area2 = normal.length();
    if area2 == 0.0 || !area2.is_finite() {
        return None;
    }
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    if det.abs() <= 1e-14 * area2 {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - v0;
    let u = s.dot(p) * inv;
    if !(-EDGE_EPSILON..=1.0 + EDGE_EPSILON).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.direction.dot(q) * inv;
    if v < -EDGE_EPSILON || u + v > 1.0 + EDGE_EPSILON {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t >= ray.t_min && t <= ray.t_max).then_some(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PickResult {
    pub node_id: NodeId,
    pub t: f64,
    pub hit_point: Vec3,
}

/// Traversal bookkeeping for tests and benchmarks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PickTrace {
    /// Nodes whose bounds intersected the ray (and were therefore expanded).
    pub visited: usize,
    /// Roots of subtrees skipped because their bounds missed the ray.
    pub culled: Vec<NodeId>,
}

pub fn pick(scene: &Scene, ray: &Ray) -> Option<PickResult> {
    pick_inner(scene, ray, None)
}

pub fn pick_traced(scene: &Scene, ray: &Ray) -> (Option<PickResult>, PickTrace) {
    let mut trace = PickTrace::default();
    let hit = pick_inner(scene, ray, Some(&mut trace));
    (hit, trace)
}

fn pick_inner(scene: &Scene, ray: &Ray, mut trace: Option<&mut PickTrace>) -> Option<PickResult> {
    let mut best: Option<(f64, NodeId)> = None;
    let mut stack = vec![NodeId::ROOT];
    while let Some(id) = stack.pop() {
        let node = &scene.nodes()[id.index()];
        if ray_aabb_clip(ray, node.bounds()).is_none() {
            if let Some(t) = trace.as_deref_mut() {
                t.culled.push(id);
            }
            continue;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.visited += 1;
        }
        for [a, b, c] in node.world_triangles() {
            if let Some(t) = ray_triangle(ray, a, b, c) {
                let better = match best {
                    None => true,
                    Some((bt, bid)) => t < bt || (t == bt && id < bid),
                };
                if better {
                    best = Some((t, id));
                }
            }
        }
        stack.extend(node.children.iter().rev().copied());
    }
    best.map(|(t, node_id)| PickResult {
        node_id,
        t,
        hit_point: ray.at(t),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "node_id")]
pub enum UiEvent {
    HoverEnter(NodeId),
    HoverExit(NodeId),
    Select(NodeId),
    /// A commit that landed on nothing selectable.
    SelectMiss,
}

/// Hover transitions for a pick change, followed by the selection outcome
/// when `commit` is set.
pub fn emit_ui_event(
    scene: &Scene,
    prev: Option<NodeId>,
    new: Option<NodeId>,
    commit: bool,
) -> Vec<UiEvent> {
    let mut events = Vec::new();
    if prev != new {
        if let Some(p) = prev {
            events.push(UiEvent::HoverExit(p));
        }
        if let Some(n) = new {
            events.push(UiEvent::HoverEnter(n));
        }
    }
    if commit {
        let selectable = new
            .and_then(|n| scene.node(n))
            .and_then(|n| n.ui_role)
            .is_some_and(|r| r.is_selectable());
        events.push(match new {
            Some(n) if selectable => UiEvent::Select(n),
            _ => UiEvent::SelectMiss,
        });
    }
    events
}
