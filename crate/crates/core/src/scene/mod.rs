//! Scene graph: an append-only tree of nodes with rigid transforms, optional
//! quad meshes, and world-fixed or view-fixed attachment.
//!
//! Nodes live in an arena indexed by [`NodeId`]. A child is always created
//! after its parent, so ids increase along every root-to-leaf path; the
//! bottom-up bounds pass relies on that ordering.

mod build;
mod snapshot;

pub use build::{
    build_binary_scene, build_grid_scene, build_keyboard_scene, build_menu_scene, BinaryLayout,
    GridLayout, KeySpec, KeyboardLayout, MenuLayout,
};
pub use snapshot::{NodeSnapshot, SceneSnapshot};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Mat3, Transform, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attachment {
    WorldFixed,
    ViewFixed,
}

/// Semantic color; the renderer decides what each one looks like.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorId {
    #[default]
    Neutral,
    Red,
    Blue,
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "cap", content = "char")]
pub enum KeyCap {
    Char(char),
    Space,
    Backspace,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextSlot {
    Presented,
    Transcription,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum UiRole {
    Button { label: u32 },
    Plane { side: PlaneSide },
    Key { key: KeyCap },
    Cursor,
    Text { slot: TextSlot },
}

impl UiRole {
    /// Whether a commit on a node with this role is a selection.
    pub fn is_selectable(&self) -> bool {
        matches!(
            self,
            UiRole::Button { .. } | UiRole::Plane { .. } | UiRole::Key { .. }
        )
    }
}

/// Indexed triangle list in node-local space.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// Flat `width x height` quad in the local `z = 0` plane, facing `+Z`
    /// (towards the viewer when the node looks down the view direction).
    pub fn quad(width: f64, height: f64) -> Mesh {
        let (hw, hh) = (width / 2.0, height / 2.0);
        Mesh {
            vertices: vec![
                Vec3::new(-hw, -hh, 0.0),
                Vec3::new(hw, -hh, 0.0),
                Vec3::new(hw, hh, 0.0),
                Vec3::new(-hw, hh, 0.0),
            ],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        }
    }
}

/// Head orientation. The camera sits at the scene origin; picking uses a
/// single center ray rather than one per eye.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Camera {
    pub head_yaw: f64,
    pub head_pitch: f64,
}

impl Camera {
    pub fn new(head_yaw: f64, head_pitch: f64) -> Self {
        Camera {
            head_yaw,
            head_pitch,
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::ZERO
    }

    pub fn head_pose(&self) -> Transform {
        Transform::rotation(Mat3::from_yaw_pitch(self.head_yaw, self.head_pitch))
    }
}

#[derive(Debug, Clone)]
pub struct SceneNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Transform relative to the parent (for view-fixed nodes: the offset
    /// from the head pose).
    pub local: Transform,
    pub mesh: Option<Mesh>,
    pub attachment: Attachment,
    pub ui_role: Option<UiRole>,
    pub color: ColorId,
    world: Transform,
    world_vertices: Vec<Vec3>,
    bounds: Aabb,
}

impl SceneNode {
    pub fn world_transform(&self) -> &Transform {
        &self.world
    }

    /// World-space bounds of this node's mesh and all descendants.
    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn world_vertices(&self) -> &[Vec3] {
        &self.world_vertices
    }

    pub fn world_triangles(&self) -> impl Iterator<Item = [Vec3; 3]> + '_ {
        let verts = &self.world_vertices;
        self.mesh
            .iter()
            .flat_map(|m| m.triangles.iter())
            .map(move |t| [verts[t[0]], verts[t[1]], verts[t[2]]])
    }

    /// Direction of the node origin as seen from the camera, `(yaw, pitch)`.
    pub fn world_angles(&self) -> (f64, f64) {
        self.world.translation.to_angles()
    }
}

/// Parameters for appending a node.
#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub local: Transform,
    pub mesh: Option<Mesh>,
    pub attachment: Attachment,
    pub ui_role: Option<UiRole>,
    pub color: ColorId,
}

impl NodeSpec {
    pub fn group(attachment: Attachment) -> Self {
        NodeSpec {
            local: Transform::IDENTITY,
            mesh: None,
            attachment,
            ui_role: None,
            color: ColorId::Neutral,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("invalid scene dimensions: {0}")]
    InvalidDimensions(String),
    #[error("duplicate key '{0}' in keyboard layout")]
    DuplicateKey(char),
    #[error("keyboard layout is missing the {0} key")]
    MissingKey(&'static str),
    #[error("unknown parent node {0}")]
    UnknownParent(NodeId),
}

/// Arena-backed scene tree rooted at [`NodeId::ROOT`].
#[derive(Debug, Clone)]
pub struct Scene {
    nodes: Vec<SceneNode>,
    camera: Camera,
}

impl Default for Scene {
    fn default() -> Self {
        Scene::new()
    }
}

impl Scene {
    /// A scene holding only a world-fixed identity root.
    pub fn new() -> Scene {
        let root = SceneNode {
            id: NodeId::ROOT,
            parent: None,
            children: Vec::new(),
            local: Transform::IDENTITY,
            mesh: None,
            attachment: Attachment::WorldFixed,
            ui_role: None,
            color: ColorId::Neutral,
            world: Transform::IDENTITY,
            world_vertices: Vec::new(),
            bounds: Aabb::EMPTY,
        };
        Scene {
            nodes: vec![root],
            camera: Camera::default(),
        }
    }

    pub fn add_child(&mut self, parent: NodeId, spec: NodeSpec) -> Result<NodeId, SceneError> {
        if parent.index() >= self.nodes.len() {
            return Err(SceneError::UnknownParent(parent));
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(SceneNode {
            id,
            parent: Some(parent),
            children: Vec::new(),
            local: spec.local,
            mesh: spec.mesh,
            attachment: spec.attachment,
            ui_role: spec.ui_role,
            color: spec.color,
            world: Transform::IDENTITY,
            world_vertices: Vec::new(),
            bounds: Aabb::EMPTY,
        });
        self.nodes[parent.index()].children.push(id);
        Ok(id)
    }

    pub fn root(&self) -> &SceneNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> Option<&SceneNode> {
        self.nodes.get(id.index())
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut SceneNode> {
        self.nodes.get_mut(id.index())
    }

    pub fn nodes(&self) -> &[SceneNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Camera used by the most recent [`Scene::update_world_transforms`].
    pub fn camera(&self) -> Camera {
        self.camera
    }

    pub fn has_view_fixed(&self) -> bool {
        self.nodes
            .iter()
            .any(|n| n.attachment == Attachment::ViewFixed)
    }

    pub fn find_role(&self, role: UiRole) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.ui_role == Some(role))
            .map(|n| n.id)
    }

    pub fn nodes_with_role<'a>(
        &'a self,
        pred: impl Fn(&UiRole) -> bool + 'a,
    ) -> impl Iterator<Item = &'a SceneNode> + 'a {
        self.nodes
            .iter()
            .filter(move |n| n.ui_role.as_ref().is_some_and(&pred))
    }

    pub fn set_color(&mut self, id: NodeId, color: ColorId) {
        if let Some(n) = self.nodes.get_mut(id.index()) {
            n.color = color;
        }
    }

    /// Recomposes world transforms for `camera` and refreshes all bounds.
    ///
    /// A view-fixed node (with no view-fixed ancestor) gets the head pose
    /// composed in front of its parent-relative transform; its descendants
    /// inherit it through the parent chain.
    pub fn update_world_transforms(&mut self, camera: Camera) {
        self.camera = camera;
        let head = camera.head_pose();
        // Parents precede children in the arena, so one forward pass suffices.
        let mut head_applied = vec![false; self.nodes.len()];
        for i in 0..self.nodes.len() {
            let (parent_world, parent_applied) = match self.nodes[i].parent {
                Some(p) => (self.nodes[p.index()].world, head_applied[p.index()]),
                None => (Transform::IDENTITY, false),
            };
            let node = &mut self.nodes[i];
            let mut world = parent_world.compose(&node.local);
            let mut applied = parent_applied;
            if node.attachment == Attachment::ViewFixed && !parent_applied {
                world = head.compose(&world);
                applied = true;
            }
            head_applied[i] = applied;
            node.world = world;
            node.world_vertices = match &node.mesh {
                Some(m) => m.vertices.iter().map(|&v| world.apply(v)).collect(),
                None => Vec::new(),
            };
        }
        for i in (0..self.nodes.len()).rev() {
            let own = Aabb::from_points(self.nodes[i].world_vertices.iter().copied());
            let bounds = self.nodes[i]
                .children
                .iter()
                .fold(own, |b, c| b.union(&self.nodes[c.index()].bounds));
            self.nodes[i].bounds = bounds;
        }
    }

    pub fn snapshot(&self) -> SceneSnapshot {
        SceneSnapshot::from_scene(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_child_rejects_unknown_parent() {
        let mut s = Scene::new();
        let err = s
            .add_child(NodeId(5), NodeSpec::group(Attachment::WorldFixed))
            .unwrap_err();
        assert_eq!(err, SceneError::UnknownParent(NodeId(5)));
    }

    #[test]
    fn identity_pose_gives_local_composition() {
        let mut s = Scene::new();
        let g = s
            .add_child(
                NodeId::ROOT,
                NodeSpec {
                    local: Transform::new(Mat3::yaw(10.0), Vec3::new(0.0, 1.0, 0.0)),
                    ..NodeSpec::group(Attachment::ViewFixed)
                },
            )
            .unwrap();
        let leaf_local = Transform::new(Mat3::pitch(5.0), Vec3::new(0.0, 0.0, -2.0));
        let leaf = s
            .add_child(
                g,
                NodeSpec {
                    local: leaf_local,
                    mesh: Some(Mesh::quad(0.2, 0.2)),
                    ..NodeSpec::group(Attachment::ViewFixed)
                },
            )
            .unwrap();
        s.update_world_transforms(Camera::default());
        let expect = s.node(g).unwrap().local.compose(&leaf_local);
        let got = s.node(leaf).unwrap().world_transform();
        assert!((got.translation - expect.translation).length() < 1e-12);
    }
}
