//! Procedural construction of the experimental UIs.
//!
//! Every selectable element is a flat quad whose center lies on a sphere of
//! radius `radius_m` around the camera. Quads stay upright and are turned
//! about the vertical axis to face the camera, so neighbouring elements in
//! a grid keep disjoint bounding boxes. Angular sizes are converted to quad
//! extents with `2 r tan(a / 2)`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{
    Attachment, ColorId, KeyCap, Mesh, NodeId, NodeSpec, PlaneSide, Scene, SceneError, TextSlot,
    UiRole,
};
use crate::geometry::{Mat3, Transform, Vec3};

fn extent(radius: f64, angle_deg: f64) -> f64 {
    2.0 * radius * (angle_deg.to_radians() / 2.0).tan()
}

fn placed(yaw: f64, pitch: f64, radius: f64) -> Transform {
    Transform::new(Mat3::yaw(yaw), Vec3::from_angles(yaw, pitch) * radius)
}

fn panel(
    yaw: f64,
    pitch: f64,
    width_deg: f64,
    height_deg: f64,
    radius: f64,
    attachment: Attachment,
    role: UiRole,
    color: ColorId,
) -> NodeSpec {
    NodeSpec {
        local: placed(yaw, pitch, radius),
        mesh: Some(Mesh::quad(
            extent(radius, width_deg),
            extent(radius, height_deg),
        )),
        attachment,
        ui_role: Some(role),
        color,
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), SceneError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SceneError::InvalidDimensions(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn check_gap(gap: f64) -> Result<(), SceneError> {
    if gap.is_finite() && gap >= 0.0 {
        Ok(())
    } else {
        Err(SceneError::InvalidDimensions(format!(
            "gap must be non-negative, got {gap}"
        )))
    }
}

/// Two equally sized planes split by a vertical center line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BinaryLayout {
    pub plane_width_deg: f64,
    pub plane_height_deg: f64,
    /// Width of the dividing line between the planes.
    pub divider_deg: f64,
    pub radius_m: f64,
}

impl Default for BinaryLayout {
    fn default() -> Self {
        BinaryLayout {
            plane_width_deg: 30.0,
            plane_height_deg: 24.0,
            divider_deg: 1.0,
            radius_m: 2.0,
        }
    }
}

/// Left plane starts red, right plane blue.
pub fn build_binary_scene(
    layout: &BinaryLayout,
    attachment: Attachment,
) -> Result<Scene, SceneError> {
    check_positive("plane_width_deg", layout.plane_width_deg)?;
    check_positive("plane_height_deg", layout.plane_height_deg)?;
    check_positive("radius_m", layout.radius_m)?;
    check_gap(layout.divider_deg)?;
    let mut scene = Scene::new();
    let group = scene.add_child(NodeId::ROOT, NodeSpec::group(attachment))?;
    let offset = (layout.plane_width_deg + layout.divider_deg) / 2.0;
    for (side, yaw, color) in [
        (PlaneSide::Left, -offset, ColorId::Red),
        (PlaneSide::Right, offset, ColorId::Blue),
    ] {
        scene.add_child(
            group,
            panel(
                yaw,
                0.0,
                layout.plane_width_deg,
                layout.plane_height_deg,
                layout.radius_m,
                attachment,
                UiRole::Plane { side },
                color,
            ),
        )?;
    }
    scene.update_world_transforms(Default::default());
    Ok(scene)
}

/// Grid menu of congruent buttons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MenuLayout {
    pub rows: u32,
    pub cols: u32,
    pub button_width_deg: f64,
    pub button_height_deg: f64,
    pub gap_deg: f64,
    pub radius_m: f64,
    pub attachment: Attachment,
}

impl Default for MenuLayout {
    fn default() -> Self {
        MenuLayout {
            rows: 3,
            cols: 5,
            button_width_deg: 12.0,
            button_height_deg: 10.0,
            gap_deg: 1.0,
            radius_m: 2.0,
            attachment: Attachment::WorldFixed,
        }
    }
}

impl MenuLayout {
    pub fn button_count(&self) -> u32 {
        self.rows * self.cols
    }

    /// Label of the button straight ahead (row-major center cell).
    pub fn center_label(&self) -> u32 {
        (self.rows / 2) * self.cols + self.cols / 2
    }

    /// Angular center `(yaw, pitch)` of a button; row 0 is the top row.
    pub fn button_center(&self, label: u32) -> (f64, f64) {
        let (r, c) = ((label / self.cols) as f64, (label % self.cols) as f64);
        let yaw = (c - (self.cols as f64 - 1.0) / 2.0) * (self.button_width_deg + self.gap_deg);
        let pitch = ((self.rows as f64 - 1.0) / 2.0 - r) * (self.button_height_deg + self.gap_deg);
        (yaw, pitch)
    }
}

/// Buttons are labelled row-major from 0, all children of one group node.
pub fn build_menu_scene(layout: &MenuLayout) -> Result<Scene, SceneError> {
    if layout.rows == 0 || layout.cols == 0 {
        return Err(SceneError::InvalidDimensions(format!(
            "menu needs at least one row and column, got {}x{}",
            layout.rows, layout.cols
        )));
    }
    check_positive("button_width_deg", layout.button_width_deg)?;
    check_positive("button_height_deg", layout.button_height_deg)?;
    check_positive("radius_m", layout.radius_m)?;
    check_gap(layout.gap_deg)?;
    let mut scene = Scene::new();
    let group = scene.add_child(NodeId::ROOT, NodeSpec::group(layout.attachment))?;
    for label in 0..layout.button_count() {
        let (yaw, pitch) = layout.button_center(label);
        scene.add_child(
            group,
            panel(
                yaw,
                pitch,
                layout.button_width_deg,
                layout.button_height_deg,
                layout.radius_m,
                layout.attachment,
                UiRole::Button { label },
                ColorId::Neutral,
            ),
        )?;
    }
    scene.update_world_transforms(Default::default());
    Ok(scene)
}

/// Large button grid grouped into a quadtree of bounding nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub rows: u32,
    pub cols: u32,
    pub button_width_deg: f64,
    pub button_height_deg: f64,
    pub gap_deg: f64,
    pub radius_m: f64,
}

impl GridLayout {
    /// 100 x 100 one-degree buttons.
    pub fn stress() -> Self {
        GridLayout {
            rows: 100,
            cols: 100,
            button_width_deg: 1.0,
            button_height_deg: 1.0,
            gap_deg: 0.2,
            radius_m: 2.0,
        }
    }

    fn center(&self, r: u32, c: u32) -> (f64, f64) {
        MenuLayout {
            rows: self.rows,
            cols: self.cols,
            button_width_deg: self.button_width_deg,
            button_height_deg: self.button_height_deg,
            gap_deg: self.gap_deg,
            radius_m: self.radius_m,
            attachment: Attachment::WorldFixed,
        }
        .button_center(r * self.cols + c)
    }
}

/// Buttons are labelled row-major; each group node covers a rectangular
/// block of cells and splits it into up to four quadrants.
pub fn build_grid_scene(layout: &GridLayout) -> Result<Scene, SceneError> {
    if layout.rows == 0 || layout.cols == 0 {
        return Err(SceneError::InvalidDimensions(format!(
            "grid needs at least one cell, got {}x{}",
            layout.rows, layout.cols
        )));
    }
    check_positive("button_width_deg", layout.button_width_deg)?;
    check_positive("button_height_deg", layout.button_height_deg)?;
    check_positive("radius_m", layout.radius_m)?;
    check_gap(layout.gap_deg)?;
    let mut scene = Scene::new();
    add_block(
        &mut scene,
        NodeId::ROOT,
        layout,
        (0, layout.rows),
        (0, layout.cols),
    )?;
    scene.update_world_transforms(Default::default());
    Ok(scene)
}

fn add_block(
    scene: &mut Scene,
    parent: NodeId,
    layout: &GridLayout,
    rows: (u32, u32),
    cols: (u32, u32),
) -> Result<(), SceneError> {
    let (nr, nc) = (rows.1 - rows.0, cols.1 - cols.0);
    if nr == 1 && nc == 1 {
        let (r, c) = (rows.0, cols.0);
        let (yaw, pitch) = layout.center(r, c);
        scene.add_child(
            parent,
            panel(
                yaw,
                pitch,
                layout.button_width_deg,
                layout.button_height_deg,
                layout.radius_m,
                Attachment::WorldFixed,
                UiRole::Button {
                    label: r * layout.cols + c,
                },
                ColorId::Neutral,
            ),
        )?;
        return Ok(());
    }
    let group = scene.add_child(parent, NodeSpec::group(Attachment::WorldFixed))?;
    let rmid = rows.0 + nr.div_ceil(2);
    let cmid = cols.0 + nc.div_ceil(2);
    for rs in [(rows.0, rmid), (rmid, rows.1)] {
        for cs in [(cols.0, cmid), (cmid, cols.1)] {
            if rs.0 < rs.1 && cs.0 < cs.1 {
                add_block(scene, group, layout, rs, cs)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeySpec {
    pub cap: KeyCap,
    /// Width in key units.
    pub width: f64,
}

impl KeySpec {
    pub fn char(c: char) -> Self {
        KeySpec {
            cap: KeyCap::Char(c),
            width: 1.0,
        }
    }
}

/// Rows of keys; each row is shifted right by its offset (in key units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyboardLayout {
    pub rows: Vec<(f64, Vec<KeySpec>)>,
    pub key_width_deg: f64,
    pub key_height_deg: f64,
    pub gap_deg: f64,
    /// Pitch of the keyboard's vertical center.
    pub center_pitch_deg: f64,
    pub presented_pitch_deg: f64,
    pub transcription_pitch_deg: f64,
    pub radius_m: f64,
    pub attachment: Attachment,
}

impl KeyboardLayout {
    pub fn qwerty() -> Self {
        let letters = |s: &str| s.chars().map(KeySpec::char).collect::<Vec<_>>();
        let mut third = letters("zxcvbnm");
        third.push(KeySpec {
            cap: KeyCap::Backspace,
            width: 2.0,
        });
        KeyboardLayout {
            rows: vec![
                (0.0, letters("qwertyuiop")),
                (0.5, letters("asdfghjkl")),
                (1.0, third),
                (
                    2.0,
                    vec![
                        KeySpec {
                            cap: KeyCap::Space,
                            width: 5.0,
                        },
                        KeySpec {
                            cap: KeyCap::Done,
                            width: 2.0,
                        },
                    ],
                ),
            ],
            key_width_deg: 4.5,
            key_height_deg: 5.0,
            gap_deg: 0.5,
            center_pitch_deg: -8.0,
            presented_pitch_deg: 14.0,
            transcription_pitch_deg: 9.0,
            radius_m: 2.0,
            attachment: Attachment::WorldFixed,
        }
    }

    /// Angular centers and sizes of every key, row-major.
    pub fn key_geometry(&self) -> Vec<(KeyCap, f64, f64, f64)> {
        let unit = self.key_width_deg + self.gap_deg;
        let total = self
            .rows
            .iter()
            .map(|(off, keys)| off + keys.iter().map(|k| k.width).sum::<f64>())
            .fold(0.0, f64::max);
        let row_pitch = self.key_height_deg + self.gap_deg;
        let nrows = self.rows.len() as f64;
        let mut out = Vec::new();
        for (r, (offset, keys)) in self.rows.iter().enumerate() {
            let pitch = self.center_pitch_deg + ((nrows - 1.0) / 2.0 - r as f64) * row_pitch;
            let mut cursor = *offset;
            for k in keys {
                let yaw = (cursor + k.width / 2.0 - total / 2.0) * unit;
                out.push((k.cap, yaw, pitch, k.width * unit - self.gap_deg));
                cursor += k.width;
            }
        }
        out
    }
}

/// One `Key` node per layout entry plus the presented-phrase and
/// transcription text nodes (which carry no mesh and are never picked).
pub fn build_keyboard_scene(layout: &KeyboardLayout) -> Result<Scene, SceneError> {
    check_positive("key_width_deg", layout.key_width_deg)?;
    check_positive("key_height_deg", layout.key_height_deg)?;
    check_positive("radius_m", layout.radius_m)?;
    check_gap(layout.gap_deg)?;
    if layout.rows.iter().all(|(_, keys)| keys.is_empty()) {
        return Err(SceneError::InvalidDimensions("keyboard has no keys".into()));
    }
    let mut seen = HashSet::new();
    for (_, keys) in &layout.rows {
        for k in keys {
            check_positive("key width", k.width)?;
            if !seen.insert(k.cap) {
                return Err(match k.cap {
                    KeyCap::Char(c) => SceneError::DuplicateKey(c),
                    KeyCap::Space => SceneError::DuplicateKey(' '),
                    KeyCap::Backspace => SceneError::DuplicateKey('\u{8}'),
                    KeyCap::Done => SceneError::DuplicateKey('\n'),
                });
            }
        }
    }
    for (cap, name) in [
        (KeyCap::Space, "space"),
        (KeyCap::Backspace, "backspace"),
        (KeyCap::Done, "done"),
    ] {
        if !seen.contains(&cap) {
            return Err(SceneError::MissingKey(name));
        }
    }

    let mut scene = Scene::new();
    let group = scene.add_child(NodeId::ROOT, NodeSpec::group(layout.attachment))?;
    for (cap, yaw, pitch, width) in layout.key_geometry() {
        scene.add_child(
            group,
            panel(
                yaw,
                pitch,
                width,
                layout.key_height_deg,
                layout.radius_m,
                layout.attachment,
                UiRole::Key { key: cap },
                ColorId::Neutral,
            ),
        )?;
    }
    for (slot, pitch, color) in [
        (
            TextSlot::Presented,
            layout.presented_pitch_deg,
            ColorId::Green,
        ),
        (
            TextSlot::Transcription,
            layout.transcription_pitch_deg,
            ColorId::Red,
        ),
    ] {
        scene.add_child(
            group,
            NodeSpec {
                local: placed(0.0, pitch, layout.radius_m),
                mesh: None,
                attachment: layout.attachment,
                ui_role: Some(UiRole::Text { slot }),
                color,
            },
        )?;
    }
    scene.update_world_transforms(Default::default());
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Camera;

    fn planes(scene: &Scene) -> Vec<&crate::scene::SceneNode> {
        scene
            .nodes_with_role(|r| matches!(r, UiRole::Plane { .. }))
            .collect()
    }

    #[test]
    fn binary_scene_has_two_disjoint_planes() {
        let s = build_binary_scene(&BinaryLayout::default(), Attachment::WorldFixed).unwrap();
        let p = planes(&s);
        assert_eq!(p.len(), 2);
        assert!(!p[0].bounds().intersects(p[1].bounds()));
        let colors: HashSet<_> = p.iter().map(|n| n.color).collect();
        assert_eq!(colors, HashSet::from([ColorId::Red, ColorId::Blue]));
    }

    #[test]
    fn view_fixed_planes_follow_the_head() {
        let mut s = build_binary_scene(&BinaryLayout::default(), Attachment::ViewFixed).unwrap();
        let before: Vec<(f64, f64)> = planes(&s).iter().map(|n| n.world_angles()).collect();
        s.update_world_transforms(Camera::new(30.0, 0.0));
        let after: Vec<(f64, f64)> = planes(&s).iter().map(|n| n.world_angles()).collect();
        for (b, a) in before.iter().zip(&after) {
            assert!((a.0 - b.0 - 30.0).abs() < 1e-9);
            assert!((a.1 - b.1).abs() < 1e-9);
        }
    }

    #[test]
    fn world_fixed_planes_ignore_the_head() {
        let mut s = build_binary_scene(&BinaryLayout::default(), Attachment::WorldFixed).unwrap();
        let before: Vec<_> = planes(&s).iter().map(|n| *n.bounds()).collect();
        s.update_world_transforms(Camera::new(30.0, -12.0));
        let after: Vec<_> = planes(&s).iter().map(|n| *n.bounds()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn default_menu_is_fifteen_buttons_centered_on_seven() {
        let layout = MenuLayout::default();
        let s = build_menu_scene(&layout).unwrap();
        let buttons: Vec<_> = s
            .nodes_with_role(|r| matches!(r, UiRole::Button { .. }))
            .collect();
        assert_eq!(buttons.len(), 15);
        assert_eq!(layout.center_label(), 7);
        let seven = s.find_role(UiRole::Button { label: 7 }).unwrap();
        let (yaw, pitch) = s.node(seven).unwrap().world_angles();
        assert!(yaw.abs() < 1e-9 && pitch.abs() < 1e-9);
    }

    #[test]
    fn single_button_menu_is_straight_ahead() {
        let layout = MenuLayout {
            rows: 1,
            cols: 1,
            ..MenuLayout::default()
        };
        let s = build_menu_scene(&layout).unwrap();
        let b = s.find_role(UiRole::Button { label: 0 }).unwrap();
        let (yaw, pitch) = s.node(b).unwrap().world_angles();
        assert!(yaw.abs() < 1e-12 && pitch.abs() < 1e-12);
    }

    #[test]
    fn menu_rejects_empty_dimensions() {
        for (r, c) in [(0, 5), (3, 0)] {
            let layout = MenuLayout {
                rows: r,
                cols: c,
                ..MenuLayout::default()
            };
            assert!(matches!(
                build_menu_scene(&layout),
                Err(SceneError::InvalidDimensions(_))
            ));
        }
        let layout = MenuLayout {
            button_width_deg: -1.0,
            ..MenuLayout::default()
        };
        assert!(build_menu_scene(&layout).is_err());
    }

    #[test]
    fn menu_buttons_pairwise_disjoint() {
        for layout in [
            MenuLayout::default(),
            MenuLayout {
                rows: 4,
                cols: 6,
                gap_deg: 0.5,
                ..MenuLayout::default()
            },
        ] {
            let s = build_menu_scene(&layout).unwrap();
            let b: Vec<_> = s
                .nodes_with_role(|r| matches!(r, UiRole::Button { .. }))
                .collect();
            for i in 0..b.len() {
                for j in i + 1..b.len() {
                    assert!(
                        !b[i].bounds().intersects(b[j].bounds()),
                        "buttons {i} and {j} overlap"
                    );
                }
            }
        }
    }

    #[test]
    fn menu_centers_form_regular_grid() {
        let layout = MenuLayout::default();
        let s = build_menu_scene(&layout).unwrap();
        let step = layout.button_width_deg + layout.gap_deg;
        for label in 0..layout.button_count() {
            if label % layout.cols == layout.cols - 1 {
                continue;
            }
            let a = s.find_role(UiRole::Button { label }).unwrap();
            let b = s.find_role(UiRole::Button { label: label + 1 }).unwrap();
            let (ya, _) = s.node(a).unwrap().world_angles();
            let (yb, _) = s.node(b).unwrap().world_angles();
            assert!((yb - ya - step).abs() < 1e-9);
        }
    }

    #[test]
    fn qwerty_keyboard_has_expected_keys() {
        let s = build_keyboard_scene(&KeyboardLayout::qwerty()).unwrap();
        let keys: Vec<KeyCap> = s
            .nodes()
            .iter()
            .filter_map(|n| match n.ui_role {
                Some(UiRole::Key { key }) => Some(key),
                _ => None,
            })
            .collect();
        let letters = keys.iter().filter(|k| matches!(k, KeyCap::Char(_))).count();
        assert_eq!(letters, 26);
        for cap in [KeyCap::Space, KeyCap::Backspace, KeyCap::Done] {
            assert!(keys.contains(&cap));
        }
        let presented = s
            .find_role(UiRole::Text {
                slot: TextSlot::Presented,
            })
            .unwrap();
        let transcription = s
            .find_role(UiRole::Text {
                slot: TextSlot::Transcription,
            })
            .unwrap();
        assert_ne!(presented, transcription);
    }

    #[test]
    fn q_is_leftmost_on_top_letter_row() {
        let geo = KeyboardLayout::qwerty().key_geometry();
        let (_, q_yaw, q_pitch, _) = geo
            .iter()
            .find(|g| g.0 == KeyCap::Char('q'))
            .copied()
            .unwrap();
        for &(_, yaw, pitch, _) in &geo {
            if (pitch - q_pitch).abs() < 1e-9 {
                assert!(yaw >= q_yaw);
            }
        }
        let max_pitch = geo.iter().map(|g| g.2).fold(f64::MIN, f64::max);
        assert_eq!(q_pitch, max_pitch);
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let mut layout = KeyboardLayout::qwerty();
        layout.rows[1].1.push(KeySpec::char('q'));
        assert_eq!(
            build_keyboard_scene(&layout).unwrap_err(),
            SceneError::DuplicateKey('q')
        );
    }

    #[test]
    fn stress_grid_is_hierarchical() {
        let layout = GridLayout {
            rows: 7,
            cols: 5,
            ..GridLayout::stress()
        };
        let s = build_grid_scene(&layout).unwrap();
        let buttons = s
            .nodes_with_role(|r| matches!(r, UiRole::Button { .. }))
            .count();
        assert_eq!(buttons, 35);
        assert!(s.root().children.len() == 1);
        // no group has more than four children
        assert!(s.nodes().iter().all(|n| n.children.len() <= 4));
    }
}
