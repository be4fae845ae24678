use serde::{Deserialize, Serialize};

use super::{ColorId, NodeId, Scene, UiRole};

/// One node as seen by renderers and trace tooling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub ui_role: Option<UiRole>,
    pub color: ColorId,
    /// World-space quad corners (counter-clockwise from bottom-left), when
    /// the node carries a quad mesh.
    pub corners: Option<[[f64; 3]; 4]>,
    /// World-space anchor point; useful for mesh-less text nodes.
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSnapshot {
    pub nodes: Vec<NodeSnapshot>,
}

impl SceneSnapshot {
    pub fn from_scene(scene: &Scene) -> SceneSnapshot {
        let nodes = scene
            .nodes()
            .iter()
            .map(|n| {
                let v = n.world_vertices();
                let corners = (v.len() == 4).then(|| {
                    [
                        v[0].to_array(),
                        v[1].to_array(),
                        v[2].to_array(),
                        v[3].to_array(),
                    ]
                });
                NodeSnapshot {
                    id: n.id,
                    parent: n.parent,
                    ui_role: n.ui_role,
                    color: n.color,
                    corners,
                    position: n.world_transform().translation.to_array(),
                }
            })
            .collect();
        SceneSnapshot { nodes }
    }
}
