use std::fmt;

/// The six specialist agents of the scene parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentRole {
    ObjectExtraction,
    BackgroundExtraction,
    ActionRelations,
    SpatialRelations,
    Layout,
    AestheticsEnhancement,
}

impl AgentRole {
    pub const ALL: [AgentRole; 6] = [
        AgentRole::ObjectExtraction,
        AgentRole::BackgroundExtraction,
        AgentRole::ActionRelations,
        AgentRole::SpatialRelations,
        AgentRole::Layout,
        AgentRole::AestheticsEnhancement,
    ];

    /// Human-readable name, as shown to the conductor.
    pub fn name(self) -> &'static str {
        match self {
            AgentRole::ObjectExtraction => "object extraction agent",
            AgentRole::BackgroundExtraction => "background extraction agent",
            AgentRole::ActionRelations => "action relations extraction agent",
            AgentRole::SpatialRelations => "spatial relations extraction agent",
            AgentRole::Layout => "layout agent",
            AgentRole::AestheticsEnhancement => "aesthetics enhancement agent",
        }
    }

    /// Stable identifier used in fixtures and traces.
    pub fn key(self) -> &'static str {
        match self {
            AgentRole::ObjectExtraction => "object_extraction",
            AgentRole::BackgroundExtraction => "background_extraction",
            AgentRole::ActionRelations => "action_relations",
            AgentRole::SpatialRelations => "spatial_relations",
            AgentRole::Layout => "layout",
            AgentRole::AestheticsEnhancement => "aesthetics_enhancement",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.key() == key)
    }

    pub fn capability(self) -> &'static str {
        match self {
            AgentRole::ObjectExtraction => "extracts the objects and their characteristics from the text prompt",
            AgentRole::BackgroundExtraction => {
                "extracts an object-independent description of the background scene"
            }
            AgentRole::ActionRelations => "captures action relations between objects, such as holding or sitting",
            AgentRole::SpatialRelations => "captures spatial relations between objects, such as left of or beside",
            AgentRole::Layout => "lays out the scene by generating a bounding box and layer depth for every object",
            AgentRole::AestheticsEnhancement => {
                "refines the object characteristics to improve the aesthetics of the image"
            }
        }
    }

    /// Lowercase phrases that identify this role in free text, longest first.
    pub(crate) fn aliases(self) -> [&'static str; 4] {
        match self {
            AgentRole::ObjectExtraction => ["object extraction agent", "object extraction", "object_extraction", "object"],
            AgentRole::BackgroundExtraction => [
                "background extraction agent",
                "background extraction",
                "background_extraction",
                "background",
            ],
            AgentRole::ActionRelations => [
                "action relations extraction agent",
                "action relation extraction",
                "action_relations",
                "action",
            ],
            AgentRole::SpatialRelations => [
                "spatial relations extraction agent",
                "spatial relation extraction",
                "spatial_relations",
                "spatial",
            ],
            AgentRole::Layout => ["layout agent", "layout", "layout", "layout"],
            AgentRole::AestheticsEnhancement => [
                "aesthetics enhancement agent",
                "aesthetic enhancement",
                "aesthetics_enhancement",
                "aesthetic",
            ],
        }
    }

    pub fn system_template(self) -> &'static str {
        match self {
            AgentRole::ObjectExtraction => OBJECT_SYSTEM,
            AgentRole::BackgroundExtraction => BACKGROUND_SYSTEM,
            AgentRole::ActionRelations => ACTION_SYSTEM,
            AgentRole::SpatialRelations => SPATIAL_SYSTEM,
            AgentRole::Layout => LAYOUT_SYSTEM,
            AgentRole::AestheticsEnhancement => AESTHETICS_SYSTEM,
        }
    }

    pub fn user_template(self) -> &'static str {
        match self {
            AgentRole::ObjectExtraction => OBJECT_USER,
            AgentRole::BackgroundExtraction => BACKGROUND_USER,
            AgentRole::ActionRelations => ACTION_USER,
            AgentRole::SpatialRelations => SPATIAL_USER,
            AgentRole::Layout => LAYOUT_USER,
            AgentRole::AestheticsEnhancement => AESTHETICS_USER,
        }
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Picks the candidate whose alias occurs in `text` with the longest match.
/// Equal-length matches go to the alias that appears first.
pub fn match_role(text: &str, candidates: &[AgentRole]) -> Option<AgentRole> {
    let lower = text.to_lowercase();
    candidates
        .iter()
        .filter_map(|&role| {
            role.aliases()
                .iter()
                .filter_map(|alias| lower.find(alias).map(|pos| (alias.len(), pos)))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
                .map(|(len, pos)| (len, pos, role))
        })
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|(_, _, role)| role)
}

const OBJECT_SYSTEM: &str = "As an object extraction agent, you extract key entities and their corresponding \
characteristics from the text input prompt.
Extract multiple object and characteristic pairs if multiple characteristics of an entity describe different \
parts of a person, such as the head, clothes/body, and underwear.
To ensure numeric accuracy, objects with the same class name (e.g., five apples) will be separately assigned to \
different regions.
The output format is {object_1: characteristic_1, object_2: characteristic_2, ..., object_n: characteristic_n}";

const OBJECT_USER: &str = "The input prompt is described as: {input prompt}.
You are supposed to refer to the output of other agents: {outputs}.
Please output the extracted objects and their characteristics in the text prompt.";

const BACKGROUND_SYSTEM: &str = "As a background extraction agent, your task is to extract the background from this \
complex prompt. The extracted background is required not to contain any object and its characteristics, but only a \
description of the scene as a whole.";

const BACKGROUND_USER: &str = "The input prompt is described as: {input prompt}.
The outputs given by other agents are as follows: {outputs}, please refer to them carefully.
Please extract and output the background in the text prompt.";

const ACTION_SYSTEM: &str = "As an action relation extraction agent, your task is to extract the action relations \
between objects in the scene, such as holding, sitting, and so on, to fully extract the spatial information of the \
scene.
The output format is {(object_1, action relation_1, object_2), ..., (object_2, action relation_2, object_n)}";

const ACTION_USER: &str = "The input prompt is described as: {input prompt}.
The outputs given by other agents are as follows: {outputs}.
Please extract and output the action relations between objects in the text prompt.";

const SPATIAL_SYSTEM: &str = "As a spatial relation extraction agent, your task is to extract the spatial relations \
between objects in the scene, such as \"left\" and \"beside\", to fully capture the spatial information of the scene.
The output format is {(object_1, spatial relation_1, object_2), ..., (object_2, spatial relation_2, object_n)}";

const SPATIAL_USER: &str = "The input prompt is described as: {input prompt}.
You should refer to the output of other agents: {outputs}.
Please extract and output the spatial relations between objects in the text prompt.";

const LAYOUT_SYSTEM: &str = "You are a layout agent, and your task is to generate the bounding boxes for the \
objects. The following rules must be strictly followed during generation. A layout denotes a set of \
\"object: bounding box\" items. \"object\" means any object name, which starts the object name with \"a\" or \"an\" \
if possible. \"bounding box\" is formulated as [x, y, w, h, d], where \"x, y\" denotes the top left coordinate of \
the bounding box, \"w\" denotes the width, \"h\" denotes the height, and \"d\" indicates the order of the object's \
front and back position in the image, starting from 0, the smaller d indicates the object is more forward. The \
top-left corner has coordinates [0, 0]. The bottom-right corner has coordinates [1, 1].
The output format: \"{object_1: bounding box_1, object_2: bounding box_2, ..., object_n: bounding box_n}\"";

const LAYOUT_USER: &str = "The input prompt is described as: {input prompt}.
You should refer to the output of other agents: {outputs}.
Please generate and layout according to the task description and rules.";

const AESTHETICS_SYSTEM: &str = "As an aesthetic enhancement agent, you serve as an aesthetic guide, refining the \
descriptions of an object's characteristics to amplify its artistic and aesthetic appeal. This involves thoughtful \
consideration of composition, color balance, texture, and other key elements contributing to the image's overall \
impact.
The output format is {object_1: characteristic_1, object_2: characteristic_2, ..., object_n: characteristic_n}";

const AESTHETICS_USER: &str = "The input prompt is: {input prompt}.
You should refer to the output of other agents: {outputs}.
Please generate a glorified characterization as required.";
