//! Canonical JSON form of [`SceneElements`].
//!
//! ```json
//! {"complex_prompt": "...", "background": "...",
//!  "objects": [{"name": "...", "characteristics": "...", "box": [x, y, w, h], "depth": 0}],
//!  "action_relations": [["s", "p", "o"]], "spatial_relations": [["s", "p", "o"]]}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::validate::{validate_layout, validate_scene, ValidationReport};
use super::{disambiguate_names, BoundingBox, Relation, RelationKind, SceneElements, SceneObject};
use crate::jsonfix;

#[derive(Debug, Error)]
pub enum SceneParseError {
    #[error("malformed scene JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("scene violates its schema:\n{0}")]
    Schema(ValidationReport),
}

#[derive(Debug, Serialize, Deserialize)]
struct SceneDoc {
    #[serde(default)]
    complex_prompt: String,
    #[serde(default)]
    background: String,
    #[serde(default)]
    objects: Vec<ObjectDoc>,
    #[serde(default)]
    action_relations: Vec<[String; 3]>,
    #[serde(default)]
    spatial_relations: Vec<[String; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectDoc {
    name: String,
    #[serde(default)]
    characteristics: String,
    #[serde(rename = "box")]
    bbox: [f64; 4],
    depth: u32,
}

impl From<&SceneElements> for SceneDoc {
    fn from(s: &SceneElements) -> Self {
        let triples = |kind| {
            s.relations_of(kind)
                .map(|r| [r.subject.clone(), r.predicate.clone(), r.object.clone()])
                .collect()
        };
        SceneDoc {
            complex_prompt: s.complex_prompt.clone(),
            background: s.background.clone(),
            objects: s
                .objects
                .iter()
                .map(|o| ObjectDoc {
                    name: o.name.clone(),
                    characteristics: o.characteristics.clone(),
                    bbox: [o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h],
                    depth: o.bbox.depth,
                })
                .collect(),
            action_relations: triples(RelationKind::Action),
            spatial_relations: triples(RelationKind::Spatial),
        }
    }
}

impl SceneDoc {
    fn into_scene(self) -> SceneElements {
        let mut objects: Vec<SceneObject> = self
            .objects
            .into_iter()
            .map(|o| {
                let [x, y, w, h] = o.bbox;
                SceneObject::new(o.name, o.characteristics, BoundingBox::new(x, y, w, h, o.depth).clamped())
            })
            .collect();
        disambiguate_names(&mut objects);
        let relations = self
            .action_relations
            .into_iter()
            .map(|t| (t, RelationKind::Action))
            .chain(self.spatial_relations.into_iter().map(|t| (t, RelationKind::Spatial)))
            .map(|([s, p, o], kind)| Relation::new(s, p, o, kind))
            .collect();
        SceneElements {
            complex_prompt: self.complex_prompt,
            background: self.background,
            objects,
            relations,
        }
    }
}

/// Canonical pretty-printed JSON bytes for `scene`.
pub fn serialize_scene(scene: &SceneElements) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&SceneDoc::from(scene)).expect("scene documents always serialize");
    out.push(b'\n');
    out
}

/// Parses a full scene. Boxes are clamped into the unit square and repeated
/// object names are disambiguated before validation.
pub fn parse_scene(bytes: &[u8]) -> Result<SceneElements, SceneParseError> {
    let scene = decode(bytes)?;
    let report = validate_scene(&scene);
    if report.is_empty() {
        Ok(scene)
    } else {
        Err(SceneParseError::Schema(report))
    }
}

/// Parses a layout file for fusion. Same schema as [`parse_scene`], but zero
/// objects and an empty background are accepted.
pub fn parse_layout(bytes: &[u8]) -> Result<SceneElements, SceneParseError> {
    let scene = decode(bytes)?;
    let report = validate_layout(&scene);
    if report.is_empty() {
        Ok(scene)
    } else {
        Err(SceneParseError::Schema(report))
    }
}

fn decode(bytes: &[u8]) -> Result<SceneElements, SceneParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let prefix = &bytes[..e.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = prefix.len() - prefix.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
        SceneParseError::Syntax {
            line,
            column,
            message: format!("invalid UTF-8 at byte {}", e.valid_up_to()),
        }
    })?;
    let doc: SceneDoc = jsonfix::decode_lenient(text).map_err(|e| SceneParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(doc.into_scene())
}
