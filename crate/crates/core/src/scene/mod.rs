//! Scene elements produced by parsing a complex prompt: objects with
//! characteristics, a background, relations, and depth-ordered boxes.

mod codec;
mod validate;

pub use codec::{parse_layout, parse_scene, serialize_scene, SceneParseError};
pub use validate::{validate_layout, validate_scene, ValidationReport, Violation};

use std::fmt;

/// Normalized box `[x, y, w, h]` with the top-left corner at `(x, y)`, plus a
/// layer depth (0 is the front-most layer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub depth: u32,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64, depth: u32) -> Self {
        Self { x, y, w, h, depth }
    }

    pub fn full_frame(depth: u32) -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0, depth)
    }

    /// Clamps the box into the unit square. Width and height shrink so the
    /// box never extends past the right or bottom edge.
    pub fn clamped(&self) -> Self {
        if self.in_bounds() {
            return *self;
        }
        let unit = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        let x = unit(self.x);
        let y = unit(self.y);
        let w = unit(self.w).min(1.0 - x);
        let h = unit(self.h).min(1.0 - y);
        Self::new(x, y, w, h, self.depth)
    }

    pub fn in_bounds(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite())
            && self.x >= 0.0
            && self.y >= 0.0
            && self.x + self.w <= 1.0
            && self.y + self.h <= 1.0
    }

    pub fn has_area(&self) -> bool {
        self.w > 0.0 && self.h > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub characteristics: String,
    pub bbox: BoundingBox,
}

impl SceneObject {
    pub fn new(name: impl Into<String>, characteristics: impl Into<String>, bbox: BoundingBox) -> Self {
        Self {
            name: name.into(),
            characteristics: characteristics.into(),
            bbox,
        }
    }

    /// Prompt used to denoise this object's region on its own.
    pub fn prompt(&self) -> String {
        let c = self.characteristics.trim();
        if c.is_empty() {
            self.name.clone()
        } else {
            format!("{}, {}", self.name, c)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Action,
    Spatial,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationKind::Action => "action",
            RelationKind::Spatial => "spatial",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub kind: RelationKind,
}

impl Relation {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
        kind: RelationKind,
    ) -> Self {
        Self {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneElements {
    pub complex_prompt: String,
    pub background: String,
    pub objects: Vec<SceneObject>,
    pub relations: Vec<Relation>,
}

impl SceneElements {
    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn relations_of(&self, kind: RelationKind) -> impl Iterator<Item = &Relation> {
        self.relations.iter().filter(move |r| r.kind == kind)
    }
}

/// Renames repeated object names to `name#2`, `name#3`, ... in order of
/// appearance. The first occurrence keeps its name.
pub fn disambiguate_names(objects: &mut [SceneObject]) {
    let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let taken: std::collections::HashSet<String> = objects.iter().map(|o| o.name.clone()).collect();
    for obj in objects.iter_mut() {
        let count = seen.entry(obj.name.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            let mut k = *count;
            let mut candidate = format!("{}#{}", obj.name, k);
            while taken.contains(&candidate) {
                k += 1;
                candidate = format!("{}#{}", obj.name, k);
            }
            obj.name = candidate;
        }
    }
}
