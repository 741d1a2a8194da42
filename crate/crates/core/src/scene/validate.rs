use std::collections::{BTreeMap, HashSet};
use std::fmt;

use super::SceneElements;

/// One broken invariant of a candidate scene.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoObjects,
    MissingBackground,
    EmptyObjectName { index: usize },
    DuplicateName { name: String },
    BoxOutOfBounds { object: String, bbox: [f64; 4] },
    ZeroAreaBox { object: String },
    DuplicateDepth { depth: u32, objects: Vec<String> },
    DepthOutOfRange { object: String, depth: u32, count: usize },
    MissingDepth { depth: u32 },
    UnknownRelationRef { relation: String, name: String },
    /// The agent outputs could not be assembled into a scene at all.
    Integration { message: String },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::NoObjects => "no-objects",
            Violation::MissingBackground => "missing-background",
            Violation::EmptyObjectName { .. } => "empty-object-name",
            Violation::DuplicateName { .. } => "duplicate-name",
            Violation::BoxOutOfBounds { .. } => "box-out-of-bounds",
            Violation::ZeroAreaBox { .. } => "zero-area-box",
            Violation::DuplicateDepth { .. } => "duplicate-depth",
            Violation::DepthOutOfRange { .. } => "depth-out-of-range",
            Violation::MissingDepth { .. } => "missing-depth",
            Violation::UnknownRelationRef { .. } => "unknown-reference",
            Violation::Integration { .. } => "integration",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoObjects => write!(f, "the scene has no objects"),
            Violation::MissingBackground => write!(f, "the background description is empty"),
            Violation::EmptyObjectName { index } => write!(f, "object #{index} has an empty name"),
            Violation::DuplicateName { name } => write!(f, "object name \"{name}\" appears more than once"),
            Violation::BoxOutOfBounds { object, bbox } => write!(
                f,
                "the bounding box of \"{object}\" [{}, {}, {}, {}] exceeds [0,1]",
                bbox[0], bbox[1], bbox[2], bbox[3]
            ),
            Violation::ZeroAreaBox { object } => write!(f, "the bounding box of \"{object}\" has zero area"),
            Violation::DuplicateDepth { depth, objects } => {
                write!(f, "depth {depth} is shared by {}", objects.join(", "))
            }
            Violation::DepthOutOfRange { object, depth, count } => write!(
                f,
                "\"{object}\" has depth {depth}, but depths must lie in 0..{count}"
            ),
            Violation::MissingDepth { depth } => write!(f, "no object has depth {depth}"),
            Violation::UnknownRelationRef { relation, name } => {
                write!(f, "relation {relation} refers to unknown object \"{name}\"")
            }
            Violation::Integration { message } => write!(f, "agent outputs could not be integrated: {message}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.violations.iter().filter(|v| v.kind() == kind).count()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {v}")?;
        }
        Ok(())
    }
}

/// The execution-environment check over a parsed candidate. Never fails;
/// every broken invariant is reported.
pub fn validate_scene(scene: &SceneElements) -> ValidationReport {
    let mut report = ValidationReport::default();
    if scene.objects.is_empty() {
        report.push(Violation::NoObjects);
    }
    if scene.background.trim().is_empty() {
        report.push(Violation::MissingBackground);
    }
    check_objects(scene, &mut report);
    report
}

/// Like [`validate_scene`] but for a bare layout: zero objects and an empty
/// background are allowed.
pub fn validate_layout(scene: &SceneElements) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_objects(scene, &mut report);
    report
}

fn check_objects(scene: &SceneElements, report: &mut ValidationReport) {
    let mut names = HashSet::new();
    let mut reported_dups = HashSet::new();
    for (index, obj) in scene.objects.iter().enumerate() {
        if obj.name.trim().is_empty() {
            report.push(Violation::EmptyObjectName { index });
        } else if !names.insert(obj.name.as_str()) && reported_dups.insert(obj.name.as_str()) {
            report.push(Violation::DuplicateName { name: obj.name.clone() });
        }
        let b = &obj.bbox;
        if !b.in_bounds() {
            report.push(Violation::BoxOutOfBounds {
                object: obj.name.clone(),
                bbox: [b.x, b.y, b.w, b.h],
            });
        }
        if !b.has_area() {
            report.push(Violation::ZeroAreaBox { object: obj.name.clone() });
        }
    }

    let n = scene.objects.len();
    let mut by_depth: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for obj in &scene.objects {
        if (obj.bbox.depth as usize) >= n {
            report.push(Violation::DepthOutOfRange {
                object: obj.name.clone(),
                depth: obj.bbox.depth,
                count: n,
            });
        }
        by_depth.entry(obj.bbox.depth).or_default().push(obj.name.clone());
    }
    for (&depth, objects) in &by_depth {
        if objects.len() > 1 {
            report.push(Violation::DuplicateDepth {
                depth,
                objects: objects.clone(),
            });
        }
    }
    for depth in 0..n as u32 {
        if !by_depth.contains_key(&depth) {
            report.push(Violation::MissingDepth { depth });
        }
    }

    for rel in &scene.relations {
        for name in [&rel.subject, &rel.object] {
            if !names.contains(name.as_str()) {
                report.push(Violation::UnknownRelationRef {
                    relation: format!("({}, {}, {})", rel.subject, rel.predicate, rel.object),
                    name: name.clone(),
                });
            }
        }
    }
}
