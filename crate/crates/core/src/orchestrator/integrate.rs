use std::collections::HashMap;

use thiserror::Error;

use super::outputs::{normalize_name, parse_background, parse_layout_entries, parse_pairs, parse_triples};
use super::{AgentRole, OrchestratorState};
use crate::scene::{disambiguate_names, BoundingBox, Relation, RelationKind, SceneElements, SceneObject};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("no output from the {0}")]
    MissingRequiredAgent(AgentRole),
    #[error("layout entry \"{name}\" names no extracted object")]
    UnmatchedLayoutEntry { name: String },
    #[error("object \"{name}\" has no layout entry")]
    MissingLayoutEntry { name: String },
    #[error("cannot read the output of the {role}: {message}")]
    MalformedOutput { role: AgentRole, message: String },
}

fn required(state: &OrchestratorState, role: AgentRole) -> Result<&str, IntegrationError> {
    state
        .outputs
        .get(&role)
        .map(String::as_str)
        .ok_or(IntegrationError::MissingRequiredAgent(role))
}

fn to_box(role: AgentRole, name: &str, nums: &[f64]) -> Result<BoundingBox, IntegrationError> {
    let malformed = |message: String| IntegrationError::MalformedOutput { role, message };
    let [x, y, w, h, d] = nums else {
        return Err(malformed(format!("the box of \"{name}\" has {} numbers, expected 5", nums.len())));
    };
    let depth = d.round();
    if !(depth >= 0.0 && (d - depth).abs() < 1e-6 && depth <= u32::MAX as f64) {
        return Err(malformed(format!("the depth of \"{name}\" is {d}, expected a non-negative integer")));
    }
    Ok(BoundingBox::new(*x, *y, *w, *h, depth as u32))
}

/// Merges the agent outputs into one scene. Boxes are taken as produced (not
/// clamped) so the execution check sees what the layout agent wrote.
pub fn integrate_results(state: &OrchestratorState) -> Result<SceneElements, IntegrationError> {
    let object_text = required(state, AgentRole::ObjectExtraction)?;
    let background_text = required(state, AgentRole::BackgroundExtraction)?;
    let layout_text = required(state, AgentRole::Layout)?;

    let pairs = parse_pairs(object_text);
    if pairs.is_empty() {
        return Err(IntegrationError::MalformedOutput {
            role: AgentRole::ObjectExtraction,
            message: "no \"object: characteristics\" entries".into(),
        });
    }
    let mut objects: Vec<SceneObject> = pairs
        .into_iter()
        .map(|(name, chars)| SceneObject::new(name, chars, BoundingBox::full_frame(0)))
        .collect();

    if let Some(text) = state.outputs.get(&AgentRole::AestheticsEnhancement) {
        let enhanced: HashMap<String, String> = parse_pairs(text)
            .into_iter()
            .map(|(name, chars)| (normalize_name(&name), chars))
            .collect();
        for obj in &mut objects {
            if let Some(chars) = enhanced.get(&normalize_name(&obj.name)) {
                obj.characteristics = chars.clone();
            }
        }
    }

    let entries = parse_layout_entries(layout_text).map_err(|message| IntegrationError::MalformedOutput {
        role: AgentRole::Layout,
        message,
    })?;
    let mut assigned = vec![false; objects.len()];
    for (name, nums) in &entries {
        let key = normalize_name(name);
        let slot = (0..objects.len())
            .find(|&i| !assigned[i] && normalize_name(&objects[i].name) == key)
            .ok_or_else(|| IntegrationError::UnmatchedLayoutEntry { name: name.clone() })?;
        objects[slot].bbox = to_box(AgentRole::Layout, name, nums)?;
        assigned[slot] = true;
    }
    if let Some(i) = assigned.iter().position(|a| !a) {
        return Err(IntegrationError::MissingLayoutEntry {
            name: objects[i].name.clone(),
        });
    }

    let canonical: HashMap<String, String> = objects
        .iter()
        .rev()
        .map(|o| (normalize_name(&o.name), o.name.clone()))
        .collect();
    let resolve = |name: String| canonical.get(&normalize_name(&name)).cloned().unwrap_or(name);
    let mut relations = Vec::new();
    for (role, kind) in [
        (AgentRole::ActionRelations, RelationKind::Action),
        (AgentRole::SpatialRelations, RelationKind::Spatial),
    ] {
        if let Some(text) = state.outputs.get(&role) {
            for (s, p, o) in parse_triples(text) {
                relations.push(Relation::new(resolve(s), p, resolve(o), kind));
            }
        }
    }

    disambiguate_names(&mut objects);
    Ok(SceneElements {
        complex_prompt: state.prompt.clone(),
        background: parse_background(background_text),
        objects,
        relations,
    })
}
