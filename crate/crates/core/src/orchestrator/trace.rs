use serde::Serialize;
use sha2::{Digest, Sha256};

/// One protocol event. Serialized as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub phase: String,
    pub step: usize,
    /// Call tag (`conductor`, `evaluator`, an agent key, `reflect:<key>`) or
    /// a local stage such as `integrate`.
    pub role: String,
    /// SHA-256 of the system and user messages; empty for local stages.
    pub rendered_prompt_hash: String,
    pub reply: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(&mut self, event: TraceEvent) {
        log::debug!("[{}:{}] {} -> {}", event.phase, event.step, event.role, event.reply);
        self.events.push(event);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    /// Events whose role tag equals `role`.
    pub fn by_role<'a>(&'a self, role: &'a str) -> impl Iterator<Item = &'a TraceEvent> + 'a {
        self.events.iter().filter(move |e| e.role == role)
    }
}

pub fn prompt_hash(system: &str, user: &str) -> String {
    let mut h = Sha256::new();
    h.update(system.as_bytes());
    h.update([0u8]);
    h.update(user.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
