//! Chat-completion backends.
//!
//! Every call carries a `tag` naming the caller: `conductor`, `evaluator`,
//! an agent key such as `layout`, or `reflect:<agent key>` during backward
//! feedback. Live endpoints ignore it; [`MockScripted`] uses it to look up
//! replies.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub tag: &'a str,
    pub system: &'a str,
    pub user: &'a str,
}

#[derive(Debug, Error)]
pub enum ChatError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed completion response: {0}")]
    Malformed(String),
    #[error("no scripted reply for {key}")]
    MissingFixture { key: String },
}

impl ChatError {
    pub fn is_retryable(&self) -> bool {
        match self {
            ChatError::Transport(_) => true,
            ChatError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// A chat-completion endpoint. Implementations must tolerate concurrent
/// calls from independent orchestrations.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &ChatRequest<'_>) -> Result<String, ChatError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for &T {
    fn complete(&self, req: &ChatRequest<'_>) -> Result<String, ChatError> {
        (**self).complete(req)
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for Box<T> {
    fn complete(&self, req: &ChatRequest<'_>) -> Result<String, ChatError> {
        (**self).complete(req)
    }
}

pub const FIXTURE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("fixture is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported fixture version {0} (expected {FIXTURE_VERSION})")]
    Version(u32),
    #[error("bad fixture key {0:?}: expected \"<tag>:<turn>\" or \"<tag>:*\"")]
    Key(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureDoc {
    version: u32,
    #[serde(default)]
    description: Option<String>,
    replies: HashMap<String, String>,
}

/// Replays scripted replies keyed by `"<tag>:<turn>"`, where `turn` counts
/// earlier calls with the same tag (from 0). A `"<tag>:*"` entry answers any
/// turn without an exact entry.
///
/// Fixture file (version 1):
///
/// ```json
/// {"version": 1,
///  "description": "optional",
///  "replies": {"conductor:0": "object extraction agent", "layout:*": "{...}"}}
/// ```
#[derive(Debug)]
pub struct MockScripted {
    replies: HashMap<String, String>,
    turns: Mutex<HashMap<String, usize>>,
    pub description: Option<String>,
}

impl MockScripted {
    pub fn new<K: Into<String>, V: Into<String>>(replies: impl IntoIterator<Item = (K, V)>) -> Self {
        Self {
            replies: replies.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            turns: Mutex::new(HashMap::new()),
            description: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        let doc: FixtureDoc = serde_json::from_str(text)?;
        if doc.version != FIXTURE_VERSION {
            return Err(FixtureError::Version(doc.version));
        }
        for key in doc.replies.keys() {
            let ok = key
                .rsplit_once(':')
                .is_some_and(|(tag, turn)| !tag.is_empty() && (turn == "*" || turn.parse::<usize>().is_ok()));
            if !ok {
                return Err(FixtureError::Key(key.clone()));
            }
        }
        let mut mock = Self::new(doc.replies);
        mock.description = doc.description;
        Ok(mock)
    }

    pub fn from_file(path: &Path) -> Result<Self, FixtureError> {
        let text = std::fs::read_to_string(path).map_err(|source| FixtureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Number of calls seen so far for `tag`.
    pub fn turns(&self, tag: &str) -> usize {
        self.turns.lock().unwrap().get(tag).copied().unwrap_or(0)
    }
}

impl ChatBackend for MockScripted {
    fn complete(&self, req: &ChatRequest<'_>) -> Result<String, ChatError> {
        let turn = {
            let mut turns = self.turns.lock().unwrap();
            let t = turns.entry(req.tag.to_string()).or_insert(0);
            let turn = *t;
            *t += 1;
            turn
        };
        let key = format!("{}:{}", req.tag, turn);
        self.replies
            .get(&key)
            .or_else(|| self.replies.get(&format!("{}:*", req.tag)))
            .cloned()
            .ok_or(ChatError::MissingFixture { key })
    }
}
