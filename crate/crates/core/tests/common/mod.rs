#![allow(dead_code)]

pub mod oracle;
pub mod e2e;
pub mod protocol;
pub mod stub;

use std::path::PathBuf;

use scenecomp::orchestrator::MockScripted;

pub const HAPPY_PROMPT: &str = "A red apple on a wooden table, next to a blue ceramic mug";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn mock(name: &str) -> MockScripted {
    MockScripted::from_file(&fixture(name)).expect("fixture loads")
}
