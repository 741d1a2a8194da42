use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::PipelineError;
use crate::fusion::FusionConfig;
use crate::latent::Shape;
use crate::orchestrator::OrchestratorConfig;

/// Which chat endpoint drives scene parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum LlmSpec {
    /// Scripted replies from a fixture file.
    Mock(PathBuf),
    /// OpenAI-compatible chat-completions endpoint.
    Http(String),
}

impl FromStr for LlmSpec {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("mock", path)) if !path.is_empty() => Ok(LlmSpec::Mock(PathBuf::from(path))),
            Some(("http", rest)) if !rest.is_empty() => {
                // accept both http:URL and a bare http://... URL
                let url = if rest.starts_with("//") { s.to_string() } else { rest.to_string() };
                Ok(LlmSpec::Http(url))
            }
            Some(("https", rest)) if rest.starts_with("//") => Ok(LlmSpec::Http(s.to_string())),
            _ => Err(PipelineError::Config(format!(
                "LLM backend must be mock:PATH or http:URL, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for LlmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LlmSpec::Mock(p) => write!(f, "mock:{}", p.display()),
            LlmSpec::Http(url) => write!(f, "http:{url}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DenoiserSpec {
    Toy,
    Remote(String),
}

impl FromStr for DenoiserSpec {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "toy" => Ok(DenoiserSpec::Toy),
            Some(("remote", url)) if !url.is_empty() => Ok(DenoiserSpec::Remote(url.to_string())),
            _ => Err(PipelineError::Config(format!(
                "denoiser must be toy or remote:URL, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for DenoiserSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenoiserSpec::Toy => f.write_str("toy"),
            DenoiserSpec::Remote(url) => write!(f, "remote:{url}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub steps: u32,
    pub guidance_scale: f64,
    pub grid: Shape,
    pub seed: u64,
    pub fusion: FusionConfig,
    pub orchestrator: OrchestratorConfig,
    pub llm: LlmSpec,
    /// Model name sent to an HTTP chat endpoint.
    pub llm_model: String,
    pub denoiser: DenoiserSpec,
    /// Upper bound on branch steps running at once.
    pub max_concurrency: usize,
    /// Keep the fused latent of every timestep.
    pub dump_steps: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            steps: 20,
            guidance_scale: 7.0,
            grid: Shape::new(4, 64, 64),
            seed: 0,
            fusion: FusionConfig::default(),
            orchestrator: OrchestratorConfig::default(),
            llm: LlmSpec::Http("https://api.openai.com/v1".into()),
            llm_model: "gpt-4o-mini".into(),
            denoiser: DenoiserSpec::Toy,
            max_concurrency: 4,
            dump_steps: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.steps < 1 {
            return Err(PipelineError::Config("steps must be >= 1".into()));
        }
        if !(self.guidance_scale.is_finite() && self.guidance_scale > 0.0) {
            return Err(PipelineError::Config(format!(
                "guidance scale must be > 0, got {}",
                self.guidance_scale
            )));
        }
        if self.grid.channels == 0 || self.grid.height == 0 || self.grid.width == 0 {
            return Err(PipelineError::Config(format!("grid dimensions must be >= 1, got {}", self.grid)));
        }
        if self.max_concurrency == 0 {
            return Err(PipelineError::Config("max_concurrency must be >= 1".into()));
        }
        if self.orchestrator.max_steps == 0 {
            return Err(PipelineError::Config("orchestrator.max_steps must be >= 1".into()));
        }
        self.fusion.validate().map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Overwrites every field the file sets.
    pub fn apply_file(&mut self, file: ConfigFile) -> Result<(), PipelineError> {
        if let Some(v) = file.steps {
            self.steps = v;
        }
        if let Some(v) = file.guidance_scale {
            self.guidance_scale = v;
        }
        if let Some([c, h, w]) = file.grid {
            self.grid = Shape::new(c, h, w);
        }
        if let Some(v) = file.seed {
            self.seed = v;
        }
        if let Some(v) = file.llm {
            self.llm = v.parse()?;
        }
        if let Some(v) = file.llm_model {
            self.llm_model = v;
        }
        if let Some(v) = file.denoiser {
            self.denoiser = v.parse()?;
        }
        if let Some(v) = file.max_concurrency {
            self.max_concurrency = v;
        }
        if let Some(v) = file.dump_steps {
            self.dump_steps = v;
        }
        if let Some(v) = file.fusion {
            self.fusion = v;
        }
        if let Some(v) = file.orchestrator {
            self.orchestrator = v;
        }
        Ok(())
    }
}

/// TOML configuration file. Every key is optional; `[fusion]` and
/// `[orchestrator]` tables fall back to defaults for keys they omit.
///
/// ```toml
/// steps = 20
/// guidance_scale = 7.0
/// grid = [4, 64, 64]
/// seed = 1234
/// llm = "mock:fixtures/happy_path.json"   # or "http:https://api.openai.com/v1"
/// llm_model = "gpt-4o-mini"
/// denoiser = "toy"                        # or "remote:http://127.0.0.1:8700"
/// max_concurrency = 4
/// dump_steps = false
///
/// [fusion]
/// mu = 0.8
///
/// [orchestrator]
/// max_cycles = 3
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub steps: Option<u32>,
    pub guidance_scale: Option<f64>,
    pub grid: Option<[usize; 3]>,
    pub seed: Option<u64>,
    pub llm: Option<String>,
    pub llm_model: Option<String>,
    pub denoiser: Option<String>,
    pub max_concurrency: Option<usize>,
    pub dump_steps: Option<bool>,
    pub fusion: Option<FusionConfig>,
    pub orchestrator: Option<OrchestratorConfig>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Config(format!(
            "cannot read config file {}: {e}",
            path.display()
        )))?;
        Self::parse(&text)
    }
}
