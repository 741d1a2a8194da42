//! End-to-end runs: parse the prompt, then denoise the complex, object and
//! background prompts from one shared latent and composite them at every
//! timestep.

mod artifacts;
mod config;

pub use artifacts::{PartialRun, RunArtifacts};
pub use config::{ConfigFile, DenoiserSpec, LlmSpec, PipelineConfig};

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::denoiser::{DenoiseError, DenoiseRequest, DenoiserBackend, RemoteConfig, RemoteDenoiser, ToyDenoiser};
use crate::fusion::{hcd_step, FusionConfig, FusionError};
use crate::latent::{FormatError, LatentGrid};
use crate::orchestrator::{
    orchestrate, ChatBackend, ChatError, HttpChatClient, HttpChatConfig, MockScripted, Orchestration,
    OrchestrationFailure, OrchestratorError,
};
use crate::rng::{initial_latent, text_seed};
use crate::scene::{parse_layout, SceneElements, SceneParseError};

/// Process exit codes of the command-line tool.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const BACKEND: i32 = 3;
    pub const CONFIG: i32 = 4;
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("scene parsing failed: {0}")]
    Orchestration(#[source] Box<OrchestrationFailure>),
    #[error("denoising {branch} at timestep {timestep} failed: {source}")]
    Denoise {
        branch: String,
        timestep: u32,
        #[source]
        source: DenoiseError,
    },
    #[error("fusion failed: {0}")]
    Fusion(#[from] FusionError),
    #[error("{0}")]
    Format(#[from] FormatError),
    #[error("layout file {path}: {source}")]
    Layout {
        path: String,
        #[source]
        source: SceneParseError,
    },
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Io { .. } => exit_code::CONFIG,
            PipelineError::Orchestration(f) => match f.error {
                OrchestratorError::Backend { .. } => exit_code::BACKEND,
                _ => exit_code::VALIDATION,
            },
            PipelineError::Denoise { source, .. } => match source {
                DenoiseError::InvalidRequest(_) => exit_code::CONFIG,
                _ => exit_code::BACKEND,
            },
            PipelineError::Fusion(FusionError::Config(_)) => exit_code::CONFIG,
            PipelineError::Fusion(_)
            | PipelineError::Format(_)
            | PipelineError::Layout { .. }
            | PipelineError::Input(_) => exit_code::VALIDATION,
        }
    }
}

/// A failed run, with whatever was produced before the failure.
#[derive(Debug)]
pub struct GenerateFailure {
    pub error: PipelineError,
    pub partial: PartialRun,
}

pub fn build_chat_backend(cfg: &PipelineConfig) -> Result<Box<dyn ChatBackend>, PipelineError> {
    match &cfg.llm {
        LlmSpec::Mock(path) => Ok(Box::new(
            MockScripted::from_file(path).map_err(|e| PipelineError::Config(e.to_string()))?,
        )),
        LlmSpec::Http(url) => {
            let mut http = HttpChatConfig::new(url.clone()).with_env_key();
            http.model = cfg.llm_model.clone();
            let client = HttpChatClient::new(http).map_err(|e: ChatError| PipelineError::Config(e.to_string()))?;
            Ok(Box::new(client))
        }
    }
}

pub fn build_denoiser(cfg: &PipelineConfig) -> Result<Box<dyn DenoiserBackend>, PipelineError> {
    match &cfg.denoiser {
        DenoiserSpec::Toy => Ok(Box::new(ToyDenoiser)),
        DenoiserSpec::Remote(url) => Ok(Box::new(
            RemoteDenoiser::new(RemoteConfig::new(url.clone())).map_err(|e| PipelineError::Config(e.to_string()))?,
        )),
    }
}

/// Parses the prompt into a scene.
pub fn parse_only(prompt: &str, cfg: &PipelineConfig, chat: &dyn ChatBackend) -> Result<Orchestration, PipelineError> {
    orchestrate(prompt, chat, &cfg.orchestrator).map_err(|f| PipelineError::Orchestration(Box::new(f)))
}

/// One denoising branch: a name for logs and errors, and its prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub name: String,
    pub prompt: String,
}

/// Complex prompt first, then each object, then the background.
pub fn branches(scene: &SceneElements) -> Vec<Branch> {
    let mut out = vec![Branch {
        name: "complex".into(),
        prompt: scene.complex_prompt.clone(),
    }];
    out.extend(scene.objects.iter().map(|o| Branch {
        name: format!("object:{}", o.name),
        prompt: o.prompt(),
    }));
    out.push(Branch {
        name: "background".into(),
        prompt: scene.background.clone(),
    });
    out
}

/// Steps every branch from the shared latent `z`, at most `limit` at a
/// time. Results come back in branch order.
fn step_branches(
    denoiser: &dyn DenoiserBackend,
    branches: &[Branch],
    sessions: &[String],
    z: &LatentGrid,
    timestep: u32,
    cfg: &PipelineConfig,
) -> Result<Vec<LatentGrid>, PipelineError> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<LatentGrid, DenoiseError>>>> =
        Mutex::new((0..branches.len()).map(|_| None).collect());
    let workers = cfg.max_concurrency.min(branches.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= branches.len() {
                    break;
                }
                let req = DenoiseRequest {
                    session_id: sessions[i].clone(),
                    prompt: branches[i].prompt.clone(),
                    latent: z.clone(),
                    timestep,
                    total_steps: cfg.steps,
                    guidance_scale: cfg.guidance_scale,
                };
                let result = denoiser.step(&req);
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .zip(branches)
        .map(|(slot, branch)| {
            slot.expect("every branch is stepped").map_err(|source| PipelineError::Denoise {
                branch: branch.name.clone(),
                timestep,
                source,
            })
        })
        .collect()
}

/// Runs the denoising loop for an already parsed scene. Returns the final
/// latent and, if requested, the fused latent after every timestep.
pub fn denoise_scene(
    scene: &SceneElements,
    cfg: &PipelineConfig,
    denoiser: &dyn DenoiserBackend,
    per_step: &mut Vec<LatentGrid>,
) -> Result<LatentGrid, PipelineError> {
    let branches = branches(scene);
    let run_id = text_seed(&scene.complex_prompt) ^ cfg.seed;
    let sessions: Vec<String> = (0..branches.len()).map(|i| format!("{run_id:016x}-{i}")).collect();
    let n = scene.objects.len();
    let mut z = initial_latent(cfg.seed, cfg.grid);
    for timestep in (1..=cfg.steps).rev() {
        let mut outs = step_branches(denoiser, &branches, &sessions, &z, timestep, cfg)?;
        let background = outs.pop().expect("background branch");
        let objects: Vec<(LatentGrid, _)> = outs
            .drain(1..)
            .zip(&scene.objects)
            .map(|(latent, obj)| (latent, obj.bbox))
            .collect();
        debug_assert_eq!(objects.len(), n);
        z = hcd_step(&outs[0], &objects, &background, &cfg.fusion)?;
        log::debug!("timestep {timestep}: fused {} branches", n + 2);
        if cfg.dump_steps {
            per_step.push(z.clone());
        }
    }
    Ok(z)
}

/// Full run: parse, denoise with compositing, and decode if the denoiser
/// can. Nothing is written to disk; see [`RunArtifacts::persist`].
pub fn generate(
    prompt: &str,
    cfg: &PipelineConfig,
    chat: &dyn ChatBackend,
    denoiser: &dyn DenoiserBackend,
) -> Result<RunArtifacts, Box<GenerateFailure>> {
    let fail = |error, partial| Box::new(GenerateFailure { error, partial });
    if let Err(e) = cfg.validate() {
        return Err(fail(e, PartialRun::default()));
    }
    let parsed = match orchestrate(prompt, chat, &cfg.orchestrator) {
        Ok(o) => o,
        Err(f) => {
            let partial = PartialRun {
                trace: Some(f.trace.clone()),
                ..Default::default()
            };
            return Err(fail(PipelineError::Orchestration(Box::new(f)), partial));
        }
    };
    let mut per_step = Vec::new();
    let final_latent = match denoise_scene(&parsed.scene, cfg, denoiser, &mut per_step) {
        Ok(z) => z,
        Err(e) => {
            let partial = PartialRun {
                scene: Some(parsed.scene),
                trace: Some(parsed.trace),
                per_step_latents: per_step,
            };
            return Err(fail(e, partial));
        }
    };
    let image = match denoiser.decode(&final_latent, 8 * cfg.grid.width as u32, 8 * cfg.grid.height as u32) {
        Ok(img) => img,
        Err(e) => {
            log::warn!("decoding the final latent failed: {e}");
            None
        }
    };
    Ok(RunArtifacts {
        scene: parsed.scene,
        trace: parsed.trace,
        per_step_latents: cfg.dump_steps.then_some(per_step),
        final_latent,
        image,
    })
}

/// One compositing step over latents read from disk. `objects` pairs each
/// layout object's name with its latent file; every layout object needs
/// exactly one.
pub fn fuse_only(
    layout: &Path,
    complex: &Path,
    background: &Path,
    objects: &[(String, &Path)],
    fusion: &FusionConfig,
) -> Result<LatentGrid, PipelineError> {
    let text = std::fs::read(layout).map_err(|e| PipelineError::Input(format!(
        "cannot read layout file {}: {e}",
        layout.display()
    )))?;
    let scene = parse_layout(&text).map_err(|source| PipelineError::Layout {
        path: layout.display().to_string(),
        source,
    })?;
    for (name, _) in objects {
        if scene.object(name).is_none() {
            return Err(PipelineError::Input(format!("--object {name}: no such object in the layout")));
        }
    }
    let complex = LatentGrid::read_file(complex)?;
    let background = LatentGrid::read_file(background)?;
    let mut pairs = Vec::with_capacity(scene.objects.len());
    for obj in &scene.objects {
        let mut files = objects.iter().filter(|(n, _)| *n == obj.name);
        let (Some((_, path)), None) = (files.next(), files.next()) else {
            return Err(PipelineError::Input(format!(
                "layout object {:?} needs exactly one --object {}=FILE",
                obj.name, obj.name
            )));
        };
        pairs.push((LatentGrid::read_file(path)?, obj.bbox));
    }
    Ok(hcd_step(&complex, &pairs, &background, fusion)?)
}
