use std::path::Path;

use super::PipelineError;
use crate::latent::LatentGrid;
use crate::orchestrator::Trace;
use crate::scene::{serialize_scene, SceneElements};

pub const SCENE_FILE: &str = "scene.json";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const FINAL_LATENT_FILE: &str = "final_latent.bin";
pub const IMAGE_FILE: &str = "image.png";
pub const STEPS_DIR: &str = "steps";

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub scene: SceneElements,
    pub trace: Trace,
    /// Fused latent after each timestep, noisiest first, when requested.
    pub per_step_latents: Option<Vec<LatentGrid>>,
    pub final_latent: LatentGrid,
    pub image: Option<Vec<u8>>,
}

/// What a failed run got through before failing.
#[derive(Debug, Clone, Default)]
pub struct PartialRun {
    pub scene: Option<SceneElements>,
    pub trace: Option<Trace>,
    pub per_step_latents: Vec<LatentGrid>,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(path, bytes).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn create_dir(dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn write_steps(dir: &Path, latents: &[LatentGrid]) -> Result<(), PipelineError> {
    if latents.is_empty() {
        return Ok(());
    }
    let steps = dir.join(STEPS_DIR);
    create_dir(&steps)?;
    for (i, z) in latents.iter().enumerate() {
        write(&steps.join(format!("{i:03}.bin")), &z.to_bytes())?;
    }
    Ok(())
}

impl RunArtifacts {
    /// Writes `scene.json`, `trace.jsonl`, `final_latent.bin` and, when
    /// present, `steps/NNN.bin` and `image.png` under `dir`.
    pub fn persist(&self, dir: &Path) -> Result<(), PipelineError> {
        create_dir(dir)?;
        write(&dir.join(SCENE_FILE), &serialize_scene(&self.scene))?;
        write(&dir.join(TRACE_FILE), self.trace.to_jsonl().as_bytes())?;
        write(&dir.join(FINAL_LATENT_FILE), &self.final_latent.to_bytes())?;
        if let Some(steps) = &self.per_step_latents {
            write_steps(dir, steps)?;
        }
        if let Some(png) = &self.image {
            write(&dir.join(IMAGE_FILE), png)?;
        }
        Ok(())
    }
}

impl PartialRun {
    pub fn persist(&self, dir: &Path) -> Result<(), PipelineError> {
        create_dir(dir)?;
        if let Some(scene) = &self.scene {
            write(&dir.join(SCENE_FILE), &serialize_scene(scene))?;
        }
        if let Some(trace) = &self.trace {
            write(&dir.join(TRACE_FILE), trace.to_jsonl().as_bytes())?;
        }
        write_steps(dir, &self.per_step_latents)
    }
}
