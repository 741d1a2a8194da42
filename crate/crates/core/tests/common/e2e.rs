//! End-to-end helpers: a call-counting denoiser wrapper and region
//! statistics over a finished run.

use std::sync::atomic::{AtomicUsize, Ordering};

use scenecomp::denoiser::{DenoiseError, DenoiseRequest, DenoiserBackend};
use scenecomp::fusion::to_pixel_box;
use scenecomp::pipeline::{generate, LlmSpec, PipelineConfig, RunArtifacts};
use scenecomp::LatentGrid;

use super::{fixture, mock, HAPPY_PROMPT};

pub struct Counting<B> {
    pub inner: B,
    pub calls: AtomicUsize,
}

impl<B> Counting<B> {
    pub fn new(inner: B) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<B: DenoiserBackend> DenoiserBackend for Counting<B> {
    fn step(&self, req: &DenoiseRequest) -> Result<LatentGrid, DenoiseError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.step(req)
    }

    fn describe(&self) -> String {
        format!("counting {}", self.inner.describe())
    }
}

pub fn happy_config(seed: u64) -> PipelineConfig {
    PipelineConfig {
        seed,
        llm: LlmSpec::Mock(fixture("happy_path.json")),
        ..PipelineConfig::default()
    }
}

/// Runs the happy-path fixture with the given denoiser.
pub fn run_happy<B: DenoiserBackend>(cfg: &PipelineConfig, denoiser: &B) -> RunArtifacts {
    generate(HAPPY_PROMPT, cfg, &mock("happy_path.json"), denoiser).expect("happy path generates")
}

/// Per-channel mean of `z` over the cells where `select(y, x)` holds.
pub fn region_means(z: &LatentGrid, select: impl Fn(usize, usize) -> bool) -> Vec<f64> {
    (0..z.channels())
        .map(|c| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for y in 0..z.height() {
                for x in 0..z.width() {
                    if select(y, x) {
                        sum += z.get(c, y, x);
                        count += 1;
                    }
                }
            }
            assert!(count > 0, "empty region");
            sum / count as f64
        })
        .collect()
}

/// For each object, the channel-averaged |mean(box cells) - mean(cells
/// outside every box)| of the final latent. Cells shared with another box
/// are left out of the object's region.
pub fn region_contrast(art: &RunArtifacts) -> Vec<f64> {
    let z = &art.final_latent;
    let boxes: Vec<_> = art
        .scene
        .objects
        .iter()
        .map(|o| to_pixel_box(&o.bbox, z.height(), z.width()))
        .collect();
    let outside = region_means(z, |y, x| boxes.iter().all(|b| !b.contains(y, x)));
    (0..boxes.len())
        .map(|i| {
            let inside = region_means(z, |y, x| {
                boxes[i].contains(y, x) && boxes.iter().enumerate().all(|(j, b)| j == i || !b.contains(y, x))
            });
            inside.iter().zip(&outside).map(|(a, b)| (a - b).abs()).sum::<f64>() / inside.len() as f64
        })
        .collect()
}
