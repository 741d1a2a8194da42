use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "scenecomp", version, about = "Layout-driven compositional latent generation")]
pub struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a prompt into a scene and denoise it with per-step compositing.
    Generate(GenerateArgs),
    /// Parse a prompt into a scene and print or save the scene JSON.
    Parse(ParseArgs),
    /// Run one compositing step over latent files.
    Fuse(FuseArgs),
}

/// Settings shared by every command that reads a config file. Flags win
/// over the file, the file wins over built-in defaults.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LlmArgs {
    /// Chat backend: mock:PATH or http:URL. The API key is read from
    /// SCENECOMP_API_KEY or OPENAI_API_KEY.
    #[arg(long, value_name = "SPEC")]
    pub llm: Option<String>,

    /// Model name sent to an HTTP chat backend.
    #[arg(long, value_name = "NAME")]
    pub llm_model: Option<String>,

    /// Feedback cycles before parsing gives up.
    #[arg(long, value_name = "N")]
    pub max_cycles: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub prompt: String,

    #[arg(long, value_name = "N")]
    pub steps: Option<u32>,

    #[arg(long, value_name = "F")]
    pub guidance: Option<f64>,

    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,

    /// Denoiser backend: toy or remote:URL.
    #[arg(long, value_name = "SPEC")]
    pub denoiser: Option<String>,

    /// Latent geometry as CxHxW, e.g. 4x64x64.
    #[arg(long, value_name = "CxHxW")]
    pub grid: Option<String>,

    /// Weight of the complex-prompt latent in each step's final mix.
    #[arg(long, value_name = "F")]
    pub mu: Option<f64>,

    /// Upper bound on branch denoising calls in flight.
    #[arg(long, value_name = "N")]
    pub max_concurrency: Option<usize>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Also write the fused latent of every timestep under steps/.
    #[arg(long)]
    pub dump_steps: bool,

    #[command(flatten)]
    pub llm: LlmArgs,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub prompt: String,

    /// Scene JSON destination; stdout if omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Also write the orchestration trace as JSON lines.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,

    #[command(flatten)]
    pub llm: LlmArgs,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Scene or layout JSON giving the object boxes.
    #[arg(long, value_name = "FILE")]
    pub layout: PathBuf,

    #[arg(long, value_name = "FILE")]
    pub complex: PathBuf,

    #[arg(long, value_name = "FILE")]
    pub background: PathBuf,

    /// One latent per layout object, as NAME=FILE. Repeatable.
    #[arg(long = "object", value_name = "NAME=FILE")]
    pub objects: Vec<String>,

    #[arg(long, value_name = "F")]
    pub mu: Option<f64>,

    /// Output latent file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    #[command(flatten)]
    pub common: CommonArgs,
}
