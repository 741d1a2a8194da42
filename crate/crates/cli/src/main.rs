mod args;

use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use scenecomp::Shape;
use scenecomp::pipeline::{
    build_chat_backend, build_denoiser, exit_code, fuse_only, generate, parse_only, ConfigFile, PipelineConfig,
    PipelineError,
};
use scenecomp::scene::serialize_scene;

use args::{Cli, Command, CommonArgs, FuseArgs, GenerateArgs, LlmArgs, ParseArgs};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit_code::CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Parse(a) => run_parse(a),
        Command::Fuse(a) => run_fuse(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn report(e: &PipelineError) {
    eprintln!("error: {e}");
    let mut source = e.source();
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
}

fn base_config(common: &CommonArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(ConfigFile::load(path)?)?;
    }
    Ok(cfg)
}

fn apply_llm(cfg: &mut PipelineConfig, a: &LlmArgs) -> Result<(), PipelineError> {
    if let Some(spec) = &a.llm {
        cfg.llm = spec.parse()?;
    }
    if let Some(model) = &a.llm_model {
        cfg.llm_model = model.clone();
    }
    if let Some(n) = a.max_cycles {
        cfg.orchestrator.max_cycles = n;
    }
    Ok(())
}

fn parse_grid(s: &str) -> Result<Shape, PipelineError> {
    let dims: Vec<usize> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| PipelineError::Config(format!("grid must look like 4x64x64, got {s:?}")))?;
    match dims[..] {
        [c, h, w] => Ok(Shape::new(c, h, w)),
        _ => Err(PipelineError::Config(format!("grid must have three dimensions, got {s:?}"))),
    }
}

fn generate_config(a: &GenerateArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = base_config(&a.common)?;
    apply_llm(&mut cfg, &a.llm)?;
    if let Some(v) = a.steps {
        cfg.steps = v;
    }
    if let Some(v) = a.guidance {
        cfg.guidance_scale = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = &a.denoiser {
        cfg.denoiser = v.parse()?;
    }
    if let Some(v) = &a.grid {
        cfg.grid = parse_grid(v)?;
    }
    if let Some(v) = a.mu {
        cfg.fusion.mu = v;
    }
    if let Some(v) = a.max_concurrency {
        cfg.max_concurrency = v;
    }
    cfg.dump_steps |= a.dump_steps;
    cfg.validate()?;
    Ok(cfg)
}

fn run_generate(a: GenerateArgs) -> Result<(), PipelineError> {
    let cfg = generate_config(&a)?;
    let chat = build_chat_backend(&cfg)?;
    let denoiser = build_denoiser(&cfg)?;
    log::info!("llm {}, denoiser {}", cfg.llm, denoiser.describe());
    match generate(&a.prompt, &cfg, chat.as_ref(), denoiser.as_ref()) {
        Ok(art) => {
            art.persist(&a.out)?;
            println!(
                "{} objects, {} steps, written to {}",
                art.scene.objects.len(),
                cfg.steps,
                a.out.display()
            );
            Ok(())
        }
        Err(failure) => {
            if let Err(e) = failure.partial.persist(&a.out) {
                log::warn!("could not save partial results: {e}");
            } else {
                eprintln!("partial results written to {}", a.out.display());
            }
            Err(failure.error)
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(path, bytes).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run_parse(a: ParseArgs) -> Result<(), PipelineError> {
    let mut cfg = base_config(&a.common)?;
    apply_llm(&mut cfg, &a.llm)?;
    cfg.validate()?;
    let chat = build_chat_backend(&cfg)?;
    let parsed = match parse_only(&a.prompt, &cfg, chat.as_ref()) {
        Ok(p) => p,
        Err(e) => {
            if let (Some(path), PipelineError::Orchestration(f)) = (&a.trace, &e) {
                write_file(path, f.trace.to_jsonl().as_bytes())?;
            }
            return Err(e);
        }
    };
    if let Some(path) = &a.trace {
        write_file(path, parsed.trace.to_jsonl().as_bytes())?;
    }
    let json = serialize_scene(&parsed.scene);
    match &a.out {
        Some(path) => write_file(path, &json),
        None => {
            print!("{}", String::from_utf8_lossy(&json));
            Ok(())
        }
    }
}

fn split_object(spec: &str) -> Result<(String, PathBuf), PipelineError> {
    match spec.split_once('=') {
        Some((name, file)) if !name.trim().is_empty() && !file.is_empty() => {
            Ok((name.trim().to_string(), PathBuf::from(file)))
        }
        _ => Err(PipelineError::Config(format!("--object expects NAME=FILE, got {spec:?}"))),
    }
}

fn run_fuse(a: FuseArgs) -> Result<(), PipelineError> {
    let mut cfg = base_config(&a.common)?;
    if let Some(mu) = a.mu {
        cfg.fusion.mu = mu;
    }
    cfg.fusion.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
    let objects = a.objects.iter().map(|s| split_object(s)).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<(String, &Path)> = objects.iter().map(|(n, p)| (n.clone(), p.as_path())).collect();
    let out = fuse_only(&a.layout, &a.complex, &a.background, &refs, &cfg.fusion)?;
    out.write_file(&a.out)?;
    Ok(())
}
