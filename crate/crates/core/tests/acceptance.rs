//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Built with `harness = false` so the lines always print.

mod common;

use std::time::{Duration, Instant};

use common::e2e::{happy_config, region_contrast, run_happy, Counting};
use common::oracle::{check_instance, degenerate_instances, random_instance};
use common::protocol;
use scenecomp::denoiser::ToyDenoiser;
use scenecomp::fusion::{depth_weight, gaussian_kernel, gaussian_mask, hcd_step, FusionConfig, PixelBox};
use scenecomp::pipeline::PipelineConfig;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < budget, || format!("took {took:?}, budget {budget:?}"))
}

fn fusion_oracle_suite() -> Outcome {
    const INSTANCES: u64 = 1000;
    let start = Instant::now();
    for seed in 0..INSTANCES {
        check_instance(&random_instance(seed), 1e-5).map_err(|e| format!("instance {seed}: {e}"))?;
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!("{INSTANCES} instances within 1e-5 in {:?}", start.elapsed()))
}

fn shipped_constants() -> Outcome {
    let f = FusionConfig::default();
    let p = PipelineConfig::default();
    let checks = [
        ("lambda_pos", f.lambda_pos, 0.2),
        ("lambda_neg", f.lambda_neg, 0.2),
        ("smooth_sigma", f.smooth_sigma, 1.0),
        ("mu", f.mu, 0.8),
        ("steps", f64::from(p.steps), 20.0),
        ("guidance_scale", p.guidance_scale, 7.0),
    ];
    for (name, got, want) in checks {
        ensure(got == want, || format!("{name} = {got}, expected {want}"))?;
    }
    ensure(p.fusion == f, || "pipeline fusion defaults differ from FusionConfig::default()".into())?;
    Ok("lambda_pos, lambda_neg, smooth_sigma, mu, steps, guidance_scale".into())
}

fn analytic_spot_values() -> Outcome {
    let w = depth_weight(0, 2, 2.0);
    ensure((w - 0.731_058_6).abs() <= 1e-6, || format!("depth_weight(0, 2, 2.0) = {w}"))?;
    for n in [1usize, 3, 5, 7] {
        let mid = ((n - 1) / 2) as u32;
        let v = depth_weight(mid, n, 2.0);
        ensure(v == 0.5, || format!("midpoint weight for n = {n} is {v}"))?;
    }
    for (x0, y0, bw, bh) in [(0, 0, 1, 1), (2, 3, 5, 5), (1, 1, 7, 3), (4, 0, 2, 6), (0, 0, 16, 16)] {
        let m = gaussian_mask(&PixelBox::new(x0, y0, bw, bh, 0));
        let peak = m.values().iter().cloned().fold(f64::MIN, f64::max);
        let center = m.at((bh - 1) / 2, (bw - 1) / 2);
        ensure(center == peak, || format!("{bw}x{bh} mask: center {center}, max {peak}"))?;
    }
    for (sigma, k) in [(1.0, 3), (0.5, 1), (2.0, 5)] {
        let sum: f64 = gaussian_kernel(sigma, k).iter().sum();
        ensure((sum - 1.0).abs() <= 1e-12, || format!("kernel sigma {sigma} k {k} sums to {sum}"))?;
    }
    Ok(format!("depth_weight(0, 2, 2.0) = {w:.7}"))
}

fn orchestrator_protocol() -> Outcome {
    let start = Instant::now();
    protocol::happy_path().map_err(|e| format!("happy path: {e}"))?;
    protocol::layout_fix().map_err(|e| format!("layout fix: {e}"))?;
    protocol::adversarial().map_err(|e| format!("adversarial: {e}"))?;
    // a second round must behave identically
    protocol::happy_path().and(protocol::layout_fix()).and(protocol::adversarial())?;
    within_budget(start, Duration::from_secs(5))?;
    Ok(format!("happy, one-cycle fix and max-cycles fixtures in {:?}", start.elapsed()))
}

fn end_to_end_determinism() -> Outcome {
    let cfg = happy_config(20_240_601);
    let mut finals = Vec::new();
    let mut contrast = Vec::new();
    for run in 0..3 {
        let denoiser = Counting::new(ToyDenoiser);
        let art = run_happy(&cfg, &denoiser);
        let n = art.scene.objects.len();
        let expected = cfg.steps as usize * (n + 2);
        ensure(denoiser.calls() == expected, || {
            format!("run {run}: {} denoiser calls, expected {expected}", denoiser.calls())
        })?;
        contrast = region_contrast(&art);
        finals.push(art.final_latent.to_bytes());
    }
    ensure(finals.windows(2).all(|w| w[0] == w[1]), || "final latents differ between runs".into())?;
    for (i, d) in contrast.iter().enumerate() {
        ensure(*d > 0.01, || format!("object {i}: mean |delta| {d} against the background"))?;
    }
    let shown: Vec<String> = contrast.iter().map(|d| format!("{d:.4}")).collect();
    Ok(format!("3 identical runs, region contrast [{}]", shown.join(", ")))
}

fn degenerate_inputs() -> Outcome {
    let cases = degenerate_instances();
    for (label, inst) in &cases {
        check_instance(inst, 1e-9).map_err(|e| format!("{label}: {e}"))?;
        let out = hcd_step(&inst.complex, &inst.objects, &inst.background, &inst.cfg).map_err(|e| e.to_string())?;
        ensure(out.is_finite(), || format!("{label}: non-finite output"))?;
    }
    Ok(format!("{} cases", cases.len()))
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("fusion math matches scalar oracles", fusion_oracle_suite),
        ("shipped constants", shipped_constants),
        ("analytic spot values", analytic_spot_values),
        ("orchestrator protocol", orchestrator_protocol),
        ("end-to-end determinism", end_to_end_determinism),
        ("degenerate inputs", degenerate_inputs),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
