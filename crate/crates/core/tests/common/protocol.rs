//! Protocol checks over the scripted fixtures, shared by the orchestrator
//! tests and the acceptance run. Each returns a description of the first
//! failed expectation.

use scenecomp::orchestrator::{orchestrate, AgentRole, OrchestratorConfig, OrchestratorError, Trace};
use scenecomp::scene::validate_scene;

use super::{mock, HAPPY_PROMPT};

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn roles(trace: &Trace, phase: &str) -> Vec<String> {
    trace
        .events
        .iter()
        .filter(|e| e.phase == phase)
        .map(|e| e.role.clone())
        .collect()
}

pub fn happy_path() -> Result<(), String> {
    let backend = mock("happy_path.json");
    let out = orchestrate(HAPPY_PROMPT, &backend, &OrchestratorConfig::default()).map_err(|f| f.to_string())?;
    let report = validate_scene(&out.scene);
    ensure(report.is_empty(), || format!("scene does not validate: {report}"))?;
    ensure(out.scene.objects.len() == 2, || format!("{} objects", out.scene.objects.len()))?;
    ensure(out.state.cycles_used == 0, || format!("{} feedback cycles", out.state.cycles_used))?;
    ensure(roles(&out.trace, "backward").is_empty(), || "backward events in a clean run".into())?;
    ensure(out.state.executed_order.len() == 6, || format!("{:?}", out.state.executed_order))
}

pub fn layout_fix() -> Result<(), String> {
    let backend = mock("layout_fix.json");
    let out = orchestrate(HAPPY_PROMPT, &backend, &OrchestratorConfig::default()).map_err(|f| f.to_string())?;
    ensure(out.state.cycles_used == 1, || format!("{} feedback cycles, expected 1", out.state.cycles_used))?;

    // the reflections visit agents in reverse execution order and stop at
    // the first one admitting the mistake
    let first_pass: Vec<String> = out
        .trace
        .events
        .iter()
        .filter(|e| e.phase == "forward" && e.role != "conductor")
        .take(6)
        .map(|e| e.role.clone())
        .collect();
    let expected: Vec<String> = first_pass.iter().rev().take(2).map(|r| format!("reflect:{r}")).collect();
    let backward = roles(&out.trace, "backward");
    ensure(backward == expected, || format!("backward order {backward:?}, expected {expected:?}"))?;
    ensure(
        backward.last().map(String::as_str) == Some("reflect:layout"),
        || "traversal did not stop at the layout agent".into(),
    )?;

    // the second forward pass re-runs only the layout agent
    let reruns: Vec<&str> = out
        .trace
        .events
        .iter()
        .skip_while(|e| e.phase != "backward")
        .filter(|e| e.phase == "forward" && e.role != "conductor")
        .map(|e| e.role.as_str())
        .collect();
    ensure(reruns == ["layout"], || format!("re-run agents {reruns:?}"))?;
    let mug = out.scene.object("a blue ceramic mug").ok_or("mug missing")?;
    ensure(mug.bbox.x + mug.bbox.w <= 1.0, || format!("mug box still out of bounds: {:?}", mug.bbox))?;
    let report = validate_scene(&out.scene);
    ensure(report.is_empty(), || format!("scene does not validate: {report}"))?;
    ensure(
        *out.state.executed_order.last().unwrap() == AgentRole::Layout,
        || "layout not last in execution order".into(),
    )
}

pub fn adversarial() -> Result<(), String> {
    let backend = mock("adversarial.json");
    let config = OrchestratorConfig::default();
    match orchestrate(HAPPY_PROMPT, &backend, &config) {
        Ok(_) => Err("adversarial fixture produced a scene".into()),
        Err(f) => {
            ensure(
                matches!(f.error, OrchestratorError::MaxCyclesExhausted { cycles: 3, .. }),
                || format!("unexpected error {}", f.error),
            )?;
            ensure(f.state.cycles_used == config.max_cycles, || {
                format!("{} cycles used", f.state.cycles_used)
            })?;
            let evaluations = f.trace.by_role("evaluator").count();
            ensure(evaluations == 4, || format!("{evaluations} evaluations, expected 4"))
        }
    }
}
