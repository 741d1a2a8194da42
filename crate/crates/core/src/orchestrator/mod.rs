//! Multi-agent scene parsing. A conductor picks which of six specialist
//! agents runs next (forward pass), the merged result is checked by the
//! scene validator and judged by an evaluator, and failures are traced back
//! through the agents in reverse order until one admits a mistake and is
//! re-run with a correction.

mod backend;
mod backward;
mod evaluator;
mod http;
mod integrate;
pub mod outputs;
mod role;
mod state;
pub mod templates;
mod trace;

pub use backend::{ChatBackend, ChatError, ChatRequest, FixtureError, MockScripted, FIXTURE_VERSION};
pub use backward::backward_pass;
pub use evaluator::{evaluate, parse_verdict, FeedbackSignal, LocalizedError, Verdict};
pub use http::{HttpChatClient, HttpChatConfig, API_KEY_VARS};
pub use integrate::{integrate_results, IntegrationError};
pub use role::{match_role, AgentRole};
pub use state::{OrchestratorState, Phase};
pub use trace::{prompt_hash, Trace, TraceEvent};

use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::scene::{validate_scene, SceneElements, ValidationReport, Violation};
use templates::{render, CONDUCTOR_REASK, CONDUCTOR_SYSTEM, CONDUCTOR_USER, REVISION_NOTE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrchestratorConfig {
    /// Conductor steps per forward pass, re-asks included.
    pub max_steps: usize,
    /// Backward/forward correction cycles before giving up.
    pub max_cycles: usize,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self {
            max_steps: 8,
            max_cycles: 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("the prompt is empty")]
    EmptyPrompt,
    #[error("invalid orchestrator phase: {0}")]
    InvalidPhase(&'static str),
    #[error("no steps left in this forward pass")]
    StepBudgetExhausted,
    #[error("conductor reply {reply:?} names none of the remaining agents")]
    UnrecognizedSelection { reply: String },
    #[error("the {0} returned an empty output")]
    EmptyOutput(AgentRole),
    #[error("chat call {tag} failed: {source}")]
    Backend {
        tag: String,
        #[source]
        source: ChatError,
    },
    #[error("evaluator reply could not be parsed: {reply:?}")]
    EvaluatorUnparseable { reply: String },
    #[error("no valid scene after {cycles} feedback cycles; last feedback: {last_feedback}")]
    MaxCyclesExhausted { cycles: usize, last_feedback: String },
}

/// Sends one chat request and records it in the trace.
pub(crate) fn call(
    backend: &dyn ChatBackend,
    tag: &str,
    system: &str,
    user: &str,
    phase: &str,
    step: usize,
    trace: &mut Trace,
) -> Result<String, OrchestratorError> {
    let reply = backend
        .complete(&ChatRequest { tag, system, user })
        .map_err(|source| OrchestratorError::Backend {
            tag: tag.to_string(),
            source,
        })?;
    trace.push(TraceEvent {
        phase: phase.to_string(),
        step,
        role: tag.to_string(),
        rendered_prompt_hash: prompt_hash(system, user),
        reply: reply.clone(),
        signal: None,
    });
    Ok(reply)
}

fn bracketed(roles: &[AgentRole]) -> String {
    let names: Vec<&str> = roles.iter().map(|r| r.name()).collect();
    format!("[{}]", names.join(", "))
}

/// Asks the conductor which remaining agent to run. An unrecognized reply
/// gets one re-ask, which costs a step.
pub fn conductor_select(
    state: &mut OrchestratorState,
    backend: &dyn ChatBackend,
    config: &OrchestratorConfig,
    trace: &mut Trace,
) -> Result<AgentRole, OrchestratorError> {
    if state.phase != Phase::Forward {
        return Err(OrchestratorError::InvalidPhase("conductor selection outside a forward pass"));
    }
    let remaining = state.remaining();
    if remaining.is_empty() {
        return Err(OrchestratorError::InvalidPhase("every scheduled agent has already run"));
    }
    let steps_left = config.max_steps.saturating_sub(state.step);
    if steps_left == 0 {
        return Err(OrchestratorError::StepBudgetExhausted);
    }
    let info: Vec<String> = AgentRole::ALL
        .iter()
        .map(|r| format!("{}: {}", r.name(), r.capability()))
        .collect();
    let done: Vec<AgentRole> = state.outputs.keys().copied().collect();
    let outputted = if done.is_empty() { "none".to_string() } else { bracketed(&done) };
    let remaining_text = bracketed(&remaining);
    let user = render(
        CONDUCTOR_USER,
        &[
            ("text prompt", &state.prompt),
            ("agent info", &info.join("; ")),
            ("outputted agents", &outputted),
            ("remaining agents", &remaining_text),
            ("remaining steps", &steps_left.to_string()),
        ],
    );
    let reply = call(backend, "conductor", CONDUCTOR_SYSTEM, &user, "forward", state.step, trace)?;
    if let Some(role) = match_role(&reply, &remaining) {
        mark_selection(trace, role);
        return Ok(role);
    }
    if steps_left < 2 {
        return Err(OrchestratorError::UnrecognizedSelection { reply });
    }
    state.step += 1;
    let reask = format!(
        "{user}\n{}",
        render(CONDUCTOR_REASK, &[("reply", reply.trim()), ("remaining agents", &remaining_text)])
    );
    let second = call(backend, "conductor", CONDUCTOR_SYSTEM, &reask, "forward", state.step, trace)?;
    let role = match_role(&second, &remaining).ok_or(OrchestratorError::UnrecognizedSelection { reply: second })?;
    mark_selection(trace, role);
    Ok(role)
}

fn mark_selection(trace: &mut Trace, role: AgentRole) {
    if let Some(last) = trace.events.last_mut() {
        last.signal = Some(serde_json::json!({ "selected": role.key() }));
    }
}

/// Runs one agent on the prompt and the outputs so far. `feedback` is a
/// correction from backward feedback and is appended to the user message.
pub fn run_agent(
    role: AgentRole,
    state: &OrchestratorState,
    backend: &dyn ChatBackend,
    feedback: Option<&str>,
    trace: &mut Trace,
) -> Result<String, OrchestratorError> {
    let outputs = state.render_outputs();
    let mut user = render(role.user_template(), &[("input prompt", &state.prompt), ("outputs", &outputs)]);
    if let Some(fb) = feedback {
        user.push('\n');
        user.push_str(&render(REVISION_NOTE, &[("feedback", fb)]));
    }
    let reply = call(backend, role.key(), role.system_template(), &user, "forward", state.step, trace)?;
    if reply.trim().is_empty() {
        return Err(OrchestratorError::EmptyOutput(role));
    }
    Ok(reply)
}

/// Runs conductor/agent steps until every scheduled agent has produced
/// output or the step budget is spent.
pub fn forward_pass(
    state: &mut OrchestratorState,
    backend: &dyn ChatBackend,
    config: &OrchestratorConfig,
    trace: &mut Trace,
) -> Result<(), OrchestratorError> {
    state.phase = Phase::Forward;
    while !state.remaining().is_empty() && state.step < config.max_steps {
        let role = conductor_select(state, backend, config, trace)?;
        let feedback = state.suggestions.get(&role).cloned().or_else(|| state.general_feedback.clone());
        let output = run_agent(role, state, backend, feedback.as_deref(), trace)?;
        state.suggestions.remove(&role);
        state.record_output(role, output);
        state.step += 1;
    }
    if !state.remaining().is_empty() {
        log::warn!(
            "forward pass stopped after {} steps with {} agents not run",
            state.step,
            state.remaining().len()
        );
    }
    state.general_feedback = None;
    Ok(())
}

/// Integrates the outputs and runs the scene validator. Outputs that cannot
/// be integrated at all are reported as a single violation.
fn execute(state: &OrchestratorState, trace: &mut Trace) -> (Option<SceneElements>, ValidationReport) {
    let (scene, report) = match integrate_results(state) {
        Ok(scene) => {
            let report = validate_scene(&scene);
            (Some(scene), report)
        }
        Err(e) => (
            None,
            ValidationReport {
                violations: vec![Violation::Integration { message: e.to_string() }],
            },
        ),
    };
    let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    trace.push(TraceEvent {
        phase: "execute".into(),
        step: state.step,
        role: "validator".into(),
        rendered_prompt_hash: String::new(),
        reply: report.to_string(),
        signal: Some(serde_json::json!({ "violations": violations })),
    });
    (scene, report)
}

/// A parsed scene together with how it was produced.
#[derive(Debug, Clone)]
pub struct Orchestration {
    pub scene: SceneElements,
    pub state: OrchestratorState,
    pub trace: Trace,
}

/// A failed orchestration with everything recorded up to the failure.
#[derive(Debug)]
pub struct OrchestrationFailure {
    pub error: OrchestratorError,
    pub state: OrchestratorState,
    pub trace: Trace,
}

impl fmt::Display for OrchestrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} trace events)", self.error, self.trace.events.len())
    }
}

impl std::error::Error for OrchestrationFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Parses `prompt` into a validated scene.
#[allow(clippy::result_large_err)] // failures carry the full state and trace for debugging
pub fn orchestrate(
    prompt: &str,
    backend: &dyn ChatBackend,
    config: &OrchestratorConfig,
) -> Result<Orchestration, OrchestrationFailure> {
    let mut state = OrchestratorState::new(prompt);
    let mut trace = Trace::default();
    match run(&mut state, backend, config, &mut trace) {
        Ok(scene) => {
            state.phase = Phase::Done;
            Ok(Orchestration { scene, state, trace })
        }
        Err(error) => {
            state.phase = Phase::Failed;
            Err(OrchestrationFailure { error, state, trace })
        }
    }
}

fn run(
    state: &mut OrchestratorState,
    backend: &dyn ChatBackend,
    config: &OrchestratorConfig,
    trace: &mut Trace,
) -> Result<SceneElements, OrchestratorError> {
    if state.prompt.trim().is_empty() {
        return Err(OrchestratorError::EmptyPrompt);
    }
    loop {
        forward_pass(state, backend, config, trace)?;
        let (scene, report) = execute(state, trace);
        let signal = evaluate(&report, state, backend, state.step, trace)?;
        if !signal.continue_backward {
            if let Some(scene) = scene {
                return Ok(scene);
            }
        }
        backward_pass(state, &signal, backend, config, trace)?;
    }
}
