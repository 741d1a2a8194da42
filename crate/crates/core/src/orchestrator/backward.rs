use super::evaluator::parse_verdict;
use super::templates::{render, REFLECTION_SYSTEM, REFLECTION_USER};
use super::{call, AgentRole, ChatBackend, FeedbackSignal, OrchestratorConfig, OrchestratorError, OrchestratorState, Phase, Trace};

/// Walks the executed agents from last to first, asking each whether its
/// own output caused the failure. The first agent that admits a mistake is
/// scheduled for a re-run with its correction suggestion. If none admits,
/// the agent blamed by the evaluator is re-run, or every agent when the
/// evaluator blamed nobody.
pub fn backward_pass(
    state: &mut OrchestratorState,
    signal: &FeedbackSignal,
    backend: &dyn ChatBackend,
    config: &OrchestratorConfig,
    trace: &mut Trace,
) -> Result<(), OrchestratorError> {
    if !signal.continue_backward {
        state.phase = Phase::Done;
        return Ok(());
    }
    if state.cycles_used >= config.max_cycles {
        return Err(OrchestratorError::MaxCyclesExhausted {
            cycles: state.cycles_used,
            last_feedback: signal.message.clone(),
        });
    }
    if state.executed_order.is_empty() {
        return Err(OrchestratorError::InvalidPhase("backward feedback with no executed agents"));
    }
    state.phase = Phase::Backward;

    let mut feedback = signal.message.clone();
    let mut erring: Option<(AgentRole, String)> = None;
    let order: Vec<AgentRole> = state.executed_order.iter().rev().copied().collect();
    for (step, role) in order.into_iter().enumerate() {
        let system = render(
            REFLECTION_SYSTEM,
            &[("agent name", role.name()), ("agent capability", role.capability())],
        );
        let outputs = state.render_outputs();
        let user = render(
            REFLECTION_USER,
            &[("input prompt", &state.prompt), ("outputs", &outputs), ("feedback", &feedback)],
        );
        let tag = format!("reflect:{}", role.key());
        let reply = call(backend, &tag, &system, &user, "backward", step, trace)?;
        let verdict = parse_verdict(&reply);
        let admitted = verdict.as_ref().is_some_and(|v| !v.right);
        if let Some(last) = trace.events.last_mut() {
            last.signal = Some(serde_json::json!({ "admitted": admitted }));
        }
        if admitted {
            let v = verdict.expect("admitted implies a verdict");
            let fallback = signal
                .localized_error
                .as_ref()
                .filter(|e| e.role == role && !e.suggestion.is_empty())
                .map(|e| e.suggestion.clone());
            let suggestion = v
                .suggestion
                .or(fallback)
                .or(v.problem)
                .unwrap_or_else(|| feedback.clone());
            erring = Some((role, suggestion));
            break;
        }
        if let Some(s) = verdict.and_then(|v| v.suggestion) {
            feedback = format!("{feedback}\n{s}");
        }
    }

    let scheduled = match (erring, &signal.localized_error) {
        (Some((role, suggestion)), _) => {
            state.suggestions.insert(role, suggestion);
            vec![role]
        }
        (None, Some(err)) => {
            let text = if err.suggestion.is_empty() { err.problem.clone() } else { err.suggestion.clone() };
            state.suggestions.insert(err.role, text);
            vec![err.role]
        }
        (None, None) => {
            state.general_feedback = Some(signal.message.clone());
            AgentRole::ALL.to_vec()
        }
    };
    state.cycles_used += 1;
    state.start_forward_pass(scheduled);
    Ok(())
}
