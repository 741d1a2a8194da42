use super::templates::{render, EVALUATOR_EXECUTION, EVALUATOR_REASK, EVALUATOR_SYSTEM, EVALUATOR_USER};
use super::{call, match_role, AgentRole, OrchestratorError, OrchestratorState, Trace};
use crate::scene::ValidationReport;

/// A `{"Result", "Problem", "Modification Suggestion"}` reply from the
/// evaluator or from an agent reflecting on its own output.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub right: bool,
    pub problem: Option<String>,
    pub suggestion: Option<String>,
    /// Optional `"Agent"` field naming the agent at fault.
    pub agent: Option<String>,
}

fn text_field(v: &serde_json::Value) -> Option<String> {
    let s = match v {
        serde_json::Value::String(s) => s.trim().to_string(),
        serde_json::Value::Null => return None,
        other => other.to_string(),
    };
    let lowered = s.to_lowercase();
    if s.is_empty() || matches!(lowered.as_str(), "null" | "none" | "n/a") {
        None
    } else {
        Some(s)
    }
}

/// Parses a verdict dictionary, tolerating key case, underscores, prose
/// around the braces and single quotes. `None` if there is no usable
/// `Result` field.
pub fn parse_verdict(reply: &str) -> Option<Verdict> {
    let value: serde_json::Value = crate::jsonfix::decode_lenient(reply).ok()?;
    let map = value.as_object()?;
    let field = |wanted: &[&str]| {
        map.iter().find_map(|(k, v)| {
            let key: String = k.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
            wanted.contains(&key.as_str()).then_some(v)
        })
    };
    let result = field(&["result"]).and_then(text_field)?.to_lowercase();
    let right = if result.contains("wrong") || result.contains("incorrect") {
        false
    } else if result.contains("right") || result.contains("correct") {
        true
    } else {
        return None;
    };
    Some(Verdict {
        right,
        problem: field(&["problem"]).and_then(text_field),
        suggestion: field(&["modificationsuggestion", "suggestion"]).and_then(text_field),
        agent: field(&["agent"]).and_then(text_field),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedError {
    pub role: AgentRole,
    pub problem: String,
    pub suggestion: String,
}

/// Outcome of an evaluation: whether backward feedback is needed, and which
/// agent the evaluator blamed, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackSignal {
    pub continue_backward: bool,
    pub localized_error: Option<LocalizedError>,
    /// Feedback text handed to the first reflecting agent.
    pub message: String,
}

impl FeedbackSignal {
    pub fn done() -> Self {
        Self {
            continue_backward: false,
            localized_error: None,
            message: String::new(),
        }
    }

    pub(crate) fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "continue_backward": self.continue_backward,
            "localized_error": self.localized_error.as_ref().map(|e| serde_json::json!({
                "role": e.role.key(),
                "problem": e.problem,
                "suggestion": e.suggestion,
            })),
        })
    }
}

fn feedback_message(raw: &ValidationReport, verdict: &Verdict) -> String {
    let mut parts = Vec::new();
    if let Some(p) = &verdict.problem {
        parts.push(format!("Problem: {p}"));
    }
    if let Some(s) = &verdict.suggestion {
        parts.push(format!("Modification Suggestion: {s}"));
    }
    if !raw.is_empty() {
        parts.push(format!("Execution report:\n{raw}"));
    }
    if parts.is_empty() {
        parts.push("The integrated result was judged wrong.".into());
    }
    parts.join("\n")
}

/// Asks the evaluator to judge the current outputs, with the execution
/// report injected when it lists violations. The scene passes only when the
/// report is empty and the evaluator answers "right".
pub fn evaluate(
    raw: &ValidationReport,
    state: &OrchestratorState,
    backend: &dyn super::ChatBackend,
    step: usize,
    trace: &mut Trace,
) -> Result<FeedbackSignal, OrchestratorError> {
    let outputs = state.render_outputs();
    let mut user = render(EVALUATOR_USER, &[("input prompt", &state.prompt), ("outputs", &outputs)]);
    if !raw.is_empty() {
        let report = raw.to_string();
        user.push_str("\n\n");
        user.push_str(&render(EVALUATOR_EXECUTION, &[("execution report", &report)]));
    }
    let reply = call(backend, "evaluator", EVALUATOR_SYSTEM, &user, "evaluate", step, trace)?;
    let verdict = match parse_verdict(&reply) {
        Some(v) => v,
        None => {
            let reask = format!("{user}\n\n{EVALUATOR_REASK}");
            let second = call(backend, "evaluator", EVALUATOR_SYSTEM, &reask, "evaluate", step, trace)?;
            parse_verdict(&second).ok_or(OrchestratorError::EvaluatorUnparseable { reply: second })?
        }
    };

    let signal = if raw.is_empty() && verdict.right {
        FeedbackSignal::done()
    } else {
        let localized_error = verdict.problem.as_ref().and_then(|problem| {
            let role = verdict
                .agent
                .as_deref()
                .and_then(|a| match_role(a, &AgentRole::ALL))
                .or_else(|| match_role(problem, &AgentRole::ALL))
                .or_else(|| verdict.suggestion.as_deref().and_then(|s| match_role(s, &AgentRole::ALL)))?;
            Some(LocalizedError {
                role,
                problem: problem.clone(),
                suggestion: verdict.suggestion.clone().unwrap_or_default(),
            })
        });
        FeedbackSignal {
            continue_backward: true,
            localized_error,
            message: feedback_message(raw, &verdict),
        }
    };
    if let Some(last) = trace.events.last_mut() {
        last.signal = Some(signal.to_json());
    }
    Ok(signal)
}
