use std::collections::BTreeMap;

use super::AgentRole;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Forward,
    Backward,
    Done,
    Failed,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Forward => "forward",
            Phase::Backward => "backward",
            Phase::Done => "done",
            Phase::Failed => "failed",
        }
    }
}

/// The orchestrator's state: the prompt, the accumulated agent outputs and
/// the step counter, plus bookkeeping for backward feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct OrchestratorState {
    pub prompt: String,
    /// Latest output per agent. Re-running an agent replaces its entry.
    pub outputs: BTreeMap<AgentRole, String>,
    /// Correction suggestions gathered during backward feedback, keyed by
    /// the agent they are addressed to.
    pub suggestions: BTreeMap<AgentRole, String>,
    /// Feedback for a full re-run when no single agent was blamed.
    pub general_feedback: Option<String>,
    /// Steps used in the current forward pass.
    pub step: usize,
    /// Order in which agents last produced output; a re-run moves the agent
    /// to the end.
    pub executed_order: Vec<AgentRole>,
    /// Agents to run in the current forward pass.
    pub scheduled: Vec<AgentRole>,
    /// Agents already run in the current forward pass.
    pub pass_executed: Vec<AgentRole>,
    pub phase: Phase,
    pub cycles_used: usize,
}

impl OrchestratorState {
    pub fn new(prompt: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            outputs: BTreeMap::new(),
            suggestions: BTreeMap::new(),
            general_feedback: None,
            step: 0,
            executed_order: Vec::new(),
            scheduled: AgentRole::ALL.to_vec(),
            pass_executed: Vec::new(),
            phase: Phase::Forward,
            cycles_used: 0,
        }
    }

    /// Scheduled agents that have not yet run in this forward pass, in
    /// canonical order.
    pub fn remaining(&self) -> Vec<AgentRole> {
        AgentRole::ALL
            .into_iter()
            .filter(|r| self.scheduled.contains(r) && !self.pass_executed.contains(r))
            .collect()
    }

    /// Records a fresh output for `role` (replacing any earlier one).
    pub fn record_output(&mut self, role: AgentRole, output: String) {
        self.outputs.insert(role, output);
        self.pass_executed.push(role);
        self.executed_order.retain(|r| *r != role);
        self.executed_order.push(role);
    }

    /// Text of all outputs and pending suggestions, as shown to agents.
    pub fn render_outputs(&self) -> String {
        if self.outputs.is_empty() && self.suggestions.is_empty() && self.general_feedback.is_none() {
            return "none".into();
        }
        let mut lines: Vec<String> = self
            .outputs
            .iter()
            .map(|(role, out)| format!("[{}] {}", role.name(), out.trim()))
            .collect();
        lines.extend(
            self.suggestions
                .iter()
                .map(|(role, s)| format!("[feedback for {}] {}", role.name(), s.trim())),
        );
        lines.extend(self.general_feedback.iter().map(|s| format!("[feedback] {}", s.trim())));
        lines.join("\n")
    }

    pub(crate) fn start_forward_pass(&mut self, scheduled: Vec<AgentRole>) {
        self.phase = Phase::Forward;
        self.step = 0;
        self.scheduled = scheduled;
        self.pass_executed.clear();
    }
}
