//! Prompt templates for the conductor, the evaluator and agent reflection.
//! Placeholders are `{lowercase words}` and are filled by [`render`].

use std::sync::OnceLock;

use regex::Regex;

pub const CONDUCTOR_SYSTEM: &str = "You are the leader of an agent system for text parsing in complex scenes. Now, \
you need to coordinate all the agents you manage so that they can work together to solve the problem. Next, you are \
given a specific text prompt, and your goal is to select the agents you think are best suited to solicit insights \
and suggestions.
Generally speaking, the parsing of complex scenes includes several processes: object extraction, background \
extraction, relation extraction, layout extraction, and aesthetic optimization. Different text prompts may \
correspond to different processes, so you need to select the corresponding agent to solve the problem dynamically.";

pub const CONDUCTOR_USER: &str = "The text prompt is: {text prompt}.
Remember, based on the capabilities of different agents and the current status of the problem-solving process, you \
need to decide which agent to consult next. The agents' capabilities are described as follows: {agent info}.
Agents that have already outputted their answers include: {outputted agents}.
Please select an agent to consult from the remaining agents {remaining agents}.
Remember, the agent must choose from the existing list above.
Note that you must complete the workflow within the remaining {remaining steps} steps.
You should output the name of the agent directly. The next agent is:";

pub const CONDUCTOR_REASK: &str = "Your previous reply \"{reply}\" did not name one of the remaining agents. \
Answer with exactly one of: {remaining agents}.";

pub const EVALUATOR_SYSTEM: &str = "Your task is to exercise critical thinking to assess the truthfulness and \
reasonableness of the agent's output. If it is not reasonable, then make recommendations for modification.
Output format: {\"Result\": \"Evaluation results, with a value of right or wrong\", \"Problem\": \"If there is a \
problem, describe it in detail, otherwise, the value is null\", \"Modification Suggestion\": \"If the result is \
incorrect, describe the proposed change, otherwise, the value is null\"}.";

pub const EVALUATOR_USER: &str = "The input prompt is described as {input prompt}.
The output of all agents is {outputs}.
Please evaluate the reasonableness of the agents' outputs. If they are not reasonable, please state your suggestions \
for modification.";

pub const EVALUATOR_EXECUTION: &str = "Executing the integrated result reported the following problems:
{execution report}";

pub const EVALUATOR_REASK: &str = "Reply only with a JSON object in the required output format, with keys \
\"Result\", \"Problem\" and \"Modification Suggestion\".";

pub const REFLECTION_SYSTEM: &str = "You are the {agent name}, which {agent capability}. The \
integrated result of the agent system was judged to be wrong. Reflect on whether your own output caused the \
problem.
Output format: {\"Result\": \"wrong if your output contains the mistake, otherwise right\", \"Problem\": \"If your \
output is wrong, describe the mistake, otherwise, the value is null\", \"Modification Suggestion\": \"If your output \
is wrong, describe how to correct it, otherwise, the value is null\"}.";

pub const REFLECTION_USER: &str = "The input prompt is described as: {input prompt}.
The outputs of all agents are: {outputs}.
The feedback passed back to you is: {feedback}.
Please check your output against this feedback.";

pub const REVISION_NOTE: &str = "Feedback on your previous answer: {feedback}
Please revise your output accordingly.";

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z][a-z ]*[a-z])\}").unwrap())
}

/// Replaces each `{name}` with its value in a single pass, so substituted
/// text is never re-expanded. Unknown placeholders are left as is.
pub fn render(template: &str, values: &[(&str, &str)]) -> String {
    placeholder_re()
        .replace_all(template, |cap: &regex::Captures<'_>| {
            values
                .iter()
                .find(|(name, _)| *name == &cap[1])
                .map_or_else(|| cap[0].to_string(), |(_, v)| v.to_string())
        })
        .into_owned()
}

/// Placeholder names in order of first appearance, without duplicates.
pub fn placeholders(template: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for cap in placeholder_re().captures_iter(template) {
        let name = cap[1].to_string();
        if !names.contains(&name) {
            names.push(name);
        }
    }
    names
}
