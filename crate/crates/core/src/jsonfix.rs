//! Strict-then-repaired JSON decoding for model output.
//!
//! Exactly one repair pass is attempted: keep the text between the first
//! `{` and the last `}`, then rewrite single-quoted strings as
//! double-quoted ones.

use serde::de::DeserializeOwned;

/// Decodes `text` as JSON, falling back to one repair pass.
///
/// On failure returns the error from the strict attempt, which points at
/// the original text.
pub fn decode_lenient<T: DeserializeOwned>(text: &str) -> Result<T, serde_json::Error> {
    let strict = match serde_json::from_str::<T>(text) {
        Ok(v) => return Ok(v),
        Err(e) => e,
    };
    match repair(text) {
        Some(fixed) => serde_json::from_str::<T>(&fixed).map_err(|_| strict),
        None => Err(strict),
    }
}

pub fn repair(text: &str) -> Option<String> {
    let inner = outermost_braces(text)?;
    Some(normalize_single_quotes(inner))
}

pub fn outermost_braces(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    (end > start).then(|| &text[start..=end])
}

/// Rewrites `'...'` string literals to `"..."`. A single quote only closes
/// a literal when the next non-space character is structural (`,:}]`) or
/// the input ends, so apostrophes inside words survive.
pub fn normalize_single_quotes(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '"' => {
                out.push('"');
                i += 1;
                while i < chars.len() {
                    let c = chars[i];
                    out.push(c);
                    i += 1;
                    if c == '\\' && i < chars.len() {
                        out.push(chars[i]);
                        i += 1;
                    } else if c == '"' {
                        break;
                    }
                }
            }
            '\'' => {
                out.push('"');
                i += 1;
                while i < chars.len() {
                    let c = chars[i];
                    if c == '\'' && closes_literal(&chars[i + 1..]) {
                        i += 1;
                        break;
                    }
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' if i + 1 < chars.len() && chars[i + 1] == '\'' => {
                            out.push('\'');
                            i += 1;
                        }
                        _ => out.push(c),
                    }
                    i += 1;
                }
                out.push('"');
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

fn closes_literal(rest: &[char]) -> bool {
    match rest.iter().find(|c| !c.is_whitespace()) {
        None => true,
        Some(c) => matches!(c, ',' | ':' | '}' | ']'),
    }
}
