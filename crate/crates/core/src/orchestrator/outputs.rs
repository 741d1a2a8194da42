//! Lenient parsers for the brace-delimited formats the agents are asked to
//! produce. Models drift between `{a: b, c: d}`, JSON, and prose-wrapped
//! variants; all of those are accepted here.

use std::sync::OnceLock;

use regex::Regex;

/// Lowercase, unquoted, whitespace-collapsed name without a leading article
/// or a `#k` disambiguation suffix.
pub fn normalize_name(name: &str) -> String {
    let trimmed = name
        .trim()
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '`' || c == '*')
        .trim_end_matches(['.', ',', ';'])
        .to_lowercase();
    let base = match trimmed.rsplit_once('#') {
        Some((head, tail)) if !tail.is_empty() && tail.chars().all(|c| c.is_ascii_digit()) => head,
        _ => trimmed.as_str(),
    };
    let words: Vec<&str> = base.split_whitespace().collect();
    let words = match words.first() {
        Some(&("a" | "an" | "the")) if words.len() > 1 => &words[1..],
        _ => &words[..],
    };
    words.join(" ")
}

fn clean(s: &str) -> String {
    s.trim()
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '`')
        .trim()
        .to_string()
}

fn brace_body(text: &str) -> &str {
    match (text.find('{'), text.rfind('}')) {
        (Some(a), Some(b)) if b > a => &text[a + 1..b],
        _ => text,
    }
}

/// Parses `{name: characteristics, ...}`. Entries may be separated by `,`,
/// `;` or newlines; a fragment without a colon continues the previous
/// entry's characteristics (so `{apple: red, glossy}` keeps "red, glossy").
pub fn parse_pairs(text: &str) -> Vec<(String, String)> {
    let body = brace_body(text);
    let mut entries: Vec<(String, String)> = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut pieces: Vec<(&str, Option<char>)> = Vec::new();
    for (i, ch) in body.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' | ';' | '\n' if depth <= 0 => {
                pieces.push((&body[start..i], Some(ch)));
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    pieces.push((&body[start..], None));

    let mut prev_sep: Option<char> = None;
    for (piece, sep) in pieces {
        match piece.split_once(':') {
            Some((name, value)) if !clean(name).is_empty() => {
                entries.push((clean(name), clean(value)));
            }
            _ => {
                let extra = clean(piece);
                if let (Some(last), false) = (entries.last_mut(), extra.is_empty()) {
                    let joiner = if prev_sep == Some(';') { "; " } else { ", " };
                    if last.1.is_empty() {
                        last.1 = extra;
                    } else {
                        last.1 = format!("{}{}{}", last.1, joiner, extra);
                    }
                }
            }
        }
        prev_sep = sep;
    }
    entries
}

/// Parses `{name: [x, y, w, h, d], ...}` into names and number lists.
pub fn parse_layout_entries(text: &str) -> Result<Vec<(String, Vec<f64>)>, String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r#"([^{}\[\]:,;\n]+?)\s*:\s*\[([^\[\]]*)\]"#).unwrap());
    let mut out = Vec::new();
    for cap in re.captures_iter(text) {
        let name = clean(&cap[1]);
        if name.is_empty() {
            continue;
        }
        let nums = cap[2]
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("\"{}\" in the box of {name}", t.trim())))
            .collect::<Result<Vec<_>, _>>()?;
        out.push((name, nums));
    }
    Ok(out)
}

/// Parses `{(subject, predicate, object), ...}`; `[s, p, o]` triples are
/// accepted too. Predicates may contain commas.
pub fn parse_triples(text: &str) -> Vec<(String, String, String)> {
    static PAREN: OnceLock<Regex> = OnceLock::new();
    static BRACKET: OnceLock<Regex> = OnceLock::new();
    let paren = PAREN.get_or_init(|| Regex::new(r"\(([^()]*)\)").unwrap());
    let bracket = BRACKET.get_or_init(|| Regex::new(r"\[([^\[\]]*)\]").unwrap());
    let re = if paren.is_match(text) { paren } else { bracket };
    re.captures_iter(text)
        .filter_map(|cap| {
            let parts: Vec<String> = cap[1].split(',').map(clean).collect();
            if parts.len() < 3 || parts.iter().any(|p| p.is_empty()) {
                return None;
            }
            let subject = parts[0].clone();
            let object = parts[parts.len() - 1].clone();
            let predicate = parts[1..parts.len() - 1].join(", ");
            Some((subject, predicate, object))
        })
        .collect()
}

/// Plain-text background description, unwrapped from quotes or a
/// one-entry `{"background": "..."}` dictionary.
pub fn parse_background(text: &str) -> String {
    let t = text.trim();
    if t.starts_with('{') {
        if let Ok(serde_json::Value::Object(map)) = crate::jsonfix::decode_lenient::<serde_json::Value>(t) {
            if let Some(s) = map.values().find_map(|v| v.as_str()) {
                return clean(s);
            }
        }
        let inner = clean(brace_body(t));
        return match inner.split_once(':') {
            Some((k, v)) if normalize_name(k) == "background" => clean(v),
            _ => inner,
        };
    }
    clean(t)
}
