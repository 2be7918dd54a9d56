use serde_json::Value;

use super::LlmAnswer;
use crate::corpus::QuestionType;
use crate::metrics::normalize_answer;

/// Byte ranges of balanced `{...}` spans in start order. Braces inside
/// double-quoted strings are ignored.
fn object_spans(raw: &str) -> impl Iterator<Item = &str> {
    let bytes = raw.as_bytes();
    (0..bytes.len()).filter(move |&i| bytes[i] == b'{').filter_map(move |start| {
        let mut depth = 0usize;
        let mut in_str = false;
        let mut escaped = false;
        for (i, &b) in bytes.iter().enumerate().skip(start) {
            if in_str {
                match b {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(&raw[start..=i]);
                    }
                }
                _ => {}
            }
        }
        None
    })
}

fn answer_value(span: &str) -> Option<Value> {
    let parse = |s: &str| match serde_json::from_str::<Value>(s) {
        Ok(Value::Object(mut map)) => map.remove("answer"),
        _ => None,
    };
    parse(span).or_else(|| parse(&span.replace('\'', "\"")))
}

/// Extracts the `answer` field of the first JSON object in `raw` that has
/// one, accepting single-quoted pseudo-JSON as a fallback. Never panics.
pub fn parse_answer(raw: &str, qtype: QuestionType) -> LlmAnswer {
    let Some(value) = object_spans(raw).find_map(answer_value) else {
        return LlmAnswer::failed(raw);
    };
    let pieces: Vec<String> = match value {
        Value::String(s) => vec![s],
        Value::Array(items) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Value::String(s) => out.push(s),
                    _ => return LlmAnswer::failed(raw),
                }
            }
            out
        }
        _ => return LlmAnswer::failed(raw),
    };
    let mut answers: Vec<String> = match qtype {
        QuestionType::SingleVerify => pieces
            .iter()
            .map(|p| normalize_answer(p).trim_end_matches('.').to_string())
            .collect(),
        QuestionType::SingleChoose | QuestionType::SingleQuery => pieces
            .iter()
            .flat_map(|p| p.split(','))
            .map(normalize_answer)
            .collect(),
    };
    answers.retain(|a| !a.is_empty());
    answers.sort();
    answers.dedup();
    let verify_ok = qtype != QuestionType::SingleVerify
        || answers.iter().all(|a| a == "yes" || a == "no");
    if answers.is_empty() || !verify_ok {
        return LlmAnswer::failed(raw);
    }
    LlmAnswer { raw: raw.to_string(), answers, parse_ok: true }
}
