//! Zero-shot question answering over retrieved context.
//!
//! Requests are built from a fixed system prompt plus a user message holding
//! the retrieved reports, their diagnoses, the question and its options. Any
//! [`LlmClient`] can answer them; [`MockLlm`] is a deterministic offline
//! stand-in and [`HttpLlm`] speaks a chat-completions JSON protocol.

mod http;
mod mock;
mod parse;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::corpus::{QaItem, QuestionType};
use crate::error::{Error, Result};
use crate::retrieval::{concat_context, RetrievedContext};

pub use http::{HttpConfig, HttpLlm, API_KEY_ENV};
pub use mock::MockLlm;
pub use parse::parse_answer;

pub const DEFAULT_TEMPERATURE: f64 = 1.0;
pub const DEFAULT_MAX_TOKENS: u32 = 256;

/// System prompt template; `${question_prompt}` is the only placeholder.
pub const SYSTEM_TEMPLATE: &str = "Given the closest ECG retrieved reports and diagnoses to the test ECG as discovered by a multimodal model. Your job is to analyze the report and only answer the question. Output should be JSON of the following structure: {'answer': ...}.\nQuestion Specific Prompt: ${question_prompt}\nThink step-by-step to generate an answer without any explanation.";

pub const USER_TEMPLATE: &str = "ECG Reports:\n${reports}\nDiagnoses:\n${diagnoses}\nQuestion: ${question}";

pub const VERIFY_PROMPT: &str = "Answer should be only yes and no.";
pub const CHOOSE_PROMPT: &str = "Choose correct answer from the options provided below. If none of the options is correct, the answer will be 'none'. If both conditions are present then provide both options as an answer.";
pub const QUERY_PROMPT: &str = "Choose correct answers from the options provided below. Multiple answers can be selected; provide every option that applies as an answer.";

pub const REFINE_SYSTEM: &str = "Rewrite the draft ECG report for clarity and fluency. Use only facts present in the draft report and the retrieved reports and diagnoses. Do not add new diagnoses. Output only the rewritten report.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn new(system: String, user: String) -> Self {
        Self {
            system,
            user,
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    pub fn with_sampling(mut self, temperature: f64, max_tokens: u32) -> Self {
        self.temperature = temperature;
        self.max_tokens = max_tokens;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmAnswer {
    pub raw: String,
    /// Normalized, sorted and deduplicated. Empty whenever `parse_ok` is false.
    pub answers: Vec<String>,
    pub parse_ok: bool,
}

impl LlmAnswer {
    pub fn failed(raw: impl Into<String>) -> Self {
        Self { raw: raw.into(), answers: Vec::new(), parse_ok: false }
    }
}

/// A chat endpoint. Implementations must tolerate concurrent calls.
pub trait LlmClient: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String>;
}

impl<C: LlmClient + ?Sized> LlmClient for &C {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        (**self).complete(request)
    }
}

impl<C: LlmClient + ?Sized> LlmClient for Box<C> {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        (**self).complete(request)
    }
}

pub fn build_question_prompt(qtype: QuestionType) -> &'static str {
    match qtype {
        QuestionType::SingleVerify => VERIFY_PROMPT,
        QuestionType::SingleChoose => CHOOSE_PROMPT,
        QuestionType::SingleQuery => QUERY_PROMPT,
    }
}

/// Substitutes `${name}` placeholders in a single pass. Substituted values are
/// not rescanned; an unknown or unterminated placeholder is an internal error.
fn render(template: &str, vars: &[(&str, &str)]) -> Result<String> {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find('}')
            .ok_or_else(|| Error::Internal("unterminated placeholder in prompt template".into()))?;
        let name = &after[..end];
        let value = vars
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Internal(format!("unsubstituted placeholder ${{{name}}}")))?;
        out.push_str(value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn system_prompt(qtype: QuestionType) -> Result<String> {
    render(SYSTEM_TEMPLATE, &[("question_prompt", build_question_prompt(qtype))])
}

pub fn build_qa_request(ctx: &RetrievedContext, item: &QaItem) -> Result<ChatRequest> {
    if ctx.is_empty() {
        return Err(Error::Validation(format!("qa item {:?}: empty retrieved context", item.id)));
    }
    let (reports, diagnoses) = concat_context(ctx);
    let mut user = render(
        USER_TEMPLATE,
        &[("reports", &reports), ("diagnoses", &diagnoses), ("question", &item.question)],
    )?;
    if !item.options.is_empty() {
        let options = serde_json::to_string(&item.options)
            .map_err(|e| Error::Internal(format!("options: {e}")))?;
        user.push_str("\nOptions: ");
        user.push_str(&options);
    }
    Ok(ChatRequest::new(system_prompt(item.qtype)?, user))
}

/// Asks until an answer parses, making at most `retries + 1` calls. Transport
/// errors and malformed replies both consume an attempt.
pub fn answer_request<C: LlmClient + ?Sized>(
    client: &C,
    request: &ChatRequest,
    qtype: QuestionType,
    retries: u32,
) -> LlmAnswer {
    let mut last = LlmAnswer::failed("");
    for attempt in 0..=retries {
        match client.complete(request) {
            Ok(raw) => {
                let parsed = parse_answer(&raw, qtype);
                if parsed.parse_ok {
                    return parsed;
                }
                debug!("attempt {}: unparseable answer {:?}", attempt + 1, raw);
                last = parsed;
            }
            Err(e) => {
                warn!("attempt {}: {e}", attempt + 1);
                last = LlmAnswer::failed("");
            }
        }
    }
    last
}

/// Builds the request with default sampling and answers it. Fails only when
/// no request can be built.
pub fn answer_question<C: LlmClient + ?Sized>(
    client: &C,
    ctx: &RetrievedContext,
    item: &QaItem,
    retries: u32,
) -> Result<LlmAnswer> {
    let request = build_qa_request(ctx, item)?;
    Ok(answer_request(client, &request, item.qtype, retries))
}

pub fn build_refine_request(draft: &str, ctx: &RetrievedContext) -> ChatRequest {
    let (reports, diagnoses) = concat_context(ctx);
    let user = format!(
        "Draft report:\n{draft}\n\nRetrieved reports:\n{reports}\n\nRetrieved diagnoses:\n{diagnoses}"
    );
    ChatRequest::new(REFINE_SYSTEM.to_string(), user)
}

/// LLM rewrite of a draft report; any failure or blank reply yields the draft.
pub fn refine_report<C: LlmClient + ?Sized>(client: &C, draft: &str, ctx: &RetrievedContext) -> String {
    refine_request(client, &build_refine_request(draft, ctx), draft)
}

pub fn refine_request<C: LlmClient + ?Sized>(client: &C, request: &ChatRequest, draft: &str) -> String {
    match client.complete(request) {
        Ok(text) if !text.trim().is_empty() => text.trim().to_string(),
        Ok(_) => draft.to_string(),
        Err(e) => {
            warn!("refinement failed, keeping draft: {e}");
            draft.to_string()
        }
    }
}
