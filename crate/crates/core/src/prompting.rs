//! Prompt construction and cleanup of backend responses.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{spec_feature_sentence, ModelSpec};

const DIALOGUE_PREAMBLE: &str = "Bot: Ask me any questions about the MiniZinc. MiniZinc is a high-level constraint programming language used for modelling and solving combinatorial optimisation problems.\n\
Me: Can I ask you about codes written in MiniZinc as an example? Can you show only the source code?\n\
Bot: Yes. Tell me what kind of language optimisation problems MiniZinc would like me to generate for you.\n";

const COMMENT_DIRECTIVE: &str = "Put the Bot comments with % symbol.";

pub const REPAIR_PREFIX: &str = "Me: Fix the minizinc code. The Error code is ";
pub const BOT_TURN: &str = "Bot:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptText {
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairInstruction {
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("there is no error output to repair")]
    EmptyErrorOutput,
    #[error("the backend response contains no model text")]
    EmptyModel,
}

/// The scripted Bot/Me dialogue with the feature sentence as the last user turn.
pub fn build_generation_prompt(spec: &ModelSpec) -> PromptText {
    let sentence = spec_feature_sentence(spec);
    PromptText {
        content: format!("{DIALOGUE_PREAMBLE}Me: {sentence} {COMMENT_DIRECTIVE}\n{BOT_TURN}"),
    }
}

pub fn build_repair_instruction(error_output: &str) -> Result<RepairInstruction, PromptError> {
    if error_output.trim().is_empty() {
        return Err(PromptError::EmptyErrorOutput);
    }
    Ok(RepairInstruction {
        content: format!("{REPAIR_PREFIX}{error_output} {BOT_TURN}"),
    })
}

/// Turns a raw completion into model source.
///
/// Dialogue residue is cut at the first `Me:` anywhere, or at a `Bot:` that
/// opens a line (a `% Bot: ...` comment is kept). A fenced code block, if
/// present, is unwrapped.
pub fn extract_model_text(raw: &str) -> Result<String, PromptError> {
    let text = cut_dialogue_residue(raw);
    let text = unfence(text.trim());
    let text = text.trim();
    if text.is_empty() {
        return Err(PromptError::EmptyModel);
    }
    Ok(text.to_string())
}

fn cut_dialogue_residue(raw: &str) -> &str {
    let mut cut = raw.find("Me:").unwrap_or(raw.len());
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        if offset >= cut {
            break;
        }
        let indent = line.len() - line.trim_start().len();
        if line.trim_start().starts_with(BOT_TURN) {
            cut = cut.min(offset + indent);
            break;
        }
        offset += line.len();
    }
    &raw[..cut]
}

fn unfence(text: &str) -> &str {
    let Some(open) = text.find("```") else {
        return text;
    };
    // Skip the info string (```minizinc) up to the end of the fence line.
    let after_open = &text[open + 3..];
    let body_start = match after_open.find('\n') {
        Some(nl) => nl + 1,
        None => return text,
    };
    let body = &after_open[body_start..];
    match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    }
}
