use super::backend::Message;
use crate::kernel::Kernel;
use crate::remark::{render_for_prompt, RemarkSet};

pub const SYSTEM_PROMPT: &str = "\
You are an expert C performance engineer. You rewrite C source code so that an \
optimizing compiler can auto-vectorize its loops.
Rules:
- Preserve the observable behaviour of the program exactly.
- Keep the function name, its signature and all global declarations unchanged.
- Work at the source level only: do not use SIMD intrinsics, vector types or inline assembly.
- Reply with the complete revised source file in a single ```c fenced code block.";

pub const TASK: &str =
    "Refactor the following C kernel so that the compiler can auto-vectorize its loop.";

/// System message plus one user message: task, fenced source, then remarks
/// and diagnostics when given.
pub fn build_prompt(kernel: &Kernel, remarks: Option<&RemarkSet>, diagnostics: Option<&str>) -> Vec<Message> {
    let mut user = format!("{TASK}\n\n```c\n{}\n```\n", kernel.source.trim_end());
    if let Some(set) = remarks {
        user.push_str("\nCompiler optimization remarks:\n");
        user.push_str(&render_for_prompt(set));
        user.push('\n');
    }
    if let Some(d) = diagnostics.map(str::trim).filter(|d| !d.is_empty()) {
        user.push_str("\nCompiler diagnostics:\n");
        user.push_str(d);
        user.push('\n');
    }
    vec![Message::system(SYSTEM_PROMPT), Message::user(user)]
}

/// Follow-up after a draft fails the syntax check. Carries only the diagnostics.
pub fn lint_retry_message(diagnostics: &str) -> Message {
    Message::user(format!(
        "The previous draft does not compile. Fix these errors and reply with the complete \
         corrected source in a single ```c fenced code block.\n\n{}\n",
        diagnostics.trim_end()
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("response contains no code")]
pub struct EmptyDraft;

/// Body of the last fenced block; the whole reply when there is no fence.
pub fn extract_code(response: &str) -> Result<String, EmptyDraft> {
    let mut blocks: Vec<String> = Vec::new();
    let mut open: Option<String> = None;
    for line in response.lines() {
        if line.trim_start().starts_with("```") {
            match open.take() {
                Some(body) => blocks.push(body),
                None => open = Some(String::new()),
            }
        } else if let Some(body) = open.as_mut() {
            body.push_str(line);
            body.push('\n');
        }
    }
    // An unterminated trailing fence still counts.
    let code = match (blocks.pop(), open) {
        (_, Some(tail)) if !tail.trim().is_empty() => tail,
        (Some(last), _) => last,
        (None, _) => response.trim().to_string(),
    };
    if code.trim().is_empty() {
        Err(EmptyDraft)
    } else {
        Ok(code)
    }
}
