use serde::Serialize;

use super::Example;

pub const DEFAULT_CONTENT_CAP: usize = 200;

/// Generator context: caption, headers, flattened content and the
/// linearized program, in that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelInput {
    pub caption: Vec<String>,
    /// One entry per column.
    pub headers: Vec<String>,
    /// Row-major cell tokens, truncated to the content cap.
    pub content: Vec<String>,
    pub logic: Vec<String>,
}

impl ModelInput {
    /// Single token sequence with a marker opening each segment.
    pub fn to_tokens(&self) -> Vec<String> {
        let mut out = vec!["<caption>".to_string()];
        out.extend(self.caption.iter().cloned());
        out.push("<header>".into());
        for (i, h) in self.headers.iter().enumerate() {
            if i > 0 {
                out.push("|".into());
            }
            out.extend(h.split_whitespace().map(str::to_string));
        }
        out.push("<content>".into());
        out.extend(self.content.iter().cloned());
        out.push("<logic>".into());
        out.extend(self.logic.iter().cloned());
        out
    }

    pub fn to_line(&self) -> String {
        self.to_tokens().join(" ")
    }
}

fn words(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split_whitespace().map(str::to_string)
}

pub fn export_model_input(example: &Example, content_cap: usize) -> ModelInput {
    let t = &example.table;
    let content = t.rows.iter().flat_map(|r| r.iter().flat_map(|c| words(&c.raw))).take(content_cap).collect();
    let logic = match &example.ast {
        Some(ast) => ast.linearize(),
        None => words(&example.logic_str).collect(),
    };
    ModelInput { caption: words(&t.caption).collect(), headers: t.columns.clone(), content, logic }
}
