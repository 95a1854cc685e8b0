//! Deterministic text from programs: per-type surface templates and a
//! clause-per-node interpretation.
//!
//! All wording lives in `resources/realization.txt`; [`Resources::parse`]
//! loads an alternative file with the same format.

mod interpret;
mod template;

use std::collections::HashMap;
use std::sync::LazyLock;

use crate::error::RealizeError;
use crate::logic_types::LogicType;

pub use interpret::{interpret, interpret_clauses, interpret_with};
pub use template::{realize_template, realize_template_with, template_slots};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Word(String),
    Slot(String),
    Group(Vec<Piece>),
}

/// A token pattern with `[slot]`s and optional `( ... )` groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pieces: Vec<Piece>,
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, String> {
        let mut pieces = Vec::new();
        let mut group: Option<Vec<Piece>> = None;
        for tok in text.split_whitespace() {
            match tok {
                "(" if group.is_some() => return Err("optional groups do not nest".into()),
                "(" => group = Some(Vec::new()),
                ")" => match group.take() {
                    Some(g) if g.is_empty() => return Err("empty optional group".into()),
                    Some(g) => pieces.push(Piece::Group(g)),
                    None => return Err("unmatched `)`".into()),
                },
                _ => {
                    let piece = match tok.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                        Some(name) if !name.is_empty() && !name.contains(['[', ']']) => Piece::Slot(name.to_string()),
                        _ if tok.contains(['[', ']']) => return Err(format!("malformed slot `{tok}`")),
                        _ => Piece::Word(tok.to_string()),
                    };
                    group.as_mut().unwrap_or(&mut pieces).push(piece);
                }
            }
        }
        if group.is_some() {
            return Err("unclosed `(`".into());
        }
        if pieces.is_empty() {
            return Err("empty pattern".into());
        }
        Ok(Pattern { pieces })
    }

    /// Slots outside optional groups.
    pub fn required_slots(&self) -> Vec<&str> {
        self.pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Slot(s) => Some(s.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Fills the pattern; `None` when a required slot is missing or empty.
    pub fn render(&self, slots: &HashMap<String, String>) -> Option<String> {
        let filled = |name: &str| slots.get(name).map(|v| v.trim()).filter(|v| !v.is_empty());
        let mut out: Vec<&str> = Vec::new();
        for p in &self.pieces {
            match p {
                Piece::Word(w) => out.push(w),
                Piece::Slot(s) => out.push(filled(s)?),
                Piece::Group(g) => {
                    let parts: Option<Vec<&str>> = g
                        .iter()
                        .map(|p| match p {
                            Piece::Word(w) => Some(w.as_str()),
                            Piece::Slot(s) => filled(s),
                            Piece::Group(_) => unreachable!("groups do not nest"),
                        })
                        .collect();
                    if let Some(parts) = parts {
                        out.extend(parts);
                    }
                }
            }
        }
        Some(out.join(" ").split_whitespace().collect::<Vec<_>>().join(" "))
    }
}

/// Templates, interpretation phrases and slot words.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    templates: HashMap<LogicType, Vec<Pattern>>,
    phrases: HashMap<String, Pattern>,
    words: HashMap<String, String>,
}

impl Resources {
    pub fn parse(text: &str) -> Result<Resources, RealizeError> {
        let mut res = Resources::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| RealizeError::Resource { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = pattern`".into()))?;
            let (kind, name) =
                key.trim().split_once('.').ok_or_else(|| err(format!("key `{}` lacks a kind", key.trim())))?;
            let value = value.trim();
            match kind {
                "template" => {
                    let lt: LogicType = name.parse().map_err(err)?;
                    res.templates.entry(lt).or_default().push(Pattern::parse(value).map_err(err)?);
                }
                "phrase" => {
                    res.phrases.insert(name.to_string(), Pattern::parse(value).map_err(err)?);
                }
                "word" => {
                    res.words.insert(name.to_string(), value.to_string());
                }
                other => return Err(err(format!("unknown kind `{other}`"))),
            }
        }
        Ok(res)
    }

    /// The wording shipped with the crate.
    pub fn builtin() -> &'static Resources {
        static BUILTIN: LazyLock<Resources> = LazyLock::new(|| {
            Resources::parse(include_str!("../../resources/realization.txt"))
                .expect("bundled realization resource parses")
        });
        &BUILTIN
    }

    pub fn templates(&self, lt: LogicType) -> &[Pattern] {
        self.templates.get(&lt).map_or(&[], Vec::as_slice)
    }

    pub fn phrase(&self, name: &str) -> Option<&Pattern> {
        self.phrases.get(name)
    }

    pub fn word(&self, key: &str) -> Option<&str> {
        self.words.get(key).map(String::as_str)
    }
}
