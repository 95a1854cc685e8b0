//! Logical-form programs: concrete syntax, tree, printer and linearizer.
//!
//! The serialized form is `name { arg ; arg ; ... }`, where each argument is
//! either a nested call or a run of words forming one text node. Braces and
//! semicolons delimit tokens even without surrounding spaces. A trailing
//! `= true` marker, as written in released data, is accepted and dropped.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{SyntaxError, SyntaxErrorKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Func(FuncNode),
    Text(TextNode),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FuncNode {
    pub name: String,
    pub children: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TextNode {
    pub text: String,
}

/// A whole program. The root is always a function node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ast {
    pub root: FuncNode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStats {
    pub total_nodes: usize,
    pub function_nodes: usize,
    pub text_nodes: usize,
    pub linearized_length: usize,
}

impl Node {
    pub fn func(name: impl Into<String>, children: Vec<Node>) -> Node {
        Node::Func(FuncNode { name: name.into(), children })
    }

    /// A text node; interior whitespace is collapsed to single spaces.
    pub fn text(text: impl AsRef<str>) -> Node {
        Node::Text(TextNode { text: collapse(text.as_ref()) })
    }

    pub fn as_func(&self) -> Option<&FuncNode> {
        match self {
            Node::Func(f) => Some(f),
            Node::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Node::Text(t) => Some(&t.text),
            Node::Func(_) => None,
        }
    }

    fn write_to(&self, out: &mut String) {
        match self {
            Node::Text(t) => out.push_str(&t.text),
            Node::Func(f) => f.write_to(out),
        }
    }

    fn linearize_into(&self, out: &mut Vec<String>) {
        match self {
            Node::Text(t) => out.extend(t.text.split_whitespace().map(str::to_string)),
            Node::Func(f) => f.linearize_into(out),
        }
    }

    fn count(&self, stats: &mut NodeStats) {
        match self {
            Node::Text(_) => stats.text_nodes += 1,
            Node::Func(f) => {
                stats.function_nodes += 1;
                f.children.iter().for_each(|c| c.count(stats));
            }
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Node)) {
        visit(self);
        if let Node::Func(f) = self {
            f.children.iter().for_each(|c| c.walk(visit));
        }
    }
}

impl FuncNode {
    pub fn new(name: impl Into<String>, children: Vec<Node>) -> Self {
        FuncNode { name: name.into(), children }
    }

    fn write_to(&self, out: &mut String) {
        out.push_str(&self.name);
        out.push_str(" {");
        for (i, c) in self.children.iter().enumerate() {
            out.push_str(if i == 0 { " " } else { " ; " });
            c.write_to(out);
        }
        out.push_str(" }");
    }

    fn linearize_into(&self, out: &mut Vec<String>) {
        out.push(self.name.clone());
        out.push("{".into());
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                out.push(";".into());
            }
            c.linearize_into(out);
        }
        out.push("}".into());
    }
}

impl Ast {
    pub fn new(root: FuncNode) -> Self {
        Ast { root }
    }

    /// Canonical single-line serialization.
    pub fn to_logic_str(&self) -> String {
        let mut out = String::new();
        self.root.write_to(&mut out);
        out
    }

    /// Depth-first tokens: function names, braces, separators and the
    /// whitespace-split words of text nodes.
    pub fn linearize(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.root.linearize_into(&mut out);
        out
    }

    pub fn node_stats(&self) -> NodeStats {
        let mut stats = NodeStats { total_nodes: 0, function_nodes: 1, text_nodes: 0, linearized_length: 0 };
        self.root.children.iter().for_each(|c| c.count(&mut stats));
        stats.total_nodes = stats.function_nodes + stats.text_nodes;
        stats.linearized_length = self.linearize().len();
        stats
    }

    /// Names of every function node, pre-order, root first.
    pub fn function_names(&self) -> Vec<&str> {
        let mut out = vec![self.root.name.as_str()];
        for c in &self.root.children {
            c.walk(&mut |n| {
                if let Node::Func(f) = n {
                    out.push(f.name.as_str());
                }
            });
        }
        out
    }

    /// Text of every text node, pre-order.
    pub fn text_leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for c in &self.root.children {
            c.walk(&mut |n| {
                if let Node::Text(t) = n {
                    out.push(t.text.as_str());
                }
            });
        }
        out
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_logic_str())
    }
}

impl std::str::FromStr for Ast {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_logic_str(s)
    }
}

pub fn print_logic_str(ast: &Ast) -> String {
    ast.to_logic_str()
}

pub fn linearize(ast: &Ast) -> Vec<String> {
    ast.linearize()
}

pub fn node_stats(ast: &Ast) -> NodeStats {
    ast.node_stats()
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Sep,
    Word(&'a str),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    peeked: Option<(Tok<'a>, usize)>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, peeked: None }
    }

    fn lex(&mut self) -> (Tok<'a>, usize) {
        let bytes = self.src.as_bytes();
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
        let start = self.pos;
        if start >= bytes.len() {
            return (Tok::End, start);
        }
        let tok = match bytes[start] {
            b'{' => Tok::Open,
            b'}' => Tok::Close,
            b';' => Tok::Sep,
            _ => {
                let rest = &self.src[start..];
                let len = rest.find(|c: char| c.is_whitespace() || matches!(c, '{' | '}' | ';')).unwrap_or(rest.len());
                self.pos += len;
                return (Tok::Word(&rest[..len]), start);
            }
        };
        self.pos += 1;
        (tok, start)
    }

    fn peek(&mut self) -> (Tok<'a>, usize) {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex());
        }
        self.peeked.unwrap()
    }

    fn next(&mut self) -> (Tok<'a>, usize) {
        self.peeked.take().unwrap_or_else(|| self.lex())
    }
}

fn err(offset: usize, kind: SyntaxErrorKind, message: impl Into<String>) -> SyntaxError {
    SyntaxError { offset, kind, message: message.into() }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
}

impl<'a> Parser<'a> {
    fn expr(&mut self, after_sep: bool) -> Result<Node, SyntaxError> {
        let mut words: Vec<(&str, usize)> = Vec::new();
        while let (Tok::Word(w), at) = self.lexer.peek() {
            self.lexer.next();
            words.push((w, at));
        }
        let (tok, at) = self.lexer.peek();
        match tok {
            Tok::Open => {
                let (name, name_at) = match words.as_slice() {
                    [] => return Err(err(at, SyntaxErrorKind::MissingFunctionName, "`{` without a function name")),
                    [one] => *one,
                    [_, (_, second), ..] => {
                        return Err(err(
                            *second,
                            SyntaxErrorKind::MultiWordFunctionName,
                            "function name must be a single word",
                        ))
                    }
                };
                self.lexer.next();
                let children = self.args(name_at)?;
                Ok(Node::func(name, children))
            }
            _ if words.is_empty() => {
                let kind = if after_sep && tok == Tok::Close {
                    SyntaxErrorKind::DanglingSeparator
                } else if tok == Tok::End {
                    SyntaxErrorKind::UnbalancedBraces
                } else {
                    SyntaxErrorKind::EmptyArgument
                };
                let msg = match kind {
                    SyntaxErrorKind::DanglingSeparator => "`;` followed by `}`",
                    SyntaxErrorKind::UnbalancedBraces => "unexpected end of input",
                    _ => "empty argument",
                };
                Err(err(at, kind, msg))
            }
            _ => Ok(Node::text(words.iter().map(|(w, _)| *w).collect::<Vec<_>>().join(" "))),
        }
    }

    fn args(&mut self, open_at: usize) -> Result<Vec<Node>, SyntaxError> {
        let mut children = Vec::new();
        let mut after_sep = false;
        loop {
            children.push(self.expr(after_sep)?);
            match self.lexer.next() {
                (Tok::Sep, _) => after_sep = true,
                (Tok::Close, _) => return Ok(children),
                (Tok::End, at) => {
                    return Err(err(
                        at,
                        SyntaxErrorKind::UnbalancedBraces,
                        format!("`{{` at byte {open_at} is never closed"),
                    ))
                }
                (tok, at) => return Err(err(at, SyntaxErrorKind::EmptyArgument, format!("unexpected {tok:?}"))),
            }
        }
    }
}

/// Parses a serialized logical form.
pub fn parse_logic_str(text: &str) -> Result<Ast, SyntaxError> {
    let mut p = Parser { lexer: Lexer::new(text) };
    let root = match p.expr(false)? {
        Node::Func(f) => f,
        Node::Text(_) => {
            return Err(err(0, SyntaxErrorKind::NotAFunction, "a program must start with a function call"))
        }
    };
    let mut trailing: Vec<(&str, usize)> = Vec::new();
    loop {
        match p.lexer.next() {
            (Tok::End, _) => break,
            (Tok::Word(w), at) => trailing.push((w, at)),
            (Tok::Close, at) => return Err(err(at, SyntaxErrorKind::UnbalancedBraces, "unmatched `}`")),
            (_, at) => return Err(err(at, SyntaxErrorKind::TrailingInput, "unexpected input after program")),
        }
    }
    let tail: String = trailing.iter().map(|(w, _)| *w).collect();
    if !(tail.is_empty() || tail == "=true") {
        return Err(err(trailing[0].1, SyntaxErrorKind::TrailingInput, "only `= true` may follow the program"));
    }
    Ok(Ast { root })
}
