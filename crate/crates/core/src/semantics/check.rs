use serde::Serialize;

use super::functions::{ArgType, Function, SemType};
use crate::ast::{Ast, FuncNode, Node};
use crate::error::TypeError;
use crate::table::parse_cell;

/// The literal that denotes the whole table in a view position.
pub const ALL_ROWS: &str = "all_rows";

/// A program annotated with resolved functions and static types.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypedAst {
    pub root: TypedNode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TypedNode {
    Call { func: Function, name: String, args: Vec<TypedNode>, ty: SemType },
    Leaf { text: String, ty: SemType },
}

impl TypedNode {
    pub fn ty(&self) -> SemType {
        match self {
            TypedNode::Call { ty, .. } | TypedNode::Leaf { ty, .. } => *ty,
        }
    }
}

impl TypedAst {
    pub fn root_type(&self) -> SemType {
        self.root.ty()
    }
}

struct Path(Vec<usize>);

impl Path {
    fn render(&self) -> String {
        let mut s = String::from("root");
        for i in &self.0 {
            s.push('.');
            s.push_str(&i.to_string());
        }
        s
    }
}

fn check_call(f: &FuncNode, path: &mut Path) -> Result<TypedNode, TypeError> {
    let func = Function::from_name(&f.name)
        .ok_or_else(|| TypeError::UnknownFunction { name: f.name.clone(), path: path.render() })?;
    let (params, out) = func.signature();
    if params.len() != f.children.len() {
        return Err(TypeError::ArityMismatch {
            name: f.name.clone(),
            path: path.render(),
            expected: params.len(),
            found: f.children.len(),
        });
    }
    let mut args = Vec::with_capacity(params.len());
    for (i, (param, child)) in params.iter().zip(&f.children).enumerate() {
        path.0.push(i);
        let typed = match child {
            Node::Func(g) => {
                let typed = check_call(g, path)?;
                if !param.accepts(typed.ty()) {
                    return Err(TypeError::TypeMismatch {
                        path: path.render(),
                        expected: param.to_string(),
                        found: format!("{} from `{}`", typed.ty(), g.name),
                    });
                }
                typed
            }
            Node::Text(t) => check_leaf(&t.text, *param, path)?,
        };
        path.0.pop();
        args.push(typed);
    }
    Ok(TypedNode::Call { func, name: f.name.clone(), args, ty: out })
}

fn check_leaf(text: &str, param: ArgType, path: &Path) -> Result<TypedNode, TypeError> {
    let mismatch = || TypeError::TypeMismatch {
        path: path.render(),
        expected: param.to_string(),
        found: format!("text `{text}`"),
    };
    let ty = match param {
        ArgType::Exactly(SemType::View) | ArgType::RowOrView if text == ALL_ROWS => SemType::View,
        ArgType::Exactly(SemType::HeaderStr) => SemType::HeaderStr,
        ArgType::Exactly(SemType::Obj) => SemType::Obj,
        ArgType::Exactly(SemType::Number) if parse_cell(text).first_number.is_some() => SemType::Number,
        _ => return Err(mismatch()),
    };
    Ok(TypedNode::Leaf { text: text.to_string(), ty })
}

/// Checks signatures and annotates every node. Column names are bound
/// later, against a concrete table.
pub fn typecheck(ast: &Ast) -> Result<TypedAst, TypeError> {
    let root = check_call(&ast.root, &mut Path(Vec::new()))?;
    if root.ty() != SemType::Bool {
        return Err(TypeError::TypeMismatch {
            path: "root".into(),
            expected: SemType::Bool.to_string(),
            found: root.ty().to_string(),
        });
    }
    Ok(TypedAst { root })
}

/// Like [`typecheck`] but accepts any root type; used for sub-expressions.
pub fn typecheck_expr(f: &FuncNode) -> Result<TypedNode, TypeError> {
    check_call(f, &mut Path(Vec::new()))
}
