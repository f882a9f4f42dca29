//! Syntax tree for the OpenSCAD subset handled by this crate.
//!
//! The grammar covers assignments, module definitions and calls, `for`,
//! `if`/`else`, the primitives `cube`/`sphere`/`cylinder`, the transforms
//! `translate`/`rotate`/`scale`/`mirror` and the booleans
//! `union`/`difference`/`intersection`. Any other call name is treated as a
//! user module call and resolved at evaluation time.
//!
//! Structural equality (`PartialEq`) ignores source spans, so a program
//! re-parsed from its printed form compares equal to the original.

mod lexer;
mod parser;
mod printer;

pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, ParseError};
pub use printer::{print, print_expr, print_stmts};

use serde::Serialize;
use thiserror::Error;

/// Byte range of a statement in its source text, plus the 1-based line of
/// its first token.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub byte_start: usize,
    pub byte_end: usize,
    pub line: usize,
}

impl SourceSpan {
    pub fn new(byte_start: usize, byte_end: usize, line: usize) -> Self {
        debug_assert!(byte_start <= byte_end);
        Self {
            byte_start,
            byte_end,
            line,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(self, other: SourceSpan) -> SourceSpan {
        let first = if self.byte_start <= other.byte_start {
            self
        } else {
            other
        };
        SourceSpan {
            byte_start: self.byte_start.min(other.byte_start),
            byte_end: self.byte_end.max(other.byte_end),
            line: first.line,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge
            | BinaryOp::Eq
            | BinaryOp::Ne => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 5,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "%",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expr {
    Number(f64),
    Bool(bool),
    Vector(Vec<Expr>),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `[start : end]` or `[start : step : end]`; end is inclusive.
    Range {
        start: Box<Expr>,
        step: Option<Box<Expr>>,
        end: Box<Expr>,
    },
}

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Expr::Number(v) => Some(*v),
            _ => None,
        }
    }

    /// Numeric components of a vector literal whose items are all number
    /// literals.
    pub fn as_number_vector(&self) -> Option<Vec<f64>> {
        match self {
            Expr::Vector(items) => items.iter().map(Expr::as_number).collect(),
            _ => None,
        }
    }

    /// `self * factor`, folded when `self` is a literal.
    pub fn scaled(&self, factor: f64) -> Expr {
        match self {
            Expr::Number(v) => Expr::Number(round_literal(v * factor)),
            other => Expr::binary(BinaryOp::Mul, other.clone(), Expr::Number(factor)),
        }
    }
}

/// Rounds a generated literal to a short decimal so printed programs stay
/// readable; never rounds a nonzero value to zero.
pub fn round_literal(v: f64) -> f64 {
    let r = (v * 1e4).round() / 1e4;
    if r == 0.0 && v != 0.0 {
        v
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Param {
    pub name: String,
    pub default: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Call {
    pub name: String,
    pub args: Vec<Expr>,
    pub named: Vec<(String, Expr)>,
    pub child: Option<Box<Stmt>>,
}

impl Call {
    /// Argument bound to `name`, falling back to positional slot `pos`.
    pub fn arg(&self, name: &str, pos: Option<usize>) -> Option<&Expr> {
        self.named
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
            .or_else(|| pos.and_then(|p| self.args.get(p)))
    }

    pub fn arg_mut(&mut self, name: &str, pos: Option<usize>) -> Option<&mut Expr> {
        if let Some(i) = self.named.iter().position(|(n, _)| n == name) {
            return Some(&mut self.named[i].1);
        }
        pos.and_then(move |p| self.args.get_mut(p))
    }
}

/// Classification of a call name against the supported vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallKind {
    Primitive,
    Transform,
    Boolean,
    User,
}

pub const PRIMITIVES: [&str; 3] = ["cube", "sphere", "cylinder"];
pub const TRANSFORMS: [&str; 4] = ["translate", "rotate", "scale", "mirror"];
pub const BOOLEANS: [&str; 3] = ["union", "difference", "intersection"];

pub fn call_kind(name: &str) -> CallKind {
    if PRIMITIVES.contains(&name) {
        CallKind::Primitive
    } else if TRANSFORMS.contains(&name) {
        CallKind::Transform
    } else if BOOLEANS.contains(&name) {
        CallKind::Boolean
    } else {
        CallKind::User
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StmtKind {
    Assign {
        name: String,
        value: Expr,
    },
    ModuleDef {
        name: String,
        params: Vec<Param>,
        body: Box<Stmt>,
    },
    Call(Call),
    /// `{ ... }`; comments directly before the closing brace are kept in
    /// `trailing_comments`.
    Group {
        stmts: Vec<Stmt>,
        trailing_comments: Vec<String>,
    },
    For {
        var: String,
        iter: Expr,
        body: Box<Stmt>,
    },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
    /// Set from a `// Block <n>` comment directly preceding the statement.
    pub block_id: Option<u32>,
    /// Other comments preceding the statement, verbatim.
    pub comments: Vec<String>,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.block_id == other.block_id
            && self.comments == other.comments
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Self {
            kind,
            span: SourceSpan::default(),
            block_id: None,
            comments: Vec::new(),
        }
    }

    pub fn call(
        name: &str,
        args: Vec<Expr>,
        named: Vec<(&str, Expr)>,
        child: Option<Stmt>,
    ) -> Self {
        Stmt::new(StmtKind::Call(Call {
            name: name.to_string(),
            args,
            named: named.into_iter().map(|(n, e)| (n.to_string(), e)).collect(),
            child: child.map(Box::new),
        }))
    }

    pub fn as_call(&self) -> Option<&Call> {
        match &self.kind {
            StmtKind::Call(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_assign(&self) -> bool {
        matches!(self.kind, StmtKind::Assign { .. })
    }

    /// Visits this statement and every nested statement, parents first.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::Assign { .. } => {}
            StmtKind::ModuleDef { body, .. } => body.walk(f),
            StmtKind::Call(c) => {
                if let Some(child) = &c.child {
                    child.walk(f);
                }
            }
            StmtKind::Group { stmts, .. } => stmts.iter().for_each(|s| s.walk(f)),
            StmtKind::For { body, .. } => body.walk(f),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.walk(f);
                if let Some(e) = else_branch {
                    e.walk(f);
                }
            }
        }
    }

    /// Mutable pre-order traversal.
    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut Stmt)) {
        f(self);
        match &mut self.kind {
            StmtKind::Assign { .. } => {}
            StmtKind::ModuleDef { body, .. } => body.walk_mut(f),
            StmtKind::Call(c) => {
                if let Some(child) = &mut c.child {
                    child.walk_mut(f);
                }
            }
            StmtKind::Group { stmts, .. } => stmts.iter_mut().for_each(|s| s.walk_mut(f)),
            StmtKind::For { body, .. } => body.walk_mut(f),
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.walk_mut(f);
                if let Some(e) = else_branch {
                    e.walk_mut(f);
                }
            }
        }
    }

    /// Number of statements in the subtree rooted here, used to address
    /// nested statements by pre-order index.
    pub fn count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Mutable access to the `index`-th statement in pre-order.
    pub fn nth_mut(&mut self, index: usize) -> Option<&mut Stmt> {
        fn go<'a>(s: &'a mut Stmt, index: &mut usize) -> Option<&'a mut Stmt> {
            if *index == 0 {
                return Some(s);
            }
            *index -= 1;
            match &mut s.kind {
                StmtKind::Assign { .. } => None,
                StmtKind::ModuleDef { body, .. } => go(body, index),
                StmtKind::Call(c) => c.child.as_deref_mut().and_then(|ch| go(ch, index)),
                StmtKind::Group { stmts, .. } => {
                    for st in stmts.iter_mut() {
                        let n = st.count();
                        if *index < n {
                            return go(st, index);
                        }
                        *index -= n;
                    }
                    None
                }
                StmtKind::For { body, .. } => go(body, index),
                StmtKind::If {
                    then_branch,
                    else_branch,
                    ..
                } => {
                    let n = then_branch.count();
                    if *index < n {
                        return go(then_branch, index);
                    }
                    *index -= n;
                    else_branch.as_deref_mut().and_then(|e| go(e, index))
                }
            }
        }
        let mut i = index;
        go(self, &mut i)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Program {
    pub statements: Vec<Stmt>,
    /// Comments after the last statement.
    pub trailing_comments: Vec<String>,
    #[serde(skip)]
    pub source_text: String,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements && self.trailing_comments == other.trailing_comments
    }
}

impl Program {
    pub fn from_statements(statements: Vec<Stmt>) -> Self {
        let mut p = Program {
            statements,
            trailing_comments: Vec::new(),
            source_text: String::new(),
        };
        p.source_text = print(&p);
        p
    }

    /// Drops every `// Block <n>` annotation, at any depth.
    pub fn clear_block_ids(&mut self) {
        for s in &mut self.statements {
            s.walk_mut(&mut |st| st.block_id = None);
        }
    }
}

/// Either a lexing or a parsing failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nth_mut_follows_preorder() {
        let p = parse("translate([1,0,0]) { cube(1); sphere(2); }").unwrap();
        let mut root = p.statements[0].clone();
        assert_eq!(root.count(), 4);
        let third = root.nth_mut(3).unwrap();
        assert_eq!(third.as_call().unwrap().name, "sphere");
        assert!(root.nth_mut(4).is_none());
    }

    #[test]
    fn call_arg_lookup_prefers_named() {
        let p = parse("cylinder(5, h = 7);").unwrap();
        let c = p.statements[0].as_call().unwrap();
        assert_eq!(c.arg("h", Some(0)), Some(&Expr::Number(7.0)));
        assert_eq!(c.arg("r1", Some(1)), None);
    }

    #[test]
    fn scaled_folds_literals() {
        assert_eq!(Expr::Number(2.0).scaled(1.6), Expr::Number(3.2));
        let v = Expr::Var("r".into()).scaled(2.0);
        assert_eq!(print_expr(&v), "r * 2");
    }
}
