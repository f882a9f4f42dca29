//! Canonical pretty-printer: one statement per line, four-space indentation
//! inside groups, block annotations on their own line.

use std::fmt::Write;

use super::{Expr, Program, Stmt, StmtKind, UnaryOp};

const INDENT: &str = "    ";
const UNARY_PREC: u8 = 6;
const ATOM_PREC: u8 = 7;

pub fn print(program: &Program) -> String {
    let mut out = String::new();
    for s in &program.statements {
        write_stmt(&mut out, s, 0);
    }
    for c in &program.trailing_comments {
        out.push_str(c);
        out.push('\n');
    }
    out
}

/// Prints a statement list at top level.
pub fn print_stmts(stmts: &[Stmt]) -> String {
    let mut out = String::new();
    for s in stmts {
        write_stmt(&mut out, s, 0);
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

pub(crate) fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str(INDENT);
    }
}

fn has_preamble(s: &Stmt) -> bool {
    s.block_id.is_some() || !s.comments.is_empty()
}

/// Writes `s` as complete lines starting at `indent`.
fn write_stmt(out: &mut String, s: &Stmt, indent: usize) {
    for c in &s.comments {
        pad(out, indent);
        out.push_str(c);
        out.push('\n');
    }
    if let Some(id) = s.block_id {
        pad(out, indent);
        let _ = writeln!(out, "// Block {id}");
    }
    pad(out, indent);
    write_body(out, s, indent);
}

/// Writes a statement that is nested as the child of a call, loop or branch.
/// The cursor sits right after the parent's header.
fn write_child(out: &mut String, s: &Stmt, indent: usize) {
    if matches!(s.kind, StmtKind::Group { .. }) && !has_preamble(s) {
        out.push(' ');
        write_body(out, s, indent);
    } else if has_preamble(s) {
        out.push('\n');
        write_stmt(out, s, indent + 1);
    } else {
        out.push(' ');
        write_body(out, s, indent);
    }
}

/// Writes the statement itself (no comments, no leading indentation),
/// ending with a newline.
fn write_body(out: &mut String, s: &Stmt, indent: usize) {
    match &s.kind {
        StmtKind::Assign { name, value } => {
            let _ = write!(out, "{name} = ");
            write_expr(out, value);
            out.push_str(";\n");
        }
        StmtKind::ModuleDef { name, params, body } => {
            let _ = write!(out, "module {name}(");
            for (i, p) in params.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&p.name);
                if let Some(d) = &p.default {
                    out.push_str(" = ");
                    write_expr(out, d);
                }
            }
            out.push(')');
            write_child(out, body, indent);
        }
        StmtKind::Call(call) => {
            out.push_str(&call.name);
            out.push('(');
            let mut first = true;
            for a in &call.args {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                write_expr(out, a);
            }
            for (k, v) in &call.named {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                let _ = write!(out, "{k} = ");
                write_expr(out, v);
            }
            out.push(')');
            match &call.child {
                None => out.push_str(";\n"),
                Some(child) => write_child(out, child, indent),
            }
        }
        StmtKind::Group {
            stmts,
            trailing_comments,
        } => {
            out.push_str("{\n");
            for st in stmts {
                write_stmt(out, st, indent + 1);
            }
            for c in trailing_comments {
                pad(out, indent + 1);
                out.push_str(c);
                out.push('\n');
            }
            pad(out, indent);
            out.push_str("}\n");
        }
        StmtKind::For { var, iter, body } => {
            let _ = write!(out, "for ({var} = ");
            write_expr(out, iter);
            out.push(')');
            write_child(out, body, indent);
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            out.push_str("if (");
            write_expr(out, cond);
            out.push(')');
            write_child(out, then_branch, indent);
            if let Some(e) = else_branch {
                // `}\n` or `;\n` was just written; continue on the next line
                pad(out, indent);
                out.push_str("else");
                write_child(out, e, indent);
            }
        }
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, _, _) => op.precedence(),
        Expr::Unary(_, _) => UNARY_PREC,
        // a negative literal prints with a leading minus, which binds like a unary
        Expr::Number(v) if v.is_sign_negative() => UNARY_PREC,
        _ => ATOM_PREC,
    }
}

fn write_wrapped(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Number(v) => out.push_str(&format_number(*v)),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Var(name) => out.push_str(name),
        Expr::Vector(items) => {
            out.push('[');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, it);
            }
            out.push(']');
        }
        Expr::Range { start, step, end } => {
            out.push('[');
            write_expr(out, start);
            if let Some(st) = step {
                out.push_str(" : ");
                write_expr(out, st);
            }
            out.push_str(" : ");
            write_expr(out, end);
            out.push(']');
        }
        Expr::Unary(op, operand) => {
            out.push(match op {
                UnaryOp::Neg => '-',
                UnaryOp::Not => '!',
            });
            // `-(5)` keeps a non-folded negation distinct from the literal -5
            let parens = expr_prec(operand) < UNARY_PREC
                || (*op == UnaryOp::Neg
                    && matches!(**operand, Expr::Number(v) if !v.is_sign_negative()));
            write_wrapped(out, operand, parens);
        }
        Expr::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            write_wrapped(out, lhs, expr_prec(lhs) < prec);
            let _ = write!(out, " {} ", op.symbol());
            write_wrapped(out, rhs, expr_prec(rhs) <= prec);
        }
    }
}
