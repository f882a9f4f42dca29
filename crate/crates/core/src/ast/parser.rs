//! Recursive-descent parser producing a [`Program`].
//!
//! Expression precedence, loosest first: `||`, `&&`, comparisons, `+ -`,
//! `* / %`, unary `- !`. A unary minus applied directly to a number literal is
//! folded into a negative literal.

use thiserror::Error;

use super::lexer::{tokenize, Token, TokenKind};
use super::{
    call_kind, BinaryOp, Call, CallKind, Expr, Param, Program, SourceSpan, Stmt, StmtKind,
    SyntaxError, UnaryOp,
};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at line {}: expected {}, found {found}", .span.line, .expected.join(" or "))]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub found: String,
}

/// Parses OpenSCAD-subset source into a [`Program`].
pub fn parse(source: &str) -> Result<Program, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        src_len: source.len(),
        pending: Vec::new(),
        pending_block: None,
    };
    let mut statements = Vec::new();
    loop {
        p.collect_comments();
        if p.at_end() {
            break;
        }
        if p.eat(&TokenKind::Semi) {
            continue;
        }
        statements.push(p.statement()?);
    }
    // a dangling `// Block n` with nothing after it is dropped
    let trailing_comments = std::mem::take(&mut p.pending);
    Ok(Program {
        statements,
        trailing_comments,
        source_text: source.to_string(),
    })
}

/// Parses `// Block <n>` into `n`.
pub(crate) fn block_annotation(comment: &str) -> Option<u32> {
    let rest = comment.strip_prefix("//")?.trim();
    let rest = rest.strip_prefix("Block")?;
    if !rest.starts_with(char::is_whitespace) {
        return None;
    }
    rest.trim().parse().ok()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    src_len: usize,
    pending: Vec<String>,
    pending_block: Option<u32>,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    /// Moves comment tokens at the cursor into the pending buffers.
    fn collect_comments(&mut self) {
        while let Some(Token {
            kind: TokenKind::Comment(text),
            ..
        }) = self.tokens.get(self.pos)
        {
            match block_annotation(text) {
                Some(id) => self.pending_block = Some(id),
                None => self.pending.push(text.clone()),
            }
            self.pos += 1;
        }
    }

    /// Skips comments that appear inside expressions or argument lists.
    fn skip_comments(&mut self) {
        while matches!(
            self.tokens.get(self.pos),
            Some(Token {
                kind: TokenKind::Comment(_),
                ..
            })
        ) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<&TokenKind> {
        self.skip_comments();
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_second(&mut self) -> Option<&TokenKind> {
        self.skip_comments();
        self.tokens
            .get(self.pos + 1..)?
            .iter()
            .map(|t| &t.kind)
            .find(|k| !matches!(k, TokenKind::Comment(_)))
    }

    /// Next non-comment token, without consuming anything.
    fn next_significant(&self) -> Option<&TokenKind> {
        self.tokens[self.pos..]
            .iter()
            .map(|t| &t.kind)
            .find(|k| !matches!(k, TokenKind::Comment(_)))
    }

    fn current_span(&self) -> SourceSpan {
        match self.tokens.get(self.pos) {
            Some(t) => t.span,
            None => {
                let line = self.tokens.last().map_or(1, |t| t.span.line);
                SourceSpan::new(self.src_len, self.src_len, line)
            }
        }
    }

    fn last_end(&self) -> usize {
        self.pos
            .checked_sub(1)
            .map_or(0, |i| self.tokens[i].span.byte_end)
    }

    fn error(&mut self, expected: &[&str]) -> SyntaxError {
        self.skip_comments();
        let found = self
            .tokens
            .get(self.pos)
            .map_or_else(|| "end of input".to_string(), |t| t.kind.describe());
        ParseError {
            span: self.current_span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
        .into()
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, label: &str) -> Result<(), SyntaxError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn statement(&mut self) -> Result<Stmt, SyntaxError> {
        self.collect_comments();
        let comments = std::mem::take(&mut self.pending);
        let block_id = self.pending_block.take();
        let start = self.current_span();
        let kind = match self.peek() {
            Some(TokenKind::LBrace) => {
                self.pos += 1;
                let (stmts, trailing_comments) = self.group_body()?;
                StmtKind::Group {
                    stmts,
                    trailing_comments,
                }
            }
            Some(TokenKind::Module) => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(TokenKind::LParen, "`(`")?;
                let params = self.params()?;
                let body = self.statement()?;
                StmtKind::ModuleDef {
                    name,
                    params,
                    body: Box::new(body),
                }
            }
            Some(TokenKind::For) => {
                self.pos += 1;
                self.expect(TokenKind::LParen, "`(`")?;
                let var = self.ident()?;
                self.expect(TokenKind::Eq, "`=`")?;
                let iter = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                let body = self.statement()?;
                StmtKind::For {
                    var,
                    iter,
                    body: Box::new(body),
                }
            }
            Some(TokenKind::If) => {
                self.pos += 1;
                self.expect(TokenKind::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                let then_branch = Box::new(self.statement()?);
                let else_branch = if self.next_significant() == Some(&TokenKind::Else) {
                    self.skip_comments();
                    self.pos += 1;
                    Some(Box::new(self.statement()?))
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Some(TokenKind::Ident(_)) => match self.peek_second() {
                Some(TokenKind::Eq) => {
                    let name = self.ident()?;
                    self.pos += 1;
                    let value = self.expr()?;
                    self.expect(TokenKind::Semi, "`;`")?;
                    StmtKind::Assign { name, value }
                }
                Some(TokenKind::LParen) => StmtKind::Call(self.call()?),
                _ => {
                    self.pos += 1;
                    return Err(self.error(&["`=`", "`(`"]));
                }
            },
            _ => return Err(self.error(&["statement"])),
        };
        let span = SourceSpan::new(start.byte_start, self.last_end(), start.line);
        Ok(Stmt {
            kind,
            span,
            block_id,
            comments,
        })
    }

    fn group_body(&mut self) -> Result<(Vec<Stmt>, Vec<String>), SyntaxError> {
        let mut stmts = Vec::new();
        loop {
            self.collect_comments();
            match self.tokens.get(self.pos).map(|t| &t.kind) {
                None => return Err(self.error(&["`}`"])),
                Some(TokenKind::RBrace) => {
                    self.pos += 1;
                    self.pending_block = None;
                    return Ok((stmts, std::mem::take(&mut self.pending)));
                }
                Some(TokenKind::Semi) => self.pos += 1,
                Some(_) => stmts.push(self.statement()?),
            }
        }
    }

    fn params(&mut self) -> Result<Vec<Param>, SyntaxError> {
        let mut params = Vec::new();
        if self.eat(&TokenKind::RParen) {
            return Ok(params);
        }
        loop {
            let name = self.ident()?;
            let default = if self.eat(&TokenKind::Eq) {
                Some(self.expr()?)
            } else {
                None
            };
            params.push(Param { name, default });
            if self.eat(&TokenKind::Comma) {
                continue;
            }
            self.expect(TokenKind::RParen, "`,` or `)`")?;
            return Ok(params);
        }
    }

    fn call(&mut self) -> Result<Call, SyntaxError> {
        let name_span = self.current_span();
        let name = self.ident()?;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        let mut named = Vec::new();
        if !self.eat(&TokenKind::RParen) {
            loop {
                let is_named = matches!(self.peek(), Some(TokenKind::Ident(_)))
                    && self.peek_second() == Some(&TokenKind::Eq);
                if is_named {
                    let key = self.ident()?;
                    self.pos += 1;
                    named.push((key, self.expr()?));
                } else {
                    args.push(self.expr()?);
                }
                if self.eat(&TokenKind::Comma) {
                    continue;
                }
                self.expect(TokenKind::RParen, "`,` or `)`")?;
                break;
            }
        }

        self.collect_comments();
        let child = if self.tokens.get(self.pos).map(|t| &t.kind) == Some(&TokenKind::Semi) {
            self.pos += 1;
            None
        } else {
            Some(Box::new(self.statement()?))
        };

        let kind = call_kind(&name);
        let vocabulary_error = match (kind, child.is_some()) {
            (CallKind::Primitive, true) => Some("`;` (primitives take no child)"),
            (CallKind::User, true) => Some("`;` (module calls take no child)"),
            (CallKind::Transform | CallKind::Boolean, false) => Some("child statement"),
            _ => None,
        };
        if let Some(expected) = vocabulary_error {
            return Err(ParseError {
                span: name_span,
                expected: vec![expected.to_string()],
                found: format!("`{name}`"),
            }
            .into());
        }
        Ok(Call {
            name,
            args,
            named,
            child,
        })
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(1)
    }

    fn binary_op(&mut self) -> Option<BinaryOp> {
        Some(match self.peek()? {
            TokenKind::OrOr => BinaryOp::Or,
            TokenKind::AndAnd => BinaryOp::And,
            TokenKind::Lt => BinaryOp::Lt,
            TokenKind::Le => BinaryOp::Le,
            TokenKind::Gt => BinaryOp::Gt,
            TokenKind::Ge => BinaryOp::Ge,
            TokenKind::EqEq => BinaryOp::Eq,
            TokenKind::Ne => BinaryOp::Ne,
            TokenKind::Plus => BinaryOp::Add,
            TokenKind::Minus => BinaryOp::Sub,
            TokenKind::Star => BinaryOp::Mul,
            TokenKind::Slash => BinaryOp::Div,
            TokenKind::Percent => BinaryOp::Mod,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Some(TokenKind::Minus) => {
                self.pos += 1;
                if let Some(TokenKind::Number(v)) = self.peek() {
                    let v = *v;
                    self.pos += 1;
                    return Ok(Expr::Number(-v));
                }
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Some(TokenKind::Bang) => {
                self.pos += 1;
                Ok(Expr::Unary(UnaryOp::Not, Box::new(self.unary()?)))
            }
            Some(TokenKind::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error(&["expression"]));
        };
        self.pos += 1;
        match tok {
            TokenKind::Number(v) => Ok(Expr::Number(v)),
            TokenKind::True => Ok(Expr::Bool(true)),
            TokenKind::False => Ok(Expr::Bool(false)),
            TokenKind::Ident(name) => Ok(Expr::Var(name)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            TokenKind::LBracket => self.bracket(),
            _ => {
                self.pos -= 1;
                Err(self.error(&["expression"]))
            }
        }
    }

    /// Vector literal or range; the opening `[` is already consumed.
    fn bracket(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat(&TokenKind::RBracket) {
            return Ok(Expr::Vector(Vec::new()));
        }
        let first = self.expr()?;
        if self.eat(&TokenKind::Colon) {
            let second = self.expr()?;
            let (step, end) = if self.eat(&TokenKind::Colon) {
                (Some(second), self.expr()?)
            } else {
                (None, second)
            };
            self.expect(TokenKind::RBracket, "`]`")?;
            return Ok(Expr::Range {
                start: Box::new(first),
                step: step.map(Box::new),
                end: Box::new(end),
            });
        }
        let mut items = vec![first];
        while self.eat(&TokenKind::Comma) {
            if self.peek() == Some(&TokenKind::RBracket) {
                break;
            }
            items.push(self.expr()?);
        }
        self.expect(TokenKind::RBracket, "`,` or `]`")?;
        Ok(Expr::Vector(items))
    }
}
