use serde::Serialize;
use thiserror::Error;

use super::SourceSpan;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    /// Full comment text including the `//` or `/* */` delimiters.
    Comment(String),
    Module,
    For,
    If,
    Else,
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Eq,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Number(v) => format!("number `{v}`"),
            TokenKind::Comment(_) => "comment".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::Module => "module",
            TokenKind::For => "for",
            TokenKind::If => "if",
            TokenKind::Else => "else",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Semi => ";",
            TokenKind::Comma => ",",
            TokenKind::Eq => "=",
            TokenKind::Colon => ":",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Percent => "%",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::EqEq => "==",
            TokenKind::Ne => "!=",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            TokenKind::Bang => "!",
            TokenKind::Ident(_) | TokenKind::Number(_) | TokenKind::Comment(_) => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("lex error at {line}:{column}: {message}")]
pub struct LexError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    fn column(&self, pos: usize) -> usize {
        self.src[self.line_start..pos].chars().count() + 1
    }

    fn error(&self, pos: usize, message: impl Into<String>) -> LexError {
        LexError {
            line: self.line,
            column: self.column(pos),
            message: message.into(),
        }
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn newline(&mut self, at: usize) {
        self.line += 1;
        self.line_start = at + 1;
    }

    fn number(&mut self) -> Result<f64, LexError> {
        let start = self.pos;
        while self.peek_at(0).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek_at(0) == Some(b'.') && self.peek_at(1).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
            while self.peek_at(0).is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1;
            }
        } else if self.peek_at(0) == Some(b'.') && self.pos > start {
            // trailing dot, as in `2.`
            self.pos += 1;
        }
        if matches!(self.peek_at(0), Some(b'e' | b'E')) {
            let digits_at = match self.peek_at(1) {
                Some(b'+' | b'-') => 2,
                _ => 1,
            };
            if self.peek_at(digits_at).is_some_and(|b| b.is_ascii_digit()) {
                self.pos += digits_at;
                while self.peek_at(0).is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        self.src[start..self.pos]
            .trim_end_matches('.')
            .parse::<f64>()
            .map_err(|e| self.error(start, format!("bad number literal: {e}")))
    }
}

/// Splits `source` into tokens. Whitespace is dropped; comments are kept as
/// [`TokenKind::Comment`] so block annotations reach the parser.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
        line: 1,
        line_start: 0,
    };
    let mut out = Vec::new();

    while lx.pos < lx.bytes.len() {
        let start = lx.pos;
        let b = lx.bytes[start];
        let line = lx.line;
        let column = lx.column(start);

        if b == b'\n' {
            lx.newline(start);
            lx.pos += 1;
            continue;
        }
        if b.is_ascii_whitespace() {
            lx.pos += 1;
            continue;
        }

        let kind = if b == b'/' && lx.peek_at(1) == Some(b'/') {
            while lx.pos < lx.bytes.len() && lx.bytes[lx.pos] != b'\n' {
                lx.pos += 1;
            }
            TokenKind::Comment(source[start..lx.pos].trim_end_matches('\r').to_string())
        } else if b == b'/' && lx.peek_at(1) == Some(b'*') {
            lx.pos += 2;
            loop {
                match lx.peek_at(0) {
                    None => {
                        return Err(LexError {
                            line,
                            column,
                            message: "unterminated block comment".into(),
                        });
                    }
                    Some(b'*') if lx.peek_at(1) == Some(b'/') => {
                        lx.pos += 2;
                        break;
                    }
                    Some(b'\n') => {
                        lx.newline(lx.pos);
                        lx.pos += 1;
                    }
                    Some(_) => lx.pos += 1,
                }
            }
            TokenKind::Comment(source[start..lx.pos].to_string())
        } else if b.is_ascii_digit()
            || (b == b'.' && lx.peek_at(1).is_some_and(|c| c.is_ascii_digit()))
        {
            TokenKind::Number(lx.number()?)
        } else if b.is_ascii_alphabetic() || b == b'_' {
            while lx
                .peek_at(0)
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
            {
                lx.pos += 1;
            }
            match &source[start..lx.pos] {
                "module" => TokenKind::Module,
                "for" => TokenKind::For,
                "if" => TokenKind::If,
                "else" => TokenKind::Else,
                "true" => TokenKind::True,
                "false" => TokenKind::False,
                id => TokenKind::Ident(id.to_string()),
            }
        } else {
            let two = lx.peek_at(1);
            let (kind, len) = match (b, two) {
                (b'<', Some(b'=')) => (TokenKind::Le, 2),
                (b'>', Some(b'=')) => (TokenKind::Ge, 2),
                (b'=', Some(b'=')) => (TokenKind::EqEq, 2),
                (b'!', Some(b'=')) => (TokenKind::Ne, 2),
                (b'&', Some(b'&')) => (TokenKind::AndAnd, 2),
                (b'|', Some(b'|')) => (TokenKind::OrOr, 2),
                (b'(', _) => (TokenKind::LParen, 1),
                (b')', _) => (TokenKind::RParen, 1),
                (b'[', _) => (TokenKind::LBracket, 1),
                (b']', _) => (TokenKind::RBracket, 1),
                (b'{', _) => (TokenKind::LBrace, 1),
                (b'}', _) => (TokenKind::RBrace, 1),
                (b';', _) => (TokenKind::Semi, 1),
                (b',', _) => (TokenKind::Comma, 1),
                (b'=', _) => (TokenKind::Eq, 1),
                (b':', _) => (TokenKind::Colon, 1),
                (b'+', _) => (TokenKind::Plus, 1),
                (b'-', _) => (TokenKind::Minus, 1),
                (b'*', _) => (TokenKind::Star, 1),
                (b'/', _) => (TokenKind::Slash, 1),
                (b'%', _) => (TokenKind::Percent, 1),
                (b'<', _) => (TokenKind::Lt, 1),
                (b'>', _) => (TokenKind::Gt, 1),
                (b'!', _) => (TokenKind::Bang, 1),
                _ => {
                    let ch = source[start..].chars().next().unwrap_or('?');
                    return Err(lx.error(start, format!("illegal character {ch:?}")));
                }
            };
            lx.pos += len;
            kind
        };

        out.push(Token {
            kind,
            span: SourceSpan::new(start, lx.pos, line),
            column,
        });
    }
    Ok(out)
}
