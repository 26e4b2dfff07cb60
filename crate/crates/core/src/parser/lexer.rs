use crate::diag::Diagnostic;
use crate::model::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Arrow,
    Colon,
    Assign,
    Semi,
    Comma,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Bang,
    AndAnd,
    OrOr,
    Equals,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Arrow => "->",
            Tok::Colon => ":",
            Tok::Assign => ":=",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Equals => "=",
            Tok::Ident(_) | Tok::Number(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        // whitespace and `//` comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') => {
                    let mut ahead = cur.chars.clone();
                    ahead.next();
                    if ahead.peek() == Some(&'/') {
                        while let Some(c) = cur.peek() {
                            if c == '\n' {
                                break;
                            }
                            cur.bump();
                        }
                    } else {
                        break;
                    }
                }
                _ => break,
            }
        }
        let span = Span::new(cur.line, cur.col);
        let Some(c) = cur.bump() else {
            out.push(Token {
                tok: Tok::Eof,
                span,
            });
            return Ok(out);
        };
        let tok = match c {
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(n) = cur.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        s.push(n);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            c if c.is_ascii_digit() => {
                let mut s = String::from(c);
                while let Some(n) = cur.peek().filter(char::is_ascii_digit) {
                    s.push(n);
                    cur.bump();
                }
                if cur.eat('.') {
                    s.push('.');
                    let before = s.len();
                    while let Some(n) = cur.peek().filter(char::is_ascii_digit) {
                        s.push(n);
                        cur.bump();
                    }
                    if s.len() == before {
                        return Err(Diagnostic::error(
                            span,
                            format!(
                                "malformed number `{s}`: expected digits after the decimal point"
                            ),
                        ));
                    }
                }
                if let Some(n) = cur.peek().filter(|n| n.is_ascii_alphabetic() || *n == '_') {
                    return Err(Diagnostic::error(
                        span,
                        format!("malformed number `{s}{n}`: numeric literals take no suffix"),
                    ));
                }
                Tok::Number(s)
            }
            '-' if cur.eat('>') => Tok::Arrow,
            '-' => Tok::Minus,
            ':' if cur.eat('=') => Tok::Assign,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '<' if cur.eat('=') => Tok::Le,
            '<' => Tok::Lt,
            '>' if cur.eat('=') => Tok::Ge,
            '>' => Tok::Gt,
            '=' if cur.eat('=') => Tok::EqEq,
            '=' => Tok::Equals,
            '!' if cur.eat('=') => Tok::Ne,
            '!' => Tok::Bang,
            '&' if cur.eat('&') => Tok::AndAnd,
            '|' if cur.eat('|') => Tok::OrOr,
            other => {
                return Err(Diagnostic::error(
                    span,
                    format!("unexpected character {other:?}"),
                ));
            }
        };
        out.push(Token { tok, span });
    }
}
