//! Text syntax for SCL formulas.
//!
//! ```text
//! phi    := impl
//! impl   := or ( "->" impl )?
//! or     := and ( "|" and )*
//! and    := unary ( "&" unary )*
//! unary  := "!" unary
//!         | "G[" num "," num "]" unary
//!         | "F[" num "," num "]" unary
//!         | "<" kernel "[" num "," num "]" "," num ">" ("*")? unary
//!         | "(" phi ")" | "true" | "false" | atom
//! atom   := ident cmp num
//! kernel := "flat" | "exp(" num ")" | "gauss(" num "," num ")"
//! ```
//!
//! Printing a [`Formula`] with `Display` yields text that parses back to
//! the same tree.

use crate::error::{Error, Result};
use crate::formula::{Comparison, Formula};
use crate::kernel::{BoundedKernel, KernelShape, Window};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Lt,
    Gt,
    Le,
    Ge,
    Star,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Star => "`*`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let starts_number = c.is_ascii_digit()
            || (c == '.' && next.is_some_and(|n| n.is_ascii_digit()))
            || ((c == '-' || c == '+') && next.is_some_and(|n| n.is_ascii_digit() || n == '.'));
        let (tok, width) = if starts_number {
            let mut j = i + 1;
            while j < chars.len() {
                let d = chars[j];
                let exp_sign = (d == '-' || d == '+') && matches!(chars[j - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    j += 1;
                } else {
                    break;
                }
            }
            let lit: String = chars[i..j].iter().collect();
            let v: f64 = lit
                .parse()
                .map_err(|_| error(tl, tc, format!("malformed number `{lit}`")))?;
            if !v.is_finite() {
                return Err(error(tl, tc, format!("number `{lit}` is out of range")));
            }
            (Tok::Num(v), j - i)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else {
            match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                (',', _) => (Tok::Comma, 1),
                ('*', _) => (Tok::Star, 1),
                ('!', _) => (Tok::Bang, 1),
                ('&', _) => (Tok::Amp, 1),
                ('|', _) => (Tok::Pipe, 1),
                _ => return Err(error(tl, tc, format!("unexpected character `{c}`"))),
            }
        };
        out.push(Token {
            tok,
            line: tl,
            column: tc,
        });
        i += width;
        col += width;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> Error {
        let t = self.peek();
        error(t.line, t.column, format!("expected {wanted}, found {}", t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<Token> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn number(&mut self) -> Result<(f64, usize, usize)> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok((v, t.line, t.column))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn phi(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.peek().tok == Tok::Arrow {
            self.bump();
            let rhs = self.phi()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.peek().tok == Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    /// Parses `[num, num]` into a window.
    fn window(&mut self) -> Result<Window> {
        let open = self.expect(Tok::LBracket)?;
        let (t0, ..) = self.number()?;
        self.expect(Tok::Comma)?;
        let (t1, ..) = self.number()?;
        self.expect(Tok::RBracket)?;
        if t0 >= t1 {
            return Err(error(
                open.line,
                open.column,
                format!("window start {t0} must be below its end {t1}"),
            ));
        }
        Window::new(t0, t1).map_err(|e| error(open.line, open.column, e.to_string()))
    }

    fn unary(&mut self) -> Result<Formula> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(name) if (name == "G" || name == "F") && *self.peek_at(1) == Tok::LBracket => {
                let globally = name == "G";
                self.bump();
                let window = self.window()?;
                let arg = Box::new(self.unary()?);
                Ok(if globally {
                    Formula::Globally { window, arg }
                } else {
                    Formula::Eventually { window, arg }
                })
            }
            Tok::Lt => self.convolution(),
            Tok::LParen => {
                self.bump();
                let inner = self.phi()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(name) if name == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) => {
                let name = name.clone();
                self.bump();
                let cmp = match self.peek().tok {
                    Tok::Ge => Comparison::Ge,
                    Tok::Le => Comparison::Le,
                    Tok::Gt => Comparison::Gt,
                    Tok::Lt => Comparison::Lt,
                    _ => return Err(self.unexpected("a comparison after the variable name")),
                };
                self.bump();
                let (threshold, ..) = self.number()?;
                Ok(Formula::atom(name, cmp, threshold))
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn convolution(&mut self) -> Result<Formula> {
        let open = self.expect(Tok::Lt)?;
        let kt = self.peek().clone();
        let shape = match &kt.tok {
            Tok::Ident(k) if k == "flat" => {
                self.bump();
                KernelShape::Flat
            }
            Tok::Ident(k) if k == "exp" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (alpha, ..) = self.number()?;
                self.expect(Tok::RParen)?;
                KernelShape::Exponential { alpha }
            }
            Tok::Ident(k) if k == "gauss" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (mu, ..) = self.number()?;
                self.expect(Tok::Comma)?;
                let (sigma, ..) = self.number()?;
                self.expect(Tok::RParen)?;
                KernelShape::Gaussian { mu, sigma }
            }
            _ => return Err(self.unexpected("a kernel (`flat`, `exp(a)` or `gauss(mu,sigma)`)")),
        };
        let window = self.window()?;
        let kernel = BoundedKernel::new(shape, window).map_err(|e| error(kt.line, kt.column, e.to_string()))?;
        self.expect(Tok::Comma)?;
        let (p, pl, pc) = self.number()?;
        if !(0.0..=1.0).contains(&p) {
            return Err(error(pl, pc, format!("threshold {p} is not in [0, 1]")));
        }
        self.expect(Tok::Gt)?;
        let dual = if self.peek().tok == Tok::Star {
            self.bump();
            true
        } else {
            false
        };
        let arg = self.unary()?;
        let f = if dual {
            Formula::conv_dual(kernel, p, arg)
        } else {
            Formula::conv(kernel, p, arg)
        };
        f.map_err(|e| error(open.line, open.column, e.to_string()))
    }
}

/// Parses a single formula.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let f = p.phi()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

/// Parses a formula file: one formula per line, `#` starts a comment.
///
/// Returns each formula with its 1-based line number. Error positions refer
/// to the file.
pub fn parse_formula_file(text: &str) -> Result<Vec<(usize, Formula)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let f = parse(body).map_err(|e| match e {
            Error::Parse { column, message, .. } => Error::Parse {
                line: i + 1,
                column,
                message,
            },
            other => other,
        })?;
        out.push((i + 1, f));
    }
    Ok(out)
}
