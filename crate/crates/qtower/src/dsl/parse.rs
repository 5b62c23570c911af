//! Recursive-descent parser for the combinator grammar. Whitespace is
//! insignificant; errors carry 1-based line and column numbers. Matrix
//! literals `U[...]` capture a balanced-bracket JSON span verbatim and
//! parse it with the matrix wire format.

use crate::linalg::ComplexMatrix;
use crate::rig::{ObjExpr, Structural, StructuralName};
use crate::split::Partition;

use super::{DslError, MorExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Nat(usize),
    Matrix(ComplexMatrix),
    Semi,
    Plus,
    Star,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Nat(n) => format!("`{n}`"),
            Tok::Matrix(_) => "matrix literal".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Star => "`*`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> DslError {
    DslError::Syntax { line, col, msg: msg.into() }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { src: text.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    /// Consume a balanced `[...]` span (the opening bracket is already
    /// consumed) and return its inner text.
    fn balanced_brackets(&mut self) -> Result<String, DslError> {
        let (line, col) = (self.line, self.col);
        let start = self.pos;
        let mut depth = 1usize;
        while depth > 0 {
            match self.bump() {
                Some(b'[') => depth += 1,
                Some(b']') => depth -= 1,
                Some(_) => {}
                None => return Err(err(line, col, "unterminated matrix literal")),
            }
        }
        let inner = &self.src[start..self.pos - 1];
        Ok(String::from_utf8_lossy(inner).into_owned())
    }

    fn next_token(&mut self) -> Result<Spanned, DslError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let c = match self.bump() {
            None => return Ok(Spanned { tok: Tok::Eof, line, col }),
            Some(c) => c,
        };
        let tok = match c {
            b';' => Tok::Semi,
            b'+' => Tok::Plus,
            b'*' => Tok::Star,
            b',' => Tok::Comma,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'0'..=b'9' => {
                let mut n = (c - b'0') as usize;
                while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    let d = self.bump().unwrap() - b'0';
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(d as usize))
                        .ok_or_else(|| err(line, col, "number too large"))?;
                }
                Tok::Nat(n)
            }
            c if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                name.push(c as char);
                while matches!(self.peek(), Some(d) if d.is_ascii_alphanumeric()) {
                    name.push(self.bump().unwrap() as char);
                }
                // `U[` opens a matrix literal; the span is parsed as JSON.
                if name == "U" {
                    self.skip_ws();
                    if self.peek() == Some(b'[') {
                        self.bump();
                        let json = self.balanced_brackets()?;
                        let m = ComplexMatrix::from_json_str(&json)
                            .map_err(|e| err(line, col, format!("bad matrix literal: {e}")))?;
                        return Ok(Spanned { tok: Tok::Matrix(m), line, col });
                    }
                    return Err(err(line, col, "`U` must be followed by `[matrix-json]`"));
                }
                Tok::Ident(name)
            }
            other => {
                return Err(err(line, col, format!("unexpected character `{}`", other as char)))
            }
        };
        Ok(Spanned { tok, line, col })
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, DslError> {
    let mut lx = Lexer::new(text);
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
}

const GATES: [&str; 7] = ["H", "X", "Y", "Z", "S", "T", "CX"];

fn structural_by_name(name: &str) -> Option<Structural> {
    let (base, inverse) = match name.strip_suffix("Inv") {
        Some(b) => (b, true),
        None => (name, false),
    };
    StructuralName::ALL
        .iter()
        .find(|n| n.base_str() == base)
        .map(|&name| Structural { name, inverse })
}

impl Parser {
    fn cur(&self) -> &Spanned {
        &self.toks[self.idx]
    }

    fn advance(&mut self) -> Spanned {
        let t = Spanned {
            tok: self.toks[self.idx].tok.clone(),
            line: self.toks[self.idx].line,
            col: self.toks[self.idx].col,
        };
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if &self.cur().tok == want {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), DslError> {
        if self.eat(&want) {
            Ok(())
        } else {
            let c = self.cur();
            Err(err(c.line, c.col, format!("expected {what}, found {}", c.tok.describe())))
        }
    }

    fn unexpected(&self, what: &str) -> DslError {
        let c = self.cur();
        err(c.line, c.col, format!("expected {what}, found {}", c.tok.describe()))
    }

    // mor := plus (';' plus)*
    fn mor(&mut self) -> Result<MorExpr, DslError> {
        let mut e = self.mor_plus()?;
        while self.eat(&Tok::Semi) {
            let r = self.mor_plus()?;
            e = MorExpr::Seq(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn mor_plus(&mut self) -> Result<MorExpr, DslError> {
        let mut e = self.mor_times()?;
        while self.eat(&Tok::Plus) {
            let r = self.mor_times()?;
            e = MorExpr::Plus(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn mor_times(&mut self) -> Result<MorExpr, DslError> {
        let mut e = self.atom()?;
        while self.eat(&Tok::Star) {
            let r = self.atom()?;
            e = MorExpr::Times(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<MorExpr, DslError> {
        if self.eat(&Tok::LParen) {
            let e = self.mor()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        match self.cur().tok.clone() {
            Tok::Matrix(m) => {
                self.advance();
                Ok(MorExpr::MatrixLit(m))
            }
            Tok::Ident(name) => {
                let at = self.advance();
                match name.as_str() {
                    "dagger" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let e = self.mor()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(MorExpr::Dagger(Box::new(e)))
                    }
                    "discard" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let a = self.obj()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(MorExpr::Discard(a))
                    }
                    "zero" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let a = self.obj()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let b = self.obj()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(MorExpr::Zero(a, b))
                    }
                    "measure" => {
                        self.expect(Tok::LParen, "`(`")?;
                        self.expect(Tok::LBracket, "`[`")?;
                        let mut blocks = vec![self.nat("a block size")?];
                        while self.eat(&Tok::Comma) {
                            blocks.push(self.nat("a block size")?);
                        }
                        self.expect(Tok::RBracket, "`]`")?;
                        self.expect(Tok::RParen, "`)`")?;
                        let p = Partition::new(blocks)
                            .map_err(|e| err(at.line, at.col, format!("bad partition: {e}")))?;
                        Ok(MorExpr::Measure(p))
                    }
                    g if GATES.contains(&g) => Ok(MorExpr::NamedGate(name)),
                    s => match structural_by_name(s) {
                        Some(st) => {
                            self.expect(Tok::LParen, "`(`")?;
                            let mut args = vec![self.obj()?];
                            while self.eat(&Tok::Comma) {
                                args.push(self.obj()?);
                            }
                            self.expect(Tok::RParen, "`)`")?;
                            Ok(MorExpr::Structural(st, args))
                        }
                        None => Err(err(at.line, at.col, format!("unknown name `{name}`"))),
                    },
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn nat(&mut self, what: &str) -> Result<usize, DslError> {
        match self.cur().tok {
            Tok::Nat(n) => {
                self.advance();
                Ok(n)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    // obj := objTimes ('+' objTimes)*
    fn obj(&mut self) -> Result<ObjExpr, DslError> {
        let mut e = self.obj_times()?;
        while self.eat(&Tok::Plus) {
            let r = self.obj_times()?;
            e = ObjExpr::oplus(e, r);
        }
        Ok(e)
    }

    fn obj_times(&mut self) -> Result<ObjExpr, DslError> {
        let mut e = self.obj_atom()?;
        while self.eat(&Tok::Star) {
            let r = self.obj_atom()?;
            e = ObjExpr::otimes(e, r);
        }
        Ok(e)
    }

    fn obj_atom(&mut self) -> Result<ObjExpr, DslError> {
        if self.eat(&Tok::LParen) {
            let e = self.obj()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        match self.cur().tok.clone() {
            Tok::Nat(n) => {
                self.advance();
                Ok(ObjExpr::nat(n))
            }
            Tok::Ident(s) if s == "I" => {
                self.advance();
                Ok(ObjExpr::UnitI)
            }
            Tok::Ident(s) if s == "O" => {
                self.advance();
                Ok(ObjExpr::ZeroO)
            }
            _ => Err(self.unexpected("an object (I, O, a number, +, *, or parentheses)")),
        }
    }
}

/// Parse a morphism expression; the entire input must be consumed.
pub fn parse(text: &str) -> Result<MorExpr, DslError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, idx: 0 };
    let e = p.mor()?;
    if p.cur().tok != Tok::Eof {
        return Err(p.unexpected("`;`, `+`, `*`, or end of input"));
    }
    Ok(e)
}
