//! Tiny arithmetic expression language for non-mass-action propensities.
//!
//! Grammar:
//!   expr   := term (('+'|'-') term)*
//!   term   := factor (('*'|'/') factor)*
//!   factor := base ('^' uint)?
//!   base   := number | ident | '(' expr ')'
//! where ident resolves to a species name, `x<i>` (1-based), or a named
//! constant supplied by the document.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math;

/// Expression tree over state variables and constants.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprAst {
    Num(f64),
    /// Zero-based state coordinate.
    Var(usize),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
}

/// Parse failure with a byte offset into the source.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprError {
    pub offset: usize,
    pub msg: String,
}

impl core::fmt::Display for ExprError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "expression error at offset {}: {}", self.offset, self.msg)
    }
}

impl ExprAst {
    /// Evaluates at a state; `None` signals division by zero.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        Some(match self {
            ExprAst::Num(v) => *v,
            ExprAst::Var(i) => x[*i],
            ExprAst::Add(a, b) => a.eval(x)? + b.eval(x)?,
            ExprAst::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            ExprAst::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            ExprAst::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return None;
                }
                a.eval(x)? / d
            }
            ExprAst::Pow(a, p) => math::powi(a.eval(x)?, *p),
        })
    }

    /// Largest state index referenced, if any.
    pub fn max_var_index(&self) -> Option<usize> {
        match self {
            ExprAst::Num(_) => None,
            ExprAst::Var(i) => Some(*i),
            ExprAst::Add(a, b) | ExprAst::Sub(a, b) | ExprAst::Mul(a, b) | ExprAst::Div(a, b) => {
                match (a.max_var_index(), b.max_var_index()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (Some(x), None) | (None, Some(x)) => Some(x),
                    (None, None) => None,
                }
            }
            ExprAst::Pow(a, _) => a.max_var_index(),
        }
    }

    /// Canonical source form; parsing it reproduces this tree exactly.
    pub fn to_src(&self) -> String {
        match self {
            ExprAst::Num(v) => format!("{v}"),
            ExprAst::Var(i) => format!("x{}", i + 1),
            ExprAst::Add(a, b) => format!("({} + {})", a.to_src(), b.to_src()),
            ExprAst::Sub(a, b) => format!("({} - {})", a.to_src(), b.to_src()),
            ExprAst::Mul(a, b) => format!("({} * {})", a.to_src(), b.to_src()),
            ExprAst::Div(a, b) => format!("({} / {})", a.to_src(), b.to_src()),
            ExprAst::Pow(a, p) => format!("({})^{}", a.to_src(), p),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ExprError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b'0'..=b'9' | b'.' => lx.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.ident(start),
                other => {
                    return Err(ExprError {
                        offset: start,
                        msg: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((start, tok));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ExprError> {
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // Exponent part: e or E, optional sign, digits.
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mut probe = self.pos + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Tok::Num).map_err(|_| ExprError {
            offset: start,
            msg: format!("bad number literal `{text}`"),
        })
    }

    fn ident(&mut self, start: usize) -> Tok {
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(core::str::from_utf8(&self.src[start..self.pos]).unwrap().to_owned())
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    species: &'a [String],
    constants: &'a BTreeMap<String, f64>,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.idx)
            .map(|(o, _)| *o)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.idx).cloned();
        self.idx += 1;
        t
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = ExprAst::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = ExprAst::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = ExprAst::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = ExprAst::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.base()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let off = self.here();
            match self.bump() {
                Some((_, Tok::Num(v))) if v >= 0.0 && v == math::floor(v) && v <= u32::MAX as f64 => {
                    Ok(ExprAst::Pow(Box::new(base), v as u32))
                }
                _ => Err(ExprError {
                    offset: off,
                    msg: "exponent must be a nonnegative integer".to_owned(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<ExprAst, ExprError> {
        let off = self.here();
        match self.bump() {
            Some((_, Tok::Num(v))) => Ok(ExprAst::Num(v)),
            // Signed number literal (covers inlined negative constants); there
            // is no general unary minus.
            Some((_, Tok::Minus)) if matches!(self.peek(), Some(Tok::Num(_))) => {
                match self.bump() {
                    Some((_, Tok::Num(v))) => Ok(ExprAst::Num(-v)),
                    _ => unreachable!(),
                }
            }
            Some((_, Tok::Ident(name))) => self.resolve(&name, off),
            Some((_, Tok::LParen)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    _ => Err(ExprError {
                        offset: self.src_len.min(self.here()),
                        msg: "expected `)`".to_owned(),
                    }),
                }
            }
            Some((o, t)) => Err(ExprError {
                offset: o,
                msg: format!("unexpected token {t:?}"),
            }),
            None => Err(ExprError {
                offset: self.src_len,
                msg: "unexpected end of expression".to_owned(),
            }),
        }
    }

    fn resolve(&self, name: &str, off: usize) -> Result<ExprAst, ExprError> {
        if let Some(i) = self.species.iter().position(|s| s == name) {
            return Ok(ExprAst::Var(i));
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Ok(i) = rest.parse::<usize>() {
                if i >= 1 && i <= self.species.len() {
                    return Ok(ExprAst::Var(i - 1));
                }
                return Err(ExprError {
                    offset: off,
                    msg: format!("x{i} out of range: model has {} species", self.species.len()),
                });
            }
        }
        if let Some(v) = self.constants.get(name) {
            return Ok(ExprAst::Num(*v));
        }
        Err(ExprError {
            offset: off,
            msg: format!("unknown identifier `{name}`"),
        })
    }
}

/// Parses one propensity expression against a species list and constant map.
pub fn parse_expr(
    src: &str,
    species: &[String],
    constants: &BTreeMap<String, f64>,
) -> Result<ExprAst, ExprError> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser {
        toks,
        idx: 0,
        species,
        constants,
        src_len: src.len(),
    };
    let ast = p.expr()?;
    if p.idx != p.toks.len() {
        return Err(ExprError {
            offset: p.here(),
            msg: "trailing input after expression".to_owned(),
        });
    }
    Ok(ast)
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn arb_ast() -> impl Strategy<Value = ExprAst> {
        let leaf = prop_oneof![
            (any::<bool>(), 0u32..1000, 1u32..1000)
                .prop_map(|(neg, a, b)| ExprAst::Num(if neg { -1.0 } else { 1.0 } * a as f64 / b as f64)),
            (0usize..2).prop_map(ExprAst::Var),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ExprAst::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ExprAst::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ExprAst::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| ExprAst::Div(Box::new(a), Box::new(b))),
                (inner, 0u32..5).prop_map(|(a, p)| ExprAst::Pow(Box::new(a), p)),
            ]
        })
    }

    proptest! {
        #[test]
        fn printed_form_reparses_to_same_tree(ast in arb_ast()) {
            let species = vec!["S1".to_owned(), "S2".to_owned()];
            let src = ast.to_src();
            let reparsed = parse_expr(&src, &species, &BTreeMap::new()).unwrap();
            prop_assert_eq!(reparsed, ast);
        }
    }
}
