//! Recursive-descent parser for infix formulas.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' integer)*
//! integer := ['+' | '-'] digits | '(' ['+' | '-'] digits ')'
//! primary := number | 'x' digits | ident '(' expr ')' | '(' expr ')'
//! ```

use super::{BinOp, DagBuilder, ExprDag};
use crate::error::{Error, Result};
use crate::interval::StdFn;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(src: &str) -> Result<Lexer> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            // Scientific suffix, only when digits follow.
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    while j < chars.len() && chars[j].1.is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            toks.push((Tok::Num(text), pos));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            toks.push((Tok::Ident(text), pos));
        } else if "+-*/^()".contains(c) {
            toks.push((Tok::Sym(c), pos));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    toks.push((Tok::End, src.len()));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    arity: usize,
    dag: DagBuilder,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<usize> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = self.dag.binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<usize> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = self.dag.binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<usize> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                let inner = self.unary()?;
                Ok(self.dag.neg(inner))
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<usize> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Sym('^') {
            self.bump();
            let n = self.int_exponent()?;
            base = self.dag.power(base, n);
        }
        Ok(base)
    }

    fn int_exponent(&mut self) -> Result<i32> {
        let paren = *self.peek() == Tok::Sym('(');
        if paren {
            self.bump();
        }
        let negative = match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                true
            }
            Tok::Sym('+') => {
                self.bump();
                false
            }
            _ => false,
        };
        let pos = self.pos();
        let Tok::Num(text) = self.bump() else {
            return Err(Error::Parse {
                pos,
                msg: "exponent must be an integer literal".into(),
            });
        };
        if !text.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse {
                pos,
                msg: format!("exponent must be an integer literal, got `{text}`"),
            });
        }
        let mag: i64 = text.parse().map_err(|_| Error::Parse {
            pos,
            msg: format!("exponent `{text}` is too large"),
        })?;
        let n = if negative { -mag } else { mag };
        let n = i32::try_from(n).map_err(|_| Error::Parse {
            pos,
            msg: format!("exponent `{text}` is too large"),
        })?;
        if paren {
            self.expect(')')?;
        }
        Ok(n)
    }

    fn primary(&mut self) -> Result<usize> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(text) => {
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    pos,
                    msg: format!("malformed number `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        pos,
                        msg: format!("number `{text}` overflows"),
                    });
                }
                Ok(self.dag.literal(&text, value))
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Sym('(') {
                    let f = StdFn::from_name(&name)
                        .ok_or(Error::UnknownFunction { name: name.clone(), pos })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(self.dag.call(f, arg));
                }
                match variable_index(&name) {
                    Some(k) if k >= 1 && k <= self.arity => Ok(self.dag.variable(k - 1)),
                    Some(_) => Err(Error::VariableOutOfRange {
                        name,
                        arity: self.arity,
                    }),
                    None => Err(Error::Parse {
                        pos,
                        msg: format!("unknown identifier `{name}`"),
                    }),
                }
            }
            Tok::Sym('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::End => Err(Error::Parse {
                pos,
                msg: "unexpected end of formula".into(),
            }),
            Tok::Sym(c) => Err(Error::Parse {
                pos,
                msg: format!("unexpected `{c}`"),
            }),
        }
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

pub(super) fn parse(src: &str, arity: usize) -> Result<ExprDag> {
    let Lexer { toks } = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        arity,
        dag: DagBuilder::new(arity),
    };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(p.dag.finish(root))
}
