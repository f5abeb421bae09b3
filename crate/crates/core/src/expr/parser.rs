//! Recursive-descent parser for the scalar expression language.
//!
//! Grammar, loosest to tightest:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' power)?          right-associative, exponent constant
//! atom    := number | ident | func '(' sum ')' | '(' sum ')'
//! ```

use super::{Expr, ExprError, Func};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, only when followed by a digit (optionally signed)
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let v: f64 = lit.parse().map_err(|_| ExprError::Syntax {
                pos: start,
                msg: format!("malformed number `{lit}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(v),
                pos: start,
            });
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos: start,
            });
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ExprError::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            };
            out.push(Token { tok, pos: start });
            i += 1;
        }
    }
    out.push(Token {
        tok: Tok::End,
        pos: chars.len(),
    });
    Ok(out)
}

pub(super) struct Parser<'a> {
    tokens: Vec<Token>,
    at: usize,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    pub(super) fn new(text: &str, names: &'a [String]) -> Result<Self, ExprError> {
        Ok(Self {
            tokens: lex(text)?,
            at: 0,
            names,
        })
    }

    pub(super) fn parse_all(mut self) -> Result<Expr, ExprError> {
        if self.peek().tok == Tok::End {
            return Err(ExprError::Syntax {
                pos: 0,
                msg: "empty expression".into(),
            });
        }
        let e = self.sum()?;
        let t = self.peek();
        if t.tok != Tok::End {
            return Err(ExprError::Syntax {
                pos: t.pos,
                msg: format!("unexpected {}", describe(&t.tok)),
            });
        }
        Ok(e)
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::End {
            self.at += 1;
        }
        t
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek().tok == Tok::Op(op) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat_op('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let pos = self.peek().pos;
        let exponent = self.power()?;
        if exponent.has_vars() {
            return Err(ExprError::Syntax {
                pos,
                msg: "exponent must be a constant non-negative integer".into(),
            });
        }
        let k = exponent
            .eval_generic::<f64>(&[])
            .map_err(|_| ExprError::Syntax {
                pos,
                msg: "exponent is not a finite constant".into(),
            })?;
        if k < 0.0 || k.fract() != 0.0 || k > f64::from(i32::MAX as u32) {
            return Err(ExprError::Syntax {
                pos,
                msg: format!("exponent {k} is not a non-negative integer"),
            });
        }
        Ok(Expr::Pow(Box::new(base), k as u32))
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if self.peek().tok != Tok::LParen {
                        return Err(ExprError::Syntax {
                            pos: self.peek().pos,
                            msg: format!("expected `(` after `{name}`"),
                        });
                    }
                    self.bump();
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match self.names.iter().position(|n| *n == name) {
                    Some(idx) => Ok(Expr::Var(idx)),
                    None => Err(ExprError::UnknownIdentifier { name, pos: t.pos }),
                }
            }
            other => Err(ExprError::Syntax {
                pos: t.pos,
                msg: format!("expected a value, found {}", describe(&other)),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        let t = self.bump();
        if t.tok == Tok::RParen {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                pos: t.pos,
                msg: format!("expected `)`, found {}", describe(&t.tok)),
            })
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}
