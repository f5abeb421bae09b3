//! Scalar expressions over chart coordinates.
//!
//! Every input field (anchor, structure functions, connection coefficients,
//! metrics) is written as a small arithmetic expression in the chart
//! coordinates. [`ScalarField`] parses such an expression once and evaluates
//! it, together with exact first partial derivatives, by forward-mode
//! automatic differentiation over [`Dual`] numbers: one pass per coordinate.

mod dual;
mod parser;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use dual::{Dual, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: String },
    #[error("point has dimension {got}, field expects {expected}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Parse tree. Variables are indices into the chart's coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn has_vars(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(_) => true,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.has_vars(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_vars() || b.has_vars()
            }
        }
    }

    fn eval_generic<T: Scalar>(&self, x: &[T]) -> Result<T, EvalFault<'_>> {
        let v = match self {
            Expr::Num(v) => T::from_f64(*v),
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval_generic(x)?,
            Expr::Add(a, b) => a.eval_generic(x)? + b.eval_generic(x)?,
            Expr::Sub(a, b) => a.eval_generic(x)? - b.eval_generic(x)?,
            Expr::Mul(a, b) => a.eval_generic(x)? * b.eval_generic(x)?,
            Expr::Div(a, b) => {
                let num = a.eval_generic(x)?;
                let den = b.eval_generic(x)?;
                if den.re() == 0.0 {
                    return Err(EvalFault {
                        node: self,
                        reason: "division by zero",
                    });
                }
                num / den
            }
            Expr::Pow(a, k) => a.eval_generic(x)?.powi(*k),
            Expr::Call(f, a) => {
                let arg = a.eval_generic(x)?;
                match f {
                    Func::Sin => arg.sin(),
                    Func::Cos => arg.cos(),
                    Func::Exp => arg.exp(),
                    Func::Sqrt => arg.sqrt().ok_or(EvalFault {
                        node: self,
                        reason: if arg.re() < 0.0 {
                            "square root of a negative number"
                        } else {
                            "square root is not differentiable at zero"
                        },
                    })?,
                }
            }
        };
        if !v.is_finite() {
            return Err(EvalFault {
                node: self,
                reason: "non-finite result",
            });
        }
        Ok(v)
    }
}

struct EvalFault<'a> {
    node: &'a Expr,
    reason: &'static str,
}

/// Expression printer bound to coordinate names. Output is fully parenthesized
/// so that re-parsing reproduces the same tree.
struct Printer<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl<'a> fmt::Display for Printer<'a> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e: &'a Expr| Printer {
            expr: e,
            names: self.names,
        };
        match self.expr {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => f.write_str(&self.names[*i]),
            Expr::Neg(a) => write!(f, "(-{})", sub(a)),
            Expr::Add(a, b) => write!(f, "({} + {})", sub(a), sub(b)),
            Expr::Sub(a, b) => write!(f, "({} - {})", sub(a), sub(b)),
            Expr::Mul(a, b) => write!(f, "({} * {})", sub(a), sub(b)),
            Expr::Div(a, b) => write!(f, "({} / {})", sub(a), sub(b)),
            Expr::Pow(a, k) => write!(f, "({}^{k})", sub(a)),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}

/// A parsed smooth expression bound to a list of chart coordinates.
///
/// Immutable after parsing; evaluation is pure, so a field can be shared
/// across threads freely.
#[derive(Debug, Clone)]
pub struct ScalarField {
    source: String,
    ast: Expr,
    names: Arc<[String]>,
}

impl ScalarField {
    pub fn parse(text: &str, coords: &[String]) -> Result<Self, ExprError> {
        let ast = parser::Parser::new(text, coords)?.parse_all()?;
        Ok(Self {
            source: text.to_string(),
            ast,
            names: coords.into(),
        })
    }

    /// The constant field `v`.
    pub fn constant(v: f64, coords: &[String]) -> Self {
        Self {
            source: format!("{v}"),
            ast: Expr::Num(v),
            names: coords.into(),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.names
    }

    fn check_arity(&self, x: &[f64]) -> Result<(), ExprError> {
        if x.len() != self.arity() {
            return Err(ExprError::Arity {
                expected: self.arity(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn fault(&self, fault: EvalFault<'_>) -> ExprError {
        ExprError::Domain {
            subexpr: Printer {
                expr: fault.node,
                names: &self.names,
            }
            .to_string(),
            reason: fault.reason.to_string(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        self.check_arity(x)?;
        self.ast.eval_generic(x).map_err(|e| self.fault(e))
    }

    /// Partial derivatives at `x`, one dual-number pass per coordinate.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>, ExprError> {
        self.eval_with_grad(x).map(|(_, g)| g)
    }

    /// Value and gradient together. For a zero-arity field the gradient is empty
    /// and the value comes from a plain pass.
    pub fn eval_with_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>), ExprError> {
        self.check_arity(x)?;
        if !self.ast.has_vars() {
            return Ok((self.eval(x)?, vec![0.0; x.len()]));
        }
        let mut value = 0.0;
        let mut grad = Vec::with_capacity(x.len());
        let mut point: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
        for i in 0..x.len() {
            point[i].eps = 1.0;
            let d = self.ast.eval_generic(&point).map_err(|e| self.fault(e))?;
            point[i].eps = 0.0;
            value = d.re;
            grad.push(d.eps);
        }
        Ok((value, grad))
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            expr: &self.ast,
            names: &self.names,
        }
        .fmt(f)
    }
}
