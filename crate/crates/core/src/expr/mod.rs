//! Symbolic expressions in the single spatial variable `x`.
//!
//! [`Expr`] is the user-facing syntax tree produced by [`parse`]. Algebra
//! happens on [`NormalForm`], a sum of monomials over opaque atoms
//! (`x`, `pi`, `sin(..)`, unexpanded groups, ...) with exact rational
//! coefficients where possible. [`simplify`] is the round trip
//! `Expr -> NormalForm -> Expr`.
//!
//! Expressions are immutable and every operation here is a pure function.

mod equiv;
mod normal;
mod number;
mod parse;
mod print;

use std::sync::Arc;

use thiserror::Error;

pub use equiv::{equivalent, EquivalenceCheck, EquivalenceReport, DEFAULT_EQUIVALENCE_SEED};
pub use normal::{Atom, AtomKind, Monomial, NormalForm};
pub use number::{Number, Rational};
pub use parse::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected one of [{}], found {found}", expected.join(", "))]
    Syntax { offset: usize, expected: Vec<&'static str>, found: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("cannot differentiate `{expr}`: {reason}")]
    Unsupported { expr: String, reason: &'static str },
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: &'static str },
    #[error("no shared sample domain: only {valid} of {requested} sample points evaluable")]
    NoSampleDomain { valid: usize, requested: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sinh,
    Cosh,
    Tanh,
}

impl UnaryOp {
    pub const FUNCTIONS: [UnaryOp; 8] = [
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Tan,
        UnaryOp::Exp,
        UnaryOp::Ln,
        UnaryOp::Sinh,
        UnaryOp::Cosh,
        UnaryOp::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        UnaryOp::FUNCTIONS.into_iter().find(|f| f.name() == name)
    }

    /// Applies the operation to a real argument, rejecting results outside
    /// the real domain.
    pub(crate) fn apply(self, v: f64) -> Result<f64, &'static str> {
        let out = match self {
            UnaryOp::Neg => -v,
            UnaryOp::Sin => v.sin(),
            UnaryOp::Cos => v.cos(),
            UnaryOp::Tan => v.tan(),
            UnaryOp::Exp => v.exp(),
            UnaryOp::Ln => {
                if v <= 0.0 {
                    return Err("logarithm of a non-positive value");
                }
                v.ln()
            }
            UnaryOp::Sinh => v.sinh(),
            UnaryOp::Cosh => v.cosh(),
            UnaryOp::Tanh => v.tanh(),
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err("non-finite result")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree over the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Rational(Rational),
    Float(f64),
    Const(Constant),
    Var,
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn int(n: i128) -> Expr {
        Expr::Rational(Rational::from_integer(n))
    }

    pub fn number(n: Number) -> Expr {
        match n {
            Number::Rational(r) => Expr::Rational(r),
            Number::Float(f) => Expr::Float(f),
        }
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Arc::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Arc::new(lhs), Arc::new(rhs))
    }

    pub fn add(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, lhs, rhs)
    }

    pub fn sub(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, lhs, rhs)
    }

    pub fn mul(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, lhs, rhs)
    }

    pub fn div(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, lhs, rhs)
    }

    pub fn pow(lhs: Expr, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, lhs, rhs)
    }

    pub fn neg(arg: Expr) -> Expr {
        Expr::unary(UnaryOp::Neg, arg)
    }

    /// Numeric value if the tree is a bare number literal.
    pub fn as_number(&self) -> Option<Number> {
        match self {
            Expr::Rational(r) => Some(Number::Rational(*r)),
            Expr::Float(f) => Some(Number::Float(*f)),
            _ => None,
        }
    }

    /// True if `x` occurs anywhere in the tree.
    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Rational(_) | Expr::Float(_) | Expr::Const(_) => false,
            Expr::Unary(_, a) => a.depends_on_x(),
            Expr::Binary(_, a, b) => a.depends_on_x() || b.depends_on_x(),
        }
    }

    /// Node count, a rough size measure.
    pub fn size(&self) -> usize {
        match self {
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, ExprError> {
        let domain = |reason| ExprError::Domain { expr: self.to_string(), reason };
        let value = match self {
            Expr::Rational(r) => number::rational_to_f64(r),
            Expr::Float(f) => *f,
            Expr::Const(c) => c.value(),
            Expr::Var => x,
            Expr::Unary(op, a) => op.apply(a.evaluate(x)?).map_err(domain)?,
            Expr::Binary(op, a, b) => {
                let lhs = a.evaluate(x)?;
                match op {
                    BinaryOp::Add => lhs + b.evaluate(x)?,
                    BinaryOp::Sub => lhs - b.evaluate(x)?,
                    BinaryOp::Mul => lhs * b.evaluate(x)?,
                    BinaryOp::Div => {
                        let rhs = b.evaluate(x)?;
                        if rhs == 0.0 {
                            return Err(domain("division by zero"));
                        }
                        lhs / rhs
                    }
                    BinaryOp::Pow => match b.as_number().and_then(|n| n.as_integer()) {
                        Some(k) => {
                            if lhs == 0.0 && k < 0 {
                                return Err(domain("division by zero"));
                            }
                            number::powi_f64(lhs, k)
                        }
                        None => {
                            let rhs = b.evaluate(x)?;
                            if lhs == 0.0 && rhs < 0.0 {
                                return Err(domain("division by zero"));
                            }
                            lhs.powf(rhs)
                        }
                    },
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(domain("non-finite result"))
        }
    }

    /// `d^order/dx^order`, simplified after every order.
    pub fn differentiate(&self, order: usize) -> Result<Expr, ExprError> {
        let mut current = self.clone();
        for _ in 0..order {
            current = simplify(&derive(&current)?);
        }
        Ok(current)
    }

    pub fn simplify(&self) -> Expr {
        simplify(self)
    }
}

/// Canonicalizes through [`NormalForm`]: constant folding, 0/1 identities,
/// flattening, and collection of like terms with exact coefficients.
pub fn simplify(e: &Expr) -> Expr {
    NormalForm::from_expr(e).to_expr()
}

pub fn differentiate(e: &Expr, order: usize) -> Result<Expr, ExprError> {
    e.differentiate(order)
}

pub fn evaluate(e: &Expr, x: f64) -> Result<f64, ExprError> {
    e.evaluate(x)
}

// Rule-based derivative on the raw tree (no simplification).
fn derive(e: &Expr) -> Result<Expr, ExprError> {
    use BinaryOp::*;
    let zero = || Expr::int(0);
    Ok(match e {
        Expr::Rational(_) | Expr::Float(_) | Expr::Const(_) => zero(),
        Expr::Var => Expr::int(1),
        Expr::Unary(op, a) => {
            let inner = (**a).clone();
            let da = derive(a)?;
            let outer = match op {
                UnaryOp::Neg => return Ok(Expr::neg(da)),
                UnaryOp::Sin => Expr::unary(UnaryOp::Cos, inner),
                UnaryOp::Cos => Expr::neg(Expr::unary(UnaryOp::Sin, inner)),
                UnaryOp::Tan => {
                    Expr::div(Expr::int(1), Expr::pow(Expr::unary(UnaryOp::Cos, inner), Expr::int(2)))
                }
                UnaryOp::Exp => e.clone(),
                UnaryOp::Ln => Expr::div(Expr::int(1), inner),
                UnaryOp::Sinh => Expr::unary(UnaryOp::Cosh, inner),
                UnaryOp::Cosh => Expr::unary(UnaryOp::Sinh, inner),
                UnaryOp::Tanh => {
                    Expr::div(Expr::int(1), Expr::pow(Expr::unary(UnaryOp::Cosh, inner), Expr::int(2)))
                }
            };
            Expr::mul(outer, da)
        }
        Expr::Binary(op, a, b) => {
            let (u, v) = ((**a).clone(), (**b).clone());
            match op {
                Add => Expr::add(derive(a)?, derive(b)?),
                Sub => Expr::sub(derive(a)?, derive(b)?),
                Mul => Expr::add(Expr::mul(derive(a)?, v), Expr::mul(u, derive(b)?)),
                Div => Expr::div(
                    Expr::sub(Expr::mul(derive(a)?, v.clone()), Expr::mul(u, derive(b)?)),
                    Expr::pow(v, Expr::int(2)),
                ),
                Pow => {
                    if !b.depends_on_x() {
                        // v * u^(v-1) * u'
                        Expr::mul(Expr::mul(v.clone(), Expr::pow(u, Expr::sub(v, Expr::int(1)))), derive(a)?)
                    } else if !a.depends_on_x() {
                        // u^v * ln(u) * v'
                        Expr::mul(Expr::mul(e.clone(), Expr::unary(UnaryOp::Ln, u)), derive(b)?)
                    } else {
                        return Err(ExprError::Unsupported {
                            expr: e.to_string(),
                            reason: "x occurs in both base and exponent",
                        });
                    }
                }
            }
        }
    })
}
