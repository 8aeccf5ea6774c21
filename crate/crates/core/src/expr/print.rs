use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_POWER: u8 = 3;
const PREC_BASE: u8 = 4;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Rational(r) if !r.is_integer() => PREC_PRODUCT,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_SUM,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_PRODUCT,
        Expr::Binary(BinaryOp::Pow, ..) => PREC_POWER,
        _ => PREC_BASE,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints in the parser's own grammar, so `parse(&e.to_string())` evaluates
/// identically to `e`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Expr::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Expr::Float(v) => write!(f, "{v:?}"),
            Expr::Const(c) => f.write_str(c.name()),
            Expr::Var => f.write_str("x"),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                write_operand(f, a, precedence(a) < PREC_BASE)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let prec = precedence(self);
                let (sym, left_parens, right_parens) = match op {
                    BinaryOp::Add => (" + ", false, precedence(b) <= prec),
                    BinaryOp::Sub => (" - ", false, precedence(b) <= prec),
                    BinaryOp::Mul => ("*", precedence(a) < prec, precedence(b) <= prec),
                    BinaryOp::Div => ("/", precedence(a) < prec, precedence(b) <= prec),
                    BinaryOp::Pow => (
                        "^",
                        precedence(a) <= prec
                            || matches!(**a, Expr::Unary(UnaryOp::Neg, _))
                            || a.as_number().is_some_and(|n| n.is_negative()),
                        precedence(b) < prec,
                    ),
                };
                write_operand(f, a, left_parens)?;
                f.write_str(sym)?;
                write_operand(f, b, right_parens)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr, Rational};

    #[test]
    fn prints_minimal_parentheses() {
        for s in [
            "sin(pi*x)",
            "exp(x)/(1 + exp(x))",
            "x^3 - 2*x",
            "2^3^2",
            "(2^3)^2",
            "x - (1 - x)",
            "x/(2*x)",
            "-(x^2)",
            "(-x)^2",
        ] {
            assert_eq!(parse(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn rationals_and_floats() {
        let e = Expr::div(Expr::Var, Expr::Rational(Rational::new(3, 4)));
        assert_eq!(e.to_string(), "x/(3/4)");
        let e = Expr::pow(Expr::Var, Expr::Rational(Rational::new(1, 2)));
        assert_eq!(e.to_string(), "x^(1/2)");
        assert_eq!(Expr::mul(Expr::Float(1.5e-7), Expr::Var).to_string(), "1.5e-7*x");
        let neg = Expr::pow(Expr::Float(-2.0), Expr::Var);
        assert_eq!(neg.to_string(), "(-2.0)^x");
    }
}
