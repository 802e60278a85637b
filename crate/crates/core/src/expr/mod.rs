//! Expression language for vector fields and coordinate maps.
//!
//! Expressions are immutable trees over real constants, state variables
//! (resolved to a coordinate index at parse time) and named parameters.
//! The grammar is infix with the usual precedence, `^` binding tighter
//! than unary minus, and function-call syntax for the elementary
//! functions listed in [`UnaryOp`].

mod diff;
mod parse;
mod program;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use diff::differentiate;
pub(crate) use diff::build;
pub use parse::parse_expression;
pub(crate) use program::Program;

use crate::error::{EvalError, ParseError};
use crate::system::ParameterSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    /// `sign(0) = 0`; only produced by differentiating `abs`, but also parseable.
    Sign,
}

impl UnaryOp {
    pub const FUNCTIONS: [UnaryOp; 7] = [
        UnaryOp::Sqrt,
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Abs,
        UnaryOp::Sign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Abs => "abs",
            UnaryOp::Sign => "sign",
        }
    }

    pub fn from_function_name(name: &str) -> Option<UnaryOp> {
        UnaryOp::FUNCTIONS.into_iter().find(|op| op.name() == name)
    }

    pub(crate) fn apply(self, a: f64) -> Result<f64, EvalError> {
        let out = match self {
            UnaryOp::Neg => -a,
            UnaryOp::Sqrt => {
                if a < 0.0 {
                    return Err(EvalError::Domain { op: "sqrt", arg: a });
                }
                a.sqrt()
            }
            UnaryOp::Sin => a.sin(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Exp => a.exp(),
            UnaryOp::Log => {
                if a <= 0.0 {
                    return Err(EvalError::Domain { op: "log", arg: a });
                }
                a.ln()
            }
            UnaryOp::Abs => a.abs(),
            UnaryOp::Sign => {
                if a > 0.0 {
                    1.0
                } else if a < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        };
        finite(out, self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    /// Arithmetic for every operator; `Pow` here is the general `exp(b ln a)` form.
    pub(crate) fn apply(self, a: f64, b: f64) -> Result<f64, EvalError> {
        let out = match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    return Err(EvalError::Domain { op: "division", arg: a });
                }
                a / b
            }
            BinaryOp::Pow => {
                if a <= 0.0 {
                    return Err(EvalError::Domain { op: "power with non-integer exponent", arg: a });
                }
                a.powf(b)
            }
        };
        finite(out, self.symbol())
    }
}

pub(crate) fn powi(a: f64, k: i32) -> Result<f64, EvalError> {
    if a == 0.0 && k < 0 {
        return Err(EvalError::Domain { op: "negative power", arg: a });
    }
    finite(a.powi(k), "^")
}

fn finite(v: f64, op: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { op })
    }
}

/// Integer exponent of a literal, when `^` should use the power rule.
pub(crate) fn integer_exponent(e: &Expr) -> Option<i32> {
    match e {
        Expr::Const(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => Some(*c as i32),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// State variable, `index` is its position in the state vector.
    Var { name: Arc<str>, index: usize },
    Param(Arc<str>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(name: &str, index: usize) -> Expr {
        Expr::Var { name: name.into(), index }
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.into())
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn evaluate(&self, point: &[f64], params: &ParameterSet) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var { index, .. } => point.get(*index).copied().ok_or(EvalError::Dimension {
                expected: index + 1,
                got: point.len(),
            }),
            Expr::Param(name) => params
                .get(name)
                .ok_or_else(|| EvalError::UnboundParameter(name.to_string())),
            Expr::Unary(op, a) => op.apply(a.evaluate(point, params)?),
            Expr::Binary(BinaryOp::Pow, a, b) => {
                let base = a.evaluate(point, params)?;
                match integer_exponent(b) {
                    Some(k) => powi(base, k),
                    None => BinaryOp::Pow.apply(base, b.evaluate(point, params)?),
                }
            }
            Expr::Binary(op, a, b) => {
                op.apply(a.evaluate(point, params)?, b.evaluate(point, params)?)
            }
        }
    }

    /// Every variable and parameter name occurring in the tree.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expr::Var { name, .. } | Expr::Param(name) => {
                names.insert(name.to_string());
            }
            _ => {}
        });
        names
    }

    pub fn parameter_names(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Param(name) = e {
                names.insert(name.to_string());
            }
        });
        names
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Unary(_, a) => a.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Replace each state variable by an expression, keeping parameters.
    /// Literal subtrees created by the replacement are folded.
    pub fn substitute(&self, replace: &impl Fn(usize, &str) -> Expr) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => self.clone(),
            Expr::Var { name, index } => replace(*index, name),
            Expr::Unary(op, a) => build::unary(*op, a.substitute(replace)),
            Expr::Binary(op, a, b) => {
                build::binary(*op, a.substitute(replace), b.substitute(replace))
            }
        }
    }

    pub(crate) fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var { name, .. } | Expr::Param(name) => f.write_str(name),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let (left_parens, right_parens) = match op {
                    BinaryOp::Add | BinaryOp::Sub => (a.precedence() < 1, b.precedence() <= 1),
                    BinaryOp::Mul | BinaryOp::Div => (a.precedence() < 2, b.precedence() <= 2),
                    BinaryOp::Pow => (a.precedence() <= 4, b.precedence() < 3),
                };
                write_operand(f, a, left_parens)?;
                match op {
                    BinaryOp::Add | BinaryOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => f.write_str(op.symbol())?,
                }
                write_operand(f, b, right_parens)
            }
        }
    }
}

/// Names visible to the parser: state variables (in coordinate order) and parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    states: Vec<String>,
    params: Vec<String>,
}

impl Scope {
    pub fn new<S: AsRef<str>, P: AsRef<str>>(states: &[S], params: &[P]) -> Scope {
        Scope {
            states: states.iter().map(|s| s.as_ref().to_string()).collect(),
            params: params.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p == name)
    }
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Expr {
    pub fn parse(source: &str, scope: &Scope) -> Result<Expr, ParseError> {
        parse_expression(source, scope)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope() -> Scope {
        Scope::new(&["x", "y"], &["A"])
    }

    fn params() -> ParameterSet {
        ParameterSet::from_pairs([("A", 1.0)])
    }

    #[test]
    fn evaluates_example_field() {
        let e = Expr::parse("x^2 - A^2", &scope()).unwrap();
        assert_eq!(e.evaluate(&[3.0, 0.0], &params()).unwrap(), 8.0);
        assert_eq!(e.evaluate(&[0.0, 0.0], &params()).unwrap(), -1.0);
    }

    #[test]
    fn sqrt_of_negative_is_domain_error() {
        let e = Expr::parse("sqrt(y)", &scope()).unwrap();
        let err = e.evaluate(&[0.0, -1.0], &params()).unwrap_err();
        assert!(matches!(err, EvalError::Domain { op: "sqrt", .. }));
    }

    #[test]
    fn log_and_division_domains() {
        let s = scope();
        let p = params();
        assert!(Expr::parse("log(x)", &s).unwrap().evaluate(&[0.0, 0.0], &p).is_err());
        assert!(Expr::parse("1/x", &s).unwrap().evaluate(&[0.0, 0.0], &p).is_err());
        assert!(Expr::parse("x^-1", &s).unwrap().evaluate(&[0.0, 0.0], &p).is_err());
        assert!(Expr::parse("x^A", &s).unwrap().evaluate(&[-2.0, 0.0], &p).is_err());
        assert_eq!(Expr::parse("x^3", &s).unwrap().evaluate(&[-2.0, 0.0], &p), Ok(-8.0));
        assert!(Expr::parse("exp(x)", &s).unwrap().evaluate(&[1000.0, 0.0], &p).is_err());
    }

    #[test]
    fn free_variables_collects_both_kinds() {
        let s = Scope::new(&["x"], &["A"]);
        let names: Vec<_> = Expr::parse("2*x*(x^2-A^2)", &s).unwrap().free_variables().into_iter().collect();
        assert_eq!(names, ["A", "x"]);
        assert!(Expr::parse("3.0", &s).unwrap().free_variables().is_empty());
    }

    #[test]
    fn display_keeps_precedence() {
        let s = scope();
        for (src, printed) in [
            ("x^2 - A^2", "x^2 - A^2"),
            ("-x^2", "-x^2"),
            ("(-x)^2", "(-x)^2"),
            ("x - (y - A)", "x - (y - A)"),
            ("(x - y) - A", "x - y - A"),
            ("x / (y * A)", "x/(y*A)"),
            ("(x^y)^A", "(x^y)^A"),
            ("x^y^A", "x^y^A"),
            ("x^-2", "x^-2"),
            ("(-2)^2", "(-2)^2"),
            ("sin(x + y)*2", "sin(x + y)*2"),
        ] {
            assert_eq!(Expr::parse(src, &s).unwrap().to_string(), printed, "{src}");
        }
    }

    #[test]
    fn substitute_folds_constants() {
        let s = Scope::new(&["x"], &["A"]);
        let e = Expr::parse("x^2 - A^2 + 3*x", &s).unwrap();
        let sub = e.substitute(&|_, _| Expr::Const(2.0));
        assert_eq!(sub.to_string(), "4 - A^2 + 6");
    }
}
