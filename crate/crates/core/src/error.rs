use thiserror::Error;

use crate::flow::Trajectory;

/// Failure to turn source text into an [`Expr`](crate::expr::Expr).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

/// Numerical evaluation left the domain of an operation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {op} of {arg}")]
    Domain { op: &'static str, arg: f64 },
    #[error("non-finite result from {op}")]
    NonFinite { op: &'static str },
    #[error("parameter `{0}` has no value")]
    UnboundParameter(String),
    #[error("point has {got} coordinates, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("in component {component}: {source}")]
    Component {
        component: usize,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid definition: {0}")]
    Definition(String),
    #[error("invalid region: {0}")]
    Region(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("matrix is singular (pivot {pivot:e})")]
    Singular { pivot: f64 },
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("eigenvalue iteration did not converge after {iterations} iterations on {order}x{order} matrix {matrix:?}")]
    EigenNoConvergence {
        order: usize,
        iterations: usize,
        matrix: Vec<f64>,
    },
    #[error("newton did not converge: {reason} after {iterations} iterations (residual {residual:e})")]
    NewtonNoConvergence {
        reason: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("transformation declared linear but has Hessian entry {max_entry:e}")]
    NotLinear { max_entry: f64 },
    #[error("inverse does not invert the map (worst residual {residual:e})")]
    InverseMismatch { residual: f64 },
    #[error("trajectory escaped (norm > {threshold:e}) at t = {time}")]
    BlowUp {
        time: f64,
        threshold: f64,
        partial: Box<Trajectory>,
    },
    #[error("step size underflow at t = {time} (step {step:e})")]
    StepUnderflow { time: f64, step: f64 },
    #[error("step limit of {steps} reached at t = {time}")]
    StepLimit { time: f64, steps: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
