use std::collections::HashMap;

use super::{integer_exponent, powi, BinaryOp, Expr, UnaryOp};
use crate::error::EvalError;
use crate::system::ParameterSet;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    PowInt(usize, i32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Var(usize),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    PowInt(usize, i32),
}

/// A batch of expressions flattened into one straight-line program with
/// shared subexpressions and parameters bound to their values.
///
/// Produces bit-identical results to [`Expr::evaluate`].
#[derive(Debug, Clone, Default)]
pub(crate) struct Program {
    ops: Vec<Op>,
    outputs: Vec<usize>,
    dim: usize,
}

struct Builder<'a> {
    ops: Vec<Op>,
    index: HashMap<Key, usize>,
    params: &'a ParameterSet,
}

impl Builder<'_> {
    fn push(&mut self, key: Key, op: Op) -> usize {
        if let Some(&slot) = self.index.get(&key) {
            return slot;
        }
        self.ops.push(op);
        let slot = self.ops.len() - 1;
        self.index.insert(key, slot);
        slot
    }

    fn constant(&mut self, v: f64) -> usize {
        self.push(Key::Const(v.to_bits()), Op::Const(v))
    }

    fn compile(&mut self, e: &Expr) -> Result<usize, EvalError> {
        Ok(match e {
            Expr::Const(c) => self.constant(*c),
            Expr::Param(name) => {
                let v = self
                    .params
                    .get(name)
                    .ok_or_else(|| EvalError::UnboundParameter(name.to_string()))?;
                self.constant(v)
            }
            Expr::Var { index, .. } => self.push(Key::Var(*index), Op::Var(*index)),
            Expr::Unary(op, a) => {
                let a = self.compile(a)?;
                self.push(Key::Unary(*op, a), Op::Unary(*op, a))
            }
            Expr::Binary(BinaryOp::Pow, a, b) if integer_exponent(b).is_some() => {
                let k = integer_exponent(b).unwrap_or_default();
                let a = self.compile(a)?;
                self.push(Key::PowInt(a, k), Op::PowInt(a, k))
            }
            Expr::Binary(op, a, b) => {
                let a = self.compile(a)?;
                let b = self.compile(b)?;
                self.push(Key::Binary(*op, a, b), Op::Binary(*op, a, b))
            }
        })
    }
}

impl Program {
    pub fn compile<'e>(
        exprs: impl IntoIterator<Item = &'e Expr>,
        dim: usize,
        params: &ParameterSet,
    ) -> Result<Program, EvalError> {
        let mut builder = Builder { ops: Vec::new(), index: HashMap::new(), params };
        let outputs = exprs
            .into_iter()
            .map(|e| builder.compile(e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Program { ops: builder.ops, outputs, dim })
    }

    pub fn eval_into(&self, point: &[f64], out: &mut Vec<f64>) -> Result<(), EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::Dimension { expected: self.dim, got: point.len() });
        }
        let mut slots = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(i) => point[i],
                Op::Unary(u, a) => u.apply(slots[a])?,
                Op::Binary(b, x, y) => b.apply(slots[x], slots[y])?,
                Op::PowInt(a, k) => powi(slots[a], k)?,
            };
            slots.push(v);
        }
        out.clear();
        out.extend(self.outputs.iter().map(|&s| slots[s]));
        Ok(())
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut out = Vec::with_capacity(self.outputs.len());
        self.eval_into(point, &mut out)?;
        Ok(out)
    }
}
