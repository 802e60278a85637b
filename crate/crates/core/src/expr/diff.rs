use super::{integer_exponent, BinaryOp, Expr, UnaryOp};

/// Constructors that fold literal subtrees and drop additive zeros and
/// multiplicative ones. Nothing else is simplified.
pub(crate) mod build {
    use super::super::{integer_exponent, powi, BinaryOp, Expr, UnaryOp};

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if let Expr::Const(c) = a {
            if let Ok(v) = op.apply(c) {
                return Expr::Const(v);
            }
        }
        if op == UnaryOp::Neg {
            if let Expr::Unary(UnaryOp::Neg, inner) = a {
                return *inner;
            }
        }
        Expr::Unary(op, Box::new(a))
    }

    pub fn neg(a: Expr) -> Expr {
        unary(UnaryOp::Neg, a)
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => add(a, b),
            BinaryOp::Sub => sub(a, b),
            BinaryOp::Mul => mul(a, b),
            BinaryOp::Div => div(a, b),
            BinaryOp::Pow => pow(a, b),
        }
    }

    fn fold(op: BinaryOp, a: &Expr, b: &Expr) -> Option<Expr> {
        let (x, y) = (a.as_const()?, b.as_const()?);
        let v = match (op, integer_exponent(b)) {
            (BinaryOp::Pow, Some(k)) => powi(x, k),
            _ => op.apply(x, y),
        };
        v.ok().map(Expr::Const)
    }

    fn raw(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if let Some(c) = fold(BinaryOp::Add, &a, &b) {
            return c;
        }
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        raw(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let Some(c) = fold(BinaryOp::Sub, &a, &b) {
            return c;
        }
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return neg(b);
        }
        raw(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if let Some(c) = fold(BinaryOp::Mul, &a, &b) {
            return c;
        }
        if a.is_zero() || b.is_zero() {
            return Expr::Const(0.0);
        }
        match (a.as_const(), b.as_const()) {
            (Some(c), _) if c == 1.0 => b,
            (_, Some(c)) if c == 1.0 => a,
            (Some(c), _) if c == -1.0 => neg(b),
            (_, Some(c)) if c == -1.0 => neg(a),
            _ => raw(BinaryOp::Mul, a, b),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if let Some(c) = fold(BinaryOp::Div, &a, &b) {
            return c;
        }
        if a.is_zero() && !b.is_zero() {
            return Expr::Const(0.0);
        }
        if b.as_const() == Some(1.0) {
            return a;
        }
        raw(BinaryOp::Div, a, b)
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        if let Some(c) = fold(BinaryOp::Pow, &a, &b) {
            return c;
        }
        match b.as_const() {
            Some(c) if c == 0.0 => Expr::Const(1.0),
            Some(c) if c == 1.0 => a,
            _ => raw(BinaryOp::Pow, a, b),
        }
    }
}

use build::{add, div, mul, neg, pow, sub, unary};

/// Exact partial derivative with respect to the state variable `wrt`.
/// Parameters are constants.
pub fn differentiate(e: &Expr, wrt: &str) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
        Expr::Var { name, .. } => Expr::Const(if &**name == wrt { 1.0 } else { 0.0 }),
        Expr::Unary(op, a) => {
            let da = differentiate(a, wrt);
            if da.is_zero() {
                return Expr::Const(0.0);
            }
            let a = (**a).clone();
            match op {
                UnaryOp::Neg => neg(da),
                UnaryOp::Sqrt => div(da, mul(Expr::Const(2.0), unary(UnaryOp::Sqrt, a))),
                UnaryOp::Sin => mul(unary(UnaryOp::Cos, a), da),
                UnaryOp::Cos => mul(neg(unary(UnaryOp::Sin, a)), da),
                UnaryOp::Exp => mul(unary(UnaryOp::Exp, a), da),
                UnaryOp::Log => div(da, a),
                UnaryOp::Abs => mul(unary(UnaryOp::Sign, a), da),
                UnaryOp::Sign => Expr::Const(0.0),
            }
        }
        Expr::Binary(op, a, b) => {
            let da = differentiate(a, wrt);
            let db = differentiate(b, wrt);
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => add(da, db),
                BinaryOp::Sub => sub(da, db),
                BinaryOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                BinaryOp::Div => {
                    if db.is_zero() {
                        div(da, b)
                    } else {
                        div(sub(mul(da, b.clone()), mul(a, db)), pow(b, Expr::Const(2.0)))
                    }
                }
                BinaryOp::Pow => {
                    if let (Some(k), true) = (integer_exponent(&b), db.is_zero()) {
                        let k = f64::from(k);
                        return mul(mul(Expr::Const(k), pow(a, Expr::Const(k - 1.0))), da);
                    }
                    // d(a^b) = a^b * (db*log(a) + b*da/a)
                    let log_term = mul(db, unary(UnaryOp::Log, a.clone()));
                    let ratio_term = mul(b.clone(), div(da, a.clone()));
                    mul(pow(a, b), add(log_term, ratio_term))
                }
            }
        }
    }
}
