//! The metric-expression language: parsing, printing and evaluation over
//! real numbers and first/second-order dual numbers.

mod ast;
mod dual;
mod parser;

use std::collections::HashMap;

pub use ast::{BinOp, Expr, Func, Var};
pub use dual::{Dual1, Dual2, Scalar};
pub use parser::parse;

use crate::error::{GeomError, Result};

/// Largest integer exponent evaluated by repeated multiplication.
const MAX_INT_EXPONENT: f64 = 64.0;

fn domain(msg: impl Into<String>) -> GeomError {
    GeomError::Domain(msg.into())
}

fn integer_power<S: Scalar>(base: &S, n: i64, dim: usize) -> Result<S> {
    if n == 0 {
        return Ok(S::constant(1.0, dim));
    }
    let mut acc: Option<S> = None;
    let mut sq = base.clone();
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => a.mul(&sq),
            });
        }
        k >>= 1;
        if k > 0 {
            sq = sq.mul(&sq);
        }
    }
    let pos = acc.expect("n != 0");
    if n > 0 {
        Ok(pos)
    } else if pos.value() == 0.0 {
        Err(domain("division by zero in negative integer power"))
    } else {
        Ok(pos.recip())
    }
}

fn apply_func<S: Scalar>(f: Func, a: &S) -> Result<S> {
    let x = a.value();
    Ok(match f {
        Func::Sin => {
            let (s, c) = x.sin_cos();
            a.chain(s, c, -s)
        }
        Func::Cos => {
            let (s, c) = x.sin_cos();
            a.chain(c, -s, -c)
        }
        Func::Tan => {
            let t = x.tan();
            let sec2 = 1.0 + t * t;
            a.chain(t, sec2, 2.0 * t * sec2)
        }
        Func::Sinh => a.chain(x.sinh(), x.cosh(), x.sinh()),
        Func::Cosh => a.chain(x.cosh(), x.sinh(), x.cosh()),
        Func::Tanh => {
            let t = x.tanh();
            let d = 1.0 - t * t;
            a.chain(t, d, -2.0 * t * d)
        }
        Func::Exp => {
            let e = x.exp();
            a.chain(e, e, e)
        }
        Func::Log => {
            if x <= 0.0 {
                return Err(domain(format!("log of non-positive argument {x}")));
            }
            a.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err(domain(format!("sqrt of negative argument {x}")));
            }
            let r = x.sqrt();
            if a.is_constant() {
                a.chain(r, 0.0, 0.0)
            } else if r == 0.0 {
                return Err(domain("sqrt is not differentiable at 0"));
            } else {
                a.chain(r, 0.5 / r, -0.25 / (r * x))
            }
        }
        // Derivative sign(x), taken as 0 at the kink.
        Func::Abs => {
            let s = if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            };
            a.chain(x.abs(), s, 0.0)
        }
    })
}

impl Expr {
    /// Evaluates over any [`Scalar`] given a variable lookup.
    pub fn eval_with<S: Scalar>(
        &self,
        lookup: &dyn Fn(&Var) -> Result<S>,
        dim: usize,
    ) -> Result<S> {
        match self {
            Expr::Const(c) => Ok(S::constant(*c, dim)),
            Expr::Var(v) => lookup(v),
            Expr::Neg(a) => Ok(a.eval_with(lookup, dim)?.neg()),
            Expr::Func(f, a) => apply_func(*f, &a.eval_with(lookup, dim)?),
            Expr::Binary(op, a, b) => {
                let x = a.eval_with(lookup, dim)?;
                let y = b.eval_with(lookup, dim)?;
                match op {
                    BinOp::Add => Ok(x.add(&y)),
                    BinOp::Sub => Ok(x.sub(&y)),
                    BinOp::Mul => Ok(x.mul(&y)),
                    BinOp::Div => {
                        if y.value() == 0.0 {
                            return Err(domain("division by zero"));
                        }
                        Ok(x.mul(&y.recip()))
                    }
                    BinOp::Pow => power(&x, &y, dim),
                }
            }
        }
    }

    /// Evaluates with variable values taken by slot; slots below `n_seeded`
    /// are the independent variables of the derivative.
    pub fn eval_slots<S: Scalar>(
        &self,
        values: &[f64],
        n_seeded: usize,
        seed: &dyn Fn(f64, usize) -> S,
    ) -> Result<S> {
        let lookup = |v: &Var| -> Result<S> {
            let x = *values
                .get(v.slot)
                .ok_or_else(|| GeomError::UnknownIdentifier(v.name.clone()))?;
            Ok(if v.slot < n_seeded {
                seed(x, v.slot)
            } else {
                S::constant(x, n_seeded)
            })
        };
        self.eval_with(&lookup, n_seeded)
    }

    pub fn eval_slots_real(&self, values: &[f64]) -> Result<f64> {
        self.eval_slots(values, 0, &|x, _| x)
    }

    pub fn eval_slots_dual1(&self, values: &[f64], n_seeded: usize) -> Result<Dual1> {
        self.eval_slots(values, n_seeded, &|x, k| Dual1::variable(x, k, n_seeded))
    }

    pub fn eval_slots_dual2(&self, values: &[f64], n_seeded: usize) -> Result<Dual2> {
        self.eval_slots(values, n_seeded, &|x, k| Dual2::variable(x, k, n_seeded))
    }

    /// Plain IEEE double evaluation with variables bound by name.
    pub fn eval_real(&self, bindings: &HashMap<String, f64>) -> Result<f64> {
        let lookup = |v: &Var| -> Result<f64> {
            bindings
                .get(&v.name)
                .copied()
                .ok_or_else(|| GeomError::UnknownIdentifier(v.name.clone()))
        };
        self.eval_with(&lookup, 0)
    }

    /// Value and gradient with respect to the variables in `coord_order`;
    /// every other bound name is a parameter with zero gradient.
    pub fn eval_dual1(
        &self,
        bindings: &HashMap<String, f64>,
        coord_order: &[&str],
    ) -> Result<Dual1> {
        let n = coord_order.len();
        self.eval_named(bindings, coord_order, &|x, k| Dual1::variable(x, k, n))
    }

    /// As [`Expr::eval_dual1`], plus the exact Hessian.
    pub fn eval_dual2(
        &self,
        bindings: &HashMap<String, f64>,
        coord_order: &[&str],
    ) -> Result<Dual2> {
        let n = coord_order.len();
        self.eval_named(bindings, coord_order, &|x, k| Dual2::variable(x, k, n))
    }

    fn eval_named<S: Scalar>(
        &self,
        bindings: &HashMap<String, f64>,
        coord_order: &[&str],
        seed: &dyn Fn(f64, usize) -> S,
    ) -> Result<S> {
        let n = coord_order.len();
        let lookup = |v: &Var| -> Result<S> {
            let x = bindings
                .get(&v.name)
                .copied()
                .ok_or_else(|| GeomError::UnknownIdentifier(v.name.clone()))?;
            Ok(match coord_order.iter().position(|c| *c == v.name) {
                Some(k) => seed(x, k),
                None => S::constant(x, n),
            })
        };
        self.eval_with(&lookup, n)
    }
}

fn power<S: Scalar>(base: &S, exponent: &S, dim: usize) -> Result<S> {
    let e = exponent.value();
    if exponent.is_constant() && e.fract() == 0.0 && e.abs() <= MAX_INT_EXPONENT {
        return integer_power(base, e as i64, dim);
    }
    let b = base.value();
    if b <= 0.0 {
        return Err(domain(format!(
            "non-integer power {e} of non-positive base {b}"
        )));
    }
    // exp(e * log b)
    let log_b = base.chain(b.ln(), 1.0 / b, -1.0 / (b * b));
    let prod = exponent.mul(&log_b);
    let v = prod.value().exp();
    Ok(prod.chain(v, v, v))
}
