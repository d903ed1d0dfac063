//! Forward-mode differentiable scalars.
//!
//! [`Dual1`] carries a value and its gradient with respect to `n` seeded
//! variables; [`Dual2`] additionally carries the Hessian. Both are built so
//! that every arithmetic rule produces an exactly symmetric Hessian.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by the expression evaluator.
pub trait Scalar: Clone {
    fn constant(value: f64, n: usize) -> Self;
    fn value(&self) -> f64;
    /// True when every derivative slot is zero.
    fn is_constant(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Applies a scalar function `f` given `f(v)`, `f'(v)` and `f''(v)` at the
    /// current value `v`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;

    fn recip(&self) -> Self {
        let v = self.value();
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Scalar for f64 {
    fn constant(value: f64, _n: usize) -> Self {
        value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn is_constant(&self) -> bool {
        true
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
}

/// First-order dual number over `grad.len()` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Dual1 {
    pub fn constant(value: f64, n: usize) -> Self {
        Dual1 {
            value,
            grad: vec![0.0; n],
        }
    }

    /// The `k`-th of `n` independent variables, at `value`.
    pub fn variable(value: f64, k: usize, n: usize) -> Self {
        let mut d = Self::constant(value, n);
        d.grad[k] = 1.0;
        d
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    fn zip(&self, rhs: &Self, value: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.dim(), rhs.dim());
        Dual1 {
            value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Scalar for Dual1 {
    fn constant(value: f64, n: usize) -> Self {
        Dual1::constant(value, n)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn is_constant(&self) -> bool {
        self.grad.iter().all(|g| *g == 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, self.value + rhs.value, |a, b| a + b)
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, self.value - rhs.value, |a, b| a - b)
    }
    fn mul(&self, rhs: &Self) -> Self {
        let (u, v) = (self.value, rhs.value);
        self.zip(rhs, u * v, |a, b| a * v + u * b)
    }
    fn neg(&self) -> Self {
        Dual1 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
        }
    }
    fn chain(&self, f0: f64, f1: f64, _f2: f64) -> Self {
        Dual1 {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
        }
    }
}

/// Second-order dual number: value, gradient and row-major `n x n` Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Dual2 {
    pub fn constant(value: f64, n: usize) -> Self {
        Dual2 {
            value,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        }
    }

    pub fn variable(value: f64, k: usize, n: usize) -> Self {
        let mut d = Self::constant(value, n);
        d.grad[k] = 1.0;
        d
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    fn zip(&self, rhs: &Self, value: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.dim(), rhs.dim());
        Dual2 {
            value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| f(*a, *b)).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

impl Scalar for Dual2 {
    fn constant(value: f64, n: usize) -> Self {
        Dual2::constant(value, n)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn is_constant(&self) -> bool {
        self.grad.iter().all(|g| *g == 0.0) && self.hess.iter().all(|h| *h == 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, self.value + rhs.value, |a, b| a + b)
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, self.value - rhs.value, |a, b| a - b)
    }
    fn mul(&self, rhs: &Self) -> Self {
        let n = self.dim();
        let (u, v) = (self.value, rhs.value);
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(a, b)| a * v + u * b)
            .collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // The cross term is a sum of two products whose operands swap
                // under i <-> j; IEEE addition is commutative, so H stays exactly
                // symmetric.
                let cross = self.grad[i] * rhs.grad[j] + self.grad[j] * rhs.grad[i];
                hess[i * n + j] = self.hess[i * n + j] * v + u * rhs.hess[i * n + j] + cross;
            }
        }
        Dual2 {
            value: u * v,
            grad,
            hess,
        }
    }
    fn neg(&self) -> Self {
        Dual2 {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = f2 * (self.grad[i] * self.grad[j]) + f1 * self.hess[i * n + j];
            }
        }
        Dual2 {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
            hess,
        }
    }
}

macro_rules! dual_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                Scalar::add(&self, &rhs)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                Scalar::sub(&self, &rhs)
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                Scalar::mul(&self, &rhs)
            }
        }
        impl Div for $t {
            type Output = $t;
            fn div(self, rhs: $t) -> $t {
                Scalar::mul(&self, &rhs.recip())
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                Scalar::neg(&self)
            }
        }
    };
}

dual_ops!(Dual1);
dual_ops!(Dual2);
