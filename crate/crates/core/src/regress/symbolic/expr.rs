//! Expression trees: evaluation, constant extraction, occurrence counts.
//!
//! Primitives are protected so arbitrary trees stay finite on finite
//! inputs: `log(x) = ln(|x| + 1e-12)` and `exp` clamps its argument at 50.

use crate::scalar::Real;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

pub const LOG_GUARD: f64 = 1e-12;
pub const EXP_CLAMP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Sin,
    Cos,
    Exp,
    Log,
    Square,
}

impl UnaryOp {
    pub fn name(&self) -> &'static str {
        match self {
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Square => "square",
        }
    }

    fn apply<T: Real>(&self, x: T) -> T {
        match self {
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Exp => x.min(T::of(EXP_CLAMP)).exp(),
            UnaryOp::Log => (x.abs() + T::of(LOG_GUARD)).ln(),
            UnaryOp::Square => x * x,
        }
    }

    /// Derivative of the protected primitive at `x`.
    fn derivative<T: Real>(&self, x: T) -> T {
        match self {
            UnaryOp::Sin => x.cos(),
            UnaryOp::Cos => -x.sin(),
            UnaryOp::Exp => {
                if x < T::of(EXP_CLAMP) {
                    x.exp()
                } else {
                    T::zero()
                }
            }
            UnaryOp::Log => {
                let guard = x.abs() + T::of(LOG_GUARD);
                let sign = if x >= T::zero() { T::one() } else { -T::one() };
                sign / guard
            }
            UnaryOp::Square => T::of(2.0) * x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
}

impl BinaryOp {
    pub fn symbol(&self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
        }
    }
}

/// A symbolic expression over variables `u1..ur`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Constant(T),
    Variable(usize),
    Unary(UnaryOp, Box<Expr<T>>),
    Binary(BinaryOp, Box<Expr<T>>, Box<Expr<T>>),
}

impl<T: Real> Expr<T> {
    /// Node count.
    pub fn len(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Variable(_) => 1,
            Expr::Unary(_, a) => 1 + a.len(),
            Expr::Binary(_, a, b) => 1 + a.len() + b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Tree depth; a single leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Variable(_) => 1,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Largest variable index plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Constant(_) => 0,
            Expr::Variable(v) => v + 1,
            Expr::Unary(_, a) => a.arity(),
            Expr::Binary(_, a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn eval(&self, input: &[T]) -> T {
        match self {
            Expr::Constant(c) => *c,
            Expr::Variable(v) => input[*v],
            Expr::Unary(op, a) => op.apply(a.eval(input)),
            Expr::Binary(op, a, b) => {
                let x = a.eval(input);
                let y = b.eval(input);
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                }
            }
        }
    }

    /// Evaluates over every row of `inputs` (samples x variables).
    pub fn eval_batch(&self, inputs: &DMatrix<T>) -> Vec<T> {
        let n = inputs.nrows();
        match self {
            Expr::Constant(c) => vec![*c; n],
            Expr::Variable(v) => inputs.column(*v).iter().cloned().collect(),
            Expr::Unary(op, a) => {
                let mut vals = a.eval_batch(inputs);
                for v in vals.iter_mut() {
                    *v = op.apply(*v);
                }
                vals
            }
            Expr::Binary(op, a, b) => {
                let mut x = a.eval_batch(inputs);
                let y = b.eval_batch(inputs);
                match op {
                    BinaryOp::Add => {
                        for (x, y) in x.iter_mut().zip(y) {
                            *x += y;
                        }
                    }
                    BinaryOp::Sub => {
                        for (x, y) in x.iter_mut().zip(y) {
                            *x -= y;
                        }
                    }
                    BinaryOp::Mul => {
                        for (x, y) in x.iter_mut().zip(y) {
                            *x *= y;
                        }
                    }
                }
                x
            }
        }
    }

    /// Batch values plus partial derivatives with respect to every
    /// constant, in traversal order. `jacobian[s][j]` is the partial of
    /// sample j with respect to constant slot s.
    pub fn eval_batch_with_partials(&self, inputs: &DMatrix<T>) -> (Vec<T>, Vec<Vec<T>>) {
        let slots = self.constant_count();
        let n = inputs.nrows();
        let mut next_slot = 0usize;
        let (values, jac) = self.partials_inner(inputs, slots, n, &mut next_slot);
        (values, jac)
    }

    fn partials_inner(
        &self,
        inputs: &DMatrix<T>,
        slots: usize,
        n: usize,
        next_slot: &mut usize,
    ) -> (Vec<T>, Vec<Vec<T>>) {
        match self {
            Expr::Constant(c) => {
                let slot = *next_slot;
                *next_slot += 1;
                let mut jac = vec![vec![T::zero(); n]; slots];
                jac[slot] = vec![T::one(); n];
                (vec![*c; n], jac)
            }
            Expr::Variable(v) => (
                inputs.column(*v).iter().cloned().collect(),
                vec![vec![T::zero(); n]; slots],
            ),
            Expr::Unary(op, a) => {
                let (vals, mut jac) = a.partials_inner(inputs, slots, n, next_slot);
                let mut out = Vec::with_capacity(n);
                let mut chain = Vec::with_capacity(n);
                for &v in &vals {
                    out.push(op.apply(v));
                    chain.push(op.derivative(v));
                }
                for row in jac.iter_mut() {
                    for (d, &c) in row.iter_mut().zip(&chain) {
                        *d *= c;
                    }
                }
                (out, jac)
            }
            Expr::Binary(op, a, b) => {
                let (va, mut ja) = a.partials_inner(inputs, slots, n, next_slot);
                let (vb, jb) = b.partials_inner(inputs, slots, n, next_slot);
                match op {
                    BinaryOp::Add => {
                        let vals = va.iter().zip(&vb).map(|(&x, &y)| x + y).collect();
                        for (ra, rb) in ja.iter_mut().zip(jb) {
                            for (d, db) in ra.iter_mut().zip(rb) {
                                *d += db;
                            }
                        }
                        (vals, ja)
                    }
                    BinaryOp::Sub => {
                        let vals = va.iter().zip(&vb).map(|(&x, &y)| x - y).collect();
                        for (ra, rb) in ja.iter_mut().zip(jb) {
                            for (d, db) in ra.iter_mut().zip(rb) {
                                *d -= db;
                            }
                        }
                        (vals, ja)
                    }
                    BinaryOp::Mul => {
                        let vals: Vec<T> =
                            va.iter().zip(&vb).map(|(&x, &y)| x * y).collect();
                        for (ra, rb) in ja.iter_mut().zip(jb) {
                            for i in 0..n {
                                ra[i] = ra[i] * vb[i] + rb[i] * va[i];
                            }
                        }
                        (vals, ja)
                    }
                }
            }
        }
    }

    pub fn constant_count(&self) -> usize {
        match self {
            Expr::Constant(_) => 1,
            Expr::Variable(_) => 0,
            Expr::Unary(_, a) => a.constant_count(),
            Expr::Binary(_, a, b) => a.constant_count() + b.constant_count(),
        }
    }

    /// Constants in traversal order.
    pub fn constants(&self) -> Vec<T> {
        let mut out = Vec::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut Vec<T>) {
        match self {
            Expr::Constant(c) => out.push(*c),
            Expr::Variable(_) => {}
            Expr::Unary(_, a) => a.collect_constants(out),
            Expr::Binary(_, a, b) => {
                a.collect_constants(out);
                b.collect_constants(out);
            }
        }
    }

    /// Overwrites constants in traversal order.
    pub fn set_constants(&mut self, values: &[T]) {
        let mut cursor = 0;
        self.write_constants(values, &mut cursor);
        debug_assert_eq!(cursor, values.len());
    }

    fn write_constants(&mut self, values: &[T], cursor: &mut usize) {
        match self {
            Expr::Constant(c) => {
                *c = values[*cursor];
                *cursor += 1;
            }
            Expr::Variable(_) => {}
            Expr::Unary(_, a) => a.write_constants(values, cursor),
            Expr::Binary(_, a, b) => {
                a.write_constants(values, cursor);
                b.write_constants(values, cursor);
            }
        }
    }

    /// Node occurrence counts of variables and named functions. Constants
    /// and arithmetic operators are not counted.
    pub fn occurrences(&self) -> BTreeMap<String, usize> {
        let mut map = BTreeMap::new();
        self.count_into(&mut map);
        map
    }

    fn count_into(&self, map: &mut BTreeMap<String, usize>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Variable(v) => {
                *map.entry(format!("u{}", v + 1)).or_insert(0) += 1;
            }
            Expr::Unary(op, a) => {
                *map.entry(op.name().to_string()).or_insert(0) += 1;
                a.count_into(map);
            }
            Expr::Binary(_, a, b) => {
                a.count_into(map);
                b.count_into(map);
            }
        }
    }
}
