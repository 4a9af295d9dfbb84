//! Algebraic normalization of expression trees: constant folding, removal
//! of additive zeros and unit factors, flattening of nested sums and
//! products. The simplified tree evaluates to the same values as the input
//! (protected primitives are folded with their protected semantics).

use crate::regress::symbolic::expr::{BinaryOp, Expr, UnaryOp};
use crate::scalar::Real;

pub fn simplify<T: Real>(expr: &Expr<T>) -> Expr<T> {
    match expr {
        Expr::Constant(_) | Expr::Variable(_) => expr.clone(),
        Expr::Unary(op, a) => {
            let a = simplify(a);
            if let Expr::Constant(c) = a {
                return Expr::Constant(apply_protected(*op, c));
            }
            Expr::Unary(*op, Box::new(a))
        }
        Expr::Binary(op, _, _) => match op {
            BinaryOp::Add | BinaryOp::Sub => simplify_sum(expr),
            BinaryOp::Mul => simplify_product(expr),
        },
    }
}

fn apply_protected<T: Real>(op: UnaryOp, x: T) -> T {
    // Folding must agree with Expr::eval, protection included.
    Expr::Unary(op, Box::new(Expr::Constant(x))).eval(&[])
}

/// Flattens a +/- chain into signed terms.
fn gather_terms<T: Real>(expr: &Expr<T>, negate: bool, out: &mut Vec<(bool, Expr<T>)>) {
    match expr {
        Expr::Binary(BinaryOp::Add, a, b) => {
            gather_terms(a, negate, out);
            gather_terms(b, negate, out);
        }
        Expr::Binary(BinaryOp::Sub, a, b) => {
            gather_terms(a, negate, out);
            gather_terms(b, !negate, out);
        }
        other => out.push((negate, simplify(other))),
    }
}

fn simplify_sum<T: Real>(expr: &Expr<T>) -> Expr<T> {
    let mut terms = Vec::new();
    gather_terms(expr, false, &mut terms);

    let mut constant = T::zero();
    let mut rest: Vec<(bool, Expr<T>)> = Vec::new();
    for (neg, term) in terms {
        match term {
            Expr::Constant(c) => {
                constant += if neg { -c } else { c };
            }
            other => rest.push((neg, other)),
        }
    }

    if rest.is_empty() {
        return Expr::Constant(constant);
    }

    // Non-constant terms in original order, folded constant last if nonzero.
    let mut acc: Option<Expr<T>> = None;
    for (neg, term) in rest {
        acc = Some(match acc {
            None => {
                if neg {
                    // Leading negative term becomes (-1) * term.
                    Expr::Binary(
                        BinaryOp::Mul,
                        Box::new(Expr::Constant(-T::one())),
                        Box::new(term),
                    )
                } else {
                    term
                }
            }
            Some(lhs) => {
                let op = if neg { BinaryOp::Sub } else { BinaryOp::Add };
                Expr::Binary(op, Box::new(lhs), Box::new(term))
            }
        });
    }
    let mut out = acc.unwrap();
    if constant != T::zero() {
        let op = if constant < T::zero() {
            BinaryOp::Sub
        } else {
            BinaryOp::Add
        };
        out = Expr::Binary(op, Box::new(out), Box::new(Expr::Constant(constant.abs())));
    }
    out
}

/// Flattens a * chain into factors.
fn gather_factors<T: Real>(expr: &Expr<T>, out: &mut Vec<Expr<T>>) {
    match expr {
        Expr::Binary(BinaryOp::Mul, a, b) => {
            gather_factors(a, out);
            gather_factors(b, out);
        }
        other => out.push(simplify(other)),
    }
}

fn simplify_product<T: Real>(expr: &Expr<T>) -> Expr<T> {
    let mut factors = Vec::new();
    gather_factors(expr, &mut factors);

    let mut coeff = T::one();
    let mut rest: Vec<Expr<T>> = Vec::new();
    for factor in factors {
        match factor {
            Expr::Constant(c) => coeff *= c,
            other => rest.push(other),
        }
    }

    if coeff == T::zero() || rest.is_empty() {
        // Protected primitives keep every finite input finite, so a zero
        // coefficient annihilates the product.
        return Expr::Constant(coeff);
    }

    let mut acc: Option<Expr<T>> = None;
    if coeff != T::one() {
        acc = Some(Expr::Constant(coeff));
    }
    for factor in rest {
        acc = Some(match acc {
            None => factor,
            Some(lhs) => Expr::Binary(BinaryOp::Mul, Box::new(lhs), Box::new(factor)),
        });
    }
    acc.unwrap()
}
