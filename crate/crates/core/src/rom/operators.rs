use crate::error::{Error, Result};
use crate::pod::PodBasis;
use crate::regress::ClosureModel;
use crate::scalar::Real;
use nalgebra::DMatrix;

/// Galerkin-reduced operators plus the zeroth-mode coupling terms.
///
/// The advection tensor is stored flat with `C[(i*r + k)*r + j] = C_ikj`,
/// the reduced form of `(phi_i, (phi_k . grad) phi_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RomOperators<T> {
    pub mass: DMatrix<T>,
    pub stiffness: DMatrix<T>,
    pub advection: Vec<T>,
    /// `(phi_i, (phi_0 . grad) phi_0)`.
    pub zeroth_advection: Vec<T>,
    /// `(grad phi_i, grad phi_0)`.
    pub zeroth_stiffness: Vec<T>,
    /// `(phi_i, (phi_0 . grad) phi_j)`, r x r.
    pub coupling_zeroth_carrier: DMatrix<T>,
    /// `(phi_i, (phi_k . grad) phi_0)`, r x r.
    pub coupling_zeroth_carried: DMatrix<T>,
    pub reynolds: T,
    pub dim: usize,
}

impl<T: Real> RomOperators<T> {
    #[inline]
    pub fn advection_entry(&self, i: usize, k: usize, j: usize) -> T {
        self.advection[(i * self.dim + k) * self.dim + j]
    }

    /// Advection side of the dynamics evaluated on the augmented state:
    /// `[C(ubar) ubar]_i` with `ubar = (1, u)`, i.e.
    /// `c0_i + [C1 u]_i + [C2 u]_i + sum_{k,j} C_ikj u_k u_j`.
    pub fn advection_galerkin(&self, u: &[T]) -> Vec<T> {
        let r = self.dim;
        let mut out = self.zeroth_advection.clone();
        for i in 0..r {
            let mut acc = T::zero();
            for j in 0..r {
                acc += self.coupling_zeroth_carrier[(i, j)] * u[j];
                acc += self.coupling_zeroth_carried[(i, j)] * u[j];
            }
            for k in 0..r {
                let base = (i * r + k) * r;
                let mut inner = T::zero();
                for j in 0..r {
                    inner += self.advection[base + j] * u[j];
                }
                acc += u[k] * inner;
            }
            out[i] += acc;
        }
        out
    }

    /// Viscous side on the augmented state: `a0_i + [A u]_i`.
    pub fn stiffness_galerkin(&self, u: &[T]) -> Vec<T> {
        let r = self.dim;
        let mut out = self.zeroth_stiffness.clone();
        for i in 0..r {
            let mut acc = T::zero();
            for j in 0..r {
                acc += self.stiffness[(i, j)] * u[j];
            }
            out[i] += acc;
        }
        out
    }

    /// Right-hand side of the reduced dynamics at the augmented state
    /// `ubar` (length r+1, zeroth entry 1), with an optional closure:
    /// `-C(ubar) ubar - (1/Re) A ubar + g(u)`.
    pub fn rhs(&self, ubar: &[T], closure: Option<&ClosureModel<T>>) -> Result<Vec<T>> {
        let r = self.dim;
        if ubar.len() != r + 1 {
            return Err(Error::Dimension {
                context: "augmented state length",
                expected: r + 1,
                actual: ubar.len(),
            });
        }
        if ubar[0] != T::one() {
            return Err(Error::Argument(
                "augmented state must carry coefficient 1 for the zeroth mode".into(),
            ));
        }
        let u = &ubar[1..];
        let adv = self.advection_galerkin(u);
        let visc = self.stiffness_galerkin(u);
        let inv_re = T::one() / self.reynolds;
        let mut out: Vec<T> = (0..r).map(|i| -adv[i] - inv_re * visc[i]).collect();
        if let Some(model) = closure {
            let g = model.predict(u)?;
            if g.len() != r {
                return Err(Error::Dimension {
                    context: "closure output length",
                    expected: r,
                    actual: g.len(),
                });
            }
            for (o, gi) in out.iter_mut().zip(g) {
                *o += gi;
            }
        }
        Ok(out)
    }
}

/// Assembles the reduced operators for the first `r` basis modes.
pub fn assemble_operators<T: Real>(
    basis: &PodBasis<T>,
    r: usize,
    reynolds: T,
) -> Result<RomOperators<T>> {
    if r == 0 || r > basis.rank() {
        return Err(Error::Dimension {
            context: "operator order vs retained rank",
            expected: basis.rank(),
            actual: r,
        });
    }
    if !(reynolds > T::zero()) {
        return Err(Error::Argument("Reynolds number must be positive".into()));
    }
    let disc = basis.discretization();
    let n = disc.node_count();

    // Fields and gradients for phi_0 and the first r modes.
    let zeroth = basis.zeroth_mode().to_vec();
    let modes: Vec<Vec<T>> = (0..r).map(|i| basis.mode(i)).collect();
    let grad_zeroth = disc.first_derivative(&zeroth)?;
    let grads: Vec<Vec<T>> = modes
        .iter()
        .map(|m| disc.first_derivative(m))
        .collect::<Result<_>>()?;

    let w = disc.quadrature_weights();
    let triple = |a: &[T], b: &[T], c: &[T]| -> T {
        let mut acc = T::zero();
        for i in 0..n {
            acc += w[i] * a[i] * b[i] * c[i];
        }
        acc
    };

    let mut mass = DMatrix::<T>::zeros(r, r);
    let mut stiffness = DMatrix::<T>::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            mass[(i, j)] = disc.dot(&modes[i], &modes[j])?;
            stiffness[(i, j)] = disc.dot(&grads[i], &grads[j])?;
        }
    }

    let mut advection = vec![T::zero(); r * r * r];
    for i in 0..r {
        for k in 0..r {
            for j in 0..r {
                advection[(i * r + k) * r + j] = triple(&modes[i], &modes[k], &grads[j]);
            }
        }
    }

    let mut zeroth_advection = vec![T::zero(); r];
    let mut zeroth_stiffness = vec![T::zero(); r];
    let mut carrier = DMatrix::<T>::zeros(r, r);
    let mut carried = DMatrix::<T>::zeros(r, r);
    for i in 0..r {
        zeroth_advection[i] = triple(&modes[i], &zeroth, &grad_zeroth);
        zeroth_stiffness[i] = disc.dot(&grads[i], &grad_zeroth)?;
        for j in 0..r {
            carrier[(i, j)] = triple(&modes[i], &zeroth, &grads[j]);
            carried[(i, j)] = triple(&modes[i], &modes[j], &grad_zeroth);
        }
    }

    Ok(RomOperators {
        mass,
        stiffness,
        advection,
        zeroth_advection,
        zeroth_stiffness,
        coupling_zeroth_carrier: carrier,
        coupling_zeroth_carried: carried,
        reynolds,
        dim: r,
    })
}
