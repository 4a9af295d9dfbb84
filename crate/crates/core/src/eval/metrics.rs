//! The evaluation metrics, implemented literally:
//! validation MSE, coefficient of determination on the validation energy,
//! relative test MSE, and the mean per-component training MSE.

use crate::closure::ClosureDataset;
use crate::error::{Error, Result};
use crate::regress::ClosureModel;
use crate::scalar::Real;

fn check_aligned<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Dimension {
            context: "energy series alignment",
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// Mean of `(E_FOM - E_ROM)^2`.
pub fn mse_val<T: Real>(e_fom: &[T], e_rom: &[T]) -> Result<T> {
    check_aligned(e_fom, e_rom)?;
    let n = T::from_usize(e_fom.len()).unwrap();
    let mut acc = T::zero();
    for (f, r) in e_fom.iter().zip(e_rom) {
        let d = *f - *r;
        acc += d * d;
    }
    Ok(acc / n)
}

/// `1 - MSE_val / mean((E_FOM - mean(E_FOM))^2)`.
pub fn r2_val<T: Real>(e_fom: &[T], e_rom: &[T]) -> Result<T> {
    check_aligned(e_fom, e_rom)?;
    let n = T::from_usize(e_fom.len()).unwrap();
    let mean = e_fom.iter().fold(T::zero(), |a, &v| a + v) / n;
    let variance = e_fom.iter().fold(T::zero(), |a, &v| {
        let d = v - mean;
        a + d * d
    }) / n;
    if variance == T::zero() {
        return Err(Error::Numerical(
            "validation energy is constant; the coefficient of determination is undefined"
                .into(),
        ));
    }
    Ok(T::one() - mse_val(e_fom, e_rom)? / variance)
}

/// Mean of `(E_FOM - E_ROM)^2 / E_FOM^2`.
pub fn rmse_test<T: Real>(e_fom: &[T], e_rom: &[T]) -> Result<T> {
    check_aligned(e_fom, e_rom)?;
    let n = T::from_usize(e_fom.len()).unwrap();
    let mut acc = T::zero();
    for (i, (f, r)) in e_fom.iter().zip(e_rom).enumerate() {
        if *f == T::zero() {
            return Err(Error::Numerical(format!(
                "reference energy vanishes at sample {i}; relative MSE undefined"
            )));
        }
        let d = (*f - *r) / *f;
        acc += d * d;
    }
    Ok(acc / n)
}

/// `(1/r) sum_i MSE_tr,i` of a fitted closure on its training data.
pub fn mean_mse_tr<T: Real>(model: &ClosureModel<T>, dataset: &ClosureDataset<T>) -> Result<T> {
    let n = dataset.len();
    let r = dataset.resolved_dim;
    let mut acc = T::zero();
    for j in 0..n {
        let u = dataset.input_row(j);
        let g = model.predict(&u)?;
        for i in 0..r {
            let d = dataset.targets[(j, i)] - g[i];
            acc += d * d;
        }
    }
    Ok(acc / (T::from_usize(n).unwrap() * T::from_usize(r).unwrap()))
}
