//! Exact closure targets and the supervised training set.
//!
//! The closure target at snapshot j measures what the truncated advection
//! misses: with `Adv_m(u)` the advection side of the m-dimensional Galerkin
//! dynamics (zeroth-mode coupling included),
//! `tau^j = Adv_R(pad(u_r)) - Adv_R(u_R)`, restricted to the first r
//! components. The sign is fixed so that adding `tau^j` to the r-dimensional
//! advection term of the dynamics reproduces the first r components of the
//! R-dimensional one; the `targets_close_the_resolved_dynamics` test pins
//! this down. Everything runs in coefficient space through the R-sized
//! advection tensor; reconstructing fields is only done by the test oracle.

use crate::error::{Error, Result};
use crate::fields::FieldEnsemble;
use crate::pod::{FieldForm, PodBasis};
use crate::rom::assemble_operators;
use crate::scalar::Real;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// Supervised pairs (projected coefficients, closure targets) over the
/// training samples.
#[derive(Debug, Clone)]
pub struct ClosureDataset<T> {
    /// N_tr x r, row per sample.
    pub inputs: DMatrix<T>,
    /// N_tr x r.
    pub targets: DMatrix<T>,
    pub times: Vec<T>,
    pub resolved_dim: usize,
    pub unresolved_dim: usize,
}

impl<T: Real> ClosureDataset<T> {
    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_row(&self, j: usize) -> Vec<T> {
        self.inputs.row(j).iter().cloned().collect()
    }

    pub fn target_column(&self, i: usize) -> Vec<T> {
        self.targets.column(i).iter().cloned().collect()
    }
}

/// Computes the exact closure targets of an ensemble against a basis.
///
/// `r` is the resolved dimension, `big_r` the probe dimension; both must
/// satisfy `r <= big_r <= basis.rank()`, with `r < big_r` for a nonzero
/// target (the `r == big_r` limit is the vanishing identity and is allowed
/// so it can be asserted).
pub fn compute_targets<T: Real>(
    ensemble: &FieldEnsemble<T>,
    basis: &PodBasis<T>,
    r: usize,
    big_r: usize,
) -> Result<ClosureDataset<T>> {
    if r == 0 || r > big_r {
        return Err(Error::Argument(format!(
            "resolved dimension must satisfy 1 <= r <= R (r = {r}, R = {big_r})"
        )));
    }
    if big_r > basis.rank() {
        return Err(Error::Argument(format!(
            "R = {big_r} exceeds the retained basis rank {}",
            basis.rank()
        )));
    }

    // Reynolds is irrelevant here; only advection pieces are used.
    let ops = assemble_operators(basis, big_r, T::one())?;
    let n_samples = ensemble.snapshot_count();

    let rows: Vec<(Vec<T>, Vec<T>)> = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            let snapshot = ensemble.snapshot(j);
            let coeffs_big = basis
                .project(&snapshot, big_r, FieldForm::Centered)
                .expect("projection within retained rank");
            let mut coeffs_padded = coeffs_big.clone();
            for c in coeffs_padded.iter_mut().skip(r) {
                *c = T::zero();
            }
            let adv_resolved = ops.advection_galerkin(&coeffs_padded);
            let adv_full = ops.advection_galerkin(&coeffs_big);
            let tau: Vec<T> = (0..r).map(|i| adv_resolved[i] - adv_full[i]).collect();
            (coeffs_big[..r].to_vec(), tau)
        })
        .collect();

    let mut inputs = DMatrix::<T>::zeros(n_samples, r);
    let mut targets = DMatrix::<T>::zeros(n_samples, r);
    for (j, (u, tau)) in rows.iter().enumerate() {
        for i in 0..r {
            inputs[(j, i)] = u[i];
            if !tau[i].is_finite() {
                return Err(Error::NonFinite(format!(
                    "closure target at sample {j}, component {}",
                    i + 1
                )));
            }
            targets[(j, i)] = tau[i];
        }
    }

    Ok(ClosureDataset {
        inputs,
        targets,
        times: ensemble.times().to_vec(),
        resolved_dim: r,
        unresolved_dim: big_r,
    })
}

/// Index ranges of the training / validation / test windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Windows {
    pub train: std::ops::Range<usize>,
    pub val: std::ops::Range<usize>,
    pub test: std::ops::Range<usize>,
}

impl Windows {
    pub fn total(&self) -> usize {
        self.test.end
    }
}

/// Splits `samples` indices into train/val/test windows by fractions.
pub fn split_windows(samples: usize, fractions: (f64, f64, f64)) -> Result<Windows> {
    let (f_tr, f_val, f_test) = fractions;
    for (name, f) in [("train", f_tr), ("val", f_val), ("test", f_test)] {
        if !(f > 0.0) {
            return Err(Error::Validation(format!(
                "{name} fraction must be positive, got {f}"
            )));
        }
    }
    if ((f_tr + f_val + f_test) - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "window fractions must sum to 1, got {}",
            f_tr + f_val + f_test
        )));
    }
    let e1 = (f_tr * samples as f64).round() as usize;
    let e2 = ((f_tr + f_val) * samples as f64).round() as usize;
    if e1 == 0 || e2 <= e1 || e2 >= samples {
        return Err(Error::Validation(format!(
            "windows [{e1}, {e2}, {samples}] leave an empty range"
        )));
    }
    Ok(Windows {
        train: 0..e1,
        val: e1..e2,
        test: e2..samples,
    })
}

/// Writes the dataset as CSV: `t, u_1..u_r, tau_1..tau_r`, full double
/// precision (17 significant digits).
pub fn save_dataset(ds: &ClosureDataset<f64>, path: &Path, manifest: &str) -> Result<()> {
    let display = path.display().to_string();
    let mut out = String::new();
    if !manifest.is_empty() {
        out.push_str(&format!("# {manifest}\n"));
    }
    out.push('t');
    for i in 1..=ds.resolved_dim {
        out.push_str(&format!(",u_{i}"));
    }
    for i in 1..=ds.resolved_dim {
        out.push_str(&format!(",tau_{i}"));
    }
    out.push('\n');
    for j in 0..ds.len() {
        out.push_str(&format!("{:.16e}", ds.times[j]));
        for i in 0..ds.resolved_dim {
            out.push_str(&format!(",{:.16e}", ds.inputs[(j, i)]));
        }
        for i in 0..ds.resolved_dim {
            out.push_str(&format!(",{:.16e}", ds.targets[(j, i)]));
        }
        out.push('\n');
    }
    let mut file =
        std::fs::File::create(path).map_err(|e| Error::io(display.clone(), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(display, e))
}

pub fn load_dataset(path: &Path) -> Result<ClosureDataset<f64>> {
    let display = path.display().to_string();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(display.clone(), e))?;
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Header {
        path: display.clone(),
        detail: "empty dataset".into(),
    })?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 3 || columns[0] != "t" || (columns.len() - 1) % 2 != 0 {
        return Err(Error::Header {
            path: display.clone(),
            detail: format!("unexpected dataset header `{header}`"),
        });
    }
    let r = (columns.len() - 1) / 2;

    let mut times = Vec::new();
    let mut input_rows: Vec<Vec<f64>> = Vec::new();
    let mut target_rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Header {
                path: display.clone(),
                detail: format!("bad number on data line {}", lineno + 1),
            })?;
        if values.len() != 1 + 2 * r {
            return Err(Error::Header {
                path: display.clone(),
                detail: format!("wrong field count on data line {}", lineno + 1),
            });
        }
        times.push(values[0]);
        input_rows.push(values[1..1 + r].to_vec());
        target_rows.push(values[1 + r..].to_vec());
    }

    let n = times.len();
    let mut inputs = DMatrix::zeros(n, r);
    let mut targets = DMatrix::zeros(n, r);
    for j in 0..n {
        for i in 0..r {
            inputs[(j, i)] = input_rows[j][i];
            targets[(j, i)] = target_rows[j][i];
        }
    }
    Ok(ClosureDataset {
        inputs,
        targets,
        times,
        resolved_dim: r,
        unresolved_dim: r,
    })
}
