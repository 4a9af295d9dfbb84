//! Proper orthogonal decomposition by the method of snapshots.
//!
//! The Gramian of the centered snapshots is eigendecomposed (a K x K
//! problem; K stays small at desk scale) and modes are reconstructed as
//! weighted snapshot combinations. Eigenvalues are stored divided by the
//! snapshot count, so they measure average energy per sample.

use crate::error::{Error, Result};
use crate::fields::{Boundary, Discretization, FieldEnsemble};
use crate::io::{ContainerReader, ContainerWriter};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use std::path::Path;

/// Relative eigenvalue floor below which modes count as numerical noise.
pub const RANK_CUTOFF: f64 = 1e-13;

pub const BASIS_MAGIC: &str = "ROMBAS01\n";

/// Whether a field handed to [`PodBasis::project`] still contains the
/// zeroth mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldForm {
    /// `u` as observed; the zeroth mode is subtracted before projecting.
    Raw,
    /// `u - phi0`, e.g. an ensemble snapshot column.
    Centered,
}

/// Orthonormal POD basis with its eigenvalue spectrum and zeroth mode.
#[derive(Debug, Clone)]
pub struct PodBasis<T> {
    disc: Discretization<T>,
    /// N x R, orthonormal in the weighted inner product.
    modes: DMatrix<T>,
    /// Descending, scaled by 1/K.
    eigenvalues: Vec<T>,
    zeroth_mode: Vec<T>,
}

/// Gramian of the centered snapshots: `G_kl = (u^k, u^l)`.
pub fn build_gramian<T: Real>(ensemble: &FieldEnsemble<T>) -> DMatrix<T> {
    let u = ensemble.snapshots();
    let w = ensemble.discretization().quadrature_weights();
    let mut wu = u.clone();
    for (i, &wi) in w.iter().enumerate() {
        for v in wu.row_mut(i).iter_mut() {
            *v *= wi;
        }
    }
    u.transpose() * wu
}

/// Method-of-snapshots POD retaining `rank` modes.
///
/// Mode signs are fixed so the entry of largest magnitude is positive.
pub fn compute_pod<T: Real>(ensemble: &FieldEnsemble<T>, rank: usize) -> Result<PodBasis<T>> {
    if rank == 0 {
        return Err(Error::Argument("rank must be at least 1".into()));
    }
    let k = ensemble.snapshot_count();
    let gramian = build_gramian(ensemble);
    let eig = gramian.symmetric_eigen();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("non-finite eigenvalue")
    });

    let mu_max = eig.eigenvalues[order[0]];
    if !(mu_max > T::zero()) {
        return Err(Error::Rank {
            requested: rank,
            rank: 0,
            cutoff_index: 0,
        });
    }
    let cutoff = T::of(RANK_CUTOFF) * mu_max;
    let numerical_rank = order
        .iter()
        .take_while(|&&i| eig.eigenvalues[i] > cutoff)
        .count();
    if rank > numerical_rank {
        return Err(Error::Rank {
            requested: rank,
            rank: numerical_rank,
            cutoff_index: numerical_rank,
        });
    }

    let n = ensemble.node_count();
    let snapshots = ensemble.snapshots();
    let mut modes = DMatrix::<T>::zeros(n, rank);
    let mut eigenvalues = Vec::with_capacity(rank);
    let k_scale = T::from_usize(k).unwrap();
    for (m, &idx) in order.iter().take(rank).enumerate() {
        let mu = eig.eigenvalues[idx];
        eigenvalues.push(mu / k_scale);
        let v = eig.eigenvectors.column(idx);
        let mut phi = DVector::<T>::zeros(n);
        for (col, &vk) in v.iter().enumerate() {
            phi.axpy(vk, &snapshots.column(col), T::one());
        }
        phi /= mu.sqrt();
        modes.set_column(m, &phi);
    }

    // Eigenvalues near the cutoff give modes whose weighted Gram matrix is
    // identity only to eps * (lambda_1 / lambda_i); two Gram-Schmidt passes
    // in the weighted product restore orthonormality to roundoff.
    let weights = ensemble.discretization().quadrature_weights();
    let wdot = |a: &DVector<T>, b: &DVector<T>| -> T {
        let mut acc = T::zero();
        for i in 0..n {
            acc += weights[i] * (a[i] * b[i]);
        }
        acc
    };
    for _pass in 0..2 {
        for m in 0..rank {
            let mut phi = modes.column(m).clone_owned();
            for prev in 0..m {
                let q = modes.column(prev).clone_owned();
                let proj = wdot(&phi, &q);
                phi.axpy(-proj, &q, T::one());
            }
            let norm = wdot(&phi, &phi).sqrt();
            if !(norm > T::zero()) {
                return Err(Error::Rank {
                    requested: rank,
                    rank: m,
                    cutoff_index: m,
                });
            }
            phi /= norm;
            modes.set_column(m, &phi);
        }
    }

    // Sign convention: largest-magnitude entry positive.
    for m in 0..rank {
        let mut dominant = T::zero();
        for &p in modes.column(m).iter() {
            if p.abs() > dominant.abs() {
                dominant = p;
            }
        }
        if dominant < T::zero() {
            let flipped = -modes.column(m).clone_owned();
            modes.set_column(m, &flipped);
        }
    }

    Ok(PodBasis {
        disc: ensemble.discretization().clone(),
        modes,
        eigenvalues,
        zeroth_mode: ensemble.zeroth_mode().to_vec(),
    })
}

/// POD retaining every mode above the rank cutoff.
pub fn compute_pod_max<T: Real>(ensemble: &FieldEnsemble<T>) -> Result<PodBasis<T>> {
    let gramian = build_gramian(ensemble);
    let eig = gramian.symmetric_eigen();
    let mu_max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(T::zero(), |m, v| m.max(v));
    if !(mu_max > T::zero()) {
        return Err(Error::Rank {
            requested: 1,
            rank: 0,
            cutoff_index: 0,
        });
    }
    let cutoff = T::of(RANK_CUTOFF) * mu_max;
    let rank = eig.eigenvalues.iter().filter(|&&m| m > cutoff).count();
    compute_pod(ensemble, rank)
}

impl<T: Real> PodBasis<T> {
    /// Assembles a basis from stored parts (used by the container loader
    /// and by tests that construct bases directly).
    pub fn from_parts(
        disc: Discretization<T>,
        modes: DMatrix<T>,
        eigenvalues: Vec<T>,
        zeroth_mode: Vec<T>,
    ) -> Result<Self> {
        if modes.nrows() != disc.node_count() {
            return Err(Error::Dimension {
                context: "mode rows vs node count",
                expected: disc.node_count(),
                actual: modes.nrows(),
            });
        }
        if eigenvalues.len() != modes.ncols() {
            return Err(Error::Dimension {
                context: "eigenvalue count vs mode count",
                expected: modes.ncols(),
                actual: eigenvalues.len(),
            });
        }
        if zeroth_mode.len() != disc.node_count() {
            return Err(Error::Dimension {
                context: "zeroth mode length",
                expected: disc.node_count(),
                actual: zeroth_mode.len(),
            });
        }
        if !eigenvalues.is_empty() {
            let floor = -T::of(1e-12) * eigenvalues[0].abs();
            for pair in eigenvalues.windows(2) {
                if pair[1] > pair[0] {
                    return Err(Error::Validation(
                        "eigenvalues must be non-increasing".into(),
                    ));
                }
            }
            if eigenvalues[eigenvalues.len() - 1] < floor {
                return Err(Error::Validation(
                    "eigenvalues must be nonnegative up to roundoff".into(),
                ));
            }
        }
        Ok(PodBasis {
            disc,
            modes,
            eigenvalues,
            zeroth_mode,
        })
    }

    pub fn discretization(&self) -> &Discretization<T> {
        &self.disc
    }

    /// Number of retained modes.
    pub fn rank(&self) -> usize {
        self.modes.ncols()
    }

    pub fn modes(&self) -> &DMatrix<T> {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> Vec<T> {
        self.modes.column(i).iter().cloned().collect()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn zeroth_mode(&self) -> &[T] {
        &self.zeroth_mode
    }

    /// Coefficients of `u` in the first `r` modes.
    pub fn project(&self, field: &[T], r: usize, form: FieldForm) -> Result<Vec<T>> {
        if r > self.rank() {
            return Err(Error::Dimension {
                context: "projection order vs retained rank",
                expected: self.rank(),
                actual: r,
            });
        }
        let centered: Vec<T> = match form {
            FieldForm::Centered => field.to_vec(),
            FieldForm::Raw => field
                .iter()
                .zip(&self.zeroth_mode)
                .map(|(&u, &z)| u - z)
                .collect(),
        };
        let mut coeffs = Vec::with_capacity(r);
        for i in 0..r {
            let phi: Vec<T> = self.modes.column(i).iter().cloned().collect();
            coeffs.push(self.disc.dot(&centered, &phi)?);
        }
        Ok(coeffs)
    }

    /// `phi0 + sum_j coeffs_j Phi_j`.
    pub fn reconstruct(&self, coeffs: &[T]) -> Result<Vec<T>> {
        if coeffs.len() > self.rank() {
            return Err(Error::Dimension {
                context: "coefficient length vs retained rank",
                expected: self.rank(),
                actual: coeffs.len(),
            });
        }
        let mut out = self.zeroth_mode.clone();
        for (j, &c) in coeffs.iter().enumerate() {
            for (o, &phi) in out.iter_mut().zip(self.modes.column(j).iter()) {
                *o += c * phi;
            }
        }
        Ok(out)
    }

    /// Largest absolute deviation of `(Phi_i, Phi_j)` from the identity.
    pub fn orthonormality_residual(&self) -> Result<T> {
        let r = self.rank();
        let mut worst = T::zero();
        for i in 0..r {
            let phi_i = self.mode(i);
            for j in i..r {
                let phi_j = self.mode(j);
                let d = self.disc.dot(&phi_i, &phi_j)?;
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((d - target).abs());
            }
        }
        Ok(worst)
    }
}

pub fn save_basis(basis: &PodBasis<f64>, path: &Path, manifest: &str) -> Result<()> {
    let mut w = ContainerWriter::new(BASIS_MAGIC);
    if !manifest.is_empty() {
        w.field("manifest", manifest);
    }
    w.field("dimension", basis.disc.dimension());
    w.field("n", basis.disc.node_count());
    w.field("r", basis.rank());
    w.field("boundary", basis.disc.boundary().as_str());
    w.begin_payload();
    w.floats(basis.disc.quadrature_weights().iter().copied());
    w.floats(basis.zeroth_mode.iter().copied());
    w.floats(basis.eigenvalues.iter().copied());
    w.floats(basis.modes.iter().copied());
    w.finish(path)
}

pub fn load_basis(path: &Path) -> Result<PodBasis<f64>> {
    let display = path.display().to_string();
    let (mut r, header) = ContainerReader::open(path, BASIS_MAGIC)?;
    let dimension = header.get_usize(&display, "dimension")? as u32;
    let n = header.get_usize(&display, "n")?;
    let rank = header.get_usize(&display, "r")?;
    let boundary = Boundary::parse(header.get(&display, "boundary")?)?;

    let weights = r.floats(n)?;
    let zeroth = r.floats(n)?;
    let eigenvalues = r.floats(rank)?;
    let modes = r.floats(n * rank)?;
    r.finish()?;

    let disc = Discretization::from_parts(dimension, boundary, weights)?;
    PodBasis::from_parts(disc, DMatrix::from_vec(n, rank, modes), eigenvalues, zeroth)
}
