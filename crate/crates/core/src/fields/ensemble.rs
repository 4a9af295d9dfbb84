use crate::error::{Error, Result};
use crate::fields::Discretization;
use crate::scalar::Real;
use nalgebra::DMatrix;

/// A snapshot ensemble: the discretization, the zeroth mode, and the
/// zeroth-mode-subtracted snapshot matrix sampled on a uniform time axis.
#[derive(Debug, Clone)]
pub struct FieldEnsemble<T> {
    disc: Discretization<T>,
    /// N x K, column k holds `u(., t_k) - phi0`.
    snapshots: DMatrix<T>,
    zeroth_mode: Vec<T>,
    times: Vec<T>,
    dt_sample: T,
}

impl<T: Real> FieldEnsemble<T> {
    pub fn new(
        disc: Discretization<T>,
        snapshots: DMatrix<T>,
        zeroth_mode: Vec<T>,
        times: Vec<T>,
        dt_sample: T,
    ) -> Result<Self> {
        let n = disc.node_count();
        let k = times.len();
        if snapshots.nrows() != n {
            return Err(Error::Dimension {
                context: "snapshot rows vs node count",
                expected: n,
                actual: snapshots.nrows(),
            });
        }
        if snapshots.ncols() != k {
            return Err(Error::Dimension {
                context: "snapshot columns vs sample times",
                expected: k,
                actual: snapshots.ncols(),
            });
        }
        if zeroth_mode.len() != n {
            return Err(Error::Dimension {
                context: "zeroth mode length",
                expected: n,
                actual: zeroth_mode.len(),
            });
        }
        if k < 2 {
            return Err(Error::Validation(format!(
                "an ensemble needs at least 2 snapshots, got {k}"
            )));
        }
        if !(dt_sample > T::zero()) {
            return Err(Error::Validation("sampling step must be positive".into()));
        }
        // Strictly increasing, uniform to 1e-12 relative.
        let tol = T::of(1e-12) * dt_sample;
        for i in 1..k {
            let step = times[i] - times[i - 1];
            if !(step > T::zero()) {
                return Err(Error::Validation(format!(
                    "sample times must be strictly increasing (index {i})"
                )));
            }
            if (step - dt_sample).abs() > tol {
                return Err(Error::Validation(format!(
                    "sample spacing at index {i} deviates from dt_s beyond 1e-12 relative"
                )));
            }
        }
        if snapshots.iter().any(|v| !v.is_finite())
            || zeroth_mode.iter().any(|v| !v.is_finite())
        {
            return Err(Error::Validation("non-finite ensemble data".into()));
        }
        Ok(FieldEnsemble {
            disc,
            snapshots,
            zeroth_mode,
            times,
            dt_sample,
        })
    }

    pub fn discretization(&self) -> &Discretization<T> {
        &self.disc
    }

    pub fn node_count(&self) -> usize {
        self.snapshots.nrows()
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshots.ncols()
    }

    pub fn snapshots(&self) -> &DMatrix<T> {
        &self.snapshots
    }

    /// Centered snapshot `u(., t_k) - phi0` as an owned vector.
    pub fn snapshot(&self, k: usize) -> Vec<T> {
        self.snapshots.column(k).iter().cloned().collect()
    }

    /// Raw field `phi0 + snapshot(k)`.
    pub fn raw_snapshot(&self, k: usize) -> Vec<T> {
        let mut out = self.snapshot(k);
        for (o, &z) in out.iter_mut().zip(&self.zeroth_mode) {
            *o += z;
        }
        out
    }

    pub fn zeroth_mode(&self) -> &[T] {
        &self.zeroth_mode
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn dt_sample(&self) -> T {
        self.dt_sample
    }

    /// Sub-ensemble over a contiguous index range, sharing the zeroth mode
    /// and discretization.
    pub fn window(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.snapshot_count() || range.start >= range.end {
            return Err(Error::Argument(format!(
                "window {range:?} out of range for {} snapshots",
                self.snapshot_count()
            )));
        }
        let cols = range.len();
        let mut snaps = DMatrix::zeros(self.node_count(), cols);
        for (j, k) in range.clone().enumerate() {
            snaps.set_column(j, &self.snapshots.column(k));
        }
        FieldEnsemble::new(
            self.disc.clone(),
            snaps,
            self.zeroth_mode.clone(),
            self.times[range].to_vec(),
            self.dt_sample,
        )
    }
}
