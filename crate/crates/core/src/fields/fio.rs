//! Snapshot ensemble container, magic `ROMSNAP1\n`.
//!
//! Header lines: `manifest` (optional free text), `dimension`, `n`, `k`,
//! `dt_s`, `boundary`; payload is `w[N]`, `phi0[N]`, `t[K]`, then `U`
//! column-major, followed by the FNV-1a checksum.

use crate::error::Result;
use crate::fields::{Boundary, Discretization, FieldEnsemble};
use crate::io::{ContainerReader, ContainerWriter};
use nalgebra::DMatrix;
use std::path::Path;

pub const ENSEMBLE_MAGIC: &str = "ROMSNAP1\n";

pub fn save_ensemble(ensemble: &FieldEnsemble<f64>, path: &Path, manifest: &str) -> Result<()> {
    let disc = ensemble.discretization();
    let mut w = ContainerWriter::new(ENSEMBLE_MAGIC);
    if !manifest.is_empty() {
        w.field("manifest", manifest);
    }
    w.field("dimension", disc.dimension());
    w.field("n", ensemble.node_count());
    w.field("k", ensemble.snapshot_count());
    w.field_f64("dt_s", ensemble.dt_sample());
    w.field("boundary", disc.boundary().as_str());
    w.begin_payload();
    w.floats(disc.quadrature_weights().iter().copied());
    w.floats(ensemble.zeroth_mode().iter().copied());
    w.floats(ensemble.times().iter().copied());
    w.floats(ensemble.snapshots().iter().copied());
    w.finish(path)
}

pub fn load_ensemble(path: &Path) -> Result<FieldEnsemble<f64>> {
    let display = path.display().to_string();
    let (mut r, header) = ContainerReader::open(path, ENSEMBLE_MAGIC)?;
    let dimension = header.get_usize(&display, "dimension")? as u32;
    let n = header.get_usize(&display, "n")?;
    let k = header.get_usize(&display, "k")?;
    let dt_s = header.get_f64(&display, "dt_s")?;
    let boundary = Boundary::parse(header.get(&display, "boundary")?)?;

    let weights = r.floats(n)?;
    let zeroth = r.floats(n)?;
    let times = r.floats(k)?;
    let snaps = r.floats(n * k)?;
    r.finish()?;

    let disc = Discretization::from_parts(dimension, boundary, weights)?;
    let snapshots = DMatrix::from_vec(n, k, snaps);
    FieldEnsemble::new(disc, snapshots, zeroth, times, dt_s)
}
