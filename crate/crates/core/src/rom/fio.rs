//! Reduced-operator container, magic `ROMOPS01\n`.
//!
//! This is also the ingestion path for externally assembled operators
//! (e.g. 2D problems from an outside solver): anything that writes this
//! container can drive the reduced integrator without field data.

use crate::error::Result;
use crate::io::{ContainerReader, ContainerWriter};
use crate::rom::RomOperators;
use nalgebra::DMatrix;
use std::path::Path;

pub const OPERATORS_MAGIC: &str = "ROMOPS01\n";

pub fn save_operators(ops: &RomOperators<f64>, path: &Path, manifest: &str) -> Result<()> {
    let r = ops.dim;
    let mut w = ContainerWriter::new(OPERATORS_MAGIC);
    if !manifest.is_empty() {
        w.field("manifest", manifest);
    }
    w.field("r", r);
    w.field_f64("re", ops.reynolds);
    w.begin_payload();
    w.floats(ops.mass.iter().copied());
    w.floats(ops.stiffness.iter().copied());
    w.floats(ops.advection.iter().copied());
    w.floats(ops.zeroth_advection.iter().copied());
    w.floats(ops.zeroth_stiffness.iter().copied());
    w.floats(ops.coupling_zeroth_carrier.iter().copied());
    w.floats(ops.coupling_zeroth_carried.iter().copied());
    w.finish(path)
}

pub fn load_operators(path: &Path) -> Result<RomOperators<f64>> {
    let display = path.display().to_string();
    let (mut rd, header) = ContainerReader::open(path, OPERATORS_MAGIC)?;
    let r = header.get_usize(&display, "r")?;
    let re = header.get_f64(&display, "re")?;

    let mass = rd.floats(r * r)?;
    let stiffness = rd.floats(r * r)?;
    let advection = rd.floats(r * r * r)?;
    let zeroth_advection = rd.floats(r)?;
    let zeroth_stiffness = rd.floats(r)?;
    let carrier = rd.floats(r * r)?;
    let carried = rd.floats(r * r)?;
    rd.finish()?;

    Ok(RomOperators {
        mass: DMatrix::from_vec(r, r, mass),
        stiffness: DMatrix::from_vec(r, r, stiffness),
        advection,
        zeroth_advection,
        zeroth_stiffness,
        coupling_zeroth_carrier: DMatrix::from_vec(r, r, carrier),
        coupling_zeroth_carried: DMatrix::from_vec(r, r, carried),
        reynolds: re,
        dim: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn operators_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let r = 3;
        let mut rnd = || rng.gen_range(-1.0..1.0);
        let ops = RomOperators {
            mass: DMatrix::from_fn(r, r, |_, _| rnd()),
            stiffness: DMatrix::from_fn(r, r, |_, _| rnd()),
            advection: (0..r * r * r).map(|_| rnd()).collect(),
            zeroth_advection: (0..r).map(|_| rnd()).collect(),
            zeroth_stiffness: (0..r).map(|_| rnd()).collect(),
            coupling_zeroth_carrier: DMatrix::from_fn(r, r, |_, _| rnd()),
            coupling_zeroth_carried: DMatrix::from_fn(r, r, |_, _| rnd()),
            reynolds: 500.0,
            dim: r,
        };
        let dir = std::env::temp_dir().join("romlab_rom_io");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ops.ops");
        save_operators(&ops, &path, "test").unwrap();
        let back = load_operators(&path).unwrap();
        assert_eq!(ops, back);
    }
}
