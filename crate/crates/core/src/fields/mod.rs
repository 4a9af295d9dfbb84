//! Discretized velocity fields: quadrature, derivative stencils, snapshot
//! ensembles, the desk-scale Burgers generator, and the snapshot container.

mod burgers;
mod discretization;
mod ensemble;
mod fio;

pub use burgers::{generate_burgers, BurgersConfig, InitialProfile};
pub use discretization::{Boundary, Discretization, InnerProduct, UniformGrid1d};
pub use ensemble::FieldEnsemble;
pub use fio::{load_ensemble, save_ensemble, ENSEMBLE_MAGIC};

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // dot(a u + b v, z) = a dot(u, z) + b dot(v, z) to 1e-12 relative.
        #[test]
        fn dot_is_bilinear(
            a in -10.0f64..10.0,
            b in -10.0f64..10.0,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 33;
            let disc = Discretization::<f64>::periodic_1d(n, 2.0).unwrap();
            let rand_field = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
                (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let u = rand_field(&mut rng);
            let v = rand_field(&mut rng);
            let z = rand_field(&mut rng);
            let lhs_field: Vec<f64> = u.iter().zip(&v).map(|(&u, &v)| a * u + b * v).collect();
            let lhs = disc.dot(&lhs_field, &z).unwrap();
            let rhs = a * disc.dot(&u, &z).unwrap() + b * disc.dot(&v, &z).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1e-30);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
        }

        // dot(u, v) = dot(v, u) exactly.
        #[test]
        fn dot_is_symmetric(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 17;
            let disc = Discretization::<f64>::periodic_1d(n, 1.0).unwrap();
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            prop_assert_eq!(disc.dot(&u, &v).unwrap(), disc.dot(&v, &u).unwrap());
        }
    }
}
