//! Kinetic energy, in field space and in coefficient space.
//!
//! The energy of a state is `E = (1/2) (int u . u)^(1/2)` — square root
//! included, as the evaluation protocol defines it. A conventional
//! quadratic variant `(1/2) int u . u` exists behind its own method for
//! comparison runs; nothing in acceptance uses it.

use crate::error::{Error, Result};
use crate::fields::Discretization;
use crate::pod::PodBasis;
use crate::scalar::Real;

/// Radicand clamp: values in `[-1e-14, 0)` count as zero.
const NEGATIVE_TOLERANCE: f64 = 1e-14;

/// Which kinetic-energy expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyForm {
    /// `E = (1/2) (int u . u)^(1/2)`, the form the metrics are defined on.
    #[default]
    SqrtHalf,
    /// `E = (1/2) int u . u`, the conventional quadratic form; offered for
    /// comparison runs only.
    Quadratic,
}

impl EnergyForm {
    pub fn parse(s: &str) -> crate::error::Result<Self> {
        match s {
            "sqrt" => Ok(EnergyForm::SqrtHalf),
            "quadratic" => Ok(EnergyForm::Quadratic),
            other => Err(Error::Argument(format!(
                "unknown energy form `{other}` (expected sqrt|quadratic)"
            ))),
        }
    }
}

/// Precomputed zeroth-mode inner products for coefficient-space energy:
/// `int u.u = (phi0, phi0) + 2 sum_i u_i (phi0, Phi_i) + sum_i u_i^2`.
#[derive(Debug, Clone)]
pub struct EnergyOps<T> {
    pub zeroth_self: T,
    pub cross: Vec<T>,
}

impl<T: Real> EnergyOps<T> {
    pub fn new(basis: &PodBasis<T>) -> Result<Self> {
        let disc = basis.discretization();
        let zeroth = basis.zeroth_mode();
        let zeroth_self = disc.dot(zeroth, zeroth)?;
        let mut cross = Vec::with_capacity(basis.rank());
        for i in 0..basis.rank() {
            cross.push(disc.dot(zeroth, &basis.mode(i))?);
        }
        Ok(EnergyOps { zeroth_self, cross })
    }

    fn radicand(&self, coeffs: &[T]) -> Result<T> {
        if coeffs.len() > self.cross.len() {
            return Err(Error::Dimension {
                context: "coefficient length vs precomputed cross terms",
                expected: self.cross.len(),
                actual: coeffs.len(),
            });
        }
        let mut q = self.zeroth_self;
        for (i, &u) in coeffs.iter().enumerate() {
            q += T::of(2.0) * u * self.cross[i] + u * u;
        }
        if q < T::zero() {
            if q >= -T::of(NEGATIVE_TOLERANCE) {
                return Ok(T::zero());
            }
            return Err(Error::Numerical(format!(
                "negative energy radicand {q:e} beyond tolerance"
            )));
        }
        Ok(q)
    }

    /// `E = (1/2) sqrt(int u . u)` from reduced coefficients.
    pub fn energy_from_coeffs(&self, coeffs: &[T]) -> Result<T> {
        Ok(T::of(0.5) * self.radicand(coeffs)?.sqrt())
    }

    /// Conventional quadratic form `E = (1/2) int u . u`.
    pub fn energy_quadratic_from_coeffs(&self, coeffs: &[T]) -> Result<T> {
        Ok(T::of(0.5) * self.radicand(coeffs)?)
    }

    pub fn energy_in_form(&self, coeffs: &[T], form: EnergyForm) -> Result<T> {
        match form {
            EnergyForm::SqrtHalf => self.energy_from_coeffs(coeffs),
            EnergyForm::Quadratic => self.energy_quadratic_from_coeffs(coeffs),
        }
    }
}

/// `E = (1/2) sqrt(int u . u)` of a raw field.
pub fn kinetic_energy_field<T: Real>(disc: &Discretization<T>, field: &[T]) -> Result<T> {
    let q = disc.dot(field, field)?;
    Ok(T::of(0.5) * q.max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{generate_burgers, BurgersConfig, InitialProfile};
    use crate::pod::{compute_pod, FieldForm};

    #[test]
    fn zero_field_zero_energy() {
        let disc = Discretization::<f64>::periodic_1d(16, 1.0).unwrap();
        assert_eq!(kinetic_energy_field(&disc, &[0.0; 16]).unwrap(), 0.0);
    }

    #[test]
    fn unit_coefficient_on_orthonormal_mode() {
        // phi0 = 0, coeffs = e_1 -> E = 0.5 * sqrt(1) = 0.5.
        let ops = EnergyOps {
            zeroth_self: 0.0,
            cross: vec![0.0, 0.0],
        };
        let e = ops.energy_from_coeffs(&[1.0, 0.0]).unwrap();
        assert_eq!(e, 0.5);
    }

    #[test]
    fn coefficient_energy_matches_field_space_oracle() {
        let ens = generate_burgers(&BurgersConfig::<f64> {
            resolution: 64,
            viscosity: 0.05,
            end_time: 0.5,
            dt_sample: 0.05,
            profile: InitialProfile::Mixed,
            seed: 21,
        })
        .unwrap();
        let basis = compute_pod(&ens, 6).unwrap();
        let ops = EnergyOps::new(&basis).unwrap();
        let disc = ens.discretization();

        // Invariant: precomputed values match direct quadrature.
        let direct = disc.dot(basis.zeroth_mode(), basis.zeroth_mode()).unwrap();
        assert!((ops.zeroth_self - direct).abs() <= 1e-12 * direct.abs().max(1.0));

        let coeffs = vec![0.3f64, -0.2, 0.05, 0.4, -0.1, 0.02];
        let from_coeffs = ops.energy_from_coeffs(&coeffs).unwrap();
        let field = basis.reconstruct(&coeffs).unwrap();
        let oracle = kinetic_energy_field(disc, &field).unwrap();
        assert!(
            (from_coeffs - oracle).abs() <= 1e-10,
            "{from_coeffs} vs {oracle}"
        );

        // Projected snapshots agree too.
        for k in [0, 3, 7] {
            let u = ens.raw_snapshot(k);
            let c = basis.project(&u, 6, FieldForm::Raw).unwrap();
            let a = ops.energy_from_coeffs(&c).unwrap();
            let b = kinetic_energy_field(disc, &basis.reconstruct(&c).unwrap()).unwrap();
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn deep_negative_radicand_is_an_error() {
        let ops = EnergyOps {
            zeroth_self: -1.0,
            cross: vec![],
        };
        assert!(matches!(
            ops.energy_from_coeffs(&[]),
            Err(Error::Numerical(_))
        ));
        // Within tolerance clamps to zero.
        let ops = EnergyOps {
            zeroth_self: -5e-15,
            cross: vec![],
        };
        assert_eq!(ops.energy_from_coeffs(&[]).unwrap(), 0.0);
    }
}
