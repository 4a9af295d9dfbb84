use crate::error::{Error, Result};
use crate::scalar::Real;

/// Boundary treatment of a discretized domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    HomogeneousDirichlet,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::HomogeneousDirichlet => "homogeneous-dirichlet",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "homogeneous-dirichlet" => Ok(Boundary::HomogeneousDirichlet),
            other => Err(Error::Argument(format!("unknown boundary type `{other}`"))),
        }
    }
}

/// Derivative stencils of a uniform 1D grid.
///
/// Second-order central differences. For the Dirichlet case the field is
/// extended by zero ghost values outside the domain.
#[derive(Debug, Clone)]
pub struct UniformGrid1d<T> {
    pub spacing: T,
    pub boundary: Boundary,
}

/// A discretized scalar field space: quadrature weights plus (when the grid
/// is known) derivative stencils.
///
/// Ensembles loaded from external solvers may carry weights only; asking
/// such a discretization for derivatives is a capability error, which keeps
/// externally assembled reduced operators as the only route for that data.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    dimension: u32,
    weights: Vec<T>,
    boundary: Boundary,
    grid: Option<UniformGrid1d<T>>,
}

impl<T: Real> Discretization<T> {
    /// Uniform periodic grid on `[0, length)` with `n` nodes.
    ///
    /// The induced quadrature is the periodic trapezoid rule, `w_i = h`.
    pub fn periodic_1d(n: usize, length: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("need at least 2 nodes, got {n}")));
        }
        if length <= T::zero() {
            return Err(Error::Argument("domain length must be positive".into()));
        }
        let h = length / T::from_usize(n).unwrap();
        Ok(Discretization {
            dimension: 1,
            weights: vec![h; n],
            boundary: Boundary::Periodic,
            grid: Some(UniformGrid1d {
                spacing: h,
                boundary: Boundary::Periodic,
            }),
        })
    }

    /// Uniform grid of `n` interior nodes on `(0, length)` with homogeneous
    /// Dirichlet values at both ends. Midpoint-style weights `w_i = h` with
    /// `h = length / (n + 1)`.
    pub fn dirichlet_1d(n: usize, length: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("need at least 2 nodes, got {n}")));
        }
        if length <= T::zero() {
            return Err(Error::Argument("domain length must be positive".into()));
        }
        let h = length / T::from_usize(n + 1).unwrap();
        Ok(Discretization {
            dimension: 1,
            weights: vec![h; n],
            boundary: Boundary::HomogeneousDirichlet,
            grid: Some(UniformGrid1d {
                spacing: h,
                boundary: Boundary::HomogeneousDirichlet,
            }),
        })
    }

    /// Rebuild a discretization from stored parts (the file formats keep
    /// dimension, boundary and weights). Stencils are recovered only for
    /// 1D grids with uniform weights.
    pub fn from_parts(dimension: u32, boundary: Boundary, weights: Vec<T>) -> Result<Self> {
        if !(dimension == 1 || dimension == 2) {
            return Err(Error::Validation(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        if weights.is_empty() {
            return Err(Error::Validation("empty quadrature weights".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > T::zero()) {
                return Err(Error::Validation(format!(
                    "quadrature weight {i} is not positive"
                )));
            }
        }
        let uniform = weights
            .iter()
            .all(|&w| (w - weights[0]).abs() <= T::of(1e-14) * weights[0]);
        let grid = if dimension == 1 && uniform {
            Some(UniformGrid1d {
                spacing: weights[0],
                boundary,
            })
        } else {
            None
        };
        Ok(Discretization {
            dimension,
            weights,
            boundary,
            grid,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn quadrature_weights(&self) -> &[T] {
        &self.weights
    }

    /// Total quadrature mass, i.e. the discrete domain measure.
    pub fn domain_measure(&self) -> T {
        self.weights.iter().fold(T::zero(), |acc, &w| acc + w)
    }

    /// Node coordinates of a 1D grid (periodic: `x_i = i h`; Dirichlet:
    /// `x_i = (i + 1) h`).
    pub fn grid_points(&self) -> Result<Vec<T>> {
        let grid = self.require_grid()?;
        let n = self.node_count();
        let offset = match grid.boundary {
            Boundary::Periodic => T::zero(),
            Boundary::HomogeneousDirichlet => T::one(),
        };
        Ok((0..n)
            .map(|i| (T::from_usize(i).unwrap() + offset) * grid.spacing)
            .collect())
    }

    pub fn inner_product(&self) -> InnerProduct<'_, T> {
        InnerProduct {
            weights: &self.weights,
        }
    }

    /// Weighted inner product of two fields.
    pub fn dot(&self, u: &[T], v: &[T]) -> Result<T> {
        self.inner_product().dot(u, v)
    }

    fn require_grid(&self) -> Result<&UniformGrid1d<T>> {
        self.grid.as_ref().ok_or_else(|| {
            Error::Capability(
                "no derivative stencil for this discretization (external data); \
                 use externally assembled reduced operators instead"
                    .into(),
            )
        })
    }

    pub fn has_stencil(&self) -> bool {
        self.grid.is_some()
    }

    /// First derivative, second-order central difference.
    pub fn first_derivative(&self, u: &[T]) -> Result<Vec<T>> {
        let grid = self.require_grid()?;
        self.check_len(u)?;
        let n = u.len();
        let two_h = T::of(2.0) * grid.spacing;
        let mut out = vec![T::zero(); n];
        match grid.boundary {
            Boundary::Periodic => {
                for i in 0..n {
                    let up = u[(i + 1) % n];
                    let um = u[(i + n - 1) % n];
                    out[i] = (up - um) / two_h;
                }
            }
            Boundary::HomogeneousDirichlet => {
                for i in 0..n {
                    let up = if i + 1 < n { u[i + 1] } else { T::zero() };
                    let um = if i > 0 { u[i - 1] } else { T::zero() };
                    out[i] = (up - um) / two_h;
                }
            }
        }
        Ok(out)
    }

    /// Second derivative, standard three-point stencil.
    pub fn second_derivative(&self, u: &[T]) -> Result<Vec<T>> {
        let grid = self.require_grid()?;
        self.check_len(u)?;
        let n = u.len();
        let h2 = grid.spacing * grid.spacing;
        let mut out = vec![T::zero(); n];
        match grid.boundary {
            Boundary::Periodic => {
                for i in 0..n {
                    let up = u[(i + 1) % n];
                    let um = u[(i + n - 1) % n];
                    out[i] = (up - T::of(2.0) * u[i] + um) / h2;
                }
            }
            Boundary::HomogeneousDirichlet => {
                for i in 0..n {
                    let up = if i + 1 < n { u[i + 1] } else { T::zero() };
                    let um = if i > 0 { u[i - 1] } else { T::zero() };
                    out[i] = (up - T::of(2.0) * u[i] + um) / h2;
                }
            }
        }
        Ok(out)
    }

    fn check_len(&self, u: &[T]) -> Result<()> {
        if u.len() != self.node_count() {
            return Err(Error::Dimension {
                context: "field length vs discretization",
                expected: self.node_count(),
                actual: u.len(),
            });
        }
        Ok(())
    }
}

/// The weighted (discrete L2) inner product over a fixed quadrature.
pub struct InnerProduct<'a, T> {
    weights: &'a [T],
}

impl<T: Real> InnerProduct<'_, T> {
    pub fn dot(&self, u: &[T], v: &[T]) -> Result<T> {
        if u.len() != self.weights.len() {
            return Err(Error::Dimension {
                context: "inner product left operand",
                expected: self.weights.len(),
                actual: u.len(),
            });
        }
        if v.len() != self.weights.len() {
            return Err(Error::Dimension {
                context: "inner product right operand",
                expected: self.weights.len(),
                actual: v.len(),
            });
        }
        let mut acc = T::zero();
        for i in 0..u.len() {
            // w * (u*v) keeps dot(u, v) == dot(v, u) exact.
            acc += self.weights[i] * (u[i] * v[i]);
        }
        Ok(acc)
    }
}
