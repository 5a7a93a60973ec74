//! Physical constants and discretization choices shared by the numerical
//! modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Bindings;
use crate::lattice::Grid;

/// ħ, m and e. The speed of light is fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            hbar: 1.0,
            mass: 1.0,
            charge: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidArgument(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {}", self.mass)));
        }
        if !self.charge.is_finite() {
            return Err(Error::InvalidArgument("charge must be finite".into()));
        }
        Ok(())
    }

    /// The names under which the parameters are visible to expressions.
    pub fn bindings(&self) -> Bindings {
        Bindings::new()
            .with("hbar", self.hbar)
            .with("m", self.mass)
            .with("e", self.charge)
    }
}

/// Finite-difference stencil for the kinetic energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KineticStencil {
    /// Three-point second difference, O(h²).
    #[default]
    SecondOrder,
    /// Five-point second difference, O(h⁴).
    FourthOrder,
}

impl KineticStencil {
    /// Coefficients `c_d` of `-(1/h²)·Σ_d c_d (ψ_{i+d} + ψ_{i-d})` plus the
    /// diagonal weight, in units of `ħ²/(2m h²)`.
    pub(crate) fn weights(self) -> (f64, &'static [f64]) {
        match self {
            KineticStencil::SecondOrder => (2.0, &[-1.0]),
            KineticStencil::FourthOrder => (30.0 / 12.0, &[-16.0 / 12.0, 1.0 / 12.0]),
        }
    }

    pub fn half_bandwidth(self) -> usize {
        self.weights().1.len()
    }
}

/// How the vector potential enters the lattice Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingScheme {
    /// Hopping terms carry the phase `exp(-i e/ħ ∫ a dx)` along each link.
    /// Gauge covariant on the lattice: conjugating by the pointwise phase
    /// `exp(i e χ/ħ)` is the same as shifting `a` by `∂χ/∂x`.
    #[default]
    Peierls,
    /// `(i e ħ / 2m)(a ∂ + ∂ a)` with central differences plus `e² a²/2m` on
    /// the diagonal. Covariant only up to O(h²).
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Discretization {
    pub kinetic: KineticStencil,
    pub coupling: CouplingScheme,
}

/// Grid, physical parameters, discretization and named-constant values.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub grid: Grid,
    pub params: PhysicalParams,
    pub discretization: Discretization,
    constants: Bindings,
}

impl Model {
    pub fn new(grid: Grid, params: PhysicalParams) -> Result<Model> {
        params.validate()?;
        Ok(Model {
            grid,
            params,
            discretization: Discretization::default(),
            constants: params.bindings(),
        })
    }

    pub fn with_discretization(mut self, d: Discretization) -> Model {
        self.discretization = d;
        self
    }

    pub fn with_kinetic(mut self, k: KineticStencil) -> Model {
        self.discretization.kinetic = k;
        self
    }

    pub fn with_coupling(mut self, c: CouplingScheme) -> Model {
        self.discretization.coupling = c;
        self
    }

    /// Named constants for expressions. `hbar`, `m` and `e` always carry the
    /// physical parameters.
    pub fn with_constants(mut self, constants: &Bindings) -> Model {
        self.constants = constants.merged(&self.params.bindings());
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Model {
        self.grid = grid;
        self
    }

    pub fn constants(&self) -> &Bindings {
        &self.constants
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_are_visible_as_constants() {
        let params = PhysicalParams {
            hbar: 2.0,
            mass: 3.0,
            charge: -1.0,
        };
        let m = Model::new(Grid::default(), params)
            .unwrap()
            .with_constants(&Bindings::new().with("k", 0.1).with("m", 99.0));
        assert_eq!(m.constants().get("m"), Some(3.0));
        assert_eq!(m.constants().get("e"), Some(-1.0));
        assert_eq!(m.constants().get("k"), Some(0.1));
    }

    #[test]
    fn rejects_bad_params() {
        let bad = PhysicalParams {
            mass: 0.0,
            ..Default::default()
        };
        assert!(Model::new(Grid::default(), bad).is_err());
    }

    #[test]
    fn fourth_order_weights_sum_to_zero() {
        for s in [KineticStencil::SecondOrder, KineticStencil::FourthOrder] {
            let (d, off) = s.weights();
            assert!((d + 2.0 * off.iter().sum::<f64>()).abs() < 1e-15);
        }
    }
}
