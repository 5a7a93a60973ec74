//! Potentials, gauge transformations and gauge-function classification.
//!
//! Everything here is one-dimensional: the vector potential has a single
//! component `a(x, t)`, the magnetic field vanishes and the electric field is
//! `E = -∂φ/∂x - ∂a/∂t`. The speed of light is fixed to 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr, ProofMode, Var, ZeroTest};
use crate::lattice::Grid;
use crate::quad::{gauss5, gauss5_composite};

/// Scalar potential `phi` and the x-component `a` of the vector potential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialPair {
    pub phi: Expr,
    pub a: Expr,
}

impl PotentialPair {
    pub fn new(phi: Expr, a: Expr) -> Self {
        PotentialPair { phi, a }
    }

    pub fn parse(phi: &str, a: &str) -> Result<Self> {
        Ok(PotentialPair {
            phi: Expr::parse(phi)?,
            a: Expr::parse(a)?,
        })
    }

    pub fn vacuum() -> Self {
        PotentialPair::new(Expr::zero(), Expr::zero())
    }

    /// Symbols other than `x`, `t` used by either potential.
    pub fn constants(&self) -> std::collections::BTreeSet<String> {
        let mut c = self.phi.constants();
        c.extend(self.a.constants());
        c
    }

    /// `(a + ∂χ/∂x, φ - ∂χ/∂t)`, simplified.
    pub fn gauge_transform(&self, chi: &Expr) -> PotentialPair {
        PotentialPair {
            a: Expr::add([self.a.clone(), chi.differentiate(Var::X)]).simplify(),
            phi: Expr::sub(self.phi.clone(), chi.differentiate(Var::T)).simplify(),
        }
    }

    pub fn simplified(&self) -> PotentialPair {
        PotentialPair {
            phi: self.phi.simplify(),
            a: self.a.simplify(),
        }
    }
}

impl fmt::Display for PotentialPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(phi = {}, a = {})", self.phi, self.a)
    }
}

/// Electric and magnetic field of a potential pair. In one dimension the
/// magnetic field is identically zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldStrength {
    pub e_field: Expr,
}

impl FieldStrength {
    pub fn b_field(&self) -> Expr {
        Expr::zero()
    }
}

pub fn field_strengths(p: &PotentialPair) -> FieldStrength {
    let e = Expr::add([
        Expr::neg(p.phi.differentiate(Var::X)),
        Expr::neg(p.a.differentiate(Var::T)),
    ]);
    FieldStrength {
        e_field: e.simplify(),
    }
}

/// Whether two pairs produce the same electric field.
pub fn same_fields(p1: &PotentialPair, p2: &PotentialPair, constants: &Bindings) -> Result<ZeroTest> {
    let e1 = field_strengths(p1).e_field;
    let e2 = field_strengths(p2).e_field;
    Expr::sub(e1, e2).is_identically_zero(constants)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaugeClass {
    /// `f(x) + k·t`: spectra and their gaps are unchanged up to a constant
    /// shift `-e·k`.
    Invariant,
    /// `f(x) + g(t)`: energy gaps are unchanged, levels move with `g'(t)`.
    DifferencePreserving,
    General,
}

impl GaugeClass {
    pub fn is_separable(self) -> bool {
        !matches!(self, GaugeClass::General)
    }
}

impl fmt::Display for GaugeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GaugeClass::Invariant => "Invariant",
            GaugeClass::DifferencePreserving => "DifferencePreserving",
            GaugeClass::General => "General",
        })
    }
}

impl std::str::FromStr for GaugeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Invariant" => Ok(GaugeClass::Invariant),
            "DifferencePreserving" => Ok(GaugeClass::DifferencePreserving),
            "General" => Ok(GaugeClass::General),
            _ => Err(Error::InvalidArgument(format!("unknown gauge class `{s}`"))),
        }
    }
}

/// Result of [`classify_gauge_function`]. Serializes as
/// `{"class": ..., "proof_mode": ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub class: GaugeClass,
    /// `sampled` if any zero test fell back to sampling.
    pub proof_mode: ProofMode,
    #[serde(skip)]
    pub mixed_partial: ZeroTest,
    /// Absent when the mixed partial already rules out separability.
    #[serde(skip)]
    pub second_time_derivative: Option<ZeroTest>,
}

pub fn classify_gauge_function(chi: &Expr, constants: &Bindings) -> Result<Classification> {
    let chi_t = chi.differentiate(Var::T);
    let mixed = chi_t.differentiate(Var::X).is_identically_zero(constants)?;
    if !mixed.is_zero {
        return Ok(Classification {
            class: GaugeClass::General,
            proof_mode: mixed.mode,
            mixed_partial: mixed,
            second_time_derivative: None,
        });
    }
    let second = chi_t.differentiate(Var::T).is_identically_zero(constants)?;
    let class = if second.is_zero {
        GaugeClass::Invariant
    } else {
        GaugeClass::DifferencePreserving
    };
    Ok(Classification {
        class,
        proof_mode: mixed.mode.and(second.mode),
        mixed_partial: mixed,
        second_time_derivative: Some(second),
    })
}

/// A gauge function together with its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFunction {
    chi: Expr,
    classification: Classification,
}

impl GaugeFunction {
    pub fn new(chi: Expr, constants: &Bindings) -> Result<Self> {
        let classification = classify_gauge_function(&chi, constants)?;
        Ok(GaugeFunction { chi, classification })
    }

    pub fn parse(source: &str, constants: &Bindings) -> Result<Self> {
        GaugeFunction::new(Expr::parse(source)?, constants)
    }

    pub fn identity() -> Self {
        GaugeFunction {
            chi: Expr::zero(),
            classification: Classification {
                class: GaugeClass::Invariant,
                proof_mode: ProofMode::Proved,
                mixed_partial: ZeroTest {
                    is_zero: true,
                    mode: ProofMode::Proved,
                },
                second_time_derivative: Some(ZeroTest {
                    is_zero: true,
                    mode: ProofMode::Proved,
                }),
            },
        }
    }

    pub fn chi(&self) -> &Expr {
        &self.chi
    }

    pub fn class(&self) -> GaugeClass {
        self.classification.class
    }

    pub fn classification(&self) -> &Classification {
        &self.classification
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeCondition {
    /// `∂a/∂x + ∂φ/∂t = 0`
    Lorentz,
    /// `∂φ/∂t = 0`
    TimeIndependent,
    /// `φ = 0`
    ModifiedTemporal,
}

impl GaugeCondition {
    pub const ALL: [GaugeCondition; 3] = [
        GaugeCondition::Lorentz,
        GaugeCondition::TimeIndependent,
        GaugeCondition::ModifiedTemporal,
    ];
}

impl fmt::Display for GaugeCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GaugeCondition::Lorentz => "Lorentz",
            GaugeCondition::TimeIndependent => "TimeIndependent",
            GaugeCondition::ModifiedTemporal => "ModifiedTemporal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub mode: ProofMode,
}

pub fn check_gauge_condition(
    p: &PotentialPair,
    condition: GaugeCondition,
    constants: &Bindings,
) -> Result<ConditionCheck> {
    let residual = match condition {
        GaugeCondition::Lorentz => {
            Expr::add([p.a.differentiate(Var::X), p.phi.differentiate(Var::T)])
        }
        GaugeCondition::TimeIndependent => p.phi.differentiate(Var::T),
        GaugeCondition::ModifiedTemporal => p.phi.clone(),
    };
    let z = residual.is_identically_zero(constants)?;
    Ok(ConditionCheck {
        holds: z.is_zero,
        mode: z.mode,
    })
}

/// Move `p` into the temporal gauge: `a' = a + ∫_{t_ref}^{t} ∂φ/∂x dt'`,
/// `φ' = 0`.
///
/// The integrand is the gradient of the original scalar potential; with the
/// gradient of the new one (identically zero) the fields would not match.
pub fn fix_temporal_gauge(p: &PotentialPair, t_ref: f64) -> Result<PotentialPair> {
    let grad_phi = p.phi.differentiate(Var::X);
    let shift = grad_phi
        .integrate_t_from(t_ref)
        .map_err(|_| Error::NonIntegrable(p.phi.to_string()))?;
    Ok(PotentialPair {
        phi: Expr::zero(),
        a: Expr::add([p.a.clone(), shift]).simplify(),
    })
}

/// Tolerance on `|∂χ/∂t + (φ2 - φ1)|` after reconstruction, relative to
/// `max(1, max|φ2 - φ1|)`.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-6;
const TIME_PANELS: usize = 32;
const CLASSIFY_STEP: f64 = 1e-2;
const CLASSIFY_TOLERANCE: f64 = 1e-6;

/// A gauge function known only through samples on `grid × times`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedGauge {
    pub grid: Grid,
    pub times: Vec<f64>,
    /// `values[j][i] = χ(x_i, times[j])`, pinned so that `χ(x_min, times[0]) = 0`.
    pub values: Vec<Vec<f64>>,
    pub class: GaugeClass,
    pub consistency_residual: f64,
}

/// The gauge function relating two potential pairs.
///
/// `χ(x, t) = ∫_{x_min}^{x} (a2 - a1) dx' - ∫_{t0}^{t} (φ2 - φ1)(x_min, t') dt'`
/// with `t0 = times[0]`. Fails with `NotGaugeEquivalent` when the electric
/// fields differ or when the reconstructed χ does not reproduce
/// `φ2 - φ1 = -∂χ/∂t`.
pub fn reconstruct_gauge(
    p1: &PotentialPair,
    p2: &PotentialPair,
    grid: &Grid,
    times: &[f64],
    constants: &Bindings,
) -> Result<ReconstructedGauge> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("reconstruct_gauge needs at least one time".into()));
    }
    let fields = same_fields(p1, p2, constants)?;
    if !fields.is_zero {
        return Err(Error::NotGaugeEquivalent(format!(
            "electric fields differ: {} vs {}",
            field_strengths(p1).e_field,
            field_strengths(p2).e_field
        )));
    }
    let da = Expr::sub(p2.a.clone(), p1.a.clone()).simplify();
    let dphi = Expr::sub(p2.phi.clone(), p1.phi.clone()).simplify();
    let da_t = da.differentiate(Var::T);
    let t0 = times[0];
    let x0 = grid.x_min();
    let xs = grid.nodes();

    let sample = |t: f64| -> Result<Vec<f64>> {
        let offset = -gauss5_composite(t0, t, TIME_PANELS, |s| dphi.evaluate_at(x0, s, constants))?;
        cumulative(&da, &xs, t, offset, constants)
    };

    let mut values = Vec::with_capacity(times.len());
    let mut residual: f64 = 0.0;
    for &t in times {
        let row = sample(t)?;
        // ∂χ/∂t from the time derivative of the integrand.
        let rate = cumulative(&da_t, &xs, t, -dphi.evaluate_at(x0, t, constants)?, constants)?;
        let target = dphi.evaluate_on_nodes(&xs, t, constants)?;
        let scale = target.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (r, d) in rate.iter().zip(&target) {
            residual = residual.max((r + d).abs() / scale);
        }
        values.push(row);
    }
    if !(residual <= RECONSTRUCTION_TOLERANCE) {
        return Err(Error::NotGaugeEquivalent(format!(
            "reconstructed gauge function is inconsistent (residual {residual:.3e})"
        )));
    }

    let class = classify_samples(&sample, times, grid)?;
    Ok(ReconstructedGauge {
        grid: *grid,
        times: times.to_vec(),
        values,
        class,
        consistency_residual: residual,
    })
}

/// `offset + ∫_{xs[0]}^{xs[i]} f(x, t) dx` for every node.
fn cumulative(f: &Expr, xs: &[f64], t: f64, offset: f64, constants: &Bindings) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(offset);
    for w in xs.windows(2) {
        acc += gauss5(w[0], w[1], |x| f.evaluate_at(x, t, constants))?;
        out.push(offset + acc);
    }
    Ok(out)
}

/// Discrete mixed and second time differences of the sampled χ on a small
/// time stencil after each requested time.
fn classify_samples(
    sample: &impl Fn(f64) -> Result<Vec<f64>>,
    times: &[f64],
    grid: &Grid,
) -> Result<GaugeClass> {
    let h = grid.spacing();
    let dt = CLASSIFY_STEP;
    let mut mixed: f64 = 0.0;
    let mut second: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for &t in times {
        let c0 = sample(t)?;
        let c1 = sample(t + dt)?;
        let c2 = sample(t + 2.0 * dt)?;
        for row in [&c0, &c1, &c2] {
            scale = row.iter().fold(scale, |m, v| m.max(v.abs()));
        }
        for i in 0..c0.len() - 1 {
            let d = (c1[i + 1] - c1[i] - c0[i + 1] + c0[i]) / (h * dt);
            mixed = mixed.max(d.abs());
        }
        for i in 0..c0.len() {
            second = second.max(((c2[i] - 2.0 * c1[i] + c0[i]) / (dt * dt)).abs());
        }
    }
    let tol = CLASSIFY_TOLERANCE * scale;
    Ok(if mixed > tol {
        GaugeClass::General
    } else if second > tol {
        GaugeClass::DifferencePreserving
    } else {
        GaugeClass::Invariant
    })
}

impl ReconstructedGauge {
    /// Largest deviation from `reference(x, t)` after removing the additive
    /// constant at `(x_min, times[0])`.
    pub fn max_deviation(&self, reference: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
        let x0 = self.grid.x_min();
        let offset = reference(x0, self.times[0])? - self.values[0][0];
        let mut worst: f64 = 0.0;
        for (j, &t) in self.times.iter().enumerate() {
            for (i, v) in self.values[j].iter().enumerate() {
                let want = reference(self.grid.node(i), t)? - offset;
                worst = worst.max((want - v).abs());
            }
        }
        Ok(worst)
    }
}

/// Names bound in `p` and `chi` that are neither coordinates nor present in
/// `constants`.
pub fn unbound_constants<'a>(
    exprs: impl IntoIterator<Item = &'a Expr>,
    constants: &Bindings,
) -> Vec<String> {
    let mut missing: Vec<String> = exprs
        .into_iter()
        .flat_map(|e| e.constants())
        .filter(|s| !constants.contains(s))
        .collect();
    missing.sort();
    missing.dedup();
    missing
}
