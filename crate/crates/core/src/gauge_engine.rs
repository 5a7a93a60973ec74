//! The phase map `ψ → e^{ieχ/ħ} ψ` on states, the matching similarity
//! transform of lattice Hamiltonians, and the covariance check comparing it
//! with assembling from gauge-transformed potentials.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::fields::{GaugeClass, GaugeFunction, PotentialPair};
use crate::hamiltonian::{assemble, assemble_banded, HamiltonianMatrix};
use crate::lattice::Wavefunction;
use crate::model::Model;
use crate::numfmt::round12;

/// Samples of `e^{ieχ(x, t)/ħ}` on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePhase {
    time: f64,
    samples: Vec<Complex64>,
}

impl GaugePhase {
    pub fn new(model: &Model, chi: &Expr, t: f64) -> Result<GaugePhase> {
        let scale = model.params.charge / model.params.hbar;
        let samples = chi
            .evaluate_on_nodes(&model.grid.nodes(), t, model.constants())?
            .into_iter()
            .map(|v| Complex64::cis(scale * v))
            .collect();
        Ok(GaugePhase { time: t, samples })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub(crate) fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        amps.iter().zip(&self.samples).map(|(a, u)| a * u).collect()
    }
}

/// `e^{ieχ/ħ} ψ` with χ evaluated at the time tag of `psi`.
pub fn apply_gauge_unitary(model: &Model, psi: &Wavefunction, chi: &Expr) -> Result<Wavefunction> {
    if *psi.grid() != model.grid {
        return Err(Error::GridMismatch);
    }
    let phase = GaugePhase::new(model, chi, psi.time())?;
    Wavefunction::new(model.grid, psi.time(), phase.apply(psi.amplitudes()))
}

/// `U H U† - e ∂χ/∂t` with `U = diag(e^{ieχ/ħ})`.
pub fn transform_hamiltonian(model: &Model, h0: &HamiltonianMatrix, chi: &Expr) -> Result<HamiltonianMatrix> {
    if h0.grid != model.grid {
        return Err(Error::GridMismatch);
    }
    let t = h0.time;
    let u = GaugePhase::new(model, chi, t)?;
    let u = u.samples();
    let chi_t = chi
        .differentiate(Var::T)
        .evaluate_on_nodes(&model.grid.nodes(), t, model.constants())?;
    let e = model.params.charge;
    let n = h0.len();
    let mut m = h0.entries.clone();
    for i in 0..n {
        m[(i, i)] = Complex64::new(h0.entries[(i, i)].re - e * chi_t[i], 0.0);
        for j in i + 1..n {
            let z = h0.entries[(i, j)];
            if z.re != 0.0 || z.im != 0.0 {
                let v = u[i] * z * u[j].conj();
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
    }
    Ok(HamiltonianMatrix {
        entries: m,
        time: t,
        grid: h0.grid,
    })
}

/// Normalized Gaussian centered on the grid with width a twentieth of its
/// length.
fn probe_state(model: &Model, t: f64) -> Result<Wavefunction> {
    let g = &model.grid;
    let len = g.x_max() - g.x_min();
    Wavefunction::gaussian(*g, t, 0.5 * (g.x_min() + g.x_max()), len / 20.0, 0.0)
}

/// `max_i |((H[p'] - U H[p] U† + e ∂χ/∂t) ψ)_i|` on a smooth normalized probe
/// state, with `p' = gauge_transform(p, χ)`.
///
/// Entrywise the two matrices differ by O(1) in the hopping terms under the
/// symmetric coupling, even though the operators agree to O(h²) on smooth
/// states; the probe measures the latter.
pub fn covariance_residual(model: &Model, p: &PotentialPair, chi: &Expr, t: f64) -> Result<f64> {
    let direct = assemble_banded(model, &p.gauge_transform(chi), t)?;
    let conj = transform_hamiltonian(model, &assemble(model, p, t)?, chi)?;
    let psi = probe_state(model, t)?;
    let a = direct.apply(psi.amplitudes());
    let b = conj.apply(&psi)?;
    Ok(a.iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// Largest entrywise difference between the two routes.
pub fn covariance_matrix_residual(model: &Model, p: &PotentialPair, chi: &Expr, t: f64) -> Result<f64> {
    let direct = assemble(model, &p.gauge_transform(chi), t)?;
    let conj = transform_hamiltonian(model, &assemble(model, p, t)?, chi)?;
    direct.max_abs_difference(&conj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub chi: String,
    pub grid_n: usize,
    #[serde(serialize_with = "ser12")]
    pub residual: f64,
    #[serde(serialize_with = "ser12")]
    pub matrix_residual: f64,
    pub classification: GaugeClass,
}

fn ser12<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round12(*v))
}

pub fn covariance_report(model: &Model, p: &PotentialPair, chi: &GaugeFunction, t: f64) -> Result<CovarianceReport> {
    Ok(CovarianceReport {
        chi: chi.chi().to_string(),
        grid_n: model.grid.len(),
        residual: covariance_residual(model, p, chi.chi(), t)?,
        matrix_residual: covariance_matrix_residual(model, p, chi.chi(), t)?,
        classification: chi.class(),
    })
}
