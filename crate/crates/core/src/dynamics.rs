//! Crank–Nicolson time evolution, observables and the two-path cross-gauge
//! comparison.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Var;
use crate::fields::{GaugeFunction, PotentialPair};
use crate::gauge_engine::apply_gauge_unitary;
use crate::hamiltonian::{assemble_banded, link_integrals, uniform_time_derivative, Banded};
use crate::lattice::Wavefunction;
use crate::model::{CouplingScheme, Model};
use crate::numfmt::fmt12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub steps: usize,
    /// Keep every `record_every`-th state; the final state is always kept.
    pub record_every: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 0.001,
            steps: 1000,
            record_every: 1,
        }
    }
}

impl EvolutionConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        EvolutionConfig {
            dt,
            steps,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.dt * self.steps as f64).is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Band LU factors of `I + i·dt/(2ħ)·H`, stored row-wise over columns
/// `i - w ..= i + w`.
struct BandLu {
    w: usize,
    rows: Vec<Vec<Complex64>>,
}

impl BandLu {
    fn factor(h: &Banded, alpha: Complex64) -> Result<BandLu> {
        let n = h.len();
        let w = h.upper.len();
        let width = 2 * w + 1;
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); width]; n];
        for i in 0..n {
            rows[i][w] = Complex64::new(1.0, 0.0) + alpha * h.diag[i];
        }
        for (k, band) in h.upper.iter().enumerate() {
            let d = k + 1;
            for (i, &z) in band.iter().enumerate() {
                rows[i][w + d] = alpha * z;
                rows[i + d][w - d] = alpha * z.conj();
            }
        }
        // Doolittle without pivoting; the matrix is I + i·(Hermitian), whose
        // leading minors never vanish.
        for k in 0..n {
            let pivot = rows[k][w];
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(Error::SolveFailure { row: k });
            }
            let last = (k + w).min(n - 1);
            for i in k + 1..=last {
                let l = rows[i][w + k - i] / pivot;
                rows[i][w + k - i] = l;
                for j in k + 1..=last {
                    let u = rows[k][w + j - k];
                    rows[i][w + j - i] -= l * u;
                }
            }
        }
        Ok(BandLu { w, rows })
    }

    fn solve(&self, b: &mut [Complex64]) {
        let n = b.len();
        let w = self.w;
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let mut acc = b[i];
            for j in lo..i {
                acc -= self.rows[i][w + j - i] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + w).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=hi {
                acc -= self.rows[i][w + j - i] * b[j];
            }
            b[i] = acc / self.rows[i][w];
        }
    }
}

/// Recorded states with the largest per-step change in norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Wavefunction>,
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Wavefunction {
        self.states.last().expect("trajectory keeps at least the initial state")
    }
}

/// `(I + iΔH(t+dt/2)) ψ_{k+1} = (I - iΔH(t+dt/2)) ψ_k` with `Δ = dt/2ħ`.
pub fn evolve(model: &Model, psi0: &Wavefunction, p: &PotentialPair, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if *psi0.grid() != model.grid {
        return Err(Error::GridMismatch);
    }
    let t0 = psi0.time();
    let alpha = Complex64::new(0.0, cfg.dt / (2.0 * model.params.hbar));
    let static_h = !(p.phi.depends_on(crate::expr::T) || p.a.depends_on(crate::expr::T));
    let mut cached: Option<(Banded, BandLu)> = None;

    let mut states = vec![psi0.clone()];
    let mut psi = psi0.amplitudes().to_vec();
    let mut norm = psi0.norm();
    let mut drift = 0.0f64;
    for k in 0..cfg.steps {
        let t_mid = t0 + (k as f64 + 0.5) * cfg.dt;
        if cached.is_none() || !static_h {
            let h = assemble_banded(model, p, t_mid)?;
            let lu = BandLu::factor(&h, alpha)?;
            cached = Some((h, lu));
        }
        let (h, lu) = cached.as_ref().expect("set above");
        let hpsi = h.apply(&psi);
        let mut rhs: Vec<Complex64> = psi.iter().zip(&hpsi).map(|(a, b)| a - alpha * b).collect();
        lu.solve(&mut rhs);
        psi = rhs;

        let t = t0 + (k + 1) as f64 * cfg.dt;
        let next = Wavefunction::new(model.grid, t, psi.clone())?;
        let n = next.norm();
        drift = drift.max((n - norm).abs());
        norm = n;
        if (k + 1) % cfg.record_every == 0 || k + 1 == cfg.steps {
            states.push(next);
        }
    }
    Ok(Trajectory {
        states,
        max_norm_drift: drift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    pub time: f64,
    pub norm: f64,
    pub position: f64,
    pub canonical_momentum: f64,
    pub kinetic_momentum: f64,
    pub energy: f64,
    #[serde(skip)]
    pub density: Vec<f64>,
}

/// Expectations normalized by `‖ψ‖²`. Momentum uses central differences; with
/// the Peierls coupling the kinetic momentum uses the link-covariant
/// difference and the canonical one adds `e⟨a⟩` back.
pub fn observables(model: &Model, psi: &Wavefunction, p: &PotentialPair, t: f64) -> Result<Observables> {
    if *psi.grid() != model.grid {
        return Err(Error::GridMismatch);
    }
    let grid = &model.grid;
    let h = grid.spacing();
    let hbar = model.params.hbar;
    let e = model.params.charge;
    let amps = psi.amplitudes();
    let n = amps.len();
    let density = psi.density();
    let norm2 = grid.integrate(&density);
    if !(norm2 > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let xs = grid.nodes();
    let weighted: Vec<f64> = density.iter().zip(&xs).map(|(r, x)| r * x).collect();
    let position = grid.integrate(&weighted) / norm2;

    let a_vals = p.a.evaluate_on_nodes(&xs, t, model.constants())?;
    let ra: Vec<f64> = density.iter().zip(&a_vals).map(|(r, a)| r * a).collect();
    let mean_a = grid.integrate(&ra) / norm2;

    // Link factors multiplying ψ_{i+1} in the forward difference.
    let links: Vec<Complex64> = match model.discretization.coupling {
        CouplingScheme::Peierls => link_integrals(model, &p.a, t)?
            .into_iter()
            .map(|f| Complex64::cis(-e * f / hbar))
            .collect(),
        CouplingScheme::Symmetric => vec![Complex64::new(1.0, 0.0); n - 1],
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = zero;
    for i in 0..n {
        let fwd = if i + 1 < n { links[i] * amps[i + 1] } else { zero };
        let bwd = if i > 0 { links[i - 1].conj() * amps[i - 1] } else { zero };
        acc += amps[i].conj() * (fwd - bwd);
    }
    // ⟨-iħ D⟩ = -iħ Σ conj(ψ_i)(Dψ)_i h with D = (fwd - bwd)/2h.
    let p_diff = (Complex64::new(0.0, -hbar) * acc * 0.5).re / norm2;
    let (canonical, kinetic) = match model.discretization.coupling {
        CouplingScheme::Peierls => (p_diff + e * mean_a, p_diff),
        CouplingScheme::Symmetric => (p_diff, p_diff - e * mean_a),
    };

    let hpsi = assemble_banded(model, p, t)?.apply(amps);
    let energy = amps
        .iter()
        .zip(&hpsi)
        .map(|(a, b)| (a.conj() * b).re)
        .sum::<f64>()
        * h
        / norm2;

    Ok(Observables {
        time: t,
        norm: norm2.sqrt(),
        position,
        canonical_momentum: canonical,
        kinetic_momentum: kinetic,
        energy,
        density,
    })
}

/// CSV with columns `t, norm, x, p_canonical, p_kinetic, energy`.
pub fn write_observables_csv(rows: &[Observables], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "t,norm,x,p_canonical,p_kinetic,energy")?;
    for o in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt12(o.time),
            fmt12(o.norm),
            fmt12(o.position),
            fmt12(o.canonical_momentum),
            fmt12(o.kinetic_momentum),
            fmt12(o.energy)
        )?;
    }
    Ok(())
}

pub fn trajectory_observables(model: &Model, traj: &Trajectory, p: &PotentialPair) -> Result<Vec<Observables>> {
    traj.states
        .iter()
        .map(|s| observables(model, s, p, s.time()))
        .collect()
}

/// Outcome of comparing evolve-then-transform with transform-then-evolve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossGaugeReport {
    pub chi: String,
    pub t_end: f64,
    /// `‖U ψ_A(T) - ψ_B(T)‖`.
    pub l2_distance: f64,
    pub max_density_difference: f64,
    pub kinetic_momentum_difference: f64,
    /// `p_B - p_A` for the canonical momentum.
    pub canonical_momentum_offset: f64,
    /// `e⟨∂χ/∂x⟩` at the final time.
    pub expected_canonical_offset: f64,
    pub energy_difference: f64,
    /// `-e ∂χ/∂t` when it is uniform in x at the final time.
    pub expected_energy_difference: Option<f64>,
    pub max_norm_drift: f64,
    #[serde(skip)]
    pub original: Vec<Observables>,
    #[serde(skip)]
    pub transformed: Vec<Observables>,
}

pub fn cross_gauge_check(
    model: &Model,
    psi0: &Wavefunction,
    p: &PotentialPair,
    chi: &GaugeFunction,
    cfg: &EvolutionConfig,
) -> Result<CrossGaugeReport> {
    let chi_e = chi.chi();
    let p_chi = p.gauge_transform(chi_e);
    let psi0_chi = apply_gauge_unitary(model, psi0, chi_e)?;

    let (path_a, path_b) = std::thread::scope(|s| {
        let a = s.spawn(|| evolve(model, psi0, p, cfg));
        let b = evolve(model, &psi0_chi, &p_chi, cfg);
        (a.join().expect("evolution thread panicked"), b)
    });
    let (path_a, path_b) = (path_a?, path_b?);

    let end_a = path_a.last();
    let end_b = path_b.last();
    let t_end = end_a.time();
    let end_a_chi = apply_gauge_unitary(model, end_a, chi_e)?;
    let l2_distance = end_a_chi.distance(end_b)?;
    let max_density_difference = end_a
        .density()
        .iter()
        .zip(end_b.density())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let original = trajectory_observables(model, &path_a, p)?;
    let transformed = trajectory_observables(model, &path_b, &p_chi)?;
    let (oa, ob) = (original.last().expect("nonempty"), transformed.last().expect("nonempty"));

    let e = model.params.charge;
    let chi_x = chi_e
        .differentiate(Var::X)
        .evaluate_on_nodes(&model.grid.nodes(), t_end, model.constants())?;
    let weighted: Vec<f64> = oa.density.iter().zip(&chi_x).map(|(r, g)| r * g).collect();
    let expected_canonical_offset = e * model.grid.integrate(&weighted) / (oa.norm * oa.norm);
    let expected_energy_difference = uniform_time_derivative(model, chi_e, t_end)?.map(|g| -e * g);

    Ok(CrossGaugeReport {
        chi: chi_e.to_string(),
        t_end,
        l2_distance,
        max_density_difference,
        kinetic_momentum_difference: ob.kinetic_momentum - oa.kinetic_momentum,
        canonical_momentum_offset: ob.canonical_momentum - oa.canonical_momentum,
        expected_canonical_offset,
        energy_difference: ob.energy - oa.energy,
        expected_energy_difference,
        max_norm_drift: path_a.max_norm_drift.max(path_b.max_norm_drift),
        original,
        transformed,
    })
}
