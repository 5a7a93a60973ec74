//! Lattice Hamiltonian `(p - e a)²/2m + e φ` at a frozen time, its spectrum,
//! and the matrix-element, gap and eigenvalue-shift formulas for gauge
//! transformed potentials.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::fields::{GaugeClass, GaugeFunction, PotentialPair};
use crate::lattice::{Grid, Wavefunction};
use crate::model::{CouplingScheme, Model};
use crate::numfmt::{fmt12, round12};

/// Residual bound used by [`energy_gap_report`] and matrix-element checks.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;

/// Spread of `∂χ/∂t` across the grid still treated as uniform.
pub const UNIFORM_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hermitian band matrix: the real diagonal and the upper diagonals.
/// `upper[d - 1][i]` is `H[i][i + d]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Banded {
    pub(crate) diag: Vec<f64>,
    pub(crate) upper: Vec<Vec<Complex64>>,
}

impl Banded {
    pub(crate) fn len(&self) -> usize {
        self.diag.len()
    }

    pub(crate) fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let mut out: Vec<Complex64> = (0..n).map(|i| v[i] * self.diag[i]).collect();
        for (k, band) in self.upper.iter().enumerate() {
            let d = k + 1;
            for (i, &h) in band.iter().enumerate() {
                out[i] += h * v[i + d];
                out[i + d] += h.conj() * v[i];
            }
        }
        out
    }

    fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        for (k, band) in self.upper.iter().enumerate() {
            for (i, &h) in band.iter().enumerate() {
                m[(i, i + k + 1)] = h;
                m[(i + k + 1, i)] = h.conj();
            }
        }
        m
    }
}

/// Per-link integrals `∫_{x_j}^{x_{j+1}} a(x, t) dx`.
pub(crate) fn link_integrals(model: &Model, a: &Expr, t: f64) -> Result<Vec<f64>> {
    let grid = &model.grid;
    let n = grid.len();
    if a.is_zero_const() {
        return Ok(vec![0.0; n - 1]);
    }
    let h = grid.spacing();
    let (nodes, weights) = crate::quad::GAUSS5;
    let mut xs = Vec::with_capacity(5 * (n - 1));
    for j in 0..n - 1 {
        let mid = grid.node(j) + 0.5 * h;
        xs.extend(nodes.iter().map(|s| mid + 0.5 * h * s));
    }
    let vals = a.evaluate_on_nodes(&xs, t, model.constants())?;
    Ok(vals
        .chunks(5)
        .map(|c| 0.5 * h * c.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>())
        .collect())
}

pub(crate) fn assemble_banded(model: &Model, p: &PotentialPair, t: f64) -> Result<Banded> {
    let grid = &model.grid;
    let n = grid.len();
    let xs = grid.nodes();
    let h = grid.spacing();
    let PhysicalConsts { hbar, mass, e } = PhysicalConsts::of(model);
    let kappa = hbar * hbar / (2.0 * mass * h * h);
    let (d0, offs) = model.discretization.kinetic.weights();

    let phi = p.phi.evaluate_on_nodes(&xs, t, model.constants())?;
    let mut diag: Vec<f64> = phi.iter().map(|v| kappa * d0 + e * v).collect();
    let mut upper: Vec<Vec<Complex64>> = offs
        .iter()
        .enumerate()
        .map(|(k, c)| vec![Complex64::new(kappa * c, 0.0); n - k - 1])
        .collect();

    match model.discretization.coupling {
        CouplingScheme::Peierls => {
            if !p.a.is_zero_const() {
                let links = link_integrals(model, &p.a, t)?;
                for (k, band) in upper.iter_mut().enumerate() {
                    let d = k + 1;
                    for (i, hop) in band.iter_mut().enumerate() {
                        let flux: f64 = links[i..i + d].iter().sum();
                        *hop *= Complex64::from_polar(1.0, -e * flux / hbar);
                    }
                }
            }
        }
        CouplingScheme::Symmetric => {
            if !p.a.is_zero_const() {
                let a = p.a.evaluate_on_nodes(&xs, t, model.constants())?;
                // (i e ħ / 2m)(a ∂ + ∂ a) with central differences gives
                // i e ħ (a_i + a_{i+1}) / (4 m h) above the diagonal.
                let c = e * hbar / (4.0 * mass * h);
                for (i, hop) in upper[0].iter_mut().enumerate() {
                    hop.im += c * (a[i] + a[i + 1]);
                }
                for (d, ai) in diag.iter_mut().zip(&a) {
                    *d += e * e * ai * ai / (2.0 * mass);
                }
            }
        }
    }
    Ok(Banded { diag, upper })
}

struct PhysicalConsts {
    hbar: f64,
    mass: f64,
    e: f64,
}

impl PhysicalConsts {
    fn of(model: &Model) -> Self {
        PhysicalConsts {
            hbar: model.params.hbar,
            mass: model.params.mass,
            e: model.params.charge,
        }
    }
}

/// Dense Hermitian Hamiltonian at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub entries: DMatrix<Complex64>,
    pub time: f64,
    pub grid: Grid,
}

impl HamiltonianMatrix {
    /// Builds from arbitrary entries, mirroring the upper triangle so the
    /// result is exactly Hermitian.
    pub fn from_upper(entries: DMatrix<Complex64>, time: f64, grid: Grid) -> Result<Self> {
        let n = grid.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "{}x{} matrix for a grid of {n} nodes",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let mut m = entries;
        for i in 0..n {
            m[(i, i)].im = 0.0;
            for j in i + 1..n {
                m[(j, i)] = m[(i, j)].conj();
            }
        }
        Ok(HamiltonianMatrix {
            entries: m,
            time,
            grid,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `max |H[i][j] - conj(H[j][i])|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, psi: &Wavefunction) -> Result<Wavefunction> {
        if *psi.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let out = &self.entries * v;
        Wavefunction::new(self.grid, psi.time(), out.iter().copied().collect())
    }

    /// `max |A[i][j] - B[i][j]|`.
    pub fn max_abs_difference(&self, other: &HamiltonianMatrix) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

pub fn assemble(model: &Model, p: &PotentialPair, t: f64) -> Result<HamiltonianMatrix> {
    let banded = assemble_banded(model, p, t)?;
    Ok(HamiltonianMatrix {
        entries: banded.to_dense(),
        time: t,
        grid: model.grid,
    })
}

/// Lowest eigenpairs at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Wavefunction>,
    pub time: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// CSV with columns `index, eigenvalue`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "index,eigenvalue")?;
        for (i, e) in self.eigenvalues.iter().enumerate() {
            writeln!(w, "{i},{}", fmt12(*e))?;
        }
        Ok(())
    }
}

impl Serialize for Spectrum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Spectrum", 2)?;
        let ev: Vec<f64> = self.eigenvalues.iter().map(|&v| round12(v)).collect();
        st.serialize_field("eigenvalues", &ev)?;
        st.serialize_field("time", &round12(self.time))?;
        st.end()
    }
}

/// The `k` lowest eigenpairs. Eigenvectors are normalized under the grid
/// quadrature and their largest-magnitude component is real and positive.
pub fn spectrum(h: &HamiltonianMatrix, k: usize) -> Result<Spectrum> {
    let n = h.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= {n}, got {k}")));
    }
    let eig = h.entries.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = 1.0 / h.grid.spacing().sqrt();

    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    for &j in order.iter().take(k) {
        eigenvalues.push(eig.eigenvalues[j]);
        let col = eig.eigenvectors.column(j);
        let mut pivot = ZERO;
        for z in col.iter() {
            if z.norm() > pivot.norm() {
                pivot = *z;
            }
        }
        let rot = pivot.conj() / pivot.norm();
        let mut amps: Vec<Complex64> = col.iter().map(|z| z * rot * scale).collect();
        // The rotation leaves the pivot with rounding-level imaginary part.
        if let Some(z) = amps.iter_mut().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
            *z = Complex64::new(z.norm(), 0.0);
        }
        eigenvectors.push(Wavefunction::new(h.grid, h.time, amps)?);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        time: h.time,
    })
}

/// `⟨ψ|f|φ⟩` for a real multiplication operator sampled on the grid.
pub(crate) fn sandwich_diagonal(psi: &[Complex64], f: &[f64], phi: &[Complex64], h: f64) -> Complex64 {
    psi.iter()
        .zip(f)
        .zip(phi)
        .map(|((a, v), b)| a.conj() * b * *v)
        .sum::<Complex64>()
        * h
}

fn dot(psi: &[Complex64], phi: &[Complex64], h: f64) -> Complex64 {
    psi.iter().zip(phi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixElementCheck {
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "ser_complex")]
    pub lhs: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub rhs: Complex64,
    pub residual: f64,
}

fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [round12(z.re), round12(z.im)].serialize(s)
}

/// `⟨n_χ|H_χ|m_χ⟩` against `E_n δ_nm - e⟨n|∂χ/∂t|m⟩`, where `|n_χ⟩` is the
/// phase-transformed eigenvector of the untransformed Hamiltonian.
pub fn matrix_element_identity(
    model: &Model,
    p: &PotentialPair,
    chi: &GaugeFunction,
    t: f64,
    n: usize,
    m: usize,
) -> Result<MatrixElementCheck> {
    let spec = spectrum(&assemble(model, p, t)?, n.max(m) + 1)?;
    matrix_element_with(model, p, &spec, chi, n, m)
}

/// As [`matrix_element_identity`] with a precomputed spectrum of the
/// untransformed Hamiltonian.
pub fn matrix_element_with(
    model: &Model,
    p: &PotentialPair,
    spec: &Spectrum,
    chi: &GaugeFunction,
    n: usize,
    m: usize,
) -> Result<MatrixElementCheck> {
    let k = spec.len();
    if n >= k || m >= k {
        return Err(Error::InvalidArgument(format!(
            "state indices ({n}, {m}) exceed the {k} computed states"
        )));
    }
    let t = spec.time;
    let h = model.grid.spacing();
    let phase = crate::gauge_engine::GaugePhase::new(model, chi.chi(), t)?;
    let bra = phase.apply(spec.eigenvectors[n].amplitudes());
    let ket = phase.apply(spec.eigenvectors[m].amplitudes());
    let h_chi = assemble_banded(model, &p.gauge_transform(chi.chi()), t)?;
    let lhs = dot(&bra, &h_chi.apply(&ket), h);

    let chi_t = chi.chi().differentiate(Var::T);
    let chi_t_vals = chi_t.evaluate_on_nodes(&model.grid.nodes(), t, model.constants())?;
    let shift = sandwich_diagonal(
        spec.eigenvectors[n].amplitudes(),
        &chi_t_vals,
        spec.eigenvectors[m].amplitudes(),
        h,
    );
    let diag = if n == m { spec.eigenvalues[n] } else { 0.0 };
    let rhs = Complex64::new(diag, 0.0) - shift * model.params.charge;
    Ok(MatrixElementCheck {
        n,
        m,
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

/// `∂χ/∂t` on the grid at `t` if it is uniform within
/// [`UNIFORM_TOLERANCE`].
pub(crate) fn uniform_time_derivative(model: &Model, chi: &Expr, t: f64) -> Result<Option<f64>> {
    let vals = chi
        .differentiate(Var::T)
        .evaluate_on_nodes(&model.grid.nodes(), t, model.constants())?;
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    Ok((hi - lo <= UNIFORM_TOLERANCE * scale).then_some(vals[0]))
}

/// `-e·dg/dt` for a separable `χ = f(x) + g(t)`.
pub fn predicted_shift(model: &Model, chi: &GaugeFunction, t: f64) -> Result<f64> {
    if chi.class() == GaugeClass::General {
        return Err(Error::NotSeparable(chi.chi().to_string()));
    }
    match uniform_time_derivative(model, chi.chi(), t)? {
        Some(g_dot) => Ok(-model.params.charge * g_dot),
        None => Err(Error::NotSeparable(chi.chi().to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub m: usize,
    pub gap_0: f64,
    pub gap_chi: f64,
    /// `e ∫ ∂χ/∂t (ρ_m - ρ_n) dx`.
    pub correction: f64,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyGapReport {
    pub time: f64,
    pub tolerance: f64,
    pub rows: Vec<GapRow>,
}

impl EnergyGapReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// Energy gaps in both gauges against the density-weighted correction.
pub fn energy_gap_report(
    model: &Model,
    p: &PotentialPair,
    chi: &GaugeFunction,
    t: f64,
    pairs: &[(usize, usize)],
) -> Result<EnergyGapReport> {
    let k = pairs.iter().map(|&(n, m)| n.max(m) + 1).max().unwrap_or(1);
    let spec_0 = spectrum(&assemble(model, p, t)?, k)?;
    let spec_chi = spectrum(&assemble(model, &p.gauge_transform(chi.chi()), t)?, k)?;
    let chi_t = chi
        .chi()
        .differentiate(Var::T)
        .evaluate_on_nodes(&model.grid.nodes(), t, model.constants())?;
    let e = model.params.charge;
    let rows = pairs
        .iter()
        .map(|&(n, m)| {
            let rho_n = spec_0.eigenvectors[n].density();
            let rho_m = spec_0.eigenvectors[m].density();
            let weighted: Vec<f64> = chi_t
                .iter()
                .zip(rho_m.iter().zip(&rho_n))
                .map(|(g, (a, b))| g * (a - b))
                .collect();
            let correction = e * model.grid.integrate(&weighted);
            let gap_0 = spec_0.eigenvalues[n] - spec_0.eigenvalues[m];
            let gap_chi = spec_chi.eigenvalues[n] - spec_chi.eigenvalues[m];
            let residual = (gap_chi - gap_0 - correction).abs();
            GapRow {
                n,
                m,
                gap_0,
                gap_chi,
                correction,
                residual,
                passed: residual <= IDENTITY_TOLERANCE,
            }
        })
        .collect();
    Ok(EnergyGapReport {
        time: t,
        tolerance: IDENTITY_TOLERANCE,
        rows,
    })
}
