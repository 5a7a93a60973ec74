//! Uniform grids, sampled wavefunctions and quadrature.
//!
//! The grid carries hard walls one spacing beyond each end node, matching
//! the Dirichlet finite-difference Hamiltonian. With the wall values equal to
//! zero the trapezoid rule over `[x_min - h, x_max + h]` reduces to `h·Σ f_i`
//! over the grid nodes, which is the quadrature used everywhere below.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr};
use crate::numfmt::fmt12;

pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec")]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

#[derive(Deserialize)]
struct GridSpec {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.x_min, s.x_max, s.n)
    }
}

impl Default for Grid {
    /// `[-10, 10]` with 512 nodes.
    fn default() -> Self {
        Grid {
            x_min: -10.0,
            x_max: 10.0,
            n: 512,
        }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Grid> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        Ok(Grid { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Trapezoid rule with the hard walls one spacing beyond either end,
    /// where the samples vanish; this reduces to `h·Σ values`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.spacing() * values.iter().sum::<f64>()
    }
}

/// Complex amplitudes on a grid at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: Grid,
    time: f64,
    amplitudes: Vec<Complex64>,
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl Wavefunction {
    pub fn new(grid: Grid, time: f64, amplitudes: Vec<Complex64>) -> Result<Wavefunction> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for a grid of {} nodes",
                amplitudes.len(),
                grid.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(Wavefunction {
            grid,
            time,
            amplitudes,
        })
    }

    pub fn zeros(grid: Grid, time: f64) -> Wavefunction {
        Wavefunction {
            grid,
            time,
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Wavefunction> {
        let amps = grid.nodes().into_iter().map(f).collect();
        Wavefunction::new(grid, time, amps)
    }

    /// Analytically normalized Gaussian packet whose density has standard
    /// deviation `sigma`, centered at `center` with mean wavenumber `k0`.
    pub fn gaussian(grid: Grid, time: f64, center: f64, sigma: f64, k0: f64) -> Result<Wavefunction> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        let amp = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        Wavefunction::from_fn(grid, time, |x| {
            let d = x - center;
            Complex64::from_polar(amp * (-d * d / (4.0 * sigma * sigma)).exp(), k0 * x)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn with_time(mut self, time: f64) -> Wavefunction {
        self.time = time;
        self
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.grid.integrate(&self.density()).sqrt()
    }

    pub fn normalize(&self) -> Result<Wavefunction> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Wavefunction {
            amplitudes: self.amplitudes.iter().map(|z| z / norm).collect(),
            ..self.clone()
        })
    }

    /// Pointwise map of amplitudes, keeping grid and time.
    pub fn map(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Wavefunction {
        Wavefunction {
            amplitudes: self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(i, z)| f(i, *z))
                .collect(),
            ..self.clone()
        }
    }

    /// `sqrt(∫|ψ - φ|²)`.
    pub fn distance(&self, other: &Wavefunction) -> Result<f64> {
        check_compatible(self, other)?;
        let d: Vec<f64> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .collect();
        Ok(self.grid.integrate(&d).sqrt())
    }

    /// CSV with columns `x, re, im, abs2`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "x,re,im,abs2")?;
        for (x, z) in self.grid.nodes().into_iter().zip(&self.amplitudes) {
            writeln!(
                w,
                "{},{},{},{}",
                fmt12(x),
                fmt12(z.re),
                fmt12(z.im),
                fmt12(z.norm_sqr())
            )?;
        }
        Ok(())
    }
}

fn check_compatible(a: &Wavefunction, b: &Wavefunction) -> Result<()> {
    if a.grid != b.grid || !same_time(a.time, b.time) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `∫ conj(ψ)·φ dx`.
pub fn inner_product(psi: &Wavefunction, phi: &Wavefunction) -> Result<Complex64> {
    check_compatible(psi, phi)?;
    let sum: Complex64 = psi
        .amplitudes
        .iter()
        .zip(&phi.amplitudes)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * psi.grid.spacing())
}

/// Values of `e` at the grid nodes at time `t`.
pub fn sample_expression(e: &Expr, grid: &Grid, t: f64, constants: &Bindings) -> Result<Vec<f64>> {
    e.evaluate_on_nodes(&grid.nodes(), t, constants)
}
