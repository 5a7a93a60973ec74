//! TOML experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::EvolutionConfig;
use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr};
use crate::fields::{unbound_constants, GaugeClass, PotentialPair};
use crate::lattice::Grid;
use crate::model::{Discretization, Model, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    HarmonicShift,
    FreeParticle,
    Classify,
    TemporalGauge,
    Covariance,
    CrossGauge,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::HarmonicShift => "harmonic-shift",
            ExperimentKind::FreeParticle => "free-particle",
            ExperimentKind::Classify => "classify",
            ExperimentKind::TemporalGauge => "temporal-gauge",
            ExperimentKind::Covariance => "covariance",
            ExperimentKind::CrossGauge => "cross-gauge",
        }
    }

    fn default_potentials(self) -> (&'static str, &'static str) {
        match self {
            ExperimentKind::HarmonicShift | ExperimentKind::TemporalGauge | ExperimentKind::Covariance => {
                (OSCILLATOR_PHI, "0")
            }
            _ => ("0", "0"),
        }
    }

    fn default_chi(self) -> &'static str {
        match self {
            ExperimentKind::Covariance => "0.3*x",
            ExperimentKind::Classify | ExperimentKind::TemporalGauge => "0",
            _ => "k*t^2",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(s))
            .map_err(|_| Error::Config(format!("unknown experiment `{s}`")))
    }
}

pub const OSCILLATOR_PHI: &str = "0.5*m*w^2*x^2";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    #[serde(default = "zero_source")]
    phi: String,
    #[serde(default = "zero_source")]
    a: String,
}

fn zero_source() -> String {
    "0".into()
}

/// Gaussian initial state for dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    pub center: f64,
    pub sigma: f64,
    pub k0: f64,
    pub t0: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState {
            center: 0.0,
            sigma: 1.0,
            k0: 0.0,
            t0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    #[serde(default)]
    seed: u64,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    grid: Grid,
    #[serde(default)]
    params: PhysicalParams,
    #[serde(default)]
    discretization: Discretization,
    #[serde(default)]
    constants: BTreeMap<String, f64>,
    potentials: Option<RawPair>,
    chi: Option<String>,
    #[serde(default)]
    chis: Vec<String>,
    #[serde(default)]
    expected: Vec<GaugeClass>,
    #[serde(default)]
    pairs: Vec<RawPair>,
    times: Option<Vec<f64>>,
    states: Option<usize>,
    t: Option<f64>,
    t_ref: Option<f64>,
    expected_a: Option<String>,
    sizes: Option<Vec<usize>>,
    #[serde(default)]
    random_polynomials: usize,
    evolution: Option<EvolutionConfig>,
    #[serde(default)]
    initial: InitialState,
}

/// A parsed and validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub model: Model,
    pub potentials: PotentialPair,
    pub chi: Expr,
    pub chis: Vec<Expr>,
    pub expected: Vec<GaugeClass>,
    pub pairs: Vec<PotentialPair>,
    pub times: Vec<f64>,
    pub states: usize,
    pub t: f64,
    pub t_ref: f64,
    pub expected_a: Option<Expr>,
    pub sizes: Vec<usize>,
    pub random_polynomials: usize,
    pub evolution: EvolutionConfig,
    pub initial: InitialState,
    /// The configuration as read, echoed into reports.
    pub inputs: serde_json::Value,
}

fn parse_expr(source: &str, what: &str) -> Result<Expr> {
    Expr::parse(source).map_err(|e| Error::Config(format!("{what} `{source}`: {e}")))
}

fn parse_pair(raw: &RawPair, what: &str) -> Result<PotentialPair> {
    Ok(PotentialPair::new(
        parse_expr(&raw.phi, &format!("{what} phi"))?,
        parse_expr(&raw.a, &format!("{what} a"))?,
    ))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let inputs = serde_json::to_value(&table).map_err(|e| Error::Config(e.to_string()))?;
        ExperimentConfig::from_raw(raw, inputs)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::from_toml(&text)
    }

    fn from_raw(raw: RawConfig, inputs: serde_json::Value) -> Result<ExperimentConfig> {
        let kind = raw.experiment;
        raw.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        let constants: Bindings = raw.constants.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for reserved in ["x", "t"] {
            if constants.contains(reserved) {
                return Err(Error::Config(format!("`{reserved}` is a coordinate, not a constant")));
            }
        }
        if let Some((name, _)) = constants.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("constant `{name}` is not finite")));
        }
        let model = Model::new(raw.grid, raw.params)?
            .with_discretization(raw.discretization)
            .with_constants(&constants);

        let potentials = match &raw.potentials {
            Some(p) => parse_pair(p, "potentials")?,
            None => {
                let (phi, a) = kind.default_potentials();
                PotentialPair::parse(phi, a)?
            }
        };
        let chi = parse_expr(raw.chi.as_deref().unwrap_or(kind.default_chi()), "chi")?;
        let chis = raw
            .chis
            .iter()
            .map(|s| parse_expr(s, "chis entry"))
            .collect::<Result<Vec<_>>>()?;
        if !raw.expected.is_empty() && raw.expected.len() != chis.len() {
            return Err(Error::Config(format!(
                "`expected` has {} entries for {} gauge functions",
                raw.expected.len(),
                chis.len()
            )));
        }
        let pairs = raw
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| parse_pair(p, &format!("pairs[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let expected_a = raw.expected_a.as_deref().map(|s| parse_expr(s, "expected_a")).transpose()?;

        let mut exprs: Vec<&Expr> = vec![&potentials.phi, &potentials.a, &chi];
        exprs.extend(&chis);
        exprs.extend(pairs.iter().flat_map(|p| [&p.phi, &p.a]));
        exprs.extend(expected_a.iter());
        let missing = unbound_constants(exprs, model.constants());
        if !missing.is_empty() {
            let names: Vec<String> = missing.iter().map(|s| format!("`{s}`")).collect();
            return Err(Error::Config(format!("undefined constant {}", names.join(", "))));
        }

        let times = raw.times.unwrap_or_else(|| match kind {
            ExperimentKind::HarmonicShift | ExperimentKind::FreeParticle => vec![0.0, 1.0, 2.0],
            _ => vec![0.0, 1.0],
        });
        if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("`times` must be a nonempty list of finite numbers".into()));
        }
        let states = raw.states.unwrap_or(5);
        if states == 0 || states > model.grid.len() {
            return Err(Error::Config(format!("`states` must be in 1..={}", model.grid.len())));
        }
        let sizes = raw.sizes.unwrap_or_else(|| vec![128, 256, 512]);
        for &n in &sizes {
            Grid::new(model.grid.x_min(), model.grid.x_max(), n).map_err(|e| Error::Config(e.to_string()))?;
        }
        let evolution = raw.evolution.unwrap_or(EvolutionConfig {
            record_every: 10,
            ..EvolutionConfig::default()
        });
        evolution.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(raw.initial.sigma > 0.0) {
            return Err(Error::Config("initial.sigma must be positive".into()));
        }

        Ok(ExperimentConfig {
            experiment: kind,
            seed: raw.seed,
            output_dir: raw.output_dir,
            model,
            potentials,
            chi,
            chis,
            expected: raw.expected,
            pairs,
            times,
            states,
            t: raw.t.unwrap_or(if kind == ExperimentKind::Covariance { 0.0 } else { 1.0 }),
            t_ref: raw.t_ref.unwrap_or(0.0),
            expected_a,
            sizes,
            random_polynomials: raw.random_polynomials,
            evolution,
            initial: raw.initial,
            inputs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml("experiment = \"harmonic-shift\"\n[constants]\nw = 1.0\nk = 0.1\n").unwrap();
        assert_eq!(c.model.grid, Grid::default());
        assert_eq!(c.potentials.phi.to_string(), "0.5 * m * w^2 * x^2");
        assert_eq!(c.chi.to_string(), "k * t^2");
        assert_eq!(c.times, vec![0.0, 1.0, 2.0]);
        assert_eq!(c.inputs["constants"]["k"], 0.1);
    }

    #[test]
    fn undefined_constant_is_named() {
        let err = ExperimentConfig::from_toml(
            "experiment = \"cross-gauge\"\nchi = \"q*t^2\"\n",
        )
        .unwrap_err();
        assert!(matches!(&err, Error::Config(m) if m.contains("`q`")), "{err}");
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "experiment = \"nope\"",
            "experiment = \"classify\"\nchis = [\"x +\"]",
            "experiment = \"classify\"\nchis = [\"x\"]\nexpected = [\"General\", \"General\"]",
            "experiment = \"classify\"\n[grid]\nx_min = 1\nx_max = 0\nn = 64",
            "experiment = \"classify\"\nbogus = 1",
            "experiment = \"covariance\"\nsizes = [4]",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [
            ExperimentKind::HarmonicShift,
            ExperimentKind::FreeParticle,
            ExperimentKind::Classify,
            ExperimentKind::TemporalGauge,
            ExperimentKind::Covariance,
            ExperimentKind::CrossGauge,
        ] {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
    }
}
