//! Scenario files: what system to build and which reports to emit.

use std::path::Path;

use excite_core::cost::CostModel;
use excite_core::coupling::NoiseModel;
use excite_core::linalg::{CMatrix, C64};
use excite_core::random::generate_system;
use excite_core::ElectronicSystem;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCENARIO_SCHEMA: &str = "excite-prep/scenario/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub protocol: Option<ProtocolConfig>,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default)]
    pub block_encoding: Option<BlockEncodingConfig>,
    #[serde(default)]
    pub cost: Option<CostConfig>,
    pub outputs: Vec<Output>,
}

/// Exactly one of the two forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Explicit(ExplicitSystem),
    Generate(GeneratorConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSystem {
    pub energies: Vec<f64>,
    /// Real part, row-major rows.
    pub coupling_re: Vec<Vec<f64>>,
    /// Imaginary part; zero when absent.
    #[serde(default)]
    pub coupling_im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub gap_scale: f64,
    #[serde(default = "one")]
    pub coupling_scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub w: f64,
    pub lambda: f64,
    pub target: usize,
    #[serde(default)]
    pub dominance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub order: usize,
    pub t_grid: TimeGrid,
}

/// Either explicit times or `steps` evenly spaced points on `[0, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Explicit { times: Vec<f64> },
    Uniform { t_max: f64, steps: usize },
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            TimeGrid::Explicit { times } => times.clone(),
            TimeGrid::Uniform { t_max, steps } => {
                if *steps == 1 {
                    return vec![0.0];
                }
                (0..*steps).map(|i| t_max * i as f64 / (*steps - 1) as f64).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEncodingConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "one_level")]
    pub target: usize,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default = "default_noise_model")]
    pub noise_model: NoiseModel,
}

fn one_level() -> usize {
    1
}

fn default_noise() -> f64 {
    0.1
}

fn default_noise_model() -> NoiseModel {
    NoiseModel::Complement
}

/// A cost model whose `m_denominator` may be omitted and taken from the
/// protocol plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub d0: u64,
    pub dj: u64,
    pub prep_sel: excite_core::cost::PrepSel,
    pub lambda_df_he: f64,
    pub delta0: f64,
    pub deltaj: f64,
    pub a: f64,
    pub b: f64,
    pub mu_j0: f64,
    pub w: f64,
    pub lambda: f64,
    pub w_j0: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub m_denominator: Option<f64>,
}

impl CostConfig {
    pub fn into_model(self, m_denominator: f64) -> CostModel {
        CostModel {
            d0: self.d0,
            dj: self.dj,
            prep_sel: self.prep_sel,
            lambda_df_he: self.lambda_df_he,
            delta0: self.delta0,
            deltaj: self.deltaj,
            a: self.a,
            b: self.b,
            mu_j0: self.mu_j0,
            w: self.w,
            lambda: self.lambda,
            w_j0: self.w_j0,
            epsilon: self.epsilon,
            m_denominator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Evolve,
    Perturb,
    Compare,
    Plan,
    BlockEncodeCheck,
    Cost,
    CompareRoutes,
}

impl Output {
    pub const ALL: [Output; 7] = [
        Output::Evolve,
        Output::Perturb,
        Output::Compare,
        Output::Plan,
        Output::BlockEncodeCheck,
        Output::Cost,
        Output::CompareRoutes,
    ];
}

/// Reads and parses; syntax and type errors carry the JSON path and line.
pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::Schema(format!(
            "at `{}` (line {}, column {}): {}",
            e.path(),
            inner.line(),
            inner.column(),
            inner
        ))
    })?;
    scenario.validate()?;
    Ok(scenario)
}

fn schema_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("at `{field}`: {msg}"))
}

impl Scenario {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(schema_err("schema", format!("expected \"{SCENARIO_SCHEMA}\", got \"{}\"", self.schema)));
        }
        let needs_system = self.outputs.iter().any(|o| {
            matches!(o, Output::Evolve | Output::Perturb | Output::Compare | Output::Plan)
        });
        if needs_system {
            if self.system.is_none() {
                return Err(schema_err("system", "required by the requested outputs"));
            }
            if self.protocol.is_none() {
                return Err(schema_err("protocol", "required by the requested outputs"));
            }
        }
        if self.outputs.iter().any(|o| matches!(o, Output::Evolve | Output::Perturb | Output::Compare))
            && self.perturbation.is_none()
        {
            return Err(schema_err("perturbation", "required by the requested outputs"));
        }
        if self.outputs.contains(&Output::BlockEncodeCheck) && self.block_encoding.is_none() {
            return Err(schema_err("block_encoding", "required by block_encode_check"));
        }
        if self.outputs.iter().any(|o| matches!(o, Output::Cost | Output::CompareRoutes)) {
            match &self.cost {
                None => return Err(schema_err("cost", "required by the requested outputs")),
                Some(c) if c.m_denominator.is_none() && (self.system.is_none() || self.protocol.is_none()) => {
                    return Err(schema_err("cost.m_denominator", "required when no system/protocol is given"));
                }
                _ => {}
            }
        }
        if let Some(p) = &self.perturbation {
            p.validate()?;
        }
        if let Some(SystemConfig::Explicit(e)) = &self.system {
            e.validate()?;
        }
        if let Some(SystemConfig::Generate(g)) = &self.system {
            if g.n < 2 {
                return Err(schema_err("system.generate.n", "must be at least 2"));
            }
        }
        if let (Some(proto), Some(sys)) = (&self.protocol, &self.system) {
            let n = match sys {
                SystemConfig::Explicit(e) => e.energies.len(),
                SystemConfig::Generate(g) => g.n,
            };
            if proto.target >= n {
                return Err(schema_err("protocol.target", format!("{} is out of range 0..{n}", proto.target)));
            }
        }
        if let Some(b) = &self.block_encoding {
            if b.n < 2 || b.target == 0 || b.target >= b.n {
                return Err(schema_err("block_encoding", "need n >= 2 and 0 < target < n"));
            }
        }
        Ok(())
    }

    pub fn build_system(&self) -> Result<ElectronicSystem, CliError> {
        match self.system.as_ref().ok_or_else(|| schema_err("system", "missing"))? {
            SystemConfig::Explicit(e) => e.build(),
            SystemConfig::Generate(g) => generate_system(g.n, g.seed, g.gap_scale, g.coupling_scale)
                .map_err(|err| schema_err("system.generate", err)),
        }
    }
}

impl PerturbationConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.order > excite_core::perturbation::MAX_ORDER {
            return Err(schema_err(
                "perturbation.order",
                format!("{} exceeds the cap {}", self.order, excite_core::perturbation::MAX_ORDER),
            ));
        }
        match &self.t_grid {
            TimeGrid::Uniform { t_max, steps } => {
                if !(*t_max > 0.0 && t_max.is_finite()) || *steps < 2 {
                    return Err(schema_err("perturbation.t_grid", "need t_max > 0 and steps >= 2"));
                }
            }
            TimeGrid::Explicit { times } => {
                if times.is_empty() || times.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return Err(schema_err("perturbation.t_grid.times", "need finite, non-negative times"));
                }
                if times.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(schema_err("perturbation.t_grid.times", "must be strictly increasing"));
                }
            }
        }
        Ok(())
    }
}

impl ExplicitSystem {
    fn validate(&self) -> Result<(), CliError> {
        let n = self.energies.len();
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !square(&self.coupling_re) {
            return Err(schema_err("system.explicit.coupling_re", format!("must be {n}x{n}")));
        }
        if let Some(im) = &self.coupling_im {
            if !square(im) {
                return Err(schema_err("system.explicit.coupling_im", format!("must be {n}x{n}")));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ElectronicSystem, CliError> {
        self.validate()?;
        let n = self.energies.len();
        let mu = CMatrix::from_fn(n, n, |i, j| {
            let im = self.coupling_im.as_ref().map_or(0.0, |m| m[i][j]);
            C64::new(self.coupling_re[i][j], im)
        });
        ElectronicSystem::new(self.energies.clone(), mu).map_err(|e| schema_err("system.explicit", e))
    }

    pub fn from_system(sys: &ElectronicSystem) -> Self {
        let m = sys.coupling();
        let rows = |f: fn(&C64) -> f64| (0..sys.n()).map(|i| (0..sys.n()).map(|j| f(&m[(i, j)])).collect()).collect();
        Self { energies: sys.energies().to_vec(), coupling_re: rows(|z| z.re), coupling_im: Some(rows(|z| z.im)) }
    }
}
