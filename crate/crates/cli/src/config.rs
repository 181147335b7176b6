//! TOML experiment configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use coupled_core::markets::{
    build_isoelastic, build_piecewise, build_surplus, response_from_payoff, AffineSurplus, CournotModel,
    IsoelasticParams, PiecewiseResponse,
};
use coupled_core::{
    AffineResponse, DomainBox, HardyRogersConstants, Interval, ProductPoint, Projection, ResponseSystem, SamplerPolicy,
    SolverPolicy,
};
use serde::{Deserialize, Serialize};

use crate::error::{from_build, CliError};
use crate::tables::TableName;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub model: ModelConfig,
    #[serde(default)]
    pub starts: Vec<StartConfig>,
    pub commands: Vec<Command>,
    /// Output directory; `--out` takes precedence.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverPolicy,
    #[serde(default)]
    pub certify: Vec<CertifyConfig>,
    #[serde(default)]
    pub lipschitz: LipschitzConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl StartConfig {
    pub fn point(&self) -> Result<ProductPoint, CliError> {
        ProductPoint::from_vecs(self.x.clone(), self.y.clone()).map_err(|e| CliError::Config(format!("start: {e}")))
    }
}

/// Box domains: one `[lo, hi]` per coordinate of each player's bundle.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
}

impl DomainConfig {
    pub fn boxes(&self) -> Result<(DomainBox, DomainBox), CliError> {
        let make = |axes: &[[f64; 2]], who: &str| -> Result<DomainBox, CliError> {
            let intervals = axes
                .iter()
                .map(|[lo, hi]| Interval::new(*lo, *hi))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(format!("model.domain.{who}: {e}")))?;
            DomainBox::new(intervals).map_err(|e| CliError::Config(format!("model.domain.{who}: {e}")))
        };
        Ok((make(&self.x, "x")?, make(&self.y, "y")?))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    Affine(AffineModel),
    CournotQuadratic(CournotQuadraticModel),
    Isoelastic(IsoelasticModel),
    Surplus(SurplusModel),
    Piecewise(PiecewiseModel),
}

/// `z -> matrix z + offset` on the concatenated point `z = (x, y)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineModel {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
    #[serde(default)]
    pub projection: Projection,
    pub domain: DomainConfig,
}

/// `P = a - b1 x - b2 y`, costs `q1 x^2` and `q2 y^2`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CournotQuadraticModel {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub q1: f64,
    pub q2: f64,
    /// Finite-difference step.
    #[serde(default = "default_h")]
    pub h: f64,
    pub domain: DomainConfig,
}

fn default_h() -> f64 {
    1e-3
}

impl CournotQuadraticModel {
    pub fn model(&self) -> CournotModel {
        CournotModel::linear_quadratic(self.a, self.b1, self.b2, self.q1, self.q2)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoelasticModel {
    pub eta: f64,
    pub c: f64,
    pub q_max: f64,
    pub domain: DomainConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurplusModel {
    /// `[const, x, y, own surplus]`
    pub f1: [f64; 4],
    pub f2: [f64; 4],
    /// `[u1, u2]`
    pub q1: [f64; 2],
    pub q2: [f64; 2],
    pub domain: DomainConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseConfig {
    pub lo: f64,
    pub ends: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseConfig {
    fn response(&self, who: &str) -> Result<PiecewiseResponse, CliError> {
        PiecewiseResponse::from_breakpoints(self.lo, &self.ends, &self.values)
            .map_err(|e| CliError::Config(format!("model.{who}: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseModel {
    pub first: PiecewiseConfig,
    pub second: PiecewiseConfig,
    pub domain: DomainConfig,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ResponseSystem, CliError> {
        match self {
            ModelConfig::Affine(m) => {
                let (d1, d2) = m.domain.boxes()?;
                let ar = AffineResponse::new(m.matrix.clone(), m.offset.clone(), d1.dim()).map_err(from_build)?;
                ar.to_system(d1, d2, m.projection).map_err(from_build)
            }
            ModelConfig::CournotQuadratic(m) => {
                let (d1, d2) = m.domain.boxes()?;
                response_from_payoff(&m.model(), m.h, d1, d2).map_err(from_build)
            }
            ModelConfig::Isoelastic(m) => {
                let (d1, d2) = m.domain.boxes()?;
                build_isoelastic(&IsoelasticParams { eta: m.eta, c: m.c, q_max: m.q_max }, d1, d2).map_err(from_build)
            }
            ModelConfig::Surplus(m) => {
                let (d1, d2) = m.domain.boxes()?;
                let coeffs = AffineSurplus { f1: m.f1, f2: m.f2, q1: m.q1, q2: m.q2 };
                build_surplus(&coeffs.model(), d1, d2).map_err(from_build)
            }
            ModelConfig::Piecewise(m) => {
                let (d1, d2) = m.domain.boxes()?;
                build_piecewise(&m.first.response("first")?, &m.second.response("second")?, d1, d2).map_err(from_build)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    #[default]
    Pass,
    Fail,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub k1: f64,
    #[serde(default)]
    pub k2: f64,
    #[serde(default)]
    pub k3: f64,
    /// Grid points per axis; with neither this nor `random_pairs` the default
    /// sampler for the system is used.
    pub grid_points: Option<usize>,
    pub random_pairs: Option<usize>,
    #[serde(default)]
    pub expect: Expectation,
}

impl CertifyConfig {
    pub fn constants(&self) -> Result<HardyRogersConstants, CliError> {
        HardyRogersConstants::new(self.k1, self.k2, self.k3).map_err(|e| CliError::Config(format!("certify: {e}")))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipschitzConfig {
    pub grid_points: Option<usize>,
    pub random_pairs: Option<usize>,
    /// Audit bound: the estimate must not exceed it.
    pub max: Option<f64>,
}

/// The sampler described by optional grid/random settings.
pub fn sampler(sys: &ResponseSystem, grid: Option<usize>, random: Option<usize>, seed: u64) -> SamplerPolicy {
    match (grid, random) {
        (None, None) => SamplerPolicy { seed, ..SamplerPolicy::default_for(sys) },
        (grid_points, random_pairs) => {
            SamplerPolicy { grid_points, random_pairs: random_pairs.unwrap_or(0), seed, ..SamplerPolicy::default() }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Certify,
    EstimateLipschitz,
    SecondOrderCheck,
    ReproduceTable(TableName),
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let cmd = match (words.next(), words.next()) {
            (Some("solve"), None) => Command::Solve,
            (Some("certify"), None) => Command::Certify,
            (Some("estimate-lipschitz"), None) => Command::EstimateLipschitz,
            (Some("second-order-check"), None) => Command::SecondOrderCheck,
            (Some("reproduce-table"), Some(name)) => {
                Command::ReproduceTable(name.parse().map_err(|_| format!("unknown table `{name}`"))?)
            }
            _ => return Err(format!("unknown command `{s}`")),
        };
        match words.next() {
            Some(extra) => Err(format!("unexpected `{extra}` in command `{s}`")),
            None => Ok(cmd),
        }
    }
}

impl<'de> Deserialize<'de> for Command {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.commands.is_empty() {
            return Err(CliError::Config("`commands` must list at least one command".into()));
        }
        let needs_starts = self.commands.iter().any(|c| matches!(c, Command::Solve | Command::SecondOrderCheck));
        if needs_starts && self.starts.is_empty() {
            return Err(CliError::Config("`starts` must be nonempty for solve and second-order-check".into()));
        }
        if self.commands.contains(&Command::Certify) && self.certify.is_empty() {
            return Err(CliError::Config("`certify` command needs at least one [[certify]] block".into()));
        }
        if self.commands.contains(&Command::SecondOrderCheck) && !matches!(self.model, ModelConfig::CournotQuadratic(_))
        {
            return Err(CliError::Config("second-order-check needs a cournot-quadratic model".into()));
        }
        self.solver.validate().map_err(|e| CliError::Config(format!("solver: {e}")))?;
        for c in &self.certify {
            c.constants()?;
        }
        for s in &self.starts {
            s.point()?;
        }
        Ok(())
    }
}
