//! JSON configuration: schema, defaults, validation, and lowering to the
//! library's types.
//!
//! Unknown keys are rejected everywhere, semantic violations are reported
//! with their field path, and a filled config serializes back to JSON that
//! reloads identically.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use grandmorrey::dsl::{self, Ast, FamilySpec};
use grandmorrey::grid::{make_grid, Domain, Grading, Grid};
use grandmorrey::norms::{BallSweep, EpsSweep, SpaceParams, SweepOptions};
use grandmorrey::operators::{Kernel, OperatorKind, DEFAULT_DELTA_FACTOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    Interval { bounds: [f64; 2] },
    Box { bounds: [[f64; 2]; 2] },
}

impl DomainConfig {
    pub fn dim(&self) -> usize {
        match self {
            DomainConfig::Interval { .. } => 1,
            DomainConfig::Box { .. } => 2,
        }
    }

    pub fn to_domain(&self) -> Result<Domain, String> {
        match self {
            DomainConfig::Interval { bounds } => Domain::interval(bounds[0], bounds[1]),
            DomainConfig::Box { bounds } => Domain::rect(
                (bounds[0][0], bounds[0][1]),
                (bounds[1][0], bounds[1][1]),
            ),
        }
        .map_err(|e| format!("domain.bounds: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingConfig {
    pub point: [f64; 2],
    #[serde(default = "default_grading_levels")]
    pub levels: u32,
    #[serde(default = "default_grading_ratio")]
    pub ratio: f64,
}

fn default_grading_levels() -> u32 {
    12
}

fn default_grading_ratio() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_cells")]
    pub cells: Vec<u32>,
    #[serde(default)]
    pub grading: Vec<GradingConfig>,
}

fn default_cells() -> Vec<u32> {
    vec![1 << 12]
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            cells: default_cells(),
            grading: Vec::new(),
        }
    }
}

/// Parameter bag for the builtin families; which fields apply depends on
/// the family name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    #[serde(default)]
    pub params: FamilyParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
}

impl FunctionConfig {
    pub fn to_ast(&self, dim: usize) -> Result<Ast, String> {
        match (&self.expr, &self.family) {
            (Some(expr), None) => {
                dsl::parse(expr, dim).map_err(|e| format!("function.expr: {e}"))
            }
            (None, Some(family)) => Ok(dsl::family_to_ast(&family.to_spec()?, dim)),
            (Some(_), Some(_)) => {
                Err("function: give either expr or family, not both".into())
            }
            (None, None) => Err("function: give expr or family".into()),
        }
    }
}

impl FamilyConfig {
    fn to_spec(&self) -> Result<FamilySpec, String> {
        let p = &self.params;
        let need = |field: &str, v: Option<f64>| {
            v.ok_or_else(|| format!("function.family.params.{field} is required for {}", self.name))
        };
        match self.name.as_str() {
            "power" => Ok(FamilySpec::Power {
                beta: need("beta", p.beta)?,
                point: p.point.unwrap_or([0.0; 2]),
            }),
            "indicator" => Ok(FamilySpec::Indicator {
                lo: p.lo.ok_or("function.family.params.lo is required for indicator")?,
                hi: p.hi.ok_or("function.family.params.hi is required for indicator")?,
            }),
            "oscillatory" => Ok(FamilySpec::Oscillatory {
                k: need("k", p.k)?,
            }),
            "constant" => Ok(FamilySpec::Constant {
                c: need("c", p.c)?,
            }),
            other => Err(format!(
                "function.family.name: unknown family \"{other}\" \
                 (expected power, indicator, oscillatory, or constant)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub p: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub alpha: f64,
}

fn default_theta() -> f64 {
    1.0
}

impl SpaceConfig {
    pub fn to_space(&self) -> Result<SpaceParams, String> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(format!("space.p must exceed 1, got {}", self.p));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(format!("space.lambda must lie in [0, 1), got {}", self.lambda));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(format!("space.theta must be positive, got {}", self.theta));
        }
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(format!("space.alpha must be nonnegative, got {}", self.alpha));
        }
        SpaceParams::new(self.p, self.lambda, self.theta, self.alpha)
            .map_err(|e| format!("space: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsSweepConfig {
    #[serde(default = "default_approach_count")]
    pub approach_count: u32,
    #[serde(default = "default_uniform_count")]
    pub uniform_count: u32,
}

fn default_approach_count() -> u32 {
    20
}

fn default_uniform_count() -> u32 {
    64
}

impl Default for EpsSweepConfig {
    fn default() -> Self {
        EpsSweepConfig {
            approach_count: default_approach_count(),
            uniform_count: default_uniform_count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSweepConfig {
    /// Center stride in cells per axis; 0 picks the dimension default.
    #[serde(default)]
    pub stride: u32,
    #[serde(default = "default_per_octave")]
    pub per_octave: u32,
    #[serde(default = "default_min_radius_cells")]
    pub min_radius_cells: f64,
}

fn default_per_octave() -> u32 {
    8
}

fn default_min_radius_cells() -> f64 {
    2.0
}

impl Default for BallSweepConfig {
    fn default() -> Self {
        BallSweepConfig {
            stride: 0,
            per_octave: default_per_octave(),
            min_radius_cells: default_min_radius_cells(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepsConfig {
    #[serde(default)]
    pub eps: EpsSweepConfig,
    #[serde(default)]
    pub balls: BallSweepConfig,
}

impl SweepsConfig {
    pub fn to_options(&self) -> SweepOptions {
        SweepOptions {
            eps: EpsSweep {
                approach_count: self.eps.approach_count,
                uniform_count: self.eps.uniform_count,
            },
            balls: BallSweep {
                stride: self.balls.stride,
                per_octave: self.balls.per_octave,
                min_radius_cells: self.balls.min_radius_cells,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// "maximal", "hilbert", "riesz1", or "riesz2"; the latter three pick
    /// the kernel of the truncated singular operator.
    #[serde(default = "default_operator_kind")]
    pub kind: String,
    #[serde(default = "default_delta_factor")]
    pub delta_factor: f64,
}

fn default_operator_kind() -> String {
    "maximal".into()
}

fn default_delta_factor() -> f64 {
    DEFAULT_DELTA_FACTOR
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            kind: default_operator_kind(),
            delta_factor: default_delta_factor(),
        }
    }
}

impl OperatorConfig {
    pub fn to_kind(&self) -> Result<OperatorKind, String> {
        match self.kind.as_str() {
            "maximal" => Ok(OperatorKind::Maximal),
            "hilbert" => Ok(OperatorKind::Singular(Kernel::Hilbert)),
            "riesz1" => Ok(OperatorKind::Singular(Kernel::Riesz1)),
            "riesz2" => Ok(OperatorKind::Singular(Kernel::Riesz2)),
            other => Err(format!(
                "operator.kind: unknown operator \"{other}\" \
                 (expected maximal, hilbert, riesz1, or riesz2)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default = "one")]
    pub c0: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(rename = "C0", default = "one")]
    pub big_c0: f64,
    #[serde(default)]
    pub calibrate: bool,
}

fn one() -> f64 {
    1.0
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            c0: 1.0,
            c: 1.0,
            big_c0: 1.0,
            calibrate: false,
        }
    }
}

impl ConstantsConfig {
    pub fn to_config(&self) -> grandmorrey::constants::ConstantConfig {
        grandmorrey::constants::ConstantConfig {
            c0: self.c0,
            c: self.c,
            big_c0: self.big_c0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// "embedding", "dominance", "reduction", or "operator-oracle";
    /// reduction takes its operator from the operator section.
    #[serde(default = "default_suite_name")]
    pub name: String,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default = "default_max_levels")]
    pub max_levels: u32,
    #[serde(default)]
    pub seed: u64,
}

fn default_suite_name() -> String {
    "dominance".into()
}

fn default_sigma() -> f64 {
    0.1
}

fn default_s() -> f64 {
    0.4
}

fn default_max_levels() -> u32 {
    2
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            name: default_suite_name(),
            sigma: default_sigma(),
            s: default_s(),
            rel_tol: None,
            max_levels: default_max_levels(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    /// "lebesgue", "morrey", "grand_lebesgue", or "grand_grand".
    #[serde(default = "default_norm_kind")]
    pub kind: String,
}

fn default_norm_kind() -> String {
    "grand_grand".into()
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            kind: default_norm_kind(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub domain: DomainConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub function: FunctionConfig,
    pub space: SpaceConfig,
    #[serde(default)]
    pub norm: NormConfig,
    #[serde(default)]
    pub sweeps: SweepsConfig,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub suite: SuiteConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Config {
    /// A full default configuration: f = 1 on the unit interval, p = 2.
    pub fn baseline() -> Config {
        Config {
            domain: DomainConfig::Interval { bounds: [0.0, 1.0] },
            grid: GridConfig::default(),
            function: FunctionConfig {
                expr: Some("1".into()),
                family: None,
            },
            space: SpaceConfig {
                p: 2.0,
                lambda: 0.0,
                theta: 1.0,
                alpha: 0.0,
            },
            norm: NormConfig::default(),
            sweeps: SweepsConfig::default(),
            operator: OperatorConfig::default(),
            constants: ConstantsConfig::default(),
            suite: SuiteConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn to_grid(&self) -> Result<Arc<Grid>, String> {
        let domain = self.domain.to_domain()?;
        let dim = self.domain.dim();
        if self.grid.cells.len() != dim {
            return Err(format!(
                "grid.cells: expected {dim} entries for this domain, got {}",
                self.grid.cells.len()
            ));
        }
        let grading: Vec<Grading> = self
            .grid
            .grading
            .iter()
            .map(|g| Grading::new(g.point, g.ratio, g.levels))
            .collect();
        make_grid(&domain, &self.grid.cells, &grading)
            .map(Arc::new)
            .map_err(|e| format!("grid: {e}"))
    }
}

/// Parse and semantically validate a config, reporting schema violations
/// with the path of the offending field.
pub fn load_config(text: &str) -> Result<Config, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: Config =
        serde_path_to_error::deserialize(de).map_err(|e| format!("config: {e}"))?;
    revalidate(&config)?;
    Ok(config)
}

/// Semantic checks, also rerun after command line overrides.
pub(crate) fn revalidate(config: &Config) -> Result<(), String> {
    config.space.to_space()?;
    config.operator.to_kind()?;
    if let Some(format) = &config.output.format {
        if format != "json" && format != "csv" {
            return Err(format!(
                "output.format must be \"json\" or \"csv\", got \"{format}\""
            ));
        }
    }
    match config.norm.kind.as_str() {
        "lebesgue" | "morrey" | "grand_lebesgue" | "grand_grand" => {}
        other => {
            return Err(format!(
                "norm.kind: unknown norm \"{other}\" \
                 (expected lebesgue, morrey, grand_lebesgue, or grand_grand)"
            ))
        }
    }
    match config.suite.name.as_str() {
        "embedding" | "dominance" | "reduction" | "operator-oracle" => {}
        other => {
            return Err(format!(
                "suite.name: unknown suite \"{other}\" \
                 (expected embedding, dominance, reduction, or operator-oracle)"
            ))
        }
    }
    if config.grid.cells.iter().any(|&c| c == 0) {
        return Err("grid.cells entries must be positive".into());
    }
    if !(config.operator.delta_factor > 0.0) || !config.operator.delta_factor.is_finite() {
        return Err(format!(
            "operator.delta_factor must be positive, got {}",
            config.operator.delta_factor
        ));
    }
    for (i, g) in config.grid.grading.iter().enumerate() {
        if !(g.ratio > 0.0 && g.ratio < 1.0) {
            return Err(format!(
                "grid.grading[{i}].ratio must lie in (0, 1), got {}",
                g.ratio
            ));
        }
    }
    Ok(())
}
