//! End-to-end runs driven by a single JSON or TOML config.

use std::fmt;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::galois::{FieldParams, GaloisField};
use crate::maskdyn::{assign_lambda, iterate_to_fixed_point, LambdaArray, LambdaJson, MaskError, StateJson, Strategy};
use crate::scalefn::{
    build_phi_hat, check_limit_condition, check_orthonormality_freq, check_orthonormality_time, check_refinement,
    inverse_transform, mask_from_lambda, refinement_coeffs_with, FreqReport, FreqStepFunction, MaskFunction,
    Normalization, Phase, RefinementCoeffs, RefinementJson, RefinementReport, StepEntry, TimeReport, TimeStepFunction,
};
use crate::validtree::{build_digraph, build_window_tree, generate_tree, MaskDigraph, TreeFile, ValidTree};
use crate::weight::Weight;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Tree,
    Mask,
    Dynamics,
    Scaling,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Tree => "tree",
            Stage::Mask => "mask",
            Stage::Dynamics => "dynamics",
            Stage::Scaling => "scaling",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{stage} stage: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
    /// A verification failure rather than bad input.
    pub check_failure: bool,
}

impl PipelineError {
    fn input(stage: Stage, err: impl fmt::Display) -> Self {
        Self { stage, message: err.to_string(), check_failure: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeSource {
    Generate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_height: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    File { path: PathBuf },
    Inline(TreeFile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Haar,
    Uniform,
    Dirichlet,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaConfig {
    pub strategy: StrategyName,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<LambdaJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Freq,
    Time,
    Limit,
    Refine,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::Freq, Check::Time, Check::Limit, Check::Refine];
}

impl std::str::FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "freq" => Ok(Check::Freq),
            "time" => Ok(Check::Time),
            "limit" => Ok(Check::Limit),
            "refine" => Ok(Check::Refine),
            other => Err(format!("unknown check {other:?} (expected freq, time, limit or refine)")),
        }
    }
}

fn all_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Where to write the report; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub pretty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub p: u32,
    pub s: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction_poly: Option<Vec<u32>>,
    pub tree: TreeSource,
    pub lambda: LambdaConfig,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default = "all_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub output: OutputConfig,
}

impl PipelineConfig {
    /// Parses TOML when the extension is `.toml`, JSON otherwise.
    pub fn from_str_with_ext(text: &str, ext: Option<&str>) -> Result<Self, PipelineError> {
        if ext == Some("toml") {
            toml::from_str(text).map_err(|e| PipelineError::input(Stage::Config, e))
        } else {
            serde_json::from_str(text).map_err(|e| PipelineError::input(Stage::Config, e))
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::input(Stage::Config, format!("{}: {e}", path.display())))?;
        Self::from_str_with_ext(&text, path.extension().and_then(|e| e.to_str()))
    }

    pub fn field_params(&self) -> Result<FieldParams, PipelineError> {
        match &self.reduction_poly {
            Some(poly) => FieldParams::new(self.p, self.s, poly.clone()),
            None => FieldParams::with_default_poly(self.p, self.s),
        }
        .map_err(|e| PipelineError::input(Stage::Config, e))
    }

    /// Fills in the reduction polynomial and sorts the requested checks.
    pub fn resolved(&self) -> Result<Self, PipelineError> {
        let params = self.field_params()?;
        let mut out = self.clone();
        out.reduction_poly = Some(params.reduction_poly);
        out.checks.sort();
        out.checks.dedup();
        Ok(out)
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn resolve_path(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Reads, generates or unpacks the tree, relative paths resolved from `base`.
pub fn resolve_tree(config: &PipelineConfig, base: &Path) -> Result<ValidTree, PipelineError> {
    let params = config.field_params()?;
    let tree_err = |e: crate::validtree::TreeError| PipelineError::input(Stage::Tree, e);
    let file = match &config.tree {
        TreeSource::Generate { target_height, seed } => {
            return generate_tree(params, config.n, *target_height, *seed).map_err(tree_err)
        }
        TreeSource::File { path } => {
            let path = resolve_path(base, path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| PipelineError::input(Stage::Tree, format!("{}: {e}", path.display())))?;
            serde_json::from_str::<TreeFile>(&text).map_err(|e| PipelineError::input(Stage::Tree, e))?
        }
        TreeSource::Inline(file) => file.clone(),
    };
    if file.params != params || file.n != config.n {
        return Err(PipelineError::input(
            Stage::Tree,
            format!("tree is over {:?} with N = {}, config asks for {:?} with N = {}", file.params, file.n, params, config.n),
        ));
    }
    ValidTree::from_file(&file).map_err(tree_err)
}

pub fn resolve_lambda<W: Weight>(
    config: &LambdaConfig,
    graph: &MaskDigraph,
    params: &FieldParams,
    base: &Path,
) -> Result<LambdaArray<W>, PipelineError> {
    let mask_err = |e: MaskError| PipelineError::input(Stage::Mask, e);
    let strategy = match config.strategy {
        StrategyName::Haar => Strategy::Haar,
        StrategyName::Uniform => Strategy::Uniform,
        StrategyName::Dirichlet => Strategy::Dirichlet { seed: config.seed },
        StrategyName::Explicit => {
            let json = match (&config.table, &config.file) {
                (Some(table), _) => table.clone(),
                (None, Some(path)) => {
                    let path = resolve_path(base, path);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| PipelineError::input(Stage::Mask, format!("{}: {e}", path.display())))?;
                    serde_json::from_str(&text).map_err(|e| PipelineError::input(Stage::Mask, e))?
                }
                (None, None) => {
                    return Err(PipelineError::input(Stage::Mask, "explicit strategy needs a table or a file"))
                }
            };
            let (table_params, n, values) = LambdaArray::<W>::dense_from_json(&json).map_err(mask_err)?;
            if &table_params != params || n != graph.n {
                return Err(PipelineError::input(Stage::Mask, "lambda table disagrees with the field or N"));
            }
            Strategy::Explicit(values)
        }
    };
    assign_lambda(graph, params, strategy).map_err(mask_err)
}

/// Everything derived from `λ` once `M` is fixed.
#[derive(Debug, Clone)]
pub struct Scaling<W> {
    pub m0: MaskFunction<W>,
    pub phi_hat: FreqStepFunction<W>,
    pub phi: TimeStepFunction,
    pub beta: RefinementCoeffs,
}

pub fn build_scaling<W: Weight>(lam: &LambdaArray<W>, m: usize, normalization: Normalization) -> Scaling<W> {
    let m0 = mask_from_lambda(lam, Phase::NonnegativeRoot);
    let phi_hat = build_phi_hat(&m0, m);
    let phi = inverse_transform(&phi_hat);
    let beta = refinement_coeffs_with(&m0, normalization);
    Scaling { m0, phi_hat, phi, beta }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckMatrix {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq: Option<FreqReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine: Option<RefinementReport>,
}

impl CheckMatrix {
    pub fn pass(&self) -> bool {
        self.freq.as_ref().is_none_or(|r| r.pass)
            && self.time.as_ref().is_none_or(|r| r.pass)
            && self.limit.unwrap_or(true)
            && self.refine.as_ref().is_none_or(|r| r.pass)
    }

    /// `(check, passed)` for every check that ran.
    pub fn summary(&self) -> Vec<(Check, bool)> {
        let mut out = Vec::new();
        if let Some(r) = &self.freq {
            out.push((Check::Freq, r.pass));
        }
        if let Some(r) = &self.time {
            out.push((Check::Time, r.pass));
        }
        if let Some(r) = self.limit {
            out.push((Check::Limit, r));
        }
        if let Some(r) = &self.refine {
            out.push((Check::Refine, r.pass));
        }
        out
    }
}

pub fn run_checks<W: Weight>(scaling: &Scaling<W>, checks: &[Check]) -> CheckMatrix {
    let mut matrix = CheckMatrix::default();
    for check in checks {
        match check {
            Check::Freq => matrix.freq = Some(check_orthonormality_freq(&scaling.phi_hat)),
            Check::Time => matrix.time = Some(check_orthonormality_time(&scaling.phi)),
            Check::Limit => matrix.limit = Some(check_limit_condition(&scaling.phi_hat)),
            Check::Refine => {
                matrix.refine = Some(check_refinement(&scaling.phi_hat, &scaling.phi, &scaling.m0, &scaling.beta))
            }
        }
    }
    matrix
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub version: String,
    pub config_hash: String,
    pub config: PipelineConfig,
    pub tree: TreeFile,
    /// Height `H` of the tree.
    pub tree_height: usize,
    /// Height of the window tree, `H - N + 1`.
    pub window_height: usize,
    pub bound: usize,
    pub lambda: LambdaJson,
    pub trajectory: Vec<StateJson>,
    /// Smallest `n` with an all-ones state.
    pub fixed_point: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub phi_hat: Vec<StepEntry>,
    pub phi: Vec<StepEntry>,
    pub refinement: RefinementJson,
    pub checks: CheckMatrix,
    pub pass: bool,
}

/// Runs every stage; relative paths in the config resolve against `base`.
pub fn run_pipeline(config: &PipelineConfig, base: &Path) -> Result<PipelineReport, PipelineError> {
    match config.arithmetic {
        Arithmetic::Exact => run_with::<BigRational>(config, base),
        Arithmetic::Float => run_with::<f64>(config, base),
    }
}

fn run_with<W: Weight>(config: &PipelineConfig, base: &Path) -> Result<PipelineReport, PipelineError> {
    let config = config.resolved()?;
    let params = config.field_params()?;
    let tree = resolve_tree(&config, base)?;
    let window_tree = build_window_tree(&tree);
    let graph = build_digraph(&window_tree);
    let lam = resolve_lambda::<W>(&config.lambda, &graph, &params, base)?;
    let bound = window_tree.height - config.n;
    let fixed = iterate_to_fixed_point(&lam, bound).map_err(|e| PipelineError {
        stage: Stage::Dynamics,
        check_failure: matches!(e, MaskError::BoundExceeded { .. }),
        message: e.to_string(),
    })?;
    let m = config.m.unwrap_or(fixed.m);
    let field = GaloisField::new(params).map_err(|e| PipelineError::input(Stage::Scaling, e))?;
    let scaling = build_scaling(&lam, m, config.normalization);
    let checks = run_checks(&scaling, &config.checks);
    Ok(PipelineReport {
        version: VERSION.to_string(),
        config_hash: config.hash(),
        tree: tree.to_file(),
        tree_height: tree.height(),
        window_height: window_tree.height,
        bound,
        lambda: lam.to_json(),
        trajectory: fixed.trajectory.iter().map(|s| s.to_json(&field)).collect(),
        fixed_point: fixed.m,
        m,
        phi_hat: scaling.phi_hat.entries(),
        phi: scaling.phi.entries(),
        refinement: scaling.beta.to_json(),
        pass: checks.pass(),
        checks,
        config,
    })
}
