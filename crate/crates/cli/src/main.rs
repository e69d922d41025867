use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stepmra::maskdyn::{assign_lambda, iterate_to_fixed_point, LambdaArray, LambdaJson, MaskError, Strategy};
use stepmra::pipeline::{build_scaling, run_checks, run_pipeline, Check, PipelineConfig};
use stepmra::scalefn::{Normalization, StepEntry};
use stepmra::validtree::{build_digraph, build_window_tree, generate_tree, validate_tree, TreeError, TreeFile, ValidTree};
use stepmra::{BigRational, FieldParams, GaloisField, Weight};

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "stepmra", version, about = "Orthogonal step scaling functions on local fields")]
struct Cli {
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or validate N-valid trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Assign a λ-array on the mask digraph of a tree.
    #[command(subcommand)]
    Mask(MaskCmd),
    /// Iterate the dynamical system to its all-ones fixed point.
    #[command(subcommand)]
    Dyn(DynCmd),
    /// Build or verify the scaling function of a λ-array.
    #[command(subcommand)]
    Scaling(ScalingCmd),
    /// Run every stage from a JSON or TOML config.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
    /// Write a step function table from a report as JSON or CSV.
    Export(ExportArgs),
}

#[derive(Args)]
struct FieldArgs {
    #[arg(short)]
    p: u32,
    #[arg(short, default_value_t = 1)]
    s: usize,
    #[arg(short = 'N')]
    n: usize,
    /// Reduction polynomial coefficients c_0,...,c_{s-1}.
    #[arg(long, value_delimiter = ',')]
    poly: Option<Vec<u32>>,
}

impl FieldArgs {
    fn params(&self) -> Result<FieldParams> {
        Ok(match &self.poly {
            Some(poly) => FieldParams::new(self.p, self.s, poly.clone())?,
            None => FieldParams::with_default_poly(self.p, self.s)?,
        })
    }
}

#[derive(Subcommand)]
enum TreeCmd {
    Gen {
        #[command(flatten)]
        field: FieldArgs,
        /// Tree height H; any height when omitted.
        #[arg(long)]
        height: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Validate { tree: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Haar,
    Uniform,
    Dirichlet,
    Explicit,
}

#[derive(Args)]
struct Arith {
    /// Use f64 instead of exact rationals.
    #[arg(long)]
    float: bool,
}

#[derive(Subcommand)]
enum MaskCmd {
    Assign {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// λ table for the explicit strategy.
        #[arg(long)]
        table: Option<PathBuf>,
        #[command(flatten)]
        arith: Arith,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DynCmd {
    Iterate {
        #[arg(long)]
        lambda: PathBuf,
        /// Step bound; defaults to H̃ - N with --tree, else p^{sN}.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[command(flatten)]
        arith: Arith,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    FieldOrder,
    Prime,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::FieldOrder => Normalization::FieldOrder,
            NormArg::Prime => Normalization::Prime,
        }
    }
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long)]
    lambda: PathBuf,
    /// Resolution M; defaults to the fixed-point index.
    #[arg(short = 'M', long = "M")]
    m: Option<usize>,
    #[arg(long, value_enum, default_value = "field-order")]
    normalization: NormArg,
    #[command(flatten)]
    arith: Arith,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ScalingCmd {
    Build(ScalingArgs),
    Verify {
        #[command(flatten)]
        args: ScalingArgs,
        #[arg(long, value_delimiter = ',', default_value = "freq,time,limit,refine")]
        checks: Vec<Check>,
    },
}

#[derive(Subcommand)]
enum PipelineCmd {
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Phi,
    PhiHat,
}

#[derive(Args)]
struct ExportArgs {
    /// A pipeline report or `scaling build` output.
    report: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, value_enum, default_value = "phi")]
    table: Table,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn emit<T: Serialize>(value: &T, pretty: bool, output: Option<&Path>) -> Result<()> {
    let mut text = if pretty { serde_json::to_string_pretty(value)? } else { serde_json::to_string(value)? };
    text.push('\n');
    write_text(&text, output)
}

fn write_text(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: &Cli) -> Result<u8> {
    let pretty = cli.pretty;
    match &cli.command {
        Command::Tree(TreeCmd::Gen { field, height, seed, output }) => {
            match generate_tree(field.params()?, field.n, *height, *seed) {
                Ok(tree) => {
                    emit(&tree.to_file(), pretty, output.as_deref())?;
                    Ok(EXIT_PASS)
                }
                Err(err @ TreeError::NoSolution { .. }) => {
                    eprintln!("no solution: {err}");
                    Ok(EXIT_FAIL)
                }
                Err(err) => Err(err.into()),
            }
        }
        Command::Tree(TreeCmd::Validate { tree }) => {
            let file: TreeFile = read_json(tree)?;
            let report = validate_tree(&file)?;
            emit(&report, pretty, None)?;
            Ok(if report.valid { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Mask(MaskCmd::Assign { tree, strategy, seed, table, arith, output }) => {
            let file: TreeFile = read_json(tree)?;
            let json = if arith.float {
                assign::<f64>(&file, *strategy, *seed, table.as_deref())?
            } else {
                assign::<BigRational>(&file, *strategy, *seed, table.as_deref())?
            };
            emit(&json, pretty, output.as_deref())?;
            Ok(EXIT_PASS)
        }
        Command::Dyn(DynCmd::Iterate { lambda, bound, tree, arith, output }) => {
            let json: LambdaJson = read_json(lambda)?;
            let bound = match (bound, tree) {
                (Some(b), _) => *b,
                (None, Some(tree)) => {
                    let file: TreeFile = read_json(tree)?;
                    build_window_tree(&ValidTree::from_file(&file)?).height - file.n
                }
                (None, None) => json.params.order().pow(json.n as u32),
            };
            if arith.float {
                iterate::<f64>(&json, bound, pretty, output.as_deref())
            } else {
                iterate::<BigRational>(&json, bound, pretty, output.as_deref())
            }
        }
        Command::Scaling(ScalingCmd::Build(args)) => {
            if args.arith.float {
                scaling::<f64>(args, None, pretty)
            } else {
                scaling::<BigRational>(args, None, pretty)
            }
        }
        Command::Scaling(ScalingCmd::Verify { args, checks }) => {
            if args.arith.float {
                scaling::<f64>(args, Some(checks), pretty)
            } else {
                scaling::<BigRational>(args, Some(checks), pretty)
            }
        }
        Command::Pipeline(PipelineCmd::Run { config, output }) => {
            let cfg = PipelineConfig::from_path(config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            match run_pipeline(&cfg, base) {
                Ok(report) => {
                    let output = output.as_deref().or(cfg.output.report.as_deref());
                    let output = output.map(|p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) });
                    emit(&report, pretty || cfg.output.pretty, output.as_deref())?;
                    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    Ok(if err.check_failure { EXIT_FAIL } else { EXIT_INPUT })
                }
            }
        }
        Command::Export(args) => export(args),
    }
}

fn assign<W: Weight>(file: &TreeFile, strategy: StrategyArg, seed: u64, table: Option<&Path>) -> Result<LambdaJson> {
    let tree = ValidTree::from_file(file)?;
    let graph = build_digraph(&build_window_tree(&tree));
    let strategy = match strategy {
        StrategyArg::Haar => Strategy::Haar,
        StrategyArg::Uniform => Strategy::Uniform,
        StrategyArg::Dirichlet => Strategy::Dirichlet { seed },
        StrategyArg::Explicit => {
            let Some(path) = table else { bail!("--table is required for the explicit strategy") };
            let json: LambdaJson = read_json(path)?;
            let (params, n, values) = LambdaArray::<W>::dense_from_json(&json)?;
            if params != file.params || n != file.n {
                bail!("λ table disagrees with the tree's field or N");
            }
            Strategy::Explicit(values)
        }
    };
    Ok(assign_lambda::<W>(&graph, &file.params, strategy)?.to_json())
}

#[derive(Serialize)]
struct Trajectory {
    #[serde(rename = "M")]
    m: usize,
    bound: usize,
    trajectory: Vec<stepmra::maskdyn::StateJson>,
}

fn iterate<W: Weight>(json: &LambdaJson, bound: usize, pretty: bool, output: Option<&Path>) -> Result<u8> {
    let lam = LambdaArray::<W>::from_json_unchecked(json)?;
    let field = GaloisField::new(lam.params().clone())?;
    match iterate_to_fixed_point(&lam, bound) {
        Ok(fixed) => {
            let trajectory = fixed.trajectory.iter().map(|s| s.to_json(&field)).collect();
            emit(&Trajectory { m: fixed.m, bound, trajectory }, pretty, output)?;
            Ok(EXIT_PASS)
        }
        Err(err @ MaskError::BoundExceeded { .. }) => {
            eprintln!("error: {err}");
            Ok(EXIT_FAIL)
        }
        Err(err) => Err(err.into()),
    }
}

#[derive(Serialize)]
struct ScalingOutput {
    #[serde(rename = "M")]
    m: usize,
    phi_hat: Vec<StepEntry>,
    phi: Vec<StepEntry>,
    refinement: stepmra::scalefn::RefinementJson,
}

fn scaling<W: Weight>(args: &ScalingArgs, checks: Option<&[Check]>, pretty: bool) -> Result<u8> {
    let json: LambdaJson = read_json(&args.lambda)?;
    let lam = LambdaArray::<W>::from_json_unchecked(&json)?;
    let m = match args.m {
        Some(m) => m,
        None => iterate_to_fixed_point(&lam, lam.q().pow(lam.n() as u32))?.m,
    };
    let sc = build_scaling(&lam, m, args.normalization.into());
    match checks {
        None => {
            let out = ScalingOutput {
                m,
                phi_hat: sc.phi_hat.entries(),
                phi: sc.phi.entries(),
                refinement: sc.beta.to_json(),
            };
            emit(&out, pretty, args.output.as_deref())?;
            Ok(EXIT_PASS)
        }
        Some(checks) => {
            let matrix = run_checks(&sc, checks);
            emit(&matrix, pretty, args.output.as_deref())?;
            Ok(if matrix.pass() { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

fn export(args: &ExportArgs) -> Result<u8> {
    let report: serde_json::Value = read_json(&args.report)?;
    let key = match args.table {
        Table::Phi => "phi",
        Table::PhiHat => "phi_hat",
    };
    let table = report.get(key).with_context(|| format!("no {key} table in {}", args.report.display()))?;
    let entries: Vec<StepEntry> = serde_json::from_value(table.clone())?;
    match args.format {
        Format::Json => emit(&entries, false, args.output.as_deref())?,
        Format::Csv => write_text(&to_csv(&entries)?, args.output.as_deref())?,
    }
    Ok(EXIT_PASS)
}

/// One row per window: the digits flattened, then `re`, `im`.
fn to_csv(entries: &[StepEntry]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if let Some(first) = entries.first() {
        let mut header: Vec<String> = Vec::new();
        for (pos, digits) in first.window.iter().enumerate() {
            header.extend((0..digits.len()).map(|d| format!("a{pos}_{d}")));
        }
        header.extend(["re".to_string(), "im".to_string()]);
        writer.write_record(&header)?;
    }
    for e in entries {
        let mut row: Vec<String> = e.window.iter().flatten().map(u32::to_string).collect();
        row.push(e.re.to_string());
        row.push(e.im.to_string());
        writer.write_record(&row)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}
