//! `casesens`: randomization inference and (Γ, Θ) sensitivity analysis for
//! matched case-referent studies, from the command line.
//!
//! Every subcommand is a pure function of its flags, input files, and seed;
//! repeated invocations produce byte-identical output. Errors are emitted
//! as JSON lines on standard error: data problems exit with status 2,
//! statistical preconditions (such as a study with no narrow sets) with
//! status 3.

// Parameter guards are written `!(x >= 1.0)` so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use casesens::bounds::{SensitivityParams, ThetaSense};
use casesens::error::Error;
use casesens::frontier::frontier_curve;
use casesens::inference::{broad_test, combined_test, narrow_test, Alternative, Method, TestKind};
use casesens::matching::{balance_table, optimal_match, CovariateTable};
use casesens::power::{
    design_sensitivity, expected_narrow_sets, favorable_condition_check, power_broad,
    power_narrow, required_sets, Definition, FavorableModel, PowerSpec,
};
use casesens::report::{
    read_matched_csv, write_balance_csv, write_frontier_csv, write_matched_csv,
    write_simulation_csv, AnalysisRecord, PowerRecord,
};
use casesens::sim::{power_sweep, SimConfig};
use casesens::study::{read_study_file, summarize};

#[derive(Parser)]
#[command(
    name = "casesens",
    version,
    about = "Sensitivity analysis for matched case-referent studies with broad and narrow case definitions",
    after_help = "Thread count for parallel sections follows RAYON_NUM_THREADS."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test Fisher's sharp null on a study CSV and print p-value bounds.
    Analyze(AnalyzeArgs),
    /// Print a study summary (set counts, statistics, exposure odds ratio).
    Summary(SummaryArgs),
    /// Largest rejectable Γ per test over a Θ grid, as CSV.
    Frontier(FrontierArgs),
    /// Closed-form power of sensitivity analysis under the favorable model.
    Power(PowerArgs),
    /// Design sensitivities from the closed forms.
    DesignSensitivity(DesignArgs),
    /// Matched sets needed for a target power.
    SampleSize(SampleSizeArgs),
    /// Monte Carlo power estimation, as a Table-style CSV.
    Simulate(SimulateArgs),
    /// Build optimal 1-to-k matched sets from covariate files.
    Match(MatchArgs),
    /// Covariate balance for an existing matched-sets file.
    Balance(BalanceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Broad,
    Narrow,
    Combined,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlternativeArg {
    Greater,
    Less,
    TwoSided,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Normal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SenseArg {
    Upper,
    Symmetric,
}

#[derive(Clone, Copy, ValueEnum)]
enum DefinitionArg {
    Broad,
    Narrow,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
            AlternativeArg::TwoSided => Alternative::TwoSided,
        }
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::Normal => Method::Normal,
        }
    }
}

impl From<SenseArg> for ThetaSense {
    fn from(s: SenseArg) -> Self {
        match s {
            SenseArg::Upper => ThetaSense::UpperOnly,
            SenseArg::Symmetric => ThetaSense::Symmetric,
        }
    }
}

impl From<DefinitionArg> for Definition {
    fn from(d: DefinitionArg) -> Self {
        match d {
            DefinitionArg::Broad => Definition::Broad,
            DefinitionArg::Narrow => Definition::Narrow,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Study CSV with columns set_id, subject_id, exposed, broad_case, narrow_case.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = SenseArg::Upper)]
    theta_sense: SenseArg,
    #[arg(long, value_enum, default_value_t = TestArg::Broad)]
    test: TestArg,
    #[arg(long, value_enum, default_value_t = AlternativeArg::Greater)]
    alternative: AlternativeArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
}

#[derive(Args)]
struct SummaryArgs {
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct FrontierArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    theta_min: f64,
    #[arg(long, default_value_t = 2.0)]
    theta_max: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Exposure prevalence π.
    #[arg(long)]
    pi: f64,
    /// Pr(broad case | exposed).
    #[arg(long)]
    bt: f64,
    /// Pr(broad case | unexposed).
    #[arg(long)]
    bc: f64,
    /// Pr(narrow | broad case, exposed).
    #[arg(long, default_value_t = 0.5)]
    eta_t: f64,
    /// Pr(narrow | broad case, unexposed).
    #[arg(long, default_value_t = 0.5)]
    eta_c: f64,
    /// Matched-set size (case plus referents).
    #[arg(long = "J", alias = "j", default_value_t = 6)]
    set_size: u32,
}

impl ModelArgs {
    fn build(&self) -> Result<FavorableModel, Error> {
        FavorableModel::new(self.pi, self.bt, self.bc, self.eta_t, self.eta_c, self.set_size)
    }
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of broad-case matched sets I.
    #[arg(long = "sets", alias = "i")]
    n_sets: u32,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    bt: f64,
    #[arg(long)]
    bc: f64,
    #[arg(long)]
    eta_t: Option<f64>,
    #[arg(long)]
    eta_c: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct SampleSizeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Target power in (0, 1).
    #[arg(long)]
    target: f64,
    #[arg(long, value_enum, default_value_t = DefinitionArg::Broad)]
    definition: DefinitionArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "sets", alias = "i")]
    n_sets: u32,
    /// One or more Γ values (comma separated); rows sweep Γ × Θ.
    #[arg(long, value_delimiter = ',', required = true)]
    gamma: Vec<f64>,
    /// One or more Θ values (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 3000)]
    reps: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Rejection rule inside the simulator; the normal rule is the one the
    /// power formulas describe.
    #[arg(long, value_enum, default_value_t = MethodArg::Normal)]
    method: MethodArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Cases CSV (with --referents), sharing columns with the referent file.
    #[arg(long, requires = "referents", conflicts_with = "data")]
    cases: Option<PathBuf>,
    /// Referents CSV (with --cases).
    #[arg(long, requires = "cases")]
    referents: Option<PathBuf>,
    /// Single CSV holding both groups; requires --group-col.
    #[arg(long, requires = "group_col")]
    data: Option<PathBuf>,
    /// Column that distinguishes cases from referents in --data.
    #[arg(long)]
    group_col: Option<String>,
    /// Value of --group-col marking a case.
    #[arg(long, default_value = "case")]
    case_value: String,
    /// Subject id column.
    #[arg(long, default_value = "id")]
    id_col: String,
    /// Categorical columns that must match exactly (comma separated).
    #[arg(long, value_delimiter = ',')]
    exact: Vec<String>,
    /// Numeric covariate columns for the robust Mahalanobis distance.
    #[arg(long, value_delimiter = ',', required = true)]
    covariates: Vec<String>,
}

impl TableArgs {
    fn load(&self) -> Result<CovariateTable, Error> {
        if let (Some(cases), Some(referents)) = (&self.cases, &self.referents) {
            CovariateTable::from_csv_pair(
                File::open(cases)?,
                File::open(referents)?,
                &self.id_col,
                &self.exact,
                &self.covariates,
            )
        } else if let (Some(data), Some(group_col)) = (&self.data, &self.group_col) {
            CovariateTable::from_grouped_csv(
                File::open(data)?,
                &self.id_col,
                group_col,
                &self.case_value,
                &self.exact,
                &self.covariates,
            )
        } else {
            Err(Error::InvalidMatchInput(
                "supply either --cases with --referents, or --data with --group-col".into(),
            ))
        }
    }
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    table: TableArgs,
    /// Referents per case.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Matched-sets CSV destination (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a balance table here.
    #[arg(long)]
    balance_output: Option<PathBuf>,
}

#[derive(Args)]
struct BalanceArgs {
    #[command(flatten)]
    table: TableArgs,
    /// Matched-sets CSV produced by the match subcommand.
    #[arg(long)]
    matched: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn error_code(e: &Error) -> &'static str {
    match e {
        Error::MissingCase { .. } => "MissingCase",
        Error::MultipleCases { .. } => "MultipleCases",
        Error::NarrowReferent { .. } => "NarrowReferent",
        Error::BadBinary { .. } => "BadBinary",
        Error::SetTooSmall { .. } => "SetTooSmall",
        Error::BadSetId { .. } => "BadSetId",
        Error::EmptyInput => "EmptyInput",
        Error::EmptyStudy => "EmptyStudy",
        Error::InvalidGamma(_) => "InvalidGamma",
        Error::InvalidTheta(_) => "InvalidTheta",
        Error::InvalidCount { .. } => "InvalidCount",
        Error::InvalidProbability { .. } => "InvalidProbability",
        Error::InvalidModel(_) => "InvalidModel",
        Error::NoNarrowSets => "NoNarrowSets",
        Error::NoRejectionAtOne { .. } => "NoRejectionAtOne",
        Error::NotBracketed { .. } => "NotBracketed",
        Error::Unattainable { .. } => "Unattainable",
        Error::InvalidMatchInput(_) => "InvalidMatchInput",
        Error::Csv(_) => "Csv",
        Error::Io(_) => "Io",
    }
}

fn emit_error(e: &Error) -> ExitCode {
    let line = serde_json::json!({ "error": error_code(e), "message": e.to_string() });
    eprintln!("{line}");
    if e.is_data_error() {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

/// Opens the output sink: a file when requested, stdout otherwise.
fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value).map_err(io::Error::other)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn run_analyze(args: &AnalyzeArgs) -> Result<(), Error> {
    let study = read_study_file(&args.data)?;
    let params = SensitivityParams::new(args.gamma, args.theta, args.theta_sense.into())?;
    let alternative: Alternative = args.alternative.into();
    let method: Method = args.method.into();
    let record = match args.test {
        TestArg::Broad => {
            let b = broad_test(&study, args.gamma, alternative, method)?;
            AnalysisRecord::single(TestKind::Broad, args.gamma, args.theta, params.theta_sense, alternative, &b)
        }
        TestArg::Narrow => {
            let b = narrow_test(&study, &params, alternative, method)?;
            AnalysisRecord::single(TestKind::Narrow, args.gamma, args.theta, params.theta_sense, alternative, &b)
        }
        TestArg::Combined => {
            let c = combined_test(&study, &params, alternative, method)?;
            AnalysisRecord::combined(args.gamma, args.theta, params.theta_sense, alternative, &c, study.n_sets())
        }
    };
    print_json(&record)
}

fn run_summary(args: &SummaryArgs) -> Result<(), Error> {
    let study = read_study_file(&args.data)?;
    print_json(&summarize(&study))
}

fn run_frontier(args: &FrontierArgs) -> Result<(), Error> {
    let study = read_study_file(&args.data)?;
    let points = frontier_curve(
        &study,
        args.alpha,
        args.theta_min,
        args.theta_max,
        args.step,
        args.method.into(),
    )?;
    write_frontier_csv(&points, sink(&args.output)?)
}

fn run_power(args: &PowerArgs) -> Result<(), Error> {
    let model = args.model.build()?;
    let spec = PowerSpec::new(model, args.n_sets, args.gamma, args.theta, args.alpha)?;
    let record = PowerRecord {
        model,
        gamma: args.gamma,
        theta: args.theta,
        alpha: args.alpha,
        n_sets: args.n_sets,
        power_broad: power_broad(&spec),
        power_narrow: power_narrow(&spec),
        design_gamma_broad: design_sensitivity(&model, None, Definition::Broad)?,
        design_gamma_narrow: design_sensitivity(&model, Some(args.theta), Definition::Narrow)?,
        expected_narrow_sets: expected_narrow_sets(&model, args.n_sets),
        favorable_condition: favorable_condition_check(&model, args.theta),
    };
    print_json(&record)
}

#[derive(serde::Serialize)]
struct DesignRecord {
    design_gamma_broad: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    design_gamma_narrow: Option<f64>,
}

fn run_design(args: &DesignArgs) -> Result<(), Error> {
    for (name, v) in [("bt", args.bt), ("bc", args.bc)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidProbability { name: if name == "bt" { "b_t" } else { "b_c" }, range: "(0, 1)", value: v });
        }
    }
    let broad = (args.bt / (1.0 - args.bt)) / (args.bc / (1.0 - args.bc));
    let narrow = match (args.eta_t, args.eta_c, args.theta) {
        (Some(et), Some(ec), theta) => {
            let theta = theta.unwrap_or(1.0);
            if !(theta >= 1.0) {
                return Err(Error::InvalidTheta(theta));
            }
            if !(et > 0.0 && et < 1.0) || !(ec > 0.0 && ec < 1.0) {
                return Err(Error::InvalidModel("eta values must lie in (0, 1)".into()));
            }
            Some(broad * (et / ec) / theta)
        }
        (None, None, None) => None,
        _ => {
            return Err(Error::InvalidModel(
                "narrow design sensitivity needs --eta-t and --eta-c (and optionally --theta)".into(),
            ))
        }
    };
    print_json(&DesignRecord { design_gamma_broad: broad, design_gamma_narrow: narrow })
}

#[derive(serde::Serialize)]
struct SampleSizeRecord {
    definition: Definition,
    gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    alpha: f64,
    target_power: f64,
    required_sets: u64,
}

fn run_sample_size(args: &SampleSizeArgs) -> Result<(), Error> {
    let model = args.model.build()?;
    let definition: Definition = args.definition.into();
    let n = required_sets(&model, args.gamma, args.theta, args.alpha, args.target, definition)?;
    print_json(&SampleSizeRecord {
        definition,
        gamma: args.gamma,
        theta: args.theta,
        alpha: args.alpha,
        target_power: args.target,
        required_sets: n,
    })
}

fn run_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let model = args.model.build()?;
    let mut configs = Vec::new();
    for &gamma in &args.gamma {
        for &theta in &args.theta {
            configs.push(SimConfig {
                model,
                n_sets: args.n_sets,
                reps: args.reps,
                seed: args.seed,
                alpha: args.alpha,
                gamma,
                theta,
                method: args.method.into(),
            });
        }
    }
    let results = power_sweep(&configs)?;
    let rows: Vec<_> = configs.into_iter().zip(results).collect();
    write_simulation_csv(&rows, sink(&args.output)?)
}

fn run_match(args: &MatchArgs) -> Result<(), Error> {
    let table = args.table.load()?;
    let result = optimal_match(&table, args.k)?;
    if !result.unmatched_cases.is_empty() {
        let note = serde_json::json!({
            "warning": "InfeasibleStratum",
            "unmatched_cases": result.unmatched_cases,
        });
        eprintln!("{note}");
    }
    write_matched_csv(&result, sink(&args.output)?)?;
    if let Some(balance_path) = &args.balance_output {
        let rows = balance_table(&table, &result)?;
        write_balance_csv(&rows, File::create(balance_path)?)?;
    }
    Ok(())
}

fn run_balance(args: &BalanceArgs) -> Result<(), Error> {
    let table = args.table.load()?;
    let result = read_matched_csv(File::open(&args.matched)?)?;
    let rows = balance_table(&table, &result)?;
    write_balance_csv(&rows, sink(&args.output)?)
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Summary(a) => run_summary(a),
        Command::Frontier(a) => run_frontier(a),
        Command::Power(a) => run_power(a),
        Command::DesignSensitivity(a) => run_design(a),
        Command::SampleSize(a) => run_sample_size(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Match(a) => run_match(a),
        Command::Balance(a) => run_balance(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => emit_error(&e),
    }
}
