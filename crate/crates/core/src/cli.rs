// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end: `detect`, `simulate` and `bench`.
//!
//! Exit status is 0 on success, 1 for unreadable or malformed input and 2 for
//! an invalid configuration.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::fpop::{run, IntervalStats, OnlineState, Segmentation};
use crate::loss::{
    biweight_k_diagnostic, min_segment_length, resolve_config, KDiagnostic, LossKind, LossSpec,
    Penalty, ResolvedConfig, Threshold, Tuning, DIAGNOSTIC_WINDOW,
};
use crate::simbench::{
    bundled, runtime_scaling, simulate, write_tsv, ChangeRegime, Method, Noise, ResultRow,
    ScalingReport, ScenarioConfig, BUNDLED_SCENARIOS, RNG_ALGORITHM,
};

#[derive(Debug, Parser)]
#[command(
    name = "rfpop",
    version,
    about = "Robust changepoint detection by functional pruning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a series read from a file or stdin.
    Detect(DetectArgs),
    /// Accuracy study over replicated synthetic scenarios.
    Simulate(SimulateArgs),
    /// Runtime scaling over a grid of series lengths.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Loss: l2, l1, huber, biweight or quantile
    #[arg(long, default_value = "biweight")]
    pub loss: LossKind,
    /// Absolute loss threshold K.
    #[arg(long, conflicts_with = "k_sigma")]
    pub k: Option<f64>,
    /// K as a multiple of the estimated noise scale.
    #[arg(long)]
    pub k_sigma: Option<f64>,
    /// Absolute penalty per changepoint.
    #[arg(long, conflicts_with = "beta_multiplier")]
    pub beta: Option<f64>,
    /// Penalty as a multiple of the information-criterion default.
    #[arg(long)]
    pub beta_multiplier: Option<f64>,
    /// Quantile level u in (0, 1) for the quantile loss.
    #[arg(long)]
    pub quantile: Option<f64>,
    /// Emit one record per observation as it is read.
    #[arg(long)]
    pub online: bool,
    /// Input file, one value per line; stdin when absent or `-`.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Output file; stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// 1-based column to read from delimited input.
    #[arg(long)]
    pub column: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// A bundled scenario name or a JSON scenario file.
    #[arg(long, default_value = "bundled-2048")]
    pub scenario: String,
    /// Student-t noise with this many degrees of freedom, keeping the
    /// scenario's noise scale.
    #[arg(long)]
    pub df: Option<f64>,
    /// Number of replicates per method
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    /// Comma-separated methods: l2, l1, huber, biweight, quantile, cusum.
    #[arg(long, value_delimiter = ',', default_value = "biweight,l2")]
    pub methods: Vec<Method>,
    /// Base RNG seed; replicate r uses seed + r
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Loss: l2, l1, huber, biweight or quantile
    #[arg(long, default_value = "biweight")]
    pub loss: LossKind,
    /// `A..B` doubles from A up to B; otherwise a comma-separated list.
    #[arg(long, default_value = "2000..128000")]
    pub n: String,
    /// `none` or `everyN`.
    #[arg(long, default_value = "every100")]
    pub changes: ChangeRegime,
    /// RNG seed for the generated series
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// A failure mapped to an exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input: {0}")]
    Input(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::TooShort { .. } | Error::Empty => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Parses `std::env::args` and runs; the binary's entry point.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rfpop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Detect(args) => detect(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) if p != Path::new("-") => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_input(path: Option<&Path>) -> Result<Box<dyn BufRead>, CliError> {
    Ok(match path {
        Some(p) if p != Path::new("-") => {
            Box::new(BufReader::new(File::open(p).map_err(|e| {
                CliError::Input(format!("cannot open {}: {e}", p.display()))
            })?))
        }
        _ => Box::new(BufReader::new(io::stdin())),
    })
}

/// Line-by-line reader of one numeric column. A non-numeric first line is
/// taken as a header.
#[derive(Debug)]
pub struct ValueParser {
    column: Option<usize>,
    line_no: usize,
}

impl ValueParser {
    pub fn new(column: Option<usize>) -> Result<Self, CliError> {
        if column == Some(0) {
            return Err(CliError::Config("--column is 1-based".into()));
        }
        Ok(Self { column, line_no: 0 })
    }

    /// `Ok(None)` for a skipped header line.
    pub fn parse_line(&mut self, line: &str) -> Result<Option<f64>, CliError> {
        self.line_no += 1;
        let line = line.trim();
        let err = |msg: String| CliError::Input(format!("line {}: {msg}", self.line_no));
        if line.is_empty() {
            return Err(err("blank line".into()));
        }
        let fields: Vec<&str> = if line.contains(',') {
            line.split(',').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        let field = match self.column {
            None if fields.len() > 1 => {
                return Err(err(format!(
                    "{} columns found; choose one with --column",
                    fields.len()
                )))
            }
            None => fields[0],
            Some(c) => *fields
                .get(c - 1)
                .ok_or_else(|| err(format!("no column {c} in {} fields", fields.len())))?,
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            Ok(v) => Err(err(format!("non-finite value {v}"))),
            Err(_) if self.line_no == 1 => Ok(None),
            Err(_) => Err(err(format!("not a number: '{field}'"))),
        }
    }

    pub fn read_all<R: Read>(&mut self, reader: R) -> Result<Vec<f64>, CliError> {
        let mut out = Vec::new();
        for line in BufReader::new(reader).lines() {
            if let Some(v) = self.parse_line(&line?)? {
                out.push(v);
            }
        }
        if out.is_empty() {
            return Err(CliError::Input("no observations".into()));
        }
        Ok(out)
    }
}

/// Everything needed to reproduce a detection, plus its result.
#[derive(Debug, Serialize)]
pub struct DetectReport {
    pub n: usize,
    pub loss: LossKind,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub quantile: Option<f64>,
    /// Absent only for an exactly constant series, where σ̂ = 0 leaves the
    /// relative defaults undefined.
    pub beta: Option<f64>,
    pub sigma_hat: Option<f64>,
    pub changepoints: Vec<usize>,
    pub segment_means: Vec<f64>,
    pub total_cost: f64,
    pub min_segment_length: Option<usize>,
    pub max_intervals: usize,
    pub k_diagnostic: Option<KDiagnostic>,
    pub warnings: Vec<String>,
}

impl DetectReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        data_len: usize,
        spec: &LossSpec,
        beta: f64,
        sigma_hat: Option<f64>,
        seg: Segmentation,
        stats: IntervalStats,
        k_diagnostic: Option<KDiagnostic>,
        warnings: Vec<String>,
    ) -> Self {
        Self {
            n: data_len,
            loss: spec.kind(),
            k: spec.threshold(),
            quantile: spec.quantile(),
            beta: Some(beta),
            sigma_hat,
            changepoints: seg.changepoints,
            segment_means: seg.segment_means,
            total_cost: seg.total_cost,
            min_segment_length: min_segment_length(spec, beta).as_option(),
            max_intervals: stats.max,
            k_diagnostic,
            warnings,
        }
    }

    fn write_tsv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        writeln!(out, "# n\t{}", self.n)?;
        writeln!(out, "# loss\t{}", self.loss)?;
        writeln!(out, "# K\t{}", opt(self.k))?;
        writeln!(out, "# quantile\t{}", opt(self.quantile))?;
        writeln!(out, "# beta\t{}", opt(self.beta))?;
        writeln!(out, "# sigma_hat\t{}", opt(self.sigma_hat))?;
        writeln!(out, "# total_cost\t{}", self.total_cost)?;
        writeln!(
            out,
            "# min_segment_length\t{}",
            self.min_segment_length
                .map_or_else(|| "NA".into(), |m| m.to_string())
        )?;
        writeln!(out, "# max_intervals\t{}", self.max_intervals)?;
        for w in &self.warnings {
            writeln!(out, "# warning\t{w}")?;
        }
        writeln!(out, "segment\tstart\tend\tmean")?;
        let mut start = 1;
        for (i, mean) in self.segment_means.iter().enumerate() {
            let end = self.changepoints.get(i).copied().unwrap_or(self.n);
            writeln!(out, "{}\t{start}\t{end}\t{mean}", i + 1)?;
            start = end + 1;
        }
        Ok(())
    }
}

/// Streaming output line.
#[derive(Debug, Serialize)]
struct StepRecord {
    t: usize,
    most_recent_cp: usize,
    #[serde(rename = "Q_t")]
    q_t: f64,
}

fn tuning(args: &DetectArgs) -> Tuning {
    Tuning {
        threshold: args
            .k
            .map(Threshold::Absolute)
            .or(args.k_sigma.map(Threshold::SigmaMultiple)),
        penalty: args
            .beta
            .map(Penalty::Absolute)
            .or(args.beta_multiplier.map(Penalty::Multiplier)),
        quantile: args.quantile,
    }
}

/// True when K and β are known before any data arrive.
fn needs_scale(args: &DetectArgs) -> bool {
    args.beta.is_none() || (args.loss.has_threshold() && args.k.is_none())
}

fn k_diagnostic(spec: &LossSpec, data: &[f64]) -> Option<KDiagnostic> {
    match spec {
        LossSpec::Biweight { k } if data.len() >= DIAGNOSTIC_WINDOW => {
            biweight_k_diagnostic(data, *k).ok()
        }
        _ => None,
    }
}

fn warn_if_small_k(diag: Option<KDiagnostic>, warnings: &mut Vec<String>) {
    if let Some(d) = diag.filter(|d| !d.sufficient) {
        warnings.push(format!(
            "K may be too small for consistent estimation (diagnostic {:.4})",
            d.stat
        ));
    }
}

pub fn detect(args: &DetectArgs) -> Result<(), CliError> {
    let mut parser = ValueParser::new(args.column)?;
    let tuning = tuning(args);
    let input = open_input(args.input.as_deref())?;
    let mut out = open_output(args.output.as_deref())?;
    if args.online && !needs_scale(args) {
        // K and β are absolute: resolve against an empty series.
        let cfg = resolve_config(args.loss, &[], &tuning)?;
        return detect_online(input, cfg, &mut parser, args.format, &mut out);
    }
    let data = parser.read_all(input)?;
    if needs_scale(args) && data.iter().all(|&y| y == data[0]) {
        return constant_series(args, &data, &mut out);
    }
    let cfg = resolve_config(args.loss, &data, &tuning)?;
    if args.online {
        let replay = data.iter().map(|v| Ok(Some(*v)));
        return emit_online(replay, &data, cfg, args.format, &mut out);
    }
    let (seg, stats) = run(&data, &cfg.spec, cfg.penalty.beta)?;
    let diag = k_diagnostic(&cfg.spec, &data);
    let mut warnings = Vec::new();
    if cfg.penalty.beta == 0.0 {
        warnings.push(crate::fpop::Warning::ZeroPenalty.to_string());
    }
    warn_if_small_k(diag, &mut warnings);
    let report = DetectReport::new(
        data.len(),
        &cfg.spec,
        cfg.penalty.beta,
        cfg.penalty.sigma_hat,
        seg,
        stats,
        diag,
        warnings,
    );
    match args.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Tsv => report.write_tsv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

/// A constant series has no changepoint under any K and β > 0, so it is
/// answered even though σ̂ = 0 leaves the defaults undefined.
fn constant_series<W: Write>(args: &DetectArgs, data: &[f64], out: &mut W) -> Result<(), CliError> {
    let report = DetectReport {
        n: data.len(),
        loss: args.loss,
        k: args.k,
        quantile: args.quantile.or((args.loss == LossKind::Quantile).then_some(0.5)),
        beta: args.beta,
        sigma_hat: Some(0.0),
        changepoints: Vec::new(),
        segment_means: vec![data[0]],
        total_cost: args.beta.unwrap_or(0.0),
        min_segment_length: None,
        max_intervals: 1,
        k_diagnostic: None,
        warnings: vec![
            "constant series: sigma_hat = 0, so relative K and beta are undefined; total_cost excludes an undefined penalty".into(),
        ],
    };
    match args.format {
        Format::Json if args.online => {
            for t in 1..=data.len() {
                let rec = StepRecord {
                    t,
                    most_recent_cp: 0,
                    q_t: report.total_cost,
                };
                serde_json::to_writer(&mut *out, &rec).map_err(io::Error::from)?;
                writeln!(out)?;
            }
            serde_json::to_writer(&mut *out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Tsv => {
            if args.online {
                writeln!(out, "t\tmost_recent_cp\tQ_t")?;
                for t in 1..=data.len() {
                    writeln!(out, "{t}\t0\t{}", report.total_cost)?;
                }
            }
            report.write_tsv(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn detect_online<W: Write>(
    input: Box<dyn BufRead>,
    cfg: ResolvedConfig,
    parser: &mut ValueParser,
    format: Format,
    out: &mut W,
) -> Result<(), CliError> {
    let values = input.lines().map(|line| parser.parse_line(&line?));
    emit_online(values, &[], cfg, format, out)
}

/// Feeds `values` one at a time, flushing a record after each. `known` is the
/// buffered series when σ̂ had to be estimated first.
fn emit_online<I, W>(
    values: I,
    known: &[f64],
    cfg: ResolvedConfig,
    format: Format,
    out: &mut W,
) -> Result<(), CliError>
where
    I: Iterator<Item = Result<Option<f64>, CliError>>,
    W: Write,
{
    let mut state = OnlineState::init(cfg.spec, cfg.penalty.beta)?;
    let mut warnings: Vec<String> = state.warnings().iter().map(|w| w.to_string()).collect();
    if format == Format::Tsv {
        writeln!(out, "t\tmost_recent_cp\tQ_t")?;
        out.flush()?;
    }
    for value in values {
        let Some(y) = value? else { continue };
        let cp = state.step(y)?;
        let rec = StepRecord {
            t: state.t(),
            most_recent_cp: cp.most_recent_cp,
            q_t: cp.cost,
        };
        match format {
            Format::Json => {
                serde_json::to_writer(&mut *out, &rec).map_err(io::Error::from)?;
                writeln!(out)?;
            }
            Format::Tsv => writeln!(out, "{}\t{}\t{}", rec.t, rec.most_recent_cp, rec.q_t)?,
        }
        out.flush()?;
    }
    if state.t() == 0 {
        return Err(CliError::Input("no observations".into()));
    }
    let seg = state.backtrack()?;
    let diag = if known.is_empty() {
        None
    } else {
        k_diagnostic(&cfg.spec, known)
    };
    warn_if_small_k(diag, &mut warnings);
    let report = DetectReport::new(
        state.t(),
        &cfg.spec,
        cfg.penalty.beta,
        cfg.penalty.sigma_hat,
        seg,
        state.interval_stats(),
        diag,
        warnings,
    );
    match format {
        Format::Json => {
            serde_json::to_writer(&mut *out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Tsv => report.write_tsv(out)?,
    }
    out.flush()?;
    Ok(())
}

fn load_scenario(name: &str) -> Result<ScenarioConfig, CliError> {
    if let Some(s) = bundled(name) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(name).map_err(|e| {
        CliError::Config(format!(
            "'{name}' is neither a bundled scenario ({}) nor a readable file: {e}",
            BUNDLED_SCENARIOS.join(", ")
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{name}: {e}")))
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    rng: &'static str,
    seed: u64,
    scenario: &'a ScenarioConfig,
    rows: &'a [ResultRow],
}

fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(df) = args.df {
        let scale = match scenario.noise {
            Noise::Gaussian { sigma } => sigma,
            Noise::StudentT { scale, .. } => scale,
        };
        scenario = scenario.with_noise(Noise::StudentT { df, scale });
    }
    if args.methods.is_empty() {
        return Err(CliError::Config("no methods given".into()));
    }
    let rows = simulate(&scenario, &args.methods, args.reps, args.seed)?;
    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Json => {
            let doc = SimulationOutput {
                rng: RNG_ALGORITHM,
                seed: args.seed,
                scenario: &scenario,
                rows: &rows,
            };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Tsv => {
            writeln!(out, "# rng\t{RNG_ALGORITHM}")?;
            writeln!(out, "# seed\t{}", args.seed)?;
            write_tsv(&rows, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `A..B` (doubling) or `a,b,c`.
pub fn parse_n_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Config(format!("cannot parse length grid '{s}'"));
    let num = |t: &str| {
        t.trim()
            .replace('_', "")
            .parse::<f64>()
            .ok()
            .filter(|v| *v >= 1.0 && v.fract() == 0.0)
            .map(|v| v as usize)
    };
    if let Some((a, b)) = s.split_once("..") {
        let (mut n, end) = (num(a).ok_or_else(bad)?, num(b).ok_or_else(bad)?);
        let mut grid = Vec::new();
        while n <= end {
            grid.push(n);
            n *= 2;
        }
        Ok(grid)
    } else {
        s.split(',').map(|t| num(t).ok_or_else(bad)).collect()
    }
}

#[derive(Serialize)]
struct BenchOutput<'a> {
    rng: &'static str,
    seed: u64,
    #[serde(flatten)]
    report: &'a ScalingReport,
}

fn run_bench(args: &BenchArgs) -> Result<(), CliError> {
    let grid = parse_n_grid(&args.n)?;
    let report = runtime_scaling(args.loss, &grid, args.changes, args.seed)?;
    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Json => {
            let doc = BenchOutput {
                rng: RNG_ALGORITHM,
                seed: args.seed,
                report: &report,
            };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Tsv => {
            writeln!(out, "# rng\t{RNG_ALGORITHM}")?;
            writeln!(out, "# loss\t{}", report.loss)?;
            writeln!(out, "# slope\t{}", report.slope)?;
            writeln!(
                out,
                "n\tseconds\tmax_intervals\tmean_intervals\tchangepoints"
            )?;
            for r in &report.rows {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    r.n, r.seconds, r.max_intervals, r.mean_intervals, r.changepoints
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
