//! Command-line front end. Every subcommand is a thin wrapper over a library module.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{bounds_report, optimal_pr_curve, optimal_roc_curve};
use crate::dataset::{
    discretize, load_csv, Binning, ColumnSchema, Dataset, Label, Pattern, PatternTable,
};
use crate::error::{Error, Result};
use crate::features::{
    exhaustive_best_subset, greedy_best_subset, optimal_dimension_kstar, SelectionMode,
    DEFAULT_BUDGET,
};
use crate::oracle::{run_suite, SuiteConfig};
use crate::overlap::{ar_max_numeric, ar_min_heuristic, envelope, overlap_index, OptimizerConfig};
use crate::splits::{
    delta_lower_bound, delta_of_classifier, expected_accuracy_upper, expected_delta,
    expected_min_hinge, split_random, Labeling, SplitTable,
};

/// Exit status for a failed `oracle-check` property.
pub const EXIT_CHECK_FAILED: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "predictability",
    version,
    about = "Classifier-independent performance ceilings of labeled tabular data"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Raw CSV with a header row.
    #[arg(long, conflicts_with = "pattern_table")]
    pub input: Option<PathBuf>,

    /// Pre-aggregated `pattern,pos,neg` CSV instead of raw data.
    #[arg(long)]
    pub pattern_table: Option<PathBuf>,

    /// Label column of the raw CSV.
    #[arg(long, default_value = "label")]
    pub label: String,

    /// Label token counted as positive.
    #[arg(long, default_value = "1")]
    pub positive: String,

    /// Feature columns to use, comma separated (default: every non-label column).
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,

    /// Numeric binning, `COLUMN=none|equal:B|quantile:B`; repeatable.
    #[arg(long = "bin", value_name = "COLUMN=SPEC")]
    pub bins: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exhaustive,
    Greedy,
}

#[derive(Args, Debug, Clone)]
pub struct OptimizerArgs {
    /// Pattern count of the optimized distributions.
    #[arg(long = "d", default_value_t = 10)]
    pub d: usize,
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Accepted overlap constraint violation.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            max_iters: self.max_iters,
            tolerance: self.tolerance,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Every ceiling of one dataset as JSON.
    Bounds {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Optimal ROC and PR curve vertices as two CSV files; areas go to stderr.
    Curves {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "roc.csv")]
        roc: PathBuf,
        #[arg(long, default_value = "pr.csv")]
        pr: PathBuf,
    },
    /// Joint train/test error lower bound of one split.
    SplitAnalyze {
        #[command(flatten)]
        input: Input,
        /// Raw training CSV (with --test).
        #[arg(long, requires = "test", conflicts_with_all = ["input", "pattern_table", "train_table"])]
        train: Option<PathBuf>,
        #[arg(long, requires = "train")]
        test: Option<PathBuf>,
        /// Training `pattern,pos,neg` table (with --test-table).
        #[arg(long, requires = "test_table", conflicts_with_all = ["input", "pattern_table"])]
        train_table: Option<PathBuf>,
        #[arg(long, requires = "train_table")]
        test_table: Option<PathBuf>,
        /// Training fraction for a random split of --input or --pattern-table.
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `pattern,label` CSV (label 1 or -1) whose gaps are reported alongside the bound.
        #[arg(long)]
        labeling: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Expected split quantities over a grid of training fractions.
    ExpectedSweep {
        #[command(flatten)]
        input: Input,
        /// `start:stop:step` (inclusive) or a comma list.
        #[arg(long, default_value = "0.1:0.9:0.1")]
        grid: String,
        #[command(flatten)]
        output: Output,
    },
    /// Overlap index of a dataset, with the AUC-ROC envelope at that overlap.
    Overlap {
        #[command(flatten)]
        input: Input,
        /// Also maximize the AUC-ROC ceiling at this overlap numerically.
        #[arg(long)]
        with_max: bool,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Lower and upper AUC-ROC ceiling curves against overlap.
    Envelope {
        #[arg(long, default_value = "0.05:0.95:0.05")]
        grid: String,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Bound-driven feature subset selection.
    Features {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        /// Largest number of subsets one exhaustive level may score.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Report only the best subset of this size.
        #[arg(long)]
        k: Option<usize>,
        /// Overlap tolerance for the minimal dimension.
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Closed forms against brute-force references on random instances.
    OracleCheck {
        /// Monte Carlo trials per expectation check.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Random instances per property.
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

/// Exit status of a library error: 2 for data problems, 3 for single-class input,
/// 4 for bad parameters.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SingleClass { .. } => 3,
        Error::InvalidParameter(_)
        | Error::InvalidOrdering(_)
        | Error::BudgetExceeded(_)
        | Error::EmptySubset => 4,
        _ => 2,
    }
}

/// Parses arguments, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    if args.len() <= 1 {
        let _ = Cli::command().print_help();
        return 1;
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 4 } else { 0 };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .try_init()
        .ok();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 4;
        }
        // fails only when a pool already exists, which keeps the earlier setting
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn schema_for(path: &Path, input: &Input) -> Result<Vec<ColumnSchema>> {
    let mut binned: Vec<(String, Binning)> = Vec::new();
    for spec in &input.bins {
        let (name, rule) = spec.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("--bin `{spec}`: expected COLUMN=SPEC"))
        })?;
        binned.push((name.to_owned(), rule.parse()?));
    }
    if input.columns.is_empty() && binned.is_empty() {
        return Ok(Vec::new());
    }
    let names: Vec<String> = if input.columns.is_empty() {
        let mut reader = csv::Reader::from_path(path)?;
        reader
            .headers()?
            .iter()
            .filter(|h| *h != input.label)
            .map(str::to_owned)
            .collect()
    } else {
        input.columns.clone()
    };
    if let Some((name, _)) = binned.iter().find(|(n, _)| !names.contains(n)) {
        return Err(Error::MissingColumn(name.clone()));
    }
    Ok(names
        .into_iter()
        .map(|name| match binned.iter().find(|(n, _)| *n == name) {
            Some((_, b)) => ColumnSchema::binned(name, *b),
            None => ColumnSchema::categorical(name),
        })
        .collect())
}

fn load_raw(path: &Path, input: &Input) -> Result<Dataset> {
    let schema = schema_for(path, input)?;
    let ds = load_csv(path, &input.label, &input.positive, &schema)?;
    discretize(&ds, &schema)
}

fn load_dataset(input: &Input) -> Result<Dataset> {
    match (&input.input, &input.pattern_table) {
        (Some(path), _) => load_raw(path, input),
        (None, Some(path)) => {
            let table = PatternTable::read_csv_path(path)?;
            let ds = Dataset::from_pattern_table(&table, &[] as &[&str])?;
            if input.columns.is_empty() {
                Ok(ds)
            } else {
                let cols = input
                    .columns
                    .iter()
                    .map(|c| ds.column(c).cloned())
                    .collect::<Result<Vec<_>>>()?;
                Dataset::new(cols, ds.labels().to_vec())
            }
        }
        (None, None) => Err(Error::InvalidParameter(
            "one of --input or --pattern-table is required".into(),
        )),
    }
}

fn load_table(input: &Input) -> Result<PatternTable> {
    match (&input.input, &input.pattern_table) {
        (None, Some(path)) if input.columns.is_empty() => PatternTable::read_csv_path(path),
        _ => load_dataset(input)?.pattern_table(),
    }
}

fn sink(output: &Output) -> Result<Box<dyn Write>> {
    Ok(match &output.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(output: &Output, value: &T) -> Result<()> {
    let mut w = sink(output)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<H, R>(output: &Output, header: &[H], rows: R) -> Result<()>
where
    H: AsRef<[u8]>,
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(sink(output)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `start:stop:step` inclusive of `stop`, or a comma list. Points are rounded to 12 decimals
/// so that `0.1 * 3` prints as `0.3`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("grid `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn read_labeling(path: &Path) -> Result<Labeling> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut labeling = Labeling::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let (pattern, label) = (
            rec.get(0).unwrap_or_default(),
            rec.get(1).unwrap_or_default(),
        );
        let label = match label.trim() {
            "1" | "+1" => Label::Positive,
            "-1" => Label::Negative,
            other => {
                return Err(Error::Schema(format!(
                    "labeling row {}: label `{other}` is not 1 or -1",
                    i + 1
                )));
            }
        };
        labeling.insert(Pattern::parse_joined(pattern), label);
    }
    Ok(labeling)
}

#[derive(Serialize)]
struct PatternExcess {
    pattern: String,
    train_pos: u64,
    train_neg: u64,
    test_pos: u64,
    test_neg: u64,
    excess: u64,
}

#[derive(Serialize)]
struct SplitReport {
    delta: f64,
    delta_raw: u64,
    m: u64,
    train_size: u64,
    test_size: u64,
    ratio: Option<f64>,
    perfect: bool,
    per_pattern: Vec<PatternExcess>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_train_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_test_f: Option<f64>,
}

#[derive(Serialize)]
struct OverlapReport {
    overlap: f64,
    ar_upper: f64,
    ar_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ar_max: Option<f64>,
    d: usize,
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Bounds { input, output } => {
            let report = bounds_report(&load_table(&input)?)?;
            match output.format {
                Format::Json => write_json(&output, &report)?,
                Format::Csv => {
                    let value = serde_json::to_value(&report)?;
                    let obj = value.as_object().expect("struct serializes to an object");
                    let header: Vec<&String> = obj.keys().collect();
                    let row = obj.values().map(|v| v.to_string()).collect();
                    write_csv(&output, &header, [row])?;
                }
            }
        }
        Command::Curves { input, roc, pr } => {
            let table = load_table(&input)?;
            let (roc_curve, pr_curve) = (optimal_roc_curve(&table)?, optimal_pr_curve(&table)?);
            roc_curve.write_csv(BufWriter::new(File::create(&roc)?))?;
            pr_curve.write_csv(BufWriter::new(File::create(&pr)?))?;
            eprintln!("roc area {}", roc_curve.area);
            eprintln!("pr area {}", pr_curve.area);
        }
        Command::SplitAnalyze {
            input,
            train,
            test,
            train_table,
            test_table,
            ratio,
            seed,
            labeling,
            output,
        } => {
            let split = match (train, test, train_table, test_table) {
                (Some(tr), Some(te), _, _) => SplitTable::from_tables(
                    &load_raw(&tr, &input)?.pattern_table()?,
                    &load_raw(&te, &input)?.pattern_table()?,
                ),
                (_, _, Some(tr), Some(te)) => SplitTable::from_tables(
                    &PatternTable::read_csv_path(tr)?,
                    &PatternTable::read_csv_path(te)?,
                ),
                _ => {
                    let p = ratio.ok_or_else(|| {
                        Error::InvalidParameter(
                            "give --train/--test, --train-table/--test-table, or --ratio".into(),
                        )
                    })?;
                    split_random(&load_dataset(&input)?, p, seed)?.2
                }
            };
            let bound = delta_lower_bound(&split);
            let gaps = labeling
                .map(|path| delta_of_classifier(&split, &read_labeling(&path)?))
                .transpose()?;
            let report = SplitReport {
                delta: bound.delta,
                delta_raw: bound.delta_raw,
                m: bound.m,
                train_size: split.train_size(),
                test_size: split.test_size(),
                ratio: split.ratio(),
                perfect: bound.perfect,
                per_pattern: split
                    .entries()
                    .iter()
                    .zip(&bound.per_pattern)
                    .map(|(e, &excess)| PatternExcess {
                        pattern: e.pattern.to_string(),
                        train_pos: e.train.pos,
                        train_neg: e.train.neg,
                        test_pos: e.test.pos,
                        test_neg: e.test.neg,
                        excess,
                    })
                    .collect(),
                delta_train_f: gaps.map(|g| g.delta_train),
                delta_test_f: gaps.map(|g| g.delta_test),
            };
            match output.format {
                Format::Json => write_json(&output, &report)?,
                Format::Csv => write_csv(
                    &output,
                    &[
                        "pattern",
                        "train_pos",
                        "train_neg",
                        "test_pos",
                        "test_neg",
                        "excess",
                    ],
                    report.per_pattern.iter().map(|r| {
                        vec![
                            r.pattern.clone(),
                            r.train_pos.to_string(),
                            r.train_neg.to_string(),
                            r.test_pos.to_string(),
                            r.test_neg.to_string(),
                            r.excess.to_string(),
                        ]
                    }),
                )?,
            }
        }
        Command::ExpectedSweep {
            input,
            grid,
            output,
        } => {
            let table = load_table(&input)?;
            #[derive(Serialize)]
            struct Row {
                p: f64,
                expected_min_hinge: f64,
                expected_ac_upper: f64,
                expected_delta: f64,
            }
            let rows = parse_grid(&grid)?
                .into_iter()
                .map(|p| {
                    Ok(Row {
                        p,
                        expected_min_hinge: expected_min_hinge(&table, p)?,
                        expected_ac_upper: expected_accuracy_upper(&table, p)?,
                        expected_delta: expected_delta(&table, p)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match output.format {
                Format::Json => write_json(&output, &rows)?,
                Format::Csv => write_csv(
                    &output,
                    &[
                        "p",
                        "expected_min_hinge",
                        "expected_ac_upper",
                        "expected_delta",
                    ],
                    rows.iter().map(|r| {
                        [
                            r.p,
                            r.expected_min_hinge,
                            r.expected_ac_upper,
                            r.expected_delta,
                        ]
                        .iter()
                        .map(f64::to_string)
                        .collect()
                    }),
                )?,
            }
        }
        Command::Overlap {
            input,
            with_max,
            optimizer,
            output,
        } => {
            let table = load_table(&input)?;
            let overlap = overlap_index(&table)?;
            let ar_max = if with_max && overlap > 0.0 && overlap < 1.0 {
                Some(ar_max_numeric(overlap, optimizer.d, &optimizer.config())?)
            } else if with_max {
                Some(if overlap <= 0.0 { 1.0 } else { 0.5 })
            } else {
                None
            };
            let report = OverlapReport {
                overlap,
                ar_upper: crate::bounds::auc_roc_upper(&table)?,
                ar_min: ar_min_heuristic(overlap),
                ar_max,
                d: table.d(),
            };
            match output.format {
                Format::Json => write_json(&output, &report)?,
                Format::Csv => write_csv(
                    &output,
                    &["overlap", "ar_upper", "ar_min", "ar_max", "d"],
                    [vec![
                        report.overlap.to_string(),
                        report.ar_upper.to_string(),
                        report.ar_min.to_string(),
                        report.ar_max.map(|v| v.to_string()).unwrap_or_default(),
                        report.d.to_string(),
                    ]],
                )?,
            }
        }
        Command::Envelope {
            grid,
            optimizer,
            output,
        } => {
            let env = envelope(&parse_grid(&grid)?, optimizer.d, &optimizer.config())?;
            match output.format {
                Format::Json => write_json(&output, &env)?,
                Format::Csv => write_csv(
                    &output,
                    &["d_s", "ar_min", "ar_max"],
                    env.samples.iter().map(|s| {
                        vec![
                            s.d_s.to_string(),
                            s.ar_min.to_string(),
                            s.ar_max.to_string(),
                        ]
                    }),
                )?,
            }
        }
        Command::Features {
            input,
            mode,
            budget,
            k,
            tolerance,
            output,
        } => {
            let ds = load_dataset(&input)?;
            let score_row = |k: usize, s: &crate::features::SubsetScore| {
                vec![
                    k.to_string(),
                    s.subset.join("|"),
                    s.ar_upper.to_string(),
                    s.overlap.to_string(),
                ]
            };
            let header = ["k", "best_subset", "ar_upper", "overlap"];
            if let Some(k) = k {
                let best = match mode {
                    Mode::Exhaustive => exhaustive_best_subset(&ds, k, budget)?,
                    Mode::Greedy => greedy_best_subset(&ds, k)?,
                };
                match output.format {
                    Format::Json => write_json(&output, &best)?,
                    Format::Csv => write_csv(&output, &header, [score_row(k, &best)])?,
                }
            } else {
                let mode = match mode {
                    Mode::Exhaustive => SelectionMode::Exhaustive { budget },
                    Mode::Greedy => SelectionMode::Greedy,
                };
                let result = optimal_dimension_kstar(&ds, mode, tolerance)?;
                match output.format {
                    Format::Json => write_json(&output, &result)?,
                    Format::Csv => write_csv(
                        &output,
                        &header,
                        result.levels.iter().map(|l| {
                            let mut row = score_row(l.k, &l.best);
                            row[3] = l.min_overlap.overlap.to_string();
                            row
                        }),
                    )?,
                }
                eprintln!(
                    "k* = {} ({})",
                    result.k_star,
                    result.global_subset.join("|")
                );
            }
        }
        Command::OracleCheck {
            trials,
            cases,
            seed,
            output,
        } => {
            if trials < 1000 {
                return Err(Error::InvalidParameter(format!(
                    "--trials {trials}; at least 1000 required"
                )));
            }
            let outcomes = run_suite(&SuiteConfig {
                cases,
                trials,
                seed,
            })?;
            match output.format {
                Format::Json => write_json(&output, &outcomes)?,
                Format::Csv => write_csv(
                    &output,
                    &["status", "property", "cases", "failures"],
                    outcomes.iter().map(|o| {
                        vec![
                            if o.passed() { "PASS" } else { "FAIL" }.to_owned(),
                            o.property.clone(),
                            o.cases.to_string(),
                            o.failures.to_string(),
                        ]
                    }),
                )?,
            }
            for o in &outcomes {
                let status = if o.passed() { "PASS" } else { "FAIL" };
                eprintln!(
                    "{status}  {} ({} cases, {} failed)",
                    o.property, o.cases, o.failures
                );
                if let Some(d) = &o.detail {
                    eprintln!("      first failure: {d}");
                }
            }
            if outcomes.iter().any(|o| !o.passed()) {
                return Ok(EXIT_CHECK_FAILED);
            }
        }
    }
    Ok(0)
}
