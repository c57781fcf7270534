//! Command-line harness: taskset generation, offline analysis, schedule
//! simulation, randomness metrics, and reproducible experiment grids.
//!
//! Every command exits 0 on success; failures print a machine-readable
//! JSON object to stderr and exit nonzero.

use clap::{Args, Parser, Subcommand, ValueEnum};
use edfrand::analysis::{analyze, AnalysisResult};
use edfrand::entropy::{
    approx_entropy, empirical_true_entropy, slot_shannon_entropy, EntropyParams,
};
use edfrand::experiment::{
    correlation_csv, entropy_rows_csv, range_rows_csv, run_correlation_experiment,
    run_entropy_experiment, run_range_experiment, run_spectrum_experiment, ExperimentId,
    ExperimentSpec,
};
use edfrand::rng::SimRng;
use edfrand::sched::{simulate, ExecPolicy, Scheme, SchedulerConfig, SimOutput};
use edfrand::spectral::{detect_peaks, dft_spectrum, execution_range, geometric_mean, occupancy_signal};
use edfrand::task::Taskset;
use edfrand::taskgen::{generate_taskset, util_bucket, GenConfig, BUCKET_COUNT};
use edfrand::trace::ScheduleTrace;
use serde_json::json;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "edfrand", version, about = "EDF schedule randomization simulator and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic taskset files
    Gen(GenArgs),
    /// Response-time bounds and inversion budgets for a taskset
    Analyze(AnalyzeArgs),
    /// Simulate a schedule and emit its trace
    Simulate(SimulateArgs),
    /// Entropy metrics over a schedule trace
    Entropy(EntropyArgs),
    /// Per-task occupancy spectra and a peak report
    Spectrum(SpectrumArgs),
    /// Execution-range metrics over a schedule trace
    Range(RangeArgs),
    /// Run a full experiment grid
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Edf,
    Base,
    It,
    Fg,
    Utr,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Edf => Scheme::VanillaEdf,
            SchemeArg::Base => Scheme::Base,
            SchemeArg::It => Scheme::IdleTime,
            SchemeArg::Fg => Scheme::FineGrained,
            SchemeArg::Utr => Scheme::UnusedTimeReclamation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecArg {
    /// Every job demands its full WCET
    Wcet,
    /// Uniform integer demand in [ceil(scale*C), C] per job
    Uniform,
    /// Fixed demand floor(scale*C)
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Flags shared by every command that runs the simulator.
#[derive(Args, Clone)]
struct SimOpts {
    /// Taskset JSON file
    #[arg(long)]
    taskset: PathBuf,
    /// Scheduling scheme
    #[arg(long, value_enum, default_value = "utr")]
    scheme: SchemeArg,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of hyperperiods to simulate
    #[arg(long, default_value_t = 100)]
    hyperperiods: u32,
    /// Per-job execution time policy
    #[arg(long, value_enum, default_value = "uniform")]
    exec: ExecArg,
    /// Scale parameter of the execution policy
    #[arg(long)]
    exec_scale: Option<f64>,
}

impl SimOpts {
    fn exec_policy(&self) -> ExecPolicy {
        match self.exec {
            ExecArg::Wcet => ExecPolicy::Wcet,
            ExecArg::Uniform => {
                ExecPolicy::UniformScaled { min_scale: self.exec_scale.unwrap_or(0.5) }
            }
            ExecArg::Fixed => ExecPolicy::FixedScaled { scale: self.exec_scale.unwrap_or(0.8) },
        }
    }

    fn run(&self) -> Result<(Taskset, AnalysisResult, SimOutput), CliError> {
        let ts = load_taskset(&self.taskset)?;
        let analysis = analyze(&ts).map_err(|e| CliError::new("analysis", e))?;
        let config = SchedulerConfig::new(
            self.scheme.into(),
            self.seed,
            self.exec_policy(),
            self.hyperperiods,
        );
        let out = simulate(&ts, &analysis, &config).map_err(|e| CliError::new("simulation", e))?;
        Ok((ts, analysis, out))
    }
}

#[derive(Args)]
struct GenArgs {
    /// Utilization bucket index (0..=8)
    #[arg(long, conflicts_with_all = ["util_lo", "util_hi"])]
    bucket: Option<usize>,
    /// Lower utilization bound
    #[arg(long, requires = "util_hi")]
    util_lo: Option<f64>,
    /// Upper utilization bound
    #[arg(long, requires = "util_lo")]
    util_hi: Option<f64>,
    /// Generate the full 9-bucket grid
    #[arg(long, conflicts_with_all = ["bucket", "util_lo", "util_hi"])]
    grid: bool,
    /// Tasksets per bucket
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    n_min: u32,
    #[arg(long, default_value_t = 10)]
    n_max: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the taskset files
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    taskset: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimOpts,
    /// csv: plain trace; json: replay bundle with config and analysis
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    /// Trace CSV file; alternatively simulate via --taskset
    #[arg(long, conflicts_with = "taskset")]
    trace: Option<PathBuf>,
    #[command(flatten)]
    sim: Option<SimOptsOpt>,
    /// Interval length (default ceil(0.35 L))
    #[arg(short, long)]
    m: Option<usize>,
    /// Dissimilarity threshold (default floor(0.1 L))
    #[arg(long)]
    pi: Option<usize>,
    /// Also compute the empirical full-row entropy
    #[arg(long)]
    true_entropy: bool,
}

/// SimOpts with an optional taskset, for commands that also accept traces.
#[derive(Args, Clone)]
struct SimOptsOpt {
    #[arg(long)]
    taskset: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "utr")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    hyperperiods: u32,
    #[arg(long, value_enum, default_value = "uniform")]
    exec: ExecArg,
    #[arg(long)]
    exec_scale: Option<f64>,
}

impl SimOptsOpt {
    fn to_sim(&self) -> Option<SimOpts> {
        self.taskset.as_ref().map(|t| SimOpts {
            taskset: t.clone(),
            scheme: self.scheme,
            seed: self.seed,
            hyperperiods: self.hyperperiods,
            exec: self.exec,
            exec_scale: self.exec_scale,
        })
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    sim: SimOpts,
    /// Number of peaks in the report
    #[arg(long, default_value_t = 8)]
    peaks: usize,
    /// Directory for per-task spectrum CSV files (skipped when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RangeArgs {
    #[command(flatten)]
    sim: SimOpts,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    EntropyVsUtil,
    RangeRatio,
    Spectrum,
    Correlation,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Which experiment to run
    #[arg(long, value_enum)]
    id: ExperimentArg,
    /// Schemes to compare (default: all five)
    #[arg(long, value_enum, value_delimiter = ',')]
    schemes: Option<Vec<SchemeArg>>,
    #[arg(long)]
    tasksets_per_bucket: Option<usize>,
    #[arg(long)]
    hyperperiods: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restore the full-scale setup (250 tasksets per bucket)
    #[arg(long)]
    full_scale: bool,
    /// Taskset file (spectrum experiment only)
    #[arg(long)]
    taskset: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    fn new(kind: &'static str, err: impl fmt::Display) -> Self {
        CliError { kind, message: err.to_string() }
    }
}

fn load_taskset(path: &Path) -> Result<Taskset, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    let ts = Taskset::from_json(&text).map_err(|e| CliError::new("parse", e))?;
    let violations = ts.validate();
    if !violations.is_empty() {
        let all: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::new("validation", all.join("; ")));
    }
    Ok(ts)
}

fn load_trace(path: &Path) -> Result<ScheduleTrace, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    ScheduleTrace::from_csv(&text).map_err(|e| CliError::new("parse", e))
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", json!({"error": {"kind": e.kind, "message": e.message}}));
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Analyze(args) => analyze_cmd(args),
        Command::Simulate(args) => simulate_cmd(args),
        Command::Entropy(args) => entropy_cmd(args),
        Command::Spectrum(args) => spectrum_cmd(args),
        Command::Range(args) => range_cmd(args),
        Command::Experiment(args) => experiment_cmd(args),
    }
}

fn gen(args: GenArgs) -> Result<(), CliError> {
    let buckets: Vec<(usize, f64, f64)> = if args.grid {
        (0..BUCKET_COUNT).map(|i| (i, util_bucket(i).0, util_bucket(i).1)).collect()
    } else if let (Some(lo), Some(hi)) = (args.util_lo, args.util_hi) {
        vec![(0, lo, hi)]
    } else {
        let bucket = args.bucket.unwrap_or(4);
        if bucket >= BUCKET_COUNT {
            return Err(CliError::new(
                "usage",
                format!("bucket {bucket} out of range 0..{BUCKET_COUNT}"),
            ));
        }
        let (lo, hi) = util_bucket(bucket);
        vec![(bucket, lo, hi)]
    };
    fs::create_dir_all(&args.out).map_err(|e| CliError::new("io", e))?;
    let mut rng = SimRng::new(args.seed);
    let mut files = Vec::new();
    for (bucket, lo, hi) in buckets {
        let config = GenConfig {
            n_tasks: (args.n_min, args.n_max),
            util_lo: lo,
            util_hi: hi,
            ..GenConfig::bucket(bucket.min(BUCKET_COUNT - 1))
        };
        for i in 0..args.count {
            let ts = generate_taskset(&config, &mut rng)
                .map_err(|e| CliError::new("generation", e))?;
            let name = format!("taskset_b{bucket}_{i:03}.json");
            let path = args.out.join(&name);
            write_out(&path, &ts.to_json())?;
            files.push(json!({
                "file": name,
                "bucket": bucket,
                "tasks": ts.len(),
                "utilization": ts.utilization_f64(),
            }));
        }
    }
    println!("{}", serde_json::to_string_pretty(&json!({"seed": args.seed, "tasksets": files})).unwrap());
    Ok(())
}

fn analyze_cmd(args: AnalyzeArgs) -> Result<(), CliError> {
    let ts = load_taskset(&args.taskset)?;
    let analysis = analyze(&ts).map_err(|e| CliError::new("analysis", e))?;
    match args.format {
        Some(FormatArg::Json) => {
            let tasks: Vec<_> = ts
                .tasks()
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    json!({
                        "id": t.id,
                        "wcet": t.wcet,
                        "period": t.period,
                        "deadline": t.deadline,
                        "response_time": analysis.response_time[i],
                        "wcib": analysis.wcib[i],
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "tasks": tasks,
                    "busy_period_bound": analysis.busy_period_bound,
                    "iterations": analysis.iterations,
                    "utilization": ts.utilization_f64(),
                }))
                .unwrap()
            );
        }
        _ => {
            println!("task  wcet  period  deadline  response  wcib");
            for (i, t) in ts.tasks().iter().enumerate() {
                println!(
                    "{:<5} {:<5} {:<7} {:<9} {:<9} {:<5}",
                    t.id, t.wcet, t.period, t.deadline, analysis.response_time[i], analysis.wcib[i]
                );
            }
            println!(
                "busy-period bound: {} ({} iterations), utilization {:.4}",
                analysis.busy_period_bound,
                analysis.iterations,
                ts.utilization_f64()
            );
        }
    }
    Ok(())
}

fn simulate_cmd(args: SimulateArgs) -> Result<(), CliError> {
    let (ts, analysis, out) = args.sim.run()?;
    let payload = match args.format {
        FormatArg::Csv => out.trace.to_csv(),
        FormatArg::Json => serde_json::to_string_pretty(&json!({
            "taskset": serde_json::from_str::<serde_json::Value>(&ts.to_json()).unwrap(),
            "config": {
                "scheme": Scheme::from(args.sim.scheme).name(),
                "seed": args.sim.seed,
                "hyperperiods": args.sim.hyperperiods,
                "exec_policy": args.sim.exec_policy(),
            },
            "analysis": analysis,
            "decisions": out.decisions,
            "trace": (0..out.trace.hyperperiods()).map(|k| out.trace.row(k).to_vec()).collect::<Vec<_>>(),
        }))
        .unwrap(),
    };
    match args.out {
        Some(path) => write_out(&path, &payload)?,
        None => print!("{payload}"),
    }
    Ok(())
}

fn entropy_cmd(args: EntropyArgs) -> Result<(), CliError> {
    let trace = if let Some(path) = &args.trace {
        load_trace(path)?
    } else if let Some(sim) = args.sim.as_ref().and_then(SimOptsOpt::to_sim) {
        sim.run()?.2.trace
    } else {
        return Err(CliError::new("usage", "provide --trace or --taskset"));
    };
    let defaults = EntropyParams::for_period_len(trace.period_len());
    let params = EntropyParams::new(args.m.unwrap_or(defaults.m), args.pi.unwrap_or(defaults.pi));
    let approx = approx_entropy(&trace, &params).map_err(|e| CliError::new("entropy", e))?;
    let slot = slot_shannon_entropy(&trace).map_err(|e| CliError::new("entropy", e))?;
    let truth = if args.true_entropy {
        Some(empirical_true_entropy(&trace).map_err(|e| CliError::new("entropy", e))?)
    } else {
        None
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "approx_entropy": approx,
            "slot_shannon": slot,
            "true_entropy": truth,
            "params": {
                "m": params.m,
                "pi": params.pi,
                "hyperperiods": trace.hyperperiods(),
                "period_len": trace.period_len(),
            },
        }))
        .unwrap()
    );
    Ok(())
}

fn spectrum_cmd(args: SpectrumArgs) -> Result<(), CliError> {
    let (ts, _, out) = args.sim.run()?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| CliError::new("io", e))?;
    }
    let mut reports = Vec::new();
    for task in ts.tasks() {
        let spectrum = dft_spectrum(&occupancy_signal(&out.trace, task.id))
            .map_err(|e| CliError::new("spectral", e))?;
        if let Some(dir) = &args.out {
            let mut csv = String::from("frequency,magnitude\n");
            for (f, m) in spectrum.frequencies.iter().zip(&spectrum.magnitudes) {
                csv.push_str(&format!("{f},{m}\n"));
            }
            write_out(&dir.join(format!("spectrum_task{}.csv", task.id)), &csv)?;
        }
        let peaks = detect_peaks(&spectrum, args.peaks);
        reports.push(json!({
            "task": task.id,
            "fundamental": 1.0 / task.period as f64,
            "peaks": peaks.iter().map(|p| json!({
                "frequency": p.frequency,
                "magnitude": p.magnitude,
            })).collect::<Vec<_>>(),
        }));
    }
    println!("{}", serde_json::to_string_pretty(&json!({"tasks": reports})).unwrap());
    Ok(())
}

fn range_cmd(args: RangeArgs) -> Result<(), CliError> {
    let (ts, _, out) = args.sim.run()?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for task in ts.tasks() {
        let range = execution_range(&out.trace, task).map_err(|e| CliError::new("spectral", e))?;
        ratios.push(range.ratio);
        rows.push((task.id, range));
    }
    let geomean = geometric_mean(&ratios).unwrap_or(0.0);
    match args.format {
        FormatArg::Csv => {
            println!("task,first_offset,last_offset,width,ratio");
            for (id, r) in &rows {
                println!("{id},{},{},{},{}", r.first_offset, r.last_offset, r.width, r.ratio);
            }
            println!("# geometric_mean_ratio,{geomean}");
        }
        FormatArg::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "tasks": rows.iter().map(|(id, r)| json!({
                        "task": id,
                        "first_offset": r.first_offset,
                        "last_offset": r.last_offset,
                        "width": r.width,
                        "ratio": r.ratio,
                    })).collect::<Vec<_>>(),
                    "geometric_mean_ratio": geomean,
                }))
                .unwrap()
            );
        }
    }
    Ok(())
}

fn experiment_cmd(args: ExperimentArgs) -> Result<(), CliError> {
    let id = match args.id {
        ExperimentArg::EntropyVsUtil => ExperimentId::EntropyVsUtil,
        ExperimentArg::RangeRatio => ExperimentId::RangeRatio,
        ExperimentArg::Spectrum => ExperimentId::Spectrum,
        ExperimentArg::Correlation => ExperimentId::Correlation,
    };
    let mut spec = if args.full_scale {
        ExperimentSpec::full_scale(id, args.seed)
    } else {
        ExperimentSpec::desk_scale(id, args.seed)
    };
    if let Some(schemes) = &args.schemes {
        spec.schemes = schemes.iter().map(|&s| s.into()).collect();
    }
    if let Some(n) = args.tasksets_per_bucket {
        spec.tasksets_per_bucket = n;
    }
    if id == ExperimentId::Correlation {
        // Small-hyperperiod regime defaults unless overridden.
        spec.tasksets_per_bucket = args.tasksets_per_bucket.unwrap_or(23);
        spec.hyperperiods = args.hyperperiods.unwrap_or(1500);
        spec.schemes = args
            .schemes
            .as_ref()
            .map(|s| s.iter().map(|&x| x.into()).collect())
            .unwrap_or_else(|| vec![Scheme::UnusedTimeReclamation]);
    } else if let Some(k) = args.hyperperiods {
        spec.hyperperiods = k;
    }

    fs::create_dir_all(&args.out).map_err(|e| CliError::new("io", e))?;
    write_out(&args.out.join("manifest.json"), &spec.manifest_json())?;

    let summary = match id {
        ExperimentId::EntropyVsUtil => {
            let rows = run_entropy_experiment(&spec).map_err(|e| CliError::new("experiment", e))?;
            write_out(&args.out.join("entropy.csv"), &entropy_rows_csv(&rows))?;
            json!({"rows": rows.len(), "output": "entropy.csv"})
        }
        ExperimentId::RangeRatio => {
            let rows = run_range_experiment(&spec).map_err(|e| CliError::new("experiment", e))?;
            write_out(&args.out.join("range.csv"), &range_rows_csv(&rows))?;
            json!({"rows": rows.len(), "output": "range.csv"})
        }
        ExperimentId::Correlation => {
            let result =
                run_correlation_experiment(&spec).map_err(|e| CliError::new("experiment", e))?;
            write_out(&args.out.join("correlation.csv"), &correlation_csv(&result))?;
            json!({
                "pearson": result.pearson,
                "tasksets": result.n,
                "output": "correlation.csv",
            })
        }
        ExperimentId::Spectrum => {
            let path = args
                .taskset
                .as_ref()
                .ok_or_else(|| CliError::new("usage", "spectrum experiment requires --taskset"))?;
            let ts = load_taskset(path)?;
            let rows = run_spectrum_experiment(&spec, &ts, 8)
                .map_err(|e| CliError::new("experiment", e))?;
            let mut csv = String::from("scheme,seed_index,task,fundamental,recovered\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.scheme.name(),
                    r.seed_index,
                    r.task_id,
                    r.fundamental,
                    r.recovered
                ));
            }
            write_out(&args.out.join("spectrum.csv"), &csv)?;
            json!({"rows": rows.len(), "output": "spectrum.csv"})
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "experiment": spec.id,
            "seed": spec.seed,
            "out": args.out,
            "summary": summary,
        }))
        .unwrap()
    );
    Ok(())
}
