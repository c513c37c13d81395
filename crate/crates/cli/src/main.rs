use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use skelsign_core::bench::{bench_pipeline, compare_reports, render_bench_table, render_speedup_table, BenchReport, WallClock};
use skelsign_core::dataset::DatasetManifest;
use skelsign_core::encode::PadPolicy;
use skelsign_core::eval::report::{render_eval_table, EvalRow};
use skelsign_core::eval::{evaluate, make_split_plan, EvalReport, ExperimentConfig};
use skelsign_core::impute::{impute_sequence, ImputeStats};
use skelsign_core::pipeline::{encode_dataset, write_json, EncodeOptions};
use skelsign_core::select::{apply_selection, builtin_names, load_manifest};
use skelsign_core::sequence_csv::{read_sequence_with, write_sequence, Layout, RangePolicy, ReadOptions};
use skelsign_core::synth::{write_dataset, SynthConfig};

#[derive(Parser, Debug)]
#[command(name = "skelsign", version, about = "Landmark sequences to skeleton images, with LOPO evaluation and stage benchmarks")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for synthetic data and augmentation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// -v info, -vv debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Validate and normalize sequence CSVs, cutting repetitions, or generate a synthetic set.
    Ingest(IngestArgs),
    /// Project sequences onto a landmark subset.
    Select(SelectArgs),
    /// Fill short detection gaps.
    Impute(ImputeArgs),
    /// Encode sequences as skeleton PNGs plus an index.
    Encode(EncodeArgs),
    /// Write the nested leave-one-person-out session plan.
    Split(SplitArgs),
    /// Encode, run every session and aggregate metrics.
    Evaluate(EvaluateArgs),
    /// Time pipeline stages on one sequence.
    Bench(BenchArgs),
    /// Render result tables from report JSON files.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "manifest", "synthetic"])))]
struct IngestArgs {
    /// Directory of sequence CSVs.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Dataset manifest with signer, label and optional cut points.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Generate a synthetic dataset instead of reading one.
    #[arg(long)]
    synthetic: bool,
    /// Synthetic generator settings (JSON); defaults otherwise.
    #[arg(long, requires = "synthetic")]
    synth_config: Option<PathBuf>,
    /// Reject out-of-range coordinates instead of clamping them.
    #[arg(long)]
    strict_range: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SelectArgs {
    /// Built-in subset name or manifest path.
    #[arg(long)]
    strategy: String,
    /// Sequence CSV or directory of them.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ImputeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Frames on each side of a gap used as spline knots.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    allow_extrapolation: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "manifest"])))]
struct EncodeArgs {
    #[arg(long)]
    strategy: String,
    /// Directory of sequence CSVs; a `manifest.json` there supplies labels.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Leave gaps as zeros.
    #[arg(long)]
    no_impute: bool,
    #[arg(long, value_enum)]
    pad: Option<Pad>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Pad {
    Zero,
    Repeat,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "split_plan.json")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Dataset manifest; overrides the config's.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    no_impute: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Sequence CSV to push through the stages.
    #[arg(long)]
    video: PathBuf,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    /// Comma-separated stage names, in display order.
    #[arg(long, value_delimiter = ',')]
    stages: Option<Vec<String>>,
    /// Earlier bench report to compute speed-ups against.
    #[arg(long)]
    baseline_report: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("kind").required(true).args(["eval", "bench"])))]
struct ReportArgs {
    /// Evaluation report(s); one table row each.
    #[arg(long)]
    eval: Vec<PathBuf>,
    /// Non-imputed counterparts, matched to `--eval` rows by strategy.
    #[arg(long, requires = "eval")]
    raw: Vec<PathBuf>,
    #[arg(long, conflicts_with = "eval")]
    bench: Option<PathBuf>,
    #[arg(long, requires = "bench")]
    baseline: Option<PathBuf>,
    /// Also write the rendered text here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Stamp<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    args: Vec<String>,
    config_sha256: Option<String>,
    seed: Option<u64>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `dir/stamp.json` for directory outputs, `name.stamp.json` beside file outputs.
fn stamp_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("stamp.json")
    } else {
        out.with_extension("stamp.json")
    }
}

fn write_stamp(cli: &Cli, subcommand: &str, out: &Path, is_dir: bool) -> Result<()> {
    let config_sha256 = match &cli.config {
        Some(p) => Some(sha256_hex(&fs::read(p).with_context(|| format!("reading {}", p.display()))?)),
        None => None,
    };
    let stamp = Stamp {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        args: std::env::args().skip(1).collect(),
        config_sha256,
        seed: cli.seed,
    };
    write_json(stamp_path(out, is_dir), &stamp)?;
    Ok(())
}

fn usage_error(msg: String) -> ! {
    Cli::command().error(clap::error::ErrorKind::MissingRequiredArgument, msg).exit()
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    cli.config
        .as_ref()
        .map(|p| ExperimentConfig::load(p).with_context(|| format!("loading config {}", p.display())))
        .transpose()
}

/// CSV files under `input`, or `input` itself when it is a file.
fn csv_inputs(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .csv files in {}", input.display());
    }
    Ok(files)
}

/// Output path for one input: `out` itself for a single file, `out/<name>` otherwise.
fn target_for(input: &Path, file: &Path, out: &Path) -> PathBuf {
    if input.is_file() {
        out.to_path_buf()
    } else {
        out.join(file.file_name().expect("listed files have names"))
    }
}

fn prepare_out(input: &Path, out: &Path) -> Result<()> {
    let dir = if input.is_file() { out.parent().unwrap_or(Path::new("")) } else { out };
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn dataset_from_dir(dir: &Path) -> Result<DatasetManifest> {
    let m = dir.join("manifest.json");
    Ok(if m.is_file() { DatasetManifest::load(&m)? } else { DatasetManifest::from_dir(dir)? })
}

fn ingest(cli: &Cli, a: &IngestArgs) -> Result<()> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    if a.synthetic {
        let mut cfg: SynthConfig = match &a.synth_config {
            Some(p) => serde_json::from_str(&fs::read_to_string(p)?).with_context(|| format!("parsing {}", p.display()))?,
            None => SynthConfig::default(),
        };
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        let m = write_dataset(&cfg, &a.out)?;
        log::info!("wrote {} synthetic sequences to {}", m.entries.len(), a.out.display());
    } else {
        let manifest = match (&a.manifest, &a.input) {
            (Some(m), _) => DatasetManifest::load(m)?,
            (None, Some(dir)) => DatasetManifest::from_dir(dir)?,
            _ => unreachable!("clap enforces a source"),
        };
        let opts = ReadOptions {
            range: if a.strict_range { RangePolicy::Reject } else { RangePolicy::Clamp },
            ..ReadOptions::default()
        };
        let mut out = DatasetManifest::default();
        for entry in &manifest.entries {
            for sample in manifest.load_entry(entry, &opts)? {
                let seq = sample.sequence;
                let file = format!("{}.csv", seq.video_id);
                write_sequence(&seq, a.out.join(&file))?;
                out.entries.push(skelsign_core::dataset::DatasetEntry {
                    video_id: seq.video_id,
                    signer_id: entry.signer_id.clone(),
                    label: entry.label.clone(),
                    path: file.into(),
                });
            }
        }
        write_json(a.out.join("manifest.json"), &out)?;
        println!("ingested {} sequences from {} videos", out.entries.len(), manifest.entries.len());
    }
    write_stamp(cli, "ingest", &a.out, true)
}

fn select(cli: &Cli, a: &SelectArgs) -> Result<()> {
    let m = load_manifest(&a.strategy)?;
    let opts = ReadOptions { layout: Layout::Subset, ..ReadOptions::default() };
    prepare_out(&a.input, &a.out)?;
    let files = csv_inputs(&a.input)?;
    for f in &files {
        let seq = read_sequence_with(f, &opts)?;
        write_sequence(&apply_selection(&seq, &m)?, target_for(&a.input, f, &a.out))?;
    }
    println!("selected {} landmarks ({}) in {} sequences", m.ids.len(), m.name, files.len());
    write_stamp(cli, "select", &a.out, a.input.is_dir())
}

fn impute(cli: &Cli, a: &ImputeArgs) -> Result<()> {
    let mut cfg = load_config(cli)?.and_then(|c| c.impute).unwrap_or_default();
    if let Some(w) = a.window {
        cfg.window = w;
    }
    cfg.allow_extrapolation |= a.allow_extrapolation;
    cfg.validate()?;
    let opts = ReadOptions { layout: Layout::Subset, ..ReadOptions::default() };
    prepare_out(&a.input, &a.out)?;
    let mut total = ImputeStats::default();
    for f in csv_inputs(&a.input)? {
        let seq = read_sequence_with(&f, &opts)?;
        let (filled, stats) = impute_sequence(&seq, &cfg)?;
        total += stats;
        write_sequence(&filled, target_for(&a.input, &f, &a.out))?;
    }
    println!(
        "filled {} cubic, {} linear, {} left missing",
        total.filled_cubic, total.filled_linear, total.left_missing
    );
    if a.input.is_dir() {
        write_json(a.out.join("impute_stats.json"), &total)?;
    }
    write_stamp(cli, "impute", &a.out, a.input.is_dir())
}

fn encode(cli: &Cli, a: &EncodeArgs) -> Result<()> {
    let config = load_config(cli)?;
    let manifest = match (&a.manifest, &a.input) {
        (Some(m), _) => DatasetManifest::load(m)?,
        (None, Some(dir)) => dataset_from_dir(dir)?,
        _ => unreachable!("clap enforces a source"),
    };
    let selection = load_manifest(&a.strategy)?;
    let mut opts = EncodeOptions { workers: cli.workers, ..EncodeOptions::default() };
    if let Some(c) = &config {
        opts.impute = c.impute;
        opts.spec = c.encode;
    }
    if a.no_impute {
        opts.impute = None;
    }
    match a.pad {
        Some(Pad::Zero) => opts.spec.pad_policy = PadPolicy::ZeroPad,
        Some(Pad::Repeat) => opts.spec.pad_policy = PadPolicy::RepeatLast,
        None => {}
    }
    let index = encode_dataset(&manifest, &selection, &opts, &a.out)?;
    write_stamp(cli, "encode", &a.out, true)?;
    println!("encoded {} images into {}", index.items.len(), a.out.display());
    if !index.failures.is_empty() {
        bail!("{} sequences failed; see {}", index.failures.len(), a.out.join("index.json").display());
    }
    Ok(())
}

fn split(cli: &Cli, a: &SplitArgs) -> Result<()> {
    let manifest = DatasetManifest::load(&a.manifest)?;
    let plan = make_split_plan(&manifest)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_json(&a.out, &plan)?;
    write_stamp(cli, "split", &a.out, false)?;
    println!("{} signers, {} sessions", plan.signers.len(), plan.sessions.len());
    Ok(())
}

fn run_evaluate(cli: &Cli, a: &EvaluateArgs) -> Result<()> {
    let mut cfg = match (load_config(cli)?, &a.manifest) {
        (Some(mut c), m) => {
            if let Some(m) = m {
                c.dataset_manifest = m.clone();
            }
            c
        }
        (None, Some(m)) => ExperimentConfig::new(m.clone()),
        (None, None) => usage_error("evaluate needs --config or --manifest".into()),
    };
    if let Some(s) = &a.strategy {
        cfg.strategy = s.clone();
    }
    if a.no_impute {
        cfg.impute = None;
    }
    if let Some(seed) = cli.seed {
        cfg.augment.seed = seed;
    }
    fs::create_dir_all(&a.out)?;
    let report = evaluate(&cfg, &a.out, cli.workers)?;
    write_stamp(cli, "evaluate", &a.out, true)?;
    print!("{}", render_eval_table(&[EvalRow::from_report(&report, None)]));
    Ok(())
}

fn bench(cli: &Cli, a: &BenchArgs) -> Result<()> {
    let cfg = load_config(cli)?.unwrap_or_else(|| ExperimentConfig::new(PathBuf::new()));
    let baseline: Option<BenchReport> = a.baseline_report.as_ref().map(|p| read_json(p)).transpose()?;
    fs::create_dir_all(&a.out)?;
    let report = bench_pipeline(&cfg, &a.video, a.runs as usize, a.stages.as_deref(), &mut WallClock::new())?;
    write_json(a.out.join("bench_report.json"), &report)?;
    let mut text = render_bench_table(&report);
    if let Some(base) = &baseline {
        let table = compare_reports(&report, base)?;
        write_json(a.out.join("speedup.json"), &table)?;
        text.push('\n');
        text.push_str(&render_speedup_table(&table));
    }
    fs::write(a.out.join("bench_table.txt"), &text)?;
    write_stamp(cli, "bench", &a.out, true)?;
    print!("{text}");
    if !report.valid {
        bail!("benchmark aborted: {}", report.error.as_deref().unwrap_or("unknown error"));
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn report(cli: &Cli, a: &ReportArgs) -> Result<()> {
    let text = if let Some(bench) = &a.bench {
        let report: BenchReport = read_json(bench)?;
        let mut text = render_bench_table(&report);
        if let Some(b) = &a.baseline {
            let base: BenchReport = read_json(b)?;
            text.push('\n');
            text.push_str(&render_speedup_table(&compare_reports(&report, &base)?));
        }
        text
    } else {
        let reports: Vec<EvalReport> = a.eval.iter().map(|p| read_json(p)).collect::<Result<_>>()?;
        let raws: Vec<EvalReport> = a.raw.iter().map(|p| read_json(p)).collect::<Result<_>>()?;
        let rows: Vec<EvalRow> = reports
            .iter()
            .map(|r| EvalRow::from_report(r, raws.iter().find(|raw| raw.strategy == r.strategy)))
            .collect();
        render_eval_table(&rows)
    };
    print!("{text}");
    if let Some(out) = &a.out {
        fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
        write_stamp(cli, "report", out, false)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Cmd::Ingest(a) => ingest(cli, a),
        Cmd::Select(a) => select(cli, a),
        Cmd::Impute(a) => impute(cli, a),
        Cmd::Encode(a) => encode(cli, a),
        Cmd::Split(a) => split(cli, a),
        Cmd::Evaluate(a) => run_evaluate(cli, a),
        Cmd::Bench(a) => bench(cli, a),
        Cmd::Report(a) => report(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    log::debug!("built-in strategies: {}", builtin_names().collect::<Vec<_>>().join(", "));
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
