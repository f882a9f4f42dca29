//! `scad`: command-line front end for the review toolkit.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use scad_review::ast::{parse, print, print_stmts, Program};
use scad_review::csg::{evaluate, quantize, sample_surface, DEFAULT_POINTS};
use scad_review::dataset::{
    build_dataset, run_eval, to_sorted_json, DatasetConfig, DatasetManifest, EvalOptions, Split,
    StoredSample, DEFAULT_FRACTIONS, DEFAULT_RENDER_SIZE, DEFAULT_SOURCES,
};
use scad_review::io::{write_pgm16, write_pgm8, write_ply, write_xyz};
use scad_review::metrics::DEFAULT_JSD_RESOLUTION;
use scad_review::mutate::{ErrorType, Mutator};
use scad_review::render::{render, sample_views};
use scad_review::review::{
    build_dpo_pairs, read_candidates, score_candidates, PairMode, ScoringContext,
    SilhouetteEmbedder,
};
use scad_review::segment::segment;

#[derive(Parser)]
#[command(
    name = "scad",
    version,
    about = "Parse, segment, mutate and evaluate OpenSCAD-subset programs"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML file with defaults for any option below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and print it in canonical form.
    Parse(ParseArgs),
    /// Print the program with block annotations, or its block list.
    Segment(InputArgs),
    /// Evaluate to CSG; report bounds and optionally export a surface cloud.
    Compile(CompileArgs),
    /// Render silhouette and depth views.
    Render(RenderArgs),
    /// Quantize translate coordinates to integer levels.
    Quantize(QuantizeArgs),
    /// Inject one error of the given type.
    Mutate(MutateArgs),
    /// Generate a review dataset.
    BuildDataset(BuildArgs),
    /// Score predictions against a dataset split.
    Eval(EvalArgs),
    /// Build preference pairs from candidate reviews.
    DpoPairs(PairArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Program file, or `-` for stdin.
    input: PathBuf,
    /// Emit JSON instead of program text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write a surface point cloud (.ply or .xyz).
    #[arg(long)]
    cloud: Option<PathBuf>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output directory for view_<i>.pgm and depth_<i>.pgm.
    #[arg(long = "out-dir", alias = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(16..=4096))]
    size: u32,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    views: u8,
}

#[derive(Args)]
struct QuantizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 8)]
    bits: u32,
}

#[derive(Args)]
struct MutateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Error type, e.g. `rotation` or `missing_block`; omit to list the
    /// applicable types.
    #[arg(long = "type")]
    error_type: Option<String>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    sources: Option<usize>,
    /// Train, val and test fractions, comma separated.
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    #[arg(long)]
    render_size: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// JSONL with one prediction per sample.
    #[arg(long, alias = "pred")]
    predictions: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    split: SplitArg,
    #[arg(long)]
    points: Option<usize>,
    /// Cells per axis of the occupancy grid.
    #[arg(long = "jsd-res")]
    jsd_res: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    And,
    Or,
    Pointcloud,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// JSONL of candidate reviews.
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    points: Option<usize>,
    /// Write pairs here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// `--config` file contents; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    seed: Option<u64>,
    jobs: Option<usize>,
    dataset: DatasetSection,
    eval: EvalSection,
    pairs: PairsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DatasetSection {
    n_sources: Option<usize>,
    fractions: Option<[f64; 3]>,
    render_size: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EvalSection {
    points: Option<usize>,
    jsd_resolution: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PairsSection {
    mode: Option<PairMode>,
    points: Option<usize>,
}

/// Exit status 1 for bad invocations, 2 for bad or unprocessable data.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let config: Config = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => Config::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    if let Some(jobs) = cli.jobs.or(config.jobs) {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| usage(e))?;
    }
    match cli.command {
        Command::Parse(a) => cmd_parse(&a.input),
        Command::Segment(a) => cmd_segment(&a),
        Command::Compile(a) => cmd_compile(&a, seed),
        Command::Render(a) => cmd_render(&a, seed),
        Command::Quantize(a) => cmd_quantize(&a),
        Command::Mutate(a) => cmd_mutate(&a, seed),
        Command::BuildDataset(a) => cmd_build(&a, &config, seed),
        Command::Eval(a) => cmd_eval(&a, &config, seed),
        Command::DpoPairs(a) => cmd_pairs(&a, &config, seed),
    }
}

fn emit(text: &str) -> Outcome {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .context("writing to stdout")?;
    if !text.ends_with('\n') {
        out.write_all(b"\n").context("writing to stdout")?;
    }
    Ok(())
}

fn emit_json(v: &Value) -> Outcome {
    emit(&to_sorted_json(v))
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_program(a: &InputArgs) -> anyhow::Result<Program> {
    let text = read_input(&a.input)?;
    parse(&text).map_err(|e| anyhow!("{}: {e}", a.input.display()))
}

fn cmd_parse(a: &InputArgs) -> Outcome {
    let program = load_program(a)?;
    if a.json {
        emit_json(&serde_json::to_value(&program.statements).context("serializing")?)
    } else {
        emit(&print(&program))
    }
}

fn cmd_segment(a: &InputArgs) -> Outcome {
    let program = load_program(a)?;
    let blocks = segment(&program).context("segmenting")?;
    if a.json {
        let list: Vec<Value> = blocks
            .blocks
            .iter()
            .map(|b| {
                json!({
                    "id": b.id,
                    "kind": format!("{:?}", b.kind),
                    "line": b.span.line,
                    "source": print_stmts(&b.statements),
                })
            })
            .collect();
        emit_json(&Value::Array(list))
    } else {
        let annotated = scad_review::segment::annotate(&program).context("segmenting")?;
        emit(&print(&annotated))
    }
}

fn cmd_compile(a: &CompileArgs, seed: u64) -> Outcome {
    let program = load_program(&a.input)?;
    let node = evaluate(&program).context("compiling")?;
    let bounds = node.bounds();
    let mut report = json!({ "bounds": { "min": bounds.min, "max": bounds.max }, "leaves": node.leaves().len() });
    if let Some(path) = &a.cloud {
        let n = a.points.unwrap_or(DEFAULT_POINTS);
        let cloud = sample_surface(&node, n, seed).context("sampling surface")?;
        let mut buf = Vec::new();
        match path.extension().and_then(|e| e.to_str()) {
            Some("xyz") => write_xyz(&mut buf, &cloud),
            Some("ply") => write_ply(&mut buf, &cloud),
            _ => return Err(usage("--cloud must end in .ply or .xyz")),
        }
        .context("encoding cloud")?;
        fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
        report["points"] = json!(cloud.len());
    }
    emit_json(&report)
}

fn cmd_render(a: &RenderArgs, seed: u64) -> Outcome {
    let program = load_program(&a.input)?;
    let node = evaluate(&program).context("compiling")?;
    let mut views = sample_views(seed, &node.bounds(), a.size);
    let n = usize::from(a.views);
    views.cameras.truncate(n);
    views.azimuths.truncate(n);
    views.elevations.truncate(n);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut coverage = Vec::new();
    for (i, cam) in views.cameras.iter().enumerate() {
        let r = render(&node, cam);
        let finite = r.depth.iter().copied().filter(|d| d.is_finite());
        let (near, far) = finite.fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        });
        let mut sil = Vec::new();
        write_pgm8(&mut sil, r.width, r.height, &r.silhouette_bytes()).context("encoding view")?;
        let mut depth = Vec::new();
        write_pgm16(
            &mut depth,
            r.width,
            r.height,
            &r.depth_u16(near.min(far), far),
        )
        .context("encoding depth")?;
        for (name, bytes) in [
            (format!("view_{i}.pgm"), sil),
            (format!("depth_{i}.pgm"), depth),
        ] {
            let path = a.out.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        coverage.push(r.coverage());
    }
    emit_json(&json!({ "views": views, "coverage": coverage }))
}

fn cmd_quantize(a: &QuantizeArgs) -> Outcome {
    if !(1..=16).contains(&a.bits) {
        return Err(usage("--bits must be in 1..=16"));
    }
    let program = load_program(&a.input)?;
    let (q, frame) = quantize(&program, a.bits).context("quantizing")?;
    if a.input.json {
        emit_json(&json!({ "frame": frame, "program": print(&q) }))
    } else {
        emit(&print(&q))
    }
}

fn cmd_mutate(a: &MutateArgs, seed: u64) -> Outcome {
    let program = load_program(&a.input)?;
    let mutator = Mutator::new(&program).context("preparing program")?;
    let Some(name) = &a.error_type else {
        let types: Vec<&str> = mutator
            .applicable_types()
            .into_iter()
            .map(ErrorType::as_str)
            .collect();
        return emit_json(&json!(types));
    };
    let ty: ErrorType = name.parse().map_err(usage)?;
    let (mutant, record) = mutator.mutate(ty, seed).context("mutating")?;
    if a.input.json {
        emit_json(&json!({ "program": print(&mutant), "record": record }))
    } else {
        emit(&print(&mutant))
    }
}

fn cmd_build(a: &BuildArgs, config: &Config, seed: u64) -> Outcome {
    let fractions = match &a.fractions {
        Some(f) => <[f64; 3]>::try_from(f.as_slice())
            .map_err(|_| usage(format!("--fractions takes 3 values, got {}", f.len())))?,
        None => config.dataset.fractions.unwrap_or(DEFAULT_FRACTIONS),
    };
    let cfg = DatasetConfig {
        n_sources: a
            .sources
            .or(config.dataset.n_sources)
            .unwrap_or(DEFAULT_SOURCES),
        seed,
        fractions,
        render_size: a
            .render_size
            .or(config.dataset.render_size)
            .unwrap_or(DEFAULT_RENDER_SIZE),
    };
    scad_review::dataset::check_fractions(cfg.fractions).map_err(usage)?;
    let manifest = build_dataset(&a.out, &cfg).context("building dataset")?;
    emit_json(&json!({
        "manifest_sha256": manifest.hash(),
        "samples": manifest.samples.len(),
        "skipped": manifest.skipped.len(),
        "split_counts": manifest.split_counts,
        "error_histogram": manifest.error_histogram,
    }))
}

fn cmd_eval(a: &EvalArgs, config: &Config, seed: u64) -> Outcome {
    let manifest = DatasetManifest::load(&a.dataset).context("loading manifest")?;
    let predictions = read_input(&a.predictions)?;
    let opts = EvalOptions {
        points: a.points.or(config.eval.points).unwrap_or(DEFAULT_POINTS),
        seed,
        jsd_resolution: a
            .jsd_res
            .or(config.eval.jsd_resolution)
            .unwrap_or(DEFAULT_JSD_RESOLUTION),
        split: a.split.into(),
    };
    let report = run_eval(&predictions, &a.dataset, &manifest, &opts).context("evaluating")?;
    match a.format {
        OutputFormat::Json => emit_json(&report.to_json()),
        OutputFormat::Table => emit(&report.table()),
    }
}

fn cmd_pairs(a: &PairArgs, config: &Config, seed: u64) -> Outcome {
    let manifest = DatasetManifest::load(&a.dataset).context("loading manifest")?;
    let sets = read_candidates(&read_input(&a.candidates)?).context("reading candidates")?;
    let mode = match a.mode {
        Some(ModeArg::And) => PairMode::And,
        Some(ModeArg::Or) => PairMode::Or,
        Some(ModeArg::Pointcloud) => PairMode::PointCloud,
        None => config.pairs.mode.unwrap_or_default(),
    };
    let points = a.points.or(config.pairs.points).unwrap_or(DEFAULT_POINTS);
    let embedder = SilhouetteEmbedder::default();
    let mut out = String::new();
    for set in &sets {
        let entry = manifest
            .samples
            .iter()
            .find(|e| e.id == set.sample_id)
            .ok_or_else(|| anyhow!("sample `{}` is not in the dataset", set.sample_id))?;
        let stored = StoredSample::load(&a.dataset.join(&entry.path)).context("loading sample")?;
        let gold_cloud = match mode {
            PairMode::PointCloud => {
                let node = scad_review::csg::evaluate_source(&stored.correct_program)
                    .context("compiling gold")?;
                let raw = sample_surface(&node, points, seed).context("sampling gold")?;
                Some(scad_review::csg::normalize(&raw).context("normalizing gold")?)
            }
            _ => None,
        };
        let ctx = ScoringContext {
            gold: stored.feedback,
            cameras: stored.record.views.cameras,
            reference_views: stored.reference_views,
            gold_cloud,
            points,
            seed,
            embedder: &embedder,
        };
        let scored = score_candidates(set, &ctx);
        for pair in build_dpo_pairs(&set.sample_id, &scored, mode) {
            out.push_str(&pair.to_json().to_string());
            out.push('\n');
        }
    }
    match &a.out {
        Some(path) => fs::write(path, out)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Into::into),
        None => {
            io::stdout()
                .lock()
                .write_all(out.as_bytes())
                .context("writing to stdout")?;
            Ok(())
        }
    }
}
