//! pixcoder CLI: synthetic data generation, training, evaluation, inference,
//! baselines and reporting.
//!
//! Exit codes: 0 success, 2 configuration error, 3 checkpoint mismatch,
//! 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pixcoder::codec::{count_valid, iter_valid_capped, layout_for, parse_layout_id, VectorLayout};
use pixcoder::codegen::Target;
use pixcoder::dsl::{serialize, DslTree, Platform};
use pixcoder::nn::{load_model, save_model};
use pixcoder::pipeline::{
    baseline_generate, eval_baseline, eval_model, infer, report_csv, report_table, sweep_csv,
    sweep_thresholds, train_from_samples, EvalReport, PipelineError, RunConfig,
};
use pixcoder::render::{generate_to_dir, RasterImage, RenderTheme, Sample};
use pixcoder::VisionModelF32;

#[derive(Parser)]
#[command(name = "pixcoder", about = "GUI screenshot to front-end code pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic train/test dataset with manifests and PNGs.
    GenData(GenDataArgs),
    /// Train a vision model on a generated dataset.
    Train(TrainArgs),
    /// Evaluate a trained model on a test split.
    Eval(EvalArgs),
    /// Run the full pipeline on one image file.
    Infer(InferArgs),
    /// Score the random grammar-compliant baseline.
    Baseline(BaselineArgs),
    /// Combine evaluation reports into a table and CSV.
    Report(ReportArgs),
    /// Count (and optionally list) the valid vectors of a layout.
    Enumerate(EnumerateArgs),
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    platform: Platform,
    /// Use the unpruned slot layout instead of the pruned pattern layout.
    #[arg(long)]
    unpruned: bool,
    #[arg(long, default_value_t = 1500)]
    train: usize,
    #[arg(long, default_value_t = 250)]
    test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    render_size: usize,
    /// Output directory for manifests, images and the layout schema.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directory produced by gen-data.
    #[arg(long)]
    data: PathBuf,
    /// Checkpoint path to write.
    #[arg(long)]
    out: PathBuf,
    /// Optional config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    image_size: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed decision threshold instead of the calibrated one.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    calib_sample: Option<usize>,
    /// Comparison mode: region-wise softmax output head.
    #[arg(long)]
    softmax_regions: bool,
    /// Train on growing prefixes, e.g. `250,500,1000,1500`; evaluates each
    /// on the test split and keeps the last model.
    #[arg(long, value_delimiter = ',')]
    train_sizes: Vec<usize>,
    /// CSV training log (epoch, loss, calibration extremes).
    #[arg(long)]
    log: Option<PathBuf>,
    /// CSV output for the dataset-size sweep.
    #[arg(long)]
    sweep_csv: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Decision threshold; defaults to the checkpoint's calibrated value.
    #[arg(long)]
    threshold: Option<f64>,
    /// Extra thresholds to sweep, e.g. `0.0001,0.01,0.5,0.9`.
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<f64>,
    /// Where to write the sweep CSV.
    #[arg(long)]
    sweep_csv: Option<PathBuf>,
    /// Write the full evaluation report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    model: PathBuf,
    /// Input image (PNG or JPEG).
    #[arg(long)]
    image: PathBuf,
    #[arg(long, default_value = "html")]
    target: Target,
    #[arg(long)]
    threshold: Option<f64>,
    /// Directory for the emitted `.gui` and compiled source files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    /// Dataset directory; baseline is scored against its test split.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Print random grammar-compliant DSLs instead of evaluating.
    #[arg(long)]
    platform: Option<Platform>,
    #[arg(long)]
    unpruned: bool,
    #[arg(long, default_value_t = 3)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Evaluation report JSON files.
    reports: Vec<PathBuf>,
    /// Write the combined CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    platform: Platform,
    #[arg(long)]
    unpruned: bool,
    /// Print the first N valid vectors as bit strings.
    #[arg(long)]
    list: Option<usize>,
    /// Print the layout schema as JSON.
    #[arg(long)]
    schema: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                PipelineError::Config(_) => ExitCode::from(2),
                PipelineError::CheckpointMismatch { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::GenData(args) => gen_data(args),
        Command::Train(args) => train_cmd(args),
        Command::Eval(args) => eval_cmd(args),
        Command::Infer(args) => infer_cmd(args),
        Command::Baseline(args) => baseline_cmd(args),
        Command::Report(args) => report_cmd(args),
        Command::Enumerate(args) => enumerate_cmd(args),
    }
}

fn gen_data(args: GenDataArgs) -> Result<(), PipelineError> {
    let layout = layout_for(args.platform, !args.unpruned);
    let theme = RenderTheme::default();
    generate_to_dir(
        &args.out,
        args.train,
        args.test,
        &layout,
        &theme,
        args.seed,
        args.render_size,
    )?;
    println!(
        "wrote {} train and {} test samples for {} to {}",
        args.train,
        args.test,
        layout.id(),
        args.out.display()
    );
    Ok(())
}

/// Read a split back into in-memory samples plus target trees.
fn load_samples(
    dir: &Path,
    split: &str,
    layout: &VectorLayout,
) -> Result<Vec<Sample>, PipelineError> {
    let rows = pixcoder::pipeline::load_split(dir, split, layout)?;
    Ok(rows
        .into_iter()
        .map(|(image, tree, bits)| Sample {
            tree,
            bits,
            image,
            seed: 0,
        })
        .collect())
}

fn dataset_layout(dir: &Path) -> Result<VectorLayout, PipelineError> {
    let manifest = dir.join("train.jsonl");
    let entries = pixcoder::render::read_manifest(&manifest)?;
    let first = entries
        .first()
        .ok_or_else(|| PipelineError::Config(format!("{} is empty", manifest.display())))?;
    Ok(parse_layout_id(&first.layout)?)
}

fn train_cmd(args: TrainArgs) -> Result<(), PipelineError> {
    let layout = dataset_layout(&args.data)?;
    let mut cfg = RunConfig {
        platform: layout.platform(),
        pruned: layout.pruned(),
        ..RunConfig::default()
    };
    if let Some(path) = &args.config {
        cfg.load_file(path)?;
    }
    if let Some(v) = args.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = args.image_size {
        cfg.image_size = v;
    }
    if let Some(v) = args.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = args.lr {
        cfg.learning_rate = v;
    }
    if let Some(v) = args.momentum {
        cfg.momentum = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.threshold {
        cfg.threshold_override = Some(v);
    }
    if let Some(v) = args.calib_sample {
        cfg.calib_sample = v;
    }
    cfg.softmax_regions |= args.softmax_regions;
    cfg.validate()?;

    let train_samples = load_samples(&args.data, "train", &layout)?;
    let sizes = if args.train_sizes.is_empty() {
        vec![train_samples.len()]
    } else {
        args.train_sizes.clone()
    };
    for &size in &sizes {
        if size == 0 || size > train_samples.len() {
            return Err(PipelineError::Config(format!(
                "train size {size} outside 1..={}",
                train_samples.len()
            )));
        }
    }

    let mut sweep_rows = Vec::new();
    let mut last_arts = None;
    for &size in &sizes {
        let arts = train_from_samples(&layout, &train_samples[..size], &cfg, args.log.clone())?;
        if sizes.len() > 1 || args.sweep_csv.is_some() {
            let test = load_samples(&args.data, "test", &layout)?;
            let items: Vec<(RasterImage, DslTree)> = test
                .iter()
                .map(|s| (s.image.clone(), s.tree.clone()))
                .collect();
            let report = eval_model(&arts.model, &layout, &items, arts.threshold, "train-sweep")?;
            println!(
                "train size {size}: mean similarity {:.4} at threshold {:.5}",
                report.mean_similarity, arts.threshold
            );
            sweep_rows.push((size as f64, report.mean_similarity));
        }
        last_arts = Some(arts);
    }
    let arts = last_arts.expect("at least one size");
    save_model(&arts.model, &layout.id(), &args.out)?;
    println!(
        "trained on {} samples, threshold {:.6}, checkpoint {}",
        sizes.last().unwrap(),
        arts.threshold,
        args.out.display()
    );
    if let Some(path) = &args.sweep_csv {
        std::fs::write(path, sweep_csv(("train_size", "mean_similarity"), &sweep_rows))?;
    }
    Ok(())
}

fn load_checkpoint(path: &Path) -> Result<(VisionModelF32, VectorLayout), PipelineError> {
    let (model, layout_id) = load_model::<f32>(path)?;
    let layout = parse_layout_id(&layout_id)?;
    if model.spec().output_width != layout.width() {
        return Err(PipelineError::CheckpointMismatch {
            expected: format!("{} ({} bits)", layout.id(), layout.width()),
            found: format!("{} bits", model.spec().output_width),
        });
    }
    Ok((model, layout))
}

fn pick_threshold(
    explicit: Option<f64>,
    model: &VisionModelF32,
) -> Result<f64, PipelineError> {
    match explicit.or_else(|| model.threshold()) {
        Some(t) if t > 0.0 && t < 1.0 => Ok(t),
        Some(t) => Err(PipelineError::Config(format!(
            "threshold must lie strictly between 0 and 1, got {t}"
        ))),
        None => Err(PipelineError::Config(
            "checkpoint has no calibrated threshold; pass --threshold".to_string(),
        )),
    }
}

fn eval_cmd(args: EvalArgs) -> Result<(), PipelineError> {
    let (model, layout) = load_checkpoint(&args.model)?;
    let data_layout = dataset_layout(&args.data)?;
    if data_layout.id() != layout.id() {
        return Err(PipelineError::CheckpointMismatch {
            expected: data_layout.id(),
            found: layout.id(),
        });
    }
    let threshold = pick_threshold(args.threshold, &model)?;
    let test = load_samples(&args.data, "test", &layout)?;
    let items: Vec<(RasterImage, DslTree)> = test
        .iter()
        .map(|s| (s.image.clone(), s.tree.clone()))
        .collect();
    let report = eval_model(&model, &layout, &items, threshold, &args.model.display().to_string())?;
    println!(
        "{}: mean similarity {:.4} over {} samples, {} syntax errors, threshold {:.6}",
        layout.id(),
        report.mean_similarity,
        report.samples,
        report.syntax_errors,
        threshold
    );
    if !args.thresholds.is_empty() {
        let rows = sweep_thresholds(&model, &layout, &items, &args.thresholds)?;
        for (t, mean) in &rows {
            println!("threshold {t}: mean similarity {mean:.4}");
        }
        if let Some(path) = &args.sweep_csv {
            std::fs::write(path, sweep_csv(("threshold", "mean_similarity"), &rows))?;
        }
    }
    if let Some(path) = &args.report {
        report.save_json(path)?;
    }
    Ok(())
}

fn infer_cmd(args: InferArgs) -> Result<(), PipelineError> {
    let (model, layout) = load_checkpoint(&args.model)?;
    let threshold = pick_threshold(args.threshold, &model)?;
    let image = RasterImage::load(&args.image)?;
    let output = infer(&model, &layout, &image, threshold, args.target)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let stem = args
        .image
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "layout".to_string());
    let gui_path = args.out_dir.join(format!("{stem}.gui"));
    let code_path = args.out_dir.join(format!("{stem}.{}", args.target.extension()));
    std::fs::write(&gui_path, format!("{}\n", output.dsl))?;
    std::fs::write(&code_path, &output.code)?;
    println!("{}", output.dsl);
    println!("wrote {} and {}", gui_path.display(), code_path.display());
    Ok(())
}

fn baseline_cmd(args: BaselineArgs) -> Result<(), PipelineError> {
    if let Some(dir) = &args.data {
        let layout = dataset_layout(dir)?;
        let test = load_samples(dir, "test", &layout)?;
        let targets: Vec<DslTree> = test.iter().map(|s| s.tree.clone()).collect();
        let report = eval_baseline(&layout, &targets, args.seed)?;
        println!(
            "baseline on {}: mean similarity {:.4} over {} samples",
            layout.id(),
            report.mean_similarity,
            report.samples
        );
        if let Some(path) = &args.report {
            report.save_json(path)?;
        }
        return Ok(());
    }
    let Some(platform) = args.platform else {
        return Err(PipelineError::Config(
            "pass --data for evaluation or --platform to print samples".to_string(),
        ));
    };
    let layout = layout_for(platform, !args.unpruned);
    for i in 0..args.count {
        let tree = baseline_generate(&layout, args.seed.wrapping_add(i as u64));
        println!("{}", serialize(&tree)?);
        if i + 1 < args.count {
            println!();
        }
    }
    Ok(())
}

fn report_cmd(args: ReportArgs) -> Result<(), PipelineError> {
    if args.reports.is_empty() {
        return Err(PipelineError::Config("no report files given".to_string()));
    }
    let reports: Result<Vec<EvalReport>, PipelineError> =
        args.reports.iter().map(|p| EvalReport::load_json(p)).collect();
    let reports = reports?;
    print!("{}", report_table(&reports));
    if let Some(path) = &args.csv {
        std::fs::write(path, report_csv(&reports))?;
    }
    Ok(())
}

fn enumerate_cmd(args: EnumerateArgs) -> Result<(), PipelineError> {
    let layout = layout_for(args.platform, !args.unpruned);
    if args.schema {
        println!("{}", layout.to_json());
        return Ok(());
    }
    println!(
        "{}: width {} bits, {} valid vectors",
        layout.id(),
        layout.width(),
        count_valid(&layout)
    );
    if let Some(n) = args.list {
        let iter = iter_valid_capped(&layout, u128::MAX)?;
        for bits in iter.take(n) {
            println!("{}", bits.to_bit_string());
        }
    }
    Ok(())
}
