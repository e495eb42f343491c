use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use contourbench::bench::{aggregate, default_thresholds, evaluate_many, write_threshold_csv, EvalOptions, Prediction};
use contourbench::consensus::{consensus_drawings, ConsensusMode, ConsensusOptions};
use contourbench::game::{classify_submission, FieldParams, DEFAULT_CUTOFF};
use contourbench::matching::Tolerance;
use contourbench::mm_loss::{three_line_fixture, train_toy, Aggregation, ToyReport, TrainConfig};
use contourbench::raster::SoftMap;
use contourbench::stroke::{
    drawing_stats, import_svg_with_tolerance, rasterize_drawing, read_drawing, serialize_drawing, Dataset,
    DEFAULT_FLATTEN_TOL,
};
use serde::Serialize;

use crate::boundary::field_for_image;
use crate::server::{serve, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "contourbench", version, about = "Contour-drawing toolkit and game server")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataArg {
    /// Dataset root (drawings/, images/, fields_src/).
    #[arg(long = "data", env = "CONTOURBENCH_DATA", default_value = "data")]
    pub root: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    #[arg(long, default_value_t = FieldParams::default().n_reward)]
    pub n_reward: usize,
    #[arg(long, default_value_t = FieldParams::default().n_penalty)]
    pub n_penalty: usize,
    #[arg(long, default_value_t = FieldParams::default().collect_radius)]
    pub collect_radius: f64,
    #[arg(long, default_value_t = FieldParams::default().penalty_radius)]
    pub penalty_radius: f64,
    #[arg(long, default_value_t = FieldParams::default().clearance)]
    pub clearance: f64,
    #[arg(long, default_value_t = FieldParams::default().min_sep)]
    pub min_sep: f64,
    #[arg(long, default_value_t = FieldParams::default().reward_value)]
    pub reward_value: f64,
    #[arg(long, default_value_t = FieldParams::default().penalty_value)]
    pub penalty_value: f64,
    #[arg(long, default_value_t = FieldParams::default().boundary_t)]
    pub boundary_t: f64,
}

impl GameArgs {
    pub fn params(&self) -> FieldParams {
        FieldParams {
            n_reward: self.n_reward,
            n_penalty: self.n_penalty,
            collect_radius: self.collect_radius,
            penalty_radius: self.penalty_radius,
            clearance: self.clearance,
            min_sep: self.min_sep,
            reward_value: self.reward_value,
            penalty_value: self.penalty_value,
            boundary_t: self.boundary_t,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Min,
    Mean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConsensusModeArg {
    Reference,
    Union,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert an SVG of paths/polylines into a drawing document.
    ImportSvg {
        input: PathBuf,
        #[arg(long)]
        image_id: String,
        #[arg(long, default_value_t = DEFAULT_FLATTEN_TOL)]
        tolerance: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Render a drawing document to a binary PNG.
    Rasterize {
        drawing: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Summary statistics over every drawing of the dataset.
    Stats {
        #[command(flatten)]
        data: DataArg,
    },
    /// Stroke-level consensus of one image's drawings.
    Consensus {
        #[command(flatten)]
        data: DataArg,
        #[arg(long)]
        image: String,
        #[arg(long, default_value_t = 0.75)]
        rho: f64,
        #[arg(long, value_enum, default_value_t = ConsensusModeArg::Reference)]
        mode: ConsensusModeArg,
        /// Reference drawing index for `--mode reference`.
        #[arg(long, default_value_t = 0)]
        reference: usize,
        #[arg(long, default_value_t = Tolerance::DEFAULT_DIAGONAL_FRACTION)]
        tolerance_frac: f64,
        /// Repeat until no stroke is removed.
        #[arg(long)]
        fixpoint: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Benchmark predictions (`<id>.png` soft maps or `<id>.json` drawings)
    /// against ground-truth drawings (`<id>.json`).
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = Tolerance::DEFAULT_DIAGONAL_FRACTION)]
        tolerance_frac: f64,
        #[arg(long)]
        no_nms: bool,
        #[arg(long)]
        no_thin: bool,
        /// Per-threshold precision/recall table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Train the per-pixel toy model on the three-line fixture.
    ToyTrain {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, default_value_t = 100.0)]
        lr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the final prediction as a grayscale PNG.
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Print the full (unredacted) reward field of an image.
    GameField {
        #[command(flatten)]
        data: DataArg,
        #[arg(long)]
        image: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Replay a finished drawing through the game and report the verdict.
    Classify {
        #[command(flatten)]
        data: DataArg,
        drawing: PathBuf,
        /// Image to score against; defaults to the drawing's image_id.
        #[arg(long)]
        image: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Run the game service.
    Serve {
        #[command(flatten)]
        data: DataArg,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: f64,
        #[command(flatten)]
        game: GameArgs,
    },
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ConsensusReport {
    image_id: String,
    kept: Vec<Vec<usize>>,
    consensus: contourbench::stroke::Drawing,
}

#[derive(Serialize)]
struct EvalReport {
    n_images: usize,
    ods: contourbench::bench::OdsMetrics,
    ois: contourbench::bench::OisMetrics,
}

#[derive(Serialize)]
struct ClassifyReport {
    image_id: String,
    accepted: bool,
    fraction: f64,
}

fn eval_jobs(pred_dir: &Path, gt_dir: &Path) -> Result<Vec<(Prediction, contourbench::stroke::Drawing)>> {
    let mut jobs = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(gt_dir)
        .with_context(|| format!("reading {}", gt_dir.display()))?
        .collect::<std::io::Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let gt = read_drawing(&path)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).context("non-UTF-8 file name")?;
        let png = pred_dir.join(format!("{stem}.png"));
        let json = pred_dir.join(format!("{stem}.json"));
        let pred = if png.is_file() {
            Prediction::Soft(SoftMap::load_png(&png)?)
        } else if json.is_file() {
            Prediction::Drawing(read_drawing(&json)?)
        } else {
            bail!("no prediction for {stem} in {}", pred_dir.display());
        };
        jobs.push((pred, gt));
    }
    ensure!(!jobs.is_empty(), "no ground-truth drawings in {}", gt_dir.display());
    Ok(jobs)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ImportSvg { input, image_id, tolerance, output } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let d = import_svg_with_tolerance(&text, &image_id, tolerance)?;
            let doc = serialize_drawing(&d);
            match output {
                Some(p) => fs::write(&p, doc).with_context(|| format!("writing {}", p.display()))?,
                None => println!("{doc}"),
            }
        }
        Command::Rasterize { drawing, scale, output } => {
            let d = read_drawing(&drawing)?;
            rasterize_drawing(&d, scale)?.save_png(&output)?;
        }
        Command::Stats { data } => {
            let ds = Dataset::open(&data.root)?;
            let mut all = Vec::new();
            for id in ds.image_ids()? {
                all.extend(ds.drawings(&id)?);
            }
            emit(&drawing_stats(all.iter())?, None)?;
        }
        Command::Consensus { data, image, rho, mode, reference, tolerance_frac, fixpoint, output } => {
            let ds = Dataset::open(&data.root)?;
            let drawings = ds.drawings(&image)?;
            let first = drawings.first().with_context(|| format!("no drawings for {image}"))?;
            let tol = Tolerance::from_diagonal(first.width(), first.height(), tolerance_frac)?;
            let opts = ConsensusOptions {
                rho,
                mode: match mode {
                    ConsensusModeArg::Reference => ConsensusMode::Reference(reference),
                    ConsensusModeArg::Union => ConsensusMode::Union,
                },
                iterate_to_fixpoint: fixpoint,
            };
            let r = consensus_drawings(&drawings, &tol, &opts)?;
            let report = ConsensusReport { image_id: image, kept: r.kept, consensus: r.consensus_drawing };
            emit(&report, output.as_deref())?;
        }
        Command::Eval { pred, gt, tolerance_frac, no_nms, no_thin, csv } => {
            let jobs = eval_jobs(&pred, &gt)?;
            let opts = EvalOptions { nms: !no_nms, thin: !no_thin };
            let summary = aggregate(evaluate_many(&jobs, tolerance_frac, &default_thresholds(), &opts)?)?;
            if let Some(p) = csv {
                let f = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
                write_threshold_csv(&summary, std::io::BufWriter::new(f))?;
            }
            emit(&EvalReport { n_images: jobs.len(), ods: summary.ods, ois: summary.ois }, None)?;
        }
        Command::ToyTrain { mode, steps, lr, seed, png } => {
            let mode = match mode {
                ModeArg::Min => Aggregation::Min,
                ModeArg::Mean => Aggregation::Mean,
            };
            let cfg = TrainConfig { mode, steps, learning_rate: lr, seed };
            let ex = three_line_fixture();
            let model = train_toy(std::slice::from_ref(&ex), &cfg)?;
            if let Some(p) = png {
                let pred = model.predict(ex.input).context("fixture input has no parameters")?;
                pred.to_soft_map()?.save_png(&p)?;
            }
            emit(&ToyReport::new(&model, &ex, &cfg)?, None)?;
        }
        Command::GameField { data, image, seed, game } => {
            let ds = Dataset::open(&data.root)?;
            emit(&field_for_image(&ds, &image, &game.params(), seed)?, None)?;
        }
        Command::Classify { data, drawing, image, seed, cutoff, game } => {
            let ds = Dataset::open(&data.root)?;
            let d = read_drawing(&drawing)?;
            let image_id = image.unwrap_or_else(|| d.image_id().to_owned());
            let field = field_for_image(&ds, &image_id, &game.params(), seed)?;
            let v = classify_submission(&d, &field, cutoff)?;
            emit(
                &ClassifyReport {
                    image_id,
                    accepted: v.status == contourbench::game::SessionStatus::Accepted,
                    fraction: v.score_fraction,
                },
                None,
            )?;
        }
        Command::Serve { data, listen, cutoff, game } => {
            let cfg = ServiceConfig { dataset_root: data.root, listen, params: game.params(), cutoff };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(cfg))?;
        }
    }
    Ok(())
}
