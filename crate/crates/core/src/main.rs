use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use textgraph::eval::{aggregate, match_detections, prf, MatchResult, Prf};
use textgraph::io::{
    read_annotation, read_tmap, write_annotation, write_tmap, Config, DetectionFile,
};
use textgraph::labelgen::gen_label_maps;
use textgraph::losses::{loss_report, MapTriple, Reduction};
use textgraph::pipeline::{detect, PipelineError};
use textgraph::raster::{Channel, MapSet};
use textgraph::synth::{gen_scene, oracle_suite, perturb_maps, SceneSpec};

#[derive(Parser)]
#[command(
    name = "textgraph",
    version,
    about = "Graph-based text line detection from prediction maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Render training label maps from an annotation file.
    Labelgen {
        annotation: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect text lines in directories holding region/character/orientation maps.
    Detect {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output file (single input only); defaults to <input>/detections.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write synthetic scenes with their ideal maps.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the whole standard suite instead of one scene.
        #[arg(long)]
        suite: bool,
        /// Scene description as JSON; overrides the seeded suite.
        #[arg(long, conflicts_with = "suite")]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        blur: usize,
    },
    /// Score detections against annotations.
    Eval {
        /// Directories holding detections.json and annotation.txt.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        iou_thresh: f64,
        /// Also write the scores as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compute training losses between prediction and ground-truth maps.
    Loss {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Report per-pixel means instead of sums.
        #[arg(long)]
        mean: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Draw detection boxes over the region map as a PNG.
    Overlay {
        input: PathBuf,
        #[arg(long)]
        detections: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Invariant(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Invariant(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn load_config(args: &ConfigArgs) -> Result<Config, CliError> {
    let mut cfg = match &args.config {
        Some(p) => Config::from_file(p).map_err(input_err)?,
        None => Config::default(),
    };
    for (i, kv) in args.set.iter().enumerate() {
        cfg.apply_override(kv, i).map_err(input_err)?;
    }
    Ok(cfg)
}

fn read_maps(dir: &Path) -> Result<MapSet, CliError> {
    let load =
        |c: Channel| read_tmap(&dir.join(format!("{}.tmap", c.file_stem()))).map_err(input_err);
    MapSet::new(
        load(Channel::Region)?,
        load(Channel::Character)?,
        load(Channel::Orientation)?,
    )
    .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))
}

fn write_maps(maps: &MapSet, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    for c in Channel::ALL {
        write_tmap(maps.get(c), &dir.join(format!("{}.tmap", c.file_stem()))).map_err(input_err)?;
    }
    Ok(())
}

fn image_id(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

fn run_labelgen(annotation: &Path, out: &Path) -> Result<(), CliError> {
    let ann = read_annotation(annotation).map_err(input_err)?;
    let labels = gen_label_maps(&ann).map_err(input_err)?;
    let maps = MapSet::new(labels.region, labels.character, labels.orientation.map)
        .map_err(|e| CliError::Invariant(e.to_string()))?;
    write_maps(&maps, out)?;
    write_tmap(
        &labels.orientation.valid.to_raster(Channel::Region),
        &out.join("orientation_valid.tmap"),
    )
    .map_err(input_err)
}

fn detect_one(dir: &Path, cfg: &Config) -> Result<DetectionFile, CliError> {
    let maps = read_maps(dir)?;
    let report = detect(&maps, &cfg.detect_config()).map_err(|e| match e {
        PipelineError::ProtectedEdgeCut { .. } => CliError::Invariant(e.to_string()),
        other => CliError::Input(format!("{}: {other}", dir.display())),
    })?;
    log::info!("{}: {} detections", dir.display(), report.detections.len());
    Ok(DetectionFile::new(image_id(dir), &report.detections))
}

fn run_detect(
    inputs: &[PathBuf],
    out: Option<&Path>,
    jobs: usize,
    cfg: &Config,
) -> Result<(), CliError> {
    if out.is_some() && inputs.len() > 1 {
        return Err(CliError::Usage(
            "--out needs exactly one input directory".into(),
        ));
    }
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Invariant(e.to_string()))?;
    let results: Vec<Result<DetectionFile, CliError>> =
        pool.install(|| inputs.par_iter().map(|d| detect_one(d, cfg)).collect());
    for (dir, res) in inputs.iter().zip(results) {
        let file = res?;
        let path = out.map_or_else(|| dir.join("detections.json"), Path::to_path_buf);
        file.write(&path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn write_scene(spec: &SceneSpec, dir: &Path, sigma: f64, blur: usize) -> Result<(), CliError> {
    let scene = gen_scene(spec).map_err(input_err)?;
    let maps = if sigma > 0.0 || blur > 0 {
        perturb_maps(&scene.maps, sigma, blur, spec.seed)
    } else {
        scene.maps.clone()
    };
    write_maps(&maps, dir)?;
    write_annotation(&scene.annotation, &dir.join("annotation.txt")).map_err(input_err)?;
    let json =
        serde_json::to_string_pretty(spec).map_err(|e| CliError::Invariant(e.to_string()))?;
    fs::write(dir.join("spec.json"), json + "\n").map_err(input_err)
}

fn run_synth(
    out: &Path,
    seed: u64,
    suite: bool,
    spec: Option<&Path>,
    sigma: f64,
    blur: usize,
) -> Result<(), CliError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(CliError::Usage("--sigma must be non-negative".into()));
    }
    if let Some(p) = spec {
        let text =
            fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        let spec: SceneSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        return write_scene(&spec, out, sigma, blur);
    }
    let specs = oracle_suite(seed);
    if suite {
        for (k, s) in specs.iter().enumerate() {
            write_scene(s, &out.join(format!("scene_{k:03}")), sigma, blur)?;
        }
        Ok(())
    } else {
        write_scene(&specs[0], out, sigma, blur)
    }
}

#[derive(serde::Serialize)]
struct ImageScore {
    image_id: String,
    detections: usize,
    gts: usize,
    matched: usize,
    #[serde(flatten)]
    scores: Prf,
}

#[derive(serde::Serialize)]
struct EvalReport {
    iou_thresh: f64,
    images: Vec<ImageScore>,
    total: Prf,
}

fn run_eval(inputs: &[PathBuf], iou_thresh: f64, json: Option<&Path>) -> Result<(), CliError> {
    if !(iou_thresh > 0.0 && iou_thresh <= 1.0) {
        return Err(CliError::Usage("--iou-thresh must lie in (0, 1]".into()));
    }
    let mut matches: Vec<MatchResult> = Vec::new();
    let mut images = Vec::new();
    for dir in inputs {
        let dets = DetectionFile::read(&dir.join("detections.json")).map_err(input_err)?;
        let ann = read_annotation(&dir.join("annotation.txt")).map_err(input_err)?;
        let det_polys: Vec<_> = dets.detections.iter().map(|d| d.points()).collect();
        let gt_polys: Vec<_> = ann.regions().iter().map(|r| r.polygon.clone()).collect();
        let m = match_detections(&det_polys, &gt_polys, iou_thresh);
        images.push(ImageScore {
            image_id: dets.image_id.clone(),
            detections: m.detection_count(),
            gts: m.gt_count(),
            matched: m.pairs.len(),
            scores: prf(&m),
        });
        matches.push(m);
    }
    let report = EvalReport {
        iou_thresh,
        total: aggregate(&matches),
        images,
    };
    let mut table = format!(
        "{:<24} {:>5} {:>5} {:>5} {:>9} {:>9} {:>9}\n",
        "image", "dets", "gts", "match", "precision", "recall", "f"
    );
    let mut row = |name: &str, d: usize, g: usize, m: usize, s: &Prf| {
        writeln!(
            table,
            "{:<24} {:>5} {:>5} {:>5} {:>9.4} {:>9.4} {:>9.4}",
            name, d, g, m, s.precision, s.recall, s.f_measure
        )
        .unwrap();
    };
    for i in &report.images {
        row(&i.image_id, i.detections, i.gts, i.matched, &i.scores);
    }
    let (d, g, m) = report.images.iter().fold((0, 0, 0), |acc, i| {
        (acc.0 + i.detections, acc.1 + i.gts, acc.2 + i.matched)
    });
    row("total", d, g, m, &report.total);
    print!("{table}");
    if let Some(p) = json {
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Invariant(e.to_string()))?;
        fs::write(p, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn run_loss(pred: &Path, gt: &Path, mean: bool, cfg: &Config) -> Result<(), CliError> {
    cfg.weights.validate().map_err(input_err)?;
    let (p, g) = (read_maps(pred)?, read_maps(gt)?);
    let reduction = if mean {
        Reduction::Mean
    } else {
        Reduction::Sum
    };
    let report = loss_report(
        MapTriple::from(&p),
        MapTriple::from(&g),
        &cfg.weights,
        reduction,
    )
    .map_err(input_err)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Invariant(e.to_string()))?
    );
    Ok(())
}

fn draw_segment(img: &mut image::RgbImage, a: (f64, f64), b: (f64, f64), color: image::Rgb<u8>) {
    let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1) * 2;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let (x, y) = (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, color);
        }
    }
}

fn run_overlay(input: &Path, detections: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let region = read_tmap(&input.join("region.tmap")).map_err(input_err)?;
    let det_path = detections.map_or_else(|| input.join("detections.json"), Path::to_path_buf);
    let dets = DetectionFile::read(&det_path).map_err(input_err)?;
    let mut img = image::RgbImage::new(region.width() as u32, region.height() as u32);
    for y in 0..region.height() {
        for x in 0..region.width() {
            let v = (region.get(x, y) * 160.0).round() as u8;
            img.put_pixel(x as u32, y as u32, image::Rgb([v, v, v]));
        }
    }
    for d in &dets.detections {
        let color = match d.kind {
            textgraph::lines::DetectionKind::Line => image::Rgb([255, 40, 40]),
            textgraph::lines::DetectionKind::Word => image::Rgb([40, 220, 40]),
        };
        let p = &d.polygon;
        for k in 0..4 {
            let j = (k + 1) % 4;
            draw_segment(
                &mut img,
                (p[2 * k], p[2 * k + 1]),
                (p[2 * j], p[2 * j + 1]),
                color,
            );
        }
    }
    img.save(out)
        .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Labelgen { annotation, out } => run_labelgen(&annotation, &out),
        Command::Detect {
            inputs,
            out,
            jobs,
            config,
        } => run_detect(&inputs, out.as_deref(), jobs, &load_config(&config)?),
        Command::Synth {
            out,
            seed,
            suite,
            spec,
            sigma,
            blur,
        } => run_synth(&out, seed, suite, spec.as_deref(), sigma, blur),
        Command::Eval {
            inputs,
            iou_thresh,
            json,
        } => run_eval(&inputs, iou_thresh, json.as_deref()),
        Command::Loss {
            pred,
            gt,
            mean,
            config,
        } => run_loss(&pred, &gt, mean, &load_config(&config)?),
        Command::Overlay {
            input,
            detections,
            out,
        } => run_overlay(&input, detections.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
