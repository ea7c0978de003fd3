//! `betti`: command-line driver for each pipeline stage.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on data errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use betti_core::estimator::GridSpec;
use betti_core::harness::{
    self, build_manifest, calibrate_manifest, evaluate, read_calibrations, read_manifest, read_report, run_ph_eval,
    split_manifest, write_calibrations, write_manifest, write_report, CalibrationMode, CorruptOptions, DiagramCache,
    EvalConfig, ManifestRecord,
};
use betti_core::noise::{self, NoiseLevel, PresetTable, Profile};
use betti_core::persistence;
use betti_core::preprocess::{binarize_clean_with, load_gray};
use betti_core::raster::{betti_labels, load_image, save_image, write_label_csv};
use betti_core::synth::{generate_dataset, SynthConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "betti", version, about = "Betti number estimation benchmark for noisy binary images")]
struct Cli {
    /// Base seed for every random stage.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic Voronoi dataset.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 512)]
        size: usize,
    },
    /// Binarize grayscale images (Otsu, open, close, invert).
    Preprocess {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Disk radius for opening and closing.
        #[arg(long, default_value_t = 3)]
        radius: u32,
    },
    /// Compute ground-truth labels for `<dir>/images/*` and write
    /// `labels.csv` and `manifest.jsonl`.
    Label {
        dir: PathBuf,
        #[arg(long, default_value = "custom")]
        dataset: String,
    },
    /// Apply the noise protocol to a labeled clean dataset or to one image.
    Corrupt(CorruptArgs),
    /// Write persistence diagrams as `<id>.pd.csv`.
    Diagram {
        /// Binary images; ignored when --manifest is given.
        inputs: Vec<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value = persistence::DEFAULT_ENGINE)]
        engine: String,
    },
    /// Grid-search window parameters per dataset, level and dimension.
    Calibrate {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Score a calibration file on the test split.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        calibration: PathBuf,
        #[arg(long, default_value = persistence::DEFAULT_ENGINE)]
        engine: String,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Calibrate and score in one step.
    EvalPh {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Merge report CSVs into level-vs-MAE plot series.
    PlotData {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long)]
    profile: Profile,
    /// Labeled clean dataset directory.
    #[arg(long, conflicts_with = "input")]
    clean: Option<PathBuf>,
    /// Single image to corrupt (requires --level).
    #[arg(long, requires = "level")]
    input: Option<PathBuf>,
    #[arg(long)]
    level: Option<NoiseLevel>,
    /// Levels to generate for a dataset.
    #[arg(long, value_delimiter = ',', default_value = "N0,N1,N2,N3,N4")]
    levels: Vec<NoiseLevel>,
    /// Noise model name; defaults to the profile's model.
    #[arg(long)]
    model: Option<String>,
    /// Preset table replacing the shipped one.
    #[arg(long)]
    presets: Option<PathBuf>,
    /// Train/val/test ratios.
    #[arg(long, value_delimiter = ',', default_value = "0.7,0.15,0.15")]
    split: Vec<f64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Calibrate on the test split instead of validation.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = GridSpec::default().points)]
    points: usize,
    #[arg(long, default_value_t = GridSpec::default().birth_low_pct)]
    birth_low_pct: f64,
    #[arg(long, default_value_t = GridSpec::default().birth_high_pct)]
    birth_high_pct: f64,
    #[arg(long, default_value_t = GridSpec::default().pers_high_pct)]
    pers_high_pct: f64,
    #[arg(long, default_value = persistence::DEFAULT_ENGINE)]
    engine: String,
    /// Directory memoizing diagrams by image content.
    #[arg(long)]
    cache: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<betti_core::Error> for Failure {
    fn from(e: betti_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn out_dir(cli_out: &Option<PathBuf>) -> Result<&Path, Failure> {
    cli_out.as_deref().ok_or_else(|| usage("--out is required for this command"))
}

fn engine(name: &str) -> Result<&'static dyn persistence::PersistenceEngine, Failure> {
    persistence::engine(name).map_err(|e| usage(e.to_string()))
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn manifest_base(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn eval_config(args: &EvalArgs) -> Result<EvalConfig, Failure> {
    if args.points == 0 {
        return Err(usage("--points must be at least 1"));
    }
    Ok(EvalConfig {
        grid: GridSpec {
            points: args.points,
            birth_low_pct: args.birth_low_pct,
            birth_high_pct: args.birth_high_pct,
            pers_high_pct: args.pers_high_pct,
        },
        mode: if args.oracle { CalibrationMode::Oracle } else { CalibrationMode::Validation },
        cache: DiagramCache::new(engine(&args.engine)?, args.cache.clone()),
    })
}

fn image_stem(path: &Path) -> anyhow::Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| anyhow!("cannot derive an id from {}", path.display()))
}

fn list_images(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("png" | "pgm")));
    paths.sort();
    Ok(paths)
}

fn corrupt(cli: &Cli, args: &CorruptArgs) -> Outcome {
    let out = out_dir(&cli.out)?;
    let presets = match &args.presets {
        Some(p) => PresetTable::load(p)?,
        None => PresetTable::builtin(),
    };
    let model = match &args.model {
        Some(name) => noise::model(name).map_err(|e| usage(e.to_string()))?,
        None => noise::default_model(args.profile),
    };
    if let Some(input) = &args.input {
        let level = args.level.expect("clap enforces --level with --input");
        let img = load_image(input)?;
        let preset = presets.get(args.profile, level)?;
        let noisy = noise::apply_with(model, &img, &preset, cli.seed)?;
        create_dir(out)?;
        let dest = out.join(format!("{}_{level}.png", image_stem(input)?));
        save_image(&noisy, &dest)?;
        println!("{}", dest.display());
        return Ok(());
    }
    let clean = args.clean.as_ref().ok_or_else(|| usage("corrupt needs --clean <dir> or --input <image>"))?;
    let [tr, va, te] = args.split[..] else {
        return Err(usage("--split takes three comma-separated ratios"));
    };
    let opts = CorruptOptions {
        profile: args.profile,
        levels: args.levels.clone(),
        presets,
        model,
        seed: cli.seed,
    };
    let mut records = build_manifest(clean, out, &opts)?;
    split_manifest(&mut records, (tr, va, te), cli.seed)?;
    write_manifest(out.join("manifest.jsonl"), &records)?;
    println!("{} records -> {}", records.len(), out.join("manifest.jsonl").display());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Data(e.into()))?;
    }
    match &cli.command {
        Command::Synth { n, size } => {
            let out = out_dir(&cli.out)?;
            let cfg = SynthConfig { image_size: *size, seed: cli.seed, ..SynthConfig::default() };
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let records = generate_dataset(&cfg, *n, out)?;
            println!("{} samples -> {}", records.len(), out.display());
        }
        Command::Preprocess { inputs, radius } => {
            let out = out_dir(&cli.out)?.join("images");
            create_dir(&out)?;
            for input in inputs {
                let gray = load_gray(input)?;
                let mask = binarize_clean_with(&gray, *radius).with_context(|| input.display().to_string())?;
                save_image(&mask, out.join(format!("{}.png", image_stem(input)?)))?;
            }
            println!("{} images -> {}", inputs.len(), out.display());
        }
        Command::Label { dir, dataset } => {
            let out = cli.out.clone().unwrap_or_else(|| dir.clone());
            let mut records = Vec::new();
            for path in list_images(&dir.join("images"))? {
                let id = image_stem(&path)?;
                let labels = betti_labels(&load_image(&path)?);
                let rel = PathBuf::from("images").join(path.file_name().expect("listed files have names"));
                let seed = betti_core::seed::hash_str(&id);
                records.push(ManifestRecord::clean(id, rel, dataset, labels, seed));
            }
            if records.is_empty() {
                return Err(Failure::Data(anyhow!("no images in {}", dir.join("images").display())));
            }
            create_dir(&out)?;
            write_label_csv(out.join("labels.csv"), records.iter().map(|r| (r.id.as_str(), r.labels())))?;
            if out == *dir {
                write_manifest(out.join("manifest.jsonl"), &records)?;
            }
            for r in &records {
                println!("{},{},{}", r.id, r.beta0, r.beta1);
            }
        }
        Command::Corrupt(args) => corrupt(&cli, args)?,
        Command::Diagram { inputs, manifest, engine: name } => {
            let out = out_dir(&cli.out)?;
            let cache = DiagramCache::new(engine(name)?, None);
            create_dir(out)?;
            let diagrams = match manifest {
                Some(m) => {
                    let records = read_manifest(m)?;
                    let refs: Vec<&ManifestRecord> = records.iter().collect();
                    cache.diagrams(&refs, &manifest_base(m))?
                }
                None if inputs.is_empty() => return Err(usage("diagram needs images or --manifest")),
                None => inputs
                    .iter()
                    .map(|p| Ok(cache.diagram_for_image(&image_stem(p)?, &load_image(p)?)?))
                    .collect::<anyhow::Result<Vec<_>>>()?,
            };
            for d in &diagrams {
                d.write_to_dir(out)?;
            }
            println!("{} diagrams -> {}", diagrams.len(), out.display());
        }
        Command::Calibrate { manifest, eval } => {
            let out = out_dir(&cli.out)?;
            let cfg = eval_config(eval)?;
            let results = calibrate_manifest(&read_manifest(manifest)?, &manifest_base(manifest), &cfg)?;
            create_dir(out)?;
            write_calibrations(out.join("calibration.csv"), &results)?;
            print!("{}", harness::calibrations_to_csv(&results)?);
        }
        Command::Report { manifest, calibration, engine: name, cache } => {
            let out = out_dir(&cli.out)?;
            let cache = DiagramCache::new(engine(name)?, cache.clone());
            let rows = evaluate(&read_manifest(manifest)?, &manifest_base(manifest), &read_calibrations(calibration)?, &cache)?;
            create_dir(out)?;
            write_report(out.join("report.csv"), &rows)?;
            print!("{}", harness::report_to_csv(&rows)?);
        }
        Command::EvalPh { manifest, eval } => {
            let out = out_dir(&cli.out)?;
            let cfg = eval_config(eval)?;
            let (cal, rows) = run_ph_eval(&read_manifest(manifest)?, &manifest_base(manifest), &cfg)?;
            create_dir(out)?;
            write_calibrations(out.join("calibration.csv"), &cal)?;
            write_report(out.join("report.csv"), &rows)?;
            print!("{}", harness::report_to_csv(&rows)?);
        }
        Command::PlotData { reports } => {
            let out = out_dir(&cli.out)?;
            let mut rows = Vec::new();
            for r in reports {
                rows.extend(read_report(r)?);
            }
            let text = harness::emit_plot_data(&rows)?;
            create_dir(out)?;
            let dest = out.join("plot_data.csv");
            fs::write(&dest, &text).with_context(|| dest.display().to_string())?;
            print!("{text}");
        }
    }
    Ok(())
}

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
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn profiles_and_levels_parse_from_flags() {
        let cli = Cli::try_parse_from(["betti", "corrupt", "--profile", "cem-like", "--input", "a.png", "--level", "N3"]).unwrap();
        let Command::Corrupt(args) = cli.command else { panic!("expected corrupt") };
        assert_eq!(args.profile, Profile::CemLike);
        assert_eq!(args.level, Some(NoiseLevel::N3));
        assert!(Cli::try_parse_from(["betti", "corrupt", "--profile", "mnist"]).is_err());
        assert!(Cli::try_parse_from(["betti", "corrupt", "--profile", "voronoi", "--input", "a.png"]).is_err());
    }

    #[test]
    fn missing_out_is_a_usage_error() {
        let cli = Cli::try_parse_from(["betti", "synth", "--n", "1"]).unwrap();
        assert!(matches!(run(cli), Err(Failure::Usage(_))));
    }
}
