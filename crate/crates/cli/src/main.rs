use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stanley_core::extrema::{
    self, curated_extrema, find_extrema, ExtremaKind, ExtremaSet, ExtremaSource, PeakConfig,
};
use stanley_core::figure::{self, FigureData, FigureId};
use stanley_core::regression::{self, FitInput};
use stanley_core::sequence::{self, GenerateOptions, SeedSet, Strategy};
use stanley_core::series::{self, SmoothingConfig};
use stanley_core::store::{self, LoadOptions, RunManifest};
use stanley_core::StanleySequence;

#[derive(Parser, Debug)]
#[command(
    name = "stanley",
    version,
    about = "Stanley sequence generation and growth-rate analysis"
)]
struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Only log warnings and errors; disables progress output.
    #[arg(long, global = true)]
    quiet: bool,

    /// Where to write the run manifest [default: <out-dir>/<command>.manifest.json].
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a sequence greedily from a seed set.
    Generate(GenerateArgs),
    /// Derive a series (ratio, windowed exponent or deviation) from a sequence.
    Analyze(AnalyzeArgs),
    /// Smooth a ratio series and tabulate its peaks and troughs.
    Extrema(ExtremaArgs),
    /// Fit the growth model to the peaks or troughs of an extrema table.
    Fit(FitArgs),
    /// Export plot-ready data and a figure spec.
    FigureData(FigureArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value = "0,4")]
    seed: SeedSet,
    #[arg(long, default_value_t = 20000)]
    length: usize,
    #[arg(long, default_value = "seq.csv")]
    out: PathBuf,
    #[arg(long, default_value = "bitset-scan")]
    strategy: Strategy,
    /// Log progress every this many terms (0 disables).
    #[arg(long, default_value_t = sequence::DEFAULT_PROGRESS_INTERVAL)]
    progress_interval: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Which {
    Ratio,
    Windowed,
    Deviation,
}

#[derive(Args, Debug)]
struct SequenceInput {
    /// Sequence CSV produced by `generate`.
    #[arg(long)]
    seq: PathBuf,
    /// Leading terms re-verified on load.
    #[arg(long, default_value_t = store::DEFAULT_VERIFY_PREFIX)]
    verify_prefix: usize,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: SequenceInput,
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long, default_value_t = series::DEFAULT_WINDOW)]
    window: usize,
    /// Output series CSV [default: <which>.csv].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExtremaArgs {
    /// Ratio series CSV produced by `analyze --which ratio`.
    #[arg(long)]
    series: PathBuf,
    #[arg(long, default_value_t = series::DEFAULT_SMOOTHING_LENGTH)]
    smoothing: usize,
    #[arg(long, default_value_t = extrema::DEFAULT_MIN_DISTANCE)]
    min_dist: usize,
    #[arg(long, default_value_t = extrema::DEFAULT_PEAK_PROMINENCE)]
    prom_peak: f64,
    #[arg(long, default_value_t = extrema::DEFAULT_TROUGH_PROMINENCE)]
    prom_trough: f64,
    /// Tabulate these hand-picked indices instead of the detected ones.
    #[arg(long, conflicts_with = "bundled_curated")]
    curated: Option<PathBuf>,
    /// Tabulate the curated indices shipped with the tool.
    #[arg(long)]
    bundled_curated: bool,
    #[arg(long, default_value = "extrema.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Extrema table with `r_raw` filled in.
    #[arg(long)]
    extrema: PathBuf,
    #[arg(long)]
    kind: ExtremaKind,
    /// Hold A fixed at this value and fit B and C only.
    #[arg(long = "fix-A", alias = "fix-a", value_name = "A")]
    fix_a: Option<f64>,
    /// Also refit without the last and without the first point.
    #[arg(long)]
    sweep: bool,
    /// Fit report JSON [default: fit_<kind>.json].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// windowed_exponent, peaks_troughs or deviation.
    #[arg(long)]
    figure: FigureId,
    #[command(flatten)]
    input: SequenceInput,
    #[arg(long, default_value_t = series::DEFAULT_WINDOW)]
    window: usize,
    #[arg(long, default_value_t = series::DEFAULT_SMOOTHING_LENGTH)]
    smoothing: usize,
    /// Extrema table to mark; detected with default settings when omitted.
    #[arg(long)]
    extrema: Option<PathBuf>,
    #[arg(long, default_value_t = figure::DEFAULT_SKIP)]
    skip: usize,
    /// Leave the reference lines off the deviation figure.
    #[arg(long)]
    no_annotations: bool,
    /// Figure-data CSV [default: <figure_id>.csv].
    #[arg(long)]
    out: Option<PathBuf>,
    /// FigureSpec JSON [default: <out stem>.spec.json].
    #[arg(long)]
    spec_out: Option<PathBuf>,
}

struct Run {
    out_dir: PathBuf,
    quiet: bool,
    manifest: RunManifest,
}

impl Run {
    fn output(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.out_dir.join(path)
        }
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest
            .add_input(path)
            .with_context(|| format!("hashing input {}", path.display()))
    }

    fn produced(&mut self, path: &Path) -> Result<()> {
        self.manifest
            .add_output(path)
            .with_context(|| format!("hashing output {}", path.display()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    let name = match &cli.command {
        Command::Generate(_) => "generate",
        Command::Analyze(_) => "analyze",
        Command::Extrema(_) => "extrema",
        Command::Fit(_) => "fit",
        Command::FigureData(_) => "figure-data",
    };
    std::fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let mut run = Run {
        out_dir: cli.out_dir.clone(),
        quiet: cli.quiet,
        manifest: RunManifest::new(name),
    };
    match cli.command {
        Command::Generate(a) => generate(&mut run, a)?,
        Command::Analyze(a) => analyze(&mut run, a)?,
        Command::Extrema(a) => extrema_cmd(&mut run, a)?,
        Command::Fit(a) => fit(&mut run, a)?,
        Command::FigureData(a) => figure_data(&mut run, a)?,
    }
    run.manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    let path = match cli.manifest {
        Some(p) => run.output(&p),
        None => run.out_dir.join(format!("{name}.manifest.json")),
    };
    run.manifest
        .write(&path)
        .with_context(|| format!("writing manifest {}", path.display()))?;
    log::info!("manifest written to {}", path.display());
    Ok(())
}

fn generate(run: &mut Run, a: GenerateArgs) -> Result<()> {
    let out = run.output(&a.out);
    let opts = GenerateOptions {
        strategy: a.strategy,
        progress_interval: NonZeroUsize::new(a.progress_interval).filter(|_| !run.quiet),
    };
    run.manifest
        .param("seed", a.seed.elements())
        .param("length", a.length)
        .param("strategy", a.strategy)
        .param("progress_interval", a.progress_interval);

    let t = Instant::now();
    let seq = sequence::generate(&a.seed, a.length, opts)?;
    let secs = t.elapsed().as_secs_f64();
    log::info!(
        "generated {} terms in {secs:.3}s; a_N = {}",
        seq.len(),
        seq.last()
    );

    store::save_sequence(&seq, &out, Some(secs))?;
    run.produced(&out)?;
    run.produced(&store::sidecar_path(&out))?;
    Ok(())
}

fn load_sequence(run: &mut Run, input: &SequenceInput) -> Result<StanleySequence> {
    let opts = LoadOptions {
        verify_prefix: input.verify_prefix,
        ..LoadOptions::default()
    };
    let seq = store::load_sequence(&input.seq, opts)
        .with_context(|| format!("loading sequence {}", input.seq.display()))?;
    run.input(&input.seq)?;
    run.manifest
        .param("seq", input.seq.display().to_string())
        .param("verify_prefix", input.verify_prefix);
    Ok(seq)
}

fn analyze(run: &mut Run, a: AnalyzeArgs) -> Result<()> {
    let seq = load_sequence(run, &a.input)?;
    let mut params: BTreeMap<String, Value> = BTreeMap::new();
    let s = match a.which {
        Which::Ratio => series::exponent_ratio(&seq)?,
        Which::Windowed => {
            params.insert("window".into(), json!(a.window));
            series::windowed_exponent(&seq, a.window)?
        }
        Which::Deviation => series::deviation_series(&seq)?,
    };
    let which = a.which.to_possible_value().expect("no skipped variants");
    run.manifest.param("which", which.get_name());
    for (k, v) in &params {
        run.manifest.param(k, v);
    }
    let out = run.output(
        &a.out
            .unwrap_or_else(|| format!("{}.csv", which.get_name()).into()),
    );
    let source = store::sha256_file(&a.input.seq)?;
    store::save_series(&s, &out, Some(source), params)?;
    log::info!(
        "{} points, k = {:?}..={:?}",
        s.len(),
        s.first_k(),
        s.last_k()
    );
    run.produced(&out)?;
    run.produced(&store::sidecar_path(&out))?;
    Ok(())
}

fn extrema_cmd(run: &mut Run, a: ExtremaArgs) -> Result<()> {
    let raw = store::load_series(&a.series)
        .with_context(|| format!("loading series {}", a.series.display()))?;
    run.input(&a.series)?;
    let smoothing = SmoothingConfig::new(a.smoothing)?;
    let smooth = series::moving_average(&raw, &smoothing)?;
    run.manifest
        .param("series", a.series.display().to_string())
        .param("smoothing", a.smoothing);

    let set = if let Some(path) = &a.curated {
        let rows = store::load_extrema(path)
            .with_context(|| format!("loading curated table {}", path.display()))?;
        run.input(path)?;
        run.manifest.param("curated", path.display().to_string());
        ExtremaSet::from_rows(&rows, ExtremaSource::Manual)?
    } else if a.bundled_curated {
        run.manifest.param("curated", "bundled");
        curated_extrema()
    } else {
        let peaks = PeakConfig::new(a.min_dist, a.prom_peak)?;
        let troughs = PeakConfig::new(a.min_dist, a.prom_trough)?;
        run.manifest
            .param("min_dist", a.min_dist)
            .param("prom_peak", a.prom_peak)
            .param("prom_trough", a.prom_trough);
        find_extrema(&smooth, &peaks, &troughs)
    };
    let rows = extrema::extrema_values(&set, &smooth, &raw)?;
    log::info!(
        "{} peaks, {} troughs",
        set.peaks().len(),
        set.troughs().len()
    );

    let out = run.output(&a.out);
    store::save_extrema(&rows, &out)?;
    run.produced(&out)?;
    Ok(())
}

fn fit(run: &mut Run, a: FitArgs) -> Result<()> {
    let rows = store::load_extrema(&a.extrema)
        .with_context(|| format!("loading extrema {}", a.extrema.display()))?;
    run.input(&a.extrema)?;
    let mut points = Vec::new();
    for row in rows.iter().filter(|r| r.kind == a.kind) {
        let Some(r) = row.r_raw else {
            bail!(
                "{}: {} at k = {} has no r_raw value; run `extrema` first",
                a.extrema.display(),
                row.kind,
                row.k
            );
        };
        points.push((row.k, r));
    }
    let input = FitInput::new(a.kind.as_str(), points)?;
    run.manifest
        .param("extrema", a.extrema.display().to_string())
        .param("kind", a.kind.as_str())
        .param("fix_A", a.fix_a)
        .param("sweep", a.sweep);

    let report = if a.sweep {
        let fits = regression::robustness_sweep(&input, a.fix_a)?;
        serde_json::to_value(fits)?
    } else {
        serde_json::to_value(regression::fit_growth_model(&input, a.fix_a)?)?
    };
    let out = run.output(
        &a.out
            .unwrap_or_else(|| format!("fit_{}.json", a.kind).into()),
    );
    store::write_json(&out, &report)?;
    log::info!("fit report written to {}", out.display());
    run.produced(&out)?;
    Ok(())
}

fn figure_data(run: &mut Run, a: FigureArgs) -> Result<()> {
    let seq = load_sequence(run, &a.input)?;
    run.manifest.param("figure", a.figure.as_str());
    let data: FigureData = match a.figure {
        FigureId::WindowedExponent => {
            run.manifest.param("window", a.window);
            figure::windowed_exponent_figure(&seq, a.window)?
        }
        FigureId::Deviation => {
            let annotations = if a.no_annotations {
                Vec::new()
            } else {
                figure::default_annotations()
            };
            run.manifest.param("skip", a.skip);
            figure::deviation_figure(&seq, a.skip, annotations)?
        }
        FigureId::PeaksTroughs => {
            let smoothing = SmoothingConfig::new(a.smoothing)?;
            let set = match &a.extrema {
                Some(path) => {
                    let rows = store::load_extrema(path)
                        .with_context(|| format!("loading extrema {}", path.display()))?;
                    run.input(path)?;
                    run.manifest.param("extrema", path.display().to_string());
                    ExtremaSet::from_rows(&rows, ExtremaSource::Manual)?
                }
                None => {
                    let raw = series::exponent_ratio(&seq)?;
                    let smooth = series::moving_average(&raw, &smoothing)?;
                    find_extrema(
                        &smooth,
                        &PeakConfig::default_peaks(),
                        &PeakConfig::default_troughs(),
                    )
                }
            };
            run.manifest
                .param("smoothing", a.smoothing)
                .param("skip", a.skip);
            figure::peaks_troughs_figure(&seq, &smoothing, &set, a.skip)?
        }
    };
    let out = run.output(&a.out.unwrap_or_else(|| format!("{}.csv", a.figure).into()));
    let spec_out = match a.spec_out {
        Some(p) => run.output(&p),
        None => out.with_extension("spec.json"),
    };
    data.save(&out, &spec_out)?;
    log::info!("{} rows in layers {:?}", data.rows.len(), data.spec.layers);
    run.produced(&out)?;
    run.produced(&spec_out)?;
    Ok(())
}
