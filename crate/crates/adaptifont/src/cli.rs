//! Command-line surface for offline workflows and the service.

use std::fs;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use adaptifont_core::analysis::{analyze, centroid_font, labeled_points, AnalysisReport, ClusterOptions};
use adaptifont_core::fontgen::{build_font, interpolate, BuildOptions, FontCoordinates, FontGenError};
use adaptifont_core::fontspace::{
    assemble_matrix, cross_validate, nmf, AlignmentScale, CvOptions, FontBasis, NmfOptions,
};
use adaptifont_core::session::{
    replay_proposals, simulate_session, synthetic_texts, OracleConfig, ReplayReport, Session, SessionConfig,
    SessionMode,
};
use adaptifont_core::synthetic::synthetic_corpus;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{
    ingest_corpus, read_basis, read_corpus, read_trial_log, svg_font, write_atlas, write_basis, write_corpus,
    write_trace, write_trial_log,
};
use crate::service::{serve, system_clock, ServiceConfig};
use crate::store::SessionStore;

#[derive(Debug, Parser)]
#[command(
    name = "adaptifont",
    version,
    about = "Learn font spaces, synthesize fonts and optimize them for reading speed"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a font space from a directory of atlases.
    Learn(LearnArgs),
    /// Cross-validate the number of components with Wold holdouts.
    Cv(CvArgs),
    /// Build the font at one point of the space as an SVG font.
    Synth(SynthArgs),
    /// Build fonts at evenly spaced points between two coordinates.
    Interpolate(InterpolateArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Run a session against a simulated reader and write its trial log.
    Simulate(SimulateArgs),
    /// Cluster the trials of a log and report the fastest cluster.
    Analyze(AnalyzeArgs),
    /// Replay the optimizer over a trial log and check every proposal.
    Trace(TraceArgs),
    /// Render a procedural stroke-font atlas corpus.
    SynthCorpus(SynthCorpusArgs),
    /// Write a generated text corpus.
    Texts(TextsArgs),
}

/// Three comma-separated coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordsArg(pub FontCoordinates);

impl FromStr for CoordsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [a, b, c] if v.iter().all(|x| x.is_finite()) => Ok(Self(FontCoordinates::new(a, b, c))),
            _ => Err("expected three finite numbers, e.g. 5,5,5".into()),
        }
    }
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Directory of `<name>.pgm` + `<name>.json` atlas pairs.
    #[arg(long)]
    pub atlases: PathBuf,
    #[arg(short, long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Divisor for alignment metrics; each font's units per em when absent.
    #[arg(long)]
    pub alignment_scale: Option<f64>,
    /// Rescale so corpus fonts have this mean coordinate sum (0 keeps raw units).
    #[arg(long, default_value_t = 13.5)]
    pub coord_sum: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub atlases: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub k_max: usize,
    #[arg(long, default_value_t = 10)]
    pub holdouts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long)]
    pub alignment_scale: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FontArgs {
    #[arg(long)]
    pub basis: PathBuf,
    /// Build even outside the feasible region.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

impl FontArgs {
    fn options(&self) -> BuildOptions {
        BuildOptions {
            threshold: self.threshold,
            force: self.force,
            ..BuildOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub coords: CoordsArg,
    #[command(flatten)]
    pub font: FontArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub from: CoordsArg,
    #[arg(long)]
    pub to: CoordsArg,
    /// Number of fonts, endpoints included.
    #[arg(long, default_value_t = 5)]
    pub steps: usize,
    #[command(flatten)]
    pub font: FontArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long)]
    pub basis: PathBuf,
    /// Text corpus JSON; generated texts when absent.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Default session configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Persistence root; overrides ADAPTIFONT_DATA_DIR.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Session configuration JSON; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Simulated reader JSON; missing fields take defaults.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the optimizer trace as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub min_pts: usize,
    #[arg(long, default_value_t = 0.05)]
    pub xi: f64,
    /// Cluster in raw units instead of z-scores.
    #[arg(long)]
    pub raw: bool,
    /// With --fonts-dir, writes one centroid font per cluster.
    #[arg(long, requires = "fonts_dir")]
    pub basis: Option<PathBuf>,
    #[arg(long, requires = "basis")]
    pub fonts_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthCorpusArgs {
    #[arg(long, default_value_t = 25)]
    pub fonts: usize,
    #[arg(long, default_value_t = 40)]
    pub point_size: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TextsArgs {
    #[arg(long, default_value_t = 95)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Reads a JSON object and lays it over the defaults of `T`.
pub fn read_partial<T: Serialize + DeserializeOwned>(path: &Path, defaults: &T) -> Result<T> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let patch: serde_json::Value = serde_json::from_str(&text).map_err(Error::json(path))?;
    let serde_json::Value::Object(patch) = patch else {
        return Err(Error::Format(format!("{}: expected a JSON object", path.display())));
    };
    let mut base = serde_json::to_value(defaults).map_err(Error::json(path))?;
    base.as_object_mut()
        .expect("defaults serialize to an object")
        .extend(patch);
    serde_json::from_value(base).map_err(Error::json(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).map_err(Error::json(path))?;
    fs::write(path, json).map_err(Error::io(path))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))
}

fn alignment(scale: Option<f64>) -> AlignmentScale {
    scale.map_or(AlignmentScale::UnitsPerEm, AlignmentScale::Fixed)
}

pub fn learn(args: &LearnArgs) -> Result<FontBasis> {
    let atlases = ingest_corpus(&args.atlases)?;
    let (x, layout) = assemble_matrix(&atlases, alignment(args.alignment_scale))?;
    let opts = NmfOptions {
        max_iter: args.max_iter,
        tol: args.tol,
        seed: args.seed,
    };
    let fit = nmf(&x, args.k, None, &opts)?;
    log::info!(
        "k = {}: relative error {:.4} after {} iterations",
        args.k,
        fit.relative_error(&x),
        fit.objective_history.len()
    );
    let names = atlases.iter().map(|a| a.font_name().to_string()).collect();
    let mut basis = FontBasis::new(fit, layout, names)?;
    if args.coord_sum > 0.0 {
        basis.normalize_coordinate_scale(args.coord_sum);
    }
    write_basis(&args.out, &basis)?;
    Ok(basis)
}

fn cv(args: &CvArgs) -> Result<()> {
    let atlases = ingest_corpus(&args.atlases)?;
    let (x, _) = assemble_matrix(&atlases, alignment(args.alignment_scale))?;
    let opts = CvOptions {
        ks: (1..=args.k_max).collect(),
        n_holdouts: args.holdouts,
        seed: args.seed,
        nmf: NmfOptions {
            max_iter: args.max_iter,
            ..NmfOptions::default()
        },
    };
    let report = cross_validate(&x, &opts)?;
    for (i, k) in report.ks.iter().enumerate() {
        println!(
            "k = {k}: held-out error {:.6} ± {:.6}",
            report.mean[i], report.std_dev[i]
        );
    }
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    let basis = read_basis(&args.font.basis)?;
    let font = build_font(&args.coords.0, &basis, &args.font.options()).map_err(|e| match e {
        FontGenError::Infeasible(_) => Error::Format(format!("{e}; pass --force to build it anyway")),
        other => other.into(),
    })?;
    fs::write(&args.out, svg_font(&font)).map_err(Error::io(&args.out))
}

fn interpolate_fonts(args: &InterpolateArgs) -> Result<()> {
    if args.steps < 2 {
        return Err(Error::Format("--steps must be at least 2".into()));
    }
    let basis = read_basis(&args.font.basis)?;
    create_dir(&args.out_dir)?;
    for i in 0..args.steps {
        let t = i as f64 / (args.steps - 1) as f64;
        let c = interpolate(&args.from.0, &args.to.0, t)?;
        let font = build_font(&c, &basis, &args.font.options())?;
        let path = args.out_dir.join(format!("step_{i:02}.svg"));
        fs::write(&path, svg_font(&font)).map_err(Error::io(&path))?;
    }
    Ok(())
}

fn run_serve(args: &ServeArgs) -> Result<()> {
    let store = match &args.data_dir {
        Some(d) => SessionStore::open(d)?,
        None => SessionStore::from_env()?,
    };
    let basis = read_basis(&args.basis)?;
    let texts = match &args.corpus {
        Some(p) => read_corpus(p)?,
        None => synthetic_texts(95, 0),
    };
    let defaults = match &args.config {
        Some(p) => read_partial(p, &SessionConfig::default())?,
        None => SessionConfig::default(),
    };
    let config = ServiceConfig {
        basis: Arc::new(basis),
        texts,
        defaults,
        build: BuildOptions::default(),
        store,
        clock: system_clock(),
    };
    let runtime = tokio::runtime::Runtime::new().map_err(Error::io("tokio runtime"))?;
    runtime.block_on(serve(config, SocketAddr::from((Ipv4Addr::UNSPECIFIED, args.port))))
}

/// The session configuration and simulated reader of `simulate`.
pub fn simulation_setup(args: &SimulateArgs) -> Result<(SessionConfig, OracleConfig)> {
    let mut config = match &args.config {
        Some(p) => read_partial(p, &SessionConfig::default())?,
        None => SessionConfig::default(),
    };
    if let Some(p) = &args.corpus {
        config.texts = read_corpus(p)?;
    }
    if let Some(n) = args.trials {
        config.n_trials = n;
    }
    if config.texts.is_empty() {
        config.texts = synthetic_texts(config.n_trials, 0);
    }
    config.seed = args.seed;
    config.mode = SessionMode::Simulated;
    let mut oracle = match &args.oracle {
        Some(p) => read_partial(p, &OracleConfig::default())?,
        None => OracleConfig::default(),
    };
    oracle.seed = args.seed;
    Ok((config, oracle))
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let (config, oracle) = simulation_setup(args)?;
    let out = simulate_session(format!("sim-{}", args.seed), config, &oracle)?;
    write_trial_log(&args.out, &out.events)?;
    if let Some(trace) = &args.trace {
        write_trace(trace, out.session.trace())?;
    }
    let best = out.session.history().iter().map(|r| r.wpm).fold(0.0, f64::max);
    println!(
        "{} trials, {} resets, best {best:.1} wpm",
        out.session.completed_trials(),
        out.session.resets()
    );
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CentroidFontEntry {
    pub cluster: usize,
    pub path: PathBuf,
    pub forced: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    #[serde(flatten)]
    pub report: AnalysisReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub centroid_fonts: Vec<CentroidFontEntry>,
}

fn run_analyze(args: &AnalyzeArgs) -> Result<()> {
    let events = read_trial_log(&args.log)?;
    let opts = ClusterOptions {
        min_pts: args.min_pts,
        xi: args.xi,
        standardize: !args.raw,
        ..ClusterOptions::default()
    };
    let report = analyze(&labeled_points(&events), &opts)?;
    let mut centroid_fonts = Vec::new();
    if let (Some(basis), Some(dir)) = (&args.basis, &args.fonts_dir) {
        let basis = read_basis(basis)?;
        create_dir(dir)?;
        for (i, cluster) in report.clusters.iter().enumerate() {
            let font = centroid_font(cluster, &basis, &BuildOptions::default())?;
            let path = dir.join(format!("cluster_{i:02}.svg"));
            fs::write(&path, svg_font(&font)).map_err(Error::io(&path))?;
            centroid_fonts.push(CentroidFontEntry {
                cluster: i,
                path,
                forced: font.forced,
            });
        }
    }
    println!(
        "{} points, {} clusters, {} noise",
        report.n_points,
        report.clusters.len(),
        report.n_noise
    );
    write_json(&args.out, &AnalyzeOutput { report, centroid_fonts })
}

fn run_trace(args: &TraceArgs) -> Result<ReplayReport> {
    let events = read_trial_log(&args.log)?;
    let report = replay_proposals(&events)?;
    if let Some(out) = &args.out {
        let session = Session::from_events(&events)?;
        write_trace(out, session.trace())?;
    }
    println!(
        "{} proposals replayed over {} observations, {} mismatches",
        report.proposals,
        report.observations,
        report.mismatches.len()
    );
    Ok(report)
}

fn synth_corpus(args: &SynthCorpusArgs) -> Result<()> {
    create_dir(&args.out_dir)?;
    for (i, font) in synthetic_corpus(args.fonts, args.point_size, args.seed)?
        .iter()
        .enumerate()
    {
        write_atlas(&args.out_dir, &format!("font_{i:02}"), &font.atlas)?;
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Learn(a) => learn(a).map(|_| ()),
        Command::Cv(a) => cv(a),
        Command::Synth(a) => synth(a),
        Command::Interpolate(a) => interpolate_fonts(a),
        Command::Serve(a) => run_serve(a),
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Trace(a) => {
            return run_trace(a).map(|r| {
                if r.is_exact() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(3)
                }
            });
        }
        Command::SynthCorpus(a) => synth_corpus(a),
        Command::Texts(a) => write_corpus(&a.out, &synthetic_texts(a.count, a.seed)),
    }
    .map(|()| ExitCode::SUCCESS)
}

pub fn run() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
