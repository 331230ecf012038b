//! The `gkpca` command: fit models, walk their latent space, score novelty
//! and serve them over HTTP.

pub mod config;
pub mod render;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use gkpca::config::DATA_DIR_ENV;
use gkpca::generator::decode_points;
use gkpca::ingest::{load_csv, CsvOptions};
use gkpca::manifest::{ManifestStep, TraversalManifest, MANIFEST_VERSION};
use gkpca::novelty::DEFAULT_QUANTILE;
use gkpca::{archive, novelty_report, novelty_report_training, KpcaModel, LatentRef, PathSpec};

use crate::config::FitSettings;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(gkpca::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Run(e) => e.category(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error:usage: {m}"),
            CliError::Run(e) => write!(f, "error:{}: {e}", e.category()),
        }
    }
}

impl From<gkpca::Error> for CliError {
    fn from(e: gkpca::Error) -> Self {
        CliError::Run(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Run(gkpca::Error::Io(e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "gkpca", version, about = "Generative kernel PCA")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write it to a file.
    Fit(FitArgs),
    /// Decode a path through latent space into sample files.
    Traverse(TraverseArgs),
    /// Score novelty and flag the top quantile.
    Novelty(NoveltyArgs),
    /// Serve models over the HTTP JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// `key = value` file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = ["mnist", "csv", "ecg"])]
    pub data: Option<String>,
    /// IDX image file (MNIST).
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// IDX label file (MNIST).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// CSV file, or an ECG record as PATH or PATH=LABEL. Repeatable.
    #[arg(long = "input")]
    pub inputs: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub digits: Vec<u8>,
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Last CSV column is an integer label.
    #[arg(long)]
    pub has_labels: bool,
    #[arg(long)]
    pub has_header: bool,
    /// Column of comma-separated ECG input holding the samples.
    #[arg(long)]
    pub column: Option<usize>,
    #[arg(long, value_parser = ["gaussian", "laplace", "polynomial"])]
    pub kernel: Option<String>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long)]
    pub offset: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl FitArgs {
    fn settings(&self) -> FitSettings {
        FitSettings {
            data: self.data.clone(),
            images: self.images.clone(),
            labels: self.labels.clone(),
            inputs: (!self.inputs.is_empty()).then(|| self.inputs.clone()),
            digits: (!self.digits.is_empty()).then(|| self.digits.clone()),
            per_class: self.per_class,
            has_labels: self.has_labels.then_some(true),
            has_header: self.has_header.then_some(true),
            column: self.column,
            kernel: self.kernel.clone(),
            sigma2: self.sigma2,
            sigma: self.sigma,
            degree: self.degree,
            offset: self.offset,
            d: self.d,
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("path").required(true).args(["component", "interpolate", "manifest"])))]
pub struct TraverseArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Sweep this component (numbered from 1).
    #[arg(long, requires_all = ["from", "to"])]
    pub component: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    /// Start the sweep at this training point's hidden unit instead of the origin.
    #[arg(long, requires = "component")]
    pub start: Option<usize>,
    /// Interpolate between the hidden units of two training points, `I,J`.
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "I,J")]
    pub interpolate: Option<Vec<usize>>,
    /// Replay the latent points of a manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Neighbours in the pre-image (default 15, or the manifest's value).
    #[arg(long = "S", value_name = "S")]
    pub s: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NoveltyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_QUANTILE)]
    pub quantile: f64,
    /// Score the rows of this CSV instead of the training points.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub has_header: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = gkpca_service::DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Model files to register at startup.
    #[arg(long)]
    pub model: Vec<PathBuf>,
}

fn data_root() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => cmd_fit(&a, out),
        Command::Traverse(a) => cmd_traverse(&a, out),
        Command::Novelty(a) => cmd_novelty(&a, out),
        Command::Serve(a) => cmd_serve(&a, out),
    }
}

/// Parses arguments, runs the command and maps failures to an exit code.
pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.trim_start_matches("error: ");
            eprint!("error:usage: {text}");
            return ExitCode::from(2);
        }
    };
    let stdout = io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut settings = args.settings();
    if let Some(path) = &args.config {
        settings = settings.or(config::read_file(path)?);
    }
    let dest = settings.out_path()?.to_path_buf();
    let model = settings.run_config()?.run(data_root().as_deref())?;
    write_file(&dest, &archive::to_bytes(&model))?;

    writeln!(out, "N={} d={}", model.n(), model.d())?;
    let top: Vec<String> = model.eigenvalues().iter().take(10).map(|v| format!("{v:.6e}")).collect();
    writeln!(out, "eigenvalues: {}", top.join(" "))?;
    writeln!(out, "wrote {}", dest.display())?;
    Ok(())
}

fn manifest_for(
    model: &KpcaModel,
    s: usize,
    points: &[gkpca::LatentPoint],
    files: Vec<String>,
) -> TraversalManifest {
    TraversalManifest {
        version: MANIFEST_VERSION,
        n: model.n(),
        d: model.d(),
        s,
        kind: model.kind(),
        steps: points
            .iter()
            .zip(files)
            .enumerate()
            .map(|(step, (h, f))| ManifestStep {
                step,
                h_star: h.clone(),
                file: Some(f),
            })
            .collect(),
    }
}

pub fn cmd_traverse(args: &TraverseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = archive::load(&args.model)?;
    let (points, s) = if let Some(path) = &args.manifest {
        let m = TraversalManifest::parse(&fs::read_to_string(path)?)?;
        if m.n != model.n() || m.d != model.d() {
            return Err(CliError::Usage(format!(
                "manifest was recorded on a model with N={} d={}, this one has N={} d={}",
                m.n,
                m.d,
                model.n(),
                model.d()
            )));
        }
        (m.points(), args.s.unwrap_or(m.s))
    } else {
        let spec = match (&args.interpolate, args.component) {
            (Some(ij), _) => {
                let [i, j] = ij[..] else {
                    return Err(CliError::Usage("--interpolate takes two indices I,J".into()));
                };
                PathSpec::Interpolate {
                    a: LatentRef::Index(i),
                    b: LatentRef::Index(j),
                }
            }
            (None, Some(component)) => PathSpec::AlongComponent {
                component,
                from: args.from.unwrap_or_default(),
                to: args.to.unwrap_or_default(),
                start: args.start.map(LatentRef::Index),
            },
            (None, None) => unreachable!("clap enforces a path argument"),
        };
        let path = spec.resolve(&model, args.steps)?;
        (path.points(), args.s.unwrap_or(15))
    };

    let samples = decode_points(&model, &points, s)?;
    fs::create_dir_all(&args.out)?;
    let width = (points.len() - 1).to_string().len().max(3);
    let mut files = Vec::with_capacity(samples.len());
    for (k, g) in samples.iter().enumerate() {
        let (ext, bytes) = render::render(model.kind(), &g.x_hat);
        let name = format!("step_{k:0width$}.{ext}");
        fs::write(args.out.join(&name), bytes)?;
        files.push(name);
    }
    let manifest = manifest_for(&model, s, &points, files);
    fs::write(args.out.join("manifest.json"), manifest.to_json())?;
    writeln!(out, "wrote {} samples and manifest.json to {}", samples.len(), args.out.display())?;
    Ok(())
}

pub fn cmd_novelty(args: &NoveltyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(args.quantile > 0.0 && args.quantile < 1.0) {
        return Err(CliError::Usage(format!(
            "--quantile must lie in (0, 1), got {}",
            args.quantile
        )));
    }
    let model = archive::load(&args.model)?;
    let report = match &args.points {
        Some(p) => {
            let ds = load_csv(
                p,
                CsvOptions {
                    has_labels: false,
                    has_header: args.has_header,
                },
            )?;
            novelty_report(&model, &ds.x, args.quantile)?
        }
        None => novelty_report_training(&model, args.quantile)?,
    };
    write_file(&args.out, report.to_csv().as_bytes())?;
    writeln!(
        out,
        "threshold={:e} flagged={} of {}",
        report.threshold,
        report.flagged_count(),
        report.scores.len()
    )?;
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn cmd_serve(args: &ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let state = gkpca_service::AppState::new(data_root());
    for path in &args.model {
        let id = state.insert(archive::load(path)?);
        writeln!(out, "registered {} as {id}", path.display())?;
    }
    let addr = SocketAddr::new(args.host, args.port);
    writeln!(out, "listening on http://{addr}")?;
    out.flush()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(gkpca_service::serve(addr, state))?;
    Ok(())
}
