//! `tetrascope` command line: sampling, exports, property checks and
//! threshold search.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tetrascope_core::export::{display_gamut, write_field_csv, write_ply, write_slice_csv, write_slice_ppm};
use tetrascope_core::measures::{list_measures, lookup};
use tetrascope_core::properties::{all_measure_ids, property_matrix};
use tetrascope_core::simplex::{cross_section_bound, sample_bound, skeleton};
use tetrascope_core::threshold::{find_threshold, rank_flip_threshold};
use tetrascope_core::{Colormap, ConfusionMatrix, Error, ErrorClass, Params, PropertyId};

mod config;

pub use config::ConfigFile;

pub const DEFAULT_MAX_N: u64 = 300;
pub const THREADS_ENV: &str = "TETRASCOPE_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    pub fn argument(message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Argument, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { class: ErrorClass::Io, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self { class: e.class(), message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tetrascope", version, about = "Classification measures over the confusion-matrix tetrahedron")]
pub struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Largest grid resolution accepted (default 300).
    #[arg(long, global = true)]
    pub max_n: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Registry operations.
    Measures {
        #[command(subcommand)]
        action: MeasuresAction,
    },
    /// Evaluate a measure on the whole grid.
    Field(FieldArgs),
    /// Fixed class-balance cross-section as PPM plus sidecar CSV.
    Slice(SliceArgs),
    /// Grid points on the tetrahedron edges.
    Skeleton(SkeletonArgs),
    /// Property matrix for one or more measures.
    Props(PropsArgs),
    /// Parameter value at which a property flips.
    Threshold(ThresholdArgs),
    /// Parameter value at which two confusion matrices swap rank.
    Rankflip(RankflipArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum MeasuresAction {
    List,
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub measure: Option<String>,
    /// Parameter override, `name=value`; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldFormat {
    Csv,
    Ply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Md,
    Csv,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub common: MeasureArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FieldFormat>,
    /// JSON colormap used for PLY colors.
    #[arg(long)]
    pub colormap: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    #[command(flatten)]
    pub common: MeasureArgs,
    #[arg(long)]
    pub pos_fraction: Option<f64>,
    /// Writes PREFIX.ppm and PREFIX.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub colormap: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SkeletonArgs {
    #[command(flatten)]
    pub common: MeasureArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PropsArgs {
    /// Comma separated ids, or `all`.
    #[arg(long)]
    pub measures: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<TableFormat>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub measure: Option<String>,
    /// Parameter to search over.
    #[arg(long)]
    pub param: String,
    /// Fixed value for another parameter, `name=value`; repeatable.
    #[arg(long = "with", value_name = "K=V")]
    pub fixed: Vec<String>,
    #[arg(long)]
    pub property: Option<String>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RankflipArgs {
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long)]
    pub param: String,
    #[arg(long = "with", value_name = "K=V")]
    pub fixed: Vec<String>,
    /// `tp,fn,fp,tn`
    #[arg(long)]
    pub cm_a: String,
    #[arg(long)]
    pub cm_b: String,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub port: Option<u16>,
    /// Largest resolution the service accepts (default 120).
    #[arg(long = "max-n", id = "serve_max_n")]
    pub max_n: Option<u64>,
}

/// Resolved settings: flags first, then the config file.
struct Settings {
    file: ConfigFile,
    max_n: u64,
}

impl Settings {
    fn measure(&self, flag: &Option<String>) -> CliResult<String> {
        flag.clone()
            .or_else(|| self.file.measure.clone())
            .ok_or_else(|| CliError::argument("--measure is required"))
    }

    fn n(&self, flag: Option<u64>) -> CliResult<u64> {
        let n = flag.or(self.file.n).ok_or_else(|| CliError::argument("--n is required"))?;
        if n > self.max_n {
            return Err(CliError::argument(format!("n={n} exceeds the cap of {} (raise with --max-n)", self.max_n)));
        }
        Ok(n)
    }

    fn required<T: Copy>(&self, flag: Option<T>, file: Option<T>, name: &str) -> CliResult<T> {
        flag.or(file).ok_or_else(|| CliError::argument(format!("--{name} is required")))
    }

    fn params(&self, overrides: &[String]) -> CliResult<Params> {
        let mut params: Params = self.file.params.clone();
        params.extend(parse_params(overrides)?);
        Ok(params)
    }

    fn out(&self, flag: &Option<PathBuf>) -> Option<PathBuf> {
        flag.clone().or_else(|| self.file.out.as_ref().map(PathBuf::from))
    }

    fn colormap(&self, flag: &Option<PathBuf>) -> CliResult<Colormap> {
        let path = flag.clone().or_else(|| self.file.colormap.as_ref().map(PathBuf::from));
        let Some(path) = path else { return Ok(Colormap::default()) };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::io(format!("cannot read colormap {}: {e}", path.display())))?;
        let cmap: Colormap = serde_json::from_str(&text)
            .map_err(|e| CliError::argument(format!("invalid colormap {}: {e}", path.display())))?;
        cmap.validate()?;
        Ok(cmap)
    }
}

pub fn parse_params(pairs: &[String]) -> CliResult<Params> {
    pairs
        .iter()
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::argument(format!("parameter `{pair}` must look like name=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::argument(format!("parameter `{k}` value `{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub fn parse_cm(text: &str) -> CliResult<ConfusionMatrix> {
    let counts: Vec<u64> = text
        .split(',')
        .map(|c| c.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::argument(format!("confusion matrix `{text}` must be tp,fn,fp,tn")))?;
    match counts.as_slice() {
        &[tp, fn_, fp, tn] if tp + fn_ + fp + tn > 0 => Ok(ConfusionMatrix::new(tp, fn_, fp, tn)),
        _ => Err(CliError::argument(format!("confusion matrix `{text}` must be four counts with a positive total"))),
    }
}

/// Output sink: a buffered file or stdout.
fn sink<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(stdout),
    })
}

/// Parses `argv` and runs the command. Returns the process exit code.
pub fn main_with_args<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let max_n = cli.max_n.or(file.max_n).unwrap_or(DEFAULT_MAX_N);
    let settings = Settings { file, max_n };
    match cli.command {
        Command::Measures { action: MeasuresAction::List } => measures_list(stdout),
        Command::Field(args) => field(&settings, &args, stdout),
        Command::Slice(args) => slice(&settings, &args),
        Command::Skeleton(args) => skeleton_cmd(&settings, &args, stdout),
        Command::Props(args) => props(&settings, &args, stdout),
        Command::Threshold(args) => threshold(&settings, &args, stdout),
        Command::Rankflip(args) => rankflip(&settings, &args, stdout),
        Command::Serve(args) => serve(&settings, &args, stdout),
    }
}

fn measures_list(out: &mut dyn Write) -> CliResult<()> {
    writeln!(out, "{:<20} {:<34} {:<28} range", "id", "name", "params")?;
    for d in list_measures() {
        let params: Vec<String> = d
            .params
            .iter()
            .map(|p| format!("{}={} {}", p.name, p.default, p.interval))
            .collect();
        let (lo, hi) = d.bind::<f64>(&Params::new())?.range();
        let params = if params.is_empty() { "-".to_string() } else { params.join("; ") };
        writeln!(out, "{:<20} {:<34} {:<28} [{lo}, {hi}]", d.id, d.display_name, params)?;
    }
    Ok(())
}

fn field(s: &Settings, args: &FieldArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let measure = lookup(&s.measure(&args.common.measure)?)?.bind(&s.params(&args.common.params)?)?;
    let n = s.n(args.common.n)?;
    let format = match (args.format, s.file.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some("ply")) => FieldFormat::Ply,
        (None, Some("csv") | None) => FieldFormat::Csv,
        (None, Some(other)) => return Err(CliError::argument(format!("unknown field format `{other}`"))),
    };
    let colormap = s.colormap(&args.colormap)?;
    let samples = sample_bound(&measure, n)?;
    let out = s.out(&args.out);
    let mut w = sink(out.as_deref(), stdout)?;
    match format {
        FieldFormat::Csv => write_field_csv(&samples, &mut w)?,
        FieldFormat::Ply => {
            let values: Vec<_> = samples.iter().map(|x| x.value).collect();
            let gamut = display_gamut(&values, measure.range());
            write_ply(&samples, &colormap, &gamut, &mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn slice(s: &Settings, args: &SliceArgs) -> CliResult<()> {
    let measure = lookup(&s.measure(&args.common.measure)?)?.bind(&s.params(&args.common.params)?)?;
    let n = s.n(args.common.n)?;
    let fraction = s.required(args.pos_fraction, s.file.pos_fraction, "pos-fraction")?;
    let prefix = s.out(&args.out).ok_or_else(|| CliError::argument("--out PREFIX is required"))?;
    let colormap = s.colormap(&args.colormap)?;
    let section = cross_section_bound(&measure, n, fraction)?;
    let values: Vec<_> = section.samples.iter().map(|x| x.value).collect();
    let gamut = display_gamut(&values, measure.range());
    let with_ext = |ext: &str| {
        let mut p = prefix.clone().into_os_string();
        p.push(ext);
        PathBuf::from(p)
    };
    let mut nowhere = io::sink();
    let mut ppm = sink(Some(&with_ext(".ppm")), &mut nowhere)?;
    write_slice_ppm(&section, &colormap, &gamut, &mut ppm)?;
    ppm.flush()?;
    drop(ppm);
    let mut csv = sink(Some(&with_ext(".csv")), &mut nowhere)?;
    write_slice_csv(&section, &mut csv)?;
    csv.flush()?;
    Ok(())
}

fn skeleton_cmd(s: &Settings, args: &SkeletonArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let id = s.measure(&args.common.measure)?;
    let n = s.n(args.common.n)?;
    let samples = skeleton(&id, &s.params(&args.common.params)?, n)?;
    let out = s.out(&args.out);
    let mut w = sink(out.as_deref(), stdout)?;
    write_field_csv(&samples, &mut w)?;
    Ok(())
}

fn props(s: &Settings, args: &PropsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let requested = args
        .measures
        .clone()
        .or_else(|| s.file.measures.clone())
        .ok_or_else(|| CliError::argument("--measures is required"))?;
    let n = s.n(args.n)?;
    let ids: Vec<&'static str> = if requested.trim() == "all" {
        all_measure_ids()
    } else {
        requested.split(',').map(|id| lookup(id).map(|d| d.id)).collect::<Result<_, _>>()?
    };
    let format = match (args.format, s.file.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some("csv")) => TableFormat::Csv,
        (None, Some("md") | None) => TableFormat::Md,
        (None, Some(other)) => return Err(CliError::argument(format!("unknown table format `{other}`"))),
    };
    let matrix = property_matrix::<f64>(&ids, &Default::default(), n);
    let text = match format {
        TableFormat::Md => matrix.to_markdown(),
        TableFormat::Csv => matrix.to_csv(),
    };
    let out = s.out(&args.out);
    let mut w = sink(out.as_deref(), stdout)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn threshold(s: &Settings, args: &ThresholdArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let id = s.measure(&args.measure)?;
    let property: PropertyId = args
        .property
        .clone()
        .or_else(|| s.file.property.clone())
        .ok_or_else(|| CliError::argument("--property is required"))?
        .parse()?;
    let lo = s.required(args.lo, s.file.lo, "lo")?;
    let hi = s.required(args.hi, s.file.hi, "hi")?;
    let tol = s.required(args.tol, s.file.tol, "tol")?;
    let n = s.n(args.n.or(s.file.n).or(Some(40)))?;
    let result = find_threshold(&id, &s.params(&args.fixed)?, &args.param, property, (lo, hi), tol, n)?;
    writeln!(stdout, "{}", result.to_json())?;
    Ok(())
}

#[derive(Serialize)]
struct RankflipRecord<'a> {
    measure: &'a str,
    param: &'a str,
    estimate: f64,
    lo: f64,
    hi: f64,
    residual: f64,
    tol: f64,
}

fn rankflip(s: &Settings, args: &RankflipArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let id = s.measure(&args.measure)?;
    let (a, b) = (parse_cm(&args.cm_a)?, parse_cm(&args.cm_b)?);
    let lo = s.required(args.lo, s.file.lo, "lo")?;
    let hi = s.required(args.hi, s.file.hi, "hi")?;
    let tol = s.required(args.tol, s.file.tol, "tol")?;
    let r = rank_flip_threshold(&id, &s.params(&args.fixed)?, &args.param, &a, &b, (lo, hi), tol)?;
    let record = RankflipRecord {
        measure: lookup(&id)?.id,
        param: &args.param,
        estimate: r.estimate,
        lo: r.bracket.0,
        hi: r.bracket.1,
        residual: r.residual,
        tol,
    };
    writeln!(stdout, "{}", serde_json::to_string(&record).expect("record serializes"))?;
    Ok(())
}

fn serve(s: &Settings, args: &ServeArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let port = args.port.or(s.file.port).unwrap_or(8080);
    let config = tetrascope_service::ServiceConfig {
        max_n: args.max_n.unwrap_or(120),
        ..Default::default()
    };
    let addr = std::net::SocketAddr::from(([0, 0, 0, 0], port));
    writeln!(stdout, "tetrascope service listening on http://{addr}")?;
    stdout.flush()?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(tetrascope_service::serve(addr, config))?;
    Ok(())
}

/// Sizes the global rayon pool from `TETRASCOPE_THREADS` when set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::argument(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::argument(e.to_string()))
}
