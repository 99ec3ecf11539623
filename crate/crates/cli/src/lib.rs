//! Command-line front end: one input page per invocation, one output file.
//!
//! Exit codes: 0 success, 1 internal error, 2 I/O (missing, unreadable or
//! unwritable file), 64 usage or parameter validation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use scorebin::apps::{
    cleanup, export_score_map, score_binarize, texture_transfer, BackgroundColor, CleanupParams, Connectivity,
    RescueParams, ScoreKind, TextureFit,
};
use scorebin::io::{encode, write_atomic, ImageRef};
use scorebin::{analyze, load_image, Analysis, Format, Image, SauvolaParams, WindowSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SCOREBIN_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "scorebin",
    version,
    about = "Sauvola binarization with per-pixel confidence scores"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Plain Sauvola binarization.
    Sauvola(Common),
    /// Sauvola binarization plus confidence-based rescue of missed foreground.
    Binarize {
        #[command(flatten)]
        common: Common,
        /// Foreground-confidence threshold for rescue, in [0, 1], or `off`.
        #[arg(long, default_value = "0.7", value_parser = parse_tau)]
        tau: Tau,
        /// Neighbourhood linking rescued pixels to the base foreground: 4, 8, or `off`.
        #[arg(long, default_value = "8", value_parser = parse_connectivity)]
        connectivity: Link,
    },
    /// Export a confidence map as an 8-bit grayscale image.
    Score {
        #[command(flatten)]
        common: Common,
        /// Which score to export.
        #[arg(long = "which", value_enum, default_value_t = Which::Fg)]
        which: Which,
    },
    /// Blend background toward a flat colour by background confidence.
    Clean {
        #[command(flatten)]
        common: Common,
        /// Exponent applied to the background score before blending (> 0).
        #[arg(long, default_value = "1.0", value_parser = parse_gamma)]
        gamma: f64,
        /// Background colour: a gray level `255` or an `r,g,b` triple.
        #[arg(long, default_value = "255", value_parser = parse_background)]
        background: BackgroundColor,
    },
    /// Composite the page content onto a new background texture.
    Texture {
        #[command(flatten)]
        common: Common,
        /// Texture image (PNG, PGM or PPM).
        #[arg(long)]
        texture: PathBuf,
        /// How the texture is fitted to the page.
        #[arg(long, value_enum, default_value_t = Fit::Resize)]
        fit: Fit,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Input image (PNG, PGM or PPM).
    pub input: PathBuf,
    /// Output image; the format follows the extension (.png, .pgm, .ppm).
    #[arg(short, long)]
    pub output: PathBuf,
    /// Odd window side length, >= 3.
    #[arg(long, default_value = "31", value_parser = parse_window)]
    pub window: usize,
    /// Sauvola sensitivity in [0, 1].
    #[arg(long, default_value = "0.2", value_parser = parse_k)]
    pub k: f64,
    /// Also write `<output>.stats.txt` with run parameters and image extrema.
    #[arg(long)]
    pub dump_stats: bool,
}

/// `--tau`: a value in [0, 1] or disabled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tau(pub Option<f64>);

/// `--connectivity`: a neighbourhood or no connectivity requirement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link(pub Option<Connectivity>);

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Fg,
    Bg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fit {
    Resize,
    Tile,
}

fn parse_window(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("`{s}` is not a positive integer"))?;
    WindowSpec::new(n).map(|_| n).map_err(|e| e.to_string())
}

fn parse_unit(s: &str, what: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{what} must be within [0, 1], got {s}"))
    }
}

fn parse_k(s: &str) -> Result<f64, String> {
    parse_unit(s, "k")
}

fn parse_tau(s: &str) -> Result<Tau, String> {
    if s.eq_ignore_ascii_case("off") {
        Ok(Tau(None))
    } else {
        parse_unit(s, "tau").map(|v| Tau(Some(v)))
    }
}

fn parse_connectivity(s: &str) -> Result<Link, String> {
    match s.to_ascii_lowercase().as_str() {
        "4" => Ok(Link(Some(Connectivity::Four))),
        "8" => Ok(Link(Some(Connectivity::Eight))),
        "off" => Ok(Link(None)),
        _ => Err(format!("connectivity must be 4, 8 or off, got `{s}`")),
    }
}

fn parse_gamma(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    CleanupParams::new(v, BackgroundColor::default())
        .map(|_| v)
        .map_err(|_| format!("gamma must be a positive finite number, got {s}"))
}

fn parse_background(s: &str) -> Result<BackgroundColor, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let level = |p: &str| p.parse::<u8>().map_err(|_| format!("`{p}` is not an intensity in 0..=255"));
    match parts.as_slice() {
        [v] => Ok(BackgroundColor::Gray(level(v)?)),
        [r, g, b] => Ok(BackgroundColor::Rgb([level(r)?, level(g)?, level(b)?])),
        _ => Err(format!("background must be `v` or `r,g,b`, got `{s}`")),
    }
}

/// A failure mapped to its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<scorebin::Error> for Failure {
    fn from(e: scorebin::Error) -> Self {
        use scorebin::Error as E;
        let code = match &e {
            E::FileNotFound(_) | E::UnsupportedFormat(_) | E::MalformedFile(_) | E::Io(_) => EXIT_IO,
            E::InvalidParam { .. } | E::FormatMismatch { .. } => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `argv` (including the program name), runs it and returns the exit
/// code. Diagnostics go to stderr only.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match thread_cap() {
        Ok(Some(n)) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure {
                code: EXIT_INTERNAL,
                message: format!("cannot start thread pool: {e}"),
            }),
        },
        Ok(None) => execute(&cli),
        Err(f) => Err(f),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("scorebin: {}", f.message);
            f.code
        }
    }
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Key-value sidecar lines, in insertion order.
#[derive(Default)]
struct Report(String);

impl Report {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key}={value}");
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let (common, name) = match &cli.command {
        Command::Sauvola(c) => (c, "sauvola"),
        Command::Binarize { common, .. } => (common, "binarize"),
        Command::Score { common, .. } => (common, "score"),
        Command::Clean { common, .. } => (common, "clean"),
        Command::Texture { common, .. } => (common, "texture"),
    };
    let format = Format::from_path(&common.output).ok_or_else(|| {
        Failure::usage(format!(
            "cannot infer output format from `{}` (use .png, .pgm or .ppm)",
            common.output.display()
        ))
    })?;
    let window = WindowSpec::new(common.window)?;
    let params = SauvolaParams::new(common.k, window)?;

    let input = load_image(&common.input)?;
    let gray = input.to_gray();
    let analysis = analyze(&gray, params);

    let mut report = Report::default();
    report.put("subcommand", name);
    report.put("input", common.input.display());
    report.put("output", common.output.display());
    report.put("width", gray.width());
    report.put("height", gray.height());
    report.put(
        "channels",
        match input {
            Image::Gray(_) => 1,
            Image::Color(_) => 3,
        },
    );
    report.put("window", common.window);
    report.put("k", common.k);
    report.put("min", analysis.extrema.min_val);
    report.put("max", analysis.extrema.max_val);
    report.put("dynamic_range", analysis.threshold.r);

    let bytes = render(&cli.command, &input, &analysis, format, &mut report)?;
    write_atomic(&common.output, &bytes)?;
    if common.dump_stats {
        write_atomic(&sidecar_path(&common.output), report.0.as_bytes())?;
    }
    Ok(())
}

fn render(
    command: &Command,
    input: &Image,
    analysis: &Analysis,
    format: Format,
    report: &mut Report,
) -> Result<Vec<u8>, Failure> {
    let bytes = match command {
        Command::Sauvola(_) => {
            report.put("foreground", analysis.base.foreground_count());
            encode(&analysis.base, format)?
        }
        Command::Binarize {
            tau, connectivity, ..
        } => {
            let rescue = RescueParams::new(
                tau.0,
                connectivity.0.is_some(),
                connectivity.0.unwrap_or_default(),
            )?;
            let out = score_binarize(&analysis.base, &analysis.confidence, rescue)?;
            report.put("tau", tau.0.map_or("off".to_string(), |t| t.to_string()));
            report.put(
                "connectivity",
                match connectivity.0 {
                    None => "off",
                    Some(Connectivity::Four) => "4",
                    Some(Connectivity::Eight) => "8",
                },
            );
            report.put("base_foreground", analysis.base.foreground_count());
            report.put("foreground", out.foreground_count());
            encode(&out, format)?
        }
        Command::Score { which, .. } => {
            let kind = match which {
                Which::Fg => ScoreKind::Foreground,
                Which::Bg => ScoreKind::Background,
            };
            report.put("which", if *which == Which::Fg { "fg" } else { "bg" });
            encode(&export_score_map(&analysis.confidence, kind), format)?
        }
        Command::Clean {
            gamma, background, ..
        } => {
            let params = CleanupParams::new(*gamma, *background)?;
            report.put("gamma", gamma);
            report.put(
                "background",
                match background {
                    BackgroundColor::Gray(v) => v.to_string(),
                    BackgroundColor::Rgb([r, g, b]) => format!("{r},{g},{b}"),
                },
            );
            let out = cleanup(input, &analysis.confidence, params)?;
            encode(ImageRef::from(&out), format)?
        }
        Command::Texture { texture, fit, .. } => {
            let tex = load_image(texture)?;
            let tex = match tex {
                Image::Color(c) => c,
                Image::Gray(g) => g.to_color(),
            };
            let fit_mode = match fit {
                Fit::Resize => TextureFit::Resize,
                Fit::Tile => TextureFit::Tile,
            };
            report.put("texture", texture.display());
            report.put("fit", if *fit == Fit::Resize { "resize" } else { "tile" });
            let out = texture_transfer(input, &analysis.confidence, &tex, fit_mode)?;
            encode(&out, format)?
        }
    };
    Ok(bytes)
}

/// `out.png` -> `out.png.stats.txt`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".stats.txt");
    PathBuf::from(name)
}
