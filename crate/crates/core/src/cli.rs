//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{analyze, escape_time_demo, AnalyzeOptions};
use crate::attractor::{attractor_for, chaos_game};
use crate::basin::{
    basin_estimate, continuation, fast_basin_inverse, generation_forward_field, slow_basin,
    AttractorSet, GenerationField, MAX_CUTOFF,
};
use crate::config::load_ifs;
use crate::error::{Error, Result};
use crate::grid::{write_file, CellRaster, Grid, Window};
use crate::ifs::{IfsSystem, Word};
use crate::render::{colorize, render_raster, write_ppm, Palette};
use crate::space::{ModelSpace, Point};

#[derive(Debug, Parser)]
#[command(
    name = "fastbasin",
    version,
    about = "Attractors and fast basins of iterated function systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Attractor raster (a chaos-game sample on cplane2).
    Attractor(Common),
    /// Fast-basin generation field.
    Fastbasin {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Fractal continuation stages along a word prefix.
    Continuation {
        #[command(flatten)]
        common: Common,
        /// Comma-separated 1-based map indices, e.g. 1,2,1.
        #[arg(long, default_value = "")]
        word: String,
    },
    /// Slow basin seeded with the r-neighbourhood of the attractor.
    Slowbasin(Common),
    /// Basin-of-attraction estimate.
    Basin(Common),
    /// Dimension, connectivity, criterion and expansivity report.
    Analyze(Common),
    /// Reverse-orbit stay time near the attractor.
    EscapeDemo {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        theta1: usize,
        #[arg(long = "n-target", default_value_t = 5)]
        n_target: usize,
        /// Disk radius; defaults to twice the attractor's radius.
        #[arg(long)]
        radius: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Inverse,
    Forward,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    ifs: PathBuf,
    /// xmin ymin xmax ymax; overrides the window of the config file.
    #[arg(long, num_args = 4, value_names = ["XMIN", "YMIN", "XMAX", "YMAX"], allow_hyphen_values = true)]
    window: Option<Vec<f64>>,
    #[arg(long, default_value_t = 512)]
    nx: usize,
    #[arg(long = "K", default_value_t = 4)]
    k: usize,
    /// Membership tolerance; defaults to the cell size.
    #[arg(long)]
    eps: Option<f64>,
    /// Slow-basin radius; defaults to four cells.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Raster (FBR1) or generation field (FBG1) output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Image output, written as binary PPM.
    #[arg(long, alias = "ppm")]
    png: Option<PathBuf>,
    /// Text report output; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

/// A failure with its exit code: 2 for usage and configuration errors, 1
/// for computation errors.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::SingularMap { .. }
            | Error::MixedSpaces { .. }
            | Error::EmptySystem
            | Error::TooManyMaps(_)
            | Error::CutoffTooLarge(_)
            | Error::InvalidRadius(_)
            | Error::IndexOutOfRange { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!(
                "fastbasin: {}",
                f.message.lines().next().unwrap_or_default()
            );
            f.code
        }
    }
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Attractor(c) | Command::Slowbasin(c) | Command::Basin(c) | Command::Analyze(c) => {
            c
        }
        Command::Fastbasin { common, .. }
        | Command::Continuation { common, .. }
        | Command::EscapeDemo { common, .. } => common,
    }
}

fn dispatch(command: Command) -> std::result::Result<(), Failure> {
    let c = common(&command);
    if !(64..=4096).contains(&c.nx) || !c.nx.is_power_of_two() {
        return Err(Failure::usage(format!(
            "--nx must be a power of two between 64 and 4096, got {}",
            c.nx
        )));
    }
    if c.k > MAX_CUTOFF {
        return Err(Failure::usage(format!(
            "--K must be at most {MAX_CUTOFF}, got {}",
            c.k
        )));
    }
    if c.threads == Some(0) {
        return Err(Failure::usage("--threads must be positive"));
    }
    let ifs = load_ifs(&c.ifs).map_err(|e| match e {
        Error::Io { .. } => Failure::usage(e.to_string()),
        e => Failure::usage(format!("{}: {e}", c.ifs.display())),
    })?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = c.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    pool.install(|| execute(&command, &ifs))
}

fn window(c: &Common, ifs: &IfsSystem) -> std::result::Result<Window, Failure> {
    match &c.window {
        Some(v) => Window::new(v[0], v[1], v[2], v[3]).map_err(|e| Failure::usage(e.to_string())),
        None => ifs.window().copied().ok_or_else(|| {
            Failure::usage(format!(
                "{}: no window line; pass --window",
                c.ifs.display()
            ))
        }),
    }
}

struct Outputs<'a> {
    common: &'a Common,
    report: String,
}

impl Outputs<'_> {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.report, "{key}={value}");
    }

    fn field(&mut self, field: &GenerationField) -> Result<()> {
        let counts: Vec<String> = (0..=field.cutoff())
            .map(|k| field.count_at(k as u8).to_string())
            .collect();
        self.line("generation_counts", counts.join(","));
        if let Some(p) = &self.common.out {
            field.write_fbg1(p)?;
        }
        if let Some(p) = &self.common.png {
            write_ppm(&colorize(field, &Palette::default()), p)?;
        }
        Ok(())
    }

    fn raster(&mut self, raster: &CellRaster) -> Result<()> {
        self.line("cells", raster.count());
        if let Some(p) = &self.common.out {
            raster.write_fbr1(p)?;
        }
        if let Some(p) = &self.common.png {
            write_ppm(&render_raster(raster, [0, 0, 0], [255, 255, 255]), p)?;
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        match &self.common.report {
            Some(p) => write_file(p, self.report.as_bytes()),
            None => {
                print!("{}", self.report);
                Ok(())
            }
        }
    }
}

fn execute(command: &Command, ifs: &IfsSystem) -> std::result::Result<(), Failure> {
    let c = common(command);
    let mut out = Outputs {
        common: c,
        report: String::new(),
    };
    out.line("ifs", ifs.name());
    if ifs.space() == ModelSpace::ComplexPlane2 {
        return match command {
            Command::Attractor(_) => {
                chaos_sample(ifs, c, &mut out)?;
                Ok(out.finish()?)
            }
            _ => Err(Error::UnsupportedSpace("cplane2").into()),
        };
    }
    let w = window(c, ifs)?;
    match command {
        Command::Attractor(_) => {
            let a = attractor_for(ifs, &w, c.nx)?;
            out.line("self_consistency", a.self_consistency);
            out.raster(&a.raster.resample(&Grid::for_space(ifs.space(), &w, c.nx)?))?;
        }
        Command::Fastbasin { method, .. } => {
            let a = attractor_for(ifs, &w, c.nx)?;
            let method = method.unwrap_or(if ifs.all_total() {
                Method::Inverse
            } else {
                Method::Forward
            });
            let field = match method {
                Method::Inverse => fast_basin_inverse(ifs, &a, &w, c.nx, c.k)?,
                Method::Forward => {
                    let set = AttractorSet::new(ifs, &a.raster);
                    let eps = c.eps.unwrap_or(a.raster.h());
                    generation_forward_field(ifs, &set, &w, c.nx, c.k, eps)?
                }
            };
            out.field(&field)?;
        }
        Command::Continuation { word, .. } => {
            let prefix = Word::parse(word)
                .ok_or_else(|| Failure::usage(format!("invalid --word '{word}'")))?;
            for &i in prefix.indices() {
                ifs.map(i)?;
            }
            let a = attractor_for(ifs, &w, c.nx)?;
            let cont = continuation(ifs, &prefix, &a, &w, c.nx)?;
            // cell value: first stage containing the cell
            let mut field = GenerationField::unset(*cont.grid(), prefix.len(), 0.0);
            for (k, stage) in cont.stages.iter().enumerate().rev() {
                for idx in stage.occupied() {
                    field.set_index(idx, Some(k as u8));
                }
            }
            out.field(&field)?;
        }
        Command::Slowbasin(_) => {
            let a = attractor_for(ifs, &w, c.nx)?;
            let r = c.r.unwrap_or(4.0 * a.raster.h());
            out.raster(&slow_basin(ifs, &a, r, &w, c.nx, c.k)?)?;
        }
        Command::Basin(_) => {
            let a = attractor_for(ifs, &w, c.nx)?;
            let eps = c.eps.unwrap_or(a.raster.h());
            out.raster(&basin_estimate(ifs, &a, &w, c.nx, c.k, eps)?)?;
        }
        Command::Analyze(_) => {
            let report = analyze(
                ifs,
                &w,
                AnalyzeOptions {
                    nx: c.nx,
                    k_max: c.k,
                    seed: c.seed,
                },
            )?;
            out.report.push_str(&report.to_string());
        }
        Command::EscapeDemo {
            theta1,
            n_target,
            radius,
            ..
        } => {
            let a = attractor_for(ifs, &w, c.nx)?;
            let (centre, r) = a
                .raster
                .bounding_ball()
                .ok_or_else(|| Error::NotFound("empty attractor".into()))?;
            let radius = radius.unwrap_or(2.0 * r);
            let demo = escape_time_demo(ifs, &a, *theta1, &centre, radius, *n_target, c.seed)?;
            out.line("a", demo.a);
            out.line("achieved", demo.achieved);
            out.line("delta", demo.delta);
            out.line("margin", demo.margin);
        }
    }
    Ok(out.finish()?)
}

const CHAOS_POINTS: usize = 100_000;

/// Writes chaos-game points, one per line, to `--out`.
fn chaos_sample(ifs: &IfsSystem, c: &Common, out: &mut Outputs) -> Result<()> {
    let pts = chaos_game(ifs, CHAOS_POINTS, 100, c.seed)?;
    let radius = pts
        .iter()
        .map(|p| p.distance(&origin(p)))
        .fold(0.0, f64::max);
    out.line("points", pts.len());
    out.line("radius", radius);
    if let Some(path) = &c.out {
        let mut text = String::new();
        for p in &pts {
            let _ = writeln!(text, "{}", coords(p));
        }
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

fn origin(p: &Point) -> Point {
    Point::from_coords(&vec![0.0; p.dim()]).expect("matching dimension")
}

fn coords(p: &Point) -> String {
    p.coords()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
