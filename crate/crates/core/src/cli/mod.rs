//! The `flowpost` command-line tool.
//!
//! Exit codes: 0 on success, 1 for input or spec errors, 2 for internal
//! failures.

mod spec;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::case::Case;
use crate::error::{Error, Result};
use crate::extract::{profile_along_line, sample_by_plane};
use crate::numfmt::format_sig;
use crate::plot::render_svg_string;
use crate::vtk_io::{read_dataset, SourceKind};
use crate::Point2;

pub use spec::{LayerSpec, PlotSpec};

#[derive(Debug, Parser)]
#[command(
    name = "flowpost",
    version,
    about = "Post-processing and plotting of planar CFD datasets"
)]
struct Cli {
    /// Only print errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Summarise a dataset: sizes, bounds, fields and boundaries.
    Info { dataset: PathBuf },
    /// Render a JSON plot spec to SVG.
    Plot {
        spec: PathBuf,
        /// Override the spec's output path.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample a field along a line and write CSV.
    Profile {
        dataset: PathBuf,
        /// Start point as `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p1: Point2,
        /// End point as `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p2: Point2,
        #[arg(long)]
        field: String,
        /// Output file; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Resample a field on a Cartesian grid and write CSV.
    Sample {
        dataset: PathBuf,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long)]
        field: String,
        /// Output file; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply one plot spec to every dataset matching a glob pattern.
    /// `{stem}` in the spec's output path is replaced by each file stem.
    Batch { pattern: String, spec: PathBuf },
}

fn parse_point(s: &str) -> std::result::Result<Point2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y but got {s:?}"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x in {s:?}: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y in {s:?}: {e}"))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(format!("non-finite point {s:?}"));
    }
    Ok([x, y])
}

/// Entry point of the binary: parses `std::env::args`, runs, and maps
/// panics to exit code 2.
pub fn main() -> i32 {
    let args: Vec<OsString> = std::env::args_os().collect();
    let quiet = args.iter().any(|a| a == "-q" || a == "--quiet");
    let level = if quiet { "error" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match std::panic::catch_unwind(|| run(args, &mut stdout.lock(), &mut stderr.lock())) {
        Ok(code) => code,
        Err(_) => {
            eprintln!("flowpost: internal error");
            2
        }
    }
}

/// Runs the tool with explicit arguments (including the program name) and
/// output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    let result = match cli.command {
        Command::Info { dataset } => cmd_info(&dataset).map(|r| {
            let _ = out.write_all(r.as_bytes());
            0
        }),
        Command::Plot { spec, output } => cmd_plot(&spec, output.as_deref()).map(|path| {
            if !cli.quiet {
                let _ = writeln!(out, "wrote {}", path.display());
            }
            0
        }),
        Command::Profile {
            dataset,
            p1,
            p2,
            field,
            output,
        } => Case::open(&dataset)
            .and_then(|case| profile_along_line(&case, p1, p2, &field))
            .and_then(|p| emit(out, output.as_deref(), &p.to_csv())),
        Command::Sample {
            dataset,
            nx,
            ny,
            field,
            output,
        } => Case::open(&dataset)
            .and_then(|case| sample_by_plane(&case, nx, ny, &field))
            .and_then(|s| emit(out, output.as_deref(), &s.to_csv())),
        Command::Batch { pattern, spec } => cmd_batch(&pattern, &spec).map(|report| {
            if !cli.quiet || report.failed() > 0 {
                let _ = out.write_all(report.summary().as_bytes());
            }
            if report.failed() > 0 {
                1
            } else {
                0
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "flowpost: {e}");
            1
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<i32> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e))?,
        None => out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(0)
}

fn source_name(kind: SourceKind) -> &'static str {
    match kind {
        SourceKind::LegacyAscii => "legacy VTK, ASCII",
        SourceKind::LegacyBinary => "legacy VTK, binary",
        SourceKind::XmlVtu => "VTK XML unstructured grid",
    }
}

/// The text of `flowpost info`. The first line names the file and format;
/// the rest depends only on the dataset contents.
pub fn cmd_info(path: &Path) -> Result<String> {
    let raw = read_dataset(path)?;
    let kind = raw.source_kind;
    let n_points = raw.points.len();
    let mut point_fields: Vec<(String, &'static str)> = raw
        .point_fields
        .iter()
        .filter(|(n, _)| !raw.cell_fields.contains_key(*n))
        .map(|(n, f)| (n.clone(), f.kind().name()))
        .collect();
    let case = Case::from_raw(raw)?;
    let b = case.bounds();
    let mut s = format!("{} ({})\n", path.display(), source_name(kind));
    s.push_str(&format!("points: {n_points}\ncells: {}\n", case.n_cells()));
    s.push_str(&format!(
        "bounds: x [{}, {}] y [{}, {}]\n",
        format_sig(b.xmin, 9),
        format_sig(b.xmax, 9),
        format_sig(b.ymin, 9),
        format_sig(b.ymax, 9)
    ));
    s.push_str("fields:\n");
    point_fields.sort();
    for name in case.field_names() {
        let f = case.get_field(&name)?;
        let origin = if point_fields.iter().any(|(n, _)| *n == name) {
            " (from point data)"
        } else {
            ""
        };
        s.push_str(&format!("  {name}: {}{origin}\n", f.kind().name()));
    }
    s.push_str("boundaries:\n");
    for (name, lp) in case.boundary_names().iter().zip(case.mesh().boundary_loops()) {
        s.push_str(&format!("  {name}: {} edges\n", lp.edges.len()));
    }
    Ok(s)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn spec_dir(spec: &Path) -> PathBuf {
    spec.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Renders one dataset with a parsed spec and writes the SVG. Nothing is
/// written unless validation and rendering succeed.
pub fn render_spec(spec: &PlotSpec, dataset: &Path, output: &Path) -> Result<()> {
    let case = Case::open(dataset)?;
    let fig = spec.build_figure(&case)?;
    let doc = render_svg_string(&fig)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(output, doc).map_err(|e| Error::io(output, e))
}

/// `flowpost plot`. Relative paths in the spec are resolved against the
/// spec's directory.
pub fn cmd_plot(spec_path: &Path, output: Option<&Path>) -> Result<PathBuf> {
    let spec = PlotSpec::from_file(spec_path)?;
    let base = spec_dir(spec_path);
    let dataset = spec
        .dataset
        .as_deref()
        .map(|d| resolve(&base, d))
        .ok_or_else(|| Error::spec("/dataset", "required key is missing"))?;
    let out = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| resolve(&base, &spec.output));
    render_spec(&spec, &dataset, &out)?;
    Ok(out)
}

/// Outcome of a batch run, in sorted dataset order.
#[derive(Debug)]
pub struct BatchReport {
    pub results: Vec<(PathBuf, std::result::Result<PathBuf, String>)>,
}

impl BatchReport {
    pub fn failed(&self) -> usize {
        self.results.iter().filter(|r| r.1.is_err()).count()
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (input, r) in &self.results {
            match r {
                Ok(out) => s.push_str(&format!("ok     {} -> {}\n", input.display(), out.display())),
                Err(e) => s.push_str(&format!("FAILED {}: {e}\n", input.display())),
            }
        }
        s.push_str(&format!(
            "{} succeeded, {} failed\n",
            self.results.len() - self.failed(),
            self.failed()
        ));
        s
    }
}

/// `flowpost batch`. Datasets are processed in parallel; per-dataset
/// failures are collected rather than aborting the run.
pub fn cmd_batch(pattern: &str, spec_path: &Path) -> Result<BatchReport> {
    let spec = PlotSpec::from_file(spec_path)?;
    let base = spec_dir(spec_path);
    let mut matches: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| Error::InvalidArgument(format!("bad glob pattern {pattern:?}: {e}")))?
        .filter_map(|r| r.ok())
        .filter(|p| p.is_file())
        .collect();
    matches.sort();
    if matches.is_empty() {
        return Err(Error::NoMatches(pattern.to_string()));
    }
    let template = spec.output.to_string_lossy().into_owned();
    if matches.len() > 1 && !template.contains("{stem}") {
        return Err(Error::spec(
            "/output",
            "must contain {stem} when several datasets match",
        ));
    }
    let results = matches
        .par_iter()
        .map(|input| {
            let stem = input.file_stem().unwrap_or_default().to_string_lossy();
            let out = resolve(&base, Path::new(&template.replace("{stem}", &stem)));
            let r = render_spec(&spec, input, &out).map(|_| out).map_err(|e| e.to_string());
            (input.clone(), r)
        })
        .collect();
    Ok(BatchReport { results })
}
