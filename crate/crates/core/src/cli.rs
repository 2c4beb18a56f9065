//! The `senrel` command line.
//!
//! ```text
//! senrel generate --variant sen+ --n 128 --analysis terminal --formalism dft -o model.json
//! senrel eval --model model.json -o curve.csv
//! senrel mc --model model.json --trials 100000 --seed 1 -o mc.csv
//! senrel check --model model.json
//! senrel plot with.csv without.csv -o terminal.svg
//! ```
//!
//! Commands that take a model accept either `--model <file>` or the
//! generator flags of `generate`; the generator defaults describe the
//! 128x128 SEN+ terminal fault tree with paper spares.
//!
//! Exit codes: 0 success, 1 numeric check failure, 2 usage or validation
//! error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dist::DormancyFactor;
use crate::error::{Error, Result};
use crate::eval::{eval_curve, linear_grid};
use crate::model::{Formalism, Model};
use crate::oracle::{enumerate_exact, mc_curve_with_workers, MAX_ENUMERATION_LEAVES};
use crate::sen::{build_model, metadata, Analysis, SenModelSpec, SpareConfig, Variant};

/// Largest deviation `check` tolerates.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "senrel", version, about = "Dependability analysis of shuffle-exchange networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a SEN / SEN+ model and write it as JSON.
    Generate(GenerateArgs),
    /// Evaluate the exact failure probability or reliability curve as CSV.
    Eval(EvalArgs),
    /// Monte Carlo estimates with standard errors as CSV.
    Mc(McArgs),
    /// Cross-check a model against its complement twin and the enumeration oracle.
    Check(CheckArgs),
    /// Draw one or more curve CSV files as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// sen or sen+
    #[arg(long, default_value = "sen+")]
    pub variant: Variant,
    /// Network size (inputs = outputs), a power of two
    #[arg(long, default_value_t = 128)]
    pub n: u32,
    /// terminal, broadcast or network
    #[arg(long, default_value = "terminal")]
    pub analysis: Analysis,
    /// dft or drbd
    #[arg(long, default_value = "dft")]
    pub formalism: Formalism,
    /// none, paper or all
    #[arg(long, default_value = "paper")]
    pub spares: SpareConfig,
    /// Failure rate of each switching element, per hour
    #[arg(long, default_value_t = 1e-5)]
    pub rate: f64,
    /// Dormancy factor of the spares, in (0, 1]
    #[arg(long, default_value_t = 0.1)]
    pub dormancy: f64,
}

impl SpecArgs {
    pub fn to_spec(&self) -> Result<SenModelSpec> {
        let spec = SenModelSpec {
            n: self.n,
            variant: self.variant,
            analysis: self.analysis,
            formalism: self.formalism,
            spares: self.spares,
            rate: self.rate,
            dormancy: DormancyFactor::new(self.dormancy)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model file; when absent the model is generated from the flags below
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub spec: SpecArgs,
}

impl ModelArgs {
    pub fn load(&self) -> Result<Model> {
        match &self.model {
            Some(path) => Model::from_json(&fs::read_to_string(path)?),
            None => build_model(&self.spec.to_spec()?),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// First instant of the time grid, hours
    #[arg(long, default_value_t = 0.0)]
    pub start: f64,
    /// Last instant of the time grid, hours
    #[arg(long, default_value_t = 1e5)]
    pub end: f64,
    /// Number of equally spaced grid points
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

impl GridArgs {
    pub fn grid(&self) -> Result<Vec<f64>> {
        linear_grid(self.start, self.end, self.points)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Output file (stdout when absent)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Single instant instead of the grid
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, env = "SENREL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the available parallelism); does not
    /// affect the output
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV files with a header line and `t,value` (or `t,p_hat,...`) rows
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Legend labels, one per input (file stems by default)
    #[arg(long)]
    pub label: Vec<String>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Outcome of a command that did not hit an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::CheckFailed => 1,
        }
    }
}

/// Runs a parsed command. Output goes to the `-o` file when one is given,
/// otherwise to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Mc(a) => cmd_mc(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Plot(a) => cmd_plot(a, out),
    }
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<Status> {
    let spec = args.spec.to_spec()?;
    let model = build_model(&spec)?;
    let mut text = model.to_json(Some(metadata(&spec)?))?;
    text.push('\n');
    emit(args.output.as_deref(), &text, out)?;
    Ok(Status::Success)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<Status> {
    let model = args.model.load()?;
    let curve = eval_curve(&model, &args.grid.grid()?)?;
    let mut w = csv_writer();
    w.write_record(["t", "value"])?;
    for (t, v) in curve.points {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    emit(args.output.as_deref(), &finish_csv(w)?, out)?;
    Ok(Status::Success)
}

pub fn cmd_mc(args: &McArgs, out: &mut dyn Write) -> Result<Status> {
    let model = args.model.load()?;
    let grid = match args.t {
        Some(t) => vec![t],
        None => args.grid.grid()?,
    };
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let estimates = mc_curve_with_workers(&model, &grid, args.trials, args.seed, workers)?;
    let mut w = csv_writer();
    w.write_record(["t", "p_hat", "stderr"])?;
    for (t, e) in grid.iter().zip(estimates) {
        w.write_record([t.to_string(), e.p_hat.to_string(), e.stderr.to_string()])?;
    }
    emit(args.output.as_deref(), &finish_csv(w)?, out)?;
    Ok(Status::Success)
}

/// Result of [`check_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub formalism: Formalism,
    pub leaves: usize,
    pub points: usize,
    /// max over the grid of |F(t) + R(t) - 1| between the model and its twin
    pub complement_delta: f64,
    /// max over the grid of |enumeration - closed form|, when enumerable
    pub enumeration_delta: Option<f64>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.complement_delta <= CHECK_TOLERANCE
            && self.enumeration_delta.is_none_or(|d| d <= CHECK_TOLERANCE)
    }
}

pub fn check_model(model: &Model, grid: &[f64]) -> Result<CheckReport> {
    model.validate().into_result()?;
    let twin = model.complement()?;
    let (dft, drbd) = match model.formalism() {
        Formalism::Dft => (model, &twin),
        Formalism::Drbd => (&twin, model),
    };
    let f = eval_curve(dft, grid)?;
    let r = eval_curve(drbd, grid)?;
    let complement_delta = f
        .values()
        .zip(r.values())
        .map(|(f, r)| (f + r - 1.0).abs())
        .fold(0.0, f64::max);

    let leaves = model.leaf_count();
    let enumeration_delta = if leaves <= MAX_ENUMERATION_LEAVES {
        let mut worst = 0.0f64;
        for &t in grid {
            worst = worst.max((enumerate_exact(model, t)? - model.evaluate(t)?).abs());
        }
        Some(worst)
    } else {
        None
    };
    Ok(CheckReport {
        formalism: model.formalism(),
        leaves,
        points: grid.len(),
        complement_delta,
        enumeration_delta,
    })
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<Status> {
    let model = args.model.load()?;
    let report = model.validate();
    if !report.ok {
        for v in &report.violations {
            writeln!(out, "violation {v}")?;
        }
        return Err(Error::Validation(report));
    }
    let report = check_model(&model, &args.grid.grid()?)?;
    writeln!(out, "model: {}, {} leaves", report.formalism.as_str(), report.leaves)?;
    writeln!(
        out,
        "complement: max |F + R - 1| = {:e} over {} points",
        report.complement_delta, report.points
    )?;
    match report.enumeration_delta {
        Some(d) => writeln!(out, "enumeration: max delta = {d:e} over {} points", report.points)?,
        None => writeln!(
            out,
            "enumeration: skipped ({} leaves > {MAX_ENUMERATION_LEAVES})",
            report.leaves
        )?,
    }
    let status = if report.passed() { Status::Success } else { Status::CheckFailed };
    writeln!(
        out,
        "result: {} (tolerance {CHECK_TOLERANCE:e})",
        if status == Status::Success { "pass" } else { "fail" }
    )?;
    Ok(status)
}

/// One named curve read from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads the first two columns of a curve CSV (header line required).
pub fn read_series(text: &str, label: &str) -> Result<Series> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Input(format!("{label}: bad number in row {}", line + 2)))
        };
        points.push((field(0)?, field(1)?));
    }
    if points.len() < 2 {
        return Err(Error::Input(format!(
            "{label}: a series needs at least 2 points, found {}",
            points.len()
        )));
    }
    Ok(Series {
        label: label.to_string(),
        points,
    })
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart of `series`, x axis in hours, y axis probability.
pub fn render_svg(series: &[Series], title: Option<&str>) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Input("nothing to plot".into()));
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    let x_min = all().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_data_max = all().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let y_min = all().map(|p| p.1).fold(f64::INFINITY, f64::min).min(0.0);
    let y_max = if y_data_max > 0.5 { y_data_max.max(1.0) } else { y_data_max * 1.1 };
    let y_max = if y_max > y_min { y_max } else { y_min + 1.0 };
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / x_span * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(title) = title {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
    }
    let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN_TOP}"/></g>"#,
        x0 + plot_w
    );
    for i in 0..=5 {
        let fx = x_min + x_span * i as f64 / 5.0;
        let fy = y_min + (y_max - y_min) * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            sx(fx),
            y0 + 18.0,
            tick_label(fx)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 6.0,
            sy(fy) + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">t (hours)</text>"#,
        x0 + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 {:.2})">probability</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(&s.label),
            points.join(" ")
        );
        let ly = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        let lx = x0 + 15.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 1e3).round() / 1e3)
    }
}

pub fn cmd_plot(args: &PlotArgs, out: &mut dyn Write) -> Result<Status> {
    if !args.label.is_empty() && args.label.len() != args.inputs.len() {
        return Err(Error::Input(format!(
            "{} labels given for {} inputs",
            args.label.len(),
            args.inputs.len()
        )));
    }
    let mut series = Vec::with_capacity(args.inputs.len());
    for (i, path) in args.inputs.iter().enumerate() {
        let label = match args.label.get(i) {
            Some(l) => l.clone(),
            None => path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
        };
        series.push(read_series(&fs::read_to_string(path)?, &label)?);
    }
    let svg = render_svg(&series, args.title.as_deref())?;
    emit(args.output.as_deref(), &svg, out)?;
    Ok(Status::Success)
}
