//! Command-line front end. Every command writes CSV (with `#` comment
//! headers) to `--out` or standard output.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 a threshold
//! or self-check failed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::density::{
    f_delta_block, f_delta_quad, f_delta_sum, normalization, parse_spectrum_text, psi, psi_radial, psi_side,
    RankOneProfile, Side, SingularSpectrum, TruncatedProfile,
};
use crate::experiment::{compare, expected_histogram, run_mc, ComparisonReport, RadialHistogram};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "sv-density", version, about = "Eigenvalue density of U·√G for a prescribed singular spectrum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate Ψ(s) over a grid in s = |z|².
    Density(CurveArgs),
    /// Tabulate Ψ₁(r) = 2rΨ(r²) over a grid in r = |z|.
    Radial(CurveArgs),
    /// Monte Carlo radial histogram compared with the analytic profile.
    Mc(McArgs),
    /// Run the invariant battery on a spectrum.
    Check(CheckArgs),
    /// Closed-form special cases next to the general evaluator.
    #[command(subcommand)]
    Special(SpecialCommand),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SpectrumSource {
    /// Comma-separated squared singular values.
    #[arg(long = "g", value_delimiter = ',', allow_negative_numbers = true)]
    pub g: Option<Vec<f64>>,
    /// File with one value (or one `re im` pair) per line.
    #[arg(long)]
    pub spectrum_file: Option<PathBuf>,
}

impl SpectrumSource {
    fn load(&self) -> Result<SingularSpectrum> {
        let values = match (&self.g, &self.spectrum_file) {
            (Some(g), None) => g.clone(),
            (None, Some(path)) => parse_spectrum_text(&fs::read_to_string(path)?)?,
            _ => return Err(Error::InvalidInput("give exactly one of --g and --spectrum-file".into())),
        };
        SingularSpectrum::new(&values)
    }
}

/// `lo:hi:n`, `n ≥ 2` evenly spaced points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.hi } else { self.lo + k as f64 * step })
            .collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(text: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("expected lo:hi:n, got `{text}`"));
        };
        let lo: f64 = lo.trim().parse().map_err(|e| format!("grid start: {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("grid end: {e}"))?;
        let points: usize = n.trim().parse().map_err(|e| format!("grid size: {e}"))?;
        if points < 2 {
            return Err("grid needs at least 2 points".into());
        }
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(format!("grid needs 0 ≤ lo < hi, got {lo}:{hi}"));
        }
        Ok(Grid { lo, hi, points })
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideArg {
    Lo,
    Hi,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    pub spectrum: SpectrumSource,
    #[arg(long)]
    pub grid: Grid,
    /// One-sided limit at grid points that hit a g value (default: average).
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[command(flatten)]
    pub spectrum: SpectrumSource,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    #[arg(long, default_value_t = 0.1)]
    pub bin_width: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: available parallelism). Does not affect output.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Histogram path; the report goes to `<stem>.report.csv` and the
    /// density-normalized histogram to `<stem>.density.csv` beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.02)]
    pub tv_threshold: f64,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub spectrum: SpectrumSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SpecialCommand {
    /// G = diag(g1, g, …, g).
    RankOne {
        #[arg(long)]
        g1: f64,
        #[arg(long = "g")]
        g: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        grid: Grid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// G = diag(0 × M, 1 × (N − M)).
    Truncated {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        grid: Grid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn side_of(arg: Option<SideArg>) -> Side {
    match arg {
        None => Side::Average,
        Some(SideArg::Lo) => Side::Below,
        Some(SideArg::Hi) => Side::Above,
    }
}

fn spectrum_header(spec: &SingularSpectrum) -> Result<String> {
    let mass = normalization(spec)?;
    let ring = spec.ring_atom().map_or("none".to_string(), num);
    Ok(format!(
        "# spectrum: {spec}\n# atom_at_origin: {}\n# ring_atom_at_s: {ring}\n# continuous_mass: {}\n# total_mass: {}\n",
        num(spec.atom_at_origin()),
        num(mass),
        num(mass + spec.atom_weight())
    ))
}

fn cmd_density(args: &CurveArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = args.spectrum.load()?;
    let side = side_of(args.side);
    let mut text = spectrum_header(&spec)?;
    text.push_str("s,psi\n");
    for s in args.grid.values() {
        let value = psi_side(&spec, s.max(f64::MIN_POSITIVE), side)?.continuous;
        text.push_str(&format!("{},{}\n", num(s), num(value)));
    }
    emit(out, args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_radial(args: &CurveArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = args.spectrum.load()?;
    let side = side_of(args.side);
    let mut text = spectrum_header(&spec)?;
    text.push_str("r,psi1\n");
    for r in args.grid.values() {
        let value = match (r > 0.0, side) {
            (false, _) => 0.0,
            (true, Side::Average) => psi_radial(&spec, r)?,
            (true, side) => 2.0 * r * psi_side(&spec, r * r, side)?.continuous,
        };
        text.push_str(&format!("{},{}\n", num(r), num(value)));
    }
    emit(out, args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn histogram_csv(hist: &RadialHistogram, report: &ComparisonReport, seed: u64, spec: &SingularSpectrum) -> String {
    let mut text = format!(
        "# spectrum: {spec}\n# samples: {}\n# seed: {seed}\n# bin_width: {}\n# discarded: {}\n# out_of_range: {}\n# annulus_violations: {}\n",
        hist.n_samples,
        num(hist.width()),
        hist.discarded,
        hist.out_of_range,
        hist.annulus_violations
    );
    text.push_str("bin_lo,bin_hi,count,expected,zscore\n");
    for b in &report.bins {
        text.push_str(&format!("{},{},{},{},{}\n", num(b.lo), num(b.hi), b.observed, num(b.expected), num(b.z)));
    }
    text
}

fn density_csv(hist: &RadialHistogram, report: &ComparisonReport) -> String {
    let norm = hist.retained() as f64 * hist.n_matrix as f64 * hist.width();
    let mut text = String::from("bin_lo,bin_hi,observed_density,expected_density\n");
    for b in &report.bins {
        text.push_str(&format!(
            "{},{},{},{}\n",
            num(b.lo),
            num(b.hi),
            num(b.observed as f64 / norm),
            num(b.expected / norm)
        ));
    }
    text
}

fn report_csv(report: &ComparisonReport) -> String {
    format!(
        "chi_square,dof,tv_distance,max_abs_z,discarded\n{},{},{},{},{}\n",
        num(report.chi_square),
        report.dof,
        num(report.tv_distance),
        num(report.max_abs_z),
        report.discarded
    )
}

fn cmd_mc(args: &McArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let spec = args.spectrum.load()?;
    if args.tv_threshold.is_nan() || args.tv_threshold < 0.0 {
        return Err(Error::InvalidInput("--tv-threshold must be nonnegative".into()));
    }
    let workers = match args.workers {
        Some(w) => w as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let hist = run_mc(&spec, args.samples, args.bin_width, args.seed, workers)?;
    if hist.retained() == 0 {
        return Err(Error::EmptyHistogram);
    }
    let expected = expected_histogram(&spec, &hist.edges, hist.retained())?;
    let report = compare(&hist, &expected)?;

    let hist_text = histogram_csv(&hist, &report, args.seed, &spec);
    let density_text = density_csv(&hist, &report);
    let report_text = report_csv(&report);
    match &args.out {
        Some(path) => {
            fs::write(path, hist_text)?;
            fs::write(sibling(path, "density"), density_text)?;
            fs::write(sibling(path, "report"), report_text)?;
        }
        None => write!(out, "{hist_text}\n{density_text}\n{report_text}")?,
    }
    if hist.discarded > 0 {
        writeln!(err, "warning: discarded {} samples (eigensolver did not converge)", hist.discarded)?;
    }
    if report.tv_distance > args.tv_threshold {
        writeln!(err, "tv_distance {} exceeds threshold {}", report.tv_distance, args.tv_threshold)?;
        return Ok(EXIT_THRESHOLD);
    }
    Ok(EXIT_OK)
}

/// One line of the `check` battery.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    /// `None` when the check does not apply to this spectrum.
    pub passed: Option<bool>,
    pub value: f64,
    pub tolerance: f64,
}

/// Points strictly inside each gap between consecutive block values.
fn interior_points(spec: &SingularSpectrum, per_gap: usize) -> Vec<f64> {
    let b = spec.breakpoints();
    b.windows(2)
        .flat_map(|w| (1..=per_gap).map(move |k| w[0] + (w[1] - w[0]) * k as f64 / (per_gap + 1) as f64))
        .collect()
}

pub fn run_checks(spec: &SingularSpectrum) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let interior = interior_points(spec, 7);

    let mass = normalization(spec)? + spec.atom_weight();
    out.push(CheckOutcome { name: "normalization", passed: Some((mass - 1.0).abs() <= 1e-8), value: mass, tolerance: 1e-8 });

    // zero outside [g_min, g_max], nonnegative inside
    let mut worst = 0.0f64;
    let outside = [spec.max() * 1.5 + 1.0, spec.max() * 1.01 + 1e-3, spec.min() * 0.5, spec.min() * 0.99];
    for s in outside.into_iter().filter(|&s| s > 0.0 && (s < spec.min() || s > spec.max())) {
        worst = worst.max(psi(spec, s)?.continuous.abs());
    }
    for &s in &interior {
        worst = worst.max(-psi(spec, s)?.continuous);
    }
    out.push(CheckOutcome { name: "support", passed: Some(worst <= 1e-12), value: worst, tolerance: 1e-12 });

    // closed sum against the integral representation, singleton blocks only
    let singles: Vec<usize> = spec.blocks().iter().filter(|b| b.len == 1 && b.value > 0.0).map(|b| b.start).collect();
    let mut worst = 0.0f64;
    let probes: Vec<f64> = interior.iter().copied().chain([spec.max() * 1.25]).filter(|&s| s > 0.0).collect();
    if spec.is_distinct() {
        for &i in &singles {
            for &s in &probes {
                let a = f_delta_sum(spec, i, s)?;
                let b = f_delta_quad(spec, i, s)?;
                worst = worst.max((a - b).abs() / a.abs().max(1.0));
            }
        }
    }
    let applies = spec.is_distinct() && !singles.is_empty() && !probes.is_empty();
    out.push(CheckOutcome {
        name: "path_equivalence",
        passed: applies.then_some(worst <= 1e-8),
        value: worst,
        tolerance: 1e-8,
    });

    // block terms sum to zero at every s
    let mut worst = 0.0f64;
    for &s in &probes {
        let mut acc = CompensatedSum::new();
        for b in spec.blocks() {
            acc.add(f_delta_block(spec, b, s)?);
        }
        worst = worst.max(acc.value().abs() / acc.abs_total().max(1.0));
    }
    out.push(CheckOutcome {
        name: "antisymmetry",
        passed: (spec.blocks().len() > 1).then_some(worst <= 1e-10),
        value: worst,
        tolerance: 1e-10,
    });

    // Ψ_{cG}(c·s) = Ψ_G(s)/c
    const C: f64 = 2.5;
    let scaled = spec.scaled(C)?;
    let mut worst = 0.0f64;
    for &s in &interior {
        let base = psi(spec, s)?.continuous;
        let other = psi(&scaled, C * s)?.continuous * C;
        worst = worst.max((base - other).abs() / base.abs().max(1e-300));
    }
    out.push(CheckOutcome {
        name: "scaling",
        passed: (!interior.is_empty()).then_some(worst <= 1e-9),
        value: worst,
        tolerance: 1e-9,
    });
    Ok(out)
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = args.spectrum.load()?;
    let outcomes = run_checks(&spec)?;
    let mut text = spectrum_header(&spec)?;
    text.push_str("check,status,value,tolerance\n");
    for c in &outcomes {
        let status = match c.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "n/a",
        };
        text.push_str(&format!("{},{status},{},{}\n", c.name, num(c.value), num(c.tolerance)));
    }
    emit(out, args.out.as_deref(), &text)?;
    let failed = outcomes.iter().any(|c| c.passed == Some(false));
    Ok(if failed { EXIT_THRESHOLD } else { EXIT_OK })
}

/// Closed form next to the general evaluator (the latter renormalized by its
/// continuous mass); the trailer carries the largest relative deviation.
fn special_table(
    spec: &SingularSpectrum,
    closed: impl Fn(f64) -> f64,
    grid: Grid,
    out: &mut dyn Write,
    path: Option<&Path>,
) -> Result<i32> {
    let mass = normalization(spec)?;
    let mut text = format!("# spectrum: {spec}\n# continuous_mass: {}\ns,closed_form,general\n", num(mass));
    let mut worst = 0.0f64;
    for s in grid.values() {
        let c = closed(s);
        let g = if s > 0.0 { psi(spec, s)?.continuous / mass } else { 0.0 };
        let inside = s > spec.min().max(0.0) && s < spec.max() && !spec.breakpoints().contains(&s);
        if inside {
            worst = worst.max((c - g).abs() / c.abs().max(1e-300));
        }
        text.push_str(&format!("{},{},{}\n", num(s), num(c), num(g)));
    }
    text.push_str(&format!("# max_relative_deviation: {}\n", num(worst)));
    emit(out, path, &text)?;
    Ok(EXIT_OK)
}

fn cmd_special(cmd: &SpecialCommand, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        SpecialCommand::RankOne { g1, g, n, grid, out: path } => {
            let profile = RankOneProfile::new(*g1, *g, *n)?;
            let mut values = vec![*g; *n];
            values[0] = *g1;
            let spec = SingularSpectrum::new(&values)?;
            special_table(&spec, |s| profile.eval(s), *grid, out, path.as_deref())
        }
        SpecialCommand::Truncated { m, n, grid, out: path } => {
            let profile = TruncatedProfile::new(*m, *n)?;
            let values: Vec<f64> = (0..*n).map(|k| if k < *m { 0.0 } else { 1.0 }).collect();
            let spec = SingularSpectrum::new(&values)?;
            special_table(&spec, |s| profile.eval(s), *grid, out, path.as_deref())
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Density(a) => cmd_density(a, out),
        Command::Radial(a) => cmd_radial(a, out),
        Command::Mc(a) => cmd_mc(a, out, err),
        Command::Check(a) => cmd_check(a, out),
        Command::Special(c) => cmd_special(c, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_USAGE
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "0.5:5:10".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 10);
        assert_eq!(v[0], 0.5);
        assert_eq!(v[9], 5.0);
        assert_eq!(v[3], 2.0);
        assert!("1:2:1".parse::<Grid>().is_err());
        assert!("2:1:5".parse::<Grid>().is_err());
        assert!("1:2".parse::<Grid>().is_err());
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("/tmp/h.csv"), "report"), PathBuf::from("/tmp/h.report.csv"));
    }

    #[test]
    fn number_format() {
        assert_eq!(num(1.0 / 3.0), "3.3333333333333331e-1");
    }
}
