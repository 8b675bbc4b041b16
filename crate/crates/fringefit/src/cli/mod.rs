//! Command-line interface: simulate scans, run estimators, compare their
//! hit frequencies, aggregate ensembles, and histogram visibilities.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! malformed data files, 3 when results were produced but at least one fit
//! failed to converge.

pub mod config;
pub mod io;

use crate::error::{Error, Result};
use crate::harness::{
    delta_e_curve, delta_e_from_estimates, dft_batch, ensemble_stats, maxlik_batch,
    visibility_histogram, WindowGrid,
};
use crate::model::{AuxShiftGrid, FringeSample, PhaseEstimate, SetupParams};
use crate::simulator::{derive_run_seed, run_batch, BatchSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{parse_config_file, PartialConfig, ScenarioConfig};
use io::{
    read_estimates, read_samples, write_curve, write_estimates, write_histogram, write_samples,
    EstimateRow, Method,
};
use std::ffi::OsString;
use std::path::PathBuf;

/// Run the CLI against the process arguments and environment.
pub fn run() -> i32 {
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 1;
    }
    run_from(std::env::args_os())
}

/// Run the CLI against explicit arguments (the first one is the program
/// name).  Does not touch the global thread pool, so tests can call it
/// repeatedly in one process.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

/// Cap the global worker pool from `FRINGEFIT_THREADS` when set.
fn configure_threads() -> std::result::Result<(), String> {
    let raw = match std::env::var("FRINGEFIT_THREADS") {
        Ok(raw) => raw,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(err) => return Err(format!("FRINGEFIT_THREADS: {err}")),
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("FRINGEFIT_THREADS must be a positive integer, got `{raw}`"))?;
    if threads == 0 {
        return Err("FRINGEFIT_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|err| err.to_string())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::DataMismatch(_)
        | Error::EmptyInput(_)
        | Error::UndefinedGradient => 2,
        _ => 1,
    }
}

#[derive(Parser)]
#[command(
    name = "fringefit",
    version,
    about = "Phase estimation for interferometric count data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw Poissonian phase-shift scans and write them as CSV
    Simulate(SimulateArgs),
    /// Run one estimator over a sample file
    Estimate(EstimateArgs),
    /// Compare both estimators' hit frequencies over a window grid
    Compare(CompareArgs),
    /// Average comparison curves over repeated runs
    Ensemble(EnsembleArgs),
    /// Histogram normalized visibility estimates
    Visibility(VisibilityArgs),
    /// Run a named preset end to end
    Scenario(ScenarioArgs),
}

/// Model and pipeline settings shared by the generating commands.  Flags
/// override config-file values, which override the built-in defaults.
#[derive(Args, Clone)]
struct ModelFlags {
    /// Config file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mean o-beam count per position
    #[arg(long)]
    i_o: Option<f64>,
    /// Mean h-beam count per position
    #[arg(long)]
    i_h: Option<f64>,
    /// Interference amplitude
    #[arg(long)]
    i_v: Option<f64>,
    /// True phase in radians
    #[arg(long)]
    theta: Option<f64>,
    /// Number of phase-shifter positions per scan
    #[arg(long)]
    positions: Option<usize>,
    /// Number of scans per run
    #[arg(long)]
    samples: Option<usize>,
    /// Number of repeated runs
    #[arg(long)]
    runs: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Number of uniformly spaced window widths
    #[arg(long)]
    windows: Option<usize>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ModelFlags {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            i_o: self.i_o,
            i_h: self.i_h,
            i_v: self.i_v,
            theta: self.theta,
            positions: self.positions,
            samples: self.samples,
            runs: self.runs,
            seed: self.seed,
            windows: self.windows,
            out: self.out.clone(),
        }
    }

    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut merged = PartialConfig::default();
        if let Some(path) = &self.config {
            merged = merged.overlaid(parse_config_file(path)?);
        }
        let cfg = merged.overlaid(self.partial()).resolve()?;
        if cfg.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Discrete-transform estimator derived from the Gaussian noise model
    GaussDft,
    /// Poissonian maximum-likelihood estimator
    PoissonMl,
}

impl From<MethodArg> for Method {
    fn from(value: MethodArg) -> Method {
        match value {
            MethodArg::GaussDft => Method::GaussDft,
            MethodArg::PoissonMl => Method::PoissonMl,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample CSV to read
    #[arg(long)]
    input: PathBuf,
    /// Estimator to run
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Output estimate CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Sample CSV; both estimators run on it
    #[arg(long)]
    input: Option<PathBuf>,
    /// Precomputed gauss-dft estimate CSV (requires --poisson)
    #[arg(long)]
    gauss: Option<PathBuf>,
    /// Precomputed poisson-ml estimate CSV (requires --gauss)
    #[arg(long)]
    poisson: Option<PathBuf>,
    /// True phase the hit windows are centered on
    #[arg(long)]
    theta: f64,
    /// Number of uniformly spaced window widths
    #[arg(long, default_value_t = 32)]
    windows: usize,
    /// Output curve CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct VisibilityArgs {
    #[command(flatten)]
    model: ModelFlags,
    /// Estimator to run
    #[arg(long, value_enum, default_value_t = MethodArg::PoissonMl)]
    method: MethodArg,
    /// Number of histogram bins
    #[arg(long, default_value_t = 30)]
    bins: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScenarioName {
    Fig2,
    Fig3a,
    Fig3c,
    Fig4,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Preset to run
    #[arg(value_enum)]
    name: ScenarioName,
    /// Override the preset sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Override the preset run count
    #[arg(long)]
    runs: Option<usize>,
    /// Override the preset seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the preset window count
    #[arg(long)]
    windows: Option<usize>,
    /// Override the preset output path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum ScenarioKind {
    Ensemble,
    Visibility,
}

/// Built-in scenario presets: three comparison ensembles at different beam
/// intensities and one visibility histogram at high counts.
fn preset(name: ScenarioName) -> (PartialConfig, ScenarioKind) {
    let base = PartialConfig {
        i_o: Some(2.21),
        i_h: Some(6.33),
        i_v: Some(1.03),
        theta: Some(4.83),
        positions: Some(8),
        samples: Some(690),
        runs: Some(20),
        seed: Some(42),
        windows: Some(32),
        out: Some(PathBuf::from("fig2_delta_e.csv")),
    };
    match name {
        ScenarioName::Fig2 => (base, ScenarioKind::Ensemble),
        ScenarioName::Fig3a => (
            PartialConfig {
                i_v: Some(0.258),
                out: Some(PathBuf::from("fig3a_delta_e.csv")),
                ..base
            },
            ScenarioKind::Ensemble,
        ),
        ScenarioName::Fig3c => (
            PartialConfig {
                i_o: Some(0.551),
                i_h: Some(1.582),
                i_v: Some(0.258),
                out: Some(PathBuf::from("fig3c_delta_e.csv")),
                ..base
            },
            ScenarioKind::Ensemble,
        ),
        ScenarioName::Fig4 => (
            PartialConfig {
                i_o: Some(22.1),
                i_h: Some(63.3),
                i_v: Some(10.3),
                samples: Some(5000),
                runs: Some(1),
                out: Some(PathBuf::from("fig4_visibility.csv")),
                ..base
            },
            ScenarioKind::Visibility,
        ),
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Ensemble(args) => {
            let cfg = args.model.resolve()?;
            let grid = WindowGrid::uniform(cfg.windows)?;
            run_ensemble(&cfg, &grid)
        }
        Command::Visibility(args) => {
            let cfg = args.model.resolve()?;
            run_visibility(&cfg, args.method.into(), args.bins)
        }
        Command::Scenario(args) => cmd_scenario(args),
    }
}

fn make_batch(cfg: &ScenarioConfig, master_seed: u64) -> Result<Vec<FringeSample>> {
    let params = SetupParams::new(cfg.i_o, cfg.i_h, cfg.i_v, cfg.theta)?;
    let grid = AuxShiftGrid::equidistant(cfg.positions)?;
    Ok(run_batch(&BatchSpec {
        params,
        grid,
        sample_count: cfg.samples,
        master_seed,
    }))
}

fn estimate_rows(ids: &[u64], samples: &[FringeSample], method: Method) -> (Vec<EstimateRow>, usize) {
    match method {
        Method::GaussDft => {
            let rows = dft_batch(samples)
                .into_iter()
                .zip(ids)
                .map(|(estimate, &sample_id)| EstimateRow {
                    sample_id,
                    method,
                    estimate,
                    converged: true,
                })
                .collect();
            (rows, 0)
        }
        Method::PoissonMl => {
            let fits = maxlik_batch(samples);
            let nonconverged = fits.iter().filter(|(_, report)| !report.converged).count();
            let rows = fits
                .into_iter()
                .zip(ids)
                .map(|((estimate, report), &sample_id)| EstimateRow {
                    sample_id,
                    method,
                    estimate,
                    converged: report.converged,
                })
                .collect();
            (rows, nonconverged)
        }
    }
}

fn nonconvergence_exit(nonconverged: usize, total: usize) -> i32 {
    if nonconverged > 0 {
        eprintln!("warning: {nonconverged} of {total} fits did not converge");
        3
    } else {
        0
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let cfg = args.model.resolve()?;
    let batch = make_batch(&cfg, cfg.seed)?;
    let ids: Vec<u64> = (0..batch.len() as u64).collect();
    write_samples(&cfg.out, &ids, &batch)?;
    println!(
        "wrote {} samples ({} positions, seed {}) to {}",
        batch.len(),
        cfg.positions,
        cfg.seed,
        cfg.out.display()
    );
    Ok(0)
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    let (ids, samples) = read_samples(&args.input)?;
    let method: Method = args.method.into();
    let (rows, nonconverged) = estimate_rows(&ids, &samples, method);
    write_estimates(&args.out, &rows)?;
    println!(
        "estimated {} samples with {} to {}",
        rows.len(),
        method.as_str(),
        args.out.display()
    );
    Ok(nonconvergence_exit(nonconverged, rows.len()))
}

fn cmd_compare(args: CompareArgs) -> Result<i32> {
    let grid = WindowGrid::uniform(args.windows)?;
    let (curve, fits) = match (&args.input, &args.gauss, &args.poisson) {
        (Some(input), None, None) => {
            let (_ids, samples) = read_samples(input)?;
            let fits = samples.len();
            (delta_e_curve(&samples, args.theta, &grid)?, fits)
        }
        (None, Some(gauss_path), Some(poisson_path)) => {
            let gauss_rows = read_estimates(gauss_path)?;
            let poisson_rows = read_estimates(poisson_path)?;
            if gauss_rows.iter().any(|r| r.method != Method::GaussDft) {
                return Err(Error::DataMismatch(format!(
                    "{} contains rows not produced by gauss-dft",
                    gauss_path.display()
                )));
            }
            if poisson_rows.iter().any(|r| r.method != Method::PoissonMl) {
                return Err(Error::DataMismatch(format!(
                    "{} contains rows not produced by poisson-ml",
                    poisson_path.display()
                )));
            }
            if gauss_rows.len() != poisson_rows.len()
                || gauss_rows
                    .iter()
                    .zip(&poisson_rows)
                    .any(|(g, p)| g.sample_id != p.sample_id)
            {
                return Err(Error::DataMismatch(
                    "sample ids differ between the gauss and poisson estimate files".into(),
                ));
            }
            let nonconverged = gauss_rows
                .iter()
                .chain(&poisson_rows)
                .filter(|r| !r.converged)
                .count();
            let gauss: Vec<PhaseEstimate> = gauss_rows.into_iter().map(|r| r.estimate).collect();
            let poisson: Vec<PhaseEstimate> =
                poisson_rows.into_iter().map(|r| r.estimate).collect();
            let fits = poisson.len();
            (
                delta_e_from_estimates(&gauss, &poisson, args.theta, &grid, nonconverged)?,
                fits,
            )
        }
        _ => {
            return Err(Error::Config(
                "pass either --input with a sample file, or both --gauss and --poisson estimate files"
                    .into(),
            ))
        }
    };
    write_curve(&args.out, &curve)?;
    println!(
        "wrote comparison over {} windows to {}",
        curve.windows.len(),
        args.out.display()
    );
    Ok(nonconvergence_exit(curve.nonconverged, fits))
}

fn run_ensemble(cfg: &ScenarioConfig, grid: &WindowGrid) -> Result<i32> {
    if cfg.runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    let mut curves = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let batch = make_batch(cfg, derive_run_seed(cfg.seed, run as u64))?;
        curves.push(delta_e_curve(&batch, cfg.theta, grid)?);
    }
    let stats = ensemble_stats(&curves)?;
    write_curve(&cfg.out, &stats)?;
    println!(
        "wrote ensemble of {} runs over {} windows to {}",
        cfg.runs,
        grid.len(),
        cfg.out.display()
    );
    Ok(nonconvergence_exit(
        stats.nonconverged,
        cfg.runs * cfg.samples,
    ))
}

fn run_visibility(cfg: &ScenarioConfig, method: Method, bins: usize) -> Result<i32> {
    let batch = make_batch(cfg, cfg.seed)?;
    let ids: Vec<u64> = (0..batch.len() as u64).collect();
    let (rows, nonconverged) = estimate_rows(&ids, &batch, method);
    let estimates: Vec<PhaseEstimate> = rows.iter().map(|r| r.estimate.clone()).collect();
    let true_value = if cfg.i_o > 0.0 { cfg.i_v / cfg.i_o } else { 0.0 };
    let hist = visibility_histogram(&estimates, true_value, bins)?;
    write_histogram(&cfg.out, &hist)?;
    println!(
        "wrote visibility histogram of {} estimates to {}",
        estimates.len(),
        cfg.out.display()
    );
    Ok(nonconvergence_exit(nonconverged, estimates.len()))
}

fn cmd_scenario(args: ScenarioArgs) -> Result<i32> {
    let (partial, kind) = preset(args.name);
    let overrides = PartialConfig {
        samples: args.samples,
        runs: args.runs,
        seed: args.seed,
        windows: args.windows,
        out: args.out.clone(),
        ..Default::default()
    };
    let cfg = partial.overlaid(overrides).resolve()?;
    if cfg.samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    match kind {
        ScenarioKind::Ensemble => {
            let grid = WindowGrid::uniform(cfg.windows)?.with_extra(1.256)?;
            run_ensemble(&cfg, &grid)
        }
        ScenarioKind::Visibility => run_visibility(&cfg, Method::PoissonMl, 30),
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
    fn presets_pin_the_published_setups() {
        let (fig2, kind) = preset(ScenarioName::Fig2);
        assert_eq!(kind, ScenarioKind::Ensemble);
        assert_eq!(fig2.i_o, Some(2.21));
        assert_eq!(fig2.i_h, Some(6.33));
        assert_eq!(fig2.i_v, Some(1.03));
        assert_eq!(fig2.theta, Some(4.83));
        assert_eq!(fig2.positions, Some(8));
        assert_eq!(fig2.samples, Some(690));
        assert_eq!(fig2.runs, Some(20));

        let (fig3a, _) = preset(ScenarioName::Fig3a);
        assert_eq!(fig3a.i_v, Some(0.258));
        assert_eq!(fig3a.i_o, Some(2.21));

        let (fig3c, _) = preset(ScenarioName::Fig3c);
        assert_eq!(fig3c.i_o, Some(0.551));
        assert_eq!(fig3c.i_h, Some(1.582));
        assert_eq!(fig3c.i_v, Some(0.258));

        let (fig4, kind) = preset(ScenarioName::Fig4);
        assert_eq!(kind, ScenarioKind::Visibility);
        assert_eq!(fig4.i_o, Some(22.1));
        assert_eq!(fig4.i_h, Some(63.3));
        assert_eq!(fig4.i_v, Some(10.3));
        assert_eq!(fig4.samples, Some(5000));
    }

    #[test]
    fn exit_codes_distinguish_config_and_data_errors() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(exit_code(&Error::InvalidParams("x".into())), 1);
        assert_eq!(
            exit_code(&Error::Parse {
                path: "f".into(),
                line: 1,
                msg: "m".into()
            }),
            2
        );
        assert_eq!(exit_code(&Error::DataMismatch("x".into())), 2);
        assert_eq!(exit_code(&Error::EmptyInput("samples")), 2);
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run_from(["fringefit", "no-such-command"]), 1);
        assert_eq!(run_from(["fringefit", "estimate"]), 1);
    }
}
