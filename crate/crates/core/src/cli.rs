//! Command-line drivers: single runs, convergence studies and stability sweeps.
//!
//! Output is CSV with one row per refinement level. Floats are written with
//! 17 significant digits so every value parses back bit for bit.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{convergence_rates, evaluate, ErrorReport, RateFit};
use crate::exact::{ExampleKind, EXAMPLE2_DEFAULT_TERMS};
use crate::fe::dofmap::TrialConfig;
use crate::mesh::TimeGrid;
use crate::parallel::{init_thread_pool, Parallelism};
use crate::stepper::{run, RunConfig};
use crate::{DpgError, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "DPG_HEAT_THREADS";

pub const CSV_HEADER: [&str; 14] = [
    "n",
    "h",
    "k",
    "N",
    "dofs",
    "err_u",
    "err_sigma",
    "err_hat_u",
    "err_hat_sigma",
    "err_u0",
    "err_energy",
    "stability_ratio",
    "C_n",
    "runtime_s",
];

/// Tolerances used by `--check`.
pub const STABILITY_TOL: f64 = 1e-8;
pub const BOUND_TOL: f64 = 1e-6;
pub const SLOPE_RANGE: (f64, f64) = (0.35, 0.65);
pub const LINEAR_U_MIN_SLOPE: f64 = 0.55;

/// How the time step follows the mesh size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Coupling {
    /// `k = c·√h`
    Sqrt,
    /// `k = c·h`
    Linear,
    /// `k = c·h^{2/3}`
    TwoThirds,
}

impl Coupling {
    pub fn step(self, h: f64, c: f64) -> f64 {
        match self {
            Coupling::Sqrt => c * h.sqrt(),
            Coupling::Linear => c * h,
            Coupling::TwoThirds => c * h.powf(2.0 / 3.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Coupling::Sqrt => "sqrt",
            Coupling::Linear => "linear",
            Coupling::TwoThirds => "two-thirds",
        }
    }
}

/// Default coupling constant: 1/20 for Example 1, 1/10 for Example 2.
pub fn default_c(example: ExampleKind) -> f64 {
    match example {
        ExampleKind::One => 1.0 / 20.0,
        ExampleKind::Two { .. } => 1.0 / 10.0,
    }
}

/// Everything but the mesh level.
#[derive(Debug, Clone, Copy)]
pub struct Experiment {
    pub example: ExampleKind,
    pub coupling: Coupling,
    pub c: f64,
    pub final_time: f64,
    pub trial: TrialConfig,
    pub parallelism: Parallelism,
}

impl Experiment {
    pub fn new(example: ExampleKind, coupling: Coupling) -> Self {
        Self {
            example,
            coupling,
            c: default_c(example),
            final_time: 0.1,
            trial: TrialConfig::default(),
            parallelism: Parallelism::available(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(DpgError::InvalidConfig(format!("c must be positive, got {}", self.c)));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(DpgError::InvalidConfig(format!(
                "T must be positive, got {}",
                self.final_time
            )));
        }
        if let ExampleKind::Two { terms: 0 } = self.example {
            return Err(DpgError::InvalidConfig(
                "Example 2 needs at least one Fourier term".into(),
            ));
        }
        Ok(())
    }

    /// Time grid for mesh level `n`: `N = ceil(T/k)`, then `k = T/N`.
    pub fn grid(&self, n: usize) -> Result<TimeGrid> {
        let h = std::f64::consts::SQRT_2 / n as f64;
        TimeGrid::with_max_step(self.final_time, self.coupling.step(h, self.c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelResult {
    pub report: ErrorReport,
    /// Largest `(‖uⁿ_h‖² + k‖σⁿ_h‖²)^{1/2} / (‖uⁿ⁻¹_h‖ + k‖fⁿ‖)` over all steps.
    pub max_step_ratio: f64,
}

pub fn run_level(experiment: &Experiment, n: usize) -> Result<LevelResult> {
    let inner = || {
        experiment.validate()?;
        let start = Instant::now();
        let config = RunConfig {
            n,
            grid: experiment.grid(n)?,
            trial: experiment.trial,
            parallelism: experiment.parallelism,
        };
        let exact = experiment.example.build();
        let out = run(&config, exact.as_ref())?;
        let mut report = evaluate(&out, exact.as_ref(), experiment.parallelism)?;
        report.runtime_s = start.elapsed().as_secs_f64();
        let max_step_ratio = out.diagnostics.iter().map(|d| d.step_ratio()).fold(0.0, f64::max);
        Ok(LevelResult { report, max_step_ratio })
    };
    inner().map_err(|e: DpgError| e.at_level(n))
}

/// One result per level, in the order given. `level_parallelism` runs levels concurrently.
pub fn run_converge(
    experiment: &Experiment,
    levels: &[usize],
    level_parallelism: Parallelism,
) -> Result<Vec<LevelResult>> {
    validate_levels(levels)?;
    level_parallelism.try_map_indexed(levels.len(), |i| run_level(experiment, levels[i]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow {
    pub coupling: Coupling,
    pub level: LevelResult,
}

/// Levels for `k = c·h` and `k = c·√h`, in that order.
pub fn run_stability(
    experiment: &Experiment,
    levels: &[usize],
    level_parallelism: Parallelism,
) -> Result<Vec<StabilityRow>> {
    let mut rows = Vec::with_capacity(2 * levels.len());
    for coupling in [Coupling::Linear, Coupling::Sqrt] {
        let e = Experiment {
            coupling,
            ..*experiment
        };
        for level in run_converge(&e, levels, level_parallelism)? {
            rows.push(StabilityRow { coupling, level });
        }
    }
    Ok(rows)
}

pub fn validate_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return Err(DpgError::InvalidConfig("at least one level is required".into()));
    }
    if levels.contains(&0) {
        return Err(DpgError::InvalidConfig("levels must be positive".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DpgError::InvalidConfig(format!(
            "levels must be strictly ascending, got {levels:?}"
        )));
    }
    Ok(())
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn report_fields(r: &ErrorReport) -> Vec<String> {
    vec![
        r.n.to_string(),
        float(r.h),
        float(r.k),
        r.steps.to_string(),
        r.dofs.to_string(),
        float(r.err_u),
        float(r.err_sigma),
        float(r.err_hat_u),
        float(r.err_hat_sigma),
        float(r.err_u0),
        float(r.err_energy),
        float(r.stability_ratio),
        float(r.c_n),
        float(r.runtime_s),
    ]
}

pub fn write_reports<W: Write>(out: W, reports: &[ErrorReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(report_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Stability CSV: the report columns preceded by `coupling` and followed by `max_step_ratio`.
pub fn write_stability<W: Write>(out: W, rows: &[StabilityRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["coupling"];
    header.extend(CSV_HEADER);
    header.push("max_step_ratio");
    w.write_record(&header)?;
    for row in rows {
        let mut fields = vec![row.coupling.name().to_string()];
        fields.extend(report_fields(&row.level.report));
        fields.push(float(row.level.max_step_ratio));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse rows written by [`write_reports`] or [`write_stability`]. Extra columns are ignored.
pub fn read_reports<R: Read>(input: R) -> Result<Vec<ErrorReport>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DpgError::InvalidConfig(format!("CSV column {name} missing")))
    };
    let idx: Vec<usize> = CSV_HEADER.iter().map(|h| column(h)).collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(idx[i]).unwrap_or_default();
        let f = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|e| DpgError::InvalidConfig(format!("column {}: {e}", CSV_HEADER[i])))
        };
        let u = |i: usize| {
            field(i)
                .parse::<usize>()
                .map_err(|e| DpgError::InvalidConfig(format!("column {}: {e}", CSV_HEADER[i])))
        };
        reports.push(ErrorReport {
            n: u(0)?,
            h: f(1)?,
            k: f(2)?,
            steps: u(3)?,
            dofs: u(4)?,
            err_u: f(5)?,
            err_sigma: f(6)?,
            err_hat_u: f(7)?,
            err_hat_sigma: f(8)?,
            err_u0: f(9)?,
            err_energy: f(10)?,
            stability_ratio: f(11)?,
            c_n: f(12)?,
            runtime_s: f(13)?,
            x2_bound: 0.0,
        });
        let r = reports.last_mut().unwrap();
        r.x2_bound = crate::analysis::x2_bound(r.err_u, r.err_sigma, r.err_hat_u, r.err_hat_sigma);
    }
    Ok(reports)
}

/// Outcome of one `--check` criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn slope_of(results: &[LevelResult], pick: impl Fn(&ErrorReport) -> f64) -> Result<RateFit> {
    let h: Vec<f64> = results.iter().map(|r| r.report.h).collect();
    let e: Vec<f64> = results.iter().map(|r| pick(&r.report)).collect();
    convergence_rates(&h, &e)
}

fn per_row_checks(results: &[LevelResult]) -> Vec<Check> {
    let stab = results
        .iter()
        .map(|r| r.report.stability_ratio.max(r.max_step_ratio))
        .fold(0.0, f64::max);
    let field = results.iter().all(|r| r.report.field_energy_bound_holds(BOUND_TOL));
    let x2 = results.iter().all(|r| r.report.energy_x2_bound_holds(BOUND_TOL));
    vec![
        Check::new(
            "stability",
            stab <= 1.0 + STABILITY_TOL,
            format!("max ratio {stab:.10}"),
        ),
        Check::new("field <= energy", field, "err_u² + err_σ² ≤ err_energy²"),
        Check::new("energy <= sqrt3 x2", x2, "err_energy ≤ √3·x2_bound"),
    ]
}

/// Criteria for a convergence study.
pub fn converge_checks(experiment: &Experiment, results: &[LevelResult]) -> Result<Vec<Check>> {
    let mut checks = per_row_checks(results);
    if results.len() < 2 {
        return Ok(checks);
    }
    let u = slope_of(results, |r| r.err_u)?;
    if experiment.trial.u_degree() == 1 {
        checks.push(Check::new(
            "err_u slope",
            u.slope >= LINEAR_U_MIN_SLOPE,
            format!("{:.4} (min {LINEAR_U_MIN_SLOPE})", u.slope),
        ));
    } else {
        let (lo, hi) = SLOPE_RANGE;
        checks.push(Check::new(
            "err_u slope",
            (lo..=hi).contains(&u.slope),
            format!("{:.4}", u.slope),
        ));
        if experiment.example == ExampleKind::One {
            let s = slope_of(results, |r| r.err_sigma)?;
            checks.push(Check::new(
                "err_sigma slope",
                (lo..=hi).contains(&s.slope),
                format!("{:.4}", s.slope),
            ));
        }
    }
    Ok(checks)
}

pub fn stability_checks(rows: &[StabilityRow]) -> Vec<Check> {
    [Coupling::Linear, Coupling::Sqrt]
        .into_iter()
        .map(|c| {
            let worst = rows
                .iter()
                .filter(|r| r.coupling == c)
                .map(|r| r.level.report.stability_ratio.max(r.level.max_step_ratio))
                .fold(0.0, f64::max);
            Check::new(
                format!("stability ({})", c.name()),
                worst <= 1.0 + STABILITY_TOL,
                format!("max ratio {worst:.10}"),
            )
        })
        .collect()
}

#[derive(Debug, Parser)]
#[command(
    name = "dpg-heat",
    version,
    about = "DPG backward-Euler solver for the heat equation on the unit square"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (overridden by DPG_HEAT_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single mesh level.
    Run {
        /// Subdivisions per side.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Error table over refinement levels.
    Converge {
        #[command(flatten)]
        study: StudyArgs,
    },
    /// Stability ratios for k = c·h and k = c·√h.
    Stability {
        #[command(flatten)]
        study: StudyArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: u8,
    #[arg(long, value_enum, default_value_t = Coupling::Sqrt)]
    pub coupling: Coupling,
    /// Coupling constant (default 1/20 for Example 1, 1/10 for Example 2).
    #[arg(long)]
    pub c: Option<f64>,
    /// Final time.
    #[arg(long = "T", default_value_t = 0.1)]
    pub final_time: f64,
    #[arg(long, default_value_t = 0)]
    pub u_degree: usize,
    /// Fourier terms for Example 2.
    #[arg(long, default_value_t = EXAMPLE2_DEFAULT_TERMS)]
    pub terms: usize,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 3 if an acceptance criterion fails.
    #[arg(long)]
    pub check: bool,
    /// Assemble element by element on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 16, 32])]
    pub levels: Vec<usize>,
    /// Run levels concurrently.
    #[arg(long)]
    pub parallel_levels: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

impl CommonArgs {
    pub fn experiment(&self) -> Result<Experiment> {
        let example = match self.example {
            1 => ExampleKind::One,
            _ => ExampleKind::Two { terms: self.terms },
        };
        let experiment = Experiment {
            example,
            coupling: self.coupling,
            c: self.c.unwrap_or_else(|| default_c(example)),
            final_time: self.final_time,
            trial: TrialConfig::new(self.u_degree)?,
            parallelism: if self.sequential {
                Parallelism::Sequential
            } else {
                Parallelism::available()
            },
        };
        experiment.validate()?;
        Ok(experiment)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| DpgError::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => match flag {
            Some(0) => Err(DpgError::InvalidConfig("--threads must be positive".into())),
            other => Ok(other),
        },
    }
}

fn report_checks(checks: &[Check]) -> bool {
    for c in checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn level_parallelism(flag: bool) -> Parallelism {
    if flag {
        Parallelism::available()
    } else {
        Parallelism::Sequential
    }
}

fn log_rates(results: &[LevelResult]) {
    if results.len() < 2 {
        return;
    }
    for (name, pick) in [
        ("err_u", (|r: &ErrorReport| r.err_u) as fn(&ErrorReport) -> f64),
        ("err_sigma", |r| r.err_sigma),
        ("err_hat_u", |r| r.err_hat_u),
        ("err_hat_sigma", |r| r.err_hat_sigma),
        ("err_energy", |r| r.err_energy),
    ] {
        if let Ok(fit) = slope_of(results, pick) {
            let pairs: Vec<String> = fit.pairwise.iter().map(|r| format!("{r:.3}")).collect();
            eprintln!("{name}: slope {:.4} (pairwise {})", fit.slope, pairs.join(", "));
        }
    }
}

/// Run a parsed command line; `Ok(false)` means a `--check` criterion failed.
pub fn execute(cli: Cli) -> Result<bool> {
    if let Some(threads) = thread_count(cli.threads)? {
        init_thread_pool(threads);
    }
    match cli.command {
        Command::Run { n, common } => {
            let experiment = common.experiment()?;
            let result = run_converge(&experiment, &[n], Parallelism::Sequential)?;
            write_reports(output(common.out.as_deref())?, &[result[0].report])?;
            Ok(!common.check || report_checks(&converge_checks(&experiment, &result)?))
        }
        Command::Converge { study } => {
            let experiment = study.common.experiment()?;
            let results = run_converge(&experiment, &study.levels, level_parallelism(study.parallel_levels))?;
            let reports: Vec<ErrorReport> = results.iter().map(|r| r.report).collect();
            write_reports(output(study.common.out.as_deref())?, &reports)?;
            log_rates(&results);
            Ok(!study.common.check || report_checks(&converge_checks(&experiment, &results)?))
        }
        Command::Stability { study } => {
            let experiment = study.common.experiment()?;
            let rows = run_stability(&experiment, &study.levels, level_parallelism(study.parallel_levels))?;
            write_stability(output(study.common.out.as_deref())?, &rows)?;
            Ok(!study.common.check || report_checks(&stability_checks(&rows)))
        }
    }
}

/// Parse `args`, run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                EXIT_SOLVER
            } else {
                EXIT_CONFIG
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn sample_report() -> ErrorReport {
        ErrorReport {
            n: 8,
            h: SQRT_2 / 8.0,
            k: 0.1 / 7.0,
            steps: 7,
            dofs: 417,
            err_u: 0.1 + 1e-17,
            err_sigma: std::f64::consts::PI * 1e-3,
            err_hat_u: 1.0 / 3.0,
            err_hat_sigma: 2.0f64.powi(-40),
            err_u0: 0.0,
            err_energy: 1e300,
            stability_ratio: 0.999999999999,
            x2_bound: 0.0,
            c_n: SQRT_2,
            runtime_s: 0.125,
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = sample_report();
        let mut buf = Vec::new();
        write_reports(&mut buf, &[r, r]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "n,h,k,N,dofs,err_u,err_sigma,err_hat_u,err_hat_sigma,err_u0,err_energy,stability_ratio,C_n,runtime_s\n"
        ));
        let back = read_reports(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        let b = back[0];
        for (x, y) in [
            (r.h, b.h),
            (r.k, b.k),
            (r.err_u, b.err_u),
            (r.err_sigma, b.err_sigma),
            (r.err_hat_u, b.err_hat_u),
            (r.err_hat_sigma, b.err_hat_sigma),
            (r.err_energy, b.err_energy),
            (r.stability_ratio, b.stability_ratio),
            (r.c_n, b.c_n),
        ] {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!((b.n, b.steps, b.dofs), (8, 7, 417));
    }

    #[test]
    fn missing_column_is_reported() {
        let err = read_reports("n,h\n1,2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("column k missing"));
    }

    #[test]
    fn couplings_and_grid() {
        assert_eq!(Coupling::Linear.step(0.5, 0.1), 0.05);
        assert!((Coupling::Sqrt.step(0.25, 0.1) - 0.05).abs() < 1e-16);
        assert!((Coupling::TwoThirds.step(0.125, 1.0) - 0.25).abs() < 1e-15);
        let e = Experiment::new(ExampleKind::One, Coupling::Linear);
        let grid = e.grid(4).unwrap();
        // k = (√2/4)/20 ≈ 0.0177 → N = 6.
        assert_eq!(grid.steps, 6);
        assert!((grid.step_size - 0.1 / 6.0).abs() < 1e-16);
        assert_eq!(default_c(ExampleKind::Two { terms: 10 }), 0.1);
    }

    #[test]
    fn level_validation() {
        assert!(validate_levels(&[4, 8, 16]).is_ok());
        assert!(validate_levels(&[]).is_err());
        assert!(validate_levels(&[8, 4]).is_err());
        assert!(validate_levels(&[0, 4]).is_err());
        let bad = Experiment {
            c: -1.0,
            ..Experiment::new(ExampleKind::One, Coupling::Sqrt)
        };
        assert!(matches!(run_level(&bad, 4), Err(DpgError::Level { n: 4, .. })));
    }

    #[test]
    fn single_level_row() {
        let e = Experiment::new(ExampleKind::One, Coupling::Sqrt);
        let results = run_converge(&e, &[4], Parallelism::Sequential).unwrap();
        assert_eq!(results.len(), 1);
        let r = results[0].report;
        assert!((r.h - SQRT_2 / 4.0).abs() < 1e-15);
        assert_eq!(r.n, 4);
        let mut buf = Vec::new();
        write_reports(&mut buf, &[r]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn rerun_is_deterministic() {
        let mut e = Experiment::new(ExampleKind::Two { terms: 200 }, Coupling::Sqrt);
        e.parallelism = Parallelism::Sequential;
        let a = run_converge(&e, &[2, 4], Parallelism::Sequential).unwrap();
        let b = run_converge(&e, &[2, 4], Parallelism::available()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let (mut x, mut y) = (x.report, y.report);
            x.runtime_s = 0.0;
            y.runtime_s = 0.0;
            assert_eq!(x, y);
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["dpg-heat", "converge", "--levels", "8,4"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["dpg-heat", "run", "--n", "2", "--c", "0"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["dpg-heat", "bogus"]), EXIT_CONFIG);
        assert_eq!(
            main_with_args(["dpg-heat", "run", "--n", "2", "--u-degree", "3"]),
            EXIT_CONFIG
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        let code = main_with_args(["dpg-heat", "run", "--n", "2", "--out", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        let rows = read_reports(File::open(&path).unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n, 2);
    }

    #[test]
    fn solver_errors_map_to_exit_two() {
        let e = DpgError::Solver("x".into()).at_level(8);
        assert!(e.is_solver_failure());
        assert!(e.to_string().contains("level n = 8"));
        assert!(!DpgError::InvalidConfig("x".into()).at_level(8).is_solver_failure());
    }
}
