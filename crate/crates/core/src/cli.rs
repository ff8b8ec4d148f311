//! Command-line front end.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{parse_nonlinearity, ConfigError, InitialSpec, RunConfig, Source};
use crate::estimates::{build_cutoff, theorem11_check_with, EstimateError, CERTIFY_POINTS};
use crate::geometry::ModelSpace;
use crate::liouville::{packaged_suite, run_suite, ScenarioConfig, ScenarioError};
use crate::nonlinearity::DEFAULT_EPSILON;
use crate::solver::{
    self, write_columns, write_snapshot, ParabolicOptions, SolverError, SpaceTimeField,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_SOLVER_ABORT: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;
pub const EXIT_CONFIG: u8 = 64;
pub const EXIT_IO: u8 = 74;

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_OUT: &str = "dlab-out";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "dlab",
    version,
    about = "Weighted reaction-diffusion gradient-estimate laboratory"
)]
pub struct Cli {
    /// Run configuration (INI), or a manifest.json from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; DLAB_OUT takes precedence.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Validate the configuration and echo the manifest without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the configured initial data.
    Solve,
    /// Check the gradient estimate and the lemma inequality on a field.
    Verify,
    /// Print the window of admissible exponents for a nonlinearity.
    Epsilon {
        /// Catalog entry, e.g. allen_cahn or log{a=1}.
        nl: String,
        /// Lower end m of the solution range.
        m: f64,
        /// Upper end M; defaults to m.
        #[arg(name = "M")]
        big_m: Option<f64>,
    },
    /// Run a scenario suite: the file's [scenario.*] sections, or the
    /// packaged suite when none is given.
    Scenario { suite: Option<PathBuf> },
    /// Build and certify the space-time cutoff on [0, T].
    Cutoff {
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = CERTIFY_POINTS)]
        points: usize,
        /// Points per axis of the emitted plot data.
        #[arg(long, default_value_t = 101)]
        plot_points: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Epsilon { .. } => "epsilon",
            Command::Scenario { .. } => "scenario",
            Command::Cutoff { .. } => "cutoff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub parameters: Value,
    pub output_dir: String,
    pub format_version: u32,
    pub threads: usize,
    pub dry_run: bool,
    pub wall_clock_s: Option<f64>,
    pub steps: Option<usize>,
    pub outputs: Vec<String>,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = if e.is_io() { EXIT_IO } else { EXIT_CONFIG };
        Failure::new(code, format!("config error: {e}"))
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Geometry(_)
            | SolverError::Nonlinearity(
                crate::nonlinearity::NonlinearityError::InvalidParameter(_),
            )
            | SolverError::InvalidField(_)
            | SolverError::Incompatible(_) => {
                Failure::new(EXIT_CONFIG, format!("config error: {e}"))
            }
            other => Failure::new(EXIT_SOLVER_ABORT, format!("solver abort: {other}")),
        }
    }
}

impl From<EstimateError> for Failure {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::Solver(s) => s.into(),
            EstimateError::NotPositive { .. } => {
                Failure::new(EXIT_CHECK_FAILED, format!("check failed: {e}"))
            }
            other => Failure::new(EXIT_CONFIG, format!("config error: {other}")),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::new(EXIT_IO, format!("I/O error on {}: {e}", path.display()))
}

struct Session<'a> {
    manifest: RunManifest,
    format: Format,
    out_dir: PathBuf,
    stdout: &'a mut dyn Write,
    started: Instant,
}

impl Session<'_> {
    fn emit(&mut self, text: &str) -> Result<(), Failure> {
        writeln!(self.stdout, "{text}").map_err(|e| io_failure(Path::new("<stdout>"), e))
    }

    fn emit_json(&mut self, value: &impl Serialize) -> Result<(), Failure> {
        let line = serde_json::to_string(value).expect("serialisable record");
        self.emit(&line)
    }

    fn echo_manifest(&mut self) -> Result<(), Failure> {
        let line = serde_json::to_string(&self.manifest).expect("serialisable manifest");
        match self.format {
            Format::Json => self.emit(&line),
            Format::Text => self.emit(&format!("manifest {line}")),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_file(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    ) -> Result<(), Failure> {
        let path = self.path(name);
        fs::create_dir_all(&self.out_dir).map_err(|e| io_failure(&self.out_dir, e))?;
        let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| io_failure(&path, e))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// JSON report file tagged with the manifest that produced it.
    fn write_report(&mut self, name: &str, report: &impl Serialize) -> Result<(), Failure> {
        let doc = json!({ "manifest": MANIFEST_FILE, "report": report });
        self.write_file(name, |w| {
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        })
    }

    fn finish(&mut self, steps: Option<usize>) -> Result<(), Failure> {
        self.manifest.wall_clock_s = Some(self.started.elapsed().as_secs_f64());
        self.manifest.steps = steps;
        let doc = serde_json::to_string_pretty(&self.manifest).expect("serialisable manifest");
        let path = self.path(MANIFEST_FILE);
        fs::create_dir_all(&self.out_dir).map_err(|e| io_failure(&self.out_dir, e))?;
        fs::write(&path, doc + "\n").map_err(|e| io_failure(&path, e))
    }
}

/// Loads an INI configuration, or the parameters of a previous run's
/// manifest.
fn load_config(path: &Path, command: &str) -> Result<RunConfig, Failure> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| Failure::new(EXIT_CONFIG, format!("config error: bad manifest: {e}")))?;
        if manifest.command != command {
            return Err(Failure::new(
                EXIT_CONFIG,
                format!(
                    "config error: manifest is for {}, not {command}",
                    manifest.command
                ),
            ));
        }
        return serde_json::from_value(manifest.parameters).map_err(|e| {
            Failure::new(
                EXIT_CONFIG,
                format!("config error: bad manifest parameters: {e}"),
            )
        });
    }
    Ok(RunConfig::load(path)?)
}

fn require_config(cli: &Cli) -> Result<(&Path, RunConfig), Failure> {
    let path = cli.config.as_deref().ok_or_else(|| {
        Failure::new(
            EXIT_CONFIG,
            "config error: this command needs --config PATH",
        )
    })?;
    Ok((path, load_config(path, cli.command.name())?))
}

fn initial_values(cfg: &RunConfig, space: &ModelSpace, t_start: f64) -> Result<Vec<f64>, Failure> {
    let grid = space.grid(cfg.nodes).map_err(SolverError::from)?;
    Ok(match cfg.require_initial()? {
        InitialSpec::Data(d) => d.sample(&grid),
        InitialSpec::Family(f) => f.sample(space, &grid, t_start, 0.0, 1)?.values().to_vec(),
    })
}

/// The configured field: evolved, or sampled from the closed form.
fn build_field(cfg: &RunConfig, source: Source) -> Result<(SpaceTimeField, usize), Failure> {
    let space = cfg.require_space()?;
    let nl = cfg.require_nl()?;
    let time = cfg.require_time()?;
    let grid = space.grid(cfg.nodes).map_err(SolverError::from)?;
    let opts = ParabolicOptions::new(time.start, time.duration, time.dt);
    match (source, &cfg.exact) {
        (Source::Exact, Some(exact)) => {
            let steps = opts.steps();
            let field = exact.sample(space, &grid, time.start, opts.effective_dt(), steps + 1)?;
            Ok((field, steps))
        }
        (Source::Exact, None) => Err(Failure::new(
            EXIT_CONFIG,
            "config error: [verify] source: no closed-form family configured",
        )),
        (Source::Solve, _) => {
            let u0 = initial_values(cfg, space, time.start)?;
            let run = solver::solve_parabolic(space, &grid, nl, &u0, &opts)?;
            Ok((run.field, run.steps))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    /// max |u_t − Δ_f u − F(u)| over interior nodes and interior times.
    pub residual_max: f64,
    pub exact: Option<solver::ExactSolution>,
    /// max |u − u_exact| over every stored node.
    pub max_error: Option<f64>,
}

impl SolveSummary {
    fn to_text(&self) -> String {
        let mut s = format!(
            "steps = {}\ndt = {:e}\nt_end = {}\nresidual_max = {:e}",
            self.steps, self.dt, self.t_end, self.residual_max
        );
        if let (Some(exact), Some(err)) = (&self.exact, self.max_error) {
            s += &format!("\nexact = {exact:?}\nmax_error = {err:e}");
        }
        s
    }
}

fn interior_residual_max(
    field: &SpaceTimeField,
    nl: &crate::nonlinearity::Nonlinearity,
) -> Result<f64, Failure> {
    let res = solver::residual(field, nl)?;
    let grid = field.grid();
    let mut worst = 0.0f64;
    for k in 1..field.n_times().saturating_sub(1) {
        for i in (0..grid.count).filter(|&i| !grid.is_boundary_row(i)) {
            worst = worst.max(res.value(i, k).abs());
        }
    }
    Ok(worst)
}

fn cmd_solve(cli: &Cli, session: &mut Session) -> Result<u8, Failure> {
    let (_, cfg) = require_config(cli)?;
    let space = cfg.require_space()?.clone();
    let nl = cfg.require_nl()?.clone();
    let time = cfg.require_time()?;
    let u0 = initial_values(&cfg, &space, time.start)?;
    session.manifest.parameters = serde_json::to_value(&cfg).expect("serialisable config");
    session.echo_manifest()?;
    if cli.dry_run {
        return Ok(EXIT_OK);
    }
    let grid = space.grid(cfg.nodes).map_err(SolverError::from)?;
    let opts = ParabolicOptions::new(time.start, time.duration, time.dt);
    let run = solver::solve_parabolic(&space, &grid, &nl, &u0, &opts)?;
    let field = run.field;
    let max_error = match &cfg.exact {
        Some(exact) => {
            let reference = exact.sample(&space, &grid, time.start, field.dt(), field.n_times())?;
            Some(
                field
                    .values()
                    .iter()
                    .zip(reference.values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max),
            )
        }
        None => None,
    };
    let summary = SolveSummary {
        steps: run.steps,
        dt: field.dt(),
        t_end: field.t_end(),
        residual_max: interior_residual_max(&field, &nl)?,
        exact: cfg.exact,
        max_error,
    };
    session.write_file("field.dlab", |w| write_snapshot(&field, w))?;
    session.write_file("field.dat", |w| write_columns(&field, w))?;
    session.write_report("summary.json", &summary)?;
    match session.format {
        Format::Json => session.emit_json(&summary)?,
        Format::Text => session.emit(&summary.to_text())?,
    }
    session.finish(Some(run.steps))?;
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, session: &mut Session) -> Result<u8, Failure> {
    let (_, cfg) = require_config(cli)?;
    let space = cfg.require_space()?.clone();
    let nl = cfg.require_nl()?.clone();
    cfg.require_time()?;
    if cfg.verify.source == Source::Solve {
        cfg.require_initial()?;
    }
    let curv = space
        .estimate_curvature(cfg.verify.r_probe)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("config error: [verify] r_probe: {e}")))?;
    session.manifest.parameters = serde_json::to_value(&cfg).expect("serialisable config");
    session.echo_manifest()?;
    if cli.dry_run {
        return Ok(EXIT_OK);
    }
    let (field, steps) = build_field(&cfg, cfg.verify.source)?;
    let eps = match cfg.verify.eps {
        Some(e) => e,
        None => {
            let window = nl
                .epsilon_window(field.min(), field.max())
                .map_err(|e| Failure::new(EXIT_CHECK_FAILED, format!("check failed: {e}")))?;
            window.select(DEFAULT_EPSILON).ok_or_else(|| {
                Failure::new(
                    EXIT_CHECK_FAILED,
                    format!(
                        "check failed: empty epsilon window on [{}, {}]",
                        field.min(),
                        field.max()
                    ),
                )
            })?
        }
    };
    let report = theorem11_check_with(&field, &nl, eps, &curv, cfg.verify.c_v)?;
    session.write_report("report.json", &report)?;
    session.write_file("report.txt", |w| w.write_all(report.to_text().as_bytes()))?;
    match session.format {
        Format::Json => session.emit_json(&report)?,
        Format::Text => session.emit(report.to_text().trim_end())?,
    }
    session.finish(Some(steps))?;
    let bound_ok = cfg
        .verify
        .c_max
        .map_or(report.c_empirical.is_finite(), |c| report.c_empirical <= c);
    if !report.lemma_holds() {
        return Err(Failure::new(
            EXIT_CHECK_FAILED,
            format!(
                "check failed: lemma residual {:e} below -{:e}",
                report.lemma21_min_residual, report.lemma21_tol_disc
            ),
        ));
    }
    if !bound_ok {
        return Err(Failure::new(
            EXIT_CHECK_FAILED,
            format!(
                "check failed: c_empirical = {} exceeds the accepted constant",
                report.c_empirical
            ),
        ));
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct EpsilonRecord {
    lo: f64,
    hi: f64,
    empty: bool,
}

fn cmd_epsilon(
    cli: &Cli,
    session: &mut Session,
    nl: &str,
    m: f64,
    big_m: Option<f64>,
) -> Result<u8, Failure> {
    let parsed = parse_nonlinearity(nl)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("config error: nl: {e}")))?;
    let big_m = big_m.unwrap_or(m);
    session.manifest.parameters = json!({ "nl": parsed, "m": m, "M": big_m });
    session.echo_manifest()?;
    if cli.dry_run {
        return Ok(EXIT_OK);
    }
    let w = parsed
        .epsilon_window(m, big_m)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("config error: {e}")))?;
    match session.format {
        Format::Json => session.emit_json(&EpsilonRecord {
            lo: w.lo,
            hi: w.hi,
            empty: w.empty,
        })?,
        Format::Text if w.empty => session.emit("empty")?,
        Format::Text => session.emit(&format!("{} {}", w.lo, w.hi))?,
    }
    Ok(EXIT_OK)
}

fn scenario_failure(e: ScenarioError) -> Failure {
    match e {
        ScenarioError::Solver(s) => s.into(),
        other => Failure::new(EXIT_CONFIG, format!("config error: {other}")),
    }
}

fn cmd_scenario(
    cli: &Cli,
    session: &mut Session,
    suite_path: Option<&Path>,
) -> Result<u8, Failure> {
    let path = suite_path.or(cli.config.as_deref());
    let suite: Vec<ScenarioConfig> = match path {
        Some(p) => {
            let cfg = load_config(p, "scenario")?;
            if cfg.scenarios.is_empty() {
                return Err(Failure::new(
                    EXIT_CONFIG,
                    format!(
                        "config error: {} has no [scenario.NAME] sections",
                        p.display()
                    ),
                ));
            }
            session.manifest.config_path = Some(p.display().to_string());
            session.manifest.parameters = serde_json::to_value(&cfg).expect("serialisable config");
            cfg.scenarios
        }
        None => {
            let suite = packaged_suite();
            session.manifest.parameters = json!({ "suite": "packaged", "scenarios": suite });
            suite
        }
    };
    for s in &suite {
        s.validate().map_err(scenario_failure)?;
    }
    session.echo_manifest()?;
    if cli.dry_run {
        return Ok(EXIT_OK);
    }
    let results = run_suite(&suite, cli.threads).map_err(scenario_failure)?;
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        reports.push(r.map_err(scenario_failure)?);
    }
    match session.format {
        Format::Json => {
            for r in &reports {
                session.emit_json(r)?;
            }
        }
        Format::Text => {
            session.emit(&format!(
                "{:<28} {:>8} {:>10} {:<28} {}",
                "scenario", "eps", "sup|grad|", "final range", "verdict"
            ))?;
            for r in &reports {
                session.emit(&r.summary_row())?;
            }
        }
    }
    session.write_report("scenarios.json", &reports)?;
    session.finish(Some(reports.iter().map(|r| r.steps).sum()))?;
    let violated = reports
        .iter()
        .filter(|r| !r.verdict.is_consistent())
        .count();
    if violated > 0 {
        return Err(Failure::new(
            EXIT_CHECK_FAILED,
            format!("check failed: {violated} scenario(s) violated"),
        ));
    }
    Ok(EXIT_OK)
}

fn cmd_cutoff(
    cli: &Cli,
    session: &mut Session,
    (radius, duration, tau): (f64, f64, f64),
    points: usize,
    plot_points: usize,
) -> Result<u8, Failure> {
    // the window is [0, T], so t₀ = T
    let profile = build_cutoff(radius, duration, duration, tau)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("config error: {e}")))?;
    if points < 2 || plot_points < 2 {
        return Err(Failure::new(
            EXIT_CONFIG,
            "config error: need at least 2 points per axis",
        ));
    }
    session.manifest.parameters = json!({
        "radius": radius, "duration": duration, "t0": duration, "tau": tau,
        "points": points, "plot_points": plot_points,
    });
    session.echo_manifest()?;
    if cli.dry_run {
        return Ok(EXIT_OK);
    }
    let cert = profile.certify(points);
    let record = json!({ "profile": profile, "certificate": cert });
    match session.format {
        Format::Json => session.emit_json(&record)?,
        Format::Text => {
            session.emit(&format!(
                "{:<40} {:>8} {:>8}  holds",
                "property", "checked", "failures"
            ))?;
            for p in &cert.properties {
                let holds = if p.failures == 0 { "yes" } else { "NO" };
                session.emit(&format!(
                    "{:<40} {:>8} {:>8}  {holds}",
                    p.name, p.checked, p.failures
                ))?;
            }
            session.emit(&format!("C_time = {}", profile.c_time))?;
            for c in &profile.c_eps {
                let note = if c.finite_in_limit {
                    ""
                } else {
                    "  (diverges without flushing)"
                };
                session.emit(&format!("C_eps[{}] = {}{note}", c.eps_hat, c.c))?;
            }
        }
    }
    let r_max = 1.25 * radius;
    session.write_file("cutoff.dat", |w| {
        writeln!(w, "# manifest: {MANIFEST_FILE}")?;
        writeln!(w, "# r t psi")?;
        for j in 0..plot_points {
            let t = duration * j as f64 / (plot_points - 1) as f64;
            for i in 0..plot_points {
                let r = r_max * i as f64 / (plot_points - 1) as f64;
                writeln!(w, "{r:e} {t:e} {:e}", profile.value(r, t))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    session.write_report("cutoff.json", &record)?;
    session.finish(None)?;
    if !cert.all_hold {
        return Err(Failure::new(
            EXIT_CHECK_FAILED,
            "check failed: cutoff property violated",
        ));
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli, session: &mut Session) -> Result<u8, Failure> {
    if cli.threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match &cli.command {
        Command::Solve => cmd_solve(cli, session),
        Command::Verify => cmd_verify(cli, session),
        Command::Epsilon { nl, m, big_m } => cmd_epsilon(cli, session, nl, *m, *big_m),
        Command::Scenario { suite } => cmd_scenario(cli, session, suite.as_deref()),
        Command::Cutoff {
            radius,
            duration,
            tau,
            points,
            plot_points,
        } => cmd_cutoff(
            cli,
            session,
            (*radius, *duration, *tau),
            *points,
            *plot_points,
        ),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. `out_env` is the value of DLAB_OUT, if set.
pub fn run<I, T>(
    args: I,
    out_env: Option<OsString>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    let out_dir = out_env
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| cli.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        config_path: cli.config.as_ref().map(|p| p.display().to_string()),
        parameters: Value::Null,
        output_dir: out_dir.display().to_string(),
        format_version: FORMAT_VERSION,
        threads: cli.threads,
        dry_run: cli.dry_run,
        wall_clock_s: None,
        steps: None,
        outputs: Vec::new(),
    };
    let mut session = Session {
        manifest,
        format: cli.format,
        out_dir,
        stdout,
        started: Instant::now(),
    };
    match dispatch(&cli, &mut session) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "dlab: {}", f.message);
            f.code
        }
    }
}
