use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcs_core::metrology::{cramer_rao, qfi_max};
use gcs_core::scan::{
    export_wigner_frames, parse_config, scan_evolution, scan_max_over_tau, scan_werner, write_frame,
    write_figure, Engine, Format, Metadata, Quantity, Row, ScanResult, ScanSpec, TauGrid, TauPolicy, WernerBlock,
};
use gcs_core::wigner::{wigner_field, PhaseGrid, NEGATIVITY_TAIL_TOL};
use gcs_core::{auto_cutoff, make_gcs, GcsError, GcsParams};

#[derive(Parser)]
#[command(name = "gcs", version, about = "Generalized coherent states: Wigner functions, negativity and Fisher information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the Wigner function on a square grid
    Wigner(Common),
    /// Wigner negativity, raw and relative to the nearest Fock state
    Negativity(Common),
    /// Displacement Fisher information maximized over the direction
    Qfi(Common),
    /// Sweep over epsilon and tau
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
        /// Report the maximum over tau for each epsilon instead of the curves
        #[arg(long)]
        max: bool,
    },
    /// Maximum negativity of the field left by a Werner-mixed medium
    Werner {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
        /// Werner parameters, comma separated
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
    /// Regenerate the data of one figure into the --out directory
    Fig {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Mean photon number of the initial coherent state
    #[arg(long)]
    alpha_sq: Option<f64>,
    /// Nonlinear exponent(s), comma separated
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// Evolution parameter(s), comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    tau: Vec<f64>,
    /// Fock cutoff (default: from the Poisson tail)
    #[arg(long)]
    cutoff: Option<usize>,
    /// Half-width of the Wigner window
    #[arg(long)]
    grid_l: Option<f64>,
    /// Points per axis of the Wigner window
    #[arg(long)]
    grid_n: Option<usize>,
    /// Relative tolerance of the negativity quadrature
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// TOML scan configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (directory for fig and multi-frame wigner); stdout if absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args, Clone, Default)]
struct Sweep {
    #[arg(long, value_enum)]
    quantity: Option<QuantityArg>,
    /// First point of the tau grid
    #[arg(long)]
    tau_start: Option<f64>,
    /// Last point of the tau grid
    #[arg(long)]
    tau_stop: Option<f64>,
    /// Points of the tau grid
    #[arg(long)]
    tau_count: Option<usize>,
    /// Default tau window when no explicit range is given
    #[arg(long, value_enum)]
    tau_policy: Option<PolicyArg>,
    /// Do not emit the rescaled tau column
    #[arg(long)]
    no_rescale: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Negativity,
    Qfi,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Periodic,
    Kerr,
}

enum Failure {
    Usage(String),
    Core(GcsError),
    /// Output was written but some rows carry errors.
    Rows(usize),
}

impl From<GcsError> for Failure {
    fn from(e: GcsError) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(GcsError::Config { .. } | GcsError::Domain(_) | GcsError::UndefinedStatistic(_)) => 1,
            Failure::Core(GcsError::Io { .. }) => 3,
            Failure::Core(_) | Failure::Rows(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::Rows(n) => format!("{n} row(s) failed; see the error column"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl Common {
    fn base_spec(&self) -> Result<ScanSpec, Failure> {
        let mut spec = match &self.config {
            Some(path) => parse_config(path)?,
            None => {
                let alpha_sq = self.alpha_sq.ok_or_else(|| usage("--alpha-sq is required without --config"))?;
                if self.epsilon.is_empty() {
                    return Err(usage("--epsilon is required without --config"));
                }
                ScanSpec::new(alpha_sq, self.epsilon.clone())
            }
        };
        if let Some(a) = self.alpha_sq {
            spec.alpha_sq = a;
        }
        if !self.epsilon.is_empty() {
            spec.epsilons = self.epsilon.clone();
        }
        if self.cutoff.is_some() {
            spec.cutoff = self.cutoff;
        }
        if let Some(t) = self.rel_tol {
            spec.rel_tol = t;
        }
        Ok(spec)
    }

    fn format(&self, spec: Option<&ScanSpec>) -> Format {
        match self.format {
            Some(FormatArg::Csv) => Format::Csv,
            Some(FormatArg::Json) => Format::Json,
            None => spec.and_then(|s| s.output.as_ref()).map(|o| o.format).unwrap_or_default(),
        }
    }

    fn out(&self, spec: Option<&ScanSpec>) -> Option<PathBuf> {
        self.out.clone().or_else(|| spec.and_then(|s| s.output.as_ref()).map(|o| o.path.clone()))
    }

    fn taus(&self) -> Vec<f64> {
        if self.tau.is_empty() {
            vec![0.0]
        } else {
            self.tau.clone()
        }
    }
}

impl Sweep {
    fn apply(&self, spec: &mut ScanSpec) -> Result<(), Failure> {
        if let Some(q) = self.quantity {
            spec.quantity = match q {
                QuantityArg::Negativity => Quantity::Negativity,
                QuantityArg::Qfi => Quantity::Qfi,
                QuantityArg::Both => Quantity::Both,
            };
        }
        if let Some(p) = self.tau_policy {
            spec.tau_policy = match p {
                PolicyArg::Periodic => TauPolicy::Periodic,
                PolicyArg::Kerr => TauPolicy::Kerr,
            };
        }
        if let Some(n) = self.tau_count {
            spec.tau_count = n;
            if let Some(g) = spec.tau_grid.as_mut() {
                g.count = n;
            }
        }
        match (self.tau_start, self.tau_stop) {
            (Some(start), Some(stop)) => {
                spec.tau_grid = Some(TauGrid::new(start, stop, spec.tau_count)?);
            }
            (None, None) => {}
            _ => return Err(usage("--tau-start and --tau-stop go together")),
        }
        if self.no_rescale {
            spec.rescale = false;
        }
        Ok(())
    }
}

/// Opens the destination before any computation so a bad path fails early.
fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| GcsError::Io {
                    path: dir.to_owned(),
                    source: e,
                })?;
            }
            let file = File::create(p).map_err(|e| GcsError::Io {
                path: p.to_owned(),
                source: e,
            })?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(result: &ScanResult, mut out: Box<dyn Write>, format: Format, path: Option<&Path>) -> Outcome {
    result
        .write(&mut out, format)
        .and_then(|_| out.flush())
        .map_err(|e| GcsError::Io {
            path: path.map(Path::to_owned).unwrap_or_else(|| "<stdout>".into()),
            source: e,
        })?;
    match result.errors().count() {
        0 => Ok(()),
        n => Err(Failure::Rows(n)),
    }
}

fn run_wigner(c: &Common) -> Outcome {
    let alpha_sq = c.alpha_sq.ok_or_else(|| usage("--alpha-sq is required"))?;
    let &[epsilon] = c.epsilon.as_slice() else {
        return Err(usage("wigner takes exactly one --epsilon"));
    };
    let format = c.format(None);
    let taus = c.taus();
    let cutoff = match c.cutoff {
        Some(n) => n,
        None => auto_cutoff(alpha_sq, NEGATIVITY_TAIL_TOL)?,
    };
    let default = PhaseGrid::for_state(alpha_sq.sqrt(), cutoff);
    let n = c.grid_n.unwrap_or(default.nx);
    let grid = PhaseGrid::square(c.grid_l.unwrap_or(default.half_width), n)?;
    if taus.len() > 1 {
        let dir = c.out.as_deref().ok_or_else(|| usage("several --tau values need --out <directory>"))?;
        for p in export_wigner_frames(alpha_sq, epsilon, &taus, Some(grid), Some(cutoff), dir, format)? {
            log::info!("wrote {}", p.display());
        }
        return Ok(());
    }
    let mut out = open_out(c.out.as_deref())?;
    let params = GcsParams::from_nbar(alpha_sq, epsilon, taus[0])?;
    let state = make_gcs(&params, cutoff)?;
    let field = wigner_field(&state, &grid)?;
    let mut meta = Metadata::new();
    meta.insert("tool".into(), gcs_core::scan::TOOL.into());
    meta.insert("version".into(), gcs_core::scan::VERSION.into());
    meta.insert("alpha_sq".into(), alpha_sq.into());
    meta.insert("epsilon".into(), epsilon.into());
    meta.insert("tau".into(), taus[0].into());
    meta.insert("cutoff".into(), cutoff.into());
    write_frame(&mut out, &field, &meta, format)
        .and_then(|_| out.flush())
        .map_err(|e| GcsError::Io {
            path: c.out.clone().unwrap_or_else(|| "<stdout>".into()),
            source: e,
        })?;
    Ok(())
}

fn point_rows(c: &Common, quantity: Quantity) -> Outcome {
    let mut spec = c.base_spec()?;
    spec.quantity = quantity;
    let format = c.format(Some(&spec));
    let path = c.out(Some(&spec));
    let out = open_out(path.as_deref())?;
    let engine = Engine::new(&spec, quantity.negativity())?;
    let mut rows = Vec::new();
    for &eps in &spec.epsilons {
        for tau in c.taus() {
            let tag = |r: Row| r.with_epsilon(eps).with_tau(tau, None);
            if quantity.negativity() {
                let (_, fock) = engine.fock_reference().expect("negativity engine");
                match engine.raw_negativity(eps, tau) {
                    Ok(v) => {
                        rows.push(tag(Row::value("negativity", v)));
                        rows.push(tag(Row::value("normalized_negativity", v / fock)));
                    }
                    Err(e) => rows.push(tag(Row::failed("negativity", &e))),
                }
            } else {
                let state = engine.state(eps, tau)?;
                let report = qfi_max(&state);
                let nbar = spec.nbar();
                rows.push(tag(Row::value("qfi", report.qfi)));
                rows.push(tag(Row::value("normalized_qfi", report.qfi / (4.0 * (4.0 * nbar + 1.0)))));
                rows.push(tag(Row::value("best_angle", report.best_angle)));
                rows.push(tag(Row::value("cramer_rao", cramer_rao(report.qfi, nbar)?)));
            }
        }
    }
    let op = if quantity.negativity() { "negativity" } else { "qfi" };
    let result = ScanResult::new(engine.metadata(&spec, op), rows);
    finish(&result, out, format, path.as_deref())
}

fn run_scan(c: &Common, sweep: &Sweep, max: bool) -> Outcome {
    let mut spec = c.base_spec()?;
    sweep.apply(&mut spec)?;
    spec.validate()?;
    let format = c.format(Some(&spec));
    let path = c.out(Some(&spec));
    let out = open_out(path.as_deref())?;
    let result = if max {
        scan_max_over_tau(&spec)?
    } else {
        scan_evolution(&spec)?
    };
    finish(&result, out, format, path.as_deref())
}

fn run_werner(c: &Common, sweep: &Sweep, p: &[f64]) -> Outcome {
    let mut spec = c.base_spec()?;
    sweep.apply(&mut spec)?;
    spec.quantity = Quantity::Negativity;
    if spec.werner.is_none() {
        spec.werner = Some(WernerBlock::default());
    }
    if !p.is_empty() {
        spec.p_grid = Some(p.to_vec());
    }
    spec.validate()?;
    let format = c.format(Some(&spec));
    let path = c.out(Some(&spec));
    let out = open_out(path.as_deref())?;
    let result = scan_werner(&spec)?;
    finish(&result, out, format, path.as_deref())
}

fn run_fig(which: u8, c: &Common) -> Outcome {
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let rel_tol = c.rel_tol.unwrap_or(gcs_core::scan::defaults::REL_TOL);
    for p in write_figure(which, &dir, c.format(None), rel_tol)? {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Wigner(c) => run_wigner(c),
        Command::Negativity(c) => point_rows(c, Quantity::Negativity),
        Command::Qfi(c) => point_rows(c, Quantity::Qfi),
        Command::Scan { common, sweep, max } => run_scan(common, sweep, *max),
        Command::Werner { common, sweep, p } => run_werner(common, sweep, p),
        Command::Fig { which, common } => run_fig(*which, common),
    }
}

fn threads(cli: &Cli) -> Option<usize> {
    match &cli.command {
        Command::Wigner(c) | Command::Negativity(c) | Command::Qfi(c) => c.threads,
        Command::Scan { common, .. } | Command::Werner { common, .. } | Command::Fig { common, .. } => common.threads,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads(&cli) {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let started = Instant::now();
    let outcome = pool.install(|| run(cli));
    log::info!("finished in {:.2?}", started.elapsed());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
