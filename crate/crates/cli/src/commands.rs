//! Argument parsing and the subcommands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use cetlab_core::averaging::{assemble_report, oscillatory_half};
use cetlab_core::dispersion::{scan_wavenumber, solve_branch};
use cetlab_core::pheno::{signature_report, SignatureInput, Units};
use cetlab_core::quadrature::validate_moments;
use cetlab_core::radial::{evolve_with, EvolveOptions, RunOutput};
use cetlab_core::scattering::{decay_fit, memory_limit, residual_decay, sup_series, DecayFit, FreeEvolution, ResidualDecay};
use cetlab_core::spectral::{check_conditions, spectral_constants, DecayPath, DEFAULT_TOL};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::acceptance;
use crate::checks::{self, MemoryBed};
use crate::config::{Format, RawConfig, RunConfig};
use crate::error::{io_error, CliError, EXIT_OK};
use crate::output::{self, document, real, reals, Provenance};

#[derive(Debug, Parser)]
#[command(name = "cetlab", version, about = "Stieltjes memory operators and radial wave evolution with retarded memory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral constants and condition checks for a density.
    Kernel(DensityArgs),
    /// Mass quadrature nodes and weights.
    Quad {
        #[command(flatten)]
        args: DensityArgs,
        #[arg(long)]
        n_nodes: Option<String>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Property checks of the memory operator on a single Fourier mode.
    MemoryTest {
        #[command(flatten)]
        args: DensityArgs,
        #[arg(long, allow_negative_numbers = true)]
        xi: Option<String>,
    },
    /// Decay of the spectrally averaged Klein-Gordon symbol.
    AvgDecay(DensityArgs),
    /// Dispersion branch and complex mode scan.
    Dispersion(DensityArgs),
    /// Radial evolution with diagnostics and snapshots.
    Evolve(DensityArgs),
    /// Late-time memory profile and scattering residuals.
    Scatter(DensityArgs),
    /// Order-of-magnitude observational signatures.
    Pheno(PhenoArgs),
    /// Runs the acceptance suite and prints a pass/fail table.
    Selftest {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
    },
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Run configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override any setting: --set section.key=value (repeatable).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu0: Option<String>,
    /// Atoms as "[alpha, mu], [alpha, mu]".
    #[arg(long)]
    pub atoms: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitsArg {
    Natural,
    Si,
    Cgs,
}

#[derive(Debug, Args)]
pub struct PhenoArgs {
    #[arg(long, default_value_t = 400.0, allow_negative_numbers = true)]
    pub d_mpc: f64,
    #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
    pub omega_hz: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-5, allow_negative_numbers = true)]
    pub mstar: f64,
    /// Total spectral weight; defaults to alpha * mstar^2.
    #[arg(long, allow_negative_numbers = true)]
    pub l1: Option<f64>,
    #[arg(long, value_enum, default_value_t = UnitsArg::Si)]
    pub units: UnitsArg,
    /// Also write pheno.json into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", e.to_json());
            return e.exit_code();
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Worker pool capped by `CETLAB_THREADS` (default: hardware count).
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var("CETLAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => return Err(CliError::Invalid(format!("CETLAB_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start {threads} worker threads: {e}")))
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Kernel(a) => kernel(&load(&a, &[])?, a.out.is_some()),
        Command::Quad { args, n_nodes, tol } => {
            let mut extra = Vec::new();
            if let Some(n) = n_nodes {
                extra.push(("quadrature", "n_nodes", n, "--n-nodes"));
            }
            if let Some(t) = tol {
                extra.push(("quadrature", "tol", t, "--tol"));
            }
            quad(&load(&args, &extra)?)
        }
        Command::MemoryTest { args, xi } => {
            let extra: Vec<_> = xi.into_iter().map(|x| ("memory", "xi", x, "--xi")).collect();
            memory_test(&load(&args, &extra)?)
        }
        Command::AvgDecay(a) => avg_decay(&load(&a, &[])?),
        Command::Dispersion(a) => dispersion(&load(&a, &[])?),
        Command::Evolve(a) => evolve(&load(&a, &[])?),
        Command::Scatter(a) => scatter(&load(&a, &[])?),
        Command::Pheno(a) => pheno(&a),
        Command::Selftest { criteria } => selftest(&criteria),
    }
}

fn load(a: &DensityArgs, extra: &[(&str, &str, String, &str)]) -> Result<RunConfig, CliError> {
    let mut raw = match &a.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::empty(),
    };
    let flags = [
        ("family", &a.family),
        ("alpha", &a.alpha),
        ("beta", &a.beta),
        ("lambda", &a.lambda),
        ("gamma", &a.gamma),
        ("mu0", &a.mu0),
        ("atoms", &a.atoms),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            raw.set("density", key, v, &format!("--{key}"))?;
        }
    }
    for (section, key, value, flag) in extra {
        raw.set(section, key, value, flag)?;
    }
    for s in &a.set {
        raw.set_assignment(s)?;
    }
    if let Some(out) = &a.out {
        raw.set("output", "directory", &out.display().to_string(), "--out")?;
    }
    Ok(RunConfig::resolve(&raw)?)
}

/// Output destination for one command.
struct Sink<'a> {
    cfg: &'a RunConfig,
    prov: Provenance,
}

impl<'a> Sink<'a> {
    fn new(cfg: &'a RunConfig, command: &str) -> Self {
        Sink { cfg, prov: Provenance::new(command, &cfg.canonical(), &[]) }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.directory.join(name)
    }

    fn csv(&self, name: &str, columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
        if !self.cfg.wants(Format::Csv) {
            return Ok(());
        }
        let path = self.path(name);
        output::write_csv(&path, &self.prov, columns, rows).map_err(io_error(&path))
    }

    fn json(&self, name: &str, doc: &Value) -> Result<(), CliError> {
        if !self.cfg.wants(Format::Json) {
            return Ok(());
        }
        write_json_file(&self.path(name), doc)
    }
}

fn write_json_file(path: &Path, doc: &Value) -> Result<(), CliError> {
    output::write_json(path, doc).map_err(io_error(path))
}

fn print(doc: &Value) {
    print!("{}", output::json_text(doc));
}

fn path_name(p: DecayPath) -> &'static str {
    match p {
        DecayPath::SpectralAveraging => "spectral-averaging",
        DecayPath::DiscreteSpectrum => "discrete-spectrum",
        DecayPath::Unsupported => "unsupported",
    }
}

fn kernel(cfg: &RunConfig, to_file: bool) -> Result<(), CliError> {
    let sink = Sink::new(cfg, "kernel");
    let c = spectral_constants(&cfg.rho, DEFAULT_TOL)?;
    let cond = check_conditions(&cfg.rho, &c);
    let doc = document(
        &sink.prov,
        vec![
            ("family", json!(cfg.rho.family().name())),
            ("l1", real(c.l1)),
            ("c_m1", real(c.c_m1)),
            ("c_p1", real(c.c_p1)),
            ("c_prime", c.c_prime.map(real).unwrap_or(Value::Null)),
            ("c_mhalf", real(c.c_mhalf)),
            (
                "conditions",
                json!({ "s1": cond.s1, "s2": cond.s2, "s3": cond.s3, "s4": cond.s4, "s5": cond.s5 }),
            ),
            ("all_conditions", json!(cond.all())),
            ("decay_path", json!(path_name(cond.path))),
            ("messages", json!(cond.messages)),
            ("warnings", json!(cfg.rho.warnings())),
        ],
    );
    if to_file {
        write_json_file(&sink.path("kernel.json"), &doc)?;
    }
    print(&doc);
    Ok(())
}

fn moment_json(m: &cetlab_core::Result<f64>) -> Value {
    match m {
        Ok(v) => json!({ "relative_error": real(*v) }),
        Err(e) => json!({ "error": e.code() }),
    }
}

fn quad(cfg: &RunConfig) -> Result<(), CliError> {
    let sink = Sink::new(cfg, "quad");
    let q = &cfg.quad;
    let report = match spectral_constants(&cfg.rho, DEFAULT_TOL) {
        Ok(c) => validate_moments(q, &c, cfg.quad_tol),
        Err(_) => q.moment_report.clone(),
    };
    sink.csv("quad_nodes.csv", &["mu", "weight"], q.nodes.iter().zip(&q.weights).map(|(m, w)| vec![*m, *w]))?;
    let doc = document(
        &sink.prov,
        vec![
            ("family", json!(q.source_family.name())),
            ("n_nodes", json!(q.len())),
            ("requested_nodes", json!(cfg.n_nodes)),
            ("pruned", json!(q.pruned)),
            ("max_node", real(q.max_node())),
            (
                "moment_report",
                json!({
                    "p_minus_one": moment_json(&report.minus_one),
                    "p_zero": moment_json(&report.zero),
                    "p_one": moment_json(&report.one),
                    "flagged": report.flagged,
                }),
            ),
        ],
    );
    sink.json("quad_summary.json", &doc)?;
    print(&doc);
    Ok(())
}

fn verdict_json(v: &checks::Verdict) -> Value {
    json!({ "name": v.name, "passed": v.passed, "value": real(v.value), "limit": real(v.limit), "detail": v.detail })
}

fn memory_test(cfg: &RunConfig) -> Result<(), CliError> {
    let sink = Sink::new(cfg, "memory-test");
    let m = &cfg.memory;
    let bed = MemoryBed { xi: m.xi, dt: m.dt, samples: m.samples, seeds: m.seeds };
    let trace = checks::memory_trace(&cfg.quad, &bed)?;
    sink.csv(
        "memory_trace.csv",
        &["t", "f", "Kinv_f", "Kinv2_f"],
        (0..trace.t.len()).map(|i| vec![trace.t[i], trace.f[i], trace.kf[i], trace.k2f[i]]),
    )?;
    let verdicts = checks::all_memory_checks(&cfg.quad, &bed)?;
    let doc = document(
        &sink.prov,
        vec![
            ("xi", real(m.xi)),
            ("all_passed", json!(verdicts.iter().all(|v| v.passed))),
            ("checks", Value::Array(verdicts.iter().map(verdict_json).collect())),
        ],
    );
    sink.json("memory_checks.json", &doc)?;
    print(&doc);
    Ok(())
}

fn avg_decay(cfg: &RunConfig) -> Result<(), CliError> {
    let sink = Sink::new(cfg, "avg-decay");
    let a = &cfg.averaging;
    let consts = spectral_constants(&cfg.rho, DEFAULT_TOL)?;
    cetlab_core::averaging::check_s5(&cfg.rho, &consts)?;
    let points: Vec<(f64, f64)> = a.t_grid.iter().flat_map(|&t| a.xi_grid.iter().map(move |&x| (t, x))).collect();
    let half = points
        .par_iter()
        .map(|&(t, xi)| oscillatory_half(&cfg.rho, t, xi, a.tol))
        .collect::<cetlab_core::Result<Vec<f64>>>()?;
    let rep = assemble_report(&cfg.rho, &consts, &a.t_grid, &a.xi_grid, &half, a.slack)?;
    let mut rows = Vec::new();
    for (i, &t) in a.t_grid.iter().enumerate() {
        for (j, &xi) in a.xi_grid.iter().enumerate() {
            rows.push(vec![t, xi, rep.symbol_values[i][j], 2.0 * rep.bound_constant / t, rep.ratios[i][j]]);
        }
    }
    sink.csv("avg_decay.csv", &["t", "xi", "T", "bound", "ratio"], rows)?;
    let doc = document(
        &sink.prov,
        vec![
            ("worst_ratio", real(rep.worst_ratio)),
            ("fitted_exponent", real(rep.fitted_exponent)),
            ("fit_r_squared", real(rep.fit_r_squared)),
            ("bound_constant", real(rep.bound_constant)),
            ("within_slack", json!(rep.within(a.slack))),
            ("envelope_holds", json!(rep.envelope_holds)),
            ("sup_over_xi", reals(&rep.sup_over_xi())),
        ],
    );
    sink.json("avg_decay.json", &doc)?;
    print(&doc);
    Ok(())
}

fn dispersion(cfg: &RunConfig) -> Result<(), CliError> {
    let sink = Sink::new(cfg, "dispersion");
    let d = &cfg.dispersion;
    let per_k = d
        .k_grid
        .par_iter()
        .enumerate()
        .map(|(idx, &k)| Ok((k, solve_branch(&cfg.rho, k, d.tol), scan_wavenumber(&cfg.rho, k, idx as u64, d.tol)?)))
        .collect::<cetlab_core::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut roots = Vec::new();
    let mut gaps = Vec::new();
    let mut max_im = 0.0f64;
    for (k, branch, found) in &per_k {
        match branch {
            Ok(p) => rows.push(vec![p.k, p.omega, p.sigma, p.residual]),
            Err(e) => failures.push(json!({ "k": real(*k), "error": e.code() })),
        }
        if found.is_empty() {
            gaps.push(*k);
        }
        max_im = found.iter().fold(max_im, |m, r| m.max(r.im.abs()));
        let pairs: Vec<Value> = found.iter().map(|r| json!([real(r.re), real(r.im)])).collect();
        roots.push(json!({ "k": real(*k), "roots": pairs }));
    }
    sink.csv("dispersion.csv", &["k", "omega", "sigma", "residual"], rows)?;
    let doc = document(
        &sink.prov,
        vec![
            ("max_im", real(max_im)),
            ("gaps", reals(&gaps)),
            ("branch_failures", Value::Array(failures)),
            ("roots", Value::Array(roots)),
        ],
    );
    sink.json("dispersion.json", &doc)?;
    print(&doc);
    Ok(())
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t}.csv")
}

fn write_run(sink: &Sink, run: &RunOutput) -> Result<(), CliError> {
    sink.csv(
        "diagnostics.csv",
        &["t", "E_std", "E_ghost", "flux", "sup_u", "u_origin", "mem_norm", "src_norm"],
        run.records
            .iter()
            .map(|r| vec![r.t, r.e_std, r.e_ghost, r.flux, r.sup_u, r.u_origin, r.mem_norm, r.src_norm]),
    )?;
    for s in &run.snapshots {
        sink.csv(
            &snapshot_name(s.requested),
            &["r", "u", "M", "Phi"],
            (0..s.u.len()).map(|i| vec![s.r(i), s.u[i], s.memory[i], s.phi[i]]),
        )?;
    }
    Ok(())
}

fn run_fields(run: &RunOutput) -> Vec<(&'static str, Value)> {
    let e0 = run.records.first().map(|r| r.e_ghost).unwrap_or(0.0);
    let max_ghost = run.records.iter().fold(0.0f64, |m, r| m.max(r.e_ghost));
    let min_flux = run.records.iter().fold(f64::INFINITY, |m, r| m.min(r.flux));
    let blow_up = match &run.failure {
        Some(cetlab_core::Error::BlowUpDetected { t, .. }) => real(*t),
        _ => Value::Null,
    };
    vec![
        ("completed", json!(run.completed)),
        ("blow_up_time", blow_up),
        ("integrated_flux", real(run.integrated_flux())),
        ("final_time", real(run.final_state_time())),
        ("dt", real(run.dt)),
        ("records", json!(run.records.len())),
        ("e_ghost_initial", real(e0)),
        ("e_ghost_max", real(max_ghost)),
        ("min_flux", real(min_flux)),
        ("snapshots", json!(run.snapshots.iter().map(|s| snapshot_name(s.requested)).collect::<Vec<_>>())),
    ]
}

fn evolve(cfg: &RunConfig) -> Result<(), CliError> {
    let sink = Sink::new(cfg, "evolve");
    let mut opts = EvolveOptions::new(&cfg.model, cfg.solver.cadence);
    opts.snapshot_times = cfg.solver.snapshot_times.clone();
    opts.memory_from = f64::INFINITY;
    let run = evolve_with(&cfg.model, &cfg.grid, &opts)?;
    write_run(&sink, &run)?;
    let doc = document(&sink.prov, run_fields(&run));
    sink.json("summary.json", &doc)?;
    print(&doc);
    match run.failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn fit_json(f: &DecayFit) -> Value {
    json!({
        "exponent": real(f.exponent),
        "amplitude": real(f.amplitude),
        "r_squared": real(f.r_squared),
        "window": [real(f.window.0), real(f.window.1)],
    })
}

fn residual_json(r: &ResidualDecay) -> Value {
    let samples: Vec<Value> = r.samples.iter().map(|(t, d)| json!({ "t": real(*t), "residual": real(*d) })).collect();
    json!({ "samples": samples, "rate": real(r.rate), "r_squared": real(r.r_squared), "decreasing": r.decreasing })
}

fn scatter(cfg: &RunConfig) -> Result<(), CliError> {
    let sink = Sink::new(cfg, "scatter");
    let sc = &cfg.scatter;
    let mut opts = EvolveOptions::new(&cfg.model, cfg.solver.cadence);
    let mut times = cfg.solver.snapshot_times.clone();
    for &t in &sc.residual_times {
        times.push(t);
        times.push(2.0 * t);
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));
    opts.snapshot_times = times;
    let run = evolve_with(&cfg.model, &cfg.grid, &opts)?;
    if let Some(e) = run.failure {
        return Err(e.into());
    }
    let limit = memory_limit(&run)?;
    let dr = run.grid.dr();
    sink.csv("m_inf.csv", &["r", "M_inf"], limit.profile.iter().enumerate().map(|(i, m)| vec![i as f64 * dr, *m]))?;
    let exact = residual_decay(&run, &sc.residual_times, FreeEvolution::Exact)?;
    let discrete = residual_decay(&run, &sc.residual_times, FreeEvolution::Discrete)?;
    let sup = decay_fit(&sup_series(&run), sc.fit_window)?;
    let eps2 = cfg.model.epsilon * cfg.model.epsilon;
    let doc = document(
        &sink.prov,
        vec![
            ("m_inf_norm", real(limit.norm)),
            ("m_inf_over_eps2", real(if eps2 > 0.0 { limit.norm / eps2 } else { f64::NAN })),
            ("memory_limit_stable", json!(limit.stable())),
            ("window_difference", real(limit.window_difference)),
            ("residual_fits", json!({ "exact": residual_json(&exact), "discrete": residual_json(&discrete) })),
            ("decay_fits", json!({ "sup_u": fit_json(&sup), "memory_residual": fit_json(&limit.residual_fit) })),
            ("integrated_flux", real(run.integrated_flux())),
        ],
    );
    sink.json("scatter.json", &doc)?;
    print(&doc);
    Ok(())
}

fn pheno(a: &PhenoArgs) -> Result<(), CliError> {
    let units = match a.units {
        UnitsArg::Natural => Units::Natural,
        UnitsArg::Si => Units::Si,
        UnitsArg::Cgs => Units::CentimetreHertz,
    };
    let extra = [
        ("d_mpc", format!("{:?}", a.d_mpc)),
        ("omega_hz", format!("{:?}", a.omega_hz)),
        ("alpha", format!("{:?}", a.alpha)),
        ("mstar", format!("{:?}", a.mstar)),
        ("l1", a.l1.map(|v| format!("{v:?}")).unwrap_or_default()),
        ("units", units.name().to_string()),
    ];
    let prov = Provenance::new("pheno", "", &extra);
    let input = SignatureInput { d_mpc: a.d_mpc, omega_hz: a.omega_hz, alpha: a.alpha, m_star: a.mstar, l1: a.l1, units };
    let r = signature_report(&input)?;
    let doc = document(
        &prov,
        vec![
            ("units", json!(units.name())),
            ("d_mpc", real(a.d_mpc)),
            ("omega_hz", real(a.omega_hz)),
            ("l1", real(r.l1)),
            ("memory_excess_ratio", real(r.memory_excess_ratio)),
            ("pulsar_bound", real(r.pulsar_bound)),
            ("phase_shift", real(r.phase_shift)),
            ("phase_shift_natural", real(r.phase_shift_natural)),
            ("phase_shift_si", real(r.phase_shift_si)),
            ("phase_shift_cgs", real(r.phase_shift_cgs)),
            ("phase_bound", real(r.phase_bound)),
            ("tail_crossing", real(r.tail_crossing)),
            ("tail_amplitude_at_crossing", real(r.tail_amplitude_at_crossing)),
            (
                "convention_note",
                json!(format!(
                    "the phase shift depends on the unit convention: si / cgs = {:.6e}",
                    r.phase_shift_si / r.phase_shift_cgs
                )),
            ),
        ],
    );
    if let Some(dir) = &a.out {
        write_json_file(&dir.join("pheno.json"), &doc)?;
    }
    print(&doc);
    Ok(())
}

fn selftest(criteria: &[usize]) -> Result<(), CliError> {
    if let Some(bad) = criteria.iter().find(|c| !(1..=acceptance::CRITERIA).contains(*c)) {
        return Err(CliError::Invalid(format!("no acceptance criterion {bad} (expected 1..={})", acceptance::CRITERIA)));
    }
    let selected: Vec<usize> = if criteria.is_empty() { (1..=acceptance::CRITERIA).collect() } else { criteria.to_vec() };
    let outcomes = acceptance::run_selected(&selected);
    println!("{}", acceptance::table(&outcomes));
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(failed))
    }
}
