//! Sectioned `key = value` run configuration. The grammar is documented in
//! `docs/config.md`.

use std::fmt;
use std::path::{Path, PathBuf};

use cetlab_core::quadrature::{build_quadrature, MassQuadrature, MAX_NODES};
use cetlab_core::radial::{DataProfile, Grid, ModelConfig, VelocityMode};
use cetlab_core::spectral::{Family, SpectralDensity};

/// Where a setting came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(String),
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub file: String,
    pub origin: Origin,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Origin::Line(n) => write!(f, "{}:{}: {}", self.file, n, self.message),
            Origin::Flag(name) => write!(f, "command line ({}): {}", name, self.message),
            Origin::Default => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

const SECTIONS: &[(&str, &[&str])] = &[
    ("density", &["family", "alpha", "beta", "lambda", "gamma", "mu0", "atoms"]),
    ("quadrature", &["n_nodes", "tol"]),
    (
        "solver",
        &[
            "r_max",
            "n_r",
            "cfl",
            "t_final",
            "epsilon",
            "a_null",
            "b_bad",
            "c_grad",
            "d_quad",
            "r_c",
            "sigma",
            "velocity_mode",
            "delta0",
            "cadence",
            "snapshot_times",
        ],
    ),
    ("output", &["directory", "formats"]),
    ("memory", &["xi", "dt", "samples", "seeds"]),
    ("averaging", &["t_grid", "xi_grid", "slack", "tol"]),
    ("dispersion", &["k_grid", "tol"]),
    ("scatter", &["residual_times", "fit_window"]),
];

#[derive(Debug, Clone)]
struct Entry {
    section: String,
    key: String,
    value: String,
    origin: Origin,
}

/// Parsed but untyped settings, in file order, with command-line overrides
/// applied on top.
#[derive(Debug, Clone)]
pub struct RawConfig {
    file: String,
    entries: Vec<Entry>,
    section_lines: Vec<(String, usize)>,
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

impl RawConfig {
    pub fn empty() -> Self {
        RawConfig { file: String::from("<defaults>"), entries: Vec::new(), section_lines: Vec::new() }
    }

    pub fn parse(text: &str, file: &str) -> Result<Self, ConfigError> {
        let mut cfg = RawConfig { file: file.to_string(), entries: Vec::new(), section_lines: Vec::new() };
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| ConfigError { file: file.to_string(), origin: Origin::Line(line_no), message };
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{line}`")))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                if cfg.section_lines.iter().any(|(s, _)| s == name) {
                    return Err(err(format!("section [{name}] appears twice")));
                }
                cfg.section_lines.push((name.to_string(), line_no));
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current.clone().ok_or_else(|| err(format!("key `{key}` appears before any section header")))?;
            check_key(&section, key).map_err(&err)?;
            if value.is_empty() {
                return Err(err(format!("empty value for `{key}`")));
            }
            if cfg.entries.iter().any(|e| e.section == section && e.key == key) {
                return Err(err(format!("duplicate key `{key}` in [{section}]")));
            }
            cfg.entries.push(Entry { section, key: key.to_string(), value: value.to_string(), origin: Origin::Line(line_no) });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            file: file.clone(),
            origin: Origin::Default,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, &file)
    }

    /// Applies a command-line setting, replacing any value from the file.
    pub fn set(&mut self, section: &str, key: &str, value: &str, flag: &str) -> Result<(), ConfigError> {
        let origin = Origin::Flag(flag.to_string());
        check_key(section, key).map_err(|message| ConfigError { file: self.file.clone(), origin: origin.clone(), message })?;
        self.entries.retain(|e| !(e.section == section && e.key == key));
        self.entries.push(Entry { section: section.to_string(), key: key.to_string(), value: value.to_string(), origin });
        Ok(())
    }

    /// Applies `section.key=value`.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError {
            file: self.file.clone(),
            origin: Origin::Flag(format!("--set {assignment}")),
            message,
        };
        let (path, value) = assignment.split_once('=').ok_or_else(|| bad(String::from("expected section.key=value")))?;
        let (section, key) = path.trim().split_once('.').ok_or_else(|| bad(String::from("expected section.key=value")))?;
        self.set(section, key, value.trim(), &format!("--set {assignment}"))
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }

    fn error_at(&self, origin: Origin, message: String) -> ConfigError {
        ConfigError { file: self.file.clone(), origin, message }
    }

    fn section_origin(&self, section: &str) -> Origin {
        self.section_lines
            .iter()
            .find(|(s, _)| s == section)
            .map(|(_, l)| Origin::Line(*l))
            .unwrap_or(Origin::Default)
    }

    fn value<T>(&self, section: &str, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => parse(&e.value).map_err(|m| self.error_at(e.origin.clone(), format!("{section}.{key}: {m}"))),
        }
    }

    fn origin_of(&self, section: &str, key: &str) -> Origin {
        self.get(section, key).map(|e| e.origin.clone()).unwrap_or_else(|| self.section_origin(section))
    }
}

fn check_key(section: &str, key: &str) -> Result<(), String> {
    let keys = SECTIONS
        .iter()
        .find(|(s, _)| *s == section)
        .map(|(_, k)| *k)
        .ok_or_else(|| format!("unknown section [{section}]"))?;
    if keys.contains(&key) {
        Ok(())
    } else {
        Err(format!("unknown key `{key}` in [{section}] (expected one of: {})", keys.join(", ")))
    }
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

/// `[alpha, mu], [alpha, mu], ...`
fn parse_atoms(s: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut atoms = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('[').ok_or_else(|| format!("expected `[` at `{rest}`"))?;
        let close = open.find(']').ok_or_else(|| String::from("unterminated `[`"))?;
        let pair = parse_reals(&open[..close])?;
        if pair.len() != 2 {
            return Err(format!("atom `[{}]` needs exactly two numbers", &open[..close]));
        }
        atoms.push((pair[0], pair[1]));
        rest = open[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err(String::from("trailing comma"));
            }
        } else if !rest.is_empty() {
            return Err(format!("expected `,` between atoms, found `{rest}`"));
        }
    }
    if atoms.is_empty() {
        return Err(String::from("no atoms given"));
    }
    Ok(atoms)
}

fn parse_family(s: &str) -> Result<Family, String> {
    match s {
        "powerlaw" => Ok(Family::PowerLawExp),
        "breitwigner" => Ok(Family::BreitWigner),
        "diraccomb" => Ok(Family::DiracComb),
        _ => Err(format!("unknown family `{s}` (expected powerlaw, breitwigner or diraccomb)")),
    }
}

fn parse_velocity(s: &str) -> Result<VelocityMode, String> {
    match s {
        "time-symmetric" => Ok(VelocityMode::TimeSymmetric),
        "ingoing" => Ok(VelocityMode::Ingoing),
        "outgoing" => Ok(VelocityMode::Outgoing),
        _ => Err(format!("unknown velocity mode `{s}` (expected time-symmetric, ingoing or outgoing)")),
    }
}

pub fn velocity_name(v: VelocityMode) -> &'static str {
    match v {
        VelocityMode::TimeSymmetric => "time-symmetric",
        VelocityMode::Ingoing => "ingoing",
        VelocityMode::Outgoing => "outgoing",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    pub family: Family,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub mu0: f64,
    pub atoms: Vec<(f64, f64)>,
}

impl DensitySpec {
    pub fn build(&self) -> cetlab_core::Result<SpectralDensity> {
        match self.family {
            Family::PowerLawExp => SpectralDensity::power_law_exp(self.alpha, self.beta, self.lambda),
            Family::BreitWigner => SpectralDensity::breit_wigner(self.alpha, self.gamma, self.mu0),
            Family::DiracComb => SpectralDensity::dirac_comb(&self.atoms),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    /// `None` takes the smallest radius satisfying the causal padding.
    pub r_max: Option<f64>,
    pub n_r: usize,
    pub cfl: f64,
    pub t_final: f64,
    pub epsilon: f64,
    pub a_null: f64,
    pub b_bad: f64,
    pub c_grad: f64,
    pub d_quad: f64,
    pub r_c: f64,
    pub sigma: f64,
    pub velocity_mode: VelocityMode,
    pub delta0: f64,
    pub cadence: usize,
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemorySpec {
    pub xi: f64,
    pub dt: f64,
    pub samples: usize,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragingSpec {
    pub t_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub slack: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSpec {
    pub k_grid: Vec<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSpec {
    pub residual_times: Vec<f64>,
    pub fit_window: (f64, f64),
}

/// Fully resolved, validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: String,
    pub density: DensitySpec,
    pub n_nodes: usize,
    pub quad_tol: f64,
    pub solver: SolverSpec,
    pub directory: PathBuf,
    pub formats: Vec<Format>,
    pub memory: MemorySpec,
    pub averaging: AveragingSpec,
    pub dispersion: DispersionSpec,
    pub scatter: ScatterSpec,
    pub rho: SpectralDensity,
    pub quad: MassQuadrature,
    pub grid: Grid,
    pub model: ModelConfig,
}

fn require(cond: bool, raw: &RawConfig, section: &str, key: &str, message: &str) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(raw.error_at(raw.origin_of(section, key), format!("{section}.{key}: {message}")))
    }
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self, ConfigError> {
        let density = resolve_density(raw)?;
        let rho = density
            .build()
            .map_err(|e| raw.error_at(density_origin(raw, &e.to_string()), format!("invalid density: {e}")))?;

        let n_nodes = raw.value("quadrature", "n_nodes", 32, parse_count)?;
        require((1..=MAX_NODES).contains(&n_nodes), raw, "quadrature", "n_nodes", &format!("must lie in [1, {MAX_NODES}]"))?;
        let quad_tol = raw.value("quadrature", "tol", 1e-10, parse_real)?;
        require(quad_tol > 0.0 && quad_tol < 1.0, raw, "quadrature", "tol", "must lie in (0, 1)")?;
        let quad = build_quadrature(&rho, n_nodes, quad_tol)
            .map_err(|e| raw.error_at(raw.section_origin("quadrature"), format!("quadrature: {e}")))?;

        let solver = resolve_solver(raw)?;
        let mut model = ModelConfig::new(quad.clone());
        model.epsilon = solver.epsilon;
        model.a_null = solver.a_null;
        model.b_bad = solver.b_bad;
        model.c_grad = solver.c_grad;
        model.d_quad = solver.d_quad;
        model.cfl = solver.cfl;
        model.t_final = solver.t_final;
        model.delta0 = solver.delta0;
        model.profile = DataProfile { r_c: solver.r_c, sigma: solver.sigma, velocity: solver.velocity_mode };
        let r_max = solver.r_max.unwrap_or_else(|| model.padded_r_max());
        let grid = Grid::new(r_max, solver.n_r)
            .map_err(|e| raw.error_at(raw.origin_of("solver", "n_r"), format!("solver grid: {e}")))?;
        model
            .validate(&grid)
            .map_err(|e| raw.error_at(raw.section_origin("solver"), format!("solver: {e}")))?;

        let directory = PathBuf::from(raw.value("output", "directory", String::from("cetlab-out"), |s| Ok(s.to_string()))?);
        let formats = raw.value("output", "formats", vec![Format::Csv, Format::Json], |s| {
            let mut out = Vec::new();
            for f in s.split(',').map(str::trim) {
                let f = match f {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(format!("unknown format `{f}` (expected csv or json)")),
                };
                if !out.contains(&f) {
                    out.push(f);
                }
            }
            Ok(out)
        })?;

        let memory = MemorySpec {
            xi: raw.value("memory", "xi", 0.0, parse_real)?,
            dt: raw.value("memory", "dt", 0.01, parse_real)?,
            samples: raw.value("memory", "samples", 2001, parse_count)?,
            seeds: raw.value("memory", "seeds", 100, parse_count)?,
        };
        require(memory.xi >= 0.0, raw, "memory", "xi", "must be nonnegative")?;
        require(memory.dt > 0.0, raw, "memory", "dt", "must be positive")?;
        require(memory.samples >= 16, raw, "memory", "samples", "must be at least 16")?;

        let averaging = AveragingSpec {
            t_grid: raw.value("averaging", "t_grid", cetlab_core::averaging::DEFAULT_T_GRID.to_vec(), parse_reals)?,
            xi_grid: raw.value("averaging", "xi_grid", cetlab_core::averaging::DEFAULT_XI_GRID.to_vec(), parse_reals)?,
            slack: raw.value("averaging", "slack", cetlab_core::averaging::DEFAULT_SLACK, parse_real)?,
            tol: raw.value("averaging", "tol", cetlab_core::averaging::DEFAULT_AVG_TOL, parse_real)?,
        };
        require(
            averaging.t_grid.iter().all(|t| (1.0..=1000.0).contains(t)),
            raw,
            "averaging",
            "t_grid",
            "times must lie in [1, 1000]",
        )?;
        require(averaging.xi_grid.iter().all(|x| *x >= 0.0), raw, "averaging", "xi_grid", "must be nonnegative")?;
        require(averaging.slack >= 0.0, raw, "averaging", "slack", "must be nonnegative")?;
        require(averaging.tol > 0.0, raw, "averaging", "tol", "must be positive")?;

        let dispersion = DispersionSpec {
            k_grid: raw.value("dispersion", "k_grid", cetlab_core::dispersion::DEFAULT_K_GRID.to_vec(), parse_reals)?,
            tol: raw.value("dispersion", "tol", cetlab_core::dispersion::DEFAULT_DISPERSION_TOL, parse_real)?,
        };
        require(dispersion.k_grid.iter().all(|k| *k > 0.0), raw, "dispersion", "k_grid", "must be positive")?;
        require(dispersion.tol > 0.0, raw, "dispersion", "tol", "must be positive")?;

        let t_final = solver.t_final;
        let scatter = ScatterSpec {
            residual_times: raw.value("scatter", "residual_times", vec![t_final / 8.0, t_final / 4.0, t_final / 2.0], parse_reals)?,
            fit_window: raw.value("scatter", "fit_window", (t_final / 10.0, t_final), |s| {
                let v = parse_reals(s)?;
                match v[..] {
                    [a, b] if a < b => Ok((a, b)),
                    _ => Err(String::from("expected two increasing times")),
                }
            })?,
        };
        require(
            scatter.residual_times.iter().all(|t| *t > 0.0 && 2.0 * t <= t_final * (1.0 + 1e-12)),
            raw,
            "scatter",
            "residual_times",
            "each t needs 0 < t and 2 t <= solver.t_final",
        )?;

        Ok(RunConfig {
            source: raw.file.clone(),
            density,
            n_nodes,
            quad_tol,
            solver,
            directory,
            formats,
            memory,
            averaging,
            dispersion,
            scatter,
            rho,
            quad,
            grid,
            model,
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Canonical text of every resolved setting; its digest identifies a run.
    pub fn canonical(&self) -> String {
        let r = |v: f64| format!("{v:?}");
        let list = |v: &[f64]| v.iter().map(|x| r(*x)).collect::<Vec<_>>().join(", ");
        let d = &self.density;
        let s = &self.solver;
        let mut out = String::new();
        out += "[density]\n";
        out += &format!("family = {}\n", d.family.name());
        out += &format!("alpha = {}\n", r(d.alpha));
        match d.family {
            Family::PowerLawExp => out += &format!("beta = {}\nlambda = {}\n", r(d.beta), r(d.lambda)),
            Family::BreitWigner => out += &format!("gamma = {}\nmu0 = {}\n", r(d.gamma), r(d.mu0)),
            Family::DiracComb => {
                let atoms: Vec<String> = d.atoms.iter().map(|(a, m)| format!("[{}, {}]", r(*a), r(*m))).collect();
                out += &format!("atoms = {}\n", atoms.join(", "));
            }
        }
        out += &format!("[quadrature]\nn_nodes = {}\ntol = {}\n", self.n_nodes, r(self.quad_tol));
        out += &format!(
            "[solver]\nr_max = {}\nn_r = {}\ncfl = {}\nt_final = {}\nepsilon = {}\na_null = {}\nb_bad = {}\nc_grad = {}\nd_quad = {}\nr_c = {}\nsigma = {}\nvelocity_mode = {}\ndelta0 = {}\ncadence = {}\nsnapshot_times = {}\n",
            r(self.grid.r_max),
            s.n_r,
            r(s.cfl),
            r(s.t_final),
            r(s.epsilon),
            r(s.a_null),
            r(s.b_bad),
            r(s.c_grad),
            r(s.d_quad),
            r(s.r_c),
            r(s.sigma),
            velocity_name(s.velocity_mode),
            r(s.delta0),
            s.cadence,
            list(&s.snapshot_times),
        );
        let m = &self.memory;
        out += &format!("[memory]\nxi = {}\ndt = {}\nsamples = {}\nseeds = {}\n", r(m.xi), r(m.dt), m.samples, m.seeds);
        let a = &self.averaging;
        out += &format!(
            "[averaging]\nt_grid = {}\nxi_grid = {}\nslack = {}\ntol = {}\n",
            list(&a.t_grid),
            list(&a.xi_grid),
            r(a.slack),
            r(a.tol)
        );
        out += &format!("[dispersion]\nk_grid = {}\ntol = {}\n", list(&self.dispersion.k_grid), r(self.dispersion.tol));
        out += &format!(
            "[scatter]\nresidual_times = {}\nfit_window = {}, {}\n",
            list(&self.scatter.residual_times),
            r(self.scatter.fit_window.0),
            r(self.scatter.fit_window.1)
        );
        out
    }
}

/// The density setting a validation message talks about: the key named
/// earliest in the message, else the family line.
fn density_origin(raw: &RawConfig, message: &str) -> Origin {
    let words: Vec<&str> = message.split(|c: char| !c.is_ascii_alphanumeric()).collect();
    words
        .iter()
        .find_map(|w| {
            let key = if *w == "atom" { "atoms" } else { w };
            raw.get("density", key).map(|e| e.origin.clone())
        })
        .unwrap_or_else(|| raw.origin_of("density", "family"))
}

fn resolve_density(raw: &RawConfig) -> Result<DensitySpec, ConfigError> {
    let family = raw.value("density", "family", Family::PowerLawExp, parse_family)?;
    let allowed: &[&str] = match family {
        Family::PowerLawExp => &["family", "alpha", "beta", "lambda"],
        Family::BreitWigner => &["family", "alpha", "gamma", "mu0"],
        Family::DiracComb => &["family", "atoms"],
    };
    for e in raw.entries.iter().filter(|e| e.section == "density") {
        if !allowed.contains(&e.key.as_str()) {
            return Err(raw.error_at(
                e.origin.clone(),
                format!("density.{} does not apply to family {}", e.key, family.name()),
            ));
        }
    }
    let needed = |key: &str| -> Result<(), ConfigError> {
        if raw.get("density", key).is_none() {
            Err(raw.error_at(
                raw.origin_of("density", "family"),
                format!("family {} requires density.{key}", family.name()),
            ))
        } else {
            Ok(())
        }
    };
    match family {
        Family::BreitWigner => {
            needed("gamma")?;
            needed("mu0")?;
        }
        Family::DiracComb => needed("atoms")?,
        Family::PowerLawExp => {}
    }
    Ok(DensitySpec {
        family,
        alpha: raw.value("density", "alpha", 1.0, parse_real)?,
        beta: raw.value("density", "beta", 1.0, parse_real)?,
        lambda: raw.value("density", "lambda", 1.0, parse_real)?,
        gamma: raw.value("density", "gamma", 0.0, parse_real)?,
        mu0: raw.value("density", "mu0", 0.0, parse_real)?,
        atoms: raw.value("density", "atoms", Vec::new(), parse_atoms)?,
    })
}

fn resolve_solver(raw: &RawConfig) -> Result<SolverSpec, ConfigError> {
    use cetlab_core::radial::*;
    let s = SolverSpec {
        r_max: raw.value("solver", "r_max", None, |v| parse_real(v).map(Some))?,
        n_r: raw.value("solver", "n_r", DEFAULT_N_R, parse_count)?,
        cfl: raw.value("solver", "cfl", DEFAULT_CFL, parse_real)?,
        t_final: raw.value("solver", "t_final", DEFAULT_T_FINAL, parse_real)?,
        epsilon: raw.value("solver", "epsilon", DEFAULT_EPSILON, parse_real)?,
        a_null: raw.value("solver", "a_null", 1.0, parse_real)?,
        b_bad: raw.value("solver", "b_bad", 0.0, parse_real)?,
        c_grad: raw.value("solver", "c_grad", 1.0, parse_real)?,
        d_quad: raw.value("solver", "d_quad", 1.0, parse_real)?,
        r_c: raw.value("solver", "r_c", DEFAULT_R_C, parse_real)?,
        sigma: raw.value("solver", "sigma", DEFAULT_SIGMA, parse_real)?,
        velocity_mode: raw.value("solver", "velocity_mode", VelocityMode::TimeSymmetric, parse_velocity)?,
        delta0: raw.value("solver", "delta0", DEFAULT_DELTA0, parse_real)?,
        cadence: raw.value("solver", "cadence", 10, parse_count)?,
        snapshot_times: raw.value("solver", "snapshot_times", Vec::new(), parse_reals)?,
    };
    require(s.cadence >= 1, raw, "solver", "cadence", "must be at least 1")?;
    require(s.t_final > 0.0, raw, "solver", "t_final", "must be positive")?;
    require(s.epsilon >= 0.0, raw, "solver", "epsilon", "must be nonnegative")?;
    require(
        s.snapshot_times.iter().all(|t| *t >= 0.0 && *t <= s.t_final),
        raw,
        "solver",
        "snapshot_times",
        "times must lie in [0, t_final]",
    )?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_carry_file_and_line() {
        let text = "# demo\n[density]\nfamily = powerlaw\nalpha = x\n";
        let raw = RawConfig::parse(text, "demo.cfg").unwrap();
        let err = RunConfig::resolve(&raw).unwrap_err();
        assert_eq!(err.origin, Origin::Line(4));
        assert!(err.to_string().starts_with("demo.cfg:4: density.alpha"), "{err}");
    }

    #[test]
    fn grammar_errors() {
        let cases = [
            ("alpha = 1\n", 1),
            ("[density]\nfamily\n", 2),
            ("[nope]\n", 1),
            ("[density]\nalpha = 1\nalpha = 2\n", 3),
            ("[density]\ncolour = red\n", 2),
            ("[density]\n[density]\n", 2),
            ("[density\n", 1),
        ];
        for (text, line) in cases {
            let err = RawConfig::parse(text, "c").unwrap_err();
            assert_eq!(err.origin, Origin::Line(line), "{text:?}: {err}");
        }
    }

    #[test]
    fn atoms_and_comments() {
        let text = "[density] ; comment\nfamily = diraccomb\natoms = [0.5, 1], [0.25, 4]  # two atoms\n";
        let cfg = RunConfig::resolve(&RawConfig::parse(text, "c").unwrap()).unwrap();
        assert_eq!(cfg.density.atoms, vec![(0.5, 1.0), (0.25, 4.0)]);
        assert!(parse_atoms("[1, 2],").is_err());
        assert!(parse_atoms("[1, 2, 3]").is_err());
        assert!(parse_atoms("[1, 2] [3, 4]").is_err());
    }

    #[test]
    fn family_keys_are_checked() {
        let text = "[density]\nfamily = breitwigner\nbeta = 1\n";
        let err = RunConfig::resolve(&RawConfig::parse(text, "c").unwrap()).unwrap_err();
        assert_eq!(err.origin, Origin::Line(3));
        let text = "[density]\nfamily = breitwigner\n";
        let err = RunConfig::resolve(&RawConfig::parse(text, "c").unwrap()).unwrap_err();
        assert_eq!(err.origin, Origin::Line(2));
    }

    #[test]
    fn solver_invariants_are_attributed() {
        let text = "[quadrature]\nn_nodes = 8\n[solver]\nt_final = 10\nr_max = 12\nn_r = 256\n";
        let err = RunConfig::resolve(&RawConfig::parse(text, "c").unwrap()).unwrap_err();
        assert_eq!(err.origin, Origin::Line(3));
        assert!(err.message.contains("padding"), "{err}");
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut raw = RawConfig::parse("[density]\nalpha = 2\n", "c").unwrap();
        raw.set("density", "alpha", "3", "--alpha").unwrap();
        raw.set_assignment("solver.t_final=20").unwrap();
        let cfg = RunConfig::resolve(&raw).unwrap();
        assert_eq!(cfg.density.alpha, 3.0);
        assert_eq!(cfg.solver.t_final, 20.0);
        assert!(raw.set_assignment("solver.nope=1").is_err());
        let err = {
            let mut r = RawConfig::empty();
            r.set("density", "alpha", "-1", "--alpha").unwrap();
            RunConfig::resolve(&r).unwrap_err()
        };
        assert_eq!(err.origin, Origin::Flag(String::from("--alpha")));
    }

    #[test]
    fn canonical_text_is_stable_under_reformatting() {
        let a = RawConfig::parse("[solver]\nepsilon=0.01\nt_final = 20\n", "a").unwrap();
        let b = RawConfig::parse("# other\n[solver]\nt_final = 2e1\n  epsilon =   1e-2\n", "b").unwrap();
        assert_eq!(RunConfig::resolve(&a).unwrap().canonical(), RunConfig::resolve(&b).unwrap().canonical());
    }
}
