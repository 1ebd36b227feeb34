//! Experiment configuration.
//!
//! Configs are TOML. Numeric fields accept plain TOML numbers or strings
//! holding a scalar expression (see [`crate::expr`]), so `gamma_scale =
//! "1.5*sqrt(3)i"` and `beta = ["inf"]` both work. Parsing collects every
//! violation before failing.
//!
//! ```toml
//! experiment = "imv_sweep"
//!
//! [model]
//! kind = "HN"            # HN | AB_FLUX
//! L = 62
//! delta = 0.5
//! gamma_scale = 0        # disorder amplitude Gamma
//! disorder = "NONE"      # NONE | UNCORRELATED | PHASE_CORRELATED
//! phase_uniform = 0      # flux per cell without disorder (AB_FLUX)
//! gamma_uniform = 0      # potential per site without disorder
//! boundary = "PBC"       # PBC | OBC
//! interaction_u = 0
//!
//! [sweep]                # every axis is optional
//! mu = { start = -3, stop = 3, points = 201 }
//! beta = ["inf"]
//! gamma = [0, 1, 2]
//!
//! [seeds]
//! base = 1
//! count = 20
//! ```

use std::fmt::Write as _;

use nhlab_core::adiabatic::Scenario;
use nhlab_core::{Boundary, DisorderMode, ModelKind, ModelSpec, C64};
use toml::{Table, Value};

use crate::expr::parse_complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    Spectrum,
    ImvSweep,
    Correlation,
    RenyiScaling,
    EigenstateScatter,
    ThermalImv,
    EdInteraction,
    Adiabatic,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Spectrum,
        Experiment::ImvSweep,
        Experiment::Correlation,
        Experiment::RenyiScaling,
        Experiment::EigenstateScatter,
        Experiment::ThermalImv,
        Experiment::EdInteraction,
        Experiment::Adiabatic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::ImvSweep => "imv_sweep",
            Experiment::Correlation => "correlation",
            Experiment::RenyiScaling => "renyi_scaling",
            Experiment::EigenstateScatter => "eigenstate_scatter",
            Experiment::ThermalImv => "thermal_imv",
            Experiment::EdInteraction => "ed_interaction",
            Experiment::Adiabatic => "adiabatic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        Experiment::ALL.into_iter().find(|e| e.name() == s)
    }

    /// Whether a sweep axis influences this experiment.
    fn uses(self, axis: Axis) -> bool {
        use Experiment::*;
        match axis {
            Axis::Mu => !matches!(self, Spectrum | EigenstateScatter | EdInteraction),
            Axis::Beta => matches!(self, ImvSweep | Correlation | ThermalImv),
            Axis::U => matches!(self, EdInteraction | ThermalImv),
            Axis::Disorder => self != Adiabatic,
            Axis::Scenario => self == Adiabatic,
            Axis::Gamma | Axis::L | Axis::Boundary => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Mu,
    Beta,
    Gamma,
    U,
    L,
    Boundary,
    Disorder,
    Scenario,
}

impl Axis {
    const ALL: [Axis; 8] =
        [Axis::Mu, Axis::Beta, Axis::Gamma, Axis::U, Axis::L, Axis::Boundary, Axis::Disorder, Axis::Scenario];

    fn key(self) -> &'static str {
        match self {
            Axis::Mu => "mu",
            Axis::Beta => "beta",
            Axis::Gamma => "gamma",
            Axis::U => "u",
            Axis::L => "L",
            Axis::Boundary => "boundary",
            Axis::Disorder => "disorder",
            Axis::Scenario => "scenario",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermalSolver {
    /// Free-fermion complex Fermi weights (any model, any size).
    Free,
    /// Grand-canonical many-body trace (HN, `L <= 12`, honours `U`).
    Ed,
}

impl ThermalSolver {
    pub fn name(self) -> &'static str {
        match self {
            ThermalSolver::Free => "free",
            ThermalSolver::Ed => "ed",
        }
    }
}

/// Fully defaulted, validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Base model (`cells` is the first swept `L`); swept fields are
    /// overwritten per coordinate.
    pub model: ModelSpec,
    pub mu: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<C64>,
    pub u: Vec<f64>,
    pub cells: Vec<usize>,
    pub boundary: Vec<Boundary>,
    pub disorder: Vec<DisorderMode>,
    pub scenario: Vec<Scenario>,
    pub seed_base: u64,
    pub seed_count: usize,
    /// Interpolation grid size for adiabatic paths.
    pub adiabatic_points: usize,
    /// Particle number of ED ground states; `None` means half filling.
    pub ed_particles: Option<usize>,
    pub thermal_solver: ThermalSolver,
    pub dump_spectra: bool,
    pub output: String,
    /// `None`: decided by the command line / environment.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Cartesian product of every relevant axis times the seed count.
    pub fn scheduled_tasks(&self) -> usize {
        let e = self.experiment;
        let len = |axis: Axis, n: usize| if e.uses(axis) { n } else { 1 };
        len(Axis::Mu, self.mu.len())
            * len(Axis::Beta, self.beta.len())
            * len(Axis::Gamma, self.gamma.len())
            * len(Axis::U, self.u.len())
            * self.cells.len()
            * self.boundary.len()
            * len(Axis::Disorder, self.disorder.len())
            * len(Axis::Scenario, self.scenario.len())
            * self.seed_count
    }

    /// Canonical TOML echo of every field, defaults included. Hashing this
    /// text identifies a run configuration.
    pub fn resolved(&self) -> String {
        let m = &self.model;
        let list = |v: Vec<String>| format!("[{}]", v.join(", "));
        let num = |x: f64| {
            if x.is_infinite() {
                format!("\"{}inf\"", if x < 0.0 { "-" } else { "" })
            } else {
                format!("{x:?}")
            }
        };
        let cplx = |z: C64| format!("\"{:?}{:+?}i\"", z.re, z.im);
        let mut s = String::new();
        let _ = writeln!(s, "experiment = \"{}\"", self.experiment.name());
        let _ = writeln!(s, "\n[model]");
        let _ = writeln!(s, "kind = \"{}\"", m.kind.name());
        let _ = writeln!(s, "delta = {}", num(m.delta));
        let _ = writeln!(s, "gamma_scale = {}", cplx(m.gamma_scale));
        let _ = writeln!(s, "disorder = \"{}\"", m.disorder.name());
        let _ = writeln!(s, "phase_uniform = {}", num(m.phase_uniform));
        let _ = writeln!(s, "gamma_uniform = {}", cplx(m.gamma_uniform));
        let _ = writeln!(s, "boundary = \"{}\"", m.boundary.name());
        let _ = writeln!(s, "interaction_u = {}", num(m.interaction));
        let _ = writeln!(s, "\n[sweep]");
        let e = self.experiment;
        for axis in Axis::ALL.into_iter().filter(|&a| e.uses(a)) {
            let items: Vec<String> = match axis {
                Axis::Mu => self.mu.iter().map(|&x| num(x)).collect(),
                Axis::Beta => self.beta.iter().map(|&x| num(x)).collect(),
                Axis::Gamma => self.gamma.iter().map(|&z| cplx(z)).collect(),
                Axis::U => self.u.iter().map(|&x| num(x)).collect(),
                Axis::L => self.cells.iter().map(|x| x.to_string()).collect(),
                Axis::Boundary => self.boundary.iter().map(|b| format!("\"{b}\"")).collect(),
                Axis::Disorder => self.disorder.iter().map(|d| format!("\"{d}\"")).collect(),
                Axis::Scenario => self.scenario.iter().map(|c| format!("\"{}\"", c.name())).collect(),
            };
            let _ = writeln!(s, "{} = {}", axis.key(), list(items));
        }
        let _ = writeln!(s, "\n[seeds]\nbase = {}\ncount = {}", self.seed_base, self.seed_count);
        let _ = writeln!(s, "\n[adiabatic]\npoints = {}", self.adiabatic_points);
        let _ = writeln!(s, "\n[ed]");
        if let Some(n) = self.ed_particles {
            let _ = writeln!(s, "n_particles = {n}");
        }
        let _ = writeln!(s, "\n[thermal]\nsolver = \"{}\"", self.thermal_solver.name());
        let _ = writeln!(s, "\n[output]\ndir = {:?}\ndump_spectra = {}", self.output, self.dump_spectra);
        let _ = writeln!(s, "\n[run]");
        if let Some(w) = self.workers {
            let _ = writeln!(s, "workers = {w}");
        }
        s
    }
}

/// Parses and validates a config. `default_experiment` fills in a missing
/// `experiment` key (the CLI passes its subcommand).
pub fn parse_config(text: &str, default_experiment: Option<Experiment>) -> Result<ExperimentConfig, Vec<String>> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| vec![format!("TOML syntax: {e}")])?;
    let mut r = Reader::default();
    r.allow(&table, "", &["experiment", "model", "sweep", "seeds", "adiabatic", "ed", "thermal", "output", "run"]);

    let experiment = match table.get("experiment") {
        Some(v) => match v.as_str().and_then(Experiment::from_name) {
            Some(e) => {
                if let Some(d) = default_experiment.filter(|&d| d != e) {
                    r.err(format!("config is for `{}` but `{}` was requested", e.name(), d.name()));
                }
                Some(e)
            }
            None => {
                r.err(format!(
                    "experiment: unknown value {v} (expected one of {})",
                    Experiment::ALL.map(|e| e.name()).join(", ")
                ));
                None
            }
        },
        None => {
            if default_experiment.is_none() {
                r.err("missing key `experiment`".into());
            }
            default_experiment
        }
    };

    let empty = Table::new();
    let model_t = r.section(&table, "model", &empty);
    r.allow(
        model_t,
        "model.",
        &["kind", "L", "delta", "gamma_scale", "disorder", "phase_uniform", "gamma_uniform", "boundary", "interaction_u"],
    );
    let kind = r.parsed(model_t, "model.kind", ModelKind::HatanoNelson, |s| s.parse::<ModelKind>().ok());
    let base_cells = r.count(model_t, "model.L");
    let mut model = ModelSpec::hatano_nelson(base_cells.unwrap_or(2), 0.0);
    model.kind = kind;
    model.delta = r.real(model_t, "model.delta", 0.0);
    model.gamma_scale = r.complex(model_t, "model.gamma_scale", C64::new(0.0, 0.0));
    model.disorder = r.parsed(model_t, "model.disorder", DisorderMode::None, |s| s.parse().ok());
    model.phase_uniform = r.real(model_t, "model.phase_uniform", 0.0);
    model.gamma_uniform = r.complex(model_t, "model.gamma_uniform", C64::new(0.0, 0.0));
    model.boundary = r.parsed(model_t, "model.boundary", Boundary::Periodic, |s| s.parse().ok());
    model.interaction = r.real(model_t, "model.interaction_u", 0.0);

    let sweep_t = r.section(&table, "sweep", &empty);
    r.allow(sweep_t, "sweep.", &Axis::ALL.map(|a| a.key()));
    let mu = r.real_axis(sweep_t, "sweep.mu").unwrap_or_else(|| vec![0.0]);
    let beta = r.real_axis(sweep_t, "sweep.beta").unwrap_or_else(|| vec![f64::INFINITY]);
    let gamma = r.complex_axis(sweep_t, "sweep.gamma").unwrap_or_else(|| vec![model.gamma_scale]);
    let u = r.real_axis(sweep_t, "sweep.u").unwrap_or_else(|| vec![model.interaction]);
    let cells = match (base_cells, r.count_axis(sweep_t, "sweep.L")) {
        (Some(_), Some(_)) => {
            r.err("set either model.L or sweep.L, not both".into());
            vec![2]
        }
        (_, Some(v)) => v,
        (Some(l), None) => vec![l],
        (None, None) => {
            r.err("missing key `model.L` (or `sweep.L`)".into());
            vec![2]
        }
    };
    model.cells = cells[0];
    let boundary = r
        .enum_axis(sweep_t, "sweep.boundary", |s| s.parse::<Boundary>().ok())
        .unwrap_or_else(|| vec![model.boundary]);
    let disorder = r
        .enum_axis(sweep_t, "sweep.disorder", |s| s.parse::<DisorderMode>().ok())
        .unwrap_or_else(|| vec![model.disorder]);
    let scenario = r
        .enum_axis(sweep_t, "sweep.scenario", |s| Scenario::from_name(s).ok())
        .unwrap_or_else(|| Scenario::ALL.to_vec());

    let seeds_t = r.section(&table, "seeds", &empty);
    r.allow(seeds_t, "seeds.", &["base", "count"]);
    let seed_base = r.integer(seeds_t, "seeds.base").unwrap_or(0);
    let seed_count = r.integer(seeds_t, "seeds.count").unwrap_or(1) as usize;

    let adia_t = r.section(&table, "adiabatic", &empty);
    r.allow(adia_t, "adiabatic.", &["points"]);
    let adiabatic_points = r.integer(adia_t, "adiabatic.points").unwrap_or(101) as usize;

    let ed_t = r.section(&table, "ed", &empty);
    r.allow(ed_t, "ed.", &["n_particles"]);
    let ed_particles = r.integer(ed_t, "ed.n_particles").map(|n| n as usize);

    let thermal_t = r.section(&table, "thermal", &empty);
    r.allow(thermal_t, "thermal.", &["solver"]);
    let thermal_solver = r.parsed(thermal_t, "thermal.solver", ThermalSolver::Free, |s| {
        match s.to_ascii_lowercase().as_str() {
            "free" => Some(ThermalSolver::Free),
            "ed" => Some(ThermalSolver::Ed),
            _ => None,
        }
    });

    let out_t = r.section(&table, "output", &empty);
    r.allow(out_t, "output.", &["dir", "dump_spectra"]);
    let output = match out_t.get("dir") {
        Some(Value::String(s)) => s.clone(),
        Some(v) => {
            r.err(format!("output.dir: expected a string, got {v}"));
            String::new()
        }
        None => "out".into(),
    };
    let dump_spectra = match out_t.get("dump_spectra") {
        Some(Value::Boolean(b)) => *b,
        Some(v) => {
            r.err(format!("output.dump_spectra: expected a boolean, got {v}"));
            false
        }
        None => false,
    };

    let run_t = r.section(&table, "run", &empty);
    r.allow(run_t, "run.", &["workers"]);
    let workers = r.integer(run_t, "run.workers").map(|w| w as usize);

    let Some(experiment) = experiment else {
        return Err(r.errors);
    };
    let cfg = ExperimentConfig {
        experiment,
        model,
        mu,
        beta,
        gamma,
        u,
        cells,
        boundary,
        disorder,
        scenario,
        seed_base,
        seed_count,
        adiabatic_points,
        ed_particles,
        thermal_solver,
        dump_spectra,
        output,
        workers,
    };
    r.errors.extend(semantic_violations(&cfg, sweep_t));
    if r.errors.is_empty() {
        Ok(canonical(cfg))
    } else {
        Err(r.errors)
    }
}

/// Resets axes the experiment ignores to their defaults, so equal runs have
/// equal configs.
fn canonical(mut cfg: ExperimentConfig) -> ExperimentConfig {
    let e = cfg.experiment;
    if !e.uses(Axis::Mu) {
        cfg.mu = vec![0.0];
    }
    if !e.uses(Axis::Beta) {
        cfg.beta = vec![f64::INFINITY];
    }
    if !e.uses(Axis::U) {
        cfg.u = vec![cfg.model.interaction];
    }
    if !e.uses(Axis::Disorder) {
        cfg.disorder = vec![cfg.model.disorder];
    }
    if !e.uses(Axis::Scenario) {
        cfg.scenario = Scenario::ALL.to_vec();
    }
    cfg
}

fn semantic_violations(cfg: &ExperimentConfig, sweep_t: &Table) -> Vec<String> {
    let e = cfg.experiment;
    let mut out = Vec::new();
    for axis in Axis::ALL {
        let given = sweep_t.get(axis.key()).is_some();
        let len = match axis {
            Axis::Mu => cfg.mu.len(),
            Axis::Beta => cfg.beta.len(),
            Axis::Gamma => cfg.gamma.len(),
            Axis::U => cfg.u.len(),
            Axis::L => cfg.cells.len(),
            Axis::Boundary => cfg.boundary.len(),
            Axis::Disorder => cfg.disorder.len(),
            Axis::Scenario => cfg.scenario.len(),
        };
        if given && len == 0 {
            out.push(format!("sweep.{}: list must not be empty", axis.key()));
        }
        if given && !e.uses(axis) && len > 1 {
            out.push(format!("sweep.{}: `{}` does not depend on this axis", axis.key(), e.name()));
        }
    }
    if cfg.seed_count == 0 {
        out.push("seeds.count must be at least 1".into());
    }
    if cfg.workers == Some(0) {
        out.push("run.workers must be at least 1".into());
    }
    if cfg.adiabatic_points < 2 {
        out.push("adiabatic.points must be at least 2".into());
    }
    if cfg.beta.iter().any(|b| b.is_nan() || *b < 0.0) {
        out.push("sweep.beta: values must be non-negative (use \"inf\" for the ground state)".into());
    }
    if cfg.mu.iter().any(|m| !m.is_finite()) {
        out.push("sweep.mu: values must be finite".into());
    }
    // every swept model must be valid
    let mut seen = std::collections::BTreeSet::new();
    for &l in &cfg.cells {
        for &d in &cfg.disorder {
            for g in &cfg.gamma {
                for &u in &cfg.u {
                    let mut m = cfg.model.clone();
                    m.cells = l;
                    m.disorder = d;
                    m.gamma_scale = *g;
                    m.interaction = u;
                    for v in m.violations() {
                        if seen.insert(v.clone()) {
                            out.push(format!("model: {v}"));
                        }
                    }
                }
            }
        }
    }
    let hn_only = matches!(e, Experiment::EdInteraction)
        || (e == Experiment::ThermalImv && cfg.thermal_solver == ThermalSolver::Ed);
    if hn_only {
        if cfg.model.kind != ModelKind::HatanoNelson {
            out.push(format!("`{}` with many-body solver needs model.kind = \"HN\"", e.name()));
        }
        let cap = if e == Experiment::ThermalImv {
            nhlab_core::ed::THERMAL_MAX_SITES
        } else {
            nhlab_core::ed::MAX_SITES
        };
        if let Some(l) = cfg.cells.iter().find(|&&l| l > cap) {
            out.push(format!("L = {l} exceeds the many-body size cap {cap}"));
        }
    }
    if e == Experiment::ThermalImv
        && cfg.thermal_solver == ThermalSolver::Free
        && cfg.u.iter().any(|&u| u != 0.0)
    {
        out.push("nonzero U needs thermal.solver = \"ed\"".into());
    }
    if e == Experiment::Adiabatic && cfg.model.kind != ModelKind::AbFlux {
        out.push("`adiabatic` interpolates AB_FLUX endpoints; set model.kind = \"AB_FLUX\"".into());
    }
    if e == Experiment::RenyiScaling && cfg.beta.iter().any(|b| b.is_finite()) {
        out.push("`renyi_scaling` needs a pure state: beta must be inf".into());
    }
    if let (Some(n), Some(l)) = (cfg.ed_particles, cfg.cells.iter().min()) {
        if n > *l {
            out.push(format!("ed.n_particles = {n} exceeds L = {l}"));
        }
    }
    out
}

/// Typed access to TOML values that records errors instead of returning them.
#[derive(Default)]
struct Reader {
    errors: Vec<String>,
}

impl Reader {
    fn err(&mut self, e: String) {
        self.errors.push(e);
    }

    fn allow(&mut self, t: &Table, prefix: &str, keys: &[&str]) {
        for k in t.keys() {
            if !keys.contains(&k.as_str()) {
                self.err(format!("unknown key `{prefix}{k}`"));
            }
        }
    }

    fn section<'a>(&mut self, t: &'a Table, key: &str, empty: &'a Table) -> &'a Table {
        match t.get(key) {
            Some(Value::Table(s)) => s,
            Some(_) => {
                self.err(format!("`{key}` must be a section"));
                empty
            }
            None => empty,
        }
    }

    fn last(path: &str) -> &str {
        path.rsplit('.').next().unwrap_or(path)
    }

    fn scalar(&mut self, v: &Value, path: &str) -> Option<C64> {
        match v {
            Value::Integer(i) => Some(C64::new(*i as f64, 0.0)),
            Value::Float(x) => Some(C64::new(*x, 0.0)),
            Value::String(s) => match parse_complex(s) {
                Ok(z) => Some(z),
                Err(e) => {
                    self.err(format!("{path}: {e}"));
                    None
                }
            },
            other => {
                self.err(format!("{path}: expected a number, got {other}"));
                None
            }
        }
    }

    fn real_value(&mut self, v: &Value, path: &str) -> Option<f64> {
        let z = self.scalar(v, path)?;
        if z.im != 0.0 {
            self.err(format!("{path}: must be real, got {z}"));
            return None;
        }
        Some(z.re)
    }

    fn complex(&mut self, t: &Table, path: &str, default: C64) -> C64 {
        t.get(Self::last(path)).and_then(|v| self.scalar(v, path)).unwrap_or(default)
    }

    fn real(&mut self, t: &Table, path: &str, default: f64) -> f64 {
        t.get(Self::last(path)).and_then(|v| self.real_value(v, path)).unwrap_or(default)
    }

    fn integer(&mut self, t: &Table, path: &str) -> Option<u64> {
        match t.get(Self::last(path))? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            // seeds beyond i64::MAX can be given as strings
            Value::String(s) => match s.parse::<u64>() {
                Ok(x) => Some(x),
                Err(_) => {
                    self.err(format!("{path}: expected a non-negative integer, got \"{s}\""));
                    None
                }
            },
            other => {
                self.err(format!("{path}: expected a non-negative integer, got {other}"));
                None
            }
        }
    }

    fn count(&mut self, t: &Table, path: &str) -> Option<usize> {
        let n = self.integer(t, path)? as usize;
        if n == 0 {
            self.err(format!("{path}: must be positive"));
            return None;
        }
        Some(n)
    }

    fn parsed<T>(&mut self, t: &Table, path: &str, default: T, f: impl Fn(&str) -> Option<T>) -> T {
        match t.get(Self::last(path)) {
            None => default,
            Some(Value::String(s)) => f(s).unwrap_or_else(|| {
                self.err(format!("{path}: invalid value \"{s}\""));
                default
            }),
            Some(v) => {
                self.err(format!("{path}: expected a string, got {v}"));
                default
            }
        }
    }

    /// A list, a single scalar, or `{ start, stop, points }`.
    fn items(&mut self, t: &Table, path: &str) -> Option<Vec<Value>> {
        match t.get(Self::last(path))? {
            Value::Array(a) => Some(a.clone()),
            Value::Table(range) => {
                let known = ["start", "stop", "points"];
                self.allow(range, &format!("{path}."), &known);
                let start = range.get("start").and_then(|v| self.real_value(v, &format!("{path}.start")));
                let stop = range.get("stop").and_then(|v| self.real_value(v, &format!("{path}.stop")));
                let points = match range.get("points") {
                    Some(Value::Integer(n)) if *n >= 1 => Some(*n as usize),
                    _ => None,
                };
                match (start, stop, points) {
                    (Some(a), Some(b), Some(1)) if a == b => Some(vec![Value::Float(a)]),
                    (Some(a), Some(b), Some(n)) if n >= 2 => Some(
                        (0..n)
                            .map(|i| Value::Float(a + (b - a) * i as f64 / (n - 1) as f64))
                            .collect(),
                    ),
                    _ => {
                        self.err(format!(
                            "{path}: a range needs `start`, `stop` and `points` >= 2 (or 1 with start = stop)"
                        ));
                        None
                    }
                }
            }
            v => Some(vec![v.clone()]),
        }
    }

    fn real_axis(&mut self, t: &Table, path: &str) -> Option<Vec<f64>> {
        let items = self.items(t, path)?;
        Some(items.iter().filter_map(|v| self.real_value(v, path)).collect())
    }

    fn complex_axis(&mut self, t: &Table, path: &str) -> Option<Vec<C64>> {
        let items = self.items(t, path)?;
        Some(items.iter().filter_map(|v| self.scalar(v, path)).collect())
    }

    fn count_axis(&mut self, t: &Table, path: &str) -> Option<Vec<usize>> {
        let items = self.items(t, path)?;
        let mut out = Vec::new();
        for v in items {
            match v {
                Value::Integer(n) if n >= 2 => out.push(n as usize),
                other => self.err(format!("{path}: expected integers >= 2, got {other}")),
            }
        }
        Some(out)
    }

    fn enum_axis<T>(&mut self, t: &Table, path: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
        let items = self.items(t, path)?;
        let mut out = Vec::new();
        for v in items {
            match v.as_str().and_then(&f) {
                Some(x) => out.push(x),
                None => self.err(format!("{path}: invalid value {v}")),
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("experiment = \"spectrum\"\n[model]\nL = 8\n", None).unwrap();
        assert_eq!(cfg.model.boundary, Boundary::Periodic);
        assert_eq!(cfg.beta, vec![f64::INFINITY]);
        assert_eq!(cfg.seed_count, 1);
        assert_eq!(cfg.cells, vec![8]);
        assert_eq!(cfg.output, "out");
    }

    #[test]
    fn complex_sugar() {
        let cfg = parse_config(
            "experiment = \"correlation\"\n[model]\nkind = \"AB_FLUX\"\nL = 10\ngamma_scale = \"1.5*sqrt(3)i\"\ndisorder = \"PHASE_CORRELATED\"\n",
            None,
        )
        .unwrap();
        assert!((cfg.model.gamma_scale - C64::new(0.0, 1.5 * 3f64.sqrt())).norm() < 1e-15);
        assert!((cfg.model.gamma_scale.im - 2.598076211353316).abs() < 1e-12);
    }

    #[test]
    fn task_count_is_cartesian() {
        let cfg = parse_config(
            "experiment = \"imv_sweep\"\n[model]\nL = 62\ndelta = 0.5\ndisorder = \"UNCORRELATED\"\ngamma_scale = 1\n[sweep]\nmu = { start = -3, stop = 3, points = 201 }\n[seeds]\ncount = 20\n",
            None,
        )
        .unwrap();
        assert_eq!(cfg.mu.len(), 201);
        assert_eq!(cfg.scheduled_tasks(), 4020);
    }

    #[test]
    fn all_violations_reported() {
        let errs = parse_config(
            "experiment = \"spectrum\"\nbogus = 1\n[model]\nkind = \"HN\"\nL = 0\ndisorder = \"PHASE_CORRELATED\"\nboundary = \"twisted\"\n[seeds]\ncount = 0\n",
            None,
        )
        .unwrap_err();
        let joined = errs.join("\n");
        assert!(joined.contains("unknown key `bogus`"), "{joined}");
        assert!(joined.contains("model.L"), "{joined}");
        assert!(joined.contains("model.boundary"), "{joined}");
        assert!(joined.contains("PHASE_CORRELATED"), "{joined}");
        assert!(joined.contains("seeds.count"), "{joined}");
        assert!(errs.len() >= 5);
    }

    #[test]
    fn irrelevant_axis_rejected() {
        let errs =
            parse_config("experiment = \"spectrum\"\n[model]\nL = 4\n[sweep]\nmu = [0, 1]\n", None).unwrap_err();
        assert!(errs[0].contains("sweep.mu"));
    }

    #[test]
    fn experiment_from_subcommand() {
        let cfg = parse_config("[model]\nL = 4\n", Some(Experiment::Spectrum)).unwrap();
        assert_eq!(cfg.experiment, Experiment::Spectrum);
        assert!(parse_config("experiment = \"adiabatic\"\n[model]\nL = 4\nkind = \"AB\"\n", Some(Experiment::Spectrum))
            .is_err());
    }

    #[test]
    fn resolved_round_trips() {
        let cfg = parse_config(
            "experiment = \"thermal_imv\"\n[model]\nL = 10\ndelta = 0.5\n[sweep]\nbeta = [0.01, 1, \"inf\"]\n",
            None,
        )
        .unwrap();
        let again = parse_config(&cfg.resolved(), None).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.resolved(), cfg.resolved());
    }
}
