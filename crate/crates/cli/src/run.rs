//! Sweep scheduling and the per-experiment kernels.
//!
//! A run is split into *units*: one model coordinate `(L, boundary,
//! disorder, Gamma, U, scenario)` times one disorder realization. A unit
//! builds and decomposes its Hamiltonian once and then evaluates every
//! `(mu, beta)` point of the sweep. Units run on a bounded rayon pool; their
//! rows are merged and sorted by `(coordinate, mu, beta, realization)`, so
//! the table does not depend on the worker count.

use std::panic::{catch_unwind, AssertUnwindSafe};

use nhlab_core::adiabatic::{Scenario, ScenarioPath};
use nhlab_core::ed::{
    build_sector_hamiltonian, ed_ground_state_velocity, many_body_velocity, ThermalEnsemble,
};
use nhlab_core::observables::{
    classify_decay, correlation_profile, eigenstate_diagnostics, fill_lowest, momentum_velocity,
    renyi2_half, ring_distance, sea_velocity, state_velocities, winding_estimate,
};
use nhlab_core::stats::median;
use nhlab_core::{
    bloch_grid, build_hamiltonian, correlation_matrix, decompose, draw_disorder, fermi_sea,
    velocity_operator, Boundary, DisorderMode, FockSector, ModelSpec, PairFlag, C64,
};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig, ThermalSolver};
use crate::seeds::task_seed;

/// Bumped whenever the column set or the meaning of a quantity changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 18] = [
    "task", "seed", "L", "boundary", "disorder", "gamma_re", "gamma_im", "mu", "beta", "u", "scenario", "lambda",
    "quantity", "index", "re", "im", "label", "error",
];

/// Model coordinate of a unit (everything but `mu`, `beta` and the seed).
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinate {
    pub cells: usize,
    pub boundary: Boundary,
    pub disorder: DisorderMode,
    pub gamma: C64,
    pub u: f64,
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Clone)]
pub struct Unit {
    pub task: usize,
    pub coordinate_index: usize,
    pub coordinate: Coordinate,
    pub realization: usize,
    pub seed: u64,
}

/// One CSV row. `None` fields are written as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub task: usize,
    pub seed: u64,
    pub cells: usize,
    pub boundary: Boundary,
    pub disorder: DisorderMode,
    pub gamma: C64,
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub u: Option<f64>,
    pub scenario: Option<Scenario>,
    pub lambda: Option<f64>,
    pub quantity: &'static str,
    pub index: Option<usize>,
    pub value: C64,
    pub label: String,
    pub error: String,
    /// `(coordinate, mu index, beta index, realization, emission order)`.
    pub sort_key: (usize, usize, usize, usize, usize),
}

impl Row {
    pub fn is_error(&self) -> bool {
        !self.error.is_empty()
    }

    /// Coordinate part of the sort key: rows sharing it differ only by seed.
    pub fn group_key(&self) -> (usize, usize, usize) {
        (self.sort_key.0, self.sort_key.1, self.sort_key.2)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumDump {
    pub task: usize,
    pub seed: u64,
    pub eigenvalues: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub schema_version: u32,
    pub rows: Vec<Row>,
    pub units: usize,
    pub failed_units: usize,
    pub spectra: Vec<SpectrumDump>,
}

/// Every unit of the sweep, in canonical order.
pub fn plan(cfg: &ExperimentConfig) -> Vec<Unit> {
    let scenarios: Vec<Option<Scenario>> = if cfg.experiment == Experiment::Adiabatic {
        cfg.scenario.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let us: Vec<f64> = if matches!(cfg.experiment, Experiment::EdInteraction | Experiment::ThermalImv) {
        cfg.u.clone()
    } else {
        vec![cfg.model.interaction]
    };
    let disorders = if cfg.experiment == Experiment::Adiabatic { vec![DisorderMode::None] } else { cfg.disorder.clone() };
    // the disorder ensemble is (L, disorder, Gamma, scenario)
    let mut ensembles: Vec<(usize, DisorderMode, C64, Option<Scenario>)> = Vec::new();
    let mut units = Vec::new();
    let mut coordinate_index = 0;
    for &cells in &cfg.cells {
        for &boundary in &cfg.boundary {
            for &disorder in &disorders {
                for &gamma in &cfg.gamma {
                    for &u in &us {
                        for &scenario in &scenarios {
                            // adiabatic endpoints fix their own disorder mode and Gamma phase
                            let (disorder, gamma) = match scenario {
                                Some(sc) => {
                                    let e = sc.endpoint(cells, gamma.norm(), boundary, 0);
                                    (e.disorder, e.gamma_scale)
                                }
                                None => (disorder, gamma),
                            };
                            let key = (cells, disorder, gamma, scenario);
                            let ensemble = match ensembles.iter().position(|e| *e == key) {
                                Some(i) => i,
                                None => {
                                    ensembles.push(key);
                                    ensembles.len() - 1
                                }
                            };
                            let coordinate = Coordinate { cells, boundary, disorder, gamma, u, scenario };
                            for realization in 0..cfg.seed_count {
                                units.push(Unit {
                                    task: units.len(),
                                    coordinate_index,
                                    coordinate: coordinate.clone(),
                                    realization,
                                    seed: task_seed(cfg.seed_base, ensemble as u64, realization as u64),
                                });
                            }
                            coordinate_index += 1;
                        }
                    }
                }
            }
        }
    }
    units
}

/// Runs the whole sweep on `workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> anyhow::Result<ResultTable> {
    let units = plan(cfg);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let outputs: Vec<UnitOutput> = pool.install(|| units.par_iter().map(|u| run_unit(cfg, u)).collect());
    let failed_units = outputs.iter().filter(|o| o.failed).count();
    let mut rows = Vec::new();
    let mut spectra = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        spectra.extend(o.spectrum);
    }
    rows.sort_by_key(|r| r.sort_key);
    Ok(ResultTable { schema_version: SCHEMA_VERSION, rows, units: units.len(), failed_units, spectra })
}

struct UnitOutput {
    rows: Vec<Row>,
    spectrum: Option<SpectrumDump>,
    failed: bool,
}

/// Row factory bound to one unit.
struct Sink<'a> {
    cfg: &'a ExperimentConfig,
    unit: &'a Unit,
    rows: Vec<Row>,
    spectrum: Option<SpectrumDump>,
    /// Points that failed; the unit fails only if all of them do.
    errors: usize,
    points: usize,
}

impl<'a> Sink<'a> {
    fn row(&mut self, point: (usize, usize), quantity: &'static str, index: Option<usize>, value: C64) -> &mut Row {
        let cfg = self.cfg;
        let e = cfg.experiment;
        let c = &self.unit.coordinate;
        let uses_mu = !matches!(e, Experiment::Spectrum | Experiment::EigenstateScatter | Experiment::EdInteraction);
        let uses_beta = matches!(e, Experiment::ImvSweep | Experiment::Correlation | Experiment::ThermalImv);
        let uses_u = matches!(e, Experiment::EdInteraction | Experiment::ThermalImv);
        let seq = self.rows.len();
        self.rows.push(Row {
            task: self.unit.task,
            seed: self.unit.seed,
            cells: c.cells,
            boundary: c.boundary,
            disorder: c.disorder,
            gamma: c.gamma,
            mu: uses_mu.then(|| cfg.mu[point.0]),
            beta: uses_beta.then(|| cfg.beta[point.1]),
            u: uses_u.then_some(c.u),
            scenario: c.scenario,
            lambda: None,
            quantity,
            index,
            value,
            label: String::new(),
            error: String::new(),
            sort_key: (self.unit.coordinate_index, point.0, point.1, self.unit.realization, seq),
        });
        self.rows.last_mut().unwrap()
    }

    fn real(&mut self, point: (usize, usize), quantity: &'static str, index: Option<usize>, x: f64) -> &mut Row {
        self.row(point, quantity, index, C64::new(x, 0.0))
    }

    fn fail(&mut self, point: (usize, usize), err: impl std::fmt::Display) {
        self.errors += 1;
        let msg = err.to_string();
        log::warn!("task {} (seed {}): {msg}", self.unit.task, self.unit.seed);
        let row = self.real(point, "error", None, f64::NAN);
        row.error = msg;
    }

    /// Runs `f` for one `(mu, beta)` point, turning errors into error rows.
    fn point(&mut self, point: (usize, usize), f: impl FnOnce(&mut Self) -> anyhow::Result<()>) {
        self.points += 1;
        if let Err(e) = f(self) {
            self.fail(point, format!("{e:#}"));
        }
    }
}

fn run_unit(cfg: &ExperimentConfig, unit: &Unit) -> UnitOutput {
    let mut sink = Sink { cfg, unit, rows: Vec::new(), spectrum: None, errors: 0, points: 0 };
    let outcome = catch_unwind(AssertUnwindSafe(|| kernel(&mut sink)));
    let failure = match outcome {
        Ok(Ok(())) => None,
        Ok(Err(e)) => Some(format!("{e:#}")),
        Err(p) => Some(format!(
            "panic: {}",
            p.downcast_ref::<&str>().copied().or(p.downcast_ref::<String>().map(|s| s.as_str())).unwrap_or("?")
        )),
    };
    if let Some(msg) = failure {
        // a unit-level failure discards partial results of that unit
        sink.rows.clear();
        sink.spectrum = None;
        sink.points = 1;
        sink.errors = 0;
        sink.fail((0, 0), msg);
    }
    let failed = sink.points > 0 && sink.errors == sink.points;
    UnitOutput { rows: sink.rows, spectrum: sink.spectrum, failed }
}

fn unit_spec(cfg: &ExperimentConfig, unit: &Unit) -> ModelSpec {
    let c = &unit.coordinate;
    let mut spec = cfg.model.clone();
    spec.cells = c.cells;
    spec.boundary = c.boundary;
    spec.disorder = c.disorder;
    spec.gamma_scale = c.gamma;
    spec.interaction = c.u;
    spec.seed = unit.seed;
    spec
}

fn points(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    let e = cfg.experiment;
    let nm = if matches!(e, Experiment::Spectrum | Experiment::EigenstateScatter | Experiment::EdInteraction) {
        1
    } else {
        cfg.mu.len()
    };
    let nb = if matches!(e, Experiment::ImvSweep | Experiment::Correlation | Experiment::ThermalImv) {
        cfg.beta.len()
    } else {
        1
    };
    (0..nm).flat_map(|m| (0..nb).map(move |b| (m, b))).collect()
}

fn kernel(sink: &mut Sink) -> anyhow::Result<()> {
    let cfg = sink.cfg;
    let spec = unit_spec(cfg, sink.unit);
    match cfg.experiment {
        Experiment::Spectrum => spectrum(sink, &spec),
        Experiment::ImvSweep => imv_sweep(sink, &spec),
        Experiment::Correlation => correlation(sink, &spec),
        Experiment::RenyiScaling => renyi(sink, &spec),
        Experiment::EigenstateScatter => scatter(sink, &spec),
        Experiment::ThermalImv => match cfg.thermal_solver {
            ThermalSolver::Free => imv_sweep(sink, &spec),
            ThermalSolver::Ed => thermal_ed(sink, &spec),
        },
        Experiment::EdInteraction => ed_interaction(sink, &spec),
        Experiment::Adiabatic => adiabatic(sink, &spec),
    }
}

fn flag_name(f: PairFlag) -> &'static str {
    match f {
        PairFlag::Clean => "clean",
        PairFlag::Degenerate => "degenerate",
        PairFlag::NearDefective => "near_defective",
    }
}

fn spectrum(sink: &mut Sink, spec: &ModelSpec) -> anyhow::Result<()> {
    let s = decompose(&build_hamiltonian(spec)?)?;
    let p = (0, 0);
    sink.points += 1;
    for (n, &e) in s.eigenvalues.iter().enumerate() {
        sink.row(p, "eps", Some(n), e).label = flag_name(s.flags[n]).into();
    }
    let im_max = s.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
    sink.real(p, "eps_im_max", None, im_max);
    sink.real(p, "flagged", None, s.flagged().len() as f64);
    sink.real(p, "biorthogonality_residual", None, s.biorthogonality_residual);
    if sink.cfg.dump_spectra {
        sink.spectrum = Some(SpectrumDump { task: sink.unit.task, seed: sink.unit.seed, eigenvalues: s.eigenvalues });
    }
    Ok(())
}

/// Ground-state or free-fermion thermal velocity over the `(mu, beta)` grid.
fn imv_sweep(sink: &mut Sink, spec: &ModelSpec) -> anyhow::Result<()> {
    let cfg = sink.cfg;
    let h = build_hamiltonian(spec)?;
    let s = decompose(&h)?;
    let vn = state_velocities(&s, &velocity_operator(&h))?;
    let kgrid = if spec.is_translation_invariant() && spec.boundary == Boundary::Periodic {
        Some(bloch_grid(spec)?)
    } else {
        None
    };
    for p in points(cfg) {
        let (mu, beta) = (cfg.mu[p.0], cfg.beta[p.1]);
        sink.point(p, |sink| {
            let sea = fermi_sea(&s, mu, beta)?;
            let v = sea_velocity(&s, &sea, &vn)?;
            sink.row(p, "v", None, v);
            sink.row(p, "v_per_site", None, v / spec.cells as f64);
            sink.row(p, "n_particles", None, sea.filling());
            if beta.is_finite() {
                sink.real(p, "w_opt", None, winding_estimate(v.im, beta, spec.cells));
            }
            if let (Some(g), true) = (&kgrid, beta.is_infinite()) {
                sink.row(p, "v_momentum", None, momentum_velocity(g, mu));
            }
            Ok(())
        });
    }
    if cfg.dump_spectra {
        sink.spectrum = Some(SpectrumDump { task: sink.unit.task, seed: sink.unit.seed, eigenvalues: s.eigenvalues });
    }
    Ok(())
}

fn correlation(sink: &mut Sink, spec: &ModelSpec) -> anyhow::Result<()> {
    let cfg = sink.cfg;
    let h = build_hamiltonian(spec)?;
    let s = decompose(&h)?;
    for p in points(cfg) {
        let (mu, beta) = (cfg.mu[p.0], cfg.beta[p.1]);
        sink.point(p, |sink| {
            let c = correlation_matrix(&s, &fermi_sea(&s, mu, beta)?)?.on_lattice(h.orbitals());
            let profile = correlation_profile(&c);
            for (d, &z) in profile.iter().enumerate() {
                sink.row(p, "C", Some(d), z);
            }
            let fit = classify_decay(&profile, spec.cells);
            sink.real(p, "decay_class", None, f64::NAN).label = fit.class.name().into();
            if let Some(f) = fit.power_law {
                sink.real(p, "power_law_slope", None, f.slope);
                sink.real(p, "power_law_rss", None, f.rss);
            }
            if let Some(f) = fit.exponential {
                sink.real(p, "exponential_slope", None, f.slope);
                sink.real(p, "exponential_rss", None, f.rss);
            }
            Ok(())
        });
    }
    Ok(())
}

fn renyi(sink: &mut Sink, spec: &ModelSpec) -> anyhow::Result<()> {
    let cfg = sink.cfg;
    let h = build_hamiltonian(spec)?;
    let s = decompose(&h)?;
    for p in points(cfg) {
        let mu = cfg.mu[p.0];
        sink.point(p, |sink| {
            let sea = fermi_sea(&s, mu, f64::INFINITY)?;
            let c = correlation_matrix(&s, &sea)?.on_lattice(h.orbitals());
            sink.row(p, "s2", None, renyi2_half(&c)?);
            sink.row(p, "n_particles", None, c.particle_number);
            Ok(())
        });
    }
    Ok(())
}

fn scatter(sink: &mut Sink, spec: &ModelSpec) -> anyhow::Result<()> {
    let h = build_hamiltonian(spec)?;
    let s = decompose(&h)?;
    let diag = eigenstate_diagnostics(&s, h.orbitals());
    let p = (0, 0);
    sink.points += 1;
    let l = spec.cells;
    let distance = |a: usize, b: usize| match spec.boundary {
        Boundary::Periodic => ring_distance(a, b, l),
        Boundary::Open => a.abs_diff(b),
    };
    for (n, d) in diag.iter().enumerate() {
        sink.real(p, "ipr_right", Some(n), d.ipr_right);
        sink.real(p, "ipr_left", Some(n), d.ipr_left);
        sink.real(p, "peak_right", Some(n), d.peak_right as f64);
        sink.real(p, "peak_left", Some(n), d.peak_left as f64);
        sink.real(p, "peak_distance", Some(n), distance(d.peak_right, d.peak_left) as f64);
    }
    let col = |f: &dyn Fn(&nhlab_core::observables::StateDiagnostics) -> f64| -> Vec<f64> { diag.iter().map(f).collect() };
    let dist = col(&|d| distance(d.peak_right, d.peak_left) as f64);
    sink.real(p, "peak_distance_median", None, median(&dist).unwrap_or(f64::NAN));
    sink.real(p, "ipr_right_median", None, median(&col(&|d| d.ipr_right)).unwrap_or(f64::NAN));
    sink.real(p, "ipr_left_median", None, median(&col(&|d| d.ipr_left)).unwrap_or(f64::NAN));
    Ok(())
}

fn disorder_of(spec: &ModelSpec) -> anyhow::Result<Option<nhlab_core::DisorderRealization>> {
    Ok(if spec.disorder == DisorderMode::None { None } else { Some(draw_disorder(spec)?) })
}

fn thermal_ed(sink: &mut Sink, spec: &ModelSpec) -> anyhow::Result<()> {
    let cfg = sink.cfg;
    let dis = disorder_of(spec)?;
    let ens = ThermalEnsemble::build(spec, dis.as_ref())?;
    for p in points(cfg) {
        let (mu, beta) = (cfg.mu[p.0], cfg.beta[p.1]);
        sink.point(p, |sink| {
            anyhow::ensure!(beta.is_finite(), "the many-body thermal trace needs a finite beta");
            let v = ens.velocity(beta, mu);
            sink.row(p, "v", None, v);
            sink.row(p, "v_per_site", None, v / spec.cells as f64);
            sink.real(p, "w_opt", None, winding_estimate(v.im, beta, spec.cells));
            sink.real(p, "skipped_levels", None, ens.skipped as f64);
            Ok(())
        });
    }
    Ok(())
}

fn ed_interaction(sink: &mut Sink, spec: &ModelSpec) -> anyhow::Result<()> {
    let n = sink.cfg.ed_particles.unwrap_or(spec.cells / 2);
    let dis = disorder_of(spec)?;
    let sector = FockSector::new(spec.cells, n)?;
    let h = build_sector_hamiltonian(spec, &sector, dis.as_ref())?;
    let v = many_body_velocity(spec, &sector, dis.as_ref())?;
    let gs = ed_ground_state_velocity(&h, &v)?;
    let p = (0, 0);
    sink.points += 1;
    sink.row(p, "v", None, gs.velocity);
    sink.row(p, "e_gs", None, gs.energy);
    sink.real(p, "n_particles", None, n as f64);
    sink.real(p, "gs_overlap", None, gs.overlap);
    for (q, &(e, vq)) in gs.candidates.iter().enumerate() {
        sink.row(p, "v_candidate", Some(q), vq).label = format!("{:?}{:+?}i", e.re, e.im);
    }
    // same occupation in the free theory; equals `v` at U = 0
    let free_spec = spec.clone().with_interaction(0.0);
    let hf = build_hamiltonian(&free_spec)?;
    let s = decompose(&hf)?;
    let vn = state_velocities(&s, &velocity_operator(&hf))?;
    let vf = sea_velocity(&s, &fill_lowest(&s, n)?, &vn)?;
    sink.row(p, "v_free", None, vf);
    Ok(())
}

fn adiabatic(sink: &mut Sink, spec: &ModelSpec) -> anyhow::Result<()> {
    let cfg = sink.cfg;
    let scenario = sink.unit.coordinate.scenario.expect("adiabatic units carry a scenario");
    for p in points(cfg) {
        let mu = cfg.mu[p.0];
        sink.point(p, |sink| {
            let path = ScenarioPath {
                scenario,
                boundary: spec.boundary,
                cells: spec.cells,
                gamma_amplitude: spec.gamma_scale.norm(),
                mu,
                points: cfg.adiabatic_points,
                seed_pair: sink.unit.seed,
            }
            .run()?;
            for (i, &f) in path.fidelities.iter().enumerate() {
                let row = sink.real(p, "fidelity", Some(i), f);
                row.lambda = Some(path.lambda_grid[i]);
                row.label = "right-right".into();
            }
            sink.real(p, "min_fidelity", None, path.min_fidelity).label = "right-right".into();
            sink.real(p, "n_particles", None, path.n_particles as f64);
            sink.real(p, "degenerate_points", None, path.degenerate_points.len() as f64);
            Ok(())
        });
    }
    Ok(())
}
