//! Registered experiments, the sweep driver and the output writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{convergence_orders, l1_error, spike_record, transition_count, ErrorRecord, SpikeRecord};
use crate::error::{Error, Result};
use crate::exact::{
    build_reference_from_states, solve_riemann_grh, Connector, Family, ReferenceSolution, WavePatternHint,
};
use crate::flux::GammaChoice;
use crate::scheme::{run_to, Diagnostics, Preset, SchemeSpec, SimulationState, DEFAULT_CFL};
use crate::state::{check_gravity, ConservedState, Mesh, PrimitiveState, Topography, GRAVITY};

/// Largest mesh of the default sweeps.
pub const DEFAULT_MAX_CELLS: usize = 3200;
/// Largest mesh of the deep (`--deep`) sweeps.
pub const DEEP_MAX_CELLS: usize = 25600;

/// Cells on each side of the step inspected by [`transition_count`].
pub const TRANSITION_WINDOW: usize = 20;
pub const TRANSITION_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReferenceMode {
    Solve,
    /// Printed `(h, Fr)` states with the wave joining each consecutive pair.
    TabulatedStates {
        states: Vec<PrimitiveState>,
        connectors: Vec<Connector>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub summary: String,
    pub domain: (f64, f64),
    pub t_final: f64,
    pub w_l: PrimitiveState,
    pub w_r: PrimitiveState,
    /// Bed height right of the step; the left bed is 0.
    pub b_r: f64,
    /// `γ` used by the plain flux schemes. The reference always uses `sgn([b])`.
    pub gamma: GammaChoice,
    pub pattern: String,
    pub reference_mode: ReferenceMode,
    /// Default sweep, doubling from the first entry up to [`DEFAULT_MAX_CELLS`].
    pub mesh: Vec<usize>,
    pub schemes: Vec<Preset>,
    pub cfl: f64,
    pub g: f64,
}

fn doubling(from: usize, to: usize) -> Vec<usize> {
    std::iter::successors(Some(from), |&n| Some(2 * n)).take_while(|&n| n <= to).collect()
}

fn pw(h: f64, fr: f64) -> PrimitiveState {
    PrimitiveState { h, fr }
}

#[allow(clippy::too_many_arguments)]
fn entry(
    name: &str,
    summary: &str,
    domain: (f64, f64),
    t_final: f64,
    h: (f64, f64),
    fr: (f64, f64),
    b_r: f64,
    pattern: &str,
    gamma: GammaChoice,
    first_n: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        summary: summary.into(),
        domain,
        t_final,
        w_l: pw(h.0, fr.0),
        w_r: pw(h.1, fr.1),
        b_r,
        gamma,
        pattern: pattern.into(),
        reference_mode: ReferenceMode::Solve,
        mesh: doubling(first_n, DEFAULT_MAX_CELLS),
        schemes: vec![Preset::CLxF, Preset::LxF],
        cfl: DEFAULT_CFL,
        g: GRAVITY,
    }
}

/// The ten built-in experiments.
pub fn registry() -> Vec<ExperimentConfig> {
    use GammaChoice::{SignOfJump as Sgn, Zero};
    let mut tests = vec![
        entry("dam-break", "dam break onto a 0.7 step", (-5.0, 5.0), 1.0, (1.0, 0.1), (0.0, 0.0), 0.7, "1R-0-2S", Sgn, 100),
        entry("sub-1s2r", "subcritical, 1-shock and 2-rarefaction", (-5.0, 5.0), 0.7, (0.95, 0.7), (0.55, 0.85), 0.5, "1S-0-2R", Sgn, 100),
        entry("sub-1r2r", "subcritical, two rarefactions", (-5.0, 5.0), 0.5, (1.0, 1.2), (0.3, 0.95), 0.2, "1R-0-2R", Sgn, 100),
        entry("sub-1s2s", "subcritical, two shocks", (-5.0, 5.0), 1.0, (0.7, 0.2), (0.2, 0.2), 0.5, "1S-0-2S", Sgn, 100),
        entry("sub-1s2s-inflow", "supercritical inflow, subcritical at the step", (-1.0, 5.0), 1.0, (0.5, 0.3), (1.5, 0.0), 0.2, "1S-0-2S", Sgn, 100),
        entry("nsup-1s2s", "negative supercritical, two shocks", (-8.0, 2.0), 1.0, (0.5, 0.7), (-1.5, -1.05), 0.2, "1S-2S-0", Sgn, 100),
        entry("nsup-1r2r", "negative supercritical, two rarefactions", (-8.0, 2.0), 1.0, (0.5, 0.7), (-2.0, -1.05), 0.2, "1R-2R-0", Sgn, 100),
        entry("dam-break-gamma0", "dam break with the arithmetic-mean pressure weight", (-5.0, 5.0), 1.0, (1.0, 0.1), (0.0, 0.0), 0.7, "1R-0-2S", Zero, 100),
        entry("tran-1s2s", "transonic, rarefaction attached to the step", (-5.0, 15.0), 0.8, (4.0, 1.0299), (1.1175, 2.2428), 1.0, "1S-0(R)-2S", Sgn, 200),
        entry("tran-1r2r", "transonic, rarefaction attached to the step", (-25.0, 15.0), 0.8, (6.0, 8.0), (-2.0855, 0.0), 1.0, "1R-2R-0(R)", Sgn, 200),
    ];
    tests[8].reference_mode = ReferenceMode::TabulatedStates {
        states: vec![pw(4.0, 1.1175), pw(6.1431, 0.5089), pw(3.9157, 1.0), pw(1.9999, 2.1977), pw(1.0299, 2.2428)],
        connectors: vec![Connector::Shock, Connector::Step, Connector::Rarefaction(Family::One), Connector::Shock],
    };
    tests[9].reference_mode = ReferenceMode::TabulatedStates {
        states: vec![pw(6.0, -2.0855), pw(1.9766, -2.1490), pw(2.5253, -1.6707), pw(3.5556, -1.0), pw(8.0, 0.0)],
        connectors: vec![
            Connector::Rarefaction(Family::One),
            Connector::Rarefaction(Family::Two),
            Connector::Step,
            Connector::Rarefaction(Family::Two),
        ],
    };
    tests
}

pub fn lookup(name: &str) -> Result<ExperimentConfig> {
    registry()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownTest(name.to_string()))
}

/// FNV-1a over the canonical transcription of every registry row.
pub fn registry_checksum(tests: &[ExperimentConfig]) -> u64 {
    let mut text = String::new();
    for c in tests {
        let _ = writeln!(
            text,
            "{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}",
            c.domain.0, c.domain.1, c.t_final, c.w_l.h, c.w_r.h, c.w_l.fr, c.w_r.fr, c.b_r, c.pattern,
            c.gamma.label(), c.mesh[0], c.cfl
        );
        if let ReferenceMode::TabulatedStates { states, .. } = &c.reference_mode {
            for s in states {
                let _ = write!(text, "{},{};", s.h, s.fr);
            }
        }
    }
    text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Pinned value of [`registry_checksum`] for the built-in registry.
pub const REGISTRY_CHECKSUM: u64 = 0x5399_d614_6a1e_9b47;

pub fn verify_registry() -> Result<()> {
    let tests = registry();
    if tests.len() != 10 {
        return Err(Error::Registry(format!("expected 10 tests, found {}", tests.len())));
    }
    for c in &tests {
        c.validate()?;
    }
    let sum = registry_checksum(&tests);
    if sum != REGISTRY_CHECKSUM {
        return Err(Error::Registry(format!(
            "checksum {sum:#018x} does not match the pinned {REGISTRY_CHECKSUM:#018x}"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Registry(format!("{}: T must be positive", self.name)));
        }
        if self.mesh.is_empty() || self.mesh.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(Error::Registry(format!("{}: mesh list must double", self.name)));
        }
        check_gravity(self.g)?;
        Ok(())
    }

    pub fn topography(&self) -> Result<Topography> {
        Topography::step(0.0, self.b_r)
    }

    /// Mesh with `n` cells. Domains that do not put an interface on `x = 0`
    /// are shifted by less than half a cell.
    pub fn mesh_for(&self, n: usize) -> Result<Mesh> {
        Mesh::snapped(self.domain.0, self.domain.1, n)
    }

    /// Default mesh list extended to [`DEEP_MAX_CELLS`] when `deep` is set.
    pub fn sweep_cells(&self, deep: bool) -> Vec<usize> {
        let top = if deep { DEEP_MAX_CELLS } else { DEFAULT_MAX_CELLS };
        doubling(self.mesh[0], top)
    }

    /// Scheme spec for `preset` in this experiment: the plain flux schemes
    /// take the experiment's `γ` (or `gamma_override`).
    pub fn scheme_spec(&self, preset: Preset, gamma_override: Option<GammaChoice>) -> SchemeSpec {
        let spec = preset.spec();
        if preset.gamma_follows_experiment() {
            spec.with_gamma(gamma_override.unwrap_or(self.gamma))
        } else {
            spec
        }
    }

    pub fn reference(&self) -> Result<ReferenceSolution> {
        match &self.reference_mode {
            ReferenceMode::Solve => solve_riemann_grh(
                self.w_l,
                self.w_r,
                0.0,
                self.b_r,
                GammaChoice::SignOfJump,
                self.g,
                WavePatternHint::parse(&self.pattern)?,
            ),
            ReferenceMode::TabulatedStates { states, connectors } => {
                build_reference_from_states(states, connectors, 0.0, self.b_r, GammaChoice::SignOfJump, self.g)
            }
        }
    }

    pub fn initial_state(&self, n: usize) -> Result<SimulationState> {
        SimulationState::riemann(self.mesh_for(n)?, self.w_l, self.w_r, &self.topography()?, self.g)
    }
}

/// Run-time knobs shared by all cells of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub cfl: f64,
    pub gamma: Option<GammaChoice>,
}

impl RunOptions {
    pub fn for_config(config: &ExperimentConfig) -> Self {
        Self {
            cfl: config.cfl,
            gamma: None,
        }
    }
}

/// One finished `(scheme, N)` run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SimulationState,
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scheme: Preset,
    pub spec: SchemeSpec,
    pub n: usize,
    pub error: ErrorRecord,
    pub spike: SpikeRecord,
    pub transitions: Option<usize>,
    pub steps: usize,
    pub wall_time_s: f64,
    pub diagnostics: Diagnostics,
}

pub fn run_experiment(
    config: &ExperimentConfig,
    reference: &ReferenceSolution,
    preset: Preset,
    n: usize,
    opts: RunOptions,
) -> Result<RunOutput> {
    let spec = config.scheme_spec(preset, opts.gamma);
    let start = Instant::now();
    let mut state = config.initial_state(n)?;
    run_to(&mut state, &spec, config.g, opts.cfl, config.t_final)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let (e_h, e_m) = l1_error(&state, reference, config.t_final)?;
    let spike = spike_record(&state, reference, &spec, config.g)?;
    let window = TRANSITION_WINDOW.min(state.mesh.n_left()).min(n - state.mesh.n_left());
    let transitions = transition_count(&state, window, TRANSITION_TOL).ok();
    let record = RunRecord {
        scheme: preset,
        spec,
        n,
        error: ErrorRecord::new(n, e_h, e_m),
        spike,
        transitions,
        steps: state.steps,
        wall_time_s,
        diagnostics: state.diagnostics,
    };
    Ok(RunOutput { state, record })
}

/// Every record of a sweep, grouped by scheme in request order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub test: String,
    pub cfl: f64,
    pub g: f64,
    pub gamma: Option<GammaChoice>,
    pub schemes: Vec<Preset>,
    pub cells: Vec<usize>,
    pub records: Vec<RunRecord>,
}

impl RunReport {
    pub fn records_for(&self, scheme: Preset) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.scheme == scheme)
    }

    pub fn errors_for(&self, scheme: Preset) -> Vec<ErrorRecord> {
        self.records_for(scheme).map(|r| r.error).collect()
    }

    pub fn get(&self, scheme: Preset, n: usize) -> Option<&RunRecord> {
        self.records.iter().find(|r| r.scheme == scheme && r.n == n)
    }
}

/// Runs every `(scheme, N)` pair, concurrently on `jobs` threads
/// (all cores when `None`), then fills in convergence orders.
pub fn sweep(
    config: &ExperimentConfig,
    schemes: &[Preset],
    cells: &[usize],
    opts: RunOptions,
    jobs: Option<usize>,
) -> Result<RunReport> {
    if cells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("cell counts must increase".into()));
    }
    let reference = config.reference()?;
    let grid: Vec<(Preset, usize)> = schemes.iter().flat_map(|&s| cells.iter().map(move |&n| (s, n))).collect();
    let work = || -> Result<Vec<RunRecord>> {
        grid.par_iter()
            .map(|&(s, n)| run_experiment(config, &reference, s, n, opts).map(|o| o.record))
            .collect()
    };
    let mut records = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    if cells.windows(2).all(|w| w[1] == 2 * w[0]) {
        for chunk in records.chunks_mut(cells.len()) {
            let mut errs: Vec<ErrorRecord> = chunk.iter().map(|r| r.error).collect();
            convergence_orders(&mut errs)?;
            for (r, e) in chunk.iter_mut().zip(errs) {
                r.error = e;
            }
        }
    }
    Ok(RunReport {
        test: config.name.clone(),
        cfl: opts.cfl,
        g: config.g,
        gamma: opts.gamma,
        schemes: schemes.to_vec(),
        cells: cells.to_vec(),
        records,
    })
}

impl RunReport {
    /// Pretty JSON copy of the report, wall times included.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// `1.42e-01` style, as printed in error tables.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.2e}");
    let (mant, exp) = s.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn provenance(config: &ExperimentConfig, cfl: f64, gamma: Option<GammaChoice>) -> String {
    format!(
        "# test={} T={} cfl={} g={} gamma={}\n",
        config.name,
        config.t_final,
        cfl,
        config.g,
        gamma.unwrap_or(config.gamma).label()
    )
}

/// Comma-separated error table: `N` then `e_h, order, e_m, order` per scheme.
pub fn format_table(config: &ExperimentConfig, report: &RunReport) -> String {
    let mut out = provenance(config, report.cfl, report.gamma);
    let mut header = vec!["N".to_string()];
    for s in &report.schemes {
        let l = s.label();
        header.extend([format!("{l} e_h"), "order".into(), format!("{l} e_m"), "order".into()]);
    }
    out.push_str(&header.join(","));
    out.push('\n');
    let order = |o: Option<f64>| o.map(|v| format!("{v:.2}")).unwrap_or_default();
    for &n in &report.cells {
        let mut row = vec![n.to_string()];
        for &s in &report.schemes {
            match report.get(s, n) {
                Some(r) => row.extend([sci(r.error.e_h), order(r.error.order_h), sci(r.error.e_m), order(r.error.order_m)]),
                None => row.extend(std::iter::repeat(String::new()).take(4)),
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Comma-separated spike table, one row per `(scheme, N)`.
pub fn format_spike_table(config: &ExperimentConfig, report: &RunReport) -> String {
    let mut out = provenance(config, report.cfl, report.gamma);
    out.push_str("scheme,N,m_peak_avg,m_foot,alpha1_star,bracket_jump,predicted,residual,m_plateau,plateau_residual\n");
    for r in &report.records {
        let s = &r.spike;
        let _ = writeln!(
            out,
            "{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            r.scheme.label(),
            r.n,
            s.m_peak_avg,
            s.m_foot,
            s.alpha1_star,
            s.bracket_jump,
            s.predicted,
            s.residual,
            s.m_plateau,
            s.plateau_residual
        );
    }
    out
}

/// Whitespace-columnar profile `x h m b h_exact m_exact`, one row per cell.
pub fn format_profile(
    config: &ExperimentConfig,
    preset: Preset,
    spec: &SchemeSpec,
    cfl: f64,
    state: &SimulationState,
    reference: &ReferenceSolution,
) -> String {
    let mut out = format!(
        "# test={} scheme={} N={} T={} cfl={} g={} gamma={}\n# x h m b h_exact m_exact\n",
        config.name,
        preset.name(),
        state.mesh.n_cells(),
        state.time,
        cfl,
        config.g,
        spec.gamma.label()
    );
    for (i, u) in state.cells.iter().enumerate() {
        let x = state.mesh.center(i);
        let r = reference.evaluate(x, state.time);
        let _ = writeln!(
            out,
            "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            x, u.h, u.m, state.bed[i], r.h, r.m
        );
    }
    out
}

/// Sampled reference profile `x h m b` at `t`.
pub fn format_exact_profile(config: &ExperimentConfig, reference: &ReferenceSolution, samples: usize) -> Result<String> {
    if samples < 2 {
        return Err(Error::Config("need at least 2 samples".into()));
    }
    let (lo, hi) = config.domain;
    let topo = config.topography()?;
    let mut out = format!(
        "# test={} T={} g={} samples={}\n# x h m b\n",
        config.name, config.t_final, config.g, samples
    );
    for k in 0..samples {
        let x = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let u = reference.evaluate(x, config.t_final);
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e} {:.17e}", x, u.h, u.m, topo.eval(x));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub x: f64,
    pub h: f64,
    pub m: f64,
    pub b: f64,
    pub h_exact: f64,
    pub m_exact: f64,
}

pub fn parse_profile(text: &str) -> Result<Vec<ProfileRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Io(format!("line {}: {e}", lineno + 1)))?;
        let [x, h, m, b, h_exact, m_exact] = vals[..] else {
            return Err(Error::Io(format!("line {}: expected 6 columns, got {}", lineno + 1, vals.len())));
        };
        rows.push(ProfileRow { x, h, m, b, h_exact, m_exact });
    }
    Ok(rows)
}

/// L¹ errors recomputed from a written profile on a uniform mesh.
pub fn rescore_profile(rows: &[ProfileRow]) -> Result<(f64, f64)> {
    if rows.len() < 2 {
        return Err(Error::Io("profile has fewer than 2 rows".into()));
    }
    let dx = rows[1].x - rows[0].x;
    let (e_h, e_m) = rows.iter().fold((0.0, 0.0), |(a, b), r| {
        (a + (r.h - r.h_exact).abs(), b + (r.m - r.m_exact).abs())
    });
    Ok((e_h * dx, e_m * dx))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Settings read from a `key = value` file. Unset keys stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub test: Option<String>,
    pub schemes: Option<Vec<Preset>>,
    pub cells: Option<Vec<usize>>,
    pub cfl: Option<f64>,
    pub gamma: Option<GammaChoice>,
    pub out: Option<String>,
    pub jobs: Option<usize>,
    pub deep: Option<bool>,
    pub samples: Option<usize>,
    pub steps: Option<usize>,
}

pub fn parse_config_file(text: &str) -> Result<FileConfig> {
    let mut cfg = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Config(format!("line {}: {what}: `{raw}`", lineno + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let list = |v: &str| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect::<Vec<_>>();
        match key {
            "test" => cfg.test = Some(value.to_string()),
            "scheme" | "schemes" => {
                cfg.schemes = Some(list(value).iter().map(|s| Preset::parse(s)).collect::<Result<_>>()?)
            }
            "cells" => {
                cfg.cells = Some(
                    list(value)
                        .iter()
                        .map(|s| s.parse().map_err(|_| bad("bad cell count")))
                        .collect::<Result<_>>()?,
                )
            }
            "cfl" => cfg.cfl = Some(value.parse().map_err(|_| bad("bad number"))?),
            "gamma" => cfg.gamma = Some(GammaChoice::parse(value)?),
            "out" => cfg.out = Some(value.to_string()),
            "jobs" => cfg.jobs = Some(value.parse().map_err(|_| bad("bad job count"))?),
            "deep" => cfg.deep = Some(value.parse().map_err(|_| bad("expected true or false"))?),
            "samples" => cfg.samples = Some(value.parse().map_err(|_| bad("bad sample count"))?),
            "steps" => cfg.steps = Some(value.parse().map_err(|_| bad("bad step count"))?),
            _ => return Err(bad("unknown key")),
        }
    }
    Ok(cfg)
}

/// Left-to-right state chain of the reference, one line per state.
pub fn format_chain(reference: &ReferenceSolution) -> String {
    let g = reference.g;
    let line = |u: ConservedState| {
        format!(
            "h = {:.4}  m = {:.4}  Fr = {:.4}",
            u.h,
            u.m,
            u.m / (u.h * (g * u.h).sqrt())
        )
    };
    let mut out = line(reference.left);
    for (w, r) in reference.waves.iter().zip(reference.connector_residuals()) {
        let (lo, hi) = w.span();
        let kind = match w.kind {
            crate::exact::WaveKind::Shock { speed } => format!("shock, speed {speed:.4}"),
            crate::exact::WaveKind::Rarefaction { family, .. } => {
                format!("{}-rarefaction, speeds [{lo:.4}, {hi:.4}]", family.index())
            }
            crate::exact::WaveKind::StepWave => "0-wave".into(),
        };
        let _ = write!(out, "\n  --[{kind}; residual {r:.2e}]-->\n{}", line(w.right));
    }
    out
}
