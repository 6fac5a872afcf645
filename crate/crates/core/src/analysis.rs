//! Error norms, convergence orders and the step diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ReferenceSolution;
use crate::flux::lxf_alpha;
use crate::scheme::{cfl_dt, SchemeSpec, SimulationState, Stepper, DEFAULT_CFL};
use crate::state::{ConservedState, Mesh, Topography};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub n: usize,
    pub e_h: f64,
    pub e_m: f64,
    pub order_h: Option<f64>,
    pub order_m: Option<f64>,
}

impl ErrorRecord {
    pub fn new(n: usize, e_h: f64, e_m: f64) -> Self {
        Self {
            n,
            e_h,
            e_m,
            order_h: None,
            order_m: None,
        }
    }
}

fn check_time(state: &SimulationState, t: f64) -> Result<()> {
    if (state.time - t).abs() > 1e-12 * t.abs().max(1.0) {
        return Err(Error::TimeMismatch {
            numerical: state.time,
            reference: t,
        });
    }
    Ok(())
}

/// `Σ_j |U_j - U_ref(x_j, t)| Δx` per component, with the reference sampled
/// at cell centers.
pub fn l1_error(numerical: &SimulationState, reference: &ReferenceSolution, t: f64) -> Result<(f64, f64)> {
    check_time(numerical, t)?;
    let mesh = &numerical.mesh;
    let (mut e_h, mut e_m) = (0.0, 0.0);
    for (i, u) in numerical.cells.iter().enumerate() {
        let r = reference.evaluate(mesh.center(i), t);
        e_h += (u.h - r.h).abs();
        e_m += (u.m - r.m).abs();
    }
    Ok((e_h * mesh.dx(), e_m * mesh.dx()))
}

/// Fills `order = log2(e_prev / e_curr)`; the first record keeps `None`.
pub fn convergence_orders(records: &mut [ErrorRecord]) -> Result<()> {
    for i in 1..records.len() {
        let (prev, cur) = (records[i - 1], records[i]);
        if cur.n != 2 * prev.n {
            return Err(Error::Config(format!(
                "convergence orders need doubling meshes, got N = {} after {}",
                cur.n, prev.n
            )));
        }
        records[i].order_h = Some((prev.e_h / cur.e_h).log2());
        records[i].order_m = Some((prev.e_m / cur.e_m).log2());
    }
    if let Some(first) = records.first_mut() {
        first.order_h = None;
        first.order_m = None;
    }
    Ok(())
}

/// Measured against predicted averaged spike height at the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeRecord {
    pub n: usize,
    /// `½(m₀ + m₁)` over the two cells touching the step.
    pub m_peak_avg: f64,
    /// Exact momentum at `x = 0⁻`.
    pub m_foot: f64,
    /// Momentum plateau of the numerical solution next to the spike (mean
    /// of the median momentum on each side).
    pub m_plateau: f64,
    pub alpha1_star: f64,
    /// `[h]` across the step cells, or `[h + b]` for well-balanced schemes.
    pub bracket_jump: f64,
    pub predicted: f64,
    /// `(m_peak_avg - m_foot) - predicted`.
    pub residual: f64,
    /// `(m_peak_avg - m_plateau) - predicted`.
    pub plateau_residual: f64,
}

/// Width, in cells, of the band on each side used for the momentum plateau.
const PLATEAU_CELLS: (usize, usize) = (8, 24);

pub fn spike_record(
    numerical: &SimulationState,
    reference: &ReferenceSolution,
    spec: &SchemeSpec,
    g: f64,
) -> Result<SpikeRecord> {
    let mesh = &numerical.mesh;
    let (i0, i1) = (mesh.n_left() - 1, mesh.n_left());
    let (u0, u1) = (numerical.cells[i0], numerical.cells[i1]);
    let (b0, b1) = (numerical.bed[i0], numerical.bed[i1]);
    let alpha1_star = if spec.central_mass_at_step {
        0.0
    } else {
        lxf_alpha(u0, u1, g)?
    };
    let bracket_jump = if spec.is_well_balanced() {
        (u1.h + b1) - (u0.h + b0)
    } else {
        u1.h - u0.h
    };
    let m_peak_avg = 0.5 * (u0.m + u1.m);
    let m_foot = reference.evaluate(-f64::MIN_POSITIVE, numerical.time).m;
    let m_plateau = momentum_plateau(numerical);
    let predicted = 0.5 * alpha1_star * bracket_jump;
    Ok(SpikeRecord {
        n: mesh.n_cells(),
        m_peak_avg,
        m_foot,
        m_plateau,
        alpha1_star,
        bracket_jump,
        predicted,
        residual: (m_peak_avg - m_foot) - predicted,
        plateau_residual: (m_peak_avg - m_plateau) - predicted,
    })
}

fn momentum_plateau(state: &SimulationState) -> f64 {
    let nl = state.mesh.n_left();
    let n = state.cells.len();
    let (near, far) = PLATEAU_CELLS;
    let left: Vec<f64> = (nl.saturating_sub(far)..nl.saturating_sub(near))
        .map(|i| state.cells[i].m)
        .collect();
    let right: Vec<f64> = ((nl + near).min(n)..(nl + far).min(n)).map(|i| state.cells[i].m).collect();
    match (median(left), median(right)) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => f64::NAN,
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { 0.5 * (v[k - 1] + v[k]) })
}

/// Cells within `window` of the step whose height sits more than `tol`
/// away from its side's plateau. Plateaus are medians over the outer half
/// of the window on each side.
pub fn transition_count(numerical: &SimulationState, window: usize, tol: f64) -> Result<usize> {
    let mesh = &numerical.mesh;
    let (nl, n) = (mesh.n_left(), mesh.n_cells());
    if window < 3 {
        return Err(Error::Config(format!("plateau window must be at least 3 cells, got {window}")));
    }
    if window > nl || window > n - nl {
        return Err(Error::Config(format!(
            "plateau window of {window} cells exceeds the mesh ({nl} cells left, {} right of the step)",
            n - nl
        )));
    }
    let h = |i: usize| numerical.cells[i].h;
    let half = window / 2;
    let left = median((nl - window..nl - half).map(h).collect()).unwrap();
    let right = median((nl + half..nl + window).map(h).collect()).unwrap();
    let count = (nl - window..nl).filter(|&i| (h(i) - left).abs() > tol).count()
        + (nl..nl + window).filter(|&i| (h(i) - right).abs() > tol).count();
    Ok(count)
}

/// Domain used by [`well_balance_residual`].
pub const LAKE_DOMAIN: (f64, f64) = (-5.0, 5.0);

/// Runs `steps` CFL steps from the lake at rest `h + b = level`, `m = 0`
/// and returns the largest `|m|`.
pub fn well_balance_residual(
    spec: &SchemeSpec,
    topo: &Topography,
    level: f64,
    g: f64,
    n: usize,
    steps: usize,
) -> Result<f64> {
    let mesh = Mesh::new(LAKE_DOMAIN.0, LAKE_DOMAIN.1, n)?;
    let mut state = SimulationState::from_fn(mesh, topo, |x| ConservedState {
        h: level - topo.eval(x),
        m: 0.0,
    })?;
    let mut stepper = Stepper::new();
    for _ in 0..steps {
        let dt = cfl_dt(&state, g, DEFAULT_CFL)?;
        stepper.step(&mut state, spec, g, dt)?;
    }
    Ok(state.cells.iter().map(|c| c.m.abs()).fold(0.0, f64::max))
}
