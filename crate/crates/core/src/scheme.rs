//! The unified explicit update
//!
//! ```text
//! U_j^{n+1} = U_j^n - λ (F̂_{j+½} - F̂_{j-½}) + λ (Ŝ_{j+½} + Ŝ_{j-½}) + λ (M̂_{j+½} - M̂_{j-½}),   λ = Δt/Δx
//! ```
//!
//! driven by a [`SchemeSpec`], plus time-step control and the run loop.
//! Boundaries are transmissive (zero-order extrapolation).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{
    hllc_flux_unchecked, interface_source_unchecked, lxf_alpha_unchecked, lxf_flux_unchecked,
    m_hat, n_hat_unchecked, GammaChoice, InterfaceTerms, NhatVariant, Pair, ViscosityMatrix,
};
use crate::state::{check_gravity, ConservedState, Mesh, PrimitiveState, Topography};

/// CFL number used by every registered experiment.
pub const DEFAULT_CFL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FluxFamily {
    LxF,
    Hllc,
}

/// Full description of one scheme variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub flux_family: FluxFamily,
    pub gamma: GammaChoice,
    pub nhat: NhatVariant,
    /// α₁ ← 0 at the step interface.
    pub central_mass_at_step: bool,
    /// α₁ = α₂ ← 0 at the step interface.
    pub central_both_at_step: bool,
    /// M̂ ← 0 at the step interface.
    pub zero_mhat_at_step: bool,
}

/// Named scheme variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preset {
    LxF,
    WbLxF,
    Hr,
    Xs,
    CLxF,
    Hllc,
    /// Central flux in both equations at the step.
    CLxFBoth,
    /// wbLxF with α₁ = 0 at the step.
    CWbLxF,
    /// HR with α₁ = 0 and M̂ = 0 at the step.
    CHr,
    /// XS with α₁ = 0 and M̂ = 0 at the step.
    CXs,
}

impl Preset {
    pub const ALL: [Preset; 10] = [
        Preset::LxF,
        Preset::WbLxF,
        Preset::Hr,
        Preset::Xs,
        Preset::CLxF,
        Preset::Hllc,
        Preset::CLxFBoth,
        Preset::CWbLxF,
        Preset::CHr,
        Preset::CXs,
    ];

    pub fn spec(self) -> SchemeSpec {
        let lxf = SchemeSpec {
            flux_family: FluxFamily::LxF,
            gamma: GammaChoice::SignOfJump,
            nhat: NhatVariant::None,
            central_mass_at_step: false,
            central_both_at_step: false,
            zero_mhat_at_step: false,
        };
        let central = SchemeSpec {
            central_mass_at_step: true,
            ..lxf
        };
        match self {
            Preset::LxF => lxf,
            Preset::WbLxF => SchemeSpec {
                nhat: NhatVariant::WbLxF,
                ..lxf
            },
            Preset::Hr => SchemeSpec {
                nhat: NhatVariant::HydrostaticReconstruction,
                ..lxf
            },
            Preset::Xs => SchemeSpec {
                gamma: GammaChoice::Zero,
                nhat: NhatVariant::XingShu,
                ..lxf
            },
            Preset::CLxF => central,
            Preset::Hllc => SchemeSpec {
                flux_family: FluxFamily::Hllc,
                ..lxf
            },
            Preset::CLxFBoth => SchemeSpec {
                central_both_at_step: true,
                ..central
            },
            Preset::CWbLxF => SchemeSpec {
                nhat: NhatVariant::WbLxF,
                ..central
            },
            Preset::CHr => SchemeSpec {
                nhat: NhatVariant::HydrostaticReconstruction,
                zero_mhat_at_step: true,
                ..central
            },
            Preset::CXs => SchemeSpec {
                gamma: GammaChoice::Zero,
                nhat: NhatVariant::XingShu,
                zero_mhat_at_step: true,
                ..central
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::LxF => "lxf",
            Preset::WbLxF => "wblxf",
            Preset::Hr => "hr",
            Preset::Xs => "xs",
            Preset::CLxF => "clxf",
            Preset::Hllc => "hllc",
            Preset::CLxFBoth => "clxf-both",
            Preset::CWbLxF => "cwblxf",
            Preset::CHr => "chr",
            Preset::CXs => "cxs",
        }
    }

    /// Display label used in table headers.
    pub fn label(self) -> &'static str {
        match self {
            Preset::LxF => "LxF",
            Preset::WbLxF => "wbLxF",
            Preset::Hr => "HR",
            Preset::Xs => "XS",
            Preset::CLxF => "cLxF",
            Preset::Hllc => "HLLC",
            Preset::CLxFBoth => "cLxF-both",
            Preset::CWbLxF => "cwbLxF",
            Preset::CHr => "cHR",
            Preset::CXs => "cXS",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }

    /// Whether the preset's `γ` follows the experiment (plain flux schemes)
    /// rather than being fixed by a well-balanced reformulation.
    pub fn gamma_follows_experiment(self) -> bool {
        self.spec().nhat == NhatVariant::None
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl SchemeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.central_both_at_step && !self.central_mass_at_step {
            return Err(Error::Config(
                "central_both_at_step requires central_mass_at_step".into(),
            ));
        }
        if self.flux_family == FluxFamily::Hllc
            && (self.central_mass_at_step || self.zero_mhat_at_step || self.nhat != NhatVariant::None)
        {
            return Err(Error::Config(
                "the HLLC family has no viscosity matrix to modify at the step".into(),
            ));
        }
        Ok(())
    }

    pub fn with_gamma(self, gamma: GammaChoice) -> Self {
        Self { gamma, ..self }
    }

    /// Whether the spike law uses `[h + b]` (well-balanced variants) or `[h]`.
    pub fn is_well_balanced(&self) -> bool {
        self.nhat != NhatVariant::None
    }
}

/// Counters collected while a run advances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_h: f64,
    pub max_alpha: f64,
    pub hllc_fallbacks: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            min_h: f64::INFINITY,
            max_alpha: 0.0,
            hllc_fallbacks: 0,
        }
    }
}

/// Cell averages on a mesh at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationState {
    pub mesh: Mesh,
    pub cells: Vec<ConservedState>,
    /// Bed elevation sampled at cell centers.
    pub bed: Vec<f64>,
    pub time: f64,
    pub steps: usize,
    pub diagnostics: Diagnostics,
}

impl SimulationState {
    pub fn new(mesh: Mesh, cells: Vec<ConservedState>, topo: &Topography) -> Result<Self> {
        if cells.len() != mesh.n_cells() {
            return Err(Error::Config(format!(
                "{} cell states for a mesh of {} cells",
                cells.len(),
                mesh.n_cells()
            )));
        }
        for c in &cells {
            ConservedState::new(c.h, c.m)?;
        }
        let bed = mesh.centers().map(|x| topo.eval(x)).collect();
        let mut diagnostics = Diagnostics::default();
        diagnostics.min_h = cells.iter().map(|c| c.h).fold(f64::INFINITY, f64::min);
        Ok(Self {
            mesh,
            cells,
            bed,
            time: 0.0,
            steps: 0,
            diagnostics,
        })
    }

    /// Riemann data `W_L` for `x < 0`, `W_R` for `x >= 0`.
    pub fn riemann(
        mesh: Mesh,
        w_l: PrimitiveState,
        w_r: PrimitiveState,
        topo: &Topography,
        g: f64,
    ) -> Result<Self> {
        let ul = ConservedState::from_primitive(w_l, g)?;
        let ur = ConservedState::from_primitive(w_r, g)?;
        let cells = mesh.centers().map(|x| if x < 0.0 { ul } else { ur }).collect();
        Self::new(mesh, cells, topo)
    }

    pub fn from_fn<F>(mesh: Mesh, topo: &Topography, f: F) -> Result<Self>
    where
        F: Fn(f64) -> ConservedState,
    {
        let cells = mesh.centers().map(f).collect();
        Self::new(mesh, cells, topo)
    }

    /// `Σ h_j Δx`.
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.h).sum::<f64>() * self.mesh.dx()
    }

    #[inline]
    fn neighbours(&self, i: usize) -> (ConservedState, ConservedState, f64, f64) {
        let n = self.cells.len();
        let l = if i == 0 { 0 } else { i - 1 };
        let r = if i == n { n - 1 } else { i };
        (self.cells[l], self.cells[r], self.bed[l], self.bed[r])
    }
}

/// Global-maximum CFL step `cfl Δx / max α`.
pub fn cfl_dt(state: &SimulationState, g: f64, cfl: f64) -> Result<f64> {
    check_gravity(g)?;
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::Config(format!("CFL number must lie in (0, 1], got {cfl}")));
    }
    let alpha = max_speed(state, g);
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::NonFiniteSpeed { step: state.steps });
    }
    Ok(cfl * state.mesh.dx() / alpha)
}

// The maximum of lxf_alpha over all interfaces (ghosts included) is the
// maximum cell speed.
fn max_speed(state: &SimulationState, g: f64) -> f64 {
    state
        .cells
        .iter()
        .map(|c| c.char_speed_unchecked(g))
        .fold(0.0, |a: f64, s| if s.is_nan() || a.is_nan() { f64::NAN } else { a.max(s) })
}

/// Per-interface terms for the current state, `n_cells + 1` entries.
pub fn interface_terms(state: &SimulationState, spec: &SchemeSpec, g: f64) -> Result<Vec<InterfaceTerms>> {
    spec.validate()?;
    check_gravity(g)?;
    let mut out = Vec::with_capacity(state.cells.len() + 1);
    let mut fallbacks = 0;
    fill_interface_terms(state, spec, g, &mut out, &mut fallbacks)?;
    Ok(out)
}

fn fill_interface_terms(
    state: &SimulationState,
    spec: &SchemeSpec,
    g: f64,
    out: &mut Vec<InterfaceTerms>,
    fallbacks: &mut usize,
) -> Result<()> {
    out.clear();
    let step = state.mesh.step_interface();
    for i in 0..=state.cells.len() {
        let (ul, ur, b_l, b_r) = state.neighbours(i);
        let at_step = i == step;
        let (f_hat, alpha1) = match spec.flux_family {
            FluxFamily::LxF => {
                let alpha = lxf_alpha_unchecked(ul, ur, g);
                let a = ViscosityMatrix {
                    alpha1: if at_step && spec.central_mass_at_step { 0.0 } else { alpha },
                    alpha2: if at_step && spec.central_both_at_step { 0.0 } else { alpha },
                };
                (lxf_flux_unchecked(ul, ur, a, g), a.alpha1)
            }
            FluxFamily::Hllc => {
                let f = hllc_flux_unchecked(ul, ur, g);
                if f.fell_back {
                    *fallbacks += 1;
                }
                (f.flux, 0.0)
            }
        };
        let s_hat = interface_source_unchecked(ul.h, ur.h, b_l, b_r, spec.gamma, g);
        let m_hat = if (at_step && spec.zero_mhat_at_step) || spec.nhat == NhatVariant::None || b_l == b_r {
            Pair::ZERO
        } else {
            let n = n_hat_unchecked(spec.nhat, ul, ur, b_l, b_r, alpha1, g).map_err(|e| match e {
                Error::DriedCell { height, .. } => Error::DriedCell { interface: i, height },
                other => other,
            })?;
            m_hat(n, b_l, b_r)
        };
        out.push(InterfaceTerms { f_hat, s_hat, m_hat });
    }
    Ok(())
}

/// Reusable scratch space for [`Stepper::step`].
#[derive(Debug, Default)]
pub struct Stepper {
    terms: Vec<InterfaceTerms>,
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances `state` by `dt` with the unified update.
    pub fn step(&mut self, state: &mut SimulationState, spec: &SchemeSpec, g: f64, dt: f64) -> Result<()> {
        spec.validate()?;
        check_gravity(g)?;
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::Config(format!("time step must be finite and nonnegative, got {dt}")));
        }
        let mut fallbacks = 0;
        fill_interface_terms(state, spec, g, &mut self.terms, &mut fallbacks)?;
        let lambda = dt / state.mesh.dx();
        let terms = &self.terms;
        let step_index = state.steps + 1;
        let mut min_h = f64::INFINITY;
        for (j, cell) in state.cells.iter_mut().enumerate() {
            let (left, right) = (&terms[j], &terms[j + 1]);
            let rhs = (right.s_hat + left.s_hat) - (right.f_hat - left.f_hat) + (right.m_hat - left.m_hat);
            let h = cell.h + lambda * rhs.mass;
            let m = cell.m + lambda * rhs.momentum;
            if !(h > 0.0 && h.is_finite() && m.is_finite()) {
                return Err(Error::PositivityLost {
                    cell: j,
                    step: step_index,
                    height: h,
                });
            }
            *cell = ConservedState { h, m };
            min_h = min_h.min(h);
        }
        finish_step(state, dt, min_h, fallbacks, g);
        Ok(())
    }
}

fn finish_step(state: &mut SimulationState, dt: f64, min_h: f64, fallbacks: usize, g: f64) {
    state.time += dt;
    state.steps += 1;
    let speed = max_speed(state, g);
    let d = &mut state.diagnostics;
    d.min_h = d.min_h.min(min_h);
    d.hllc_fallbacks += fallbacks;
    d.max_alpha = d.max_alpha.max(speed);
}

/// One step of the unified update (allocates scratch; see [`Stepper`]).
pub fn step(state: &mut SimulationState, spec: &SchemeSpec, g: f64, dt: f64) -> Result<()> {
    Stepper::new().step(state, spec, g, dt)
}

/// Repeats CFL-limited steps until `t_final`, clipping the last step so the
/// run ends exactly at `t_final`.
pub fn run_to(state: &mut SimulationState, spec: &SchemeSpec, g: f64, cfl: f64, t_final: f64) -> Result<()> {
    spec.validate()?;
    if !(t_final.is_finite() && t_final >= state.time) {
        return Err(Error::Config(format!(
            "final time {t_final} must be finite and not before t = {}",
            state.time
        )));
    }
    let mut stepper = Stepper::new();
    while state.time < t_final {
        let dt = cfl_dt(state, g, cfl)?;
        if state.time + dt >= t_final {
            let dt = t_final - state.time;
            stepper.step(state, spec, g, dt)?;
            state.time = t_final;
        } else {
            stepper.step(state, spec, g, dt)?;
        }
    }
    Ok(())
}

/// The schemes in their original, non-unified form.
///
/// They share the viscosity `α(U_j, U_{j+1})` of the original interface
/// states with the unified form so the two can be compared cell by cell.
pub mod original {
    use super::*;

    /// First-order hydrostatic reconstruction step.
    pub fn step_hydrostatic_reconstruction(state: &mut SimulationState, g: f64, dt: f64) -> Result<()> {
        check_gravity(g)?;
        let n = state.cells.len();
        // (flux seen by the left cell, flux seen by the right cell)
        let mut fluxes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let (ul, ur, b_l, b_r) = state.neighbours(i);
            let top = b_l.max(b_r);
            let hs_l = ul.h + b_l - top;
            let hs_r = ur.h + b_r - top;
            if !(hs_l > 0.0 && hs_r > 0.0) {
                return Err(Error::DriedCell {
                    interface: i,
                    height: hs_l.min(hs_r),
                });
            }
            let alpha = lxf_alpha_unchecked(ul, ur, g);
            let a = ViscosityMatrix { alpha1: alpha, alpha2: alpha };
            let star = lxf_flux_unchecked(
                ConservedState { h: hs_l, m: ul.m },
                ConservedState { h: hs_r, m: ur.m },
                a,
                g,
            );
            let minus = star + Pair::new(0.0, 0.5 * g * ul.h * ul.h - 0.5 * g * hs_l * hs_l);
            let plus = star + Pair::new(0.0, 0.5 * g * ur.h * ur.h - 0.5 * g * hs_r * hs_r);
            fluxes.push((minus, plus));
        }
        let lambda = dt / state.mesh.dx();
        let mut min_h = f64::INFINITY;
        for (j, cell) in state.cells.iter_mut().enumerate() {
            let d = fluxes[j + 1].0 - fluxes[j].1;
            let h = cell.h - lambda * d.mass;
            let m = cell.m - lambda * d.momentum;
            if !(h > 0.0 && h.is_finite() && m.is_finite()) {
                return Err(Error::PositivityLost { cell: j, step: state.steps + 1, height: h });
            }
            *cell = ConservedState { h, m };
            min_h = min_h.min(h);
        }
        finish_step(state, dt, min_h, 0, g);
        Ok(())
    }

    /// First-order flux and source modification step.
    pub fn step_xing_shu(state: &mut SimulationState, g: f64, dt: f64) -> Result<()> {
        check_gravity(g)?;
        let n = state.cells.len();
        // (F̂^b, {b}, {b²}) per interface
        let mut faces = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let (ul, ur, b_l, b_r) = state.neighbours(i);
            let alpha = lxf_alpha_unchecked(ul, ur, g);
            let a = ViscosityMatrix { alpha1: alpha, alpha2: alpha };
            let flux = lxf_flux_unchecked(ul, ur, a, g) - Pair::new(0.5 * alpha * (b_r - b_l), 0.0);
            faces.push((flux, 0.5 * (b_l + b_r), 0.5 * (b_l * b_l + b_r * b_r)));
        }
        let lambda = dt / state.mesh.dx();
        let mut min_h = f64::INFINITY;
        for (j, cell) in state.cells.iter_mut().enumerate() {
            let (left, right) = (&faces[j], &faces[j + 1]);
            let b = state.bed[j];
            let source = 0.5 * g * (right.2 - left.2) - g * (cell.h + b) * (right.1 - left.1);
            let d = right.0 - left.0;
            let h = cell.h - lambda * d.mass;
            let m = cell.m - lambda * d.momentum + lambda * source;
            if !(h > 0.0 && h.is_finite() && m.is_finite()) {
                return Err(Error::PositivityLost { cell: j, step: state.steps + 1, height: h });
            }
            *cell = ConservedState { h, m };
            min_h = min_h.min(h);
        }
        finish_step(state, dt, min_h, 0, g);
        Ok(())
    }
}
