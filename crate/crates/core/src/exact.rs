//! Exact self-similar Riemann solutions over a bottom step.
//!
//! The stationary wave at the step obeys the generalized Rankine-Hugoniot
//! closure `[m] = 0`, `[m²/h + g h²/2] = -g ȟ_γ [b]`. Subcritical problems
//! (one nonlinear wave on each side of the step) and negative supercritical
//! problems (both nonlinear waves left of the step) are solved directly.
//! Transonic problems are refused; their solutions can be assembled from
//! known intermediate states with [`build_reference_from_states`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{check_h_gamma_unchecked, GammaChoice};
use crate::state::{check_gravity, ConservedState, PrimitiveState};

/// Residual target for solver-produced connectors.
pub const SOLVER_TOL: f64 = 1e-10;
/// Fan invariant tolerance for tabulated (4-decimal) states.
pub const TABULATED_FAN_TOL: f64 = 1e-3;
/// Absolute step-wave momentum residual tolerance for tabulated states.
pub const TABULATED_STEP_TOL: f64 = 1e-2;
/// Shock momentum residual tolerance for tabulated states, relative to the
/// larger momentum flux.
pub const TABULATED_SHOCK_TOL: f64 = 1e-3;

const SCAN_LO: f64 = 1e-6;
const SCAN_HI: f64 = 1e3;
const SCAN_POINTS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    One,
    Two,
}

impl Family {
    pub fn index(self) -> u8 {
        match self {
            Family::One => 1,
            Family::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Subcritical,
    Supercritical,
}

impl Branch {
    fn name(self) -> &'static str {
        match self {
            Branch::Subcritical => "subcritical",
            Branch::Supercritical => "supercritical",
        }
    }

    fn admits(self, fr: f64) -> bool {
        match self {
            Branch::Subcritical => fr.abs() < 1.0,
            Branch::Supercritical => fr.abs() > 1.0,
        }
    }
}

/// Velocity reached from `uk` along the family's wave curve at height `h_star`.
///
/// Shock branch for `h_star > h_K`, rarefaction branch otherwise.
pub fn wave_curve(h_star: f64, family: Family, uk: ConservedState, g: f64) -> Result<f64> {
    check_gravity(g)?;
    if !(h_star > 0.0 && h_star.is_finite()) {
        return Err(Error::Domain(format!("wave curve height must be positive, got {h_star}")));
    }
    ConservedState::new(uk.h, uk.m)?;
    Ok(wave_curve_unchecked(h_star, family, uk, g))
}

fn wave_curve_unchecked(h_star: f64, family: Family, uk: ConservedState, g: f64) -> f64 {
    let hk = uk.h;
    let uk_vel = uk.m / hk;
    let sign = match family {
        Family::One => -1.0,
        Family::Two => 1.0,
    };
    if h_star > hk {
        uk_vel + sign * (h_star - hk) * (0.5 * g * (h_star + hk) / (h_star * hk)).sqrt()
    } else {
        uk_vel - sign * 2.0 * ((g * hk).sqrt() - (g * h_star).sqrt())
    }
}

fn momentum_flux(h: f64, m: f64, g: f64) -> f64 {
    m * m / h + 0.5 * g * h * h
}

/// Residual of the step closure: `[m²/h + g h²/2] + g ȟ_γ [b]`.
pub fn grh_residual(
    minus: ConservedState,
    plus: ConservedState,
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
) -> f64 {
    let h_check = check_h_gamma_unchecked(minus.h, plus.h, b_l, b_r, gamma);
    momentum_flux(plus.h, plus.m, g) - momentum_flux(minus.h, minus.m, g) + g * h_check * (b_r - b_l)
}

/// `([m], [u²/2 + g(h + b)])` across the step: the alternative closure that
/// keeps the Riemann invariants constant. Pure checker.
pub fn riemann_invariant_residual(
    minus: ConservedState,
    plus: ConservedState,
    b_l: f64,
    b_r: f64,
    g: f64,
) -> Result<(f64, f64)> {
    ConservedState::new(minus.h, minus.m)?;
    ConservedState::new(plus.h, plus.m)?;
    check_gravity(g)?;
    let bernoulli = |u: ConservedState, b: f64| {
        let v = u.m / u.h;
        0.5 * v * v + g * (u.h + b)
    };
    Ok((plus.m - minus.m, bernoulli(plus, b_r) - bernoulli(minus, b_l)))
}

fn log_grid(h_ref: f64) -> impl Iterator<Item = f64> {
    let (lo, hi) = ((SCAN_LO * h_ref).ln(), (SCAN_HI * h_ref).ln());
    (0..SCAN_POINTS).map(move |i| (lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64).exp())
}

/// Every root of `f` found by scanning a log grid around `h_ref`.
///
/// `f` may be undefined (`None`) on parts of the range; the edges of each
/// defined interval are located by bisection and sampled too, since roots
/// often sit right next to them (critical flow at the step).
fn scan_roots<F>(f: F, h_ref: f64) -> Vec<f64>
where
    F: Fn(f64) -> Option<f64>,
{
    let eval = |h: f64| f(h).filter(|v| v.is_finite());
    let mut segments: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<(f64, Option<f64>)> = None;
    for h in log_grid(h_ref) {
        let v = eval(h);
        if let Some((h0, v0)) = prev {
            match (v0.is_some(), v.is_some()) {
                (true, false) => {
                    let e = defined_edge(&eval, h0, h);
                    current.push((e, eval(e).unwrap()));
                    segments.push(std::mem::take(&mut current));
                }
                (false, true) => {
                    let e = defined_edge(&eval, h, h0);
                    current.push((e, eval(e).unwrap()));
                }
                _ => {}
            }
        }
        if let Some(val) = v {
            current.push((h, val));
        }
        prev = Some((h, v));
    }
    segments.push(current);

    let mut roots = Vec::new();
    for seg in segments {
        for (i, pair) in seg.windows(2).enumerate() {
            let ((h0, f0), (h1, f1)) = (pair[0], pair[1]);
            if f0 == 0.0 {
                roots.push(h0);
            } else if f1 != 0.0 && f0.signum() != f1.signum() {
                if let Some(r) = polish(&eval, h0.min(h1), h0.max(h1), if h0 < h1 { f0 } else { f1 }) {
                    roots.push(r);
                }
            }
            if i + 2 == seg.len() && f1 == 0.0 {
                roots.push(h1);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    roots
}

/// Point closest to `undefined` where `f` is still defined, starting from
/// a defined point `defined`.
fn defined_edge<F>(f: &F, mut defined: f64, mut undefined: f64) -> f64
where
    F: Fn(f64) -> Option<f64>,
{
    for _ in 0..200 {
        let mid = 0.5 * (defined + undefined);
        if mid == defined || mid == undefined {
            break;
        }
        if f(mid).is_some() {
            defined = mid;
        } else {
            undefined = mid;
        }
    }
    defined
}

/// Bisection down to a relative width of 1e-6, then Newton with a
/// finite-difference slope, safeguarded by the bracket.
fn polish<F>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Option<f64>
where
    F: Fn(f64) -> Option<f64>,
{
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x)?;
        if fx == 0.0 {
            return Some(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        let dh = 1e-7 * x;
        let slope = match (f(x + dh), f(x - dh)) {
            (Some(a), Some(b)) => (a - b) / (2.0 * dh),
            _ => f64::NAN,
        };
        let newton = x - fx / slope;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x || hi - lo <= 2.0 * f64::EPSILON * x {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}

/// The state across the step reached from `minus` under the step closure,
/// choosing the root whose downstream Froude number lies in `branch`.
pub fn step_transition(
    minus: ConservedState,
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
    branch: Branch,
) -> Result<ConservedState> {
    ConservedState::new(minus.h, minus.m)?;
    check_gravity(g)?;
    check_bed(b_l, b_r)?;
    step_transition_unchecked(minus, b_l, b_r, gamma, g, branch, Side::Plus)
}

/// Like [`step_transition`], solving right to left: returns the state left
/// of the step whose Froude number lies in `branch`.
pub fn step_transition_from_right(
    plus: ConservedState,
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
    branch: Branch,
) -> Result<ConservedState> {
    ConservedState::new(plus.h, plus.m)?;
    check_gravity(g)?;
    check_bed(b_l, b_r)?;
    step_transition_unchecked(plus, b_l, b_r, gamma, g, branch, Side::Minus)
}

fn check_bed(b_l: f64, b_r: f64) -> Result<()> {
    if b_l.is_finite() && b_r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("bed values must be finite, got {b_l} and {b_r}")))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Minus,
    Plus,
}

fn step_transition_unchecked(
    known: ConservedState,
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
    branch: Branch,
    unknown: Side,
) -> Result<ConservedState> {
    if b_l == b_r {
        return Ok(known);
    }
    let m = known.m;
    let residual = |h: f64| {
        let other = ConservedState { h, m };
        Some(match unknown {
            Side::Plus => grh_residual(known, other, b_l, b_r, gamma, g),
            Side::Minus => grh_residual(other, known, b_l, b_r, gamma, g),
        })
    };
    let froude = |h: f64| m / (h * (g * h).sqrt());
    let roots = scan_roots(residual, known.h);
    roots
        .iter()
        .copied()
        .filter(|&h| h > 0.0 && branch.admits(froude(h)))
        .min_by(|a, b| {
            residual(*a).unwrap().abs().total_cmp(&residual(*b).unwrap().abs())
        })
        .map(|h| ConservedState { h, m })
        .ok_or_else(|| Error::NoStepTransition {
            branch: branch.name(),
            detail: format!(
                "from h = {}, m = {} across b: {b_l} -> {b_r} (roots found at h = {roots:?})",
                known.h, known.m
            ),
        })
}

/// Kind of a single wave in a Riemann solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WaveKind {
    Shock { speed: f64 },
    /// `head` is the leading edge (facing the undisturbed state), so
    /// `head <= tail` for family 1 and `head >= tail` for family 2.
    Rarefaction { head: f64, tail: f64, family: Family },
    StepWave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveDescriptor {
    pub kind: WaveKind,
    pub left: ConservedState,
    pub right: ConservedState,
}

impl WaveDescriptor {
    /// `(slowest, fastest)` speed of the wave.
    pub fn span(&self) -> (f64, f64) {
        match self.kind {
            WaveKind::Shock { speed } => (speed, speed),
            WaveKind::Rarefaction { head, tail, .. } => (head.min(tail), head.max(tail)),
            WaveKind::StepWave => (0.0, 0.0),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            WaveKind::Shock { .. } => "S".into(),
            WaveKind::Rarefaction { family, .. } => format!("{}R", family.index()),
            WaveKind::StepWave => "0".into(),
        }
    }
}

fn char_speeds(u: ConservedState, g: f64) -> (f64, f64) {
    let v = u.m / u.h;
    let c = (g * u.h).sqrt();
    (v - c, v + c)
}

fn fan_invariant(u: ConservedState, family: Family, g: f64) -> f64 {
    let v = u.m / u.h;
    let c = (g * u.h).sqrt();
    match family {
        Family::One => v + 2.0 * c,
        Family::Two => v - 2.0 * c,
    }
}

fn rarefaction(left: ConservedState, right: ConservedState, family: Family, g: f64) -> WaveDescriptor {
    let (ls, rs) = (char_speeds(left, g), char_speeds(right, g));
    let (head, tail) = match family {
        Family::One => (ls.0, rs.0),
        Family::Two => (rs.1, ls.1),
    };
    WaveDescriptor {
        kind: WaveKind::Rarefaction { head, tail, family },
        left,
        right,
    }
}

fn shock(left: ConservedState, right: ConservedState) -> WaveDescriptor {
    WaveDescriptor {
        kind: WaveKind::Shock {
            speed: (right.m - left.m) / (right.h - left.h),
        },
        left,
        right,
    }
}

/// Shock or rarefaction by the height ordering across a genuinely nonlinear wave.
fn nonlinear_wave(left: ConservedState, right: ConservedState, family: Family, g: f64) -> Option<WaveDescriptor> {
    if left == right {
        return None;
    }
    let compressive = match family {
        Family::One => right.h > left.h,
        Family::Two => left.h > right.h,
    };
    Some(if compressive {
        shock(left, right)
    } else {
        rarefaction(left, right, family, g)
    })
}

/// Requested character of one nonlinear wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveChoice {
    Shock,
    Rarefaction,
    Auto,
}

/// Where the two nonlinear waves sit relative to the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layout {
    /// `1W-0-2W`
    Subcritical,
    /// `1W-2W-0`
    NegativeSupercritical,
    /// A resonant composite 0-wave; not solvable here. `step_last` records
    /// whether the annotation places it after both nonlinear waves.
    Transonic { step_last: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WavePatternHint {
    pub layout: Layout,
    pub one: WaveChoice,
    pub two: WaveChoice,
}

impl WavePatternHint {
    pub fn auto(layout: Layout) -> Self {
        Self {
            layout,
            one: WaveChoice::Auto,
            two: WaveChoice::Auto,
        }
    }

    /// Parses annotations such as `1R-0-2S`, `1S-2S-0` or `1R-2R-0(R)`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognized wave pattern `{s}`"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let parts: Vec<&str> = compact.split('-').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let wave = |p: &str, fam: char| -> Result<WaveChoice> {
            let mut it = p.chars();
            if it.next() != Some(fam) {
                return Err(bad());
            }
            match it.as_str() {
                "S" => Ok(WaveChoice::Shock),
                "R" => Ok(WaveChoice::Rarefaction),
                "W" | "" => Ok(WaveChoice::Auto),
                _ => Err(bad()),
            }
        };
        let (layout, a, b) = match (parts[0], parts[1], parts[2]) {
            (a, "0", b) => (Layout::Subcritical, a, b),
            (a, b, "0") => (Layout::NegativeSupercritical, a, b),
            (a, "0(R)", b) => (Layout::Transonic { step_last: false }, a, b),
            (a, b, "0(R)") => (Layout::Transonic { step_last: true }, a, b),
            _ => return Err(bad()),
        };
        Ok(Self {
            layout,
            one: wave(a, '1')?,
            two: wave(b, '2')?,
        })
    }
}

impl fmt::Display for WavePatternHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = |c: WaveChoice| match c {
            WaveChoice::Shock => "S",
            WaveChoice::Rarefaction => "R",
            WaveChoice::Auto => "W",
        };
        let (a, b) = (format!("1{}", w(self.one)), format!("2{}", w(self.two)));
        match self.layout {
            Layout::Subcritical => write!(f, "{a}-0-{b}"),
            Layout::NegativeSupercritical => write!(f, "{a}-{b}-0"),
            Layout::Transonic { step_last: false } => write!(f, "{a}-0(R)-{b}"),
            Layout::Transonic { step_last: true } => write!(f, "{a}-{b}-0(R)"),
        }
    }
}

/// A self-similar solution: constant states separated by ordered waves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub left: ConservedState,
    pub right: ConservedState,
    pub waves: Vec<WaveDescriptor>,
    pub b_l: f64,
    pub b_r: f64,
    pub gamma: GammaChoice,
    pub g: f64,
}

impl ReferenceSolution {
    /// The constant states from left to right.
    pub fn states(&self) -> Vec<ConservedState> {
        let mut out = vec![self.left];
        out.extend(self.waves.iter().map(|w| w.right));
        out
    }

    /// Human-readable state chain in `(h, m)` and `(h, Fr)`.
    pub fn chain(&self) -> String {
        let fmt_state = |u: ConservedState| {
            let fr = u.m / (u.h * (self.g * u.h).sqrt());
            format!("(h {:.4}, m {:.4}, Fr {:.4})", u.h, u.m, fr)
        };
        let mut s = fmt_state(self.left);
        for w in &self.waves {
            let name = match w.kind {
                WaveKind::Shock { speed } => format!("shock s={speed:.4}"),
                WaveKind::Rarefaction { head, tail, family } => {
                    format!("{}-rarefaction [{head:.4}, {tail:.4}]", family.index())
                }
                WaveKind::StepWave => "0-wave".into(),
            };
            s.push_str(&format!(" --{name}--> {}", fmt_state(w.right)));
        }
        s
    }

    /// Checks left-to-right ordering of the wave speeds.
    pub fn check_ordering(&self, tol: f64) -> Result<()> {
        for (i, pair) in self.waves.windows(2).enumerate() {
            let (a, b) = (pair[0].span(), pair[1].span());
            let scale = a.1.abs().max(b.0.abs()).max(1.0);
            if a.1 > b.0 + tol * scale {
                return Err(Error::InadmissiblePattern(format!(
                    "wave {} ({}, up to speed {}) overtakes wave {} ({}, from speed {})",
                    i,
                    pair[0].label(),
                    a.1,
                    i + 1,
                    pair[1].label(),
                    b.0
                )));
            }
        }
        if let Some(first) = self.waves.first() {
            if first.left != self.left {
                return Err(Error::InadmissiblePattern("first wave does not start at U_L".into()));
            }
        }
        if let Some(last) = self.waves.last() {
            if last.right != self.right {
                return Err(Error::InadmissiblePattern("last wave does not end at U_R".into()));
            }
        }
        for pair in self.waves.windows(2) {
            if pair[0].right != pair[1].left {
                return Err(Error::InadmissiblePattern("waves do not share intermediate states".into()));
            }
        }
        Ok(())
    }

    /// Residual of each wave's defining relation (RH momentum relative to
    /// the flux scale for shocks, invariant jump for fans, step closure for
    /// the 0-wave).
    pub fn connector_residuals(&self) -> Vec<f64> {
        self.waves
            .iter()
            .map(|w| connector_residual(w, self.b_l, self.b_r, self.gamma, self.g))
            .collect()
    }

    /// Evaluates the solution at `(x, t)`; `t = 0` returns the initial data.
    pub fn evaluate(&self, x: f64, t: f64) -> ConservedState {
        if t <= 0.0 {
            return if x < 0.0 { self.left } else { self.right };
        }
        let xi = x / t;
        for w in &self.waves {
            match w.kind {
                WaveKind::StepWave => {
                    if x < 0.0 {
                        return w.left;
                    }
                }
                WaveKind::Shock { speed } => {
                    if xi < speed {
                        return w.left;
                    }
                }
                WaveKind::Rarefaction { family, .. } => {
                    let (lo, hi) = w.span();
                    if xi < lo {
                        return w.left;
                    }
                    if xi <= hi {
                        return fan_state(w.left, family, xi, self.g);
                    }
                }
            }
        }
        self.right
    }
}

/// Centered-fan state at `ξ` using the invariant carried from `from`.
fn fan_state(from: ConservedState, family: Family, xi: f64, g: f64) -> ConservedState {
    let inv = fan_invariant(from, family, g);
    let (c, u) = match family {
        Family::One => {
            let c = (inv - xi) / 3.0;
            (c, xi + c)
        }
        Family::Two => {
            let c = (xi - inv) / 3.0;
            (c, xi - c)
        }
    };
    let h = c * c / g;
    ConservedState { h, m: h * u }
}

fn connector_residual(w: &WaveDescriptor, b_l: f64, b_r: f64, gamma: GammaChoice, g: f64) -> f64 {
    match w.kind {
        WaveKind::Shock { speed } => {
            let (fl, fr) = (momentum_flux(w.left.h, w.left.m, g), momentum_flux(w.right.h, w.right.m, g));
            ((fr - fl) - speed * (w.right.m - w.left.m)).abs() / fl.abs().max(fr.abs())
        }
        WaveKind::Rarefaction { family, .. } => {
            (fan_invariant(w.right, family, g) - fan_invariant(w.left, family, g)).abs()
        }
        WaveKind::StepWave => grh_residual(w.left, w.right, b_l, b_r, gamma, g).abs(),
    }
}

/// Evaluates `sol` at `(x, t)`.
pub fn evaluate_reference(sol: &ReferenceSolution, x: f64, t: f64) -> ConservedState {
    sol.evaluate(x, t)
}

fn check_choice(w: Option<&WaveDescriptor>, choice: WaveChoice, family: Family) -> Result<()> {
    let is_shock = matches!(w.map(|w| w.kind), Some(WaveKind::Shock { .. }));
    let ok = match (choice, w) {
        (WaveChoice::Auto, _) | (_, None) => true,
        (WaveChoice::Shock, Some(_)) => is_shock,
        (WaveChoice::Rarefaction, Some(_)) => !is_shock,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InadmissiblePattern(format!(
            "the {}-wave came out as a {} but the pattern asks for a {}",
            family.index(),
            if is_shock { "shock" } else { "rarefaction" },
            if is_shock { "rarefaction" } else { "shock" }
        )))
    }
}

/// Classical flat-bottom two-wave solve: the middle state between `ul` and `ur`.
pub fn flat_middle_state(ul: ConservedState, ur: ConservedState, g: f64) -> Result<ConservedState> {
    ConservedState::new(ul.h, ul.m)?;
    ConservedState::new(ur.h, ur.m)?;
    check_gravity(g)?;
    flat_middle_unchecked(ul, ur, g)
}

fn flat_middle_unchecked(ul: ConservedState, ur: ConservedState, g: f64) -> Result<ConservedState> {
    if ul == ur {
        return Ok(ul);
    }
    let f = |h: f64| Some(wave_curve_unchecked(h, Family::One, ul, g) - wave_curve_unchecked(h, Family::Two, ur, g));
    let roots = scan_roots(f, ul.h.max(ur.h));
    let h = roots.first().copied().ok_or_else(|| {
        Error::PatternInfeasible(format!(
            "no middle state between (h {}, m {}) and (h {}, m {}) (dry bed?)",
            ul.h, ul.m, ur.h, ur.m
        ))
    })?;
    Ok(ConservedState {
        h,
        m: h * wave_curve_unchecked(h, Family::One, ul, g),
    })
}

fn assemble(
    ul: ConservedState,
    ur: ConservedState,
    mut waves: Vec<WaveDescriptor>,
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
) -> ReferenceSolution {
    // drop zero-strength waves
    waves.retain(|w| w.left != w.right || matches!(w.kind, WaveKind::StepWave) && b_l != b_r);
    ReferenceSolution {
        left: ul,
        right: ur,
        waves,
        b_l,
        b_r,
        gamma,
        g,
    }
}

/// Solves the Riemann problem `W_L | W_R` over the step `b_l | b_r`.
pub fn solve_riemann_grh(
    w_l: PrimitiveState,
    w_r: PrimitiveState,
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
    pattern: WavePatternHint,
) -> Result<ReferenceSolution> {
    check_bed(b_l, b_r)?;
    let ul = ConservedState::from_primitive(w_l, g)?;
    let ur = ConservedState::from_primitive(w_r, g)?;
    solve_riemann_conserved(ul, ur, b_l, b_r, gamma, g, pattern)
}

/// [`solve_riemann_grh`] for conserved data.
pub fn solve_riemann_conserved(
    ul: ConservedState,
    ur: ConservedState,
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
    pattern: WavePatternHint,
) -> Result<ReferenceSolution> {
    ConservedState::new(ul.h, ul.m)?;
    ConservedState::new(ur.h, ur.m)?;
    check_gravity(g)?;
    check_bed(b_l, b_r)?;
    if ul == ur && b_l == b_r {
        return Ok(assemble(ul, ur, Vec::new(), b_l, b_r, gamma, g));
    }
    let sol = match pattern.layout {
        Layout::Transonic { .. } => {
            return Err(Error::PatternInfeasible(
                "transonic problems with a resonant 0-wave are outside the solver's scope".into(),
            ))
        }
        Layout::Subcritical => solve_subcritical(ul, ur, b_l, b_r, gamma, g, pattern)?,
        Layout::NegativeSupercritical => {
            let u0 = step_transition_unchecked(ur, b_l, b_r, gamma, g, Branch::Supercritical, Side::Minus)
                .map_err(|e| Error::PatternInfeasible(e.to_string()))?;
            let mid = flat_middle_unchecked(ul, u0, g)?;
            let one = nonlinear_wave(ul, mid, Family::One, g);
            let two = nonlinear_wave(mid, u0, Family::Two, g);
            check_choice(one.as_ref(), pattern.one, Family::One)?;
            check_choice(two.as_ref(), pattern.two, Family::Two)?;
            let step = WaveDescriptor {
                kind: WaveKind::StepWave,
                left: u0,
                right: ur,
            };
            let waves = one.into_iter().chain(two).chain(Some(step)).collect();
            assemble(ul, ur, waves, b_l, b_r, gamma, g)
        }
    };
    sol.check_ordering(1e-12)?;
    Ok(sol)
}

fn solve_subcritical(
    ul: ConservedState,
    ur: ConservedState,
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
    pattern: WavePatternHint,
) -> Result<ReferenceSolution> {
    let across = |h1: f64| -> Option<(ConservedState, ConservedState)> {
        let u1 = ConservedState {
            h: h1,
            m: h1 * wave_curve_unchecked(h1, Family::One, ul, g),
        };
        let u2 = step_transition_unchecked(u1, b_l, b_r, gamma, g, Branch::Subcritical, Side::Plus).ok()?;
        Some((u1, u2))
    };
    let residual = |h1: f64| {
        let (_, u2) = across(h1)?;
        Some(u2.m / u2.h - wave_curve_unchecked(u2.h, Family::Two, ur, g))
    };
    let roots = scan_roots(residual, ul.h.max(ur.h));
    let mut last_err = None;
    for h1 in roots {
        let Some((u1, u2)) = across(h1) else { continue };
        let one = nonlinear_wave(ul, u1, Family::One, g);
        let two = nonlinear_wave(u2, ur, Family::Two, g);
        let step = WaveDescriptor {
            kind: WaveKind::StepWave,
            left: u1,
            right: u2,
        };
        let waves = one.into_iter().chain(Some(step)).chain(two).collect();
        let sol = assemble(ul, ur, waves, b_l, b_r, gamma, g);
        let check = sol
            .check_ordering(1e-12)
            .and_then(|_| check_choice(one.as_ref(), pattern.one, Family::One))
            .and_then(|_| check_choice(two.as_ref(), pattern.two, Family::Two));
        match check {
            Ok(()) => return Ok(sol),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::PatternInfeasible(format!(
            "no subcritical solution found scanning h over [{:e}, {:e}]",
            SCAN_LO * ul.h.max(ur.h),
            SCAN_HI * ul.h.max(ur.h)
        ))
    }))
}

/// One connector in a tabulated state chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connector {
    Shock,
    Rarefaction(Family),
    Step,
}

/// Builds a solution from printed intermediate states, validating every
/// connector against the tolerances for 4-decimal data.
pub fn build_reference_from_states(
    states: &[PrimitiveState],
    connectors: &[Connector],
    b_l: f64,
    b_r: f64,
    gamma: GammaChoice,
    g: f64,
) -> Result<ReferenceSolution> {
    check_gravity(g)?;
    check_bed(b_l, b_r)?;
    if states.len() < 2 || connectors.len() + 1 != states.len() {
        return Err(Error::Config(format!(
            "{} states need {} connectors, got {}",
            states.len(),
            states.len().saturating_sub(1),
            connectors.len()
        )));
    }
    let us = states
        .iter()
        .map(|&w| ConservedState::from_primitive(w, g))
        .collect::<Result<Vec<_>>>()?;
    let mut waves = Vec::with_capacity(connectors.len());
    for (i, (&c, pair)) in connectors.iter().zip(us.windows(2)).enumerate() {
        let (left, right) = (pair[0], pair[1]);
        let fail = |detail: String, residual: f64| Error::Connector {
            left: i,
            right: i + 1,
            detail,
            residual,
        };
        let wave = match c {
            Connector::Shock => {
                if left.h == right.h {
                    return Err(fail("a shock needs a height jump".into(), 0.0));
                }
                shock(left, right)
            }
            Connector::Rarefaction(family) => {
                let w = rarefaction(left, right, family, g);
                let (head, tail) = match w.kind {
                    WaveKind::Rarefaction { head, tail, .. } => (head, tail),
                    _ => unreachable!(),
                };
                let expanding = match family {
                    Family::One => head <= tail,
                    Family::Two => head >= tail,
                };
                if !expanding {
                    return Err(fail(
                        format!("{}-rarefaction characteristics converge", family.index()),
                        (head - tail).abs(),
                    ));
                }
                w
            }
            Connector::Step => WaveDescriptor {
                kind: WaveKind::StepWave,
                left,
                right,
            },
        };
        let r = connector_residual(&wave, b_l, b_r, gamma, g);
        let (tol, what) = match c {
            Connector::Shock => (TABULATED_SHOCK_TOL, "shock momentum relation"),
            Connector::Rarefaction(_) => (TABULATED_FAN_TOL, "fan invariant"),
            Connector::Step => (TABULATED_STEP_TOL, "step closure"),
        };
        if !(r <= tol) {
            return Err(fail(format!("{what} violated (tolerance {tol:e})"), r));
        }
        if c == Connector::Step && (right.m - left.m).abs() > TABULATED_STEP_TOL {
            return Err(fail("step wave does not conserve mass".into(), (right.m - left.m).abs()));
        }
        waves.push(wave);
    }
    let sol = ReferenceSolution {
        left: us[0],
        right: *us.last().unwrap(),
        waves,
        b_l,
        b_r,
        gamma,
        g,
    };
    sol.check_ordering(1e-9)?;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::GRAVITY;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const G: f64 = GRAVITY;

    fn cs(h: f64, m: f64) -> ConservedState {
        ConservedState { h, m }
    }

    fn pw(h: f64, fr: f64) -> PrimitiveState {
        PrimitiveState { h, fr }
    }

    fn fr(u: ConservedState) -> f64 {
        u.m / (u.h * (G * u.h).sqrt())
    }

    fn assert_chain(sol: &ReferenceSolution, expected: &[(f64, f64)], primitive: bool) {
        let states = sol.states();
        assert_eq!(states.len(), expected.len(), "{}", sol.chain());
        for (u, &(a, b)) in states.iter().zip(expected) {
            let second = if primitive { fr(*u) } else { u.m };
            assert!(
                (u.h - a).abs() < 5e-5 && (second - b).abs() < 5e-5,
                "{} vs {:?}",
                sol.chain(),
                expected
            );
        }
    }

    #[test]
    fn wave_curve_examples() {
        let u = cs(0.7, 0.3);
        assert_eq!(wave_curve(0.7, Family::One, u, G).unwrap(), 0.3 / 0.7);
        assert_eq!(wave_curve(0.7, Family::Two, u, G).unwrap(), 0.3 / 0.7);
        let u1 = wave_curve(0.9458, Family::One, cs(1.0, 0.0), G).unwrap();
        assert!((u1 - 0.17224).abs() < 2e-4, "{u1}");
        assert!((0.9458 * u1 - 0.1629).abs() < 2e-4);
        let u2 = wave_curve(0.1964, Family::Two, cs(0.1, 0.0), G).unwrap();
        assert!((0.1964 * u2 - 0.1629).abs() < 2e-4, "{}", 0.1964 * u2);
        assert!(wave_curve(0.0, Family::One, u, G).is_err());
    }

    #[test]
    fn dam_break_step_transition() {
        let minus = cs(0.9458, 0.1629);
        let plus = step_transition(minus, 0.0, 0.7, GammaChoice::SignOfJump, G, Branch::Subcritical).unwrap();
        assert!((plus.h - 0.1964).abs() < 1e-4, "{plus:?}");
        assert_eq!(plus.m, minus.m);
        assert!(grh_residual(minus, plus, 0.0, 0.7, GammaChoice::SignOfJump, G).abs() < 1e-12);
        let lhs = momentum_flux(plus.h, plus.m, G) - momentum_flux(minus.h, minus.m, G);
        let rhs = -G * (0.9458 - 0.35) * 0.7;
        assert!((lhs + 4.092).abs() < 1e-3 && (rhs + 4.091).abs() < 1e-3);
        let same = step_transition(minus, 0.3, 0.3, GammaChoice::SignOfJump, G, Branch::Subcritical).unwrap();
        assert_eq!(same, minus);
    }

    #[test]
    fn example_6_5_step_transition_from_right() {
        let ur = ConservedState::from_primitive(pw(0.7, -1.05), G).unwrap();
        let u0 = step_transition_from_right(ur, 0.0, 0.2, GammaChoice::SignOfJump, G, Branch::Supercritical).unwrap();
        assert!((u0.h - 0.5138).abs() < 5e-5 && (fr(u0) + 1.6697).abs() < 5e-5, "{u0:?} {}", fr(u0));
        let plus = step_transition(u0, 0.0, 0.2, GammaChoice::SignOfJump, G, Branch::Supercritical).unwrap();
        assert!((plus.h - ur.h).abs() < 1e-10);
    }

    #[test]
    fn missing_branch_is_reported() {
        // a deep still pool has no supercritical partner with zero momentum
        let err = step_transition(cs(1.0, 0.0), 0.0, 0.5, GammaChoice::SignOfJump, G, Branch::Supercritical)
            .unwrap_err();
        assert!(matches!(err, Error::NoStepTransition { branch: "supercritical", .. }), "{err}");
    }

    #[test]
    fn dam_break_chain() {
        let sol = solve_riemann_grh(
            pw(1.0, 0.0),
            pw(0.1, 0.0),
            0.0,
            0.7,
            GammaChoice::SignOfJump,
            G,
            WavePatternHint::parse("1R-0-2S").unwrap(),
        )
        .unwrap();
        assert_chain(&sol, &[(1.0, 0.0), (0.9458, 0.1629), (0.1964, 0.1629), (0.1, 0.0)], false);
        let labels: Vec<_> = sol.waves.iter().map(|w| w.label()).collect();
        assert_eq!(labels, ["1R", "0", "S"]);
        for r in sol.connector_residuals() {
            assert!(r < SOLVER_TOL, "{r}");
        }
        let shock = sol.waves[2];
        let WaveKind::Shock { speed } = shock.kind else { panic!() };
        assert!((speed - 1.6898).abs() < 2e-3, "{speed}");
        let mid = sol.evaluate(0.5 * speed, 1.0);
        assert_eq!(mid, sol.waves[1].right);
        assert_eq!(sol.evaluate(-10.0, 1.0), cs(1.0, 0.0));
        assert_eq!(sol.evaluate(10.0, 1.0), cs(0.1, 0.0));
        // inside the 1-fan
        let (lo, hi) = sol.waves[0].span();
        for k in 1..20 {
            let xi = lo + (hi - lo) * k as f64 / 20.0;
            let u = sol.evaluate(xi * 0.8, 0.8);
            assert!((u.m / u.h + 2.0 * (G * u.h).sqrt() - 2.0 * G.sqrt()).abs() < 1e-12);
        }
        // step: left limit for x < 0, right limit at x = 0
        assert_eq!(sol.evaluate(-1e-12, 1.0), sol.waves[1].left);
        assert_eq!(sol.evaluate(0.0, 1.0), sol.waves[1].right);
        assert_eq!(sol.evaluate(-0.1, 0.0), cs(1.0, 0.0));
    }

    #[test]
    fn subcritical_examples_reproduce_printed_chains() {
        let cases: [(PrimitiveState, PrimitiveState, f64, &str, [(f64, f64); 4]); 4] = [
            (pw(0.95, 0.55), pw(0.7, 0.85), 0.5, "1S-0-2R",
                [(0.95, 0.55), (1.2295, 0.24), (0.5814, 0.7381), (0.7, 0.85)]),
            (pw(1.0, 0.3), pw(1.2, 0.95), 0.2, "1R-0-2R",
                [(1.0, 0.3), (0.9443, 0.3669), (0.6780, 0.6031), (1.2, 0.95)]),
            (pw(0.7, 0.2), pw(0.2, 0.2), 0.5, "1S-0-2S",
                [(0.7, 0.2), (0.7849, 0.0774), (0.2569, 0.4133), (0.2, 0.2)]),
            (pw(0.5, 1.5), pw(0.3, 0.0), 0.2, "1S-0-2S",
                [(0.5, 1.5), (1.0141, 0.4295), (0.7041, 0.7424), (0.3, 0.0)]),
        ];
        for (wl, wr, br, pat, chain) in cases {
            let sol = solve_riemann_grh(wl, wr, 0.0, br, GammaChoice::SignOfJump, G, WavePatternHint::parse(pat).unwrap())
                .unwrap();
            assert_chain(&sol, &chain, true);
            for r in sol.connector_residuals() {
                assert!(r < SOLVER_TOL, "{pat}: {r}");
            }
        }
    }

    #[test]
    fn negative_supercritical_examples_reproduce_printed_chains() {
        let cases = [
            (pw(0.5, -1.5), "1S-2S-0", [(0.5, -1.5), (0.5565, -1.5262), (0.5138, -1.6697), (0.7, -1.05)]),
            (pw(0.5, -2.0), "1R-2R-0", [(0.5, -2.0), (0.4325, -2.0), (0.5138, -1.6697), (0.7, -1.05)]),
        ];
        for (wl, pat, chain) in cases {
            let sol = solve_riemann_grh(wl, pw(0.7, -1.05), 0.0, 0.2, GammaChoice::SignOfJump, G, WavePatternHint::parse(pat).unwrap())
                .unwrap();
            assert_chain(&sol, &chain, true);
            assert!(matches!(sol.waves[2].kind, WaveKind::StepWave));
        }
    }

    #[test]
    fn wrong_wave_hint_is_rejected() {
        let err = solve_riemann_grh(
            pw(1.0, 0.0),
            pw(0.1, 0.0),
            0.0,
            0.7,
            GammaChoice::SignOfJump,
            G,
            WavePatternHint::parse("1S-0-2S").unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InadmissiblePattern(_)), "{err}");
    }

    #[test]
    fn transonic_layout_is_refused() {
        let err = solve_riemann_grh(
            pw(4.0, 1.1175),
            pw(1.0299, 2.2428),
            0.0,
            1.0,
            GammaChoice::SignOfJump,
            G,
            WavePatternHint::parse("1S-0(R)-2S").unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::PatternInfeasible(_)));
    }

    #[test]
    fn trivial_problem_has_no_waves() {
        let sol = solve_riemann_grh(
            pw(0.8, 0.3),
            pw(0.8, 0.3),
            0.1,
            0.1,
            GammaChoice::SignOfJump,
            G,
            WavePatternHint::auto(Layout::Subcritical),
        )
        .unwrap();
        assert!(sol.waves.is_empty());
        assert_eq!(sol.evaluate(0.3, 1.0), sol.left);
    }

    #[test]
    fn pattern_parsing_round_trips() {
        for s in ["1R-0-2S", "1S-0-2R", "1S-2S-0", "1R-2R-0", "1S-0(R)-2S", "1R-2R-0(R)"] {
            assert_eq!(WavePatternHint::parse(s).unwrap().to_string(), s);
        }
        assert!(WavePatternHint::parse("2R-0-1S").is_err());
    }

    fn example_6_8() -> Result<ReferenceSolution> {
        build_reference_from_states(
            &[pw(4.0, 1.1175), pw(6.1431, 0.5089), pw(3.9157, 1.0), pw(1.9999, 2.1977), pw(1.0299, 2.2428)],
            &[Connector::Shock, Connector::Step, Connector::Rarefaction(Family::One), Connector::Shock],
            0.0,
            1.0,
            GammaChoice::SignOfJump,
            G,
        )
    }

    #[test]
    fn tabulated_transonic_chains_validate() {
        let sol = example_6_8().unwrap();
        let fan = sol.waves[2];
        assert_abs_diff_eq!(fan_invariant(fan.left, Family::One, G), 18.5935, epsilon = 1e-3);
        assert_abs_diff_eq!(fan_invariant(fan.right, Family::One, G), 18.5930, epsilon = 1e-3);
        assert_eq!(fan.span().0, 0.0);

        let sol = build_reference_from_states(
            &[pw(6.0, -2.0855), pw(1.9766, -2.1490), pw(2.5253, -1.6707), pw(3.5556, -1.0), pw(8.0, 0.0)],
            &[
                Connector::Rarefaction(Family::One),
                Connector::Rarefaction(Family::Two),
                Connector::Step,
                Connector::Rarefaction(Family::Two),
            ],
            0.0,
            1.0,
            GammaChoice::SignOfJump,
            G,
        )
        .unwrap();
        assert_eq!(sol.waves[3].span().0, 0.0);
        // the fan right of the step keeps u - 2c
        let u = sol.evaluate(3.0, 1.0);
        assert_abs_diff_eq!(fan_invariant(u, Family::Two, G), fan_invariant(sol.waves[3].left, Family::Two, G), epsilon = 1e-12);
    }

    #[test]
    fn mismatched_shock_is_rejected() {
        let err = build_reference_from_states(
            &[pw(1.0, 0.0), pw(0.5, 0.3)],
            &[Connector::Shock],
            0.0,
            0.0,
            GammaChoice::SignOfJump,
            G,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Connector { left: 0, right: 1, .. }), "{err}");
    }

    #[test]
    fn riemann_invariant_closure_disagrees_with_step_closure() {
        let (a, b) = riemann_invariant_residual(cs(1.0, 0.2), cs(1.0, 0.2), 0.0, 0.0, G).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        let sol = solve_riemann_grh(pw(1.0, 0.0), pw(0.1, 0.0), 0.0, 0.7, GammaChoice::SignOfJump, G, WavePatternHint::parse("1R-0-2S").unwrap()).unwrap();
        let step = sol.waves[1];
        let (dm, dbern) = riemann_invariant_residual(step.left, step.right, 0.0, 0.7, G).unwrap();
        assert!(dm.abs() < 1e-15);
        assert!(dbern.abs() > 0.1, "{dbern}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn flat_bottom_limit_matches_two_wave_solver(
            hl in 0.3f64..3.0, hr in 0.3f64..3.0, frl in -0.5f64..0.5, frr in -0.5f64..0.5, b in -1.0f64..1.0,
        ) {
            let (wl, wr) = (pw(hl, frl), pw(hr, frr));
            let ul = ConservedState::from_primitive(wl, G).unwrap();
            let ur = ConservedState::from_primitive(wr, G).unwrap();
            let sol = solve_riemann_grh(wl, wr, b, b, GammaChoice::SignOfJump, G, WavePatternHint::auto(Layout::Subcritical)).unwrap();
            let mid = flat_middle_state(ul, ur, G).unwrap();
            let states = sol.states();
            prop_assert!(states.iter().all(|u| ((u.h - mid.h).abs() < 1e-10 && (u.m - mid.m).abs() < 1e-10) || *u == ul || *u == ur));
            prop_assert!(!sol.waves.iter().any(|w| matches!(w.kind, WaveKind::StepWave)));
            for r in sol.connector_residuals() {
                prop_assert!(r < SOLVER_TOL);
            }
        }

        #[test]
        fn solver_output_passes_every_invariant(
            hl in 0.5f64..2.0, hr in 0.5f64..2.0, frl in -0.3f64..0.3, frr in -0.3f64..0.3, br in 0.01f64..0.2,
        ) {
            let res = solve_riemann_grh(pw(hl, frl), pw(hr, frr), 0.0, br, GammaChoice::SignOfJump, G, WavePatternHint::auto(Layout::Subcritical));
            if let Ok(sol) = res {
                for (w, r) in sol.waves.iter().zip(sol.connector_residuals()) {
                    prop_assert!(r < SOLVER_TOL, "{:?} {}", w.kind, r);
                    if let WaveKind::Shock { speed } = w.kind {
                        prop_assert!((speed * (w.right.h - w.left.h) - (w.right.m - w.left.m)).abs() < 1e-10);
                    }
                }
            }
        }
    }
}
