//! Interface fluxes, the step source and the well-balancing corrections.
//!
//! Every scheme in the crate is advanced with the same per-interface
//! triple: a numerical flux `F̂`, a source `Ŝ = -(g/2) (0, ȟ_γ) [b]` that is
//! split evenly between the two neighbouring cells, and a correction
//! `M̂ = ½ N̂ [b]` that enters as a flux difference.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{check_gravity, ConservedState};

/// A (mass, momentum) pair: fluxes, sources and corrections all use it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pair {
    pub mass: f64,
    pub momentum: f64,
}

impl Pair {
    pub const ZERO: Pair = Pair {
        mass: 0.0,
        momentum: 0.0,
    };

    pub fn new(mass: f64, momentum: f64) -> Self {
        Self { mass, momentum }
    }

    pub fn is_finite(&self) -> bool {
        self.mass.is_finite() && self.momentum.is_finite()
    }
}

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair::new(self.mass + o.mass, self.momentum + o.momentum)
    }
}

impl Sub for Pair {
    type Output = Pair;
    fn sub(self, o: Pair) -> Pair {
        Pair::new(self.mass - o.mass, self.momentum - o.momentum)
    }
}

impl Neg for Pair {
    type Output = Pair;
    fn neg(self) -> Pair {
        Pair::new(-self.mass, -self.momentum)
    }
}

impl Mul<Pair> for f64 {
    type Output = Pair;
    fn mul(self, p: Pair) -> Pair {
        Pair::new(self * p.mass, self * p.momentum)
    }
}

impl From<ConservedState> for Pair {
    fn from(u: ConservedState) -> Pair {
        Pair::new(u.h, u.m)
    }
}

/// Diagonal viscosity `diag(α₁, α₂)` of the Lax-Friedrichs flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscosityMatrix {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl ViscosityMatrix {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1 >= 0.0 && alpha2 >= 0.0 && alpha1.is_finite() && alpha2.is_finite()) {
            return Err(Error::Domain(format!(
                "viscosities must be finite and nonnegative, got ({alpha1}, {alpha2})"
            )));
        }
        Ok(Self { alpha1, alpha2 })
    }

    pub fn uniform(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }
}

/// How the double-valued water column at the step enters the pressure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GammaChoice {
    /// `γ = sgn([b])`: the water column on the lower side of the step.
    SignOfJump,
    /// `γ = 0`: the arithmetic mean of both sides.
    Zero,
}

impl GammaChoice {
    pub fn value(self, b_l: f64, b_r: f64) -> f64 {
        match self {
            GammaChoice::Zero => 0.0,
            GammaChoice::SignOfJump => {
                let jump = b_r - b_l;
                if jump > 0.0 {
                    1.0
                } else if jump < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GammaChoice::SignOfJump => "sgn",
            GammaChoice::Zero => "zero",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgn" | "sign" | "signofjump" | "sign-of-jump" => Ok(GammaChoice::SignOfJump),
            "0" | "zero" => Ok(GammaChoice::Zero),
            other => Err(Error::Config(format!("unknown gamma `{other}` (use `sgn` or `zero`)"))),
        }
    }
}

/// Which correction `N̂` a scheme adds on top of the Lax-Friedrichs update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NhatVariant {
    None,
    WbLxF,
    HydrostaticReconstruction,
    XingShu,
}

/// The three per-interface contributions of the unified update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceTerms {
    pub f_hat: Pair,
    pub s_hat: Pair,
    pub m_hat: Pair,
}

fn check_heights(ul: &ConservedState, ur: &ConservedState, g: f64) -> Result<()> {
    check_gravity(g)?;
    for u in [ul, ur] {
        if !(u.h.is_finite() && u.h > 0.0) || !u.m.is_finite() {
            return Err(Error::Domain(format!("invalid state ({}, {})", u.h, u.m)));
        }
    }
    Ok(())
}

/// `F(U) = (m, m²/h + ½ g h²)`.
pub fn physical_flux(u: ConservedState, g: f64) -> Result<Pair> {
    check_heights(&u, &u, g)?;
    Ok(physical_flux_unchecked(u, g))
}

#[inline]
pub(crate) fn physical_flux_unchecked(u: ConservedState, g: f64) -> Pair {
    Pair::new(u.m, u.m * u.m / u.h + 0.5 * g * u.h * u.h)
}

/// Local Lax-Friedrichs speed: the larger `|u| + sqrt(g h)` of the two states.
pub fn lxf_alpha(ul: ConservedState, ur: ConservedState, g: f64) -> Result<f64> {
    check_heights(&ul, &ur, g)?;
    Ok(lxf_alpha_unchecked(ul, ur, g))
}

#[inline]
pub(crate) fn lxf_alpha_unchecked(ul: ConservedState, ur: ConservedState, g: f64) -> f64 {
    ul.char_speed_unchecked(g).max(ur.char_speed_unchecked(g))
}

/// `F̂ = {F(U)} - ½ A [U]`.
pub fn lxf_flux(ul: ConservedState, ur: ConservedState, a: ViscosityMatrix, g: f64) -> Result<Pair> {
    check_heights(&ul, &ur, g)?;
    Ok(lxf_flux_unchecked(ul, ur, a, g))
}

#[inline]
pub(crate) fn lxf_flux_unchecked(
    ul: ConservedState,
    ur: ConservedState,
    a: ViscosityMatrix,
    g: f64,
) -> Pair {
    let fl = physical_flux_unchecked(ul, g);
    let fr = physical_flux_unchecked(ur, g);
    Pair::new(
        0.5 * (fl.mass + fr.mass) - 0.5 * a.alpha1 * (ur.h - ul.h),
        0.5 * (fl.momentum + fr.momentum) - 0.5 * a.alpha2 * (ur.m - ul.m),
    )
}

/// Result of an HLLC evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HllcFlux {
    pub flux: Pair,
    /// Set when the wave-speed estimates came out degenerate and the local
    /// Lax-Friedrichs flux was used instead.
    pub fell_back: bool,
}

/// HLLC flux for the homogeneous equations.
///
/// Wave speeds use the two-rarefaction estimate of the star state:
/// `s_L = min(u_l - c_l, u* - c*)`, `s_R = max(u_r + c_r, u* + c*)`.
pub fn hllc_flux(ul: ConservedState, ur: ConservedState, g: f64) -> Result<HllcFlux> {
    check_heights(&ul, &ur, g)?;
    Ok(hllc_flux_unchecked(ul, ur, g))
}

pub(crate) fn hllc_flux_unchecked(ul: ConservedState, ur: ConservedState, g: f64) -> HllcFlux {
    let (hl, hr) = (ul.h, ur.h);
    let (vl, vr) = (ul.m / hl, ur.m / hr);
    let (cl, cr) = ((g * hl).sqrt(), (g * hr).sqrt());

    let c_star = (0.5 * (cl + cr) + 0.25 * (vl - vr)).max(0.0);
    let v_star = 0.5 * (vl + vr) + cl - cr;
    let sl = (vl - cl).min(v_star - c_star);
    let sr = (vr + cr).max(v_star + c_star);

    let denom = hr * (vr - sr) - hl * (vl - sl);
    if !(sl < sr) || denom == 0.0 || !denom.is_finite() {
        let alpha = lxf_alpha_unchecked(ul, ur, g);
        return HllcFlux {
            flux: lxf_flux_unchecked(ul, ur, ViscosityMatrix { alpha1: alpha, alpha2: alpha }, g),
            fell_back: true,
        };
    }

    let fl = physical_flux_unchecked(ul, g);
    let fr = physical_flux_unchecked(ur, g);
    if sl >= 0.0 {
        return HllcFlux { flux: fl, fell_back: false };
    }
    if sr <= 0.0 {
        return HllcFlux { flux: fr, fell_back: false };
    }

    let s_star = (sl * hr * (vr - sr) - sr * hl * (vl - sl)) / denom;
    let star = |u: ConservedState, v: f64, s: f64, f: Pair| {
        let h_star = u.h * (s - v) / (s - s_star);
        f + s * Pair::new(h_star - u.h, h_star * s_star - u.m)
    };
    let flux = if s_star >= 0.0 {
        star(ul, vl, sl, fl)
    } else {
        star(ur, vr, sr, fr)
    };
    HllcFlux { flux, fell_back: false }
}

/// `ȟ_γ = {h+b} - (γ/2)[h+b] - {b}` from the two one-sided values.
pub fn check_h_gamma(h_l: f64, h_r: f64, b_l: f64, b_r: f64, gamma: GammaChoice) -> Result<f64> {
    if !(h_l > 0.0 && h_r > 0.0 && h_l.is_finite() && h_r.is_finite()) {
        return Err(Error::Domain(format!("heights must be positive, got ({h_l}, {h_r})")));
    }
    Ok(check_h_gamma_unchecked(h_l, h_r, b_l, b_r, gamma))
}

#[inline]
pub(crate) fn check_h_gamma_unchecked(h_l: f64, h_r: f64, b_l: f64, b_r: f64, gamma: GammaChoice) -> f64 {
    let eta_l = h_l + b_l;
    let eta_r = h_r + b_r;
    let gamma = gamma.value(b_l, b_r);
    0.5 * (eta_l + eta_r) - 0.5 * gamma * (eta_r - eta_l) - 0.5 * (b_l + b_r)
}

/// `Ŝ = -(g/2) (0, ȟ_γ) [b]`.
pub fn interface_source(h_l: f64, h_r: f64, b_l: f64, b_r: f64, gamma: GammaChoice, g: f64) -> Result<Pair> {
    check_gravity(g)?;
    let h_check = check_h_gamma(h_l, h_r, b_l, b_r, gamma)?;
    Ok(source_from_check(h_check, b_l, b_r, g))
}

#[inline]
pub(crate) fn interface_source_unchecked(h_l: f64, h_r: f64, b_l: f64, b_r: f64, gamma: GammaChoice, g: f64) -> Pair {
    source_from_check(check_h_gamma_unchecked(h_l, h_r, b_l, b_r, gamma), b_l, b_r, g)
}

#[inline]
fn source_from_check(h_check: f64, b_l: f64, b_r: f64, g: f64) -> Pair {
    if b_l == b_r {
        return Pair::ZERO;
    }
    Pair::new(0.0, -0.5 * g * h_check * (b_r - b_l))
}

/// Correction `N̂` of the unified form for the given variant.
///
/// `alpha1` is the mass viscosity actually used at this interface (it is 0
/// at the step for the central variants). For hydrostatic reconstruction
/// the reconstructed heights `h + b - max(b_l, b_r)` must stay positive;
/// otherwise [`Error::DriedCell`] is returned with interface index 0 and the
/// caller fills in the real index.
pub fn n_hat(
    variant: NhatVariant,
    ul: ConservedState,
    ur: ConservedState,
    b_l: f64,
    b_r: f64,
    alpha1: f64,
    g: f64,
) -> Result<Pair> {
    check_heights(&ul, &ur, g)?;
    n_hat_unchecked(variant, ul, ur, b_l, b_r, alpha1, g)
}

#[inline]
pub(crate) fn n_hat_unchecked(
    variant: NhatVariant,
    ul: ConservedState,
    ur: ConservedState,
    b_l: f64,
    b_r: f64,
    alpha1: f64,
    g: f64,
) -> Result<Pair> {
    match variant {
        NhatVariant::None => Ok(Pair::ZERO),
        NhatVariant::WbLxF => Ok(Pair::new(alpha1, 0.0)),
        NhatVariant::XingShu => Ok(Pair::new(alpha1, 0.5 * g * ((ur.h + b_r) - (ul.h + b_l)))),
        NhatVariant::HydrostaticReconstruction => {
            let top = b_l.max(b_r);
            let h_star_l = ul.h + b_l - top;
            let h_star_r = ur.h + b_r - top;
            if !(h_star_l > 0.0 && h_star_r > 0.0) {
                return Err(Error::DriedCell {
                    interface: 0,
                    height: h_star_l.min(h_star_r),
                });
            }
            let jump = b_r - b_l;
            let second = if jump > 0.0 {
                // lower side is the left one
                (ul.m * ul.m / ul.h) / (jump - ul.h)
            } else if jump < 0.0 {
                -(ur.m * ur.m / ur.h) / (-jump - ur.h)
            } else {
                0.0
            };
            Ok(Pair::new(alpha1, second))
        }
    }
}

/// `M̂ = ½ N̂ [b]`.
#[inline]
pub fn m_hat(n_hat: Pair, b_l: f64, b_r: f64) -> Pair {
    (0.5 * (b_r - b_l)) * n_hat
}
