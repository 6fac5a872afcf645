//! States, bottom topography and the uniform mesh.
//!
//! Heights are strictly positive everywhere in this crate; dry beds are not
//! modelled. The bottom has a single jump at `x = 0` and the mesh always
//! places a cell interface exactly there.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gravitational acceleration used by every test in the registry.
pub const GRAVITY: f64 = 9.81;

pub(crate) fn check_gravity(g: f64) -> Result<()> {
    if g.is_finite() && g > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("gravity must be positive, got {g}")))
    }
}

fn check_height(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("water height must be positive, got {h}")))
    }
}

/// Water height and momentum per unit width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedState {
    pub h: f64,
    pub m: f64,
}

impl ConservedState {
    pub fn new(h: f64, m: f64) -> Result<Self> {
        check_height(h)?;
        if !m.is_finite() {
            return Err(Error::Domain(format!("momentum must be finite, got {m}")));
        }
        Ok(Self { h, m })
    }

    /// Converts `(h, Fr)` into `(h, m)` with `m = h Fr sqrt(g h)`.
    pub fn from_primitive(w: PrimitiveState, g: f64) -> Result<Self> {
        check_gravity(g)?;
        check_height(w.h)?;
        Self::new(w.h, w.h * w.fr * (g * w.h).sqrt())
    }

    pub fn velocity(&self) -> f64 {
        self.m / self.h
    }

    /// Froude number `u / sqrt(g h)`.
    pub fn froude(&self, g: f64) -> Result<f64> {
        check_height(self.h)?;
        check_gravity(g)?;
        Ok(self.velocity() / (g * self.h).sqrt())
    }

    pub fn to_primitive(&self, g: f64) -> Result<PrimitiveState> {
        Ok(PrimitiveState {
            h: self.h,
            fr: self.froude(g)?,
        })
    }

    /// Largest characteristic speed magnitude `|u| + sqrt(g h)`.
    pub fn char_speed(&self, g: f64) -> Result<f64> {
        check_height(self.h)?;
        check_gravity(g)?;
        Ok(self.char_speed_unchecked(g))
    }

    #[inline]
    pub(crate) fn char_speed_unchecked(&self, g: f64) -> f64 {
        (self.m / self.h).abs() + (g * self.h).sqrt()
    }
}

/// Water height and Froude number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub h: f64,
    pub fr: f64,
}

impl PrimitiveState {
    pub fn new(h: f64, fr: f64) -> Result<Self> {
        check_height(h)?;
        if !fr.is_finite() {
            return Err(Error::Domain(format!("Froude number must be finite, got {fr}")));
        }
        Ok(Self { h, fr })
    }
}

type SideFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Side {
    Flat(f64),
    Profile(SideFn),
}

impl Side {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Side::Flat(b) => *b,
            Side::Profile(f) => f(x),
        }
    }
}

/// Bottom elevation, smooth on each side of `x = 0` with one jump there.
///
/// The two sides are kept as separate functions so that the jump is the
/// exact difference of the one-sided limits.
#[derive(Clone)]
pub struct Topography {
    left: Side,
    right: Side,
}

impl Topography {
    /// Piecewise-constant bed: `b_left` for `x < 0`, `b_right` for `x >= 0`.
    pub fn step(b_left: f64, b_right: f64) -> Result<Self> {
        if !(b_left.is_finite() && b_right.is_finite()) {
            return Err(Error::Domain("bed elevations must be finite".into()));
        }
        Ok(Self {
            left: Side::Flat(b_left),
            right: Side::Flat(b_right),
        })
    }

    pub fn flat(b: f64) -> Result<Self> {
        Self::step(b, b)
    }

    /// General bed from two side profiles; `left` is used for `x < 0`.
    pub fn from_sides<L, R>(left: L, right: R) -> Result<Self>
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let topo = Self {
            left: Side::Profile(Arc::new(left)),
            right: Side::Profile(Arc::new(right)),
        };
        if !topo.jump().is_finite() {
            return Err(Error::Domain("bed jump at x = 0 must be finite".into()));
        }
        Ok(topo)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.left.eval(x)
        } else {
            self.right.eval(x)
        }
    }

    pub fn left_limit(&self) -> f64 {
        self.left.eval(0.0)
    }

    pub fn right_limit(&self) -> f64 {
        self.right.eval(0.0)
    }

    /// `[b] = b(0+) - b(0-)`.
    pub fn jump(&self) -> f64 {
        self.right_limit() - self.left_limit()
    }
}

impl fmt::Debug for Topography {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Topography")
            .field("left_limit", &self.left_limit())
            .field("right_limit", &self.right_limit())
            .finish()
    }
}

/// Uniform mesh with an interface at `x = 0`.
///
/// Cells are stored left to right with array index `0..n_cells`. The cells
/// `0..n_left` lie left of the step, so the step is interface `n_left`
/// (interface `i` separates cells `i - 1` and `i`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    x_lo: f64,
    x_hi: f64,
    n_cells: usize,
    n_left: usize,
    dx: f64,
}

impl Mesh {
    /// Builds the mesh, rejecting domains where no interface lands on 0.
    pub fn new(x_lo: f64, x_hi: f64, n_cells: usize) -> Result<Self> {
        let (n_left, ratio) = Self::split(x_lo, x_hi, n_cells)?;
        let slack = 4.0 * f64::EPSILON * ratio.abs().max(1.0);
        if (ratio - n_left as f64).abs() > slack {
            return Err(Error::Mesh(format!(
                "no interface at x = 0 for [{x_lo}, {x_hi}] with {n_cells} cells \
                 (0 falls {ratio} cells from the left end)"
            )));
        }
        Ok(Self::from_split(x_lo, x_hi, n_cells, n_left))
    }

    /// Like [`Mesh::new`], but when 0 does not fall on an interface the
    /// domain is translated by less than half a cell so that it does.
    /// Cell width and cell count are unchanged.
    pub fn snapped(x_lo: f64, x_hi: f64, n_cells: usize) -> Result<Self> {
        if let Ok(mesh) = Self::new(x_lo, x_hi, n_cells) {
            return Ok(mesh);
        }
        let (n_left, _) = Self::split(x_lo, x_hi, n_cells)?;
        let dx = (x_hi - x_lo) / n_cells as f64;
        let lo = -(n_left as f64) * dx;
        let hi = (n_cells - n_left) as f64 * dx;
        Ok(Self::from_split(lo, hi, n_cells, n_left))
    }

    fn split(x_lo: f64, x_hi: f64, n_cells: usize) -> Result<(usize, f64)> {
        if !(x_lo.is_finite() && x_hi.is_finite()) || !(x_lo < 0.0 && 0.0 < x_hi) {
            return Err(Error::Mesh(format!(
                "domain [{x_lo}, {x_hi}] must strictly contain x = 0"
            )));
        }
        if n_cells < 2 {
            return Err(Error::Mesh(format!("need at least 2 cells, got {n_cells}")));
        }
        let ratio = -x_lo * n_cells as f64 / (x_hi - x_lo);
        let n_left = ratio.round();
        if n_left < 1.0 || n_left > (n_cells - 1) as f64 {
            return Err(Error::Mesh(format!(
                "step would fall on the boundary of [{x_lo}, {x_hi}] with {n_cells} cells"
            )));
        }
        Ok((n_left as usize, ratio))
    }

    fn from_split(x_lo: f64, x_hi: f64, n_cells: usize, n_left: usize) -> Self {
        Self {
            x_lo,
            x_hi,
            n_cells,
            n_left,
            dx: (x_hi - x_lo) / n_cells as f64,
        }
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of cells left of the step; also the step's interface index.
    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn step_interface(&self) -> usize {
        self.n_left
    }

    /// Cell center, measured from the step so that cells straddle 0 symmetrically.
    pub fn center(&self, cell: usize) -> f64 {
        (cell as f64 - self.n_left as f64 + 0.5) * self.dx
    }

    /// Position of interface `i` (`0..=n_cells`); interface `n_left` is exactly 0.
    pub fn interface(&self, i: usize) -> f64 {
        (i as f64 - self.n_left as f64) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.center(i))
    }

    /// Maps the signed cell label (0 = last cell left of the step,
    /// 1 = first cell right of it) to an array index.
    pub fn index_of_label(&self, label: i64) -> Option<usize> {
        let idx = self.n_left as i64 - 1 + label;
        (0..self.n_cells as i64).contains(&idx).then_some(idx as usize)
    }
}
