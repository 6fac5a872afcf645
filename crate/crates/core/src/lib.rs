//! Finite-volume schemes for the one-dimensional shallow-water equations
//! over a bottom step, with an exact Riemann solver to measure them against.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod flux;
pub mod harness;
pub mod scheme;
pub mod state;

pub use error::{Error, Result};
pub use flux::{GammaChoice, NhatVariant};
pub use harness::{lookup, registry, ExperimentConfig};
pub use scheme::{Preset, SchemeSpec, SimulationState};
pub use state::{ConservedState, Mesh, PrimitiveState, Topography, GRAVITY};
