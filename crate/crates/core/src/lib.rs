//! Casimir-Polder atom-wall forces for stationary, switched-on and
//! adiabatically moving two-level atoms in front of a perfect conductor.
//!
//! Units: ħ = 1, configurable speed of light (see [`model::Units`]).
//! Forces are wall-normal; positive means away from the wall.

pub mod adiabatic;
pub mod dressing;
pub mod error;
pub mod model;
pub mod output;
pub mod quadrature;
pub mod specfun;
pub mod steady;
pub mod transient;
pub mod verify;

pub use error::{Error, Result};
pub use model::{AtomParams, Kinematics, ModeGrid, Polarization, ReleaseDistance, Units, WaveVector};
pub use quadrature::QuadratureConfig;
pub use specfun::KernelEval;
pub use steady::{ForceValue, PotentialValue, Regime};
