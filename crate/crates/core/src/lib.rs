//! Two-dimensional incompressible flow on particle flow maps with impulse
//! gauge variables, coupled to elastic solids through either a material point
//! (shared-grid) backend or an immersed boundary (force spreading) backend.
//!
//! Module map:
//!
//! - [`grid`]: staggered MAC grid, quadratic B-spline transfers, variable-density projection.
//! - [`flowmap`]: fluid particles carrying flow-map Jacobians, RK4 marching, reinitialization.
//! - [`impulse`]: impulse transport, the pressure/force path-integral buffers, impulse-to-velocity.
//! - [`mpm`]: material point elastic solids with substepping, narrowband particles and active strain.
//! - [`ibm`]: smoothed delta kernel, force spreading, XPBD and mass-spring thin structures.
//! - [`driver`]: configuration, scenario catalog, the time integration loop and run orchestration.
//! - [`diagnostics`]: vorticity, energy, solid traces, shedding analysis and output writers.

pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod flowmap;
pub mod grid;
pub mod ibm;
pub mod impulse;
pub mod math;
pub mod mpm;

pub use error::{Result, SimError};
pub use math::{Mat2, Vec2};
