//! Symmetric transonic shocks in straight divergent nozzles.
//!
//! * [`gas`]: polytropic closure `rho(v^2)`, pressure, sound speed, fluxes.
//! * [`radial`]: the radially symmetric shock family, the exit maps and
//!   shock fitting from a prescribed exit datum.
//! * [`fbp2d`]: a shock-fitting free-boundary iteration in a 2D wedge that
//!   checks perturbed fronts collapse back onto the symmetric shock.
//! * [`cli`]: the `transonic` command-line front end and its file formats.

pub mod cli;
pub mod fbp2d;
pub mod gas;
pub mod quad;
pub mod radial;
pub mod roots;

pub use gas::{GasError, GasModel};
pub use radial::{
    AdmissibleInterval, Branch, ExitDatum, ExitKind, NozzleGeometry, RadialError, RadialProblem, RadialProfile,
    TransonicShockSolution,
};
